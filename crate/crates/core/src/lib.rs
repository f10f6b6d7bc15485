//! Tabletop tidying engine.
//!
//! Tidying a table decomposes into two concerns: *semantic* tidiness (which
//! objects belong together) and *visual-spatial* tidiness (how a group is
//! arranged in space). This crate implements both halves and the machinery
//! around them:
//!
//! - [`scene`] — the 2D table world: rectangular objects, collision rules,
//!   pick-and-place state transitions, scene JSON.
//! - [`raster`] — multi-channel grid images of a scene (the scorer input) and
//!   PPM rendering for inspection.
//! - [`nn`] — a small differentiable kernel (dense, strided conv, Adam) with
//!   hand-derived gradients and a finite-difference oracle.
//! - [`scorer`] — the pairwise tidiness score: a Siamese encoder with a scalar
//!   head, compared through a Bradley-Terry probability.
//! - [`oracle`] — an analytic disorder metric used as the evaluation yardstick.
//! - [`datagen`] — synthetic preference pairs from two-stage random walks off
//!   tidy template layouts.
//! - [`trainer`] — preference-learning loop, metrics, and checkpoint files.
//! - [`planner`] — scene descriptions, LLM prompting and plan parsing, plus a
//!   deterministic rule-based fallback planner.
//! - [`grounding`] — turning object-centric actions into exact collision-free
//!   coordinates by scoring sampled candidates, and the episode executor.

pub mod datagen;
pub mod grounding;
pub mod nn;
pub mod oracle;
pub mod planner;
pub mod raster;
pub mod rng;
pub mod scene;
pub mod scorer;
pub mod trainer;

pub use oracle::DisorderReport;
pub use raster::RasterImage;
pub use scene::{ObjectSpec, Placement, SceneState};
pub use scorer::{EncoderKind, ScorerModel};

//! Grounding object-centric actions to exact coordinates.
//!
//! To ground one action, collision-free candidate positions are drawn from an
//! isotropic Gaussian around the action's semantic anchor (the sigma grows
//! when rejections pile up, so crowded anchors still get coverage). Under the
//! `score` strategy the candidate whose resulting image maximizes the
//! tidiness score is chosen — with the Bradley-Terry head this is the same
//! placement that minimizes `pair_prob(current, candidate)`. The
//! `collision-only` strategy takes the first collision-free candidate and is
//! the decomposition baseline.
//!
//! Episodes apply a whole plan sequentially. Infeasible actions are skipped
//! with the object left in place and the reason recorded; a `trace` records
//! every candidate considered.

use std::collections::BTreeMap;

use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use crate::planner::{ActionTarget, PlanProposal};
use crate::raster::rasterize;
use crate::rng::make_rng;
use crate::scene::{ObjectSpec, SceneState};
use crate::scorer::ScorerModel;

/// How candidate placements are ranked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroundingStrategy {
    /// Maximize the tidiness score over sampled candidates.
    Score,
    /// Take the first collision-free candidate.
    CollisionOnly,
}

impl GroundingStrategy {
    pub fn name(self) -> &'static str {
        match self {
            GroundingStrategy::Score => "score",
            GroundingStrategy::CollisionOnly => "collision-only",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "score" => Some(GroundingStrategy::Score),
            "collision-only" => Some(GroundingStrategy::CollisionOnly),
            _ => None,
        }
    }
}

/// Candidate sampling and selection parameters.
#[derive(Debug, Clone)]
pub struct GroundingConfig {
    pub strategy: GroundingStrategy,
    /// Candidates to collect per action (N).
    pub samples: usize,
    /// Initial sigma as a multiple of the involved half extents.
    pub sigma_initial_factor: f64,
    /// Sigma multiplier applied after every 8 consecutive rejections.
    pub sigma_growth: f64,
    pub max_attempts: usize,
    pub seed: u64,
}

impl Default for GroundingConfig {
    fn default() -> Self {
        Self {
            strategy: GroundingStrategy::Score,
            samples: 64,
            sigma_initial_factor: 1.5,
            sigma_growth: 1.5,
            max_attempts: 512,
            seed: 0,
        }
    }
}

const REJECTIONS_PER_GROWTH: usize = 8;

/// One grounded pick-and-place tuple. `z` is always 0 on the 2D table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundedAction {
    #[serde(rename = "object")]
    pub object_id: String,
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

/// Errors from grounding a single action.
#[derive(Debug, thiserror::Error)]
pub enum GroundingError {
    #[error("missing anchor: {0}")]
    MissingAnchor(String),
    #[error("unknown object: {0}")]
    UnknownObject(String),
    #[error("grounding infeasible: {0}")]
    Infeasible(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Objects grounded into each named group during an episode.
#[derive(Debug, Default, Clone)]
pub struct GroupRegistry {
    members: BTreeMap<String, Vec<String>>,
}

impl GroupRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, group: &str, object_id: &str) {
        self.members.entry(group.to_string()).or_default().push(object_id.to_string());
    }

    pub fn members(&self, group: &str) -> &[String] {
        self.members.get(group).map(Vec::as_slice).unwrap_or(&[])
    }
}

/// Resolve an action's target to an anchor point.
///
/// `NEAR` anchors on the anchor object's current center. `GROUP` anchors on
/// the centroid of the group's already-grounded members, or the center of the
/// least-occupied table quadrant for a new group (occupancy by footprint
/// area, ties to the lowest quadrant index). `AT` is itself.
pub fn anchor_of(
    scene: &SceneState,
    target: &ActionTarget,
    registry: &GroupRegistry,
) -> Result<(f64, f64), GroundingError> {
    match target {
        ActionTarget::Near(anchor_id) => scene
            .get(anchor_id)
            .map(|p| (p.x, p.y))
            .ok_or_else(|| GroundingError::MissingAnchor(anchor_id.clone())),
        ActionTarget::Group(name) => {
            let placed: Vec<(f64, f64)> = registry
                .members(name)
                .iter()
                .filter_map(|id| scene.get(id).map(|p| (p.x, p.y)))
                .collect();
            if placed.is_empty() {
                Ok(emptiest_quadrant_center(scene))
            } else {
                let n = placed.len() as f64;
                Ok((
                    placed.iter().map(|(x, _)| x).sum::<f64>() / n,
                    placed.iter().map(|(_, y)| y).sum::<f64>() / n,
                ))
            }
        }
        ActionTarget::At(x, y) => Ok((*x, *y)),
    }
}

fn emptiest_quadrant_center(scene: &SceneState) -> (f64, f64) {
    let (hw, hd) = (scene.table_width / 2.0, scene.table_depth / 2.0);
    let quadrants = [
        (0.0, 0.0),
        (hw, 0.0),
        (0.0, hd),
        (hw, hd),
    ];
    let mut best = 0;
    let mut best_area = f64::INFINITY;
    for (i, &(qx, qy)) in quadrants.iter().enumerate() {
        let mut area = 0.0;
        for p in scene.placements() {
            let (x0, x1) = p.x_span();
            let (y0, y1) = p.y_span();
            let w = (x1.min(qx + hw) - x0.max(qx)).max(0.0);
            let d = (y1.min(qy + hd) - y0.max(qy)).max(0.0);
            area += w * d;
        }
        if area < best_area {
            best_area = area;
            best = i;
        }
    }
    (quadrants[best].0 + hw / 2.0, quadrants[best].1 + hd / 2.0)
}

/// Draw up to `config.samples` collision-free positions for `object` from a
/// Gaussian around `anchor`. The scale starts at `sigma_initial_factor` times
/// the involved half extents (object plus anchor object for `NEAR`) and grows
/// by `sigma_growth` after every 8 consecutive rejections.
pub fn sample_candidates(
    scene: &SceneState,
    object: &ObjectSpec,
    anchor: (f64, f64),
    anchor_object: Option<&ObjectSpec>,
    config: &GroundingConfig,
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(f64, f64)>, GroundingError> {
    let wanted = if config.strategy == GroundingStrategy::CollisionOnly { 1 } else { config.samples };
    let mut sigma = config.sigma_initial_factor
        * (object.max_extent() / 2.0
            + anchor_object.map(|a| a.max_extent() / 2.0).unwrap_or(0.0));
    let mut candidates = Vec::with_capacity(wanted);
    let mut consecutive_rejections = 0;
    for _ in 0..config.max_attempts {
        if candidates.len() >= wanted {
            break;
        }
        let dx: f64 = StandardNormal.sample(rng);
        let dy: f64 = StandardNormal.sample(rng);
        let (x, y) = (anchor.0 + dx * sigma, anchor.1 + dy * sigma);
        if scene.collision_free(object, x, y) {
            candidates.push((x, y));
            consecutive_rejections = 0;
        } else {
            consecutive_rejections += 1;
            if consecutive_rejections % REJECTIONS_PER_GROWTH == 0 {
                sigma *= config.sigma_growth;
            }
        }
    }
    if candidates.is_empty() {
        return Err(GroundingError::Infeasible(format!(
            "no collision-free candidate for `{}` near ({:.3}, {:.3}) in {} attempts",
            object.id, anchor.0, anchor.1, config.max_attempts
        )));
    }
    Ok(candidates)
}

/// One evaluated candidate. The score is present under the `score` strategy.
#[derive(Debug, Clone, Serialize)]
pub struct CandidateEval {
    pub x: f64,
    pub y: f64,
    pub score: Option<f64>,
}

/// Ground one action: sample candidates and select per the strategy.
/// Returns the grounded action, every candidate considered, and the chosen
/// index. Ties on score break to the lowest candidate index.
pub fn ground(
    model: Option<&ScorerModel>,
    scene: &SceneState,
    object_id: &str,
    target: &ActionTarget,
    registry: &GroupRegistry,
    config: &GroundingConfig,
    rng: &mut ChaCha8Rng,
) -> Result<(GroundedAction, Vec<CandidateEval>, usize), GroundingError> {
    let object = scene
        .get(object_id)
        .map(|p| p.object.clone())
        .ok_or_else(|| GroundingError::UnknownObject(object_id.to_string()))?;
    let anchor = anchor_of(scene, target, registry)?;
    let anchor_object = match target {
        ActionTarget::Near(anchor_id) => scene.get(anchor_id).map(|p| p.object.clone()),
        _ => None,
    };
    let positions =
        sample_candidates(scene, &object, anchor, anchor_object.as_ref(), config, rng)?;

    let (evals, chosen) = match config.strategy {
        GroundingStrategy::CollisionOnly => {
            let evals: Vec<CandidateEval> =
                positions.iter().map(|&(x, y)| CandidateEval { x, y, score: None }).collect();
            (evals, 0)
        }
        GroundingStrategy::Score => {
            let model = model.ok_or_else(|| {
                GroundingError::InvalidArgument("score strategy requires a checkpoint".into())
            })?;
            let base = if scene.get(object_id).is_some() {
                scene.remove(object_id).expect("object exists")
            } else {
                scene.clone()
            };
            let mut evals = Vec::with_capacity(positions.len());
            let mut best = 0usize;
            let mut best_score = f64::NEG_INFINITY;
            for (i, &(x, y)) in positions.iter().enumerate() {
                let candidate_scene = base.place(&object, x, y).map_err(|e| {
                    GroundingError::Infeasible(format!("candidate placement failed: {e}"))
                })?;
                let image = rasterize(&candidate_scene).map_err(|e| {
                    GroundingError::Infeasible(format!("candidate raster failed: {e}"))
                })?;
                let score = model.score(&image);
                if score > best_score {
                    best_score = score;
                    best = i;
                }
                evals.push(CandidateEval { x, y, score: Some(score) });
            }
            (evals, best)
        }
    };
    let (x, y) = (evals[chosen].x, evals[chosen].y);
    Ok((GroundedAction { object_id: object_id.to_string(), x, y, z: 0.0 }, evals, chosen))
}

/// Trace record for one plan action.
#[derive(Debug, Clone, Serialize)]
pub struct ActionRecord {
    pub index: usize,
    #[serde(rename = "object")]
    pub object_id: String,
    pub target: String,
    #[serde(flatten)]
    pub outcome: ActionOutcome,
}

#[derive(Debug, Clone, Serialize)]
#[serde(tag = "outcome", rename_all = "kebab-case")]
pub enum ActionOutcome {
    Applied {
        x: f64,
        y: f64,
        chosen_index: usize,
        chosen_score: Option<f64>,
        candidates: Vec<CandidateEval>,
    },
    Skipped {
        reason: String,
    },
}

/// The result of executing a plan.
#[derive(Debug, Clone)]
pub struct EpisodeResult {
    pub actions: Vec<GroundedAction>,
    pub final_scene: SceneState,
    pub trace: Vec<ActionRecord>,
}

impl EpisodeResult {
    /// Objects whose actions were skipped, with reasons, in plan order.
    pub fn skipped(&self) -> Vec<(String, String)> {
        self.trace
            .iter()
            .filter_map(|r| match &r.outcome {
                ActionOutcome::Skipped { reason } => {
                    Some((r.object_id.clone(), reason.clone()))
                }
                ActionOutcome::Applied { .. } => None,
            })
            .collect()
    }

    /// The plan-output JSON document.
    pub fn plan_output_json(&self) -> String {
        #[derive(Serialize)]
        struct SkipLine<'a> {
            object: &'a str,
            reason: &'a str,
        }
        #[derive(Serialize)]
        struct PlanOutput<'a> {
            actions: &'a [GroundedAction],
            skipped: Vec<SkipLine<'a>>,
        }
        let skipped = self
            .trace
            .iter()
            .filter_map(|r| match &r.outcome {
                ActionOutcome::Skipped { reason } => {
                    Some(SkipLine { object: &r.object_id, reason })
                }
                ActionOutcome::Applied { .. } => None,
            })
            .collect();
        serde_json::to_string(&PlanOutput { actions: &self.actions, skipped })
            .expect("plan output serializes")
    }

    /// The trace as JSONL, one record per action.
    pub fn trace_jsonl(&self) -> String {
        let mut out = String::new();
        for record in &self.trace {
            out.push_str(&serde_json::to_string(record).expect("trace serializes"));
            out.push('\n');
        }
        out
    }
}

/// Execute a plan sequentially. `AT` actions bypass sampling and apply only
/// if collision-free; infeasible groundings are skipped with the object left
/// in place. The final scene always satisfies the scene invariants.
pub fn tidy_episode(
    scene: &SceneState,
    plan: &PlanProposal,
    model: Option<&ScorerModel>,
    config: &GroundingConfig,
) -> Result<EpisodeResult, GroundingError> {
    if config.strategy == GroundingStrategy::Score && model.is_none() {
        return Err(GroundingError::InvalidArgument(
            "score strategy requires a checkpoint".into(),
        ));
    }
    let mut rng = make_rng(config.seed);
    let mut registry = GroupRegistry::new();
    let mut current = scene.clone();
    let mut actions = Vec::new();
    let mut trace = Vec::new();

    for (index, action) in plan.actions.iter().enumerate() {
        let target_text = action.target.to_string();
        let record_skip = |reason: String, trace: &mut Vec<ActionRecord>| {
            trace.push(ActionRecord {
                index,
                object_id: action.object_id.clone(),
                target: target_text.clone(),
                outcome: ActionOutcome::Skipped { reason },
            });
        };

        let Some(placement) = current.get(&action.object_id) else {
            record_skip("unknown-object".into(), &mut trace);
            continue;
        };
        let object = placement.object.clone();

        if let ActionTarget::At(x, y) = action.target {
            // Direct placements are the LLM's own coordinates; physically
            // infeasible ones are rejected and logged.
            if current.collision_free(&object, x, y) {
                current = current.place(&object, x, y).expect("checked collision-free");
                actions.push(GroundedAction {
                    object_id: action.object_id.clone(),
                    x,
                    y,
                    z: 0.0,
                });
                trace.push(ActionRecord {
                    index,
                    object_id: action.object_id.clone(),
                    target: target_text,
                    outcome: ActionOutcome::Applied {
                        x,
                        y,
                        chosen_index: 0,
                        chosen_score: None,
                        candidates: vec![CandidateEval { x, y, score: None }],
                    },
                });
            } else {
                record_skip("collision".into(), &mut trace);
            }
            continue;
        }

        match ground(model, &current, &action.object_id, &action.target, &registry, config, &mut rng)
        {
            Ok((grounded, candidates, chosen_index)) => {
                current = current
                    .place(&object, grounded.x, grounded.y)
                    .expect("candidates are collision-free");
                if let ActionTarget::Group(name) = &action.target {
                    registry.add(name, &action.object_id);
                }
                trace.push(ActionRecord {
                    index,
                    object_id: action.object_id.clone(),
                    target: target_text,
                    outcome: ActionOutcome::Applied {
                        x: grounded.x,
                        y: grounded.y,
                        chosen_index,
                        chosen_score: candidates[chosen_index].score,
                        candidates,
                    },
                });
                actions.push(grounded);
            }
            Err(GroundingError::Infeasible(_)) => {
                record_skip("grounding-infeasible".into(), &mut trace);
            }
            Err(GroundingError::MissingAnchor(anchor)) => {
                record_skip(format!("missing-anchor:{anchor}"), &mut trace);
            }
            Err(e) => return Err(e),
        }
    }

    Ok(EpisodeResult { actions, final_scene: current, trace })
}

//! Preference-learning loop for the tidiness score.
//!
//! Minimizes the pairwise cross-entropy `-log sigmoid(score(tidier) -
//! score(messier))` over the synthetic preference pairs with Adam. Validation
//! splits by trajectory id — pairs within a trajectory share scenes, so a
//! pair-level split would leak. Early stopping tracks validation pairwise
//! accuracy and the best-epoch parameters are returned, quantized to the f32
//! checkpoint precision.

mod checkpoint;

pub use checkpoint::{
    checkpoint_bytes, load_checkpoint, parse_checkpoint, save_checkpoint, CheckpointError,
    HEAD_TAG_BRADLEY_TERRY, MAGIC, VERSION,
};

use std::collections::HashMap;

use rand::seq::SliceRandom;
use serde::Serialize;

use crate::datagen::{Dataset, PreferencePair};
use crate::nn::{log_sigmoid, sigmoid, AdamParams, AdamState};
use crate::raster::rasterize;
use crate::rng::{make_rng, split_seed};
use crate::scene::SceneState;
use crate::scorer::{EncoderKind, ScorerInput, ScorerModel};

const INIT_HALF_RANGE: f64 = 0.08;

// Seed-derivation lanes under the training seed.
const SEED_LANE_INIT: u64 = 0;
const SEED_LANE_SPLIT: u64 = 1;
const SEED_LANE_EPOCH_BASE: u64 = 2;

/// Errors from training and evaluation.
#[derive(Debug, thiserror::Error)]
pub enum TrainError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("dangling scene reference: {0}")]
    DanglingReference(String),
    #[error("raster error: {0}")]
    Raster(#[from] crate::raster::RasterError),
}

/// Training hyperparameters.
#[derive(Debug, Clone)]
pub struct TrainConfig {
    pub encoder: EncoderKind,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Epochs without a validation-accuracy gain before stopping.
    pub early_stop_patience: usize,
    /// Fraction of trajectories held out for validation.
    pub val_fraction: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            encoder: EncoderKind::Features,
            learning_rate: 1e-3,
            batch_size: 64,
            max_epochs: 50,
            early_stop_patience: 5,
            val_fraction: 0.15,
            seed: 0,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), TrainError> {
        if !(self.val_fraction > 0.0 && self.val_fraction < 1.0) {
            return Err(TrainError::InvalidArgument("val_fraction must be in (0, 1)".into()));
        }
        if self.batch_size == 0 || self.max_epochs == 0 {
            return Err(TrainError::InvalidArgument("counts must be positive".into()));
        }
        Ok(())
    }
}

/// One epoch of the metrics history.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_accuracy: f64,
}

/// Everything `train` reports besides the model itself.
#[derive(Debug, Clone, Serialize)]
pub struct TrainReport {
    pub metrics: Vec<EpochMetrics>,
    pub best_epoch: usize,
    pub best_val_accuracy: f64,
    pub train_pair_count: usize,
    pub val_pair_count: usize,
    pub val_trajectories: Vec<u64>,
}

/// Per-scene scorer inputs, cached for the features encoder and recomputed
/// per use for the CNN encoder (whose inputs are full rasters).
pub struct SceneInputs<'a> {
    kind: EncoderKind,
    scenes: &'a HashMap<String, SceneState>,
    cached: HashMap<&'a str, ScorerInput>,
}

impl<'a> SceneInputs<'a> {
    pub fn prepare(
        model: &ScorerModel,
        scenes: &'a HashMap<String, SceneState>,
    ) -> Result<Self, TrainError> {
        let mut cached = HashMap::new();
        if model.encoder == EncoderKind::Features {
            for (id, scene) in scenes {
                cached.insert(id.as_str(), model.prepare(&rasterize(scene)?));
            }
        }
        Ok(Self { kind: model.encoder, scenes, cached })
    }

    pub fn input_for(&self, scene_id: &str) -> Result<ScorerInput, TrainError> {
        match self.kind {
            EncoderKind::Features => self
                .cached
                .get(scene_id)
                .cloned()
                .ok_or_else(|| TrainError::DanglingReference(scene_id.to_string())),
            EncoderKind::Cnn => {
                let scene = self
                    .scenes
                    .get(scene_id)
                    .ok_or_else(|| TrainError::DanglingReference(scene_id.to_string()))?;
                Ok(ScorerInput::Image(Box::new(rasterize(scene)?)))
            }
        }
    }
}

/// Mean Bradley-Terry cross-entropy of a batch, computed in log space.
pub fn bt_loss(
    model: &ScorerModel,
    inputs: &SceneInputs,
    batch: &[&PreferencePair],
) -> Result<f64, TrainError> {
    if batch.is_empty() {
        return Err(TrainError::InvalidArgument("empty batch".into()));
    }
    let mut total = 0.0;
    for pair in batch {
        let s_tidier = model.score_prepared(&inputs.input_for(&pair.tidier)?);
        let s_messier = model.score_prepared(&inputs.input_for(&pair.messier)?);
        total -= log_sigmoid(s_tidier - s_messier);
    }
    Ok(total / batch.len() as f64)
}

/// Fraction of pairs ranked correctly; exact score ties count one half.
pub fn pairwise_accuracy(
    model: &ScorerModel,
    inputs: &SceneInputs,
    pairs: &[&PreferencePair],
) -> Result<f64, TrainError> {
    if pairs.is_empty() {
        return Err(TrainError::InvalidArgument("no pairs to evaluate".into()));
    }
    let mut correct = 0.0;
    for pair in pairs {
        let s_tidier = model.score_prepared(&inputs.input_for(&pair.tidier)?);
        let s_messier = model.score_prepared(&inputs.input_for(&pair.messier)?);
        correct += if s_tidier > s_messier {
            1.0
        } else if s_tidier == s_messier {
            0.5
        } else {
            0.0
        };
    }
    Ok(correct / pairs.len() as f64)
}

/// Deterministic by-trajectory split: shuffle the sorted ids with the derived
/// seed and hold out `val_fraction`, at least one trajectory per side.
pub fn split_trajectories(ids: &[u64], val_fraction: f64, seed: u64) -> (Vec<u64>, Vec<u64>) {
    let mut shuffled = ids.to_vec();
    shuffled.sort_unstable();
    shuffled.shuffle(&mut make_rng(split_seed(seed, SEED_LANE_SPLIT)));
    let val_count =
        ((ids.len() as f64 * val_fraction).round() as usize).clamp(1, ids.len().saturating_sub(1));
    let (val, train) = shuffled.split_at(val_count);
    let mut val = val.to_vec();
    let mut train = train.to_vec();
    val.sort_unstable();
    train.sort_unstable();
    (train, val)
}

/// Train a scorer on a dataset. Returns the best-validation-accuracy model
/// (quantized to checkpoint precision) and the per-epoch metrics history.
pub fn train(config: &TrainConfig, dataset: &Dataset) -> Result<(ScorerModel, TrainReport), TrainError> {
    config.validate()?;
    if dataset.pairs.is_empty() {
        return Err(TrainError::InvalidArgument("dataset has no pairs".into()));
    }
    let ids = dataset.trajectory_ids();
    if ids.len() < 2 {
        return Err(TrainError::InvalidArgument(
            "need at least two trajectories to split train/validation".into(),
        ));
    }
    let (_train_ids, val_ids) = split_trajectories(&ids, config.val_fraction, config.seed);
    let in_val = |t: u64| val_ids.binary_search(&t).is_ok();
    let train_pairs: Vec<&PreferencePair> =
        dataset.pairs.iter().filter(|p| !in_val(p.trajectory)).collect();
    let val_pairs: Vec<&PreferencePair> =
        dataset.pairs.iter().filter(|p| in_val(p.trajectory)).collect();
    if train_pairs.is_empty() || val_pairs.is_empty() {
        return Err(TrainError::InvalidArgument("split left one side empty".into()));
    }

    let mut model = ScorerModel::seeded_uniform(
        config.encoder,
        split_seed(config.seed, SEED_LANE_INIT),
        INIT_HALF_RANGE,
    );
    let inputs = SceneInputs::prepare(&model, &dataset.scenes)?;
    let hyper = AdamParams { learning_rate: config.learning_rate, ..AdamParams::default() };
    let mut adam = AdamState::new(model.params.len());

    let mut metrics = Vec::new();
    let mut best_params = model.params.clone();
    let mut best_val = f64::NEG_INFINITY;
    let mut best_epoch = 0;
    let mut stale_epochs = 0;

    for epoch in 0..config.max_epochs {
        let mut order: Vec<usize> = (0..train_pairs.len()).collect();
        order.shuffle(&mut make_rng(split_seed(config.seed, SEED_LANE_EPOCH_BASE + epoch as u64)));

        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let mut grad = vec![0.0; model.params.len()];
            let inverse_batch = 1.0 / batch.len() as f64;
            for &pair_idx in batch {
                let pair = train_pairs[pair_idx];
                let input_tidier = inputs.input_for(&pair.tidier)?;
                let input_messier = inputs.input_for(&pair.messier)?;
                let s_tidier = model.score_prepared(&input_tidier);
                let s_messier = model.score_prepared(&input_messier);
                let delta = s_tidier - s_messier;
                loss_sum -= log_sigmoid(delta);
                // d(-log sigmoid(delta))/d(delta) = sigmoid(delta) - 1
                let upstream = (sigmoid(delta) - 1.0) * inverse_batch;
                model.accumulate_score_grad(&input_tidier, upstream, &mut grad);
                model.accumulate_score_grad(&input_messier, -upstream, &mut grad);
            }
            adam.step(&hyper, &mut model.params, &grad)
                .map_err(|e| TrainError::InvalidArgument(e.to_string()))?;
        }

        let val_accuracy = pairwise_accuracy(&model, &inputs, &val_pairs)?;
        metrics.push(EpochMetrics {
            epoch,
            train_loss: loss_sum / train_pairs.len() as f64,
            val_accuracy,
        });

        if val_accuracy > best_val {
            best_val = val_accuracy;
            best_params.copy_from_slice(&model.params);
            best_epoch = epoch;
            stale_epochs = 0;
        } else {
            stale_epochs += 1;
            if stale_epochs >= config.early_stop_patience {
                break;
            }
        }
    }

    model.params = best_params;
    model.quantize_f32();
    Ok((
        model,
        TrainReport {
            metrics,
            best_epoch,
            best_val_accuracy: best_val,
            train_pair_count: train_pairs.len(),
            val_pair_count: val_pairs.len(),
            val_trajectories: val_ids,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datagen::{self, DatasetMeta};
    use crate::nn::{AdamParams, AdamState};

    fn toy_dataset(trajectories: u64, seed: u64) -> Dataset {
        let meta = DatasetMeta {
            master_seed: seed,
            trajectory_count: trajectories,
            walk_steps: 6,
            variants_per_step: 2,
            ..DatasetMeta::default()
        };
        let dir = tempfile::tempdir().unwrap();
        datagen::generate_dataset(&meta, dir.path(), 1).unwrap();
        datagen::load_dataset(dir.path()).unwrap()
    }

    /// A dataset that repeats one trajectory's content under several ids,
    /// for the memorization sanity check.
    fn repeated_trajectory_dataset(copies: u64, seed: u64) -> Dataset {
        let base = toy_dataset(1, seed);
        let mut scenes = HashMap::new();
        let mut pairs = Vec::new();
        for copy in 0..copies {
            for (id, scene) in &base.scenes {
                scenes.insert(format!("c{copy}_{id}"), scene.clone());
            }
            for pair in &base.pairs {
                pairs.push(PreferencePair {
                    tidier: format!("c{copy}_{}", pair.tidier),
                    messier: format!("c{copy}_{}", pair.messier),
                    provenance: pair.provenance,
                    trajectory: copy,
                    ..pair.clone()
                });
            }
        }
        Dataset { meta: base.meta.clone(), scenes, pairs }
    }

    #[test]
    fn zero_model_loss_is_ln2_and_accuracy_is_half() {
        let dataset = toy_dataset(2, 1);
        let model = ScorerModel::zeros(EncoderKind::Features);
        let inputs = SceneInputs::prepare(&model, &dataset.scenes).unwrap();
        let all: Vec<&PreferencePair> = dataset.pairs.iter().collect();
        let loss = bt_loss(&model, &inputs, &all).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-12);
        assert_eq!(pairwise_accuracy(&model, &inputs, &all).unwrap(), 0.5);
    }

    #[test]
    fn constant_score_gap_of_ten_has_known_loss() {
        // -ln(sigmoid(10)) = ln(1 + e^-10)
        let expected = (1.0 + (-10.0f64).exp()).ln();
        assert!((expected - 4.5398e-5).abs() < 1e-9);
        assert!((-log_sigmoid(10.0) - expected).abs() < 1e-15);
    }

    #[test]
    fn reversing_roles_flips_accuracy() {
        let dataset = toy_dataset(2, 3);
        let model = ScorerModel::seeded_uniform(EncoderKind::Features, 4, 0.08);
        let inputs = SceneInputs::prepare(&model, &dataset.scenes).unwrap();
        let forward: Vec<&PreferencePair> = dataset.pairs.iter().collect();
        let reversed: Vec<PreferencePair> = dataset
            .pairs
            .iter()
            .map(|p| PreferencePair {
                tidier: p.messier.clone(),
                messier: p.tidier.clone(),
                ..p.clone()
            })
            .collect();
        let reversed_refs: Vec<&PreferencePair> = reversed.iter().collect();
        let a = pairwise_accuracy(&model, &inputs, &forward).unwrap();
        let b = pairwise_accuracy(&model, &inputs, &reversed_refs).unwrap();
        assert!((a + b - 1.0).abs() < 1e-12);
    }

    #[test]
    fn one_adam_step_decreases_a_single_pair_loss() {
        let dataset = toy_dataset(2, 5);
        let mut model = ScorerModel::seeded_uniform(EncoderKind::Features, 6, 0.08);
        let inputs = SceneInputs::prepare(&model, &dataset.scenes).unwrap();
        let pair = &dataset.pairs[0];
        let batch = [pair];
        let before = bt_loss(&model, &inputs, &batch).unwrap();

        let input_t = inputs.input_for(&pair.tidier).unwrap();
        let input_m = inputs.input_for(&pair.messier).unwrap();
        let delta = model.score_prepared(&input_t) - model.score_prepared(&input_m);
        let mut grad = vec![0.0; model.params.len()];
        model.accumulate_score_grad(&input_t, sigmoid(delta) - 1.0, &mut grad);
        model.accumulate_score_grad(&input_m, 1.0 - sigmoid(delta), &mut grad);
        let hyper = AdamParams { learning_rate: 1e-4, ..AdamParams::default() };
        AdamState::new(model.params.len()).step(&hyper, &mut model.params, &grad).unwrap();

        let after = bt_loss(&model, &inputs, &batch).unwrap();
        assert!(after < before, "loss {before} -> {after}");
    }

    #[test]
    fn memorization_sanity_on_a_repeated_trajectory() {
        let dataset = repeated_trajectory_dataset(12, 46);
        let config = TrainConfig { seed: 7, ..TrainConfig::default() };
        let (model, _) = train(&config, &dataset).unwrap();
        let inputs = SceneInputs::prepare(&model, &dataset.scenes).unwrap();
        let all: Vec<&PreferencePair> = dataset.pairs.iter().collect();
        let accuracy = pairwise_accuracy(&model, &inputs, &all).unwrap();
        assert!(accuracy > 0.95, "train accuracy {accuracy}");
    }

    #[test]
    fn training_is_deterministic() {
        let dataset = toy_dataset(4, 8);
        let config = TrainConfig { max_epochs: 6, seed: 9, ..TrainConfig::default() };
        let (model_a, report_a) = train(&config, &dataset).unwrap();
        let (model_b, report_b) = train(&config, &dataset).unwrap();
        assert_eq!(checkpoint_bytes(&model_a), checkpoint_bytes(&model_b));
        assert_eq!(report_a.metrics, report_b.metrics);
    }

    #[test]
    fn split_is_by_trajectory_with_no_scene_leakage() {
        let dataset = toy_dataset(8, 10);
        let ids = dataset.trajectory_ids();
        for seed in 0..20u64 {
            let (train_ids, val_ids) = split_trajectories(&ids, 0.25, seed);
            assert!(!train_ids.is_empty() && !val_ids.is_empty());
            assert_eq!(train_ids.len() + val_ids.len(), ids.len());
            let train_scenes: std::collections::HashSet<&String> = dataset
                .pairs
                .iter()
                .filter(|p| train_ids.contains(&p.trajectory))
                .flat_map(|p| [&p.tidier, &p.messier])
                .collect();
            let val_scenes: std::collections::HashSet<&String> = dataset
                .pairs
                .iter()
                .filter(|p| val_ids.contains(&p.trajectory))
                .flat_map(|p| [&p.tidier, &p.messier])
                .collect();
            assert!(train_scenes.is_disjoint(&val_scenes), "seed {seed} leaked scenes");
        }
    }

    #[test]
    fn empty_dataset_is_rejected() {
        let dataset = Dataset {
            meta: DatasetMeta::default(),
            scenes: HashMap::new(),
            pairs: Vec::new(),
        };
        assert!(matches!(
            train(&TrainConfig::default(), &dataset),
            Err(TrainError::InvalidArgument(_))
        ));
    }

    #[test]
    fn dangling_reference_is_reported() {
        let dataset = toy_dataset(2, 11);
        let model = ScorerModel::zeros(EncoderKind::Features);
        let inputs = SceneInputs::prepare(&model, &dataset.scenes).unwrap();
        let bogus = PreferencePair {
            tidier: "t99_s0".into(),
            messier: "t99_s1".into(),
            provenance: datagen::Provenance::Global,
            trajectory: 99,
            t_tidier: 0,
            t_messier: 1,
        };
        assert!(matches!(
            bt_loss(&model, &inputs, &[&bogus]),
            Err(TrainError::DanglingReference(_))
        ));
    }
}

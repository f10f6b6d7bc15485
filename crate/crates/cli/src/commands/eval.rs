//! `tidytable eval`
//!
//! Reports held-out pairwise accuracy (overall, by provenance, by step-gap
//! bucket) and the sign agreement between score differences and oracle
//! disorder differences. The held-out side is reconstructed from the same
//! by-trajectory split the trainer uses, so `--val-frac` and `--seed` must
//! match the training run.

use std::collections::HashMap;
use std::path::PathBuf;

use clap::Parser;
use serde_json::json;
use tidytable_core::datagen::{load_dataset, Dataset, PreferencePair, Provenance};
use tidytable_core::oracle::disorder;
use tidytable_core::scorer::{EncoderKind, ScorerModel};
use tidytable_core::trainer::{load_checkpoint, split_trajectories, SceneInputs, TrainConfig};

use crate::config::FileConfig;
use crate::error::CliError;
use crate::manifest::RunManifest;

#[derive(Parser, Debug)]
pub struct Args {
    /// Dataset directory from `gen-data`.
    #[arg(long, value_name = "DIR")]
    pub data: PathBuf,
    /// Checkpoint to evaluate.
    #[arg(long, value_name = "FILE")]
    pub ckpt: PathBuf,
    /// Expected encoder; fails if the checkpoint disagrees.
    #[arg(long)]
    pub encoder: Option<String>,
    /// Must match the training run to reproduce its held-out split.
    #[arg(long)]
    pub val_frac: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Report output path.
    #[arg(long, value_name = "FILE", default_value = "eval_report.json")]
    pub out: PathBuf,
}

/// Fraction of `(score diff, oracle disorder diff)` sign agreements; sign
/// ties count one half.
fn oracle_agreement(
    model: &ScorerModel,
    inputs: &SceneInputs,
    dataset: &Dataset,
    pairs: &[&PreferencePair],
) -> Result<f64, CliError> {
    if pairs.is_empty() {
        return Ok(f64::NAN);
    }
    let mut agree = 0.0;
    let mut disorder_cache: HashMap<String, f64> = HashMap::new();
    let mut total_of = |id: &String| -> f64 {
        *disorder_cache
            .entry(id.clone())
            .or_insert_with(|| disorder(&dataset.scenes[id]).total)
    };
    for pair in pairs {
        let score_diff = model.score_prepared(&inputs.input_for(&pair.tidier)?)
            - model.score_prepared(&inputs.input_for(&pair.messier)?);
        let disorder_diff = total_of(&pair.messier) - total_of(&pair.tidier);
        let product = score_diff * disorder_diff;
        agree += if product > 0.0 {
            1.0
        } else if product == 0.0 {
            0.5
        } else {
            0.0
        };
    }
    Ok(agree / pairs.len() as f64)
}

fn accuracy_of(
    model: &ScorerModel,
    inputs: &SceneInputs,
    pairs: &[&PreferencePair],
) -> Result<f64, CliError> {
    if pairs.is_empty() {
        return Ok(f64::NAN);
    }
    Ok(tidytable_core::trainer::pairwise_accuracy(model, inputs, pairs)?)
}

pub fn run(args: Args, file: &FileConfig) -> Result<(), CliError> {
    let model = load_checkpoint(&args.ckpt)?;
    if let Some(expected) = &args.encoder {
        let expected = EncoderKind::from_name(expected)
            .ok_or_else(|| CliError::Usage(format!("unknown encoder `{expected}`")))?;
        if expected != model.encoder {
            return Err(CliError::Io(format!(
                "checkpoint encoder is `{}`, expected `{}`",
                model.encoder.name(),
                expected.name()
            )));
        }
    }
    let val_fraction = args
        .val_frac
        .or(file.train.val_fraction)
        .unwrap_or(TrainConfig::default().val_fraction);

    let dataset = load_dataset(&args.data)?;
    if dataset.pairs.is_empty() {
        return Err(CliError::Usage("dataset has no pairs to evaluate".into()));
    }
    let ids = dataset.trajectory_ids();
    let (_, val_ids) = split_trajectories(&ids, val_fraction, args.seed);
    let held_out: Vec<&PreferencePair> = dataset
        .pairs
        .iter()
        .filter(|p| val_ids.binary_search(&p.trajectory).is_ok())
        .collect();
    if held_out.is_empty() {
        return Err(CliError::Usage("no held-out pairs under this split".into()));
    }
    let inputs = SceneInputs::prepare(&model, &dataset.scenes)?;

    let global: Vec<&PreferencePair> =
        held_out.iter().copied().filter(|p| p.provenance == Provenance::Global).collect();
    let local: Vec<&PreferencePair> =
        held_out.iter().copied().filter(|p| p.provenance == Provenance::Local).collect();
    let bucket = |lo: usize, hi: usize| -> Vec<&PreferencePair> {
        global
            .iter()
            .copied()
            .filter(|p| {
                let gap = p.t_messier - p.t_tidier;
                gap >= lo && gap <= hi
            })
            .collect()
    };
    let gap1 = bucket(1, 1);
    let gap2 = bucket(2, 2);
    let gap3 = bucket(3, usize::MAX);

    let report = json!({
        "held_out_trajectories": val_ids,
        "held_out_pairs": held_out.len(),
        "accuracy_overall": accuracy_of(&model, &inputs, &held_out)?,
        "accuracy_by_provenance": {
            "global": accuracy_of(&model, &inputs, &global)?,
            "local": accuracy_of(&model, &inputs, &local)?,
        },
        "accuracy_by_gap": {
            "1": accuracy_of(&model, &inputs, &gap1)?,
            "2": accuracy_of(&model, &inputs, &gap2)?,
            "3+": accuracy_of(&model, &inputs, &gap3)?,
        },
        "oracle_agreement": {
            "global": oracle_agreement(&model, &inputs, &dataset, &global)?,
            "global_gap3": oracle_agreement(&model, &inputs, &dataset, &gap3)?,
        },
    });
    std::fs::write(
        &args.out,
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
    )?;

    let stem = args.out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let dir = args.out.parent().map(PathBuf::from).unwrap_or_default();
    let manifest_config = json!({
        "data": args.data.display().to_string(),
        "ckpt": args.ckpt.display().to_string(),
        "val_fraction": val_fraction,
    });
    RunManifest::new("eval", args.seed, manifest_config, &[&stem])
        .write(&dir.join(format!("{stem}.manifest.json")))?;

    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}

//! `tidytable train`

use std::path::PathBuf;

use clap::Parser;
use serde_json::json;
use tidytable_core::datagen::load_dataset;
use tidytable_core::scorer::EncoderKind;
use tidytable_core::trainer::{save_checkpoint, train, TrainConfig};

use crate::config::FileConfig;
use crate::error::CliError;
use crate::manifest::RunManifest;

#[derive(Parser, Debug)]
pub struct Args {
    /// Dataset directory from `gen-data`.
    #[arg(long, value_name = "DIR")]
    pub data: PathBuf,
    /// Checkpoint output path (conventionally `.tdyc`).
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
    /// Encoder: features or cnn.
    #[arg(long, default_value = "features")]
    pub encoder: String,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Early-stop patience in epochs without validation gain.
    #[arg(long)]
    pub patience: Option<usize>,
    /// Fraction of trajectories held out for validation.
    #[arg(long)]
    pub val_frac: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

pub fn run(args: Args, file: &FileConfig) -> Result<(), CliError> {
    let encoder = EncoderKind::from_name(&args.encoder)
        .ok_or_else(|| CliError::Usage(format!("unknown encoder `{}`", args.encoder)))?;
    let defaults = TrainConfig::default();
    let config = TrainConfig {
        encoder,
        learning_rate: args
            .lr
            .or(file.train.learning_rate)
            .unwrap_or(defaults.learning_rate),
        batch_size: args.batch.or(file.train.batch_size).unwrap_or(defaults.batch_size),
        max_epochs: args.epochs.or(file.train.max_epochs).unwrap_or(defaults.max_epochs),
        early_stop_patience: args
            .patience
            .or(file.train.patience)
            .unwrap_or(defaults.early_stop_patience),
        val_fraction: args.val_frac.or(file.train.val_fraction).unwrap_or(defaults.val_fraction),
        seed: args.seed,
    };

    let dataset = load_dataset(&args.data)?;
    let (model, report) = train(&config, &dataset)?;
    save_checkpoint(&model, &args.out)?;

    let stem = args.out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let dir = args.out.parent().map(PathBuf::from).unwrap_or_default();
    let metrics_name = format!("{stem}.metrics.json");
    let metrics = json!({
        "epochs": report.metrics,
        "best_epoch": report.best_epoch,
        "best_val_accuracy": report.best_val_accuracy,
        "train_pairs": report.train_pair_count,
        "val_pairs": report.val_pair_count,
        "val_trajectories": report.val_trajectories,
    });
    std::fs::write(
        dir.join(&metrics_name),
        serde_json::to_string_pretty(&metrics).expect("metrics serialize") + "\n",
    )?;

    let manifest_config = json!({
        "data": args.data.display().to_string(),
        "encoder": encoder.name(),
        "learning_rate": config.learning_rate,
        "batch_size": config.batch_size,
        "max_epochs": config.max_epochs,
        "early_stop_patience": config.early_stop_patience,
        "val_fraction": config.val_fraction,
    });
    RunManifest::new("train", args.seed, manifest_config, &[&stem, &metrics_name])
        .write(&dir.join(format!("{stem}.manifest.json")))?;

    println!(
        "checkpoint {} (best epoch {}, val accuracy {:.4})",
        args.out.display(),
        report.best_epoch,
        report.best_val_accuracy
    );
    Ok(())
}

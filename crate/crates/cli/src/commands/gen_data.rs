//! `tidytable gen-data`

use std::path::PathBuf;

use clap::Parser;
use tidytable_core::datagen::{generate_dataset, DatasetMeta};

use crate::error::CliError;
use crate::manifest::RunManifest;

#[derive(Parser, Debug)]
pub struct Args {
    /// Output dataset directory.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Number of random-walk trajectories.
    #[arg(long, default_value_t = 300)]
    pub trajectories: u64,
    /// Global walk steps per trajectory (T).
    #[arg(long, default_value_t = 12)]
    pub steps: usize,
    /// Local variants per step (M).
    #[arg(long, default_value_t = 4)]
    pub local: usize,
    /// Master seed; everything derives from it.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Comma-separated tidy templates: rows, grid, edges.
    #[arg(long, value_delimiter = ',', default_values_t = ["rows".to_string(), "grid".to_string()])]
    pub templates: Vec<String>,
    /// Objects per scene, lower bound.
    #[arg(long, default_value_t = 8)]
    pub objects_min: usize,
    /// Objects per scene, upper bound.
    #[arg(long, default_value_t = 12)]
    pub objects_max: usize,
    /// Categories per scene, lower bound.
    #[arg(long, default_value_t = 2)]
    pub categories_min: usize,
    /// Categories per scene, upper bound.
    #[arg(long, default_value_t = 3)]
    pub categories_max: usize,
    /// Worker threads; output bytes do not depend on this.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
}

pub fn run(args: Args) -> Result<(), CliError> {
    let meta = DatasetMeta {
        format_version: 1,
        master_seed: args.seed,
        trajectory_count: args.trajectories,
        walk_steps: args.steps,
        variants_per_step: args.local,
        templates: args.templates.clone(),
        objects_min: args.objects_min,
        objects_max: args.objects_max,
        categories_min: args.categories_min,
        categories_max: args.categories_max,
    };
    generate_dataset(&meta, &args.out, args.workers)?;

    let artifacts: &[&str] = if args.trajectories == 0 {
        &["meta.json"]
    } else {
        &["meta.json", "scenes.jsonl", "pairs.jsonl"]
    };
    RunManifest::new(
        "gen-data",
        args.seed,
        serde_json::to_value(&meta).expect("meta serializes"),
        artifacts,
    )
    .write(&args.out.join("manifest.json"))?;

    println!(
        "dataset written to {} ({} trajectories, T={}, M={})",
        args.out.display(),
        args.trajectories,
        args.steps,
        args.local
    );
    Ok(())
}

//! `tidytable render`

use std::path::PathBuf;

use clap::Parser;
use serde_json::json;
use tidytable_core::raster::to_ppm;
use tidytable_core::scene::SceneState;

use crate::error::CliError;
use crate::manifest::RunManifest;

#[derive(Parser, Debug)]
pub struct Args {
    /// Scene JSON file.
    #[arg(long, value_name = "FILE")]
    pub scene: PathBuf,
    /// PPM output path.
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

pub fn run(args: Args) -> Result<(), CliError> {
    let scene = SceneState::from_json(&std::fs::read_to_string(&args.scene)?)?;
    std::fs::write(&args.out, to_ppm(&scene)?)?;

    let stem = args.out.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
    let dir = args.out.parent().map(PathBuf::from).unwrap_or_default();
    RunManifest::new(
        "render",
        0,
        json!({"scene": args.scene.display().to_string()}),
        &[&stem],
    )
    .write(&dir.join(format!("{stem}.manifest.json")))?;
    println!("rendered {}", args.out.display());
    Ok(())
}

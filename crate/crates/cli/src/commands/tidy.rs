//! `tidytable tidy`
//!
//! Method selection is orthogonal:
//! - ours: `--planner llm|rules --mode object-centric --grounding score`
//! - baseline 1: `--planner llm --mode direct`
//! - baseline 2: `--planner llm|rules --mode object-centric --grounding collision-only`

use std::path::PathBuf;

use clap::Parser;
use serde_json::json;
use tidytable_core::grounding::{tidy_episode, GroundingConfig, GroundingStrategy};
use tidytable_core::oracle::disorder;
use tidytable_core::planner::{
    build_prompt, describe_scene, fallback_plan, llm_complete, parse_plan, serialize_plan,
    LlmConfig, PlanProposal, PromptMode,
};
use tidytable_core::raster::to_ppm;
use tidytable_core::scene::SceneState;
use tidytable_core::trainer::load_checkpoint;

use crate::config::FileConfig;
use crate::error::CliError;
use crate::manifest::RunManifest;

#[derive(Parser, Debug)]
pub struct Args {
    /// Scene JSON file to tidy.
    #[arg(long, value_name = "FILE")]
    pub scene: PathBuf,
    /// Output directory for plan, trace, images and report.
    #[arg(long, value_name = "DIR")]
    pub out: PathBuf,
    /// Scorer checkpoint; required for `--grounding score`.
    #[arg(long, value_name = "FILE")]
    pub ckpt: Option<PathBuf>,
    /// Planner: llm or rules.
    #[arg(long, default_value = "rules")]
    pub planner: String,
    /// Prompt mode for the llm planner: object-centric or direct.
    #[arg(long, default_value = "object-centric")]
    pub mode: String,
    /// Grounding strategy: score or collision-only.
    #[arg(long, default_value = "score")]
    pub grounding: String,
    /// Candidate placements per action.
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sample-solution files for few-shot prompting (at most 2).
    #[arg(long, value_name = "FILE")]
    pub sample_solution: Vec<PathBuf>,
    /// Chat-completion endpoint base URL.
    #[arg(long)]
    pub llm_base_url: Option<String>,
    /// Model name sent to the endpoint.
    #[arg(long)]
    pub llm_model: Option<String>,
    /// Environment variable holding the API key.
    #[arg(long)]
    pub api_key_env: Option<String>,
}

fn llm_plan(args: &Args, file: &FileConfig, scene: &SceneState) -> Result<PlanProposal, CliError> {
    let mode = PromptMode::from_name(&args.mode)
        .ok_or_else(|| CliError::Usage(format!("unknown mode `{}`", args.mode)))?;
    let mut samples = Vec::new();
    for path in &args.sample_solution {
        samples.push(std::fs::read_to_string(path)?);
    }
    let prompt = build_prompt(&describe_scene(scene), mode, &samples)?;
    let defaults = LlmConfig::default();
    let config = LlmConfig {
        base_url: args
            .llm_base_url
            .clone()
            .or_else(|| file.llm.base_url.clone())
            .unwrap_or(defaults.base_url),
        model_name: args
            .llm_model
            .clone()
            .or_else(|| file.llm.model.clone())
            .unwrap_or(defaults.model_name),
        api_key_env_var: args
            .api_key_env
            .clone()
            .or_else(|| file.llm.api_key_env.clone())
            .unwrap_or(defaults.api_key_env_var),
        timeout_seconds: file.llm.timeout_seconds.unwrap_or(defaults.timeout_seconds),
        max_retries: file.llm.max_retries.unwrap_or(defaults.max_retries),
        temperature: file.llm.temperature.unwrap_or(defaults.temperature),
        backoff_ms: defaults.backoff_ms,
    };
    let response = llm_complete(&config, &prompt)?;
    let parsed = parse_plan(&response.text)?;
    for issue in &parsed.skipped {
        eprintln!("skipped plan line {}: {} ({})", issue.line, issue.content, issue.reason);
    }
    Ok(parsed.proposal)
}

pub fn run(args: Args, file: &FileConfig) -> Result<(), CliError> {
    let strategy = GroundingStrategy::from_name(&args.grounding)
        .ok_or_else(|| CliError::Usage(format!("unknown grounding `{}`", args.grounding)))?;
    let scene = SceneState::from_json(&std::fs::read_to_string(&args.scene)?)?;

    let plan = match args.planner.as_str() {
        "rules" => {
            if args.mode == "direct" {
                return Err(CliError::Usage(
                    "the rules planner has no direct-coordinates mode".into(),
                ));
            }
            fallback_plan(&scene)?
        }
        "llm" => llm_plan(&args, file, &scene)?,
        other => return Err(CliError::Usage(format!("unknown planner `{other}`"))),
    };

    let model = match (&args.ckpt, strategy) {
        (Some(path), _) => Some(load_checkpoint(path)?),
        (None, GroundingStrategy::Score) => {
            return Err(CliError::Usage("--grounding score requires --ckpt".into()))
        }
        (None, GroundingStrategy::CollisionOnly) => None,
    };

    let defaults = GroundingConfig::default();
    let config = GroundingConfig {
        strategy,
        samples: args.samples.or(file.grounding.samples).unwrap_or(defaults.samples),
        sigma_initial_factor: file
            .grounding
            .sigma_initial_factor
            .unwrap_or(defaults.sigma_initial_factor),
        sigma_growth: file.grounding.sigma_growth.unwrap_or(defaults.sigma_growth),
        max_attempts: file.grounding.max_attempts.unwrap_or(defaults.max_attempts),
        seed: args.seed,
    };

    let result = tidy_episode(&scene, &plan, model.as_ref(), &config)?;

    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join("plan.txt"), serialize_plan(&plan))?;
    std::fs::write(args.out.join("plan.json"), result.plan_output_json() + "\n")?;
    std::fs::write(args.out.join("trace.jsonl"), result.trace_jsonl())?;
    std::fs::write(args.out.join("before.ppm"), to_ppm(&scene)?)?;
    std::fs::write(args.out.join("after.ppm"), to_ppm(&result.final_scene)?)?;
    std::fs::write(args.out.join("after.json"), result.final_scene.to_json() + "\n")?;

    let before = disorder(&scene);
    let after = disorder(&result.final_scene);
    let report = json!({
        "planner": args.planner,
        "mode": args.mode,
        "grounding": strategy.name(),
        "rules": plan.rules,
        "actions_applied": result.actions.len(),
        "actions_skipped": result.skipped().len(),
        "disorder_before": before,
        "disorder_after": after,
    });
    std::fs::write(
        args.out.join("report.json"),
        serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
    )?;

    let manifest_config = json!({
        "scene": args.scene.display().to_string(),
        "ckpt": args.ckpt.as_ref().map(|p| p.display().to_string()),
        "planner": args.planner,
        "mode": args.mode,
        "grounding": strategy.name(),
        "samples": config.samples,
    });
    RunManifest::new(
        "tidy",
        args.seed,
        manifest_config,
        &["plan.txt", "plan.json", "trace.jsonl", "before.ppm", "after.ppm", "after.json", "report.json"],
    )
    .write(&args.out.join("manifest.json"))?;

    println!(
        "tidied: {} applied, {} skipped, disorder {:.4} -> {:.4}",
        result.actions.len(),
        result.skipped().len(),
        before.total,
        after.total
    );
    Ok(())
}

//! CLI error type with the documented exit codes.

use tidytable_core::datagen::DatasetError;
use tidytable_core::grounding::GroundingError;
use tidytable_core::planner::{LlmError, PlanError};
use tidytable_core::raster::RasterError;
use tidytable_core::scene::SceneError;
use tidytable_core::trainer::{CheckpointError, TrainError};

/// Exit codes: 1 usage, 2 io/corrupt data, 3 infeasible, 4 llm unavailable.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Infeasible(String),
    LlmUnavailable(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Io(_) => 2,
            CliError::Infeasible(_) => 3,
            CliError::LlmUnavailable(_) => 4,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(m)
            | CliError::Io(m)
            | CliError::Infeasible(m)
            | CliError::LlmUnavailable(m) => m,
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<SceneError> for CliError {
    fn from(e: SceneError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<RasterError> for CliError {
    fn from(e: RasterError) -> Self {
        CliError::Usage(e.to_string())
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        match e {
            DatasetError::InvalidArgument(m) => CliError::Usage(m),
            DatasetError::LayoutInfeasible(m) => CliError::Infeasible(m),
            DatasetError::Io(e) => CliError::Io(e.to_string()),
            DatasetError::Corrupt(m) => CliError::Io(m),
        }
    }
}

impl From<TrainError> for CliError {
    fn from(e: TrainError) -> Self {
        match e {
            TrainError::InvalidArgument(m) => CliError::Usage(m),
            TrainError::DanglingReference(m) => CliError::Io(format!("dangling scene ref {m}")),
            TrainError::Raster(e) => CliError::Usage(e.to_string()),
        }
    }
}

impl From<CheckpointError> for CliError {
    fn from(e: CheckpointError) -> Self {
        CliError::Io(e.to_string())
    }
}

impl From<GroundingError> for CliError {
    fn from(e: GroundingError) -> Self {
        match e {
            GroundingError::Infeasible(m) => CliError::Infeasible(m),
            GroundingError::MissingAnchor(m) => CliError::Usage(format!("missing anchor {m}")),
            GroundingError::UnknownObject(m) => CliError::Usage(format!("unknown object {m}")),
            GroundingError::InvalidArgument(m) => CliError::Usage(m),
        }
    }
}

impl From<PlanError> for CliError {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::InvalidArgument(m) => CliError::Usage(m),
            PlanError::ParseFailure { message, issues } => CliError::LlmUnavailable(format!(
                "planner output unusable ({message}; {} bad lines); try --planner rules",
                issues.len()
            )),
        }
    }
}

impl From<LlmError> for CliError {
    fn from(e: LlmError) -> Self {
        match e {
            LlmError::Config(m) => CliError::Usage(m),
            LlmError::Unavailable(m) => {
                CliError::LlmUnavailable(format!("{m}; try --planner rules"))
            }
            LlmError::Status { status, body } => CliError::LlmUnavailable(format!(
                "llm returned status {status}: {body}; try --planner rules"
            )),
            LlmError::Protocol(m) => {
                CliError::LlmUnavailable(format!("{m}; try --planner rules"))
            }
        }
    }
}

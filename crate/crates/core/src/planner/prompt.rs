//! Prompt assembly for the LLM planner.
//!
//! A prompt is the fixed task specification for the chosen action grammar,
//! the scene description verbatim, and up to two sample solutions as few-shot
//! demonstrations.

use super::PlanError;

/// Which action grammar the LLM is asked to use.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PromptMode {
    /// Grouping actions only (`NEAR` / `GROUP`); the executor grounds them.
    ObjectCentric,
    /// Exact placements (`AT x y`); the end-to-end baseline.
    DirectCoordinates,
}

impl PromptMode {
    pub fn name(self) -> &'static str {
        match self {
            PromptMode::ObjectCentric => "object-centric",
            PromptMode::DirectCoordinates => "direct",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "object-centric" => Some(PromptMode::ObjectCentric),
            "direct" | "direct-coordinates" => Some(PromptMode::DirectCoordinates),
            _ => None,
        }
    }
}

const OBJECT_CENTRIC_SPEC: &str = "\
You are tidying up a cluttered table with pick-and-place actions.
Goal: rearrange the objects into a tidy layout by grouping objects of
similar type or function. Do not output coordinates; the executor picks
exact collision-free placements for you. Table bounds are in the scene
description below.

Allowed action forms, one per line and nothing else:
<n>. PICK obj_<k> PLACE NEAR obj_<m>
<n>. PICK obj_<k> PLACE GROUP <name>

Start a new group with a GROUP action, then attach members with NEAR
actions anchored on an object already in that group.

Reply in exactly this format, with at least one rule and one action:
RULES:
- <one high-level organization rule per line>
ACTIONS:
1. <first action>
2. <second action>";

const DIRECT_SPEC: &str = "\
You are tidying up a cluttered table with pick-and-place actions.
Goal: rearrange the objects into a tidy layout. Choose the exact placement
coordinates yourself; coordinates are footprint centers in table units and
must keep every object inside the table bounds given in the scene
description below, without overlaps.

The only allowed action form, one per line and nothing else:
<n>. PICK obj_<k> PLACE AT <x> <y>

Reply in exactly this format, with at least one rule and one action:
RULES:
- <one high-level organization rule per line>
ACTIONS:
1. <first action>
2. <second action>";

/// Assemble the full prompt. At most two sample solutions are allowed.
pub fn build_prompt(
    description: &str,
    mode: PromptMode,
    sample_solutions: &[String],
) -> Result<String, PlanError> {
    if sample_solutions.len() > 2 {
        return Err(PlanError::InvalidArgument(format!(
            "at most 2 sample solutions are supported, got {}",
            sample_solutions.len()
        )));
    }
    let spec = match mode {
        PromptMode::ObjectCentric => OBJECT_CENTRIC_SPEC,
        PromptMode::DirectCoordinates => DIRECT_SPEC,
    };
    let mut prompt = format!("{spec}\n\nSCENE:\n{description}\n");
    if !sample_solutions.is_empty() {
        prompt.push_str("\nSAMPLE SOLUTIONS:\n");
        for (i, sample) in sample_solutions.iter().enumerate() {
            prompt.push_str(&format!("--- sample {} ---\n{sample}\n", i + 1));
        }
    }
    Ok(prompt)
}

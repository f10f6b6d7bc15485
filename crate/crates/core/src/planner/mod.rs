//! Semantic-tidiness policy generation.
//!
//! The planner side of the pipeline: turn a scene into a text description,
//! prompt a chat-completion LLM for grouping actions, and parse its reply
//! under a strict line grammar. A deterministic rule-based fallback planner
//! covers offline runs: it groups objects by exact category only — reasoning
//! about implicit similarity is what the LLM path adds.

mod grammar;
mod llm;
mod prompt;

pub use grammar::{parse_plan, serialize_plan, ParsedPlan};
pub use llm::{llm_complete, LlmConfig, LlmError, LlmResponse, SYSTEM_ROLE};
pub use prompt::{build_prompt, PromptMode};

use std::collections::BTreeMap;

use crate::scene::{object_index, SceneState};

/// Errors from prompt building and plan parsing.
#[derive(Debug, thiserror::Error)]
pub enum PlanError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("plan parse failure: {message}")]
    ParseFailure { message: String, issues: Vec<LineIssue> },
}

/// A reported problem with one line of planner output.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct LineIssue {
    pub line: usize,
    pub content: String,
    pub reason: String,
}

/// Where an object should go, in object-centric terms. Absolute coordinates
/// exist only for the direct-prompting baseline.
#[derive(Debug, Clone, PartialEq)]
pub enum ActionTarget {
    Near(String),
    Group(String),
    At(f64, f64),
}

impl std::fmt::Display for ActionTarget {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ActionTarget::Near(anchor) => write!(f, "NEAR {anchor}"),
            ActionTarget::Group(name) => write!(f, "GROUP {name}"),
            ActionTarget::At(x, y) => write!(f, "AT {x} {y}"),
        }
    }
}

/// One object-centric instruction: pick the object, place it at the target.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionProposal {
    pub object_id: String,
    pub target: ActionTarget,
}

/// A parsed plan: at least one free-text organization rule and one action.
#[derive(Debug, Clone, PartialEq)]
pub struct PlanProposal {
    pub rules: Vec<String>,
    pub actions: Vec<ActionProposal>,
}

/// Render a scene as one header line plus one line per object, sorted by id:
/// `obj_<k>: category=<c>, size=<w>x<d>, at=(<x>,<y>)` with three decimals.
pub fn describe_scene(scene: &SceneState) -> String {
    let mut lines = vec![format!(
        "table: width={:.3} depth={:.3}",
        scene.table_width, scene.table_depth
    )];
    let mut placements: Vec<_> = scene.placements().iter().collect();
    placements.sort_by_key(|p| object_index(&p.object.id));
    for p in placements {
        lines.push(format!(
            "{}: category={}, size={:.3}x{:.3}, at=({:.3},{:.3})",
            p.object.id, p.object.category, p.object.width, p.object.depth, p.x, p.y
        ));
    }
    lines.join("\n")
}

/// Deterministic offline planner: group objects by exact category string.
/// Groups are ordered by descending size then name; each group's lowest-id
/// object anchors the group and the rest are placed near it.
pub fn fallback_plan(scene: &SceneState) -> Result<PlanProposal, PlanError> {
    if scene.is_empty() {
        return Err(PlanError::InvalidArgument("cannot plan for an empty scene".into()));
    }
    let mut groups: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for p in scene.placements() {
        groups.entry(p.object.category.as_str()).or_default().push(p.object.id.as_str());
    }
    let mut ordered: Vec<(&str, Vec<&str>)> = groups.into_iter().collect();
    for (_, members) in &mut ordered {
        members.sort_by_key(|id| object_index(id));
    }
    ordered.sort_by(|(name_a, a), (name_b, b)| b.len().cmp(&a.len()).then(name_a.cmp(name_b)));

    let mut actions = Vec::new();
    for (category, members) in &ordered {
        let anchor = members[0];
        actions.push(ActionProposal {
            object_id: anchor.to_string(),
            target: ActionTarget::Group(category.to_string()),
        });
        for member in &members[1..] {
            actions.push(ActionProposal {
                object_id: member.to_string(),
                target: ActionTarget::Near(anchor.to_string()),
            });
        }
    }
    Ok(PlanProposal { rules: vec!["group objects by category".into()], actions })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::ObjectSpec;

    fn scene_with(objs: &[(u32, &str)]) -> SceneState {
        let mut s = SceneState::new(1.2, 0.8).unwrap();
        for (i, &(k, cat)) in objs.iter().enumerate() {
            let x = 0.1 + 0.1 * i as f64;
            s = s
                .place(&ObjectSpec::new(format!("obj_{k}"), cat, 0.06, 0.06).unwrap(), x, 0.4)
                .unwrap();
        }
        s
    }

    #[test]
    fn empty_scene_describes_as_header_only() {
        let text = describe_scene(&SceneState::new(1.2, 0.8).unwrap());
        assert_eq!(text, "table: width=1.200 depth=0.800");
    }

    #[test]
    fn single_object_describes_in_two_lines() {
        let text = describe_scene(&scene_with(&[(0, "can")]));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[1], "obj_0: category=can, size=0.060x0.060, at=(0.100,0.400)");
    }

    #[test]
    fn description_is_sorted_by_id_not_placement_order() {
        let a = describe_scene(&scene_with(&[(2, "can"), (0, "fork"), (1, "can")]));
        let b = describe_scene(&scene_with(&[(0, "fork"), (1, "can"), (2, "can")]));
        // Positions differ between the two scenes, but ordering must be by id.
        let order: Vec<&str> =
            a.lines().skip(1).map(|l| l.split(':').next().unwrap()).collect();
        assert_eq!(order, ["obj_0", "obj_1", "obj_2"]);
        let order_b: Vec<&str> =
            b.lines().skip(1).map(|l| l.split(':').next().unwrap()).collect();
        assert_eq!(order, order_b);
    }

    #[test]
    fn fallback_groups_largest_category_first() {
        let plan = fallback_plan(&scene_with(&[
            (0, "can"),
            (1, "can"),
            (2, "can"),
            (3, "fork"),
            (4, "fork"),
        ]))
        .unwrap();
        assert_eq!(plan.rules, ["group objects by category"]);
        let rendered: Vec<String> =
            plan.actions.iter().map(|a| format!("{} {}", a.object_id, a.target)).collect();
        assert_eq!(
            rendered,
            [
                "obj_0 GROUP can",
                "obj_1 NEAR obj_0",
                "obj_2 NEAR obj_0",
                "obj_3 GROUP fork",
                "obj_4 NEAR obj_3",
            ]
        );
    }

    #[test]
    fn fallback_single_object_is_one_group_action() {
        let plan = fallback_plan(&scene_with(&[(0, "can")])).unwrap();
        assert_eq!(plan.actions.len(), 1);
        assert_eq!(plan.actions[0].target, ActionTarget::Group("can".into()));
    }

    #[test]
    fn fallback_is_deterministic_across_placement_orders() {
        let a = fallback_plan(&scene_with(&[(0, "can"), (1, "fork"), (2, "can")])).unwrap();
        let b = fallback_plan(&scene_with(&[(2, "can"), (1, "fork"), (0, "can")])).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn fallback_covers_every_object_exactly_once() {
        let scene = scene_with(&[(0, "can"), (1, "fork"), (2, "can"), (3, "pen"), (4, "pen")]);
        let plan = fallback_plan(&scene).unwrap();
        let mut ids: Vec<&str> = plan.actions.iter().map(|a| a.object_id.as_str()).collect();
        ids.sort_by_key(|id| object_index(id));
        assert_eq!(ids, ["obj_0", "obj_1", "obj_2", "obj_3", "obj_4"]);
    }

    #[test]
    fn fallback_rejects_empty_scene() {
        let err = fallback_plan(&SceneState::new(1.2, 0.8).unwrap()).unwrap_err();
        assert!(matches!(err, PlanError::InvalidArgument(_)));
    }
}

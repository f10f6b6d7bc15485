//! The plan line grammar: parsing with skip-and-report, and the canonical
//! serialization.
//!
//! ```text
//! RULES:
//! - <free text>            (at least one)
//! ACTIONS:
//! <n>. PICK obj_<k> PLACE NEAR obj_<m>
//! <n>. PICK obj_<k> PLACE GROUP <name>
//! <n>. PICK obj_<k> PLACE AT <x> <y>
//! ```
//!
//! Keywords are case-insensitive, `#` starts a comment, the `<n>.` prefix is
//! optional on input. Malformed action lines are skipped and reported; the
//! parse succeeds with at least one rule and one valid action.

use super::{ActionProposal, ActionTarget, LineIssue, PlanError, PlanProposal};
use crate::scene::object_index;

/// A successful parse: the proposal plus diagnostics for skipped lines.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedPlan {
    pub proposal: PlanProposal,
    pub skipped: Vec<LineIssue>,
}

enum Section {
    Preamble,
    Rules,
    Actions,
}

/// Parse planner output text. Never panics on arbitrary input.
pub fn parse_plan(text: &str) -> Result<ParsedPlan, PlanError> {
    let mut rules = Vec::new();
    let mut actions = Vec::new();
    let mut skipped = Vec::new();
    let mut section = Section::Preamble;

    for (idx, raw) in text.lines().enumerate() {
        let line = raw.find('#').map_or(raw, |i| &raw[..i]).trim();
        if line.is_empty() {
            continue;
        }
        let upper = line.to_ascii_uppercase();
        if upper == "RULES:" {
            section = Section::Rules;
            continue;
        }
        if upper == "ACTIONS:" {
            section = Section::Actions;
            continue;
        }
        match section {
            // Anything before the first section is LLM preamble chatter.
            Section::Preamble => {}
            Section::Rules => match line.strip_prefix('-') {
                Some(rest) if !rest.trim().is_empty() => rules.push(rest.trim().to_string()),
                _ => skipped.push(issue(idx, raw, "not a `- <text>` rule line")),
            },
            Section::Actions => match parse_action_line(line) {
                Ok(action) => actions.push(action),
                Err(reason) => skipped.push(issue(idx, raw, &reason)),
            },
        }
    }

    if rules.is_empty() || actions.is_empty() {
        let message = match (rules.is_empty(), actions.is_empty()) {
            (true, true) => "no rules and no valid actions found",
            (true, false) => "no rules found",
            _ => "no valid actions found",
        };
        return Err(PlanError::ParseFailure { message: message.into(), issues: skipped });
    }
    Ok(ParsedPlan { proposal: PlanProposal { rules, actions }, skipped })
}

fn issue(idx: usize, raw: &str, reason: &str) -> LineIssue {
    LineIssue { line: idx + 1, content: raw.trim().to_string(), reason: reason.to_string() }
}

fn parse_action_line(line: &str) -> Result<ActionProposal, String> {
    let mut tokens = line.split_whitespace().peekable();
    // Optional "<n>." prefix.
    if let Some(first) = tokens.peek() {
        let body = first.strip_suffix('.').unwrap_or(first);
        if !body.is_empty() && body.chars().all(|c| c.is_ascii_digit()) {
            tokens.next();
        }
    }
    expect_keyword(&mut tokens, "PICK")?;
    let object_id = tokens.next().ok_or("missing object id after PICK")?;
    if object_index(object_id).is_none() {
        return Err(format!("`{object_id}` is not an obj_<k> id"));
    }
    expect_keyword(&mut tokens, "PLACE")?;
    let kind = tokens.next().ok_or("missing placement kind after PLACE")?;
    let target = match kind.to_ascii_uppercase().as_str() {
        "NEAR" => {
            let anchor = tokens.next().ok_or("missing anchor after NEAR")?;
            if object_index(anchor).is_none() {
                return Err(format!("`{anchor}` is not an obj_<k> id"));
            }
            if anchor == object_id {
                return Err("object cannot anchor on itself".into());
            }
            ActionTarget::Near(anchor.to_string())
        }
        "GROUP" => {
            let name = tokens.next().ok_or("missing group name after GROUP")?;
            ActionTarget::Group(name.to_string())
        }
        "AT" => {
            let x = parse_coord(tokens.next().ok_or("missing x after AT")?)?;
            let y = parse_coord(tokens.next().ok_or("missing y after AT")?)?;
            ActionTarget::At(x, y)
        }
        other => return Err(format!("unknown placement kind `{other}`")),
    };
    if let Some(extra) = tokens.next() {
        return Err(format!("unexpected trailing token `{extra}`"));
    }
    Ok(ActionProposal { object_id: object_id.to_string(), target })
}

fn expect_keyword<'a>(
    tokens: &mut impl Iterator<Item = &'a str>,
    keyword: &str,
) -> Result<(), String> {
    match tokens.next() {
        Some(t) if t.eq_ignore_ascii_case(keyword) => Ok(()),
        Some(t) => Err(format!("expected {keyword}, found `{t}`")),
        None => Err(format!("expected {keyword}, found end of line")),
    }
}

/// Canonical plan text: uppercase keywords, actions numbered from 1.
/// `parse_plan` of this output reproduces the proposal exactly.
pub fn serialize_plan(plan: &PlanProposal) -> String {
    let mut out = String::from("RULES:\n");
    for rule in &plan.rules {
        out.push_str(&format!("- {rule}\n"));
    }
    out.push_str("ACTIONS:\n");
    for (i, action) in plan.actions.iter().enumerate() {
        out.push_str(&format!("{}. PICK {} PLACE {}\n", i + 1, action.object_id, action.target));
    }
    out
}

fn parse_coord(token: &str) -> Result<f64, String> {
    let value: f64 =
        token.parse().map_err(|_| format!("`{token}` is not a number"))?;
    if !value.is_finite() {
        return Err(format!("coordinate `{token}` is not finite"));
    }
    Ok(value)
}

//! Tidy template layouts and roster sampling.
//!
//! Templates stand in for survey-derived tidy configurations: every random
//! walk starts from one. Within a template, objects of one category sit in a
//! line or block with a uniform 0.02 edge gap; groups are separated by 0.06.
//! The whole arrangement is jittered by the caller's RNG inside its feasible
//! origin range.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::DatasetError;
use crate::scene::{ObjectSpec, SceneState, DEFAULT_TABLE_DEPTH, DEFAULT_TABLE_WIDTH};

/// Edge gap between objects of the same group, in table units.
pub const IN_GROUP_GAP: f64 = 0.02;
/// Edge gap between groups, in table units.
pub const GROUP_GAP: f64 = 0.06;

const JITTER_RETRIES: usize = 100;

/// Known tidy layout shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TemplateId {
    /// One horizontal row per category, rows stacked.
    Rows,
    /// One near-square block per category, blocks shelf-packed.
    Grid,
    /// One line per category along alternating table edges.
    Edges,
}

impl TemplateId {
    pub fn name(self) -> &'static str {
        match self {
            TemplateId::Rows => "rows",
            TemplateId::Grid => "grid",
            TemplateId::Edges => "edges",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "rows" => Some(TemplateId::Rows),
            "grid" => Some(TemplateId::Grid),
            "edges" => Some(TemplateId::Edges),
            _ => None,
        }
    }
}

/// The built-in object catalog: category name, width, depth.
pub const CATEGORY_POOL: [(&str, f64, f64); 8] = [
    ("can", 0.06, 0.06),
    ("cup", 0.08, 0.08),
    ("fork", 0.025, 0.14),
    ("book", 0.11, 0.15),
    ("pen", 0.015, 0.12),
    ("plate", 0.12, 0.12),
    ("phone", 0.07, 0.13),
    ("snack", 0.05, 0.09),
];

/// Most objects of one category that every template can lay out in a line
/// along the short table axis.
fn category_cap(max_extent: f64) -> usize {
    ((DEFAULT_TABLE_DEPTH + IN_GROUP_GAP) / (max_extent + IN_GROUP_GAP)).floor() as usize
}

/// Sample a roster of `objects_min..=objects_max` objects over
/// `categories_min..=categories_max` catalog categories, at least two objects
/// per category, respecting per-category layout caps. Ids are assigned
/// `obj_0..` in category blocks.
pub fn sample_roster(
    rng: &mut ChaCha8Rng,
    objects_min: usize,
    objects_max: usize,
    categories_min: usize,
    categories_max: usize,
) -> Vec<ObjectSpec> {
    let n_cats = rng.random_range(categories_min..=categories_max).min(CATEGORY_POOL.len());
    let mut pool_indices: Vec<usize> = (0..CATEGORY_POOL.len()).collect();
    pool_indices.shuffle(rng);
    let chosen = &pool_indices[..n_cats];

    let caps: Vec<usize> =
        chosen.iter().map(|&c| category_cap(CATEGORY_POOL[c].1.max(CATEGORY_POOL[c].2))).collect();
    let target = rng.random_range(objects_min..=objects_max).min(caps.iter().sum());
    let mut counts = vec![2usize.min(target / n_cats.max(1)); n_cats];
    let mut remaining = target.saturating_sub(counts.iter().sum());
    while remaining > 0 {
        let open: Vec<usize> = (0..n_cats).filter(|&i| counts[i] < caps[i]).collect();
        let i = open[rng.random_range(0..open.len())];
        counts[i] += 1;
        remaining -= 1;
    }

    let mut roster = Vec::new();
    for (slot, &cat_idx) in chosen.iter().enumerate() {
        let (name, w, d) = CATEGORY_POOL[cat_idx];
        for _ in 0..counts[slot] {
            let id = format!("obj_{}", roster.len());
            roster.push(ObjectSpec::new(id, name, w, d).expect("catalog specs are valid"));
        }
    }
    roster
}

/// Category groups in roster order, members in roster order.
fn group_by_category(roster: &[ObjectSpec]) -> Vec<(&str, Vec<&ObjectSpec>)> {
    let mut groups: Vec<(&str, Vec<&ObjectSpec>)> = Vec::new();
    for obj in roster {
        match groups.iter_mut().find(|(name, _)| *name == obj.category) {
            Some((_, members)) => members.push(obj),
            None => groups.push((obj.category.as_str(), vec![obj])),
        }
    }
    groups
}

/// Build a tidy scene for the roster on the default table.
///
/// The group arrangement is exact: only the arrangement origin is jittered.
/// Fails with `LayoutInfeasible` when no jittered origin admits the roster
/// after 100 retries.
pub fn make_tidy_scene(
    template: TemplateId,
    roster: &[ObjectSpec],
    rng: &mut ChaCha8Rng,
) -> Result<SceneState, DatasetError> {
    if roster.is_empty() {
        return Ok(SceneState::new(DEFAULT_TABLE_WIDTH, DEFAULT_TABLE_DEPTH)
            .expect("default table is valid"));
    }
    let specs: std::collections::HashMap<&str, &ObjectSpec> =
        roster.iter().map(|o| (o.id.as_str(), o)).collect();

    let mut last_err = None;
    for _ in 0..JITTER_RETRIES {
        // Edges jitters each line along its edge; Rows and Grid plan from a
        // zero origin and jitter the whole arrangement.
        let plan: Vec<(String, f64, f64)> = match template {
            TemplateId::Rows => plan_rows(roster)?,
            TemplateId::Grid => plan_grid(roster)?,
            TemplateId::Edges => plan_edges(roster, rng)?,
        };
        let (ox, oy) = match template {
            TemplateId::Edges => (0.0, 0.0),
            _ => {
                let (mut span_x, mut span_y) = (0.0f64, 0.0f64);
                for (id, x, y) in &plan {
                    span_x = span_x.max(x + specs[id.as_str()].width / 2.0);
                    span_y = span_y.max(y + specs[id.as_str()].depth / 2.0);
                }
                let max_x = DEFAULT_TABLE_WIDTH - span_x;
                let max_y = DEFAULT_TABLE_DEPTH - span_y;
                if max_x < 0.0 || max_y < 0.0 {
                    return Err(DatasetError::LayoutInfeasible(format!(
                        "{} arrangement {span_x:.3}x{span_y:.3} exceeds the table",
                        template.name()
                    )));
                }
                (sample_in(rng, 0.0, max_x), sample_in(rng, 0.0, max_y))
            }
        };
        match place_all(&plan, &specs, ox, oy) {
            Ok(scene) => return Ok(scene),
            Err(e) => last_err = Some(e),
        }
    }
    Err(DatasetError::LayoutInfeasible(format!(
        "{} roster of {} objects: {}",
        template.name(),
        roster.len(),
        last_err.map(|e| e.to_string()).unwrap_or_default()
    )))
}

fn place_all(
    plan: &[(String, f64, f64)],
    specs: &std::collections::HashMap<&str, &ObjectSpec>,
    ox: f64,
    oy: f64,
) -> Result<SceneState, crate::scene::SceneError> {
    let mut scene = SceneState::new(DEFAULT_TABLE_WIDTH, DEFAULT_TABLE_DEPTH)?;
    for (id, x, y) in plan {
        scene = scene.place(specs[id.as_str()], x + ox, y + oy)?;
    }
    Ok(scene)
}

fn sample_in(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Rows: each category one horizontal row (centers at one y), rows stacked
/// bottom-to-top. Coordinates are center offsets from the block origin.
fn plan_rows(roster: &[ObjectSpec]) -> Result<Vec<(String, f64, f64)>, DatasetError> {
    let mut plan = Vec::new();
    let mut y_cursor = 0.0;
    for (gi, (_, members)) in group_by_category(roster).iter().enumerate() {
        if gi > 0 {
            y_cursor += GROUP_GAP;
        }
        let row_height = members.iter().map(|o| o.depth).fold(0.0, f64::max);
        let y = y_cursor + row_height / 2.0;
        let mut x_cursor = 0.0;
        for (oi, obj) in members.iter().enumerate() {
            if oi > 0 {
                x_cursor += IN_GROUP_GAP;
            }
            plan.push((obj.id.clone(), x_cursor + obj.width / 2.0, y));
            x_cursor += obj.width;
        }
        y_cursor += row_height;
        if x_cursor > DEFAULT_TABLE_WIDTH {
            return Err(DatasetError::LayoutInfeasible(format!(
                "row of {} objects is {x_cursor:.3} wide",
                members.len()
            )));
        }
    }
    Ok(plan)
}

/// Grid: each category a near-square block of uniform cells, blocks packed
/// left-to-right on shelves.
fn plan_grid(roster: &[ObjectSpec]) -> Result<Vec<(String, f64, f64)>, DatasetError> {
    let mut plan = Vec::new();
    let mut shelf_x = 0.0;
    let mut shelf_y = 0.0;
    let mut shelf_height = 0.0f64;
    for (_, members) in group_by_category(roster) {
        let n = members.len();
        let cols = (n as f64).sqrt().ceil() as usize;
        let rows = n.div_ceil(cols);
        let cell_w = members.iter().map(|o| o.width).fold(0.0, f64::max) + IN_GROUP_GAP;
        let cell_d = members.iter().map(|o| o.depth).fold(0.0, f64::max) + IN_GROUP_GAP;
        let block_w = cols as f64 * cell_w - IN_GROUP_GAP;
        let block_h = rows as f64 * cell_d - IN_GROUP_GAP;
        if block_w > DEFAULT_TABLE_WIDTH || block_h > DEFAULT_TABLE_DEPTH {
            return Err(DatasetError::LayoutInfeasible(format!(
                "grid block {block_w:.3}x{block_h:.3} exceeds the table"
            )));
        }
        if shelf_x > 0.0 && shelf_x + GROUP_GAP + block_w > DEFAULT_TABLE_WIDTH {
            shelf_y += shelf_height + GROUP_GAP;
            shelf_x = 0.0;
            shelf_height = 0.0;
        } else if shelf_x > 0.0 {
            shelf_x += GROUP_GAP;
        }
        for (oi, obj) in members.iter().enumerate() {
            let (row, col) = (oi / cols, oi % cols);
            plan.push((
                obj.id.clone(),
                shelf_x + col as f64 * cell_w + (cell_w - IN_GROUP_GAP) / 2.0,
                shelf_y + row as f64 * cell_d + (cell_d - IN_GROUP_GAP) / 2.0,
            ));
        }
        shelf_x += block_w;
        shelf_height = shelf_height.max(block_h);
    }
    Ok(plan)
}

/// Edges: category lines hug alternating table edges (bottom, top, left,
/// right, then an inner ring). Plans absolute coordinates with each line's
/// start jittered along its edge.
fn plan_edges(
    roster: &[ObjectSpec],
    rng: &mut ChaCha8Rng,
) -> Result<Vec<(String, f64, f64)>, DatasetError> {
    const RING_STEP: f64 = 0.24;
    let mut plan = Vec::new();
    for (gi, (_, members)) in group_by_category(roster).iter().enumerate() {
        let ring = gi / 4;
        let edge = gi % 4;
        let inset = IN_GROUP_GAP + ring as f64 * RING_STEP;
        let along: f64 = members.iter().map(|o| match edge {
            0 | 1 => o.width,
            _ => o.depth,
        }).sum::<f64>()
            + IN_GROUP_GAP * (members.len() - 1) as f64;
        let axis_len = if edge < 2 { DEFAULT_TABLE_WIDTH } else { DEFAULT_TABLE_DEPTH };
        if along > axis_len {
            return Err(DatasetError::LayoutInfeasible(format!(
                "edge line of {} objects is {along:.3} long",
                members.len()
            )));
        }
        let mut cursor = sample_in(rng, 0.0, axis_len - along);
        for (oi, obj) in members.iter().enumerate() {
            if oi > 0 {
                cursor += IN_GROUP_GAP;
            }
            let (x, y) = match edge {
                0 => (cursor + obj.width / 2.0, inset + obj.depth / 2.0),
                1 => (cursor + obj.width / 2.0, DEFAULT_TABLE_DEPTH - inset - obj.depth / 2.0),
                2 => (inset + obj.width / 2.0, cursor + obj.depth / 2.0),
                _ => (DEFAULT_TABLE_WIDTH - inset - obj.width / 2.0, cursor + obj.depth / 2.0),
            };
            cursor += if edge < 2 { obj.width } else { obj.depth };
            plan.push((obj.id.clone(), x, y));
        }
    }
    Ok(plan)
}

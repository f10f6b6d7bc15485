//! Analytic disorder metric.
//!
//! A scalar stand-in for human tidiness judgment, used to order random-walk
//! states and to evaluate episodes. It is a consistency yardstick only —
//! training never sees it. Lower is tidier; a perfect template layout scores
//! zero. All terms depend on relative positions only, so the report is
//! invariant under common translations and placement-list permutations.

use std::collections::BTreeMap;

use crate::scene::{Placement, SceneState};

/// Weight of the alignment term in [`DisorderReport::total`].
pub const ALIGNMENT_WEIGHT: f64 = 1.0;
/// Weight of the spread-excess term.
pub const SPREAD_WEIGHT: f64 = 0.5;
/// Weight of the intergroup-overlap term.
pub const OVERLAP_WEIGHT: f64 = 2.0;

/// Disorder decomposition for one scene. `total` is the fixed weighted sum
/// of the three components.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DisorderReport {
    pub alignment: f64,
    pub spread_excess: f64,
    pub intergroup_overlap: f64,
    pub total: f64,
}

/// Compute the disorder report for a scene.
///
/// Per category group with at least two members: the alignment term is the
/// smaller of the two axis variances of member centers (a perfect row or
/// column scores zero either way), and the spread term is how far the mean
/// pairwise center distance exceeds what a gapless chain of the members would
/// need. The overlap term sums, over category pairs, the intersection area of
/// the group footprint boxes normalized by the smaller box.
pub fn disorder(scene: &SceneState) -> DisorderReport {
    let mut groups: BTreeMap<&str, Vec<&Placement>> = BTreeMap::new();
    for p in scene.placements() {
        groups.entry(p.object.category.as_str()).or_default().push(p);
    }

    let mut alignment = 0.0;
    let mut spread_excess = 0.0;
    for members in groups.values() {
        if members.len() < 2 {
            continue;
        }
        let xs: Vec<f64> = members.iter().map(|p| p.x).collect();
        let ys: Vec<f64> = members.iter().map(|p| p.y).collect();
        alignment += variance(&xs).min(variance(&ys));

        let mut dist_sum = 0.0;
        let mut pairs = 0usize;
        for (i, a) in members.iter().enumerate() {
            for b in &members[i + 1..] {
                dist_sum += ((a.x - b.x).powi(2) + (a.y - b.y).powi(2)).sqrt();
                pairs += 1;
            }
        }
        let spread = dist_sum / pairs as f64;
        let mean_extent = members.iter().map(|p| p.object.max_extent()).sum::<f64>()
            / members.len() as f64;
        let ideal = (members.len() - 1) as f64 * mean_extent;
        spread_excess += (spread - ideal).max(0.0);
    }

    let boxes: Vec<Aabb> = groups.values().map(|m| Aabb::of_footprints(m)).collect();
    let mut intergroup_overlap = 0.0;
    for (i, a) in boxes.iter().enumerate() {
        for b in &boxes[i + 1..] {
            let min_area = a.area().min(b.area());
            if min_area > 0.0 {
                intergroup_overlap += a.intersection_area(b) / min_area;
            }
        }
    }

    DisorderReport {
        alignment,
        spread_excess,
        intergroup_overlap,
        total: ALIGNMENT_WEIGHT * alignment
            + SPREAD_WEIGHT * spread_excess
            + OVERLAP_WEIGHT * intergroup_overlap,
    }
}

fn variance(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

struct Aabb {
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
}

impl Aabb {
    fn of_footprints(members: &[&Placement]) -> Aabb {
        let mut b = Aabb {
            x0: f64::INFINITY,
            x1: f64::NEG_INFINITY,
            y0: f64::INFINITY,
            y1: f64::NEG_INFINITY,
        };
        for p in members {
            let (x0, x1) = p.x_span();
            let (y0, y1) = p.y_span();
            b.x0 = b.x0.min(x0);
            b.x1 = b.x1.max(x1);
            b.y0 = b.y0.min(y0);
            b.y1 = b.y1.max(y1);
        }
        b
    }

    fn area(&self) -> f64 {
        (self.x1 - self.x0).max(0.0) * (self.y1 - self.y0).max(0.0)
    }

    fn intersection_area(&self, other: &Aabb) -> f64 {
        let w = (self.x1.min(other.x1) - self.x0.max(other.x0)).max(0.0);
        let h = (self.y1.min(other.y1) - self.y0.max(other.y0)).max(0.0);
        w * h
    }
}

/// Spearman rank correlation with average ranks for ties.
/// Returns 0 for sequences shorter than 2 or with zero rank variance.
pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "spearman inputs must have equal length");
    if a.len() < 2 {
        return 0.0;
    }
    let ra = ranks(a);
    let rb = ranks(b);
    let n = ra.len() as f64;
    let mean_a = ra.iter().sum::<f64>() / n;
    let mean_b = rb.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    for (x, y) in ra.iter().zip(&rb) {
        cov += (x - mean_a) * (y - mean_b);
        var_a += (x - mean_a).powi(2);
        var_b += (y - mean_b).powi(2);
    }
    if var_a == 0.0 || var_b == 0.0 {
        return 0.0;
    }
    cov / (var_a.sqrt() * var_b.sqrt())
}

fn ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut out = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &idx in &order[i..=j] {
            out[idx] = avg;
        }
        i = j + 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::ObjectSpec;

    fn obj(k: u32, cat: &str) -> ObjectSpec {
        ObjectSpec::new(format!("obj_{k}"), cat, 0.06, 0.06).unwrap()
    }

    /// Four same-category 0.06 objects in a row, consecutive edge gaps 0.02.
    fn row_scene(x0: f64, y: f64) -> SceneState {
        let mut s = SceneState::new(1.2, 0.8).unwrap();
        for k in 0..4u32 {
            s = s.place(&obj(k, "can"), x0 + 0.08 * f64::from(k), y).unwrap();
        }
        s
    }

    #[test]
    fn empty_scene_has_zero_disorder() {
        let r = disorder(&SceneState::new(1.2, 0.8).unwrap());
        assert_eq!(r, DisorderReport { alignment: 0.0, spread_excess: 0.0, intergroup_overlap: 0.0, total: 0.0 });
    }

    #[test]
    fn perfect_row_scores_zero() {
        // Hand computation for the row: identical y so alignment = 0; mean
        // pairwise distance (3*0.08 + 2*0.16 + 0.24)/6 = 0.1333 is inside the
        // ideal chain length 3*0.06 = 0.18, so spread excess clamps to 0.
        let r = disorder(&row_scene(0.3, 0.4));
        assert!(r.alignment.abs() < 1e-15);
        assert_eq!(r.spread_excess, 0.0);
        assert_eq!(r.total, 0.0);
    }

    #[test]
    fn scattering_one_object_strictly_increases_disorder() {
        let tidy = row_scene(0.3, 0.4);
        let scattered = tidy.place(&obj(3, "can"), 1.1, 0.7).unwrap();
        assert!(disorder(&scattered).total > disorder(&tidy).total);
    }

    #[test]
    fn perpendicular_displacement_increases_alignment_term() {
        let tidy = row_scene(0.3, 0.4);
        let mut last = 0.0;
        for (i, dy) in [0.02, 0.05, 0.09].iter().enumerate() {
            let bumped = tidy.place(&obj(2, "can"), 0.46, 0.4 + dy).unwrap();
            let a = disorder(&bumped).alignment;
            assert!(a > last, "step {i}: alignment {a} should grow");
            last = a;
        }
    }

    #[test]
    fn report_is_translation_invariant() {
        let a = row_scene(0.2, 0.3);
        let b = row_scene(0.5, 0.6); // same layout, common offset
        let (ra, rb) = (disorder(&a), disorder(&b));
        assert!((ra.total - rb.total).abs() < 1e-12);
        assert!((ra.alignment - rb.alignment).abs() < 1e-12);
        assert!((ra.spread_excess - rb.spread_excess).abs() < 1e-12);
    }

    #[test]
    fn report_is_placement_order_invariant() {
        let mut forward = SceneState::new(1.2, 0.8).unwrap();
        let mut backward = SceneState::new(1.2, 0.8).unwrap();
        let spots = [(0u32, "can", 0.2, 0.2), (1, "can", 0.9, 0.6), (2, "fork", 0.5, 0.4)];
        for &(k, c, x, y) in &spots {
            forward = forward.place(&ObjectSpec::new(format!("obj_{k}"), c, 0.06, 0.06).unwrap(), x, y).unwrap();
        }
        for &(k, c, x, y) in spots.iter().rev() {
            backward = backward.place(&ObjectSpec::new(format!("obj_{k}"), c, 0.06, 0.06).unwrap(), x, y).unwrap();
        }
        assert_eq!(disorder(&forward), disorder(&backward));
    }

    #[test]
    fn interleaved_groups_have_overlap_term() {
        let mut s = SceneState::new(1.2, 0.8).unwrap();
        // cans and forks alternating in one line: group boxes coincide.
        for (k, cat, x) in [(0, "can", 0.2), (1, "fork", 0.3), (2, "can", 0.4), (3, "fork", 0.5)] {
            s = s.place(&ObjectSpec::new(format!("obj_{k}"), cat, 0.06, 0.06).unwrap(), x, 0.4).unwrap();
        }
        let r = disorder(&s);
        assert!(r.intergroup_overlap > 0.5);
        // Separating the two groups removes the term.
        let mut sep = SceneState::new(1.2, 0.8).unwrap();
        for (k, cat, x) in [(0, "can", 0.2), (2, "can", 0.3), (1, "fork", 0.8), (3, "fork", 0.9)] {
            sep = sep.place(&ObjectSpec::new(format!("obj_{k}"), cat, 0.06, 0.06).unwrap(), x, 0.4).unwrap();
        }
        assert_eq!(disorder(&sep).intergroup_overlap, 0.0);
    }

    #[test]
    fn total_is_the_declared_weighted_sum() {
        let mut s = SceneState::new(1.2, 0.8).unwrap();
        for (k, cat, x, y) in [(0, "can", 0.2, 0.2), (1, "can", 0.9, 0.61), (2, "fork", 0.5, 0.4), (3, "fork", 0.85, 0.55)] {
            s = s.place(&ObjectSpec::new(format!("obj_{k}"), cat, 0.06, 0.06).unwrap(), x, y).unwrap();
        }
        let r = disorder(&s);
        let expected = ALIGNMENT_WEIGHT * r.alignment
            + SPREAD_WEIGHT * r.spread_excess
            + OVERLAP_WEIGHT * r.intergroup_overlap;
        assert_eq!(r.total, expected);
        assert!(r.total > 0.0);
    }

    #[test]
    fn spearman_detects_monotone_and_reversed_sequences() {
        let steps: Vec<f64> = (0..10).map(f64::from).collect();
        let up: Vec<f64> = steps.iter().map(|s| s * 2.0 + 1.0).collect();
        let down: Vec<f64> = steps.iter().map(|s| -s).collect();
        assert!((spearman(&steps, &up) - 1.0).abs() < 1e-12);
        assert!((spearman(&steps, &down) + 1.0).abs() < 1e-12);
    }

    #[test]
    fn spearman_averages_tied_ranks() {
        let a = [1.0, 2.0, 3.0, 4.0];
        let b = [1.0, 1.0, 2.0, 2.0];
        let r = spearman(&a, &b);
        assert!(r > 0.85 && r < 1.0);
    }
}

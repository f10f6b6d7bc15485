//! Synthetic preference dataset generation.
//!
//! Starting from a tidy template layout, a global random walk moves one
//! uniformly chosen object to a uniform collision-free position per step;
//! disorder accumulates, so earlier states are tidier. A local stage adds
//! small displacements of each step's moved object for contrastive pairs
//! close to the tidy manifold. Pair selection samples comparisons densely at
//! early steps and with growing gaps later, where extra disorder is barely
//! noticeable.
//!
//! Everything is derived from `master_seed` through per-trajectory SplitMix64
//! seeds, so generation is byte-deterministic and trivially parallel.

mod templates;

pub use templates::{
    make_tidy_scene, sample_roster, TemplateId, CATEGORY_POOL, GROUP_GAP, IN_GROUP_GAP,
};

use std::collections::{HashMap, HashSet};
use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::rng::{make_rng, split_seed};
use crate::scene::SceneState;

/// Smallest local-disturbance displacement, in table units. Kept above the
/// raster cell pitch (0.0125) so every labeled pair differs in image space.
pub const DISTURB_MIN: f64 = 0.02;
/// Largest local-disturbance displacement, in table units.
pub const DISTURB_MAX: f64 = 0.08;

const WALK_POSITION_TRIES: usize = 100;
const WALK_OBJECT_REPICKS: usize = 10;
const DISTURB_TRIES: usize = 20;

/// Errors from dataset generation and loading.
#[derive(Debug, thiserror::Error)]
pub enum DatasetError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("layout infeasible: {0}")]
    LayoutInfeasible(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("corrupt dataset: {0}")]
    Corrupt(String),
}

/// One random-walk trajectory: the state sequence, which object moved at each
/// transition, and the local variants per step.
#[derive(Debug, Clone)]
pub struct Trajectory {
    /// `states[0]` is the tidy configuration.
    pub states: Vec<SceneState>,
    /// `moved_ids[t]` is the object moved between `states[t]` and `states[t+1]`.
    pub moved_ids: Vec<String>,
    /// `local_variants[t]` (t >= 1) are copies of `states[t-1]` with
    /// `moved_ids[t-1]` slightly displaced. Index 0 is always empty.
    pub local_variants: Vec<Vec<SceneState>>,
}

/// Where a preference pair came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Global,
    Local,
}

/// One ordered comparison: the `tidier` scene beats the `messier` scene.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PreferencePair {
    pub tidier: String,
    pub messier: String,
    pub provenance: Provenance,
    pub trajectory: u64,
    pub t_tidier: usize,
    pub t_messier: usize,
}

/// Generation parameters; persisted verbatim as `meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub format_version: u32,
    pub master_seed: u64,
    pub trajectory_count: u64,
    /// Global walk length T.
    pub walk_steps: usize,
    /// Local variants per step M.
    pub variants_per_step: usize,
    /// Template roster in play; one is drawn per trajectory.
    pub templates: Vec<String>,
    pub objects_min: usize,
    pub objects_max: usize,
    pub categories_min: usize,
    pub categories_max: usize,
}

impl Default for DatasetMeta {
    fn default() -> Self {
        Self {
            format_version: 1,
            master_seed: 0,
            trajectory_count: 300,
            walk_steps: 12,
            variants_per_step: 4,
            templates: vec!["rows".into(), "grid".into()],
            objects_min: 8,
            objects_max: 12,
            categories_min: 2,
            categories_max: 3,
        }
    }
}

impl DatasetMeta {
    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.format_version != 1 {
            return Err(DatasetError::InvalidArgument(format!(
                "unsupported format_version {}",
                self.format_version
            )));
        }
        if self.walk_steps == 0 {
            return Err(DatasetError::InvalidArgument("walk_steps must be positive".into()));
        }
        if self.templates.is_empty() {
            return Err(DatasetError::InvalidArgument("at least one template required".into()));
        }
        for name in &self.templates {
            if TemplateId::from_name(name).is_none() {
                return Err(DatasetError::InvalidArgument(format!("unknown template `{name}`")));
            }
        }
        if self.objects_min == 0
            || self.objects_min > self.objects_max
            || self.categories_min == 0
            || self.categories_min > self.categories_max
        {
            return Err(DatasetError::InvalidArgument("bad roster ranges".into()));
        }
        Ok(())
    }
}

/// Scene id of global-walk state `t` in trajectory `i`.
pub fn state_scene_id(trajectory: u64, t: usize) -> String {
    format!("t{trajectory}_s{t}")
}

/// Scene id of local variant `j` at step `t` in trajectory `i`.
pub fn variant_scene_id(trajectory: u64, t: usize, j: usize) -> String {
    format!("t{trajectory}_v{t}_{j}")
}

/// Run the global random walk: per step, pick an object uniformly and move it
/// to a uniform collision-free position. Exhausted rejection budgets re-pick
/// the object up to 10 times, then truncate the trajectory.
pub fn global_walk(tidy: &SceneState, steps: usize, rng: &mut ChaCha8Rng) -> Trajectory {
    let mut states = vec![tidy.clone()];
    let mut moved_ids = Vec::new();
    'steps: for _ in 0..steps {
        let current = states.last().expect("states never empty").clone();
        if current.is_empty() {
            break;
        }
        for _ in 0..WALK_OBJECT_REPICKS {
            let pick = rng.random_range(0..current.len());
            let obj = current.placements()[pick].object.clone();
            for _ in 0..WALK_POSITION_TRIES {
                let x = sample_range(rng, obj.width / 2.0, current.table_width - obj.width / 2.0);
                let y = sample_range(rng, obj.depth / 2.0, current.table_depth - obj.depth / 2.0);
                if current.collision_free(&obj, x, y) {
                    states.push(current.place(&obj, x, y).expect("checked collision-free"));
                    moved_ids.push(obj.id.clone());
                    continue 'steps;
                }
            }
        }
        break;
    }
    let local_variants = vec![Vec::new(); states.len()];
    Trajectory { states, moved_ids, local_variants }
}

/// Fill in up to `m` local variants per step: the step's moved object is
/// displaced from its pre-move position by a uniform-angle offset of
/// magnitude in `[DISTURB_MIN, DISTURB_MAX]`. Collision-rejected variants
/// retry up to 20 times and are skipped on exhaustion.
pub fn local_disturb(trajectory: &mut Trajectory, m: usize, rng: &mut ChaCha8Rng) {
    for t in 1..trajectory.states.len() {
        let base = trajectory.states[t - 1].clone();
        let id = trajectory.moved_ids[t - 1].clone();
        let placement = base.get(&id).expect("moved object is on the table").clone();
        let mut variants = Vec::new();
        for _ in 0..m {
            for _ in 0..DISTURB_TRIES {
                let angle = rng.random_range(0.0..std::f64::consts::TAU);
                let magnitude = rng.random_range(DISTURB_MIN..=DISTURB_MAX);
                let x = placement.x + magnitude * angle.cos();
                let y = placement.y + magnitude * angle.sin();
                if base.collision_free(&placement.object, x, y) {
                    variants.push(base.place(&placement.object, x, y).expect("collision-free"));
                    break;
                }
            }
        }
        trajectory.local_variants[t] = variants;
    }
}

/// Select the labeled pairs of one trajectory.
///
/// Global schedule: for each step `t`, the base gap is `max(1, t/3)` and the
/// pairs `(t, t+gap)`, `(t, t+2*gap)`, `(t, t+4*gap)` are kept while they fit,
/// so early steps are compared densely and late steps sparsely. Local pairs
/// put each variant below its step's pre-move state.
pub fn select_pairs(trajectory_index: u64, trajectory: &Trajectory) -> Vec<PreferencePair> {
    let len = trajectory.states.len();
    let mut pairs = Vec::new();
    let mut seen = HashSet::new();
    for t in 0..len {
        let base_gap = 1.max(t / 3);
        for factor in [1, 2, 4] {
            let t_messier = t + base_gap * factor;
            if t_messier < len && seen.insert((t, t_messier)) {
                pairs.push(PreferencePair {
                    tidier: state_scene_id(trajectory_index, t),
                    messier: state_scene_id(trajectory_index, t_messier),
                    provenance: Provenance::Global,
                    trajectory: trajectory_index,
                    t_tidier: t,
                    t_messier,
                });
            }
        }
    }
    for (t, variants) in trajectory.local_variants.iter().enumerate() {
        for j in 0..variants.len() {
            pairs.push(PreferencePair {
                tidier: state_scene_id(trajectory_index, t - 1),
                messier: variant_scene_id(trajectory_index, t, j),
                provenance: Provenance::Local,
                trajectory: trajectory_index,
                t_tidier: t - 1,
                t_messier: t,
            });
        }
    }
    pairs
}

fn sample_range(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..hi)
    } else {
        lo
    }
}

/// Build trajectory `index` of a dataset from its derived seed.
pub fn build_trajectory(meta: &DatasetMeta, index: u64) -> Result<Trajectory, DatasetError> {
    let mut rng = make_rng(split_seed(meta.master_seed, index));
    let template = TemplateId::from_name(&meta.templates[rng.random_range(0..meta.templates.len())])
        .expect("meta validated");
    let roster = sample_roster(
        &mut rng,
        meta.objects_min,
        meta.objects_max,
        meta.categories_min,
        meta.categories_max,
    );
    let tidy = make_tidy_scene(template, &roster, &mut rng)?;
    let mut trajectory = global_walk(&tidy, meta.walk_steps, &mut rng);
    local_disturb(&mut trajectory, meta.variants_per_step, &mut rng);
    Ok(trajectory)
}

#[derive(Serialize, Deserialize)]
struct SceneLine {
    scene_id: String,
    scene: SceneState,
}

fn render_trajectory_lines(
    meta: &DatasetMeta,
    index: u64,
) -> Result<(String, String), DatasetError> {
    let trajectory = build_trajectory(meta, index)?;
    let mut scenes = String::new();
    for (t, state) in trajectory.states.iter().enumerate() {
        let line = SceneLine { scene_id: state_scene_id(index, t), scene: state.clone() };
        scenes.push_str(&serde_json::to_string(&line).expect("scene serializes"));
        scenes.push('\n');
    }
    for (t, variants) in trajectory.local_variants.iter().enumerate() {
        for (j, state) in variants.iter().enumerate() {
            let line = SceneLine { scene_id: variant_scene_id(index, t, j), scene: state.clone() };
            scenes.push_str(&serde_json::to_string(&line).expect("scene serializes"));
            scenes.push('\n');
        }
    }
    let mut pairs = String::new();
    for pair in select_pairs(index, &trajectory) {
        pairs.push_str(&serde_json::to_string(&pair).expect("pair serializes"));
        pairs.push('\n');
    }
    Ok((scenes, pairs))
}

/// Generate and persist a dataset directory: `meta.json` always, plus
/// `scenes.jsonl` and `pairs.jsonl` when there are trajectories.
///
/// Output is byte-identical for a given meta regardless of `workers`:
/// trajectories are rendered from independent derived seeds and merged in
/// ascending index order.
pub fn generate_dataset(
    meta: &DatasetMeta,
    dir: &Path,
    workers: usize,
) -> Result<(), DatasetError> {
    meta.validate()?;
    std::fs::create_dir_all(dir)?;
    let meta_json = serde_json::to_string_pretty(meta).expect("meta serializes");
    std::fs::write(dir.join("meta.json"), meta_json + "\n")?;
    if meta.trajectory_count == 0 {
        return Ok(());
    }

    let workers = workers.max(1).min(meta.trajectory_count as usize);
    let mut chunks: Vec<Vec<(u64, String, String)>> = Vec::new();
    std::thread::scope(|scope| -> Result<(), DatasetError> {
        let mut handles = Vec::new();
        for w in 0..workers {
            let meta = &*meta;
            handles.push(scope.spawn(move || -> Result<Vec<(u64, String, String)>, DatasetError> {
                let mut out = Vec::new();
                let mut index = w as u64;
                while index < meta.trajectory_count {
                    let (scenes, pairs) = render_trajectory_lines(meta, index)?;
                    out.push((index, scenes, pairs));
                    index += workers as u64;
                }
                Ok(out)
            }));
        }
        for handle in handles {
            chunks.push(handle.join().expect("worker thread panicked")?);
        }
        Ok(())
    })?;

    let mut merged: Vec<(u64, String, String)> = chunks.into_iter().flatten().collect();
    merged.sort_by_key(|(index, _, _)| *index);

    let mut scenes_file = std::io::BufWriter::new(std::fs::File::create(dir.join("scenes.jsonl"))?);
    let mut pairs_file = std::io::BufWriter::new(std::fs::File::create(dir.join("pairs.jsonl"))?);
    for (_, scenes, pairs) in &merged {
        scenes_file.write_all(scenes.as_bytes())?;
        pairs_file.write_all(pairs.as_bytes())?;
    }
    scenes_file.flush()?;
    pairs_file.flush()?;
    Ok(())
}

/// A dataset in memory.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub meta: DatasetMeta,
    pub scenes: HashMap<String, SceneState>,
    pub pairs: Vec<PreferencePair>,
}

impl Dataset {
    /// Sorted distinct trajectory ids over all pairs.
    pub fn trajectory_ids(&self) -> Vec<u64> {
        let mut ids: Vec<u64> = self.pairs.iter().map(|p| p.trajectory).collect();
        ids.sort_unstable();
        ids.dedup();
        ids
    }
}

/// Load and validate a dataset directory. Scenes are re-validated against the
/// scene invariants; pairs must reference stored scenes and keep global
/// labels consistent with trajectory order.
pub fn load_dataset(dir: &Path) -> Result<Dataset, DatasetError> {
    let meta_text = std::fs::read_to_string(dir.join("meta.json"))?;
    let meta: DatasetMeta = serde_json::from_str(&meta_text)
        .map_err(|e| DatasetError::Corrupt(format!("meta.json: {e}")))?;
    meta.validate()?;

    let mut scenes = HashMap::new();
    let scenes_path = dir.join("scenes.jsonl");
    if scenes_path.exists() {
        for (lineno, line) in std::io::BufReader::new(std::fs::File::open(&scenes_path)?)
            .lines()
            .enumerate()
        {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let record: SceneLine = serde_json::from_str(&line).map_err(|e| {
                DatasetError::Corrupt(format!("scenes.jsonl line {}: {e}", lineno + 1))
            })?;
            if scenes.insert(record.scene_id.clone(), record.scene).is_some() {
                return Err(DatasetError::Corrupt(format!(
                    "duplicate scene id `{}`",
                    record.scene_id
                )));
            }
        }
    }

    let mut pairs = Vec::new();
    let pairs_path = dir.join("pairs.jsonl");
    if pairs_path.exists() {
        for (lineno, line) in
            std::io::BufReader::new(std::fs::File::open(&pairs_path)?).lines().enumerate()
        {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let pair: PreferencePair = serde_json::from_str(&line).map_err(|e| {
                DatasetError::Corrupt(format!("pairs.jsonl line {}: {e}", lineno + 1))
            })?;
            if !scenes.contains_key(&pair.tidier) || !scenes.contains_key(&pair.messier) {
                return Err(DatasetError::Corrupt(format!(
                    "pair on line {} references a missing scene",
                    lineno + 1
                )));
            }
            if pair.provenance == Provenance::Global && pair.t_tidier >= pair.t_messier {
                return Err(DatasetError::Corrupt(format!(
                    "global pair on line {} is not ordered by step",
                    lineno + 1
                )));
            }
            pairs.push(pair);
        }
    }
    Ok(Dataset { meta, scenes, pairs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::disorder;
    use crate::raster::rasterize;
    use crate::scene::ObjectSpec;

    fn small_meta(seed: u64, trajectories: u64) -> DatasetMeta {
        DatasetMeta {
            master_seed: seed,
            trajectory_count: trajectories,
            walk_steps: 6,
            variants_per_step: 2,
            ..DatasetMeta::default()
        }
    }

    fn tidy_example(seed: u64) -> SceneState {
        let mut rng = make_rng(seed);
        let roster = sample_roster(&mut rng, 8, 12, 2, 3);
        make_tidy_scene(TemplateId::Rows, &roster, &mut rng).unwrap()
    }

    #[test]
    fn zero_step_walk_is_just_the_tidy_scene() {
        let tidy = tidy_example(1);
        let walk = global_walk(&tidy, 0, &mut make_rng(2));
        assert_eq!(walk.states.len(), 1);
        assert!(walk.moved_ids.is_empty());
    }

    #[test]
    fn single_object_walk_moves_that_object() {
        let scene = SceneState::new(1.2, 0.8)
            .unwrap()
            .place(&ObjectSpec::new("obj_0", "can", 0.06, 0.06).unwrap(), 0.6, 0.4)
            .unwrap();
        let walk = global_walk(&scene, 1, &mut make_rng(3));
        assert_eq!(walk.states.len(), 2);
        assert_eq!(walk.moved_ids, ["obj_0"]);
    }

    #[test]
    fn walk_states_satisfy_scene_invariants() {
        let tidy = tidy_example(4);
        let walk = global_walk(&tidy, 12, &mut make_rng(5));
        for state in &walk.states {
            state.validate().unwrap();
        }
    }

    #[test]
    fn mean_disorder_grows_from_start_to_end_of_walks() {
        // The learnability premise: disorder accumulates along the walk.
        let mut start_sum = 0.0;
        let mut end_sum = 0.0;
        for seed in 0..100u64 {
            let mut rng = make_rng(split_seed(77, seed));
            let roster = sample_roster(&mut rng, 8, 12, 2, 3);
            let tidy = make_tidy_scene(TemplateId::Rows, &roster, &mut rng).unwrap();
            let walk = global_walk(&tidy, 12, &mut rng);
            start_sum += disorder(&walk.states[0]).total;
            end_sum += disorder(walk.states.last().unwrap()).total;
        }
        assert!(end_sum / 100.0 > start_sum / 100.0);
    }

    #[test]
    fn zero_variants_requested_gives_none() {
        let tidy = tidy_example(6);
        let mut walk = global_walk(&tidy, 4, &mut make_rng(7));
        local_disturb(&mut walk, 0, &mut make_rng(8));
        assert!(walk.local_variants.iter().all(Vec::is_empty));
    }

    #[test]
    fn variants_displace_the_moved_object_within_bounds() {
        let tidy = tidy_example(9);
        let mut walk = global_walk(&tidy, 6, &mut make_rng(10));
        local_disturb(&mut walk, 4, &mut make_rng(11));
        for t in 1..walk.states.len() {
            let base = &walk.states[t - 1];
            let moved = &walk.moved_ids[t - 1];
            for variant in &walk.local_variants[t] {
                variant.validate().unwrap();
                let mut diffs = 0;
                for p in base.placements() {
                    let v = variant.get(&p.object.id).unwrap();
                    if (v.x, v.y) != (p.x, p.y) {
                        diffs += 1;
                        assert_eq!(&p.object.id, moved);
                        let dist = ((v.x - p.x).powi(2) + (v.y - p.y).powi(2)).sqrt();
                        assert!(
                            (DISTURB_MIN..=DISTURB_MAX + 1e-12).contains(&dist),
                            "displacement {dist}"
                        );
                    }
                }
                assert_eq!(diffs, 1, "exactly one placement differs");
            }
        }
    }

    #[test]
    fn variant_rasters_differ_from_parent_in_at_least_one_cell() {
        let tidy = tidy_example(12);
        let mut walk = global_walk(&tidy, 6, &mut make_rng(13));
        local_disturb(&mut walk, 3, &mut make_rng(14));
        let mut checked = 0;
        for t in 1..walk.states.len() {
            let parent = rasterize(&walk.states[t - 1]).unwrap();
            for variant in &walk.local_variants[t] {
                assert_ne!(rasterize(variant).unwrap(), parent);
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn pair_schedule_on_a_two_state_trajectory() {
        let tidy = tidy_example(15);
        let walk = global_walk(&tidy, 1, &mut make_rng(16));
        let pairs = select_pairs(0, &walk);
        assert_eq!(pairs.len(), 1);
        assert_eq!((pairs[0].t_tidier, pairs[0].t_messier), (0, 1));
    }

    #[test]
    fn pair_schedule_gap_formula_at_t6() {
        // Length-13 trajectory: base gap at t=6 is 2, so gaps {2,4,8} yield
        // (6,8) and (6,10); (6,14) is clipped.
        let tidy = tidy_example(17);
        let walk = global_walk(&tidy, 12, &mut make_rng(18));
        assert_eq!(walk.states.len(), 13);
        let pairs = select_pairs(0, &walk);
        let from_t6: Vec<usize> = pairs
            .iter()
            .filter(|p| p.provenance == Provenance::Global && p.t_tidier == 6)
            .map(|p| p.t_messier)
            .collect();
        assert_eq!(from_t6, vec![8, 10]);
    }

    #[test]
    fn local_pair_count_matches_variant_count() {
        let tidy = tidy_example(19);
        let mut walk = global_walk(&tidy, 12, &mut make_rng(20));
        local_disturb(&mut walk, 4, &mut make_rng(21));
        let variants: usize = walk.local_variants.iter().map(Vec::len).sum();
        let locals = select_pairs(0, &walk)
            .iter()
            .filter(|p| p.provenance == Provenance::Local)
            .count();
        assert_eq!(locals, variants);
        assert_eq!(variants, 48, "no skips expected on a sparse table");
    }

    #[test]
    fn generation_is_byte_deterministic() {
        let meta = small_meta(7, 5);
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        generate_dataset(&meta, dir_a.path(), 1).unwrap();
        generate_dataset(&meta, dir_b.path(), 1).unwrap();
        for file in ["meta.json", "scenes.jsonl", "pairs.jsonl"] {
            let a = std::fs::read(dir_a.path().join(file)).unwrap();
            let b = std::fs::read(dir_b.path().join(file)).unwrap();
            assert_eq!(a, b, "{file} differs between runs");
        }
    }

    #[test]
    fn parallel_generation_matches_serial_bytes() {
        let meta = small_meta(8, 7);
        let serial = tempfile::tempdir().unwrap();
        let parallel = tempfile::tempdir().unwrap();
        generate_dataset(&meta, serial.path(), 1).unwrap();
        generate_dataset(&meta, parallel.path(), 3).unwrap();
        for file in ["scenes.jsonl", "pairs.jsonl"] {
            assert_eq!(
                std::fs::read(serial.path().join(file)).unwrap(),
                std::fs::read(parallel.path().join(file)).unwrap(),
                "{file} differs between worker counts"
            );
        }
    }

    #[test]
    fn empty_dataset_writes_meta_only() {
        let meta = small_meta(9, 0);
        let dir = tempfile::tempdir().unwrap();
        generate_dataset(&meta, dir.path(), 1).unwrap();
        assert!(dir.path().join("meta.json").exists());
        assert!(!dir.path().join("scenes.jsonl").exists());
        assert!(!dir.path().join("pairs.jsonl").exists());
        let dataset = load_dataset(dir.path()).unwrap();
        assert!(dataset.scenes.is_empty() && dataset.pairs.is_empty());
    }

    #[test]
    fn loaded_dataset_has_referential_integrity_and_expected_counts() {
        let meta = small_meta(10, 6);
        let dir = tempfile::tempdir().unwrap();
        generate_dataset(&meta, dir.path(), 1).unwrap();
        let dataset = load_dataset(dir.path()).unwrap();
        assert_eq!(dataset.meta, meta);

        // Recount the schedule from the stored trajectories.
        let mut expected = 0;
        for i in 0..meta.trajectory_count {
            let trajectory = build_trajectory(&meta, i).unwrap();
            expected += select_pairs(i, &trajectory).len();
        }
        assert_eq!(dataset.pairs.len(), expected);
        for pair in &dataset.pairs {
            assert!(dataset.scenes.contains_key(&pair.tidier));
            assert!(dataset.scenes.contains_key(&pair.messier));
            if pair.provenance == Provenance::Global {
                assert!(pair.t_tidier < pair.t_messier);
            }
        }
    }

    #[test]
    fn loader_rejects_dangling_pair_references() {
        let meta = small_meta(11, 1);
        let dir = tempfile::tempdir().unwrap();
        generate_dataset(&meta, dir.path(), 1).unwrap();
        let pairs_path = dir.path().join("pairs.jsonl");
        let mut text = std::fs::read_to_string(&pairs_path).unwrap();
        text.push_str("{\"tidier\":\"t9_s0\",\"messier\":\"t9_s1\",\"provenance\":\"global\",\"trajectory\":9,\"t_tidier\":0,\"t_messier\":1}\n");
        std::fs::write(&pairs_path, text).unwrap();
        assert!(matches!(load_dataset(dir.path()), Err(DatasetError::Corrupt(_))));
    }
}

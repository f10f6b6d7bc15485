//! Deterministic 2D tabletop world.
//!
//! A [`SceneState`] is a table with axis-aligned rectangular objects placed on
//! it. Objects never overlap (open interiors are disjoint; touching edges are
//! allowed) and always lie fully inside the table bounds. All operations have
//! value semantics: mutation returns a new state and leaves the input intact.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// Slack for footprint touching and bounds checks, in table units.
///
/// Two footprints only count as overlapping when their interiors interpenetrate
/// by more than this, so layouts assembled from exact edge-to-edge arithmetic
/// (gap 0, shared edges) survive floating-point rounding.
pub const GEOM_EPS: f64 = 1e-9;

/// Errors from scene construction and mutation.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum SceneError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("placement rejected: {0}")]
    PlacementRejected(String),
    #[error("object not found: {0}")]
    NotFound(String),
    #[error("scene document invalid: {0}")]
    InvalidDocument(String),
}

/// A rigid rectangular object identified by an `obj_<k>` token.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectSpec {
    pub id: String,
    pub category: String,
    pub width: f64,
    pub depth: f64,
}

impl ObjectSpec {
    pub fn new(
        id: impl Into<String>,
        category: impl Into<String>,
        width: f64,
        depth: f64,
    ) -> Result<Self, SceneError> {
        let id = id.into();
        if object_index(&id).is_none() {
            return Err(SceneError::InvalidArgument(format!(
                "object id `{id}` is not of the form obj_<k>"
            )));
        }
        if !(width > 0.0 && width.is_finite() && depth > 0.0 && depth.is_finite()) {
            return Err(SceneError::InvalidArgument(format!(
                "object `{id}` has non-positive extent {width}x{depth}"
            )));
        }
        Ok(Self { id, category: category.into(), width, depth })
    }

    /// Largest of the two footprint extents.
    pub fn max_extent(&self) -> f64 {
        self.width.max(self.depth)
    }
}

/// Parse the `<k>` of an `obj_<k>` id. Returns `None` for malformed ids.
pub fn object_index(id: &str) -> Option<u32> {
    let digits = id.strip_prefix("obj_")?;
    if digits.is_empty() || (digits.len() > 1 && digits.starts_with('0')) {
        return None;
    }
    digits.parse().ok()
}

/// An object at a footprint-center coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct Placement {
    pub object: ObjectSpec,
    pub x: f64,
    pub y: f64,
}

impl Placement {
    /// Footprint interval along x: `[x - w/2, x + w/2]`.
    pub fn x_span(&self) -> (f64, f64) {
        (self.x - self.object.width / 2.0, self.x + self.object.width / 2.0)
    }

    /// Footprint interval along y: `[y - d/2, y + d/2]`.
    pub fn y_span(&self) -> (f64, f64) {
        (self.y - self.object.depth / 2.0, self.y + self.object.depth / 2.0)
    }
}

/// True iff the open interiors of the two footprints intersect.
/// Edge-touching is not overlap.
pub fn overlaps(a: &Placement, b: &Placement) -> bool {
    let (ax0, ax1) = a.x_span();
    let (bx0, bx1) = b.x_span();
    let (ay0, ay1) = a.y_span();
    let (by0, by1) = b.y_span();
    let x_pen = ax1.min(bx1) - ax0.max(bx0);
    let y_pen = ay1.min(by1) - ay0.max(by0);
    x_pen > GEOM_EPS && y_pen > GEOM_EPS
}

/// Default table width in table units.
pub const DEFAULT_TABLE_WIDTH: f64 = 1.2;
/// Default table depth in table units.
pub const DEFAULT_TABLE_DEPTH: f64 = 0.8;

/// Table bounds plus the collision-free placements on it.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneState {
    pub table_width: f64,
    pub table_depth: f64,
    placements: Vec<Placement>,
}

impl SceneState {
    /// Create an empty scene. Both dimensions must be positive.
    pub fn new(table_width: f64, table_depth: f64) -> Result<Self, SceneError> {
        if !(table_width > 0.0 && table_width.is_finite())
            || !(table_depth > 0.0 && table_depth.is_finite())
        {
            return Err(SceneError::InvalidArgument(format!(
                "table dimensions must be positive, got {table_width}x{table_depth}"
            )));
        }
        Ok(Self { table_width, table_depth, placements: Vec::new() })
    }

    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    pub fn len(&self) -> usize {
        self.placements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.placements.is_empty()
    }

    pub fn get(&self, object_id: &str) -> Option<&Placement> {
        self.placements.iter().find(|p| p.object.id == object_id)
    }

    fn footprint_in_bounds(&self, obj: &ObjectSpec, x: f64, y: f64) -> bool {
        let hw = obj.width / 2.0;
        let hd = obj.depth / 2.0;
        x - hw >= -GEOM_EPS
            && x + hw <= self.table_width + GEOM_EPS
            && y - hd >= -GEOM_EPS
            && y + hd <= self.table_depth + GEOM_EPS
    }

    /// True iff placing `obj` at `(x, y)` stays in bounds and overlaps no other
    /// placement. If `obj` is already on the table its current placement is
    /// ignored (it is being picked up).
    pub fn collision_free(&self, obj: &ObjectSpec, x: f64, y: f64) -> bool {
        if !x.is_finite() || !y.is_finite() || !self.footprint_in_bounds(obj, x, y) {
            return false;
        }
        let candidate = Placement { object: obj.clone(), x, y };
        self.placements
            .iter()
            .filter(|p| p.object.id != obj.id)
            .all(|p| !overlaps(p, &candidate))
    }

    /// Place `obj` at `(x, y)` and return the new state. If the object is
    /// already on the table it is moved (pick-and-place), preserving its
    /// position in the placement list.
    pub fn place(&self, obj: &ObjectSpec, x: f64, y: f64) -> Result<SceneState, SceneError> {
        if !self.footprint_in_bounds(obj, x, y) {
            return Err(SceneError::PlacementRejected(format!(
                "object `{}` at ({x}, {y}) leaves table bounds",
                obj.id
            )));
        }
        if !self.collision_free(obj, x, y) {
            return Err(SceneError::PlacementRejected(format!(
                "object `{}` at ({x}, {y}) collides with another object",
                obj.id
            )));
        }
        if let Some(existing) = self.get(&obj.id) {
            if existing.object != *obj {
                return Err(SceneError::PlacementRejected(format!(
                    "object `{}` is already on the table with a different spec",
                    obj.id
                )));
            }
        }
        let mut next = self.clone();
        match next.placements.iter_mut().find(|p| p.object.id == obj.id) {
            Some(p) => {
                p.x = x;
                p.y = y;
            }
            None => next.placements.push(Placement { object: obj.clone(), x, y }),
        }
        Ok(next)
    }

    /// Remove the object with `object_id`, preserving the order of the rest.
    pub fn remove(&self, object_id: &str) -> Result<SceneState, SceneError> {
        if self.get(object_id).is_none() {
            return Err(SceneError::NotFound(object_id.to_string()));
        }
        let mut next = self.clone();
        next.placements.retain(|p| p.object.id != object_id);
        Ok(next)
    }

    /// Check every scene invariant: bounds, pairwise disjoint interiors,
    /// unique well-formed ids. Used by loaders and property tests.
    pub fn validate(&self) -> Result<(), SceneError> {
        for p in &self.placements {
            if object_index(&p.object.id).is_none() {
                return Err(SceneError::InvalidDocument(format!(
                    "malformed object id `{}`",
                    p.object.id
                )));
            }
            if !(p.object.width > 0.0 && p.object.depth > 0.0) {
                return Err(SceneError::InvalidDocument(format!(
                    "object `{}` has non-positive extent",
                    p.object.id
                )));
            }
            if !self.footprint_in_bounds(&p.object, p.x, p.y) {
                return Err(SceneError::InvalidDocument(format!(
                    "object `{}` leaves table bounds",
                    p.object.id
                )));
            }
        }
        for (i, a) in self.placements.iter().enumerate() {
            for b in &self.placements[i + 1..] {
                if a.object.id == b.object.id {
                    return Err(SceneError::InvalidDocument(format!(
                        "duplicate object id `{}`",
                        a.object.id
                    )));
                }
                if overlaps(a, b) {
                    return Err(SceneError::InvalidDocument(format!(
                        "objects `{}` and `{}` overlap",
                        a.object.id, b.object.id
                    )));
                }
            }
        }
        Ok(())
    }

    /// Serialize to the scene JSON document.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("scene document serializes")
    }

    /// Parse and validate a scene JSON document. Documents that violate any
    /// scene invariant are rejected.
    pub fn from_json(text: &str) -> Result<SceneState, SceneError> {
        serde_json::from_str(text).map_err(|e| SceneError::InvalidDocument(e.to_string()))
    }

    fn from_doc(doc: SceneDoc) -> Result<SceneState, SceneError> {
        let mut scene = SceneState::new(doc.table.width, doc.table.depth)
            .map_err(|e| SceneError::InvalidDocument(e.to_string()))?;
        scene.placements = doc
            .objects
            .into_iter()
            .map(|o| {
                Ok(Placement {
                    object: ObjectSpec::new(o.id, o.category, o.width, o.depth)
                        .map_err(|e| SceneError::InvalidDocument(e.to_string()))?,
                    x: o.x,
                    y: o.y,
                })
            })
            .collect::<Result<_, SceneError>>()?;
        scene.validate()?;
        Ok(scene)
    }
}

// The wire form is the documented scene schema, not the struct layout, and
// deserialization re-validates every invariant.

impl Serialize for SceneState {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let doc = SceneDoc {
            table: TableDoc { width: self.table_width, depth: self.table_depth },
            objects: self
                .placements
                .iter()
                .map(|p| ObjectDoc {
                    id: p.object.id.clone(),
                    category: p.object.category.clone(),
                    width: p.object.width,
                    depth: p.object.depth,
                    x: p.x,
                    y: p.y,
                })
                .collect(),
        };
        doc.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for SceneState {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let doc = SceneDoc::deserialize(deserializer)?;
        SceneState::from_doc(doc).map_err(D::Error::custom)
    }
}

#[derive(Serialize, Deserialize)]
struct SceneDoc {
    table: TableDoc,
    objects: Vec<ObjectDoc>,
}

#[derive(Serialize, Deserialize)]
struct TableDoc {
    width: f64,
    depth: f64,
}

#[derive(Serialize, Deserialize)]
struct ObjectDoc {
    id: String,
    category: String,
    width: f64,
    depth: f64,
    x: f64,
    y: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obj(k: u32, w: f64, d: f64) -> ObjectSpec {
        ObjectSpec::new(format!("obj_{k}"), "can", w, d).unwrap()
    }

    fn placed(k: u32, w: f64, d: f64, x: f64, y: f64) -> Placement {
        Placement { object: obj(k, w, d), x, y }
    }

    #[test]
    fn new_scene_stores_bounds() {
        let s = SceneState::new(1.2, 0.8).unwrap();
        assert_eq!(s.table_width, 1.2);
        assert_eq!(s.table_depth, 0.8);
        assert!(s.is_empty());
    }

    #[test]
    fn new_scene_rejects_non_positive_dimensions() {
        assert!(matches!(SceneState::new(0.0, 0.8), Err(SceneError::InvalidArgument(_))));
        assert!(matches!(SceneState::new(1.2, -1.0), Err(SceneError::InvalidArgument(_))));
    }

    #[test]
    fn place_one_object() {
        let s = SceneState::new(1.2, 0.8).unwrap();
        let s = s.place(&obj(0, 0.06, 0.06), 0.3, 0.3).unwrap();
        assert_eq!(s.len(), 1);
    }

    #[test]
    fn identical_footprints_overlap() {
        let a = placed(0, 0.1, 0.1, 0.5, 0.5);
        let b = placed(1, 0.1, 0.1, 0.5, 0.5);
        assert!(overlaps(&a, &b));
    }

    #[test]
    fn edge_touching_is_not_overlap() {
        let a = placed(0, 0.1, 0.1, 0.5, 0.5);
        let b = placed(1, 0.1, 0.1, 0.6, 0.5);
        assert!(!overlaps(&a, &b));
    }

    #[test]
    fn contained_footprint_overlaps() {
        // Interval intersection by hand: a spans [0.4,0.6], b spans [0.5,0.6]
        // in x and both span y around 0.5, so interiors intersect.
        let a = placed(0, 0.2, 0.2, 0.5, 0.5);
        let b = placed(1, 0.1, 0.1, 0.55, 0.5);
        assert!(overlaps(&a, &b));
    }

    #[test]
    fn collision_free_on_empty_scene() {
        let s = SceneState::new(1.2, 0.8).unwrap();
        assert!(s.collision_free(&obj(0, 0.06, 0.06), 0.5, 0.5));
    }

    #[test]
    fn collision_free_rejects_protruding_footprint() {
        let s = SceneState::new(1.2, 0.8).unwrap();
        assert!(!s.collision_free(&obj(0, 0.1, 0.1), 0.01, 0.4));
        assert!(!s.collision_free(&obj(0, 0.1, 0.1), 1.19, 0.4));
    }

    #[test]
    fn collision_free_rejects_direct_overlap() {
        let s = SceneState::new(1.2, 0.8)
            .unwrap()
            .place(&obj(0, 0.1, 0.1), 0.5, 0.5)
            .unwrap();
        assert!(!s.collision_free(&obj(1, 0.1, 0.1), 0.5, 0.5));
    }

    #[test]
    fn place_moves_existing_object() {
        let o = obj(0, 0.06, 0.06);
        let s = SceneState::new(1.2, 0.8).unwrap().place(&o, 0.3, 0.3).unwrap();
        let s2 = s.place(&o, 0.5, 0.5).unwrap();
        assert_eq!(s2.len(), 1);
        let p = s2.get("obj_0").unwrap();
        assert_eq!((p.x, p.y), (0.5, 0.5));
        // Value semantics: the original state is untouched.
        assert_eq!(s.get("obj_0").unwrap().x, 0.3);
    }

    #[test]
    fn place_onto_occupied_cell_is_rejected() {
        let s = SceneState::new(1.2, 0.8)
            .unwrap()
            .place(&obj(0, 0.1, 0.1), 0.5, 0.5)
            .unwrap();
        let err = s.place(&obj(1, 0.1, 0.1), 0.5, 0.5).unwrap_err();
        assert!(matches!(err, SceneError::PlacementRejected(_)));
    }

    #[test]
    fn move_vacates_previous_position() {
        // obj_0 can move to a spot that only its own old footprint "blocks".
        let o = obj(0, 0.1, 0.1);
        let s = SceneState::new(1.2, 0.8).unwrap().place(&o, 0.5, 0.5).unwrap();
        assert!(s.collision_free(&o, 0.52, 0.5));
        assert!(s.place(&o, 0.52, 0.5).is_ok());
    }

    #[test]
    fn remove_only_object_gives_empty_scene() {
        let s = SceneState::new(1.2, 0.8)
            .unwrap()
            .place(&obj(0, 0.06, 0.06), 0.3, 0.3)
            .unwrap();
        assert!(s.remove("obj_0").unwrap().is_empty());
    }

    #[test]
    fn remove_preserves_order_of_rest() {
        let mut s = SceneState::new(1.2, 0.8).unwrap();
        for (k, x) in [(0, 0.2), (1, 0.5), (2, 0.8)] {
            s = s.place(&obj(k, 0.06, 0.06), x, 0.4).unwrap();
        }
        let s = s.remove("obj_1").unwrap();
        let ids: Vec<&str> = s.placements().iter().map(|p| p.object.id.as_str()).collect();
        assert_eq!(ids, ["obj_0", "obj_2"]);
    }

    #[test]
    fn remove_unknown_id_is_not_found() {
        let s = SceneState::new(1.2, 0.8).unwrap();
        assert_eq!(s.remove("obj_9").unwrap_err(), SceneError::NotFound("obj_9".into()));
    }

    #[test]
    fn object_index_parses_strictly() {
        assert_eq!(object_index("obj_0"), Some(0));
        assert_eq!(object_index("obj_42"), Some(42));
        assert_eq!(object_index("obj_"), None);
        assert_eq!(object_index("obj_01"), None);
        assert_eq!(object_index("object_1"), None);
        assert_eq!(object_index("obj_-1"), None);
    }

    #[test]
    fn json_round_trip() {
        let s = SceneState::new(1.2, 0.8)
            .unwrap()
            .place(&ObjectSpec::new("obj_0", "can", 0.06, 0.06).unwrap(), 0.1, 0.2)
            .unwrap()
            .place(&ObjectSpec::new("obj_1", "fork", 0.02, 0.14).unwrap(), 0.5, 0.3)
            .unwrap();
        let parsed = SceneState::from_json(&s.to_json()).unwrap();
        assert_eq!(parsed, s);
    }

    #[test]
    fn loader_rejects_overlapping_document() {
        let text = r#"{"table":{"width":1.2,"depth":0.8},"objects":[
            {"id":"obj_0","category":"can","width":0.1,"depth":0.1,"x":0.5,"y":0.5},
            {"id":"obj_1","category":"can","width":0.1,"depth":0.1,"x":0.52,"y":0.5}]}"#;
        assert!(matches!(SceneState::from_json(text), Err(SceneError::InvalidDocument(_))));
    }

    #[test]
    fn loader_rejects_out_of_bounds_and_duplicate_ids() {
        let oob = r#"{"table":{"width":1.2,"depth":0.8},"objects":[
            {"id":"obj_0","category":"can","width":0.1,"depth":0.1,"x":0.01,"y":0.5}]}"#;
        assert!(SceneState::from_json(oob).is_err());
        let dup = r#"{"table":{"width":1.2,"depth":0.8},"objects":[
            {"id":"obj_0","category":"can","width":0.1,"depth":0.1,"x":0.2,"y":0.5},
            {"id":"obj_0","category":"can","width":0.1,"depth":0.1,"x":0.8,"y":0.5}]}"#;
        assert!(SceneState::from_json(dup).is_err());
    }

    #[test]
    fn loader_rejects_malformed_json() {
        assert!(SceneState::from_json("{not json").is_err());
    }
}

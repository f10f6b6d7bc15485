//! Grid rendering of scenes.
//!
//! [`rasterize`] produces the three-channel cell image the scorer consumes:
//! occupancy, instance ids and category ids, each encoded as values in [0, 1].
//! [`to_ppm`] renders a scene as a binary PPM for human inspection.
//!
//! Rasterization is canonical: objects are processed in ascending id order and
//! category indices are assigned by first appearance in that order, so scenes
//! that are equal up to placement-list order produce identical images.

use crate::scene::{object_index, SceneState};

/// Raster width in cells.
pub const WIDTH: usize = 96;
/// Raster height in cells.
pub const HEIGHT: usize = 64;
/// Number of channels: occupancy, instance id, category id.
pub const CHANNELS: usize = 3;
/// Largest supported `obj_<k>` instance index.
pub const MAX_INSTANCE_INDEX: u32 = 63;
/// Largest supported number of distinct categories.
pub const MAX_CATEGORIES: usize = 16;

const CELLS: usize = WIDTH * HEIGHT;

/// Errors from rendering a scene.
#[derive(Debug, thiserror::Error, PartialEq)]
pub enum RasterError {
    #[error("capacity exceeded: {0}")]
    CapacityExceeded(String),
}

/// A `CHANNELS x HEIGHT x WIDTH` grid image with values in [0, 1],
/// row-major within each channel.
#[derive(Debug, Clone, PartialEq)]
pub struct RasterImage {
    data: Vec<f64>,
}

impl RasterImage {
    fn zeros() -> Self {
        Self { data: vec![0.0; CHANNELS * CELLS] }
    }

    #[inline]
    pub fn at(&self, channel: usize, row: usize, col: usize) -> f64 {
        self.data[channel * CELLS + row * WIDTH + col]
    }

    #[inline]
    fn at_mut(&mut self, channel: usize, row: usize, col: usize) -> &mut f64 {
        &mut self.data[channel * CELLS + row * WIDTH + col]
    }

    /// One channel as a row-major slice of `HEIGHT * WIDTH` values.
    pub fn channel(&self, channel: usize) -> &[f64] {
        &self.data[channel * CELLS..(channel + 1) * CELLS]
    }

    /// All channels as one flat slice (channel-major).
    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Placements sorted by ascending instance index; the canonical processing
/// order for everything derived from a scene.
fn canonical_order(scene: &SceneState) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scene.placements().len()).collect();
    order.sort_by_key(|&i| object_index(&scene.placements()[i].object.id));
    order
}

/// Category index per placement, assigned by first appearance in canonical
/// order. Errors when the scene uses more than [`MAX_CATEGORIES`] categories.
fn category_indices(scene: &SceneState, order: &[usize]) -> Result<Vec<usize>, RasterError> {
    let placements = scene.placements();
    let mut names: Vec<&str> = Vec::new();
    let mut indices = vec![0usize; placements.len()];
    for &i in order {
        let cat = placements[i].object.category.as_str();
        let idx = match names.iter().position(|&n| n == cat) {
            Some(idx) => idx,
            None => {
                names.push(cat);
                names.len() - 1
            }
        };
        indices[i] = idx;
    }
    if names.len() > MAX_CATEGORIES {
        return Err(RasterError::CapacityExceeded(format!(
            "{} categories exceed the supported {MAX_CATEGORIES}",
            names.len()
        )));
    }
    Ok(indices)
}

/// Render a scene into the scorer's grid image.
///
/// A cell belongs to an object iff the cell-center point lies strictly inside
/// the footprint; scene invariants make the assignment unambiguous.
pub fn rasterize(scene: &SceneState) -> Result<RasterImage, RasterError> {
    let placements = scene.placements();
    if placements.len() > MAX_INSTANCE_INDEX as usize + 1 {
        return Err(RasterError::CapacityExceeded(format!(
            "{} objects exceed the supported {}",
            placements.len(),
            MAX_INSTANCE_INDEX + 1
        )));
    }
    let order = canonical_order(scene);
    let categories = category_indices(scene, &order)?;

    let mut image = RasterImage::zeros();
    let pitch_x = scene.table_width / WIDTH as f64;
    let pitch_y = scene.table_depth / HEIGHT as f64;
    for &i in &order {
        let p = &placements[i];
        let k = object_index(&p.object.id).expect("scene ids validated");
        if k > MAX_INSTANCE_INDEX {
            return Err(RasterError::CapacityExceeded(format!(
                "instance index {k} exceeds the supported {MAX_INSTANCE_INDEX}"
            )));
        }
        let instance_value = f64::from(k + 1) / f64::from(MAX_INSTANCE_INDEX + 1);
        let category_value = (categories[i] + 1) as f64 / MAX_CATEGORIES as f64;
        let (x0, x1) = (p.x - p.object.width / 2.0, p.x + p.object.width / 2.0);
        let (y0, y1) = (p.y - p.object.depth / 2.0, p.y + p.object.depth / 2.0);
        for row in cell_range(y0, y1, pitch_y, HEIGHT) {
            let cy = (row as f64 + 0.5) * pitch_y;
            if !(cy > y0 && cy < y1) {
                continue;
            }
            for col in cell_range(x0, x1, pitch_x, WIDTH) {
                let cx = (col as f64 + 0.5) * pitch_x;
                if cx > x0 && cx < x1 {
                    *image.at_mut(0, row, col) = 1.0;
                    *image.at_mut(1, row, col) = instance_value;
                    *image.at_mut(2, row, col) = category_value;
                }
            }
        }
    }
    Ok(image)
}

/// Indices whose cell centers could fall in `(lo, hi)`, clamped to the grid.
fn cell_range(lo: f64, hi: f64, pitch: f64, cells: usize) -> std::ops::Range<usize> {
    let first = ((lo / pitch - 0.5).floor().max(0.0)) as usize;
    let last = ((hi / pitch + 0.5).ceil().min(cells as f64)) as usize;
    first..last.max(first)
}

/// PPM render width in pixels.
pub const PPM_WIDTH: usize = 384;
/// PPM render height in pixels.
pub const PPM_HEIGHT: usize = 256;

/// Fill colors by category index; chosen for contrast on white.
const PALETTE: [[u8; 3]; MAX_CATEGORIES] = [
    [204, 72, 63],
    [66, 133, 244],
    [52, 168, 83],
    [244, 180, 0],
    [146, 86, 216],
    [0, 172, 193],
    [230, 124, 33],
    [171, 71, 188],
    [120, 144, 156],
    [194, 24, 91],
    [67, 160, 71],
    [93, 109, 126],
    [255, 112, 67],
    [38, 166, 154],
    [121, 85, 72],
    [63, 81, 181],
];

/// Render a scene as a binary PPM (P6): white background, objects filled with
/// their category color and outlined in black. Byte-deterministic.
pub fn to_ppm(scene: &SceneState) -> Result<Vec<u8>, RasterError> {
    let order = canonical_order(scene);
    let categories = category_indices(scene, &order)?;
    let placements = scene.placements();

    let mut pixels = vec![255u8; PPM_WIDTH * PPM_HEIGHT * 3];
    let pitch_x = scene.table_width / PPM_WIDTH as f64;
    let pitch_y = scene.table_depth / PPM_HEIGHT as f64;
    for &i in &order {
        let p = &placements[i];
        let color = PALETTE[categories[i] % MAX_CATEGORIES];
        let (x0, x1) = (p.x - p.object.width / 2.0, p.x + p.object.width / 2.0);
        let (y0, y1) = (p.y - p.object.depth / 2.0, p.y + p.object.depth / 2.0);
        let rows: Vec<usize> = cell_range(y0, y1, pitch_y, PPM_HEIGHT)
            .filter(|&r| {
                let cy = (r as f64 + 0.5) * pitch_y;
                cy > y0 && cy < y1
            })
            .collect();
        let cols: Vec<usize> = cell_range(x0, x1, pitch_x, PPM_WIDTH)
            .filter(|&c| {
                let cx = (c as f64 + 0.5) * pitch_x;
                cx > x0 && cx < x1
            })
            .collect();
        let (Some(&rmin), Some(&rmax)) = (rows.first(), rows.last()) else { continue };
        let (Some(&cmin), Some(&cmax)) = (cols.first(), cols.last()) else { continue };
        for &r in &rows {
            for &c in &cols {
                let border = r == rmin || r == rmax || c == cmin || c == cmax;
                let rgb = if border { [0, 0, 0] } else { color };
                let base = (r * PPM_WIDTH + c) * 3;
                pixels[base..base + 3].copy_from_slice(&rgb);
            }
        }
    }

    let mut out = format!("P6\n{PPM_WIDTH} {PPM_HEIGHT}\n255\n").into_bytes();
    out.extend_from_slice(&pixels);
    Ok(out)
}

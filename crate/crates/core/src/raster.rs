//! Placement model and z-ordered rasterization onto the square canvas.
//!
//! Canvas pixel `(px, py)` is sampled at its center `(px + 0.5, py + 0.5)`.
//! The point is rotated by `-theta` about the placement center into the
//! image frame; the image claims the pixel when the result falls in the
//! half-open rectangle `[-w/2, w/2) x [-h/2, h/2)`. Positive `theta` turns the
//! image clockwise on screen (y grows downward).

use std::cmp::Ordering;

use crate::error::{CollageError, Result};
use crate::saliency::SaliencyMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct ImageDims {
    pub width: usize,
    pub height: usize,
}

impl ImageDims {
    pub fn new(width: usize, height: usize) -> Self {
        Self { width, height }
    }

    pub fn area(&self) -> usize {
        self.width * self.height
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Canvas {
    side: usize,
}

impl Canvas {
    pub fn new(side: usize) -> Result<Self> {
        if side == 0 {
            return Err(CollageError::invalid("canvas side must be >= 1"));
        }
        Ok(Self { side })
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn pixel_count(&self) -> usize {
        self.side * self.side
    }
}

/// Square canvas whose area is `area_ratio` times the summed image area,
/// rounded down: `side = floor(sqrt(area_ratio * sum(w * h)))`, at least 1.
pub fn canvas_for(images: &[ImageDims], area_ratio: f64) -> Result<Canvas> {
    if images.is_empty() {
        return Err(CollageError::invalid(
            "cannot size a canvas for zero images",
        ));
    }
    if !(area_ratio > 0.0 && area_ratio.is_finite()) {
        return Err(CollageError::invalid(format!(
            "area ratio must be > 0, got {area_ratio}"
        )));
    }
    let target = area_ratio * images.iter().map(|d| d.area() as f64).sum::<f64>();
    let mut side = target.sqrt().floor() as usize;
    // guard the float sqrt against off-by-one at perfect squares
    while ((side + 1) * (side + 1)) as f64 <= target {
        side += 1;
    }
    while side > 0 && (side * side) as f64 > target {
        side -= 1;
    }
    Canvas::new(side.max(1))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Placement {
    pub image_id: usize,
    pub cx: f64,
    pub cy: f64,
    /// Rotation in radians.
    pub theta: f64,
    /// Stacking key in `[0, 1]`; larger is nearer the viewer.
    pub layer_key: f64,
}

impl Placement {
    /// Canvas point `(x, y)` expressed in the image frame, with the image's
    /// top-left corner at the origin.
    #[inline]
    pub fn to_image_frame(&self, dims: ImageDims, x: f64, y: f64) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        let dx = x - self.cx;
        let dy = y - self.cy;
        let u = c * dx + s * dy;
        let v = -s * dx + c * dy;
        (u + dims.width as f64 / 2.0, v + dims.height as f64 / 2.0)
    }

    /// Nearest source pixel for the canvas pixel `(px, py)`, if covered.
    #[inline]
    pub fn source_pixel(&self, dims: ImageDims, px: usize, py: usize) -> Option<(u32, u32)> {
        let (u, v) = self.to_image_frame(dims, px as f64 + 0.5, py as f64 + 0.5);
        let (w, h) = (dims.width as f64, dims.height as f64);
        if (0.0..w).contains(&u) && (0.0..h).contains(&v) {
            let sx = (u.floor() as usize).min(dims.width - 1);
            let sy = (v.floor() as usize).min(dims.height - 1);
            Some((sx as u32, sy as u32))
        } else {
            None
        }
    }

    /// Conservative canvas-space bounding box `[x0, x1) x [y0, y1)`.
    fn pixel_bounds(&self, dims: ImageDims, side: usize) -> (usize, usize, usize, usize) {
        let (s, c) = self.theta.sin_cos();
        let hw = dims.width as f64 / 2.0;
        let hh = dims.height as f64 / 2.0;
        let ex = c.abs() * hw + s.abs() * hh + 1.0;
        let ey = s.abs() * hw + c.abs() * hh + 1.0;
        let clip = |v: f64| v.floor().clamp(0.0, side as f64) as usize;
        (
            clip(self.cx - ex),
            clip(self.cx + ex + 1.0),
            clip(self.cy - ey),
            clip(self.cy + ey + 1.0),
        )
    }
}

/// Top-to-bottom drawing order: larger layer key first, ties to lower id.
pub fn stacking_order(layout: &[Placement]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..layout.len()).collect();
    order.sort_by(|&a, &b| {
        let (pa, pb) = (&layout[a], &layout[b]);
        pb.layer_key
            .partial_cmp(&pa.layer_key)
            .unwrap_or(Ordering::Equal)
            .then(pa.image_id.cmp(&pb.image_id))
    });
    order
}

/// Per-pixel owner of the canvas after z-ordered composition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VisibilityRaster {
    side: usize,
    owner: Vec<Option<u32>>,
    source: Vec<(u32, u32)>,
}

impl VisibilityRaster {
    pub fn side(&self) -> usize {
        self.side
    }

    pub fn owners(&self) -> &[Option<u32>] {
        &self.owner
    }

    #[inline]
    pub fn owner(&self, x: usize, y: usize) -> Option<usize> {
        self.owner[y * self.side + x].map(|id| id as usize)
    }

    /// Source-image coordinates for an owned pixel.
    #[inline]
    pub fn source(&self, x: usize, y: usize) -> Option<(usize, usize)> {
        let i = y * self.side + x;
        self.owner[i].map(|_| (self.source[i].0 as usize, self.source[i].1 as usize))
    }

    pub fn blank_count(&self) -> usize {
        self.owner.iter().filter(|o| o.is_none()).count()
    }

    pub fn owned_counts(&self, image_count: usize) -> Vec<usize> {
        let mut counts = vec![0; image_count];
        for id in self.owner.iter().flatten() {
            counts[*id as usize] += 1;
        }
        counts
    }
}

/// Rasterizes `layout`; `dims[image_id]` gives each referenced image's size.
///
/// Panics if a placement references an image id outside `dims`.
pub fn rasterize(layout: &[Placement], canvas: Canvas, dims: &[ImageDims]) -> VisibilityRaster {
    let side = canvas.side();
    let mut owner = vec![None; side * side];
    let mut source = vec![(0u32, 0u32); side * side];

    // Painter's order reversed: walk from the top layer down and let the
    // first image to cover a pixel keep it.
    for idx in stacking_order(layout) {
        let p = &layout[idx];
        let d = dims[p.image_id];
        let (x0, x1, y0, y1) = p.pixel_bounds(d, side);
        for py in y0..y1 {
            for px in x0..x1 {
                let i = py * side + px;
                if owner[i].is_some() {
                    continue;
                }
                if let Some(src) = p.source_pixel(d, px, py) {
                    owner[i] = Some(p.image_id as u32);
                    source[i] = src;
                }
            }
        }
    }
    VisibilityRaster {
        side,
        owner,
        source,
    }
}

/// Saliency summed over the pixels each image owns.
pub fn visible_mass(raster: &VisibilityRaster, saliency: &[SaliencyMap]) -> Vec<f64> {
    let mut mass = vec![0.0; saliency.len()];
    for (o, &(sx, sy)) in raster.owner.iter().zip(&raster.source) {
        if let Some(id) = o {
            let id = *id as usize;
            mass[id] += saliency[id].get(sx as usize, sy as usize);
        }
    }
    mass
}

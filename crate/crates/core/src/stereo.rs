//! Dense disparity for rectified stereo pairs.
//!
//! Each scanline is labelled independently by a Potts-smoothed dynamic
//! program: the row `d[0..width)` minimizes
//!
//! ```text
//! sum_x cost(x, y, d_x) + P * #{x : d_x != d_(x-1)}
//! ```
//!
//! where `cost` is the window-averaged absolute luminance difference between
//! the left image at `(x, y)` and the right image at `(x - d, y)`. Ties are
//! resolved toward smaller disparities.
//!
//! The DP runs on raw window sums (the objective scaled by `window²`), which
//! are integers, so the optimum is found exactly whenever `P * window²` is
//! exactly representable.

use rayon::prelude::*;

use crate::error::{CollageError, Result};
use crate::imaging::GrayImage;

/// A rectified left/right pair of equal size.
#[derive(Clone, Debug)]
pub struct StereoPair {
    left: GrayImage,
    right: GrayImage,
}

impl StereoPair {
    pub fn new(left: GrayImage, right: GrayImage) -> Result<Self> {
        if left.width() != right.width() || left.height() != right.height() {
            return Err(CollageError::invalid(format!(
                "stereo pair size mismatch: left {}x{}, right {}x{}",
                left.width(),
                left.height(),
                right.width(),
                right.height()
            )));
        }
        Ok(Self { left, right })
    }

    pub fn left(&self) -> &GrayImage {
        &self.left
    }

    pub fn right(&self) -> &GrayImage {
        &self.right
    }

    pub fn width(&self) -> usize {
        self.left.width()
    }

    pub fn height(&self) -> usize {
        self.left.height()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StereoParams {
    pub d_max: u32,
    /// Odd side length of the square matching window.
    pub window: u32,
    /// Potts penalty charged per disparity jump, in cost units.
    pub smoothness: f64,
}

impl StereoParams {
    pub const DEFAULT_WINDOW: u32 = 5;
    pub const DEFAULT_SMOOTHNESS: f64 = 20.0;

    /// Defaults scaled to the image width: `d_max = max(width / 8, 1)`.
    pub fn for_width(width: usize) -> Self {
        Self {
            d_max: ((width / 8) as u32).max(1),
            window: Self::DEFAULT_WINDOW,
            smoothness: Self::DEFAULT_SMOOTHNESS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.window == 0 || self.window.is_multiple_of(2) {
            return Err(CollageError::invalid(format!(
                "matching window must be odd and >= 1, got {}",
                self.window
            )));
        }
        if !(self.smoothness >= 0.0 && self.smoothness.is_finite()) {
            return Err(CollageError::invalid(format!(
                "smoothness penalty must be finite and >= 0, got {}",
                self.smoothness
            )));
        }
        Ok(())
    }

    fn labels(&self) -> usize {
        self.d_max as usize + 1
    }
}

/// Per-pixel integer disparities in `[0, d_max]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DisparityMap {
    width: usize,
    height: usize,
    d_max: u32,
    data: Vec<u32>,
}

impl DisparityMap {
    pub fn new(width: usize, height: usize, d_max: u32, data: Vec<u32>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(CollageError::invalid(format!(
                "disparity map {width}x{height} cannot hold {} values",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|&&d| d > d_max) {
            return Err(CollageError::invalid(format!(
                "disparity {bad} exceeds d_max {d_max}"
            )));
        }
        Ok(Self {
            width,
            height,
            d_max,
            data,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn d_max(&self) -> u32 {
        self.d_max
    }

    pub fn data(&self) -> &[u32] {
        &self.data
    }

    pub fn get(&self, x: usize, y: usize) -> u32 {
        self.data[y * self.width + x]
    }

    pub fn row(&self, y: usize) -> &[u32] {
        &self.data[y * self.width..(y + 1) * self.width]
    }

    /// Disparities scaled so that `d_max` maps to 255.
    pub fn to_gray(&self) -> GrayImage {
        let scale = if self.d_max == 0 {
            0.0
        } else {
            255.0 / f64::from(self.d_max)
        };
        let data = self
            .data
            .iter()
            .map(|&d| (f64::from(d) * scale).round() as u8)
            .collect();
        GrayImage::new(self.width, self.height, data).expect("dimensions already validated")
    }
}

/// Window-averaged absolute difference between left `(x, y)` and right
/// `(x - d, y)`. Every sample is clamped to the image, so the result is
/// always in `[0, 255]`.
pub fn match_cost(pair: &StereoPair, x: usize, y: usize, d: u32, window: u32) -> f64 {
    let r = (window / 2) as isize;
    let (x, y, d) = (x as isize, y as isize, d as isize);
    let mut sum = 0u32;
    for dy in -r..=r {
        for dx in -r..=r {
            let l = pair.left.get_clamped(x + dx, y + dy);
            let rr = pair.right.get_clamped(x + dx - d, y + dy);
            sum += u32::from(l.abs_diff(rr));
        }
    }
    f64::from(sum) / f64::from(window * window)
}

/// Raw window sums for every `(x, d)` in row `y`, laid out `x * labels + d`.
fn raw_row_costs(pair: &StereoPair, y: usize, params: &StereoParams) -> Vec<f64> {
    let width = pair.width();
    let labels = params.labels();
    let r = (params.window / 2) as isize;
    let w = width as isize;
    let rows: Vec<isize> = (-r..=r).map(|dy| y as isize + dy).collect();

    // Column sums over the vertical window, indexed by the unclamped column
    // u in [-r, width - 1 + r]; the left sample sits at clamp(u), the right
    // one at clamp(u - d).
    let span = width + 2 * r as usize;
    let mut prefix = vec![0u32; span + 1];
    let mut costs = vec![0.0; width * labels];
    for d in 0..labels {
        for (k, u) in (-r..w + r).enumerate() {
            let col: u32 = rows
                .iter()
                .map(|&yy| {
                    let l = pair.left.get_clamped(u, yy);
                    let rr = pair.right.get_clamped(u - d as isize, yy);
                    u32::from(l.abs_diff(rr))
                })
                .sum();
            prefix[k + 1] = prefix[k] + col;
        }
        let win = params.window as usize;
        for x in 0..width {
            // window for x covers u in [x - r, x + r] -> k in [x, x + 2r]
            costs[x * labels + d] = f64::from(prefix[x + win] - prefix[x]);
        }
    }
    costs
}

/// Smallest index attaining the minimum, skipping `skip`.
fn argmin_skipping(values: &[f64], skip: Option<usize>) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &v) in values.iter().enumerate() {
        if Some(i) == skip {
            continue;
        }
        if best.is_none_or(|(_, b)| v < b) {
            best = Some((i, v));
        }
    }
    best
}

/// Optimal disparity labels for one scanline.
pub fn disparity_scanline(pair: &StereoPair, y: usize, params: &StereoParams) -> Vec<u32> {
    let width = pair.width();
    let labels = params.labels();
    let costs = raw_row_costs(pair, y, params);
    let penalty = params.smoothness * f64::from(params.window * params.window);

    let mut prev: Vec<f64> = costs[..labels].to_vec();
    let mut cur = vec![0.0; labels];
    let mut back = vec![0u32; width * labels];

    for x in 1..width {
        let (i1, m1) = argmin_skipping(&prev, None).expect("at least one label");
        let other = argmin_skipping(&prev, Some(i1));
        for d in 0..labels {
            // cheapest predecessor with a different label
            let (j, jump) = if d != i1 {
                (i1, m1 + penalty)
            } else {
                match other {
                    Some((j, m)) => (j, m + penalty),
                    None => (d, f64::INFINITY),
                }
            };
            let stay = prev[d];
            let (from, best) = if stay < jump || (stay == jump && d < j) {
                (d, stay)
            } else {
                (j, jump)
            };
            back[x * labels + d] = from as u32;
            cur[d] = best + costs[x * labels + d];
        }
        std::mem::swap(&mut prev, &mut cur);
    }

    let mut row = vec![0u32; width];
    let (mut d, _) = argmin_skipping(&prev, None).expect("at least one label");
    for x in (0..width).rev() {
        row[x] = d as u32;
        d = back[x * labels + d] as usize;
    }
    row
}

/// Objective value of a label row, in cost units.
pub fn scanline_objective(pair: &StereoPair, y: usize, params: &StereoParams, row: &[u32]) -> f64 {
    let data: f64 = row
        .iter()
        .enumerate()
        .map(|(x, &d)| match_cost(pair, x, y, d, params.window))
        .sum();
    let jumps = row.windows(2).filter(|w| w[0] != w[1]).count();
    data + params.smoothness * jumps as f64
}

/// Runs the scanline DP on every row. Rows are independent and evaluated in
/// parallel; the result does not depend on scheduling.
pub fn compute_disparity(pair: &StereoPair, params: &StereoParams) -> Result<DisparityMap> {
    params.validate()?;
    let rows: Vec<Vec<u32>> = (0..pair.height())
        .into_par_iter()
        .map(|y| disparity_scanline(pair, y, params))
        .collect();
    DisparityMap::new(pair.width(), pair.height(), params.d_max, rows.concat())
}

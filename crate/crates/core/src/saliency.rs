//! Per-image importance maps.
//!
//! Stereo inputs use disparity (near means important); mono inputs fall back
//! to block contrast. Both paths end in the same min-max normalization, and a
//! flat field normalizes to all ones so that every image keeps a positive
//! total weight.

use crate::error::{CollageError, Result};
use crate::imaging::GrayImage;
use crate::stereo::DisparityMap;

pub const DEFAULT_MEDIAN_RADIUS: usize = 1;
pub const DEFAULT_CONTRAST_BLOCK: usize = 16;

/// Row-major weights in `[0, 1]` with a cached sum.
#[derive(Clone, Debug, PartialEq)]
pub struct SaliencyMap {
    width: usize,
    height: usize,
    data: Vec<f64>,
    total: f64,
}

impl SaliencyMap {
    pub fn new(width: usize, height: usize, data: Vec<f64>) -> Result<Self> {
        if width == 0 || height == 0 || data.len() != width * height {
            return Err(CollageError::invalid(format!(
                "saliency map {width}x{height} cannot hold {} weights",
                data.len()
            )));
        }
        if let Some(bad) = data.iter().find(|w| !(0.0..=1.0).contains(*w)) {
            return Err(CollageError::invalid(format!(
                "saliency weight {bad} outside [0, 1]"
            )));
        }
        let total = data.iter().sum();
        Ok(Self {
            width,
            height,
            data,
            total,
        })
    }

    pub fn uniform(width: usize, height: usize, weight: f64) -> Result<Self> {
        Self::new(width, height, vec![weight; width * height])
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.data[y * self.width + x]
    }

    /// 8-bit export: `round(weight * 255)`.
    pub fn to_gray(&self) -> GrayImage {
        let data = self
            .data
            .iter()
            .map(|w| (w * 255.0).round() as u8)
            .collect();
        GrayImage::new(self.width, self.height, data).expect("dimensions already validated")
    }
}

fn normalize_min_max(width: usize, height: usize, values: &[f64]) -> SaliencyMap {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    let data = if hi > lo {
        let span = hi - lo;
        values
            .iter()
            .map(|v| ((v - lo) / span).clamp(0.0, 1.0))
            .collect()
    } else {
        vec![1.0; values.len()]
    };
    SaliencyMap::new(width, height, data).expect("normalized weights are valid")
}

/// Square median filter with clamp-to-edge borders. Radius 0 copies.
pub fn median_filter(disp: &DisparityMap, radius: usize) -> Vec<u32> {
    if radius == 0 {
        return disp.data().to_vec();
    }
    let (w, h) = (disp.width() as isize, disp.height() as isize);
    let r = radius as isize;
    let mut window = Vec::with_capacity((2 * radius + 1).pow(2));
    let mut out = Vec::with_capacity(disp.data().len());
    for y in 0..h {
        for x in 0..w {
            window.clear();
            for dy in -r..=r {
                for dx in -r..=r {
                    let xx = (x + dx).clamp(0, w - 1) as usize;
                    let yy = (y + dy).clamp(0, h - 1) as usize;
                    window.push(disp.get(xx, yy));
                }
            }
            let mid = window.len() / 2;
            out.push(*window.select_nth_unstable(mid).1);
        }
    }
    out
}

pub fn depth_to_saliency(disp: &DisparityMap, median_radius: usize) -> SaliencyMap {
    let filtered: Vec<f64> = median_filter(disp, median_radius)
        .into_iter()
        .map(f64::from)
        .collect();
    normalize_min_max(disp.width(), disp.height(), &filtered)
}

/// Block-contrast saliency: each `block`×`block` tile (edge tiles may be
/// smaller) gets the population standard deviation of its luminance.
pub fn contrast_saliency(image: &GrayImage, block: usize) -> Result<SaliencyMap> {
    if block < 2 {
        return Err(CollageError::invalid(format!(
            "contrast block must be >= 2, got {block}"
        )));
    }
    let (w, h) = (image.width(), image.height());
    let tiles_x = w.div_ceil(block);
    let tiles_y = h.div_ceil(block);
    let mut tile_std = vec![0.0; tiles_x * tiles_y];
    for ty in 0..tiles_y {
        for tx in 0..tiles_x {
            let xs = tx * block..((tx + 1) * block).min(w);
            let ys = ty * block..((ty + 1) * block).min(h);
            let n = (xs.len() * ys.len()) as f64;
            let (mut sum, mut sq) = (0.0, 0.0);
            for y in ys.clone() {
                for x in xs.clone() {
                    let v = f64::from(image.get(x, y));
                    sum += v;
                    sq += v * v;
                }
            }
            let mean = sum / n;
            tile_std[ty * tiles_x + tx] = (sq / n - mean * mean).max(0.0).sqrt();
        }
    }
    let per_pixel: Vec<f64> = (0..h)
        .flat_map(|y| (0..w).map(move |x| (x, y)))
        .map(|(x, y)| tile_std[(y / block) * tiles_x + x / block])
        .collect();
    Ok(normalize_min_max(w, h, &per_pixel))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disp(w: usize, h: usize, d_max: u32, v: Vec<u32>) -> DisparityMap {
        DisparityMap::new(w, h, d_max, v).unwrap()
    }

    #[test]
    fn constant_disparity_is_all_ones() {
        let s = depth_to_saliency(&disp(4, 3, 5, vec![3; 12]), 1);
        assert!(s.data().iter().all(|&w| w == 1.0));
        assert_eq!(s.total(), 12.0);
    }

    #[test]
    fn two_value_map_hits_endpoints() {
        let s = depth_to_saliency(&disp(2, 2, 7, vec![0, 7, 7, 0]), 0);
        assert_eq!(s.data(), &[0.0, 1.0, 1.0, 0.0]);
    }

    // Straightforward 3x3 median with explicit clamping and a full sort.
    fn oracle_median3(v: &[u32], w: usize, h: usize) -> Vec<u32> {
        let mut out = vec![];
        for y in 0..h as i64 {
            for x in 0..w as i64 {
                let mut nb = vec![];
                for j in -1..=1i64 {
                    for i in -1..=1i64 {
                        let xx = (x + i).max(0).min(w as i64 - 1) as usize;
                        let yy = (y + j).max(0).min(h as i64 - 1) as usize;
                        nb.push(v[yy * w + xx]);
                    }
                }
                nb.sort();
                out.push(nb[4]);
            }
        }
        out
    }

    #[test]
    fn spike_is_removed_by_median() {
        // ramp 0..4 along x with a spike in the middle
        let mut v: Vec<u32> = (0..25).map(|i| (i % 5) as u32).collect();
        v[12] = 9;
        let expected_median = oracle_median3(&v, 5, 5);
        assert_eq!(expected_median[12], 2);
        assert_eq!(median_filter(&disp(5, 5, 9, v.clone()), 1), expected_median);

        let s = depth_to_saliency(&disp(5, 5, 9, v), 1);
        let lo = *expected_median.iter().min().unwrap() as f64;
        let hi = *expected_median.iter().max().unwrap() as f64;
        for (got, m) in s.data().iter().zip(&expected_median) {
            assert!((got - (*m as f64 - lo) / (hi - lo)).abs() < 1e-15);
        }
        // the spike pixel now sits in the ramp, not at the top
        assert_eq!(s.get(2, 2), 0.5);
    }

    #[test]
    fn contrast_constant_image_is_all_ones() {
        let img = GrayImage::new(8, 8, vec![90; 64]).unwrap();
        let s = contrast_saliency(&img, 4).unwrap();
        assert!(s.data().iter().all(|&w| w == 1.0));
    }

    #[test]
    fn contrast_flat_and_checkerboard_tiles() {
        let img = GrayImage::from_fn(8, 4, |x, y| {
            if x < 4 {
                50
            } else if (x + y) % 2 == 0 {
                0
            } else {
                255
            }
        })
        .unwrap();
        let s = contrast_saliency(&img, 4).unwrap();
        for y in 0..4 {
            for x in 0..8 {
                assert_eq!(s.get(x, y), if x < 4 { 0.0 } else { 1.0 });
            }
        }
    }

    fn oracle_std(vals: &[f64]) -> f64 {
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        (vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt()
    }

    #[test]
    fn contrast_three_tiles_against_variance_oracle() {
        // 5x2 image, block 2: tiles cover columns {0,1}, {2,3}, {4}
        let px: [u8; 10] = [10, 30, 0, 100, 7, 20, 40, 50, 200, 9];
        let img = GrayImage::new(5, 2, px.to_vec()).unwrap();
        let tile = |cols: &[usize]| {
            let v: Vec<f64> = [0, 1]
                .iter()
                .flat_map(|&y| cols.iter().map(move |&x| f64::from(px[y * 5 + x])))
                .collect();
            oracle_std(&v)
        };
        let stds = [tile(&[0, 1]), tile(&[2, 3]), tile(&[4])];
        let lo = stds.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = stds.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let s = contrast_saliency(&img, 2).unwrap();
        for (x, t) in [(0, 0), (1, 0), (2, 1), (3, 1), (4, 2)] {
            let want = (stds[t] - lo) / (hi - lo);
            assert!((s.get(x, 1) - want).abs() < 1e-12, "x={x}");
        }
    }

    #[test]
    fn contrast_rejects_tiny_block() {
        let img = GrayImage::new(2, 2, vec![0; 4]).unwrap();
        assert!(contrast_saliency(&img, 1).is_err());
    }

    #[test]
    fn export_rounds_weights() {
        let s = SaliencyMap::new(3, 1, vec![0.0, 0.5, 1.0]).unwrap();
        assert_eq!(s.to_gray().data(), &[0, 128, 255]);
    }

    #[test]
    fn rejects_out_of_range_weights() {
        assert!(SaliencyMap::new(1, 1, vec![1.5]).is_err());
        assert!(SaliencyMap::new(1, 1, vec![f64::NAN]).is_err());
    }
}

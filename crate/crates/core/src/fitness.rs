//! Three-term layout energy, lower is better.
//!
//! * `a_occ`: fraction of the pooled saliency that is hidden, whether by
//!   occlusion or by falling off the canvas.
//! * `b`: fraction of canvas pixels left blank.
//! * `v`: hidden fraction of the worst-off image, `1 - min_i visible_i / total_i`.

use crate::error::{CollageError, Result};
use crate::raster::{rasterize, visible_mass, Canvas, ImageDims, Placement, VisibilityRaster};
use crate::saliency::SaliencyMap;

const WEIGHT_SUM_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FitnessWeights {
    pub lambda_a: f64,
    pub lambda_b: f64,
    pub lambda_v: f64,
}

impl FitnessWeights {
    pub fn new(lambda_a: f64, lambda_b: f64, lambda_v: f64) -> Result<Self> {
        let w = Self {
            lambda_a,
            lambda_b,
            lambda_v,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.lambda_a, self.lambda_b, self.lambda_v];
        if all.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
            return Err(CollageError::invalid(format!(
                "fitness weights must be >= 0, got {all:?}"
            )));
        }
        let sum: f64 = all.iter().sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOLERANCE {
            return Err(CollageError::invalid(format!(
                "fitness weights must sum to 1, got {sum}"
            )));
        }
        Ok(())
    }

    pub fn combine(&self, a_occ: f64, b: f64, v: f64) -> f64 {
        self.lambda_a * a_occ + self.lambda_b * b + self.lambda_v * v
    }
}

impl Default for FitnessWeights {
    /// 10/30, 9/30, 11/30.
    fn default() -> Self {
        Self {
            lambda_a: 10.0 / 30.0,
            lambda_b: 9.0 / 30.0,
            lambda_v: 11.0 / 30.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FitnessBreakdown {
    pub a_occ: f64,
    pub b: f64,
    pub v: f64,
    pub total: f64,
}

impl FitnessBreakdown {
    pub fn from_components(weights: &FitnessWeights, a_occ: f64, b: f64, v: f64) -> Self {
        Self {
            a_occ,
            b,
            v,
            total: weights.combine(a_occ, b, v),
        }
    }
}

/// Validated view over one collage problem; evaluating a layout only needs
/// the placements afterwards.
#[derive(Clone, Copy, Debug)]
pub struct Evaluator<'a> {
    canvas: Canvas,
    dims: &'a [ImageDims],
    saliency: &'a [SaliencyMap],
    weights: FitnessWeights,
    global_total: f64,
}

impl<'a> Evaluator<'a> {
    pub fn new(
        canvas: Canvas,
        dims: &'a [ImageDims],
        saliency: &'a [SaliencyMap],
        weights: FitnessWeights,
    ) -> Result<Self> {
        weights.validate()?;
        if dims.is_empty() {
            return Err(CollageError::invalid("no images to evaluate"));
        }
        if dims.len() != saliency.len() {
            return Err(CollageError::invalid(format!(
                "{} images but {} saliency maps",
                dims.len(),
                saliency.len()
            )));
        }
        for (i, (d, s)) in dims.iter().zip(saliency).enumerate() {
            if d.width != s.width() || d.height != s.height() {
                return Err(CollageError::invalid(format!(
                    "image {i} is {}x{} but its saliency map is {}x{}",
                    d.width,
                    d.height,
                    s.width(),
                    s.height()
                )));
            }
            if s.total() <= 0.0 || s.total().is_nan() {
                return Err(CollageError::invalid(format!(
                    "image {i} has zero total saliency"
                )));
            }
        }
        let global_total = saliency.iter().map(SaliencyMap::total).sum();
        Ok(Self {
            canvas,
            dims,
            saliency,
            weights,
            global_total,
        })
    }

    pub fn canvas(&self) -> Canvas {
        self.canvas
    }

    pub fn dims(&self) -> &'a [ImageDims] {
        self.dims
    }

    pub fn weights(&self) -> FitnessWeights {
        self.weights
    }

    pub fn image_count(&self) -> usize {
        self.dims.len()
    }

    fn check_layout(&self, layout: &[Placement]) -> Result<()> {
        match layout.iter().find(|p| p.image_id >= self.dims.len()) {
            Some(p) => Err(CollageError::invalid(format!(
                "placement references image {} of {}",
                p.image_id,
                self.dims.len()
            ))),
            None => Ok(()),
        }
    }

    pub fn evaluate(&self, layout: &[Placement]) -> Result<FitnessBreakdown> {
        self.check_layout(layout)?;
        let raster = rasterize(layout, self.canvas, self.dims);
        Ok(self.score(&raster))
    }

    /// Scores an already rasterized layout.
    pub fn score(&self, raster: &VisibilityRaster) -> FitnessBreakdown {
        let mass = visible_mass(raster, self.saliency);
        let visible: f64 = mass.iter().sum();
        let a_occ = (1.0 - visible / self.global_total).clamp(0.0, 1.0);
        let b = raster.blank_count() as f64 / self.canvas.pixel_count() as f64;
        let worst = mass
            .iter()
            .zip(self.saliency)
            .map(|(m, s)| m / s.total())
            .fold(f64::INFINITY, f64::min);
        let v = (1.0 - worst).clamp(0.0, 1.0);
        FitnessBreakdown::from_components(&self.weights, a_occ, b, v)
    }
}

/// One-shot evaluation; see [`Evaluator`] for repeated use.
pub fn evaluate(
    layout: &[Placement],
    canvas: Canvas,
    dims: &[ImageDims],
    saliency: &[SaliencyMap],
    weights: FitnessWeights,
) -> Result<FitnessBreakdown> {
    Evaluator::new(canvas, dims, saliency, weights)?.evaluate(layout)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn place(id: usize, cx: f64, cy: f64, theta: f64, k: f64) -> Placement {
        Placement {
            image_id: id,
            cx,
            cy,
            theta,
            layer_key: k,
        }
    }

    #[test]
    fn default_weights_sum_to_one() {
        FitnessWeights::default().validate().unwrap();
    }

    #[test]
    fn weighted_total_of_fixed_components() {
        let b = FitnessBreakdown::from_components(&FitnessWeights::default(), 0.3, 0.2, 0.4);
        let expected = (10.0 * 0.3 + 9.0 * 0.2 + 11.0 * 0.4) / 30.0;
        assert!((b.total - expected).abs() < 1e-9);
        assert!((b.total - 0.306_666_666_666).abs() < 1e-9);
    }

    #[test]
    fn rejects_weights_not_summing_to_one() {
        assert!(FitnessWeights::new(0.5, 0.5, 0.5).is_err());
        assert!(FitnessWeights::new(-0.1, 0.6, 0.5).is_err());
    }

    #[test]
    fn perfect_cover_is_zero() {
        let canvas = Canvas::new(12).unwrap();
        let dims = [ImageDims::new(12, 12)];
        let sal = [SaliencyMap::uniform(12, 12, 1.0).unwrap()];
        let f = evaluate(
            &[place(0, 6.0, 6.0, 0.0, 0.5)],
            canvas,
            &dims,
            &sal,
            FitnessWeights::default(),
        )
        .unwrap();
        assert_eq!((f.a_occ, f.b, f.v, f.total), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn everything_off_canvas_is_one() {
        let canvas = Canvas::new(10).unwrap();
        let dims = [ImageDims::new(5, 5), ImageDims::new(3, 7)];
        let sal = [
            SaliencyMap::uniform(5, 5, 0.4).unwrap(),
            SaliencyMap::uniform(3, 7, 1.0).unwrap(),
        ];
        let layout = [
            place(0, -40.0, 5.0, 0.0, 0.1),
            place(1, 5.0, 90.0, 0.5, 0.2),
        ];
        let f = evaluate(&layout, canvas, &dims, &sal, FitnessWeights::default()).unwrap();
        assert_eq!((f.a_occ, f.b, f.v), (1.0, 1.0, 1.0));
        assert!((f.total - 1.0).abs() < 1e-15);
    }

    #[test]
    fn fully_occluded_twin() {
        let canvas = Canvas::new(8).unwrap();
        let dims = [ImageDims::new(8, 8); 2];
        let sal = [
            SaliencyMap::uniform(8, 8, 1.0).unwrap(),
            SaliencyMap::uniform(8, 8, 1.0).unwrap(),
        ];
        let layout = [place(0, 4.0, 4.0, 0.0, 0.8), place(1, 4.0, 4.0, 0.0, 0.3)];
        let f = evaluate(&layout, canvas, &dims, &sal, FitnessWeights::default()).unwrap();
        assert_eq!((f.a_occ, f.b, f.v), (0.5, 0.0, 1.0));
    }

    #[test]
    fn zero_saliency_is_rejected() {
        let canvas = Canvas::new(4).unwrap();
        let dims = [ImageDims::new(2, 2)];
        let sal = [SaliencyMap::uniform(2, 2, 0.0).unwrap()];
        let err = evaluate(&[], canvas, &dims, &sal, FitnessWeights::default());
        assert!(matches!(err, Err(CollageError::InvalidInput(_))));
    }

    #[test]
    fn unknown_image_id_is_rejected() {
        let canvas = Canvas::new(4).unwrap();
        let dims = [ImageDims::new(2, 2)];
        let sal = [SaliencyMap::uniform(2, 2, 1.0).unwrap()];
        let err = evaluate(
            &[place(3, 0.0, 0.0, 0.0, 0.0)],
            canvas,
            &dims,
            &sal,
            FitnessWeights::default(),
        );
        assert!(err.is_err());
    }
}

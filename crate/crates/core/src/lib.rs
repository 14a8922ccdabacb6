//! Picture collages from stereo pairs.
//!
//! Disparity from a scanline dynamic program marks the near, and therefore
//! important, parts of each image. A real-coded genetic algorithm then
//! places, rotates and stacks the images on a square canvas to keep as much
//! of that saliency visible as possible while leaving little blank canvas
//! and never burying any single image.

pub mod error;
pub mod fitness;
pub mod ga;
pub mod imaging;
pub mod output;
pub mod pipeline;
pub mod raster;
pub mod render;
pub mod saliency;
pub mod stereo;

pub use error::{CollageError, Result};
pub use fitness::{evaluate, Evaluator, FitnessBreakdown, FitnessWeights};
pub use ga::{decode, FitnessTrace, GaConfig, GaOutcome, LayoutGenome};
pub use imaging::{to_gray, GrayImage, RgbImage};
pub use pipeline::{run_job, run_saliency_job, JobConfig, JobError, JobReport, Stage};
pub use raster::{
    canvas_for, rasterize, visible_mass, Canvas, ImageDims, Placement, VisibilityRaster,
};
pub use saliency::{contrast_saliency, depth_to_saliency, SaliencyMap};
pub use stereo::{
    compute_disparity, disparity_scanline, match_cost, DisparityMap, StereoPair, StereoParams,
};

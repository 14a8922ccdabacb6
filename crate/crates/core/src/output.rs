//! On-disk formats: `trace.csv` and `layout.json`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{CollageError, Result};
use crate::fitness::FitnessBreakdown;
use crate::ga::FitnessTrace;
use crate::raster::{Canvas, Placement};

pub const TRACE_HEADER: &str = "generation,best_total,mean_total,a_occ,b,v";

/// CSV trace, one row per generation numbered from 1, six fractional digits.
pub fn format_trace(trace: &FitnessTrace) -> String {
    let mut out = String::with_capacity(64 * (trace.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for (i, g) in trace.generations.iter().enumerate() {
        writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6},{:.6}",
            i + 1,
            g.best_total,
            g.mean_total,
            g.best.a_occ,
            g.best.b,
            g.best.v
        )
        .expect("writing to a String cannot fail");
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacementRecord {
    pub file: String,
    pub cx: f64,
    pub cy: f64,
    pub theta_degrees: f64,
    pub layer_key: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LayoutFile {
    pub canvas_side: usize,
    /// One record per input image, in image-id order.
    pub placements: Vec<PlacementRecord>,
    /// Score of the stored layout; absent in hand-written files.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fitness: Option<FitnessBreakdown>,
}

impl LayoutFile {
    /// `layout` must hold exactly one placement per image, `files[image_id]`
    /// naming its source.
    pub fn new(
        canvas: Canvas,
        layout: &[Placement],
        files: &[String],
        fitness: Option<FitnessBreakdown>,
    ) -> Self {
        let mut sorted: Vec<&Placement> = layout.iter().collect();
        sorted.sort_by_key(|p| p.image_id);
        let placements = sorted
            .into_iter()
            .map(|p| PlacementRecord {
                file: files[p.image_id].clone(),
                cx: p.cx,
                cy: p.cy,
                theta_degrees: p.theta.to_degrees(),
                layer_key: p.layer_key,
            })
            .collect();
        Self {
            canvas_side: canvas.side(),
            placements,
            fitness,
        }
    }

    pub fn canvas(&self) -> Result<Canvas> {
        Canvas::new(self.canvas_side)
    }

    /// Placements with image ids taken from record order.
    pub fn to_placements(&self) -> Vec<Placement> {
        self.placements
            .iter()
            .enumerate()
            .map(|(image_id, r)| Placement {
                image_id,
                cx: r.cx,
                cy: r.cy,
                theta: r.theta_degrees.to_radians(),
                layer_key: r.layer_key,
            })
            .collect()
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("layout is always serializable");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| CollageError::Format(format!("layout.json: {e}")))
    }
}

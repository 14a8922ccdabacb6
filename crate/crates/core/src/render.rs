//! Presentation rasters: the composited collage and the canvas-usage map.

use crate::imaging::RgbImage;
use crate::raster::{rasterize, Canvas, Placement, VisibilityRaster};
use crate::saliency::SaliencyMap;

pub const DEFAULT_BACKGROUND: [u8; 3] = [128, 128, 128];

/// Flat colors for the usage map, cycled by image id.
pub const USAGE_PALETTE: [[u8; 3]; 16] = [
    [230, 25, 75],
    [60, 180, 75],
    [255, 225, 25],
    [0, 130, 200],
    [245, 130, 48],
    [145, 30, 180],
    [70, 240, 240],
    [240, 50, 230],
    [210, 245, 60],
    [250, 190, 212],
    [0, 128, 128],
    [220, 190, 255],
    [170, 110, 40],
    [255, 250, 200],
    [128, 0, 0],
    [170, 255, 195],
];

const MIN_BRIGHTNESS: f64 = 0.3;

/// Bilinear sample at continuous pixel-center coordinates, clamped to the
/// image. Integer coordinates return the stored pixel exactly.
pub fn sample_bilinear(image: &RgbImage, x: f64, y: f64) -> [u8; 3] {
    let x = x.clamp(0.0, (image.width() - 1) as f64);
    let y = y.clamp(0.0, (image.height() - 1) as f64);
    let x0 = x.floor() as usize;
    let y0 = y.floor() as usize;
    let x1 = (x0 + 1).min(image.width() - 1);
    let y1 = (y0 + 1).min(image.height() - 1);
    let fx = x - x0 as f64;
    let fy = y - y0 as f64;
    let (p00, p10, p01, p11) = (
        image.get(x0, y0),
        image.get(x1, y0),
        image.get(x0, y1),
        image.get(x1, y1),
    );
    let mut out = [0u8; 3];
    for c in 0..3 {
        let top = f64::from(p00[c]) * (1.0 - fx) + f64::from(p10[c]) * fx;
        let bottom = f64::from(p01[c]) * (1.0 - fx) + f64::from(p11[c]) * fx;
        out[c] = (top * (1.0 - fy) + bottom * fy).round().clamp(0.0, 255.0) as u8;
    }
    out
}

/// Composites `layout` onto the canvas. Pixel ownership is exactly that of
/// [`rasterize`]; the color comes from a bilinear sample of the owner.
pub fn render_collage(
    layout: &[Placement],
    canvas: Canvas,
    images: &[RgbImage],
    background: [u8; 3],
) -> RgbImage {
    let dims: Vec<_> = images
        .iter()
        .map(|im| crate::raster::ImageDims::new(im.width(), im.height()))
        .collect();
    let raster = rasterize(layout, canvas, &dims);
    let side = canvas.side();
    let mut out = RgbImage::filled(side, side, background);
    // the top-most placement for each id decides its transform
    let mut by_id: Vec<Option<&Placement>> = vec![None; images.len()];
    for idx in crate::raster::stacking_order(layout).into_iter().rev() {
        by_id[layout[idx].image_id] = Some(&layout[idx]);
    }
    for py in 0..side {
        for px in 0..side {
            let Some(id) = raster.owner(px, py) else {
                continue;
            };
            let p = by_id[id].expect("owner has a placement");
            let (u, v) = p.to_image_frame(dims[id], px as f64 + 0.5, py as f64 + 0.5);
            out.put(px, py, sample_bilinear(&images[id], u - 0.5, v - 0.5));
        }
    }
    out
}

/// Brightness factor for a saliency weight: 0 maps to 30 %, 1 to 100 %.
pub fn usage_brightness(weight: f64) -> f64 {
    MIN_BRIGHTNESS + (1.0 - MIN_BRIGHTNESS) * weight
}

pub fn usage_color(image_id: usize, weight: f64) -> [u8; 3] {
    let base = USAGE_PALETTE[image_id % USAGE_PALETTE.len()];
    let k = usage_brightness(weight);
    base.map(|c| (f64::from(c) * k).round() as u8)
}

/// Canvas-usage diagnostic: palette color per owner, dimmed where the
/// visible saliency is low; blank pixels are black.
pub fn render_usage(raster: &VisibilityRaster, saliency: &[SaliencyMap]) -> RgbImage {
    let side = raster.side();
    RgbImage::from_fn(side, side, |x, y| {
        match (raster.owner(x, y), raster.source(x, y)) {
            (Some(id), Some((sx, sy))) => usage_color(id, saliency[id].get(sx, sy)),
            _ => [0, 0, 0],
        }
    })
}

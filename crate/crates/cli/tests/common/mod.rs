#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn collage_bin() -> PathBuf {
    PathBuf::from(env!("CARGO_BIN_EXE_collage"))
}

pub fn collage(args: &[&str]) -> Output {
    Command::new(collage_bin())
        .args(args)
        .output()
        .expect("collage binary runs")
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 temp path")
}

/// Textured stereo pair: background at disparity 1, a centred square at
/// disparity `near`. The right view shows left content shifted leftwards.
pub fn write_stereo_pair(dir: &Path, name: &str, w: u32, h: u32, near: u32, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let tex: Vec<[u8; 3]> = (0..w * h)
        .map(|_| [rng.random(), rng.random(), rng.random()])
        .collect();
    let left = image::RgbImage::from_fn(w, h, |x, y| image::Rgb(tex[(y * w + x) as usize]));
    let in_square = |x: u32, y: u32| x >= w / 4 && x < 3 * w / 4 && y >= h / 4 && y < 3 * h / 4;
    let right = image::RgbImage::from_fn(w, h, |x, y| {
        let d = if in_square(x, y) { near } else { 1 };
        let sx = (x + d).min(w - 1);
        *left.get_pixel(sx, y)
    });
    left.save(dir.join(format!("{name}_left.png"))).unwrap();
    right.save(dir.join(format!("{name}_right.png"))).unwrap();
}

pub fn write_mono(dir: &Path, file: &str, w: u32, h: u32, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let img = image::RgbImage::from_fn(w, h, |x, y| {
        // busy quadrant in the top-left, flat elsewhere
        if x < w / 2 && y < h / 2 {
            image::Rgb([rng.random(), rng.random(), rng.random()])
        } else {
            image::Rgb([90, 120, 150])
        }
    });
    img.save(dir.join(file)).unwrap();
}

pub fn write_flat(dir: &Path, file: &str, w: u32, h: u32, rgb: [u8; 3]) {
    image::RgbImage::from_pixel(w, h, image::Rgb(rgb))
        .save(dir.join(file))
        .unwrap();
}

pub struct TraceRow {
    pub generation: usize,
    pub best_total: f64,
    pub mean_total: f64,
    pub a_occ: f64,
    pub b: f64,
    pub v: f64,
}

pub fn read_trace(path: &Path) -> Vec<TraceRow> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next(),
        Some("generation,best_total,mean_total,a_occ,b,v")
    );
    lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f.len(), 6, "row {l}");
            for v in &f[1..] {
                assert_eq!(
                    v.split('.').nth(1).map(str::len),
                    Some(6),
                    "six decimals in {l}"
                );
            }
            TraceRow {
                generation: f[0].parse().unwrap(),
                best_total: f[1].parse().unwrap(),
                mean_total: f[2].parse().unwrap(),
                a_occ: f[3].parse().unwrap(),
                b: f[4].parse().unwrap(),
                v: f[5].parse().unwrap(),
            }
        })
        .collect()
}

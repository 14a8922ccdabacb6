//! Python bindings for the collage library.

use pyo3::exceptions::{PyIOError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use collage_core::ga::{self, GaConfig, LayoutGenome};
use collage_core::pipeline::{self, JobConfig};
use collage_core::{
    Canvas, CollageError, DisparityMap, FitnessBreakdown, FitnessWeights, GrayImage, ImageDims,
    Placement, RgbImage, SaliencyMap, StereoPair, StereoParams,
};

fn py_err(e: CollageError) -> PyErr {
    match e {
        CollageError::InvalidInput(msg) => PyValueError::new_err(msg),
        e @ CollageError::Io { .. } => PyIOError::new_err(e.to_string()),
        e => PyRuntimeError::new_err(e.to_string()),
    }
}

/// `(best_total, mean_total, a_occ, b, v)` per generation.
type TraceRows = Vec<(f64, f64, f64, f64, f64)>;

fn dims_of(dims: &[(usize, usize)]) -> Vec<ImageDims> {
    dims.iter().map(|&(w, h)| ImageDims::new(w, h)).collect()
}

fn canvas(side: usize) -> PyResult<Canvas> {
    Canvas::new(side).map_err(py_err)
}

#[pyclass(name = "SaliencyMap", module = "stereo_collage", from_py_object)]
#[derive(Clone)]
struct PySaliencyMap {
    inner: SaliencyMap,
}

#[pymethods]
impl PySaliencyMap {
    #[new]
    fn new(width: usize, height: usize, weights: Vec<f64>) -> PyResult<Self> {
        Ok(Self {
            inner: SaliencyMap::new(width, height, weights).map_err(py_err)?,
        })
    }

    #[staticmethod]
    fn uniform(width: usize, height: usize, weight: f64) -> PyResult<Self> {
        Ok(Self {
            inner: SaliencyMap::uniform(width, height, weight).map_err(py_err)?,
        })
    }

    #[getter]
    fn width(&self) -> usize {
        self.inner.width()
    }

    #[getter]
    fn height(&self) -> usize {
        self.inner.height()
    }

    #[getter]
    fn total(&self) -> f64 {
        self.inner.total()
    }

    #[getter]
    fn weights(&self) -> Vec<f64> {
        self.inner.data().to_vec()
    }

    fn __repr__(&self) -> String {
        format!(
            "SaliencyMap({}x{}, total={})",
            self.inner.width(),
            self.inner.height(),
            self.inner.total()
        )
    }
}

#[pyclass(name = "Placement", module = "stereo_collage", from_py_object)]
#[derive(Clone)]
struct PyPlacement {
    #[pyo3(get, set)]
    image_id: usize,
    #[pyo3(get, set)]
    cx: f64,
    #[pyo3(get, set)]
    cy: f64,
    #[pyo3(get, set)]
    theta: f64,
    #[pyo3(get, set)]
    layer_key: f64,
}

#[pymethods]
impl PyPlacement {
    #[new]
    #[pyo3(signature = (image_id, cx, cy, theta = 0.0, layer_key = 0.5))]
    fn new(image_id: usize, cx: f64, cy: f64, theta: f64, layer_key: f64) -> Self {
        Self {
            image_id,
            cx,
            cy,
            theta,
            layer_key,
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Placement(image_id={}, cx={}, cy={}, theta={}, layer_key={})",
            self.image_id, self.cx, self.cy, self.theta, self.layer_key
        )
    }
}

impl From<&PyPlacement> for Placement {
    fn from(p: &PyPlacement) -> Self {
        Placement {
            image_id: p.image_id,
            cx: p.cx,
            cy: p.cy,
            theta: p.theta,
            layer_key: p.layer_key,
        }
    }
}

impl From<Placement> for PyPlacement {
    fn from(p: Placement) -> Self {
        Self {
            image_id: p.image_id,
            cx: p.cx,
            cy: p.cy,
            theta: p.theta,
            layer_key: p.layer_key,
        }
    }
}

#[pyclass(name = "FitnessBreakdown", module = "stereo_collage", frozen)]
struct PyFitness {
    #[pyo3(get)]
    a_occ: f64,
    #[pyo3(get)]
    b: f64,
    #[pyo3(get)]
    v: f64,
    #[pyo3(get)]
    total: f64,
}

#[pymethods]
impl PyFitness {
    fn __repr__(&self) -> String {
        format!(
            "FitnessBreakdown(a_occ={}, b={}, v={}, total={})",
            self.a_occ, self.b, self.v, self.total
        )
    }
}

impl From<FitnessBreakdown> for PyFitness {
    fn from(f: FitnessBreakdown) -> Self {
        Self {
            a_occ: f.a_occ,
            b: f.b,
            v: f.v,
            total: f.total,
        }
    }
}

#[pyclass(name = "GaConfig", module = "stereo_collage", from_py_object)]
#[derive(Clone)]
struct PyGaConfig {
    inner: GaConfig,
}

#[pymethods]
impl PyGaConfig {
    #[new]
    #[pyo3(signature = (
        population = 40, generations = 150, seed = 42, tournament_size = 2, crossover_rate = 0.9,
        mutation_rate = 0.1, mutation_sigma = 0.1, blx_alpha = 0.5, elite_count = 2,
        lambda_a = 10.0 / 30.0, lambda_b = 9.0 / 30.0, lambda_v = 11.0 / 30.0,
        theta_max = std::f64::consts::FRAC_PI_4,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        population: usize,
        generations: usize,
        seed: u64,
        tournament_size: usize,
        crossover_rate: f64,
        mutation_rate: f64,
        mutation_sigma: f64,
        blx_alpha: f64,
        elite_count: usize,
        lambda_a: f64,
        lambda_b: f64,
        lambda_v: f64,
        theta_max: f64,
    ) -> PyResult<Self> {
        let inner = GaConfig {
            population,
            generations,
            tournament_size,
            crossover_rate,
            mutation_rate,
            mutation_sigma,
            blx_alpha,
            elite_count,
            weights: FitnessWeights {
                lambda_a,
                lambda_b,
                lambda_v,
            },
            theta_max,
            seed,
        };
        inner.validate().map_err(py_err)?;
        Ok(Self { inner })
    }

    #[getter]
    fn population(&self) -> usize {
        self.inner.population
    }

    #[getter]
    fn generations(&self) -> usize {
        self.inner.generations
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    #[getter]
    fn theta_max(&self) -> f64 {
        self.inner.theta_max
    }
}

/// Luminance of a packed RGB buffer.
#[pyfunction]
fn to_gray(width: usize, height: usize, rgb: &[u8]) -> PyResult<Vec<u8>> {
    let img = RgbImage::new(width, height, rgb.to_vec()).map_err(py_err)?;
    Ok(collage_core::to_gray(&img).map_err(py_err)?.data().to_vec())
}

/// Row-major disparities for a rectified grayscale pair.
#[pyfunction]
#[pyo3(signature = (width, height, left, right, d_max, window = 5, smoothness = 20.0))]
#[allow(clippy::too_many_arguments)]
fn compute_disparity(
    py: Python<'_>,
    width: usize,
    height: usize,
    left: &[u8],
    right: &[u8],
    d_max: u32,
    window: u32,
    smoothness: f64,
) -> PyResult<Vec<u32>> {
    let left = GrayImage::new(width, height, left.to_vec()).map_err(py_err)?;
    let right = GrayImage::new(width, height, right.to_vec()).map_err(py_err)?;
    let pair = StereoPair::new(left, right).map_err(py_err)?;
    let params = StereoParams {
        d_max,
        window,
        smoothness,
    };
    let map = py
        .detach(|| collage_core::compute_disparity(&pair, &params))
        .map_err(py_err)?;
    Ok(map.data().to_vec())
}

#[pyfunction]
#[pyo3(signature = (width, height, disparity, d_max, median_radius = 1))]
fn depth_to_saliency(
    width: usize,
    height: usize,
    disparity: Vec<u32>,
    d_max: u32,
    median_radius: usize,
) -> PyResult<PySaliencyMap> {
    let map = DisparityMap::new(width, height, d_max, disparity).map_err(py_err)?;
    Ok(PySaliencyMap {
        inner: collage_core::depth_to_saliency(&map, median_radius),
    })
}

#[pyfunction]
#[pyo3(signature = (width, height, gray, block = 16))]
fn contrast_saliency(
    width: usize,
    height: usize,
    gray: &[u8],
    block: usize,
) -> PyResult<PySaliencyMap> {
    let img = GrayImage::new(width, height, gray.to_vec()).map_err(py_err)?;
    Ok(PySaliencyMap {
        inner: collage_core::contrast_saliency(&img, block).map_err(py_err)?,
    })
}

/// Side of the square canvas for images given as `(width, height)` pairs.
#[pyfunction]
#[pyo3(signature = (dims, area_ratio = 0.5))]
fn canvas_for(dims: Vec<(usize, usize)>, area_ratio: f64) -> PyResult<usize> {
    Ok(collage_core::canvas_for(&dims_of(&dims), area_ratio)
        .map_err(py_err)?
        .side())
}

/// Owner image id per canvas pixel, row-major, `None` for blank.
#[pyfunction]
fn rasterize(
    layout: Vec<PyPlacement>,
    side: usize,
    dims: Vec<(usize, usize)>,
) -> PyResult<Vec<Option<u32>>> {
    let dims = dims_of(&dims);
    let layout: Vec<Placement> = layout.iter().map(Placement::from).collect();
    if let Some(p) = layout.iter().find(|p| p.image_id >= dims.len()) {
        return Err(PyValueError::new_err(format!(
            "placement references unknown image {}",
            p.image_id
        )));
    }
    Ok(collage_core::rasterize(&layout, canvas(side)?, &dims)
        .owners()
        .to_vec())
}

#[pyfunction]
#[pyo3(signature = (layout, side, dims, saliency, lambda_a = 10.0 / 30.0, lambda_b = 9.0 / 30.0, lambda_v = 11.0 / 30.0))]
#[allow(clippy::too_many_arguments)]
fn evaluate(
    layout: Vec<PyPlacement>,
    side: usize,
    dims: Vec<(usize, usize)>,
    saliency: Vec<PySaliencyMap>,
    lambda_a: f64,
    lambda_b: f64,
    lambda_v: f64,
) -> PyResult<PyFitness> {
    let weights = FitnessWeights::new(lambda_a, lambda_b, lambda_v).map_err(py_err)?;
    let sal: Vec<SaliencyMap> = saliency.into_iter().map(|s| s.inner).collect();
    let layout: Vec<Placement> = layout.iter().map(Placement::from).collect();
    let f = collage_core::evaluate(&layout, canvas(side)?, &dims_of(&dims), &sal, weights)
        .map_err(py_err)?;
    Ok(f.into())
}

#[pyfunction]
fn decode(genes: Vec<f64>, side: usize, theta_max: f64) -> PyResult<Vec<PyPlacement>> {
    let genome = LayoutGenome::new(genes).map_err(py_err)?;
    Ok(ga::decode(&genome, canvas(side)?, theta_max)
        .into_iter()
        .map(PyPlacement::from)
        .collect())
}

/// Runs the GA; returns `(best_genes, best_fitness, trace)` where each trace
/// entry is `(best_total, mean_total, a_occ, b, v)`.
#[pyfunction]
#[pyo3(signature = (dims, saliency, side, config = None))]
fn run_ga(
    py: Python<'_>,
    dims: Vec<(usize, usize)>,
    saliency: Vec<PySaliencyMap>,
    side: usize,
    config: Option<PyGaConfig>,
) -> PyResult<(Vec<f64>, PyFitness, TraceRows)> {
    let dims = dims_of(&dims);
    let sal: Vec<SaliencyMap> = saliency.into_iter().map(|s| s.inner).collect();
    let cfg = config.map(|c| c.inner).unwrap_or_default();
    let canvas = canvas(side)?;
    let out = py
        .detach(|| ga::run(&dims, &sal, canvas, &cfg))
        .map_err(py_err)?;
    let trace = out
        .trace
        .generations
        .iter()
        .map(|g| (g.best_total, g.mean_total, g.best.a_occ, g.best.b, g.best.v))
        .collect();
    Ok((out.best.into_genes(), out.breakdown.into(), trace))
}

/// Full pipeline over a directory of images, writing every artifact.
#[pyfunction]
#[pyo3(signature = (input_dir, output_dir, seed = 42, generations = 150, population = 40, area_ratio = 0.5))]
fn run_job(
    py: Python<'_>,
    input_dir: std::path::PathBuf,
    output_dir: std::path::PathBuf,
    seed: u64,
    generations: usize,
    population: usize,
    area_ratio: f64,
) -> PyResult<PyFitness> {
    let mut cfg = JobConfig {
        input_dir,
        output_dir,
        area_ratio,
        ..JobConfig::default()
    };
    cfg.ga.seed = seed;
    cfg.ga.generations = generations;
    cfg.ga.population = population;
    let report = py
        .detach(|| pipeline::run_job(&cfg))
        .map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    Ok(report.best().into())
}

#[pymodule]
fn stereo_collage(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySaliencyMap>()?;
    m.add_class::<PyPlacement>()?;
    m.add_class::<PyFitness>()?;
    m.add_class::<PyGaConfig>()?;
    m.add_function(wrap_pyfunction!(to_gray, m)?)?;
    m.add_function(wrap_pyfunction!(compute_disparity, m)?)?;
    m.add_function(wrap_pyfunction!(depth_to_saliency, m)?)?;
    m.add_function(wrap_pyfunction!(contrast_saliency, m)?)?;
    m.add_function(wrap_pyfunction!(canvas_for, m)?)?;
    m.add_function(wrap_pyfunction!(rasterize, m)?)?;
    m.add_function(wrap_pyfunction!(evaluate, m)?)?;
    m.add_function(wrap_pyfunction!(decode, m)?)?;
    m.add_function(wrap_pyfunction!(run_ga, m)?)?;
    m.add_function(wrap_pyfunction!(run_job, m)?)?;
    Ok(())
}

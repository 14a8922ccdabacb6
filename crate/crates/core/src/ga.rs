//! Real-coded genetic algorithm over layout genomes.
//!
//! Every image contributes four genes in `[0, 1]`: horizontal and vertical
//! center position, rotation, and a random-key layer value. Offspring come
//! from tournament selection, BLX-α crossover and clamped Gaussian mutation;
//! the best `elite_count` genomes survive unchanged.
//!
//! All randomness flows from one ChaCha8 stream seeded by `GaConfig::seed`
//! and is consumed sequentially, so a run is reproducible on any platform.
//! Fitness evaluation is parallel but results are gathered by index.

use std::f64::consts::FRAC_PI_4;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{CollageError, Result};
use crate::fitness::{Evaluator, FitnessBreakdown, FitnessWeights};
use crate::raster::{Canvas, ImageDims, Placement};
use crate::saliency::SaliencyMap;

pub const GENES_PER_IMAGE: usize = 4;

pub type GaRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> GaRng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LayoutGenome {
    genes: Vec<f64>,
}

impl LayoutGenome {
    pub fn new(genes: Vec<f64>) -> Result<Self> {
        if genes.is_empty() || !genes.len().is_multiple_of(GENES_PER_IMAGE) {
            return Err(CollageError::invalid(format!(
                "genome length {} is not a positive multiple of {GENES_PER_IMAGE}",
                genes.len()
            )));
        }
        if let Some(g) = genes.iter().find(|g| !(0.0..=1.0).contains(*g)) {
            return Err(CollageError::invalid(format!("gene {g} outside [0, 1]")));
        }
        Ok(Self { genes })
    }

    pub fn genes(&self) -> &[f64] {
        &self.genes
    }

    pub fn len(&self) -> usize {
        self.genes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.genes.is_empty()
    }

    pub fn image_count(&self) -> usize {
        self.genes.len() / GENES_PER_IMAGE
    }

    pub fn into_genes(self) -> Vec<f64> {
        self.genes
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GaConfig {
    pub population: usize,
    pub generations: usize,
    pub tournament_size: usize,
    pub crossover_rate: f64,
    /// Per-gene mutation probability.
    pub mutation_rate: f64,
    /// Mutation standard deviation in gene space.
    pub mutation_sigma: f64,
    pub blx_alpha: f64,
    pub elite_count: usize,
    pub weights: FitnessWeights,
    /// Largest absolute rotation, radians.
    pub theta_max: f64,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population: 40,
            generations: 150,
            tournament_size: 2,
            crossover_rate: 0.9,
            mutation_rate: 0.1,
            mutation_sigma: 0.1,
            blx_alpha: 0.5,
            elite_count: 2,
            weights: FitnessWeights::default(),
            theta_max: FRAC_PI_4,
            seed: 42,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(CollageError::InvalidInput(msg));
        if self.population < 2 {
            return fail(format!("population must be >= 2, got {}", self.population));
        }
        if self.elite_count >= self.population {
            return fail(format!(
                "elite count {} must be below population {}",
                self.elite_count, self.population
            ));
        }
        if self.tournament_size == 0 {
            return fail("tournament size must be >= 1".into());
        }
        for (name, p) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return fail(format!("{name} must be in [0, 1], got {p}"));
            }
        }
        if !(self.mutation_sigma >= 0.0 && self.mutation_sigma.is_finite()) {
            return fail(format!(
                "mutation sigma must be >= 0, got {}",
                self.mutation_sigma
            ));
        }
        if !(self.blx_alpha >= 0.0 && self.blx_alpha.is_finite()) {
            return fail(format!("blx alpha must be >= 0, got {}", self.blx_alpha));
        }
        if !(self.theta_max >= 0.0 && self.theta_max.is_finite()) {
            return fail(format!("theta_max must be >= 0, got {}", self.theta_max));
        }
        self.weights.validate()
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GenerationStats {
    pub best_total: f64,
    pub mean_total: f64,
    pub best: FitnessBreakdown,
}

/// One entry per generation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct FitnessTrace {
    pub generations: Vec<GenerationStats>,
}

impl FitnessTrace {
    pub fn len(&self) -> usize {
        self.generations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generations.is_empty()
    }

    pub fn best_totals(&self) -> impl Iterator<Item = f64> + '_ {
        self.generations.iter().map(|g| g.best_total)
    }
}

#[derive(Clone, Debug)]
pub struct GaOutcome {
    pub best: LayoutGenome,
    pub breakdown: FitnessBreakdown,
    pub trace: FitnessTrace,
    pub evaluations: usize,
}

/// Maps genes to placements:
/// `cx = (2u - 0.5) * side`, `cy = (2v - 0.5) * side`,
/// `theta = (2t - 1) * theta_max`, `layer_key = k`.
pub fn decode(genome: &LayoutGenome, canvas: Canvas, theta_max: f64) -> Vec<Placement> {
    let side = canvas.side() as f64;
    genome
        .genes
        .chunks_exact(GENES_PER_IMAGE)
        .enumerate()
        .map(|(image_id, g)| Placement {
            image_id,
            cx: (2.0 * g[0] - 0.5) * side,
            cy: (2.0 * g[1] - 0.5) * side,
            theta: (2.0 * g[2] - 1.0) * theta_max,
            layer_key: g[3],
        })
        .collect()
}

pub fn init_population<R: Rng>(
    config: &GaConfig,
    image_count: usize,
    rng: &mut R,
) -> Vec<LayoutGenome> {
    (0..config.population)
        .map(|_| LayoutGenome {
            genes: (0..image_count * GENES_PER_IMAGE)
                .map(|_| rng.random::<f64>())
                .collect(),
        })
        .collect()
}

/// Index of the winner among `tournament_size` uniform draws with
/// replacement. Lowest fitness wins; equal fitness goes to the lower index.
pub fn tournament_select<R: Rng>(fitnesses: &[f64], tournament_size: usize, rng: &mut R) -> usize {
    assert!(!fitnesses.is_empty(), "tournament over an empty population");
    let mut best = rng.random_range(0..fitnesses.len());
    for _ in 1..tournament_size {
        let c = rng.random_range(0..fitnesses.len());
        if fitnesses[c] < fitnesses[best] || (fitnesses[c] == fitnesses[best] && c < best) {
            best = c;
        }
    }
    best
}

/// BLX-α: each child gene is uniform on `[lo - αr, hi + αr]`, clamped to
/// `[0, 1]`. With probability `1 - crossover_rate` the parents are copied.
pub fn blend_crossover<R: Rng>(
    a: &LayoutGenome,
    b: &LayoutGenome,
    blx_alpha: f64,
    crossover_rate: f64,
    rng: &mut R,
) -> Result<(LayoutGenome, LayoutGenome)> {
    if a.len() != b.len() {
        return Err(CollageError::invalid(format!(
            "cannot cross genomes of length {} and {}",
            a.len(),
            b.len()
        )));
    }
    if rng.random::<f64>() >= crossover_rate {
        return Ok((a.clone(), b.clone()));
    }
    let mut c1 = Vec::with_capacity(a.len());
    let mut c2 = Vec::with_capacity(a.len());
    for (&x, &y) in a.genes.iter().zip(&b.genes) {
        let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
        let ext = blx_alpha * (hi - lo);
        let (lo, hi) = (lo - ext, hi + ext);
        c1.push((lo + rng.random::<f64>() * (hi - lo)).clamp(0.0, 1.0));
        c2.push((lo + rng.random::<f64>() * (hi - lo)).clamp(0.0, 1.0));
    }
    Ok((LayoutGenome { genes: c1 }, LayoutGenome { genes: c2 }))
}

pub fn gaussian_mutate<R: Rng>(
    mut genome: LayoutGenome,
    mutation_rate: f64,
    mutation_sigma: f64,
    rng: &mut R,
) -> LayoutGenome {
    let noise = Normal::new(0.0, mutation_sigma).expect("sigma validated as finite and >= 0");
    for g in genome.genes.iter_mut() {
        if rng.random::<f64>() < mutation_rate {
            *g = (*g + noise.sample(rng)).clamp(0.0, 1.0);
        }
    }
    genome
}

fn evaluate_population(
    evaluator: &Evaluator<'_>,
    population: &[LayoutGenome],
    theta_max: f64,
) -> Result<Vec<FitnessBreakdown>> {
    let canvas = evaluator.canvas();
    population
        .par_iter()
        .map(|g| evaluator.evaluate(&decode(g, canvas, theta_max)))
        .collect()
}

/// Generational loop; returns the best genome ever evaluated.
pub fn run(
    dims: &[ImageDims],
    saliency: &[SaliencyMap],
    canvas: Canvas,
    config: &GaConfig,
) -> Result<GaOutcome> {
    config.validate()?;
    let evaluator = Evaluator::new(canvas, dims, saliency, config.weights)?;
    let mut rng = seeded_rng(config.seed);
    let mut population = init_population(config, dims.len(), &mut rng);
    let mut trace = FitnessTrace::default();
    let mut best: Option<(LayoutGenome, FitnessBreakdown)> = None;
    let mut evaluations = 0;

    for generation in 0..config.generations {
        let scores = evaluate_population(&evaluator, &population, config.theta_max)?;
        evaluations += scores.len();
        let totals: Vec<f64> = scores.iter().map(|s| s.total).collect();

        let mut ranked: Vec<usize> = (0..population.len()).collect();
        ranked.sort_by(|&i, &j| totals[i].total_cmp(&totals[j]).then(i.cmp(&j)));
        let top = ranked[0];
        trace.generations.push(GenerationStats {
            best_total: totals[top],
            mean_total: totals.iter().sum::<f64>() / totals.len() as f64,
            best: scores[top],
        });
        if best.as_ref().is_none_or(|(_, b)| totals[top] < b.total) {
            best = Some((population[top].clone(), scores[top]));
        }

        if generation + 1 == config.generations {
            break;
        }
        let mut next: Vec<LayoutGenome> = ranked[..config.elite_count]
            .iter()
            .map(|&i| population[i].clone())
            .collect();
        while next.len() < config.population {
            let pa = tournament_select(&totals, config.tournament_size, &mut rng);
            let pb = tournament_select(&totals, config.tournament_size, &mut rng);
            let (c1, c2) = blend_crossover(
                &population[pa],
                &population[pb],
                config.blx_alpha,
                config.crossover_rate,
                &mut rng,
            )?;
            next.push(gaussian_mutate(
                c1,
                config.mutation_rate,
                config.mutation_sigma,
                &mut rng,
            ));
            if next.len() < config.population {
                next.push(gaussian_mutate(
                    c2,
                    config.mutation_rate,
                    config.mutation_sigma,
                    &mut rng,
                ));
            }
        }
        population = next;
    }

    let (best, breakdown) = match best {
        Some(b) => b,
        None => {
            // zero generations: report the initial population's first genome
            let g = population.swap_remove(0);
            let f = evaluator.evaluate(&decode(&g, canvas, config.theta_max))?;
            evaluations += 1;
            (g, f)
        }
    };
    Ok(GaOutcome {
        best,
        breakdown,
        trace,
        evaluations,
    })
}

//! Genetic-algorithm inverse identification of a load history from a target
//! mean-stress-vs-time curve, with the trained surrogate as the black-box
//! forward map.
//!
//! Genomes are the five free control-point values (the first control value
//! is pinned at zero). Operators: steady-state top-k parent selection,
//! single-point crossover, per-gene uniform bounded mutation, elitism.

use rand::seq::IndexedRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::mae;
use crate::model::Surrogate;
use crate::nn::tensor::Tensor;
use crate::rbi::{fit_rbi, sample_times, ControlPoints, LoadProfile, N_CONTROL};

/// Free genes per genome: control values 2..6.
pub const GENOME_LEN: usize = N_CONTROL - 1;

/// Guard added to the MAE before inverting, capping perfect-match fitness
/// at 1e12.
pub const FITNESS_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GaConfig {
    pub generations: usize,
    pub population: usize,
    pub parents_mating: usize,
    pub gene_bounds: [f64; 2],
    /// Probability that each gene of a child mutates.
    pub mutation_fraction: f64,
    /// Half-width of the uniform mutation noise.
    pub mutation_scale: f64,
    pub elitism: usize,
    pub seed: u64,
}

impl GaConfig {
    pub fn new(gene_bounds: [f64; 2]) -> Self {
        Self {
            generations: 25,
            population: 100,
            parents_mating: 10,
            gene_bounds,
            mutation_fraction: 0.2,
            mutation_scale: 0.1 * (gene_bounds[1] - gene_bounds[0]),
            elitism: 1,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.parents_mating < 2 || self.population < self.parents_mating {
            return Err(Error::InvalidArgument(
                "population >= parents_mating >= 2 required".into(),
            ));
        }
        if self.elitism >= self.population {
            return Err(Error::InvalidArgument("elitism must be below population".into()));
        }
        if !(self.gene_bounds[0] < self.gene_bounds[1]) {
            return Err(Error::InvalidArgument("gene bounds must satisfy lo < hi".into()));
        }
        Ok(())
    }
}

/// Desired mean stress history, one value per output step.
#[derive(Debug, Clone)]
pub struct InverseTarget {
    pub sigma_ref: Vec<f64>,
}

/// Mean over nodes of one component: `sigma[s] = (1/N) sum_n fields[n,s,idx]`.
pub fn mean_stress_history(fields: &Tensor, component: usize) -> Result<Vec<f64>> {
    let (n, s, c) = match fields.shape() {
        [n, s, c] => (*n, *s, *c),
        other => {
            return Err(Error::shape(
                "mean stress",
                "[N x S x C]",
                format!("{other:?}"),
            ));
        }
    };
    if component >= c {
        return Err(Error::InvalidArgument(format!(
            "component {component} out of range (C = {c})"
        )));
    }
    let data = fields.as_slice();
    let mut out = vec![0.0; s];
    for node in 0..n {
        for (step, slot) in out.iter_mut().enumerate() {
            *slot += data[(node * s + step) * c + component];
        }
    }
    for v in out.iter_mut() {
        *v /= n as f64;
    }
    Ok(out)
}

/// Rebuild the smooth load curve a genome encodes, sampled at the
/// surrogate's `S` output times.
pub fn genome_to_profile(genome: &[f64], t_total: f64, s: usize) -> Result<LoadProfile> {
    if genome.len() != GENOME_LEN {
        return Err(Error::shape(
            "genome",
            format!("{GENOME_LEN}"),
            format!("{}", genome.len()),
        ));
    }
    let mut values = [0.0; N_CONTROL];
    values[1..].copy_from_slice(genome);
    let control = ControlPoints::uniform(t_total, values)?;
    let interp = fit_rbi(&control)?;
    let samples = interp.eval_many(&sample_times(t_total, s))?;
    Ok(LoadProfile { samples, control })
}

/// Inverse-MAE fitness of one genome against the target history.
pub fn fitness(
    surrogate: &Surrogate,
    coords: &[f64],
    genome: &[f64],
    target: &InverseTarget,
    stress_component: usize,
) -> Result<f64> {
    let profile = genome_to_profile(genome, surrogate.t_total, surrogate.model.config.s)?;
    let fields = surrogate.predict(&profile.samples, coords)?;
    let predicted = mean_stress_history(&fields, stress_component)?;
    if predicted.len() != target.sigma_ref.len() {
        return Err(Error::shape(
            "fitness target",
            format!("{}", predicted.len()),
            format!("{}", target.sigma_ref.len()),
        ));
    }
    let err = mae(&predicted, &target.sigma_ref)?;
    Ok(1.0 / (err + FITNESS_GUARD))
}

#[derive(Debug, Clone)]
pub struct GaOutcome {
    pub best_genome: Vec<f64>,
    pub best_fitness: f64,
    /// Best fitness after each generation's evaluation.
    pub best_history: Vec<f64>,
    /// Population mean fitness per generation.
    pub mean_history: Vec<f64>,
}

/// Generational GA loop (Algorithm: evaluate, select top parents, breed with
/// single-point crossover and bounded mutation, carry elites).
pub fn run_ga(
    surrogate: &Surrogate,
    coords: &[f64],
    target: &InverseTarget,
    stress_component: usize,
    cfg: &GaConfig,
) -> Result<GaOutcome> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let [lo, hi] = cfg.gene_bounds;
    let mut population: Vec<Vec<f64>> = (0..cfg.population)
        .map(|_| (0..GENOME_LEN).map(|_| rng.random_range(lo..=hi)).collect())
        .collect();

    let mut best_history = Vec::with_capacity(cfg.generations);
    let mut mean_history = Vec::with_capacity(cfg.generations);
    let mut best_genome: Vec<f64> = Vec::new();
    let mut best_fitness = f64::NEG_INFINITY;

    for _gen in 0..cfg.generations {
        let mut scored: Vec<(f64, usize)> = Vec::with_capacity(population.len());
        for (i, genome) in population.iter().enumerate() {
            scored.push((fitness(surrogate, coords, genome, target, stress_component)?, i));
        }
        scored.sort_by(|a, b| b.0.total_cmp(&a.0));
        let gen_best = scored[0].0;
        if gen_best > best_fitness {
            best_fitness = gen_best;
            best_genome = population[scored[0].1].clone();
        }
        best_history.push(best_fitness);
        mean_history.push(scored.iter().map(|(f, _)| f).sum::<f64>() / scored.len() as f64);

        let parents: Vec<Vec<f64>> = scored[..cfg.parents_mating]
            .iter()
            .map(|(_, i)| population[*i].clone())
            .collect();
        let mut next = Vec::with_capacity(cfg.population);
        for (_, i) in scored[..cfg.elitism].iter() {
            next.push(population[*i].clone());
        }
        while next.len() < cfg.population {
            let a = parents.choose(&mut rng).expect("non-empty parent pool");
            let b = parents.choose(&mut rng).expect("non-empty parent pool");
            let point = rng.random_range(1..GENOME_LEN);
            let mut child: Vec<f64> = a[..point]
                .iter()
                .chain(b[point..].iter())
                .copied()
                .collect();
            for gene in child.iter_mut() {
                if rng.random_range(0.0..1.0) < cfg.mutation_fraction {
                    *gene =
                        (*gene + rng.random_range(-cfg.mutation_scale..=cfg.mutation_scale))
                            .clamp(lo, hi);
                }
            }
            next.push(child);
        }
        population = next;
    }

    Ok(GaOutcome {
        best_genome,
        best_fitness,
        best_history,
        mean_history,
    })
}

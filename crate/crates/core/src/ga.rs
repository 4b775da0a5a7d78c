//! Binary-chromosome genetic algorithm for bounded minimisation.
//!
//! Each parameter is a fixed-width unsigned gene mapped affinely onto its
//! interval. A generation evaluates the population, copies the elite
//! unchanged, then fills the rest with roulette-selected parent pairs passed
//! through crossover and per-bit mutation. The objective is minimised; the
//! roulette works on `fitness = 1 / (1 + objective)`.
//!
//! All randomness comes from one seeded ChaCha stream consumed in the serial
//! breeding phase. Objective evaluations run in parallel and never touch the
//! RNG, so a run is reproducible bit-for-bit from its seed.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{domain, Error, Result};

pub type Chromosome = Vec<bool>;

/// One encoded parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Gene {
    pub lower: f64,
    pub upper: f64,
    pub bits: u32,
}

impl Gene {
    pub fn new(lower: f64, upper: f64, bits: u32) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite() && lower < upper) {
            return domain(format!(
                "gene bounds must satisfy lower < upper, got [{lower}, {upper}]"
            ));
        }
        if !(1..=52).contains(&bits) {
            return domain(format!("gene width must be 1..=52 bits, got {bits}"));
        }
        Ok(Self { lower, upper, bits })
    }

    fn max_code(&self) -> u64 {
        (1u64 << self.bits) - 1
    }

    fn value(&self, code: u64) -> f64 {
        let max = self.max_code();
        if code == max {
            return self.upper;
        }
        let v = self.lower + code as f64 * (self.upper - self.lower) / max as f64;
        v.clamp(self.lower, self.upper)
    }
}

/// Concatenated gene layout of a chromosome.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneLayout {
    genes: Vec<Gene>,
}

impl GeneLayout {
    pub fn new(genes: Vec<Gene>) -> Result<Self> {
        if genes.is_empty() {
            return domain("a gene layout needs at least one gene");
        }
        Ok(Self { genes })
    }

    /// The same gene repeated `count` times.
    pub fn uniform(count: usize, gene: Gene) -> Result<Self> {
        Self::new(vec![gene; count])
    }

    pub fn genes(&self) -> &[Gene] {
        &self.genes
    }

    /// Chromosome length γ.
    pub fn total_bits(&self) -> usize {
        self.genes.iter().map(|g| g.bits as usize).sum()
    }

    pub fn contains(&self, values: &[f64]) -> bool {
        values.len() == self.genes.len()
            && values
                .iter()
                .zip(&self.genes)
                .all(|(v, g)| *v >= g.lower && *v <= g.upper)
    }

    /// Decodes each gene (most significant bit first) into its interval.
    pub fn decode(&self, chromosome: &[bool]) -> Result<Vec<f64>> {
        if chromosome.len() != self.total_bits() {
            return domain(format!(
                "chromosome has {} bits, layout expects {}",
                chromosome.len(),
                self.total_bits()
            ));
        }
        let mut offset = 0;
        Ok(self
            .genes
            .iter()
            .map(|g| {
                let bits = &chromosome[offset..offset + g.bits as usize];
                offset += g.bits as usize;
                let code = bits.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64);
                g.value(code)
            })
            .collect())
    }

    /// Encodes values to the nearest representable codes (values are clamped to the box).
    pub fn encode(&self, values: &[f64]) -> Result<Chromosome> {
        if values.len() != self.genes.len() {
            return domain(format!(
                "{} values for {} genes",
                values.len(),
                self.genes.len()
            ));
        }
        let mut out = Vec::with_capacity(self.total_bits());
        for (v, g) in values.iter().zip(&self.genes) {
            let max = g.max_code();
            let frac = ((v - g.lower) / (g.upper - g.lower)).clamp(0.0, 1.0);
            let code = (frac * max as f64).round() as u64;
            out.extend((0..g.bits).rev().map(|i| (code >> i) & 1 == 1));
        }
        Ok(out)
    }
}

/// Rule that ends a run before the hard generation cap.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    /// Stop after this many generations (including the initial one).
    MaxGenerations(usize),
    /// Stop when best-ever fitness has improved by less than `epsilon` over `window` generations.
    FitnessPlateau { window: usize, epsilon: f64 },
    /// Stop when every chromosome in the population is identical.
    UniformPopulation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CrossoverKind {
    OnePoint,
    /// `n` distinct cut points with alternating segments swapped.
    NPoint(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    pub crossover_prob: f64,
    /// Per-bit flip probability.
    pub mutation_prob: f64,
    pub elitism_count: usize,
    pub termination: Termination,
    /// Hard cap on generations, whatever the termination rule.
    pub max_generations: usize,
    pub crossover: CrossoverKind,
    pub seed: u64,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: 50,
            crossover_prob: 0.6,
            mutation_prob: 0.001,
            elitism_count: 1,
            termination: Termination::MaxGenerations(500),
            max_generations: 500,
            crossover: CrossoverKind::OnePoint,
            seed: 0,
        }
    }
}

impl GaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.population_size < 2 {
            return domain("ga.population_size must be at least 2");
        }
        for (name, p) in [
            ("ga.crossover_prob", self.crossover_prob),
            ("ga.mutation_prob", self.mutation_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return domain(format!("{name} must lie in [0, 1], got {p}"));
            }
        }
        if self.elitism_count >= self.population_size {
            return domain("ga.elitism_count must be smaller than the population");
        }
        if self.max_generations == 0 {
            return domain("ga.max_generations must be positive");
        }
        match self.termination {
            Termination::MaxGenerations(0) => {
                return domain("termination generation count must be positive")
            }
            Termination::FitnessPlateau { window, epsilon }
                if window == 0 || epsilon.is_nan() || epsilon < 0.0 =>
            {
                return domain("plateau termination needs window > 0 and epsilon >= 0")
            }
            _ => {}
        }
        if let CrossoverKind::NPoint(0) = self.crossover {
            return domain("n-point crossover needs at least one cut");
        }
        Ok(())
    }
}

/// A chromosome with its objective and fitness.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub chromosome: Chromosome,
    pub objective: f64,
    pub fitness: f64,
}

/// `1 / (1 + objective)`.
pub fn fitness_from_objective(objective: f64) -> f64 {
    1.0 / (1.0 + objective)
}

/// Roulette-wheel draw; returns the index of the chosen individual.
pub fn select_parent_index<R: Rng + ?Sized>(
    population: &[Individual],
    rng: &mut R,
) -> Result<usize> {
    if population.is_empty() {
        return domain("cannot select from an empty population");
    }
    if population
        .iter()
        .any(|i| !(i.fitness >= 0.0 && i.fitness.is_finite()))
    {
        return domain("fitness values must be finite and nonnegative");
    }
    let total: f64 = population.iter().map(|i| i.fitness).sum();
    if total <= 0.0 {
        return domain("all fitness values are zero");
    }
    let mut target = rng.random::<f64>() * total;
    for (idx, ind) in population.iter().enumerate() {
        if target < ind.fitness {
            return Ok(idx);
        }
        target -= ind.fitness;
    }
    // Rounding can leave a sliver past the last bucket.
    Ok(population
        .iter()
        .rposition(|i| i.fitness > 0.0)
        .unwrap_or(0))
}

pub fn select_parent<'a, R: Rng + ?Sized>(
    population: &'a [Individual],
    rng: &mut R,
) -> Result<&'a Individual> {
    select_parent_index(population, rng).map(|i| &population[i])
}

/// Exchanges the segments between successive cut points (sorted, in `1..len`).
pub fn crossover_at(p1: &[bool], p2: &[bool], cuts: &[usize]) -> (Chromosome, Chromosome) {
    let mut c1 = p1.to_vec();
    let mut c2 = p2.to_vec();
    let mut bounds: Vec<usize> = cuts.to_vec();
    bounds.push(p1.len());
    for pair in bounds.chunks(2) {
        let start = pair[0];
        let end = pair.get(1).copied().unwrap_or(p1.len());
        c1[start..end].copy_from_slice(&p2[start..end]);
        c2[start..end].copy_from_slice(&p1[start..end]);
    }
    (c1, c2)
}

/// With probability `pc`, cuts both parents at one uniform point in `1..γ` and swaps tails.
pub fn crossover_one_point<R: Rng + ?Sized>(
    p1: &[bool],
    p2: &[bool],
    pc: f64,
    rng: &mut R,
) -> (Chromosome, Chromosome) {
    crossover_n_point(p1, p2, 1, pc, rng)
}

pub fn crossover_n_point<R: Rng + ?Sized>(
    p1: &[bool],
    p2: &[bool],
    points: usize,
    pc: f64,
    rng: &mut R,
) -> (Chromosome, Chromosome) {
    debug_assert_eq!(p1.len(), p2.len());
    let len = p1.len();
    if len < 2 || !rng.random_bool(pc) {
        return (p1.to_vec(), p2.to_vec());
    }
    let points = points.min(len - 1);
    let mut cuts = rand::seq::index::sample(rng, len - 1, points).into_vec();
    cuts.iter_mut().for_each(|c| *c += 1);
    cuts.sort_unstable();
    crossover_at(p1, p2, &cuts)
}

/// Flips each bit independently with probability `pm`.
pub fn mutate_bitflip<R: Rng + ?Sized>(chromosome: &[bool], pm: f64, rng: &mut R) -> Chromosome {
    chromosome
        .iter()
        .map(|&b| if rng.random_bool(pm) { !b } else { b })
        .collect()
}

pub fn flip_at(chromosome: &[bool], index: usize) -> Chromosome {
    let mut c = chromosome.to_vec();
    c[index] = !c[index];
    c
}

/// Per-generation summary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_objective: f64,
    pub mean_objective: f64,
    pub best_ever_objective: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxGenerations,
    Plateau,
    UniformPopulation,
    HardCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaOutcome {
    pub best: Vec<f64>,
    pub best_chromosome: Chromosome,
    pub best_objective: f64,
    pub history: Vec<GenerationStats>,
    pub stop_reason: StopReason,
}

impl GaOutcome {
    pub fn generations(&self) -> usize {
        self.history.len()
    }
}

/// A configured GA, optionally with a caller-supplied initial population.
#[derive(Debug, Clone)]
pub struct GeneticAlgorithm {
    layout: GeneLayout,
    config: GaConfig,
    initial: Option<Vec<Chromosome>>,
}

impl GeneticAlgorithm {
    pub fn new(layout: GeneLayout, config: GaConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            layout,
            config,
            initial: None,
        })
    }

    pub fn with_initial_population(mut self, population: Vec<Chromosome>) -> Result<Self> {
        if population.len() != self.config.population_size {
            return domain(format!(
                "initial population has {} members, config expects {}",
                population.len(),
                self.config.population_size
            ));
        }
        if population
            .iter()
            .any(|c| c.len() != self.layout.total_bits())
        {
            return domain("initial chromosome length does not match the layout");
        }
        self.initial = Some(population);
        Ok(self)
    }

    pub fn layout(&self) -> &GeneLayout {
        &self.layout
    }

    fn evaluate<F>(&self, chromosomes: Vec<Chromosome>, objective: &F) -> Result<Vec<Individual>>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        chromosomes
            .into_par_iter()
            .map(|chromosome| {
                let params = self.layout.decode(&chromosome)?;
                let value = objective(&params);
                if !(value.is_finite() && value >= 0.0) {
                    return Err(Error::InvalidObjective { value, params });
                }
                Ok(Individual {
                    chromosome,
                    objective: value,
                    fitness: fitness_from_objective(value),
                })
            })
            .collect()
    }

    /// Minimises `objective` over the layout box.
    pub fn run<F>(&self, objective: F) -> Result<GaOutcome>
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let cfg = &self.config;
        let gamma = self.layout.total_bits();
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

        let initial = match &self.initial {
            Some(pop) => pop.clone(),
            None => (0..cfg.population_size)
                .map(|_| (0..gamma).map(|_| rng.random::<bool>()).collect())
                .collect(),
        };
        let mut population = self.evaluate(initial, &objective)?;
        let mut best = best_of(&population).clone();
        let mut history: Vec<GenerationStats> = Vec::new();

        loop {
            let gen_best = best_of(&population);
            if gen_best.objective < best.objective {
                best = gen_best.clone();
            }
            let mean =
                population.iter().map(|i| i.objective).sum::<f64>() / population.len() as f64;
            history.push(GenerationStats {
                generation: history.len(),
                best_objective: gen_best.objective,
                mean_objective: mean,
                best_ever_objective: best.objective,
            });

            if let Some(reason) = self.should_stop(&history, &population) {
                return Ok(GaOutcome {
                    best: self.layout.decode(&best.chromosome)?,
                    best_chromosome: best.chromosome,
                    best_objective: best.objective,
                    history,
                    stop_reason: reason,
                });
            }

            let next = self.breed(&population, &mut rng)?;
            population = self.evaluate(next, &objective)?;
        }
    }

    fn should_stop(
        &self,
        history: &[GenerationStats],
        population: &[Individual],
    ) -> Option<StopReason> {
        let done = history.len();
        match self.config.termination {
            Termination::MaxGenerations(n) if done >= n => return Some(StopReason::MaxGenerations),
            Termination::FitnessPlateau { window, epsilon } if done > window => {
                let now = fitness_from_objective(history[done - 1].best_ever_objective);
                let then = fitness_from_objective(history[done - 1 - window].best_ever_objective);
                if now - then < epsilon {
                    return Some(StopReason::Plateau);
                }
            }
            Termination::UniformPopulation => {
                let first = &population[0].chromosome;
                if population.iter().all(|i| &i.chromosome == first) {
                    return Some(StopReason::UniformPopulation);
                }
            }
            _ => {}
        }
        (done >= self.config.max_generations).then_some(StopReason::HardCap)
    }

    fn breed(&self, population: &[Individual], rng: &mut ChaCha8Rng) -> Result<Vec<Chromosome>> {
        let cfg = &self.config;
        let mut order: Vec<usize> = (0..population.len()).collect();
        order.sort_by(|&i, &j| {
            population[i]
                .objective
                .total_cmp(&population[j].objective)
                .then(i.cmp(&j))
        });

        let mut next: Vec<Chromosome> = order[..cfg.elitism_count]
            .iter()
            .map(|&i| population[i].chromosome.clone())
            .collect();
        while next.len() < cfg.population_size {
            let i = select_parent_index(population, rng)?;
            let mut j = select_parent_index(population, rng)?;
            // Self-pairing is rejected; give up after a bounded number of redraws
            // (a population dominated by one individual).
            for _ in 0..64 {
                if j != i {
                    break;
                }
                j = select_parent_index(population, rng)?;
            }
            let (p1, p2) = (&population[i].chromosome, &population[j].chromosome);
            let (c1, c2) = match cfg.crossover {
                CrossoverKind::OnePoint => crossover_one_point(p1, p2, cfg.crossover_prob, rng),
                CrossoverKind::NPoint(n) => crossover_n_point(p1, p2, n, cfg.crossover_prob, rng),
            };
            next.push(mutate_bitflip(&c1, cfg.mutation_prob, rng));
            if next.len() < cfg.population_size {
                next.push(mutate_bitflip(&c2, cfg.mutation_prob, rng));
            }
        }
        Ok(next)
    }
}

fn best_of(population: &[Individual]) -> &Individual {
    population
        .iter()
        .min_by(|a, b| a.objective.total_cmp(&b.objective))
        .expect("population is never empty")
}

/// Convenience wrapper around [`GeneticAlgorithm`].
pub fn run_ga<F>(objective: F, layout: &GeneLayout, config: &GaConfig) -> Result<GaOutcome>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    GeneticAlgorithm::new(layout.clone(), config.clone())?.run(objective)
}

//! Canonical generational GA over binary feature masks.
//!
//! An individual's fitness is `alpha * hits - beta * nf`, where `hits` is the
//! number of evaluation samples the masked k-NN classifier gets right and `nf`
//! the number of active features.
//!
//! All randomness comes from one [`GaRng`] (ChaCha8) seeded from
//! [`GaConfig::seed`]. For each offspring pair the draws happen in this order:
//! tournament A, tournament B, crossover coin, cut point (only when the coin
//! succeeds and `L > 1`), then mutation of child 1 and child 2 (application
//! coin, one coin per bit, repair index if the result is all zero). Fitness
//! evaluation consumes no randomness, so serial and parallel runs replay
//! identically.

use std::collections::HashMap;
use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::knn::{count_hits, FeatureMask};

pub type GaRng = ChaCha8Rng;

/// Column header of the per-generation trace CSV.
pub const TRACE_HEADER: &str =
    "generation,best_fitness,median_fitness,min_fitness,best_nf,best_hits,best_mask";

/// Fixed-length bit string genotype.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Chromosome(Vec<bool>);

impl Chromosome {
    pub fn new(bits: Vec<bool>) -> Self {
        Chromosome(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count_ones(&self) -> usize {
        self.0.iter().filter(|&&b| b).count()
    }

    pub fn to_mask(&self) -> FeatureMask {
        FeatureMask::from_bits(self.0.clone())
    }

    /// Sets one uniformly chosen bit if no bit is set.
    fn repair(&mut self, rng: &mut GaRng) {
        if !self.0.is_empty() && !self.0.iter().any(|&b| b) {
            let i = rng.gen_range(0..self.0.len());
            self.0[i] = true;
        }
    }
}

impl From<&FeatureMask> for Chromosome {
    fn from(mask: &FeatureMask) -> Self {
        Chromosome(mask.bits().to_vec())
    }
}

impl std::fmt::Display for Chromosome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.to_mask().fmt(f)
    }
}

/// An evaluated chromosome.
#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub chromosome: Chromosome,
    pub fitness: f64,
    pub hits: usize,
    pub nf: usize,
}

impl Individual {
    pub fn mask(&self) -> FeatureMask {
        self.chromosome.to_mask()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GaConfig {
    pub population_size: usize,
    /// Last generation index; generation 0 is the initial population.
    pub max_generations: usize,
    pub crossover_prob: f64,
    /// Probability that a chromosome is mutated at all.
    pub mutation_prob: f64,
    /// Per-bit flip probability once mutation applies; `None` means `1/L`.
    pub per_bit_flip_rate: Option<f64>,
    pub alpha: f64,
    pub beta: f64,
    pub k: usize,
    pub seed: u64,
    pub elite_count: usize,
    pub tournament_size: usize,
    pub stop_on_fitness: Option<f64>,
    pub stall_generations: Option<usize>,
    /// Evaluate fitness on the rayon pool. Results are identical either way.
    pub parallel: bool,
}

impl Default for GaConfig {
    fn default() -> Self {
        GaConfig {
            population_size: 50,
            max_generations: 814,
            crossover_prob: 1.0,
            mutation_prob: 0.9,
            per_bit_flip_rate: None,
            alpha: 0.6,
            beta: 0.6,
            k: 1,
            seed: 12957,
            elite_count: 1,
            tournament_size: 2,
            stop_on_fitness: None,
            stall_generations: None,
            parallel: true,
        }
    }
}

impl GaConfig {
    /// Settings of the 117-feature run: 50 individuals, 814 generations, alpha = beta = 0.6.
    pub fn lot() -> Self {
        Self::default()
    }

    /// Settings of the 27-feature run: 216 individuals, 250 generations, alpha = beta = 0.4.
    pub fn rgb() -> Self {
        GaConfig {
            population_size: 216,
            max_generations: 250,
            alpha: 0.4,
            beta: 0.4,
            seed: 1547,
            ..Self::default()
        }
    }

    pub fn flip_rate(&self, len: usize) -> f64 {
        self.per_bit_flip_rate.unwrap_or(1.0 / len as f64)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.population_size == 0 {
            return bad("population_size must be positive".into());
        }
        if self.elite_count >= self.population_size {
            return bad(format!(
                "elite_count {} must be below population_size {}",
                self.elite_count, self.population_size
            ));
        }
        if self.tournament_size < 2 || self.tournament_size > self.population_size {
            return bad(format!(
                "tournament_size {} must be in 2..={}",
                self.tournament_size, self.population_size
            ));
        }
        for (name, p) in [
            ("crossover_prob", self.crossover_prob),
            ("mutation_prob", self.mutation_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return bad(format!("{name} {p} outside [0, 1]"));
            }
        }
        if let Some(r) = self.per_bit_flip_rate {
            if !(r > 0.0 && r <= 1.0) {
                return bad(format!("per_bit_flip_rate {r} outside (0, 1]"));
            }
        }
        for (name, w) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(w.is_finite() && w >= 0.0) {
                return bad(format!("{name} must be a non-negative number, got {w}"));
            }
        }
        if self.k == 0 {
            return bad("k must be positive".into());
        }
        if self.stall_generations == Some(0) {
            return bad("stall_generations must be positive".into());
        }
        Ok(())
    }

    /// Non-fatal remarks about the configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let sum = self.alpha + self.beta;
        if (sum - 1.0).abs() > 1e-12 {
            out.push(format!("alpha + beta = {sum} (not 1)"));
        }
        out
    }
}

/// `alpha * hits - beta * nf`, evaluated literally.
pub fn score(alpha: f64, beta: f64, hits: usize, nf: usize) -> f64 {
    alpha * hits as f64 - beta * nf as f64
}

/// Evaluates one chromosome. An all-zero chromosome is rejected.
pub fn fitness(
    ch: &Chromosome,
    train: &Dataset,
    eval_set: &Dataset,
    cfg: &GaConfig,
) -> Result<Individual> {
    let mask = ch.to_mask();
    let nf = mask.active_count();
    if nf == 0 {
        return Err(Error::EmptyMask);
    }
    let hits = count_hits(train, eval_set, cfg.k, &mask)?;
    Ok(Individual {
        chromosome: ch.clone(),
        fitness: score(cfg.alpha, cfg.beta, hits, nf),
        hits,
        nf,
    })
}

/// Random initial population: each bit is 1 with probability 1/2, all-zero strings repaired.
pub fn init_population(cfg: &GaConfig, len: usize, rng: &mut GaRng) -> Vec<Chromosome> {
    (0..cfg.population_size)
        .map(|_| {
            let mut ch = Chromosome((0..len).map(|_| rng.gen::<bool>()).collect());
            ch.repair(rng);
            ch
        })
        .collect()
}

/// Index of the tournament winner: `tournament_size` uniform draws with
/// replacement, highest fitness wins, lower index on ties.
pub fn tournament_index(pop: &[Individual], tournament_size: usize, rng: &mut GaRng) -> usize {
    let mut best = rng.gen_range(0..pop.len());
    for _ in 1..tournament_size {
        let c = rng.gen_range(0..pop.len());
        if pop[c].fitness > pop[best].fitness || (pop[c].fitness == pop[best].fitness && c < best) {
            best = c;
        }
    }
    best
}

pub fn tournament_select<'a>(
    pop: &'a [Individual],
    cfg: &GaConfig,
    rng: &mut GaRng,
) -> &'a Individual {
    &pop[tournament_index(pop, cfg.tournament_size, rng)]
}

/// Single-point crossover at `cut`: children take `a[..cut] ++ b[cut..]` and `b[..cut] ++ a[cut..]`.
pub fn crossover_at(a: &Chromosome, b: &Chromosome, cut: usize) -> (Chromosome, Chromosome) {
    let mut c1 = a.0[..cut].to_vec();
    c1.extend_from_slice(&b.0[cut..]);
    let mut c2 = b.0[..cut].to_vec();
    c2.extend_from_slice(&a.0[cut..]);
    (Chromosome(c1), Chromosome(c2))
}

pub fn crossover(
    a: &Chromosome,
    b: &Chromosome,
    cfg: &GaConfig,
    rng: &mut GaRng,
) -> (Chromosome, Chromosome) {
    assert_eq!(a.len(), b.len(), "crossover parents differ in length");
    let apply = rng.gen::<f64>() < cfg.crossover_prob;
    let len = a.len();
    if apply && len > 1 {
        let cut = rng.gen_range(1..len);
        crossover_at(a, b, cut)
    } else {
        (a.clone(), b.clone())
    }
}

/// With probability `mutation_prob`, flips each bit independently at the
/// configured per-bit rate. The result is always repaired to have a set bit.
pub fn mutate(ch: &Chromosome, cfg: &GaConfig, rng: &mut GaRng) -> Chromosome {
    let mut out = ch.clone();
    if rng.gen::<f64>() < cfg.mutation_prob {
        let rate = cfg.flip_rate(ch.len());
        for bit in out.0.iter_mut() {
            if rng.gen::<f64>() < rate {
                *bit = !*bit;
            }
        }
    }
    out.repair(rng);
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub median_fitness: f64,
    pub min_fitness: f64,
    pub best_nf: usize,
    pub best_hits: usize,
    pub best_mask: FeatureMask,
}

impl GenerationStats {
    fn from_population(generation: usize, pop: &[Individual]) -> Self {
        let best = &pop[best_index(pop)];
        let mut f: Vec<f64> = pop.iter().map(|i| i.fitness).collect();
        f.sort_by(f64::total_cmp);
        let n = f.len();
        let median = if n % 2 == 1 {
            f[n / 2]
        } else {
            (f[n / 2 - 1] + f[n / 2]) / 2.0
        };
        GenerationStats {
            generation,
            best_fitness: best.fitness,
            median_fitness: median,
            min_fitness: f[0],
            best_nf: best.nf,
            best_hits: best.hits,
            best_mask: best.mask(),
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.generation,
            self.best_fitness,
            self.median_fitness,
            self.min_fitness,
            self.best_nf,
            self.best_hits,
            self.best_mask
        )
    }
}

pub fn write_trace_csv(trace: &[GenerationStats], w: &mut impl Write) -> std::io::Result<()> {
    writeln!(w, "{TRACE_HEADER}")?;
    for s in trace {
        writeln!(w, "{}", s.csv_row())?;
    }
    Ok(())
}

fn best_index(pop: &[Individual]) -> usize {
    let mut best = 0;
    for (i, ind) in pop.iter().enumerate().skip(1) {
        if ind.fitness > pop[best].fitness {
            best = i;
        }
    }
    best
}

/// Why a run ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxGenerations,
    FitnessReached,
    Stalled,
}

#[derive(Debug, Clone)]
pub struct Evolution {
    /// Best individual seen in any generation (earliest on ties).
    pub best: Individual,
    pub trace: Vec<GenerationStats>,
    pub stop_reason: StopReason,
    /// Distinct chromosomes whose fitness was computed.
    pub evaluations: usize,
}

impl Evolution {
    pub fn generations_run(&self) -> usize {
        self.trace.last().map(|s| s.generation).unwrap_or(0)
    }
}

/// Memoised fitness evaluation; the cache never influences results.
struct Evaluator<'a> {
    train: &'a Dataset,
    eval_set: &'a Dataset,
    cfg: &'a GaConfig,
    hits: HashMap<Chromosome, usize>,
}

impl Evaluator<'_> {
    fn evaluate(&mut self, chromosomes: Vec<Chromosome>) -> Result<Vec<Individual>> {
        let mut pending: Vec<Chromosome> = Vec::new();
        for ch in &chromosomes {
            if !self.hits.contains_key(ch) && !pending.contains(ch) {
                pending.push(ch.clone());
            }
        }
        let (train, eval_set, k) = (self.train, self.eval_set, self.cfg.k);
        let compute = |ch: &Chromosome| -> Result<usize> {
            let mask = ch.to_mask();
            if mask.active_count() == 0 {
                return Err(Error::EmptyMask);
            }
            count_hits(train, eval_set, k, &mask)
        };
        let computed: Vec<Result<usize>> = if self.cfg.parallel {
            pending.par_iter().map(compute).collect()
        } else {
            pending.iter().map(compute).collect()
        };
        for (ch, h) in pending.into_iter().zip(computed) {
            self.hits.insert(ch, h?);
        }
        Ok(chromosomes
            .into_iter()
            .map(|ch| {
                let hits = self.hits[&ch];
                let nf = ch.count_ones();
                Individual {
                    fitness: score(self.cfg.alpha, self.cfg.beta, hits, nf),
                    chromosome: ch,
                    hits,
                    nf,
                }
            })
            .collect())
    }
}

/// Runs the GA and returns the best individual plus the per-generation trace.
pub fn evolve(train: &Dataset, eval_set: &Dataset, cfg: &GaConfig) -> Result<Evolution> {
    cfg.validate()?;
    train.check_compatible(eval_set)?;
    if cfg.k > train.len() {
        return Err(Error::KOutOfRange {
            k: cfg.k,
            available: train.len(),
        });
    }
    let len = train.feature_count();
    let mut rng = GaRng::seed_from_u64(cfg.seed);
    let mut evaluator = Evaluator {
        train,
        eval_set,
        cfg,
        hits: HashMap::new(),
    };

    let mut chromosomes = init_population(cfg, len, &mut rng);
    let mut trace = Vec::new();
    let mut best: Option<Individual> = None;
    let mut since_improvement = 0usize;
    let mut generation = 0usize;

    let stop_reason = loop {
        let pop = evaluator.evaluate(chromosomes)?;
        let stats = GenerationStats::from_population(generation, &pop);
        let gen_best = &pop[best_index(&pop)];
        match &best {
            Some(b) if gen_best.fitness <= b.fitness => since_improvement += 1,
            _ => {
                best = Some(gen_best.clone());
                since_improvement = 0;
            }
        }
        trace.push(stats);

        let best_fitness = best
            .as_ref()
            .map(|b| b.fitness)
            .unwrap_or(f64::NEG_INFINITY);
        if cfg.stop_on_fitness.is_some_and(|t| best_fitness >= t) {
            break StopReason::FitnessReached;
        }
        if generation >= cfg.max_generations {
            break StopReason::MaxGenerations;
        }
        if cfg
            .stall_generations
            .is_some_and(|s| since_improvement >= s)
        {
            break StopReason::Stalled;
        }

        chromosomes = next_generation(&pop, cfg, &mut rng);
        generation += 1;
    };

    Ok(Evolution {
        best: best.expect("at least one generation is evaluated"),
        trace,
        stop_reason,
        evaluations: evaluator.hits.len(),
    })
}

fn next_generation(pop: &[Individual], cfg: &GaConfig, rng: &mut GaRng) -> Vec<Chromosome> {
    let mut ranked: Vec<usize> = (0..pop.len()).collect();
    ranked.sort_by(|&a, &b| pop[b].fitness.total_cmp(&pop[a].fitness).then(a.cmp(&b)));
    let mut next: Vec<Chromosome> = ranked[..cfg.elite_count]
        .iter()
        .map(|&i| pop[i].chromosome.clone())
        .collect();
    while next.len() < cfg.population_size {
        let a = tournament_index(pop, cfg.tournament_size, rng);
        let b = tournament_index(pop, cfg.tournament_size, rng);
        let (c1, c2) = crossover(&pop[a].chromosome, &pop[b].chromosome, cfg, rng);
        let m1 = mutate(&c1, cfg, rng);
        let m2 = mutate(&c2, cfg, rng);
        next.push(m1);
        if next.len() < cfg.population_size {
            next.push(m2);
        }
    }
    next
}

/// Exhaustive optimum over every non-empty feature subset.
#[derive(Debug, Clone, PartialEq)]
pub struct ExhaustiveResult {
    pub mask: FeatureMask,
    pub fitness: f64,
    pub hits: usize,
    pub nf: usize,
    pub subsets_evaluated: usize,
}

/// Default guard on the feature count accepted by [`exhaustive_best`].
pub const DEFAULT_MAX_EXHAUSTIVE: usize = 15;

/// Scores all `2^L - 1` masks and keeps the fittest; ties go to fewer
/// features, then to the lexicographically smaller mask string.
pub fn exhaustive_best(
    train: &Dataset,
    eval_set: &Dataset,
    cfg: &GaConfig,
    max_len: usize,
) -> Result<ExhaustiveResult> {
    let len = train.feature_count();
    if len > max_len || len >= usize::BITS as usize {
        return Err(Error::SearchTooLarge {
            feature_count: len,
            max: max_len,
        });
    }
    train.check_compatible(eval_set)?;
    if cfg.k == 0 || cfg.k > train.len() {
        return Err(Error::KOutOfRange {
            k: cfg.k,
            available: train.len(),
        });
    }
    let total = (1usize << len) - 1;
    let eval = |code: usize| -> Result<(FeatureMask, usize)> {
        let mask = FeatureMask::from_bits((0..len).map(|j| code >> j & 1 == 1).collect());
        let hits = count_hits(train, eval_set, cfg.k, &mask)?;
        Ok((mask, hits))
    };
    let scored: Vec<(FeatureMask, usize)> = if cfg.parallel {
        (1..=total)
            .into_par_iter()
            .map(eval)
            .collect::<Result<_>>()?
    } else {
        (1..=total).map(eval).collect::<Result<_>>()?
    };

    let mut best: Option<ExhaustiveResult> = None;
    for (mask, hits) in scored {
        let nf = mask.active_count();
        let f = score(cfg.alpha, cfg.beta, hits, nf);
        let better = match &best {
            None => true,
            Some(b) => {
                f > b.fitness
                    || (f == b.fitness
                        && (nf < b.nf || (nf == b.nf && mask.bits() < b.mask.bits())))
            }
        };
        if better {
            best = Some(ExhaustiveResult {
                mask,
                fitness: f,
                hits,
                nf,
                subsets_evaluated: total,
            });
        }
    }
    Ok(best.expect("at least one subset"))
}

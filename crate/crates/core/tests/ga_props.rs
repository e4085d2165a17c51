mod common;

use nnga::ga::{
    crossover, evolve, exhaustive_best, fitness, init_population, mutate, score, tournament_index,
    write_trace_csv, Chromosome, GaConfig, GaRng, Individual, StopReason,
};
use nnga::synth::{generate, SynthSpec};
use nnga::Dataset;
use proptest::prelude::*;
use rand::SeedableRng;

fn small_problem(seed: u64) -> (Dataset, Dataset) {
    generate(&SynthSpec {
        n_classes: 4,
        n_features: 8,
        informative: vec![2, 5],
        class_separation: 3.0,
        noise_sd: 1.0,
        train_size: 24,
        test_size: 16,
        seed,
    })
    .unwrap()
}

fn chromosome(bits: &[bool]) -> Chromosome {
    Chromosome::new(bits.to_vec())
}

#[test]
fn tournament_frequencies_follow_enumerated_probabilities() {
    // Exact probabilities by enumerating the 9 ordered draws of size-2 tournaments.
    let fit = [1.0, 2.0, 3.0];
    let mut expected = [0.0f64; 3];
    for a in 0..3 {
        for b in 0..3 {
            let w = if fit[b] > fit[a] || (fit[b] == fit[a] && b < a) {
                b
            } else {
                a
            };
            expected[w] += 1.0 / 9.0;
        }
    }
    assert!((expected[0] - 1.0 / 9.0).abs() < 1e-12);
    assert!((expected[2] - 5.0 / 9.0).abs() < 1e-12);

    let pop: Vec<Individual> = fit
        .iter()
        .map(|&f| Individual {
            chromosome: chromosome(&[true]),
            fitness: f,
            hits: 0,
            nf: 1,
        })
        .collect();
    let mut rng = GaRng::seed_from_u64(11);
    let mut counts = [0usize; 3];
    let draws = 10_000;
    for _ in 0..draws {
        counts[tournament_index(&pop, 2, &mut rng)] += 1;
    }
    for c in 0..3 {
        let freq = counts[c] as f64 / draws as f64;
        assert!(
            (freq - expected[c]).abs() < 0.02,
            "class {c}: {freq} vs {}",
            expected[c]
        );
    }
    assert!(counts[0] < counts[1] && counts[1] < counts[2]);
}

#[test]
fn mean_flip_count_is_one_per_chromosome() {
    let cfg = GaConfig {
        mutation_prob: 1.0,
        ..GaConfig::default()
    };
    let parent = chromosome(&[true; 117]);
    let mut rng = GaRng::seed_from_u64(5);
    let n = 10_000;
    let flips: usize = (0..n)
        .map(|_| {
            let child = mutate(&parent, &cfg, &mut rng);
            child.bits().iter().filter(|&&b| !b).count()
        })
        .sum();
    let mean = flips as f64 / n as f64;
    assert!((mean - 1.0).abs() <= 0.05, "mean flips {mean}");
}

proptest! {
    #[test]
    fn crossover_conserves_bits_per_position(
        a in prop::collection::vec(any::<bool>(), 1..40),
        seed in any::<u64>(),
    ) {
        let b: Vec<bool> = a.iter().enumerate().map(|(i, &x)| x ^ (i % 3 == 0)).collect();
        let mut rng = GaRng::seed_from_u64(seed);
        let (c1, c2) = crossover(&chromosome(&a), &chromosome(&b), &GaConfig::default(), &mut rng);
        for i in 0..a.len() {
            let mut parents = [a[i], b[i]];
            let mut kids = [c1.bits()[i], c2.bits()[i]];
            parents.sort();
            kids.sort();
            prop_assert_eq!(parents, kids);
        }
    }

    #[test]
    fn operators_never_yield_empty_chromosomes(len in 1usize..30, seed in any::<u64>()) {
        let cfg = GaConfig { mutation_prob: 1.0, per_bit_flip_rate: Some(0.5), ..GaConfig::default() };
        let mut rng = GaRng::seed_from_u64(seed);
        for c in init_population(&cfg, len, &mut rng) {
            prop_assert!(c.count_ones() >= 1);
            let m = mutate(&c, &cfg, &mut rng);
            prop_assert!(m.count_ones() >= 1);
        }
    }

    #[test]
    fn fitness_decomposes(hits in 0usize..500, nf in 1usize..200, alpha in 0.0..2.0f64, beta in 0.0..2.0f64) {
        prop_assert_eq!(score(alpha, beta, hits, nf), alpha * hits as f64 - beta * nf as f64);
    }
}

#[test]
fn elitist_best_is_monotone_and_stats_are_ordered() {
    let (train, test) = small_problem(3);
    for seed in 0..10u64 {
        let cfg = GaConfig {
            population_size: 12,
            max_generations: 25,
            seed,
            elite_count: 1 + (seed as usize % 3),
            alpha: 0.5,
            beta: 0.5,
            ..GaConfig::default()
        };
        let run = evolve(&train, &test, &cfg).unwrap();
        assert_eq!(run.trace.len(), 26);
        for w in run.trace.windows(2) {
            assert!(w[1].best_fitness >= w[0].best_fitness);
        }
        for s in &run.trace {
            assert!(s.min_fitness <= s.median_fitness && s.median_fitness <= s.best_fitness);
            assert_eq!(s.best_nf, s.best_mask.active_count());
            assert_eq!(
                s.best_fitness,
                score(cfg.alpha, cfg.beta, s.best_hits, s.best_nf)
            );
        }
        let again = fitness(&run.best.chromosome, &train, &test, &cfg).unwrap();
        assert_eq!(again, run.best);
    }
}

#[test]
fn stop_on_fitness_below_initial_best_ends_at_generation_zero() {
    let (train, test) = small_problem(1);
    let cfg = GaConfig {
        population_size: 10,
        stop_on_fitness: Some(-1e9),
        ..GaConfig::default()
    };
    let run = evolve(&train, &test, &cfg).unwrap();
    assert_eq!(run.trace.len(), 1);
    assert_eq!(run.stop_reason, StopReason::FitnessReached);
}

#[test]
fn stall_rule_stops_early() {
    let (train, test) = small_problem(1);
    let cfg = GaConfig {
        population_size: 10,
        max_generations: 10_000,
        stall_generations: Some(15),
        ..GaConfig::default()
    };
    let run = evolve(&train, &test, &cfg).unwrap();
    assert_eq!(run.stop_reason, StopReason::Stalled);
    let n = run.trace.len();
    assert!(n < 10_000);
    let last_improvement = run
        .trace
        .windows(2)
        .rposition(|w| w[1].best_fitness > w[0].best_fitness)
        .map(|p| p + 1)
        .unwrap_or(0);
    assert_eq!(n - 1 - last_improvement, 15);
}

#[test]
fn serial_and_parallel_traces_are_identical() {
    let (train, test) = small_problem(9);
    let base = GaConfig {
        population_size: 20,
        max_generations: 40,
        seed: 77,
        ..GaConfig::default()
    };
    let render = |cfg: &GaConfig| {
        let run = evolve(&train, &test, cfg).unwrap();
        let mut out = Vec::new();
        write_trace_csv(&run.trace, &mut out).unwrap();
        out
    };
    let par = render(&GaConfig {
        parallel: true,
        ..base.clone()
    });
    let ser = render(&GaConfig {
        parallel: false,
        ..base.clone()
    });
    assert_eq!(par, ser);
    assert_eq!(par, render(&base));
}

#[test]
fn exhaustive_small_cases() {
    let train = Dataset::from_named(vec![vec![0.0], vec![5.0]], &["a", "b"]).unwrap();
    let r = exhaustive_best(&train, &train, &GaConfig::default(), 15).unwrap();
    assert_eq!(r.mask.to_string(), "1");
    assert_eq!(r.fitness, score(0.6, 0.6, 2, 1));

    // L = 3, beta = 0: optimum equals the best hit count over all 7 subsets.
    let (tr, te) = generate(&SynthSpec {
        n_classes: 3,
        n_features: 3,
        informative: vec![1],
        class_separation: 2.0,
        noise_sd: 1.0,
        train_size: 15,
        test_size: 15,
        seed: 2,
    })
    .unwrap();
    let cfg = GaConfig {
        beta: 0.0,
        alpha: 1.0,
        ..GaConfig::default()
    };
    let r = exhaustive_best(&tr, &te, &cfg, 15).unwrap();
    let max_hits = (1..8u32)
        .map(|code| {
            let bits: Vec<bool> = (0..3).map(|j| code & (1 << j) != 0).collect();
            fitness(&chromosome(&bits), &tr, &te, &cfg).unwrap().hits
        })
        .max()
        .unwrap();
    assert_eq!(r.hits, max_hits);
    assert_eq!(r.fitness, max_hits as f64);

    let wide = Dataset::new(vec![vec![0.0; 16]], vec![0], vec!["a".into()]).unwrap();
    assert!(exhaustive_best(&wide, &wide, &GaConfig::default(), 15).is_err());
}

#[test]
fn exhaustive_agrees_with_naive_enumeration() {
    for seed in 0..4u64 {
        let train = common::random_instance(seed, 14, 5, 3);
        let eval = common::random_instance(seed + 99, 10, 5, 3);
        let (train, eval) = nnga::dataset::unify_vocabulary(&train, &eval).unwrap();
        for k in [1, 3] {
            let cfg = GaConfig {
                k,
                alpha: 0.7,
                beta: 0.3,
                ..GaConfig::default()
            };
            let got = exhaustive_best(&train, &eval, &cfg, 15).unwrap();
            let (f, mask) = common::naive_exhaustive(&train, &eval, k, 0.7, 0.3);
            assert_eq!(got.fitness, f, "seed {seed} k {k}");
            assert_eq!(got.mask.bits(), &mask[..]);
        }
    }
}

#[test]
fn planted_ten_feature_optimum_is_the_informative_set() {
    let spec = SynthSpec {
        n_classes: 6,
        n_features: 10,
        informative: vec![1, 4, 8],
        class_separation: 10.0,
        noise_sd: 1.0,
        train_size: 36,
        test_size: 30,
        seed: 4,
    };
    let (train, test) = generate(&spec).unwrap();
    let r = exhaustive_best(&train, &test, &GaConfig::default(), 15).unwrap();
    // radices for 6 classes over 3 dims are (2, 2, 2): all three digits are needed
    assert_eq!(spec.radices(), vec![2, 2, 2]);
    assert_eq!(r.mask.active(), &[1, 4, 8]);
    assert_eq!(r.hits, 30);
}

#![allow(dead_code)]

use std::collections::BTreeMap;

use nnga::Dataset;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Naive k-NN: every distance with an explicit sqrt, a full stable sort on
/// (distance, index), then a vote counted in a map.
pub fn naive_classify(train: &Dataset, x: &[f64], k: usize, mask: &[bool]) -> usize {
    let mut all: Vec<(f64, usize, usize)> = Vec::new();
    for i in 0..train.len() {
        let row = train.row(i);
        let mut s = 0.0;
        for j in 0..row.len() {
            if mask[j] {
                s += (x[j] - row[j]).powi(2);
            }
        }
        all.push((s.sqrt(), i, train.label(i)));
    }
    all.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    let mut votes: BTreeMap<usize, (usize, f64)> = BTreeMap::new();
    for &(d, _, l) in &all[..k] {
        let e = votes.entry(l).or_insert((0, 0.0));
        e.0 += 1;
        e.1 += d;
    }
    let top = votes.values().map(|v| v.0).max().unwrap();
    let mut best: Option<(usize, f64)> = None;
    for (&class, &(count, sum)) in &votes {
        if count != top {
            continue;
        }
        match best {
            Some((_, s)) if s <= sum => {}
            _ => best = Some((class, sum)),
        }
    }
    best.unwrap().0
}

pub fn naive_neighbours(train: &Dataset, x: &[f64], k: usize, mask: &[bool]) -> Vec<(usize, f64)> {
    let mut all: Vec<(usize, f64)> = (0..train.len())
        .map(|i| {
            let d: f64 = train
                .row(i)
                .iter()
                .zip(x)
                .zip(mask)
                .filter(|(_, &m)| m)
                .map(|((a, b), _)| (a - b) * (a - b))
                .sum();
            (i, d.sqrt())
        })
        .collect();
    all.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

/// A random labelled dataset whose values sit on a coarse grid so that
/// distance ties actually occur.
pub fn random_instance(seed: u64, n: usize, len: usize, classes: usize) -> Dataset {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| (0..len).map(|_| rng.gen_range(0..5) as f64 * 0.5).collect())
        .collect();
    let names: Vec<String> = (0..n)
        .map(|_| format!("k{}", rng.gen_range(0..classes)))
        .collect();
    Dataset::from_named(rows, &names).unwrap()
}

pub fn random_mask(rng: &mut impl Rng, len: usize) -> Vec<bool> {
    let mut m: Vec<bool> = (0..len).map(|_| rng.gen_bool(0.5)).collect();
    if !m.iter().any(|&b| b) {
        let i = rng.gen_range(0..len);
        m[i] = true;
    }
    m
}

/// Exhaustive reference for small L, written independently of the library's
/// search: scores every mask with the naive classifier.
pub fn naive_exhaustive(
    train: &Dataset,
    eval: &Dataset,
    k: usize,
    alpha: f64,
    beta: f64,
) -> (f64, Vec<bool>) {
    let len = train.feature_count();
    let mut best: Option<(f64, usize, Vec<bool>)> = None;
    for code in 1u32..(1 << len) {
        let mask: Vec<bool> = (0..len).map(|j| code & (1 << j) != 0).collect();
        let hits = (0..eval.len())
            .filter(|&i| naive_classify(train, eval.row(i), k, &mask) == eval.label(i))
            .count();
        let nf = mask.iter().filter(|&&b| b).count();
        let f = alpha * hits as f64 - beta * nf as f64;
        let replace = match &best {
            None => true,
            Some((bf, bn, bm)) => f > *bf || (f == *bf && (nf < *bn || (nf == *bn && mask < *bm))),
        };
        if replace {
            best = Some((f, nf, mask));
        }
    }
    let (f, _, m) = best.unwrap();
    (f, m)
}

mod common;

use common::{naive_classify, naive_neighbours, random_instance, random_mask};
use nnga::dataset::Dataset;
use nnga::knn::{classify, k_nearest, masked_distance, FeatureMask};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn vec_pair(len: usize) -> impl Strategy<Value = (Vec<f64>, Vec<f64>, Vec<bool>)> {
    (
        prop::collection::vec(-100.0..100.0f64, len),
        prop::collection::vec(-100.0..100.0f64, len),
        prop::collection::vec(any::<bool>(), len),
    )
}

proptest! {
    #[test]
    fn distance_is_symmetric_and_non_negative((x, m, bits) in (1usize..12).prop_flat_map(vec_pair)) {
        prop_assume!(bits.iter().any(|&b| b));
        let mask = FeatureMask::from_bits(bits);
        let a = masked_distance(&x, &m, &mask).unwrap();
        let b = masked_distance(&m, &x, &mask).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!(a >= 0.0);
        prop_assert_eq!(masked_distance(&x, &x, &mask).unwrap(), 0.0);
    }

    #[test]
    fn adding_an_active_bit_never_shrinks_distance(
        (x, m, bits) in (2usize..12).prop_flat_map(vec_pair),
        extra in any::<prop::sample::Index>(),
    ) {
        prop_assume!(bits.iter().any(|&b| b));
        let mut grown = bits.clone();
        grown[extra.index(bits.len())] = true;
        let small = masked_distance(&x, &m, &FeatureMask::from_bits(bits)).unwrap();
        let large = masked_distance(&x, &m, &FeatureMask::from_bits(grown)).unwrap();
        prop_assert!(large >= small);
    }

    #[test]
    fn agreement_on_active_coordinates_gives_zero(
        (x, mut m, bits) in (1usize..10).prop_flat_map(vec_pair),
    ) {
        prop_assume!(bits.iter().any(|&b| b));
        for (j, &b) in bits.iter().enumerate() {
            if b {
                m[j] = x[j];
            }
        }
        prop_assert_eq!(masked_distance(&x, &m, &FeatureMask::from_bits(bits)).unwrap(), 0.0);
    }

    #[test]
    fn power_of_two_scaling_keeps_every_decision(seed in any::<u64>(), k in prop::sample::select(vec![1usize, 3, 5])) {
        let train = random_instance(seed, 20, 6, 3);
        let query = random_instance(seed ^ 1, 5, 6, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mask = FeatureMask::from_bits(random_mask(&mut rng, 6));
        let scale = |d: &Dataset| {
            let rows = (0..d.len()).map(|i| d.row(i).iter().map(|v| v * 8.0).collect()).collect();
            Dataset::new(rows, d.labels().to_vec(), d.classes().to_vec()).unwrap()
        };
        let (st, sq) = (scale(&train), scale(&query));
        for i in 0..query.len() {
            prop_assert_eq!(
                classify(&train, query.row(i), k, &mask).unwrap(),
                classify(&st, sq.row(i), k, &mask).unwrap()
            );
        }
    }
}

#[test]
fn k_nearest_matches_full_sort_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    for seed in 0..300u64 {
        let n = 1 + (seed as usize % 20);
        let len = 1 + (seed as usize % 7);
        let train = random_instance(seed, n, len, 4);
        let q = random_instance(seed + 1000, 1, len, 4);
        let mask = random_mask(&mut rng, len);
        for k in [1, 3, 5].into_iter().filter(|&k| k <= n) {
            let got =
                k_nearest(&train, q.row(0), k, &FeatureMask::from_bits(mask.clone())).unwrap();
            let want = naive_neighbours(&train, q.row(0), k, &mask);
            let got: Vec<(usize, f64)> = got.iter().map(|n| (n.sample_index, n.distance)).collect();
            assert_eq!(got, want, "seed {seed} k {k}");
        }
    }
}

#[test]
fn classify_matches_naive_vote() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for seed in 0..200u64 {
        let train = random_instance(seed, 20, 5, 3);
        let q = random_instance(seed + 5000, 4, 5, 3);
        let mask = random_mask(&mut rng, 5);
        let fm = FeatureMask::from_bits(mask.clone());
        for i in 0..q.len() {
            for k in [1, 2, 3, 4, 5] {
                assert_eq!(
                    classify(&train, q.row(i), k, &fm).unwrap(),
                    naive_classify(&train, q.row(i), k, &mask),
                    "seed {seed} query {i} k {k}"
                );
            }
        }
    }
}

#[test]
fn classify_is_deterministic() {
    let train = random_instance(3, 30, 4, 5);
    let mask = FeatureMask::full(4);
    let first: Vec<usize> = (0..30)
        .map(|i| classify(&train, train.row(i), 3, &mask).unwrap())
        .collect();
    let again: Vec<usize> = (0..30)
        .map(|i| classify(&train, train.row(i), 3, &mask).unwrap())
        .collect();
    assert_eq!(first, again);
}

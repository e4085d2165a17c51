use nnga::dataset::{split_random, Dataset, LabelColumn};
use nnga::knn::{recognition_rate, FeatureMask};
use nnga::synth::{generate, SynthSpec};
use proptest::prelude::*;

#[test]
fn planted_mask_recognises_every_test_sample() {
    let spec = SynthSpec::default();
    let (train, test) = generate(&spec).unwrap();
    let mask = FeatureMask::from_indices(117, &[70, 101, 112]).unwrap();
    let r = recognition_rate(&train, &test, 1, &mask).unwrap();
    assert_eq!(r.hits, 50);
}

#[test]
fn uninformative_mask_is_at_chance() {
    let spec = SynthSpec {
        test_size: 280,
        ..SynthSpec::default()
    };
    let (train, test) = generate(&spec).unwrap();
    let blind: Vec<usize> = (0..117).filter(|j| ![70, 101, 112].contains(j)).collect();
    let mask = FeatureMask::from_indices(117, &blind).unwrap();
    let r = recognition_rate(&train, &test, 1, &mask).unwrap();
    assert!((r.rate - 1.0 / 14.0).abs() <= 0.1, "rate {}", r.rate);
}

#[test]
fn class_means_converge_to_the_lattice() {
    let spec = SynthSpec {
        n_classes: 4,
        n_features: 5,
        informative: vec![0, 3],
        noise_sd: 2.0,
        train_size: 4000,
        test_size: 4,
        ..SynthSpec::default()
    };
    let (train, _) = generate(&spec).unwrap();
    let per = 1000.0;
    for class in 0..4 {
        let mean = spec.class_mean(class);
        for &j in &spec.informative {
            let emp: f64 = train
                .samples()
                .filter(|s| s.label == class)
                .map(|s| s.features[j])
                .sum::<f64>()
                / per;
            assert!(
                (emp - mean[j]).abs() < 3.0 * spec.noise_sd / per.sqrt(),
                "class {class} feature {j}"
            );
        }
    }
}

#[test]
fn split_of_237_is_187_and_50_and_partitions() {
    let spec = SynthSpec {
        train_size: 237,
        test_size: 1,
        ..SynthSpec::default()
    };
    let (all, _) = generate(&spec).unwrap();
    let (train, test) = split_random(&all, 50, 12957).unwrap();
    assert_eq!((train.len(), test.len()), (187, 50));
    let mut rows: Vec<Vec<u64>> = train
        .samples()
        .chain(test.samples())
        .map(|s| s.features.iter().map(|v| v.to_bits()).collect())
        .collect();
    let mut orig: Vec<Vec<u64>> = all
        .samples()
        .map(|s| s.features.iter().map(|v| v.to_bits()).collect())
        .collect();
    rows.sort();
    orig.sort();
    assert_eq!(rows, orig);
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![
        -1e6..1e6f64,
        (-1000i64..1000).prop_map(|v| v as f64 / 8.0),
        Just(0.0),
        Just(1e-300)
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn csv_round_trip_is_exact(
        rows in (1usize..6).prop_flat_map(|w| prop::collection::vec(prop::collection::vec(finite(), w), 1..12)),
        labels in prop::collection::vec(prop::sample::select(vec!["ALM", "ANT", "ARI", "VIM"]), 12),
    ) {
        let names = &labels[..rows.len()];
        let d = Dataset::from_named(rows, names).unwrap();
        let mut buf = Vec::new();
        d.write_csv_to(&mut buf).unwrap();
        let back = Dataset::read_csv(&buf[..], &LabelColumn::Last, true).unwrap();
        prop_assert_eq!(back, d);
    }

    #[test]
    fn split_is_a_seeded_partition(n in 2usize..60, frac in 0.01..0.99f64, seed in any::<u64>()) {
        let rows = (0..n).map(|i| vec![i as f64]).collect();
        let names: Vec<String> = (0..n).map(|i| format!("c{}", i % 4)).collect();
        let d = Dataset::from_named(rows, &names).unwrap();
        let t = ((n as f64 * frac) as usize).clamp(1, n - 1);
        let (a, b) = split_random(&d, t, seed).unwrap();
        prop_assert_eq!(a.len() + b.len(), n);
        let mut ids: Vec<u64> = a.samples().chain(b.samples()).map(|s| s.features[0] as u64).collect();
        ids.sort();
        prop_assert_eq!(ids, (0..n as u64).collect::<Vec<_>>());
        let (a2, _) = split_random(&d, t, seed).unwrap();
        prop_assert_eq!(a, a2);
    }

    #[test]
    fn class_ids_follow_first_appearance(perm_seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut labels = vec!["x", "y", "z", "x", "w", "y"];
        labels.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(perm_seed));
        let rows = (0..labels.len()).map(|i| vec![i as f64]).collect();
        let d = Dataset::from_named(rows, &labels).unwrap();
        let mut order: Vec<&str> = Vec::new();
        for l in &labels {
            if !order.contains(l) {
                order.push(l);
            }
        }
        prop_assert_eq!(d.classes().iter().map(String::as_str).collect::<Vec<_>>(), order);
    }
}

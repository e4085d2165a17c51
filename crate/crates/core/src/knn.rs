//! Masked Euclidean k-nearest-neighbour classification.
//!
//! Every training sample is a prototype. Distances are computed over the
//! features switched on in a [`FeatureMask`] only. Neighbour ties are broken
//! by training index and vote ties by the summed distance of each tied
//! class's voters, then by class id, so every decision is reproducible.

use std::fmt;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Fixed-length selection of active features; bit `n` switches feature `n` on.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FeatureMask {
    bits: Vec<bool>,
    active: Vec<usize>,
}

impl FeatureMask {
    pub fn from_bits(bits: Vec<bool>) -> Self {
        let active = bits
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| b.then_some(i))
            .collect();
        FeatureMask { bits, active }
    }

    pub fn full(len: usize) -> Self {
        Self::from_bits(vec![true; len])
    }

    pub fn from_indices(len: usize, indices: &[usize]) -> Result<Self> {
        let mut bits = vec![false; len];
        for &i in indices {
            if i >= len {
                return Err(Error::InvalidMask(format!(
                    "feature index {i} out of range for {len} features"
                )));
            }
            bits[i] = true;
        }
        Ok(Self::from_bits(bits))
    }

    /// Parses either a `0`/`1` string of exactly `len` characters (leftmost
    /// is feature 0) or a comma-separated list of active 0-based indices.
    pub fn parse(s: &str, len: usize) -> Result<Self> {
        let s = s.trim();
        if s.len() == len && !s.contains(',') && s.chars().all(|c| c == '0' || c == '1') {
            return Ok(Self::from_bits(s.chars().map(|c| c == '1').collect()));
        }
        let indices = s
            .split(',')
            .map(str::trim)
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<usize>().map_err(|_| {
                    Error::InvalidMask(format!("cannot parse {t:?} as a feature index"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_indices(len, &indices)
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn get(&self, i: usize) -> bool {
        self.bits[i]
    }

    /// Indices of active features, ascending.
    pub fn active(&self) -> &[usize] {
        &self.active
    }

    pub fn active_count(&self) -> usize {
        self.active.len()
    }

    /// Comma-separated active indices, e.g. `70,101,112`.
    pub fn to_index_list(&self) -> String {
        let parts: Vec<String> = self.active.iter().map(usize::to_string).collect();
        parts.join(",")
    }
}

impl fmt::Display for FeatureMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.bits {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Neighbor {
    pub sample_index: usize,
    pub distance: f64,
    pub label: usize,
}

fn check_mask(len: usize, mask: &FeatureMask) -> Result<()> {
    if mask.len() != len {
        return Err(Error::LengthMismatch {
            expected: len,
            found: mask.len(),
        });
    }
    if mask.active_count() == 0 {
        return Err(Error::EmptyMask);
    }
    Ok(())
}

#[inline]
fn squared_distance(x: &[f64], m: &[f64], active: &[usize]) -> f64 {
    active
        .iter()
        .map(|&j| {
            let d = x[j] - m[j];
            d * d
        })
        .sum()
}

/// Euclidean distance between `x` and `m` over the active features.
pub fn masked_distance(x: &[f64], m: &[f64], mask: &FeatureMask) -> Result<f64> {
    if x.len() != m.len() {
        return Err(Error::LengthMismatch {
            expected: x.len(),
            found: m.len(),
        });
    }
    check_mask(x.len(), mask)?;
    Ok(squared_distance(x, m, mask.active()).sqrt())
}

/// The `k` training samples closest to `x`, nearest first; equal distances
/// keep ascending sample index.
pub fn k_nearest(
    train: &Dataset,
    x: &[f64],
    k: usize,
    mask: &FeatureMask,
) -> Result<Vec<Neighbor>> {
    check_query(train, x, k, mask)?;
    Ok(nearest_unchecked(train, x, k, mask.active()))
}

fn check_query(train: &Dataset, x: &[f64], k: usize, mask: &FeatureMask) -> Result<()> {
    if x.len() != train.feature_count() {
        return Err(Error::LengthMismatch {
            expected: train.feature_count(),
            found: x.len(),
        });
    }
    check_mask(train.feature_count(), mask)?;
    if k == 0 || k > train.len() {
        return Err(Error::KOutOfRange {
            k,
            available: train.len(),
        });
    }
    Ok(())
}

fn nearest_unchecked(train: &Dataset, x: &[f64], k: usize, active: &[usize]) -> Vec<Neighbor> {
    // Ordering on squared distance is the same as on distance.
    let mut scored: Vec<(f64, usize)> = (0..train.len())
        .map(|i| (squared_distance(x, train.row(i), active), i))
        .collect();
    let by_key = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
    if k < scored.len() {
        scored.select_nth_unstable_by(k - 1, by_key);
        scored.truncate(k);
    }
    scored.sort_unstable_by(by_key);
    scored
        .into_iter()
        .map(|(d2, i)| Neighbor {
            sample_index: i,
            distance: d2.sqrt(),
            label: train.label(i),
        })
        .collect()
}

/// Vote tally: `(class, votes, summed distance)` for every class that received a vote.
fn tally(neighbors: &[Neighbor]) -> Vec<(usize, usize, f64)> {
    let mut votes: Vec<(usize, usize, f64)> = Vec::new();
    for n in neighbors {
        match votes.iter_mut().find(|v| v.0 == n.label) {
            Some(v) => {
                v.1 += 1;
                v.2 += n.distance;
            }
            None => votes.push((n.label, 1, n.distance)),
        }
    }
    votes
}

/// Plurality vote with the documented tie-break order.
pub fn vote(neighbors: &[Neighbor]) -> usize {
    tally(neighbors)
        .into_iter()
        .min_by(|a, b| b.1.cmp(&a.1).then(a.2.total_cmp(&b.2)).then(a.0.cmp(&b.0)))
        .map(|v| v.0)
        .expect("at least one neighbour")
}

/// Plurality vote that refuses to decide when two or more classes share the top count.
pub fn vote_with_reject(neighbors: &[Neighbor]) -> Option<usize> {
    let votes = tally(neighbors);
    let top = votes.iter().map(|v| v.1).max()?;
    let mut winners = votes.iter().filter(|v| v.1 == top);
    let first = winners.next()?;
    match winners.next() {
        Some(_) => None,
        None => Some(first.0),
    }
}

pub fn classify(train: &Dataset, x: &[f64], k: usize, mask: &FeatureMask) -> Result<usize> {
    check_query(train, x, k, mask)?;
    Ok(classify_unchecked(train, x, k, mask.active()))
}

/// Like [`classify`], but returns `None` when the vote has no unique winner.
pub fn classify_with_reject(
    train: &Dataset,
    x: &[f64],
    k: usize,
    mask: &FeatureMask,
) -> Result<Option<usize>> {
    Ok(vote_with_reject(&k_nearest(train, x, k, mask)?))
}

fn classify_unchecked(train: &Dataset, x: &[f64], k: usize, active: &[usize]) -> usize {
    if k == 1 {
        let mut best = (f64::INFINITY, 0usize);
        for i in 0..train.len() {
            let d2 = squared_distance(x, train.row(i), active);
            if d2 < best.0 {
                best = (d2, i);
            }
        }
        return train.label(best.1);
    }
    vote(&nearest_unchecked(train, x, k, active))
}

/// Outcome of classifying a whole test set.
#[derive(Debug, Clone, PartialEq)]
pub struct Recognition {
    pub hits: usize,
    pub rate: f64,
    /// `(predicted, actual)` per test sample, in test order.
    pub per_sample: Vec<(usize, usize)>,
}

impl Recognition {
    pub fn errors(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.per_sample
            .iter()
            .enumerate()
            .filter(|(_, (p, a))| p != a)
            .map(|(i, &(p, a))| (i, p, a))
    }
}

pub fn recognition_rate(
    train: &Dataset,
    test: &Dataset,
    k: usize,
    mask: &FeatureMask,
) -> Result<Recognition> {
    train.check_compatible(test)?;
    check_query(train, test.row(0), k, mask)?;
    let active = mask.active();
    let per_sample: Vec<(usize, usize)> = test
        .samples()
        .map(|s| (classify_unchecked(train, s.features, k, active), s.label))
        .collect();
    let hits = per_sample.iter().filter(|(p, a)| p == a).count();
    Ok(Recognition {
        hits,
        rate: hits as f64 / test.len() as f64,
        per_sample,
    })
}

/// Hit count only; the hot path of fitness evaluation.
pub fn count_hits(train: &Dataset, test: &Dataset, k: usize, mask: &FeatureMask) -> Result<usize> {
    train.check_compatible(test)?;
    check_query(train, test.row(0), k, mask)?;
    let active = mask.active();
    Ok(test
        .samples()
        .filter(|s| classify_unchecked(train, s.features, k, active) == s.label)
        .count())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mask(s: &str) -> FeatureMask {
        FeatureMask::parse(s, s.len()).unwrap()
    }

    #[test]
    fn distance_examples() {
        assert_eq!(
            masked_distance(&[0.0, 0.0], &[3.0, 4.0], &mask("11")).unwrap(),
            5.0
        );
        assert_eq!(
            masked_distance(&[0.0, 9.0], &[3.0, 1.0], &mask("10")).unwrap(),
            3.0
        );
        assert_eq!(
            masked_distance(&[1.5, -2.0], &[1.5, -2.0], &mask("01")).unwrap(),
            0.0
        );
        assert!(matches!(
            masked_distance(&[0.0], &[0.0, 1.0], &mask("11")),
            Err(Error::LengthMismatch { .. })
        ));
        assert!(matches!(
            masked_distance(&[0.0, 1.0], &[0.0, 1.0], &mask("00")),
            Err(Error::EmptyMask)
        ));
    }

    #[test]
    fn mask_text_forms() {
        let m = FeatureMask::parse("0,2", 4).unwrap();
        assert_eq!(m.to_string(), "1010");
        assert_eq!(FeatureMask::parse("1010", 4).unwrap(), m);
        assert_eq!(m.to_index_list(), "0,2");
        assert_eq!(m.active_count(), 2);
        assert!(FeatureMask::parse("9", 4).is_err());
        assert!(FeatureMask::parse("x", 4).is_err());
    }

    fn line() -> Dataset {
        // samples at 0, 2, 4 on a line; labels a, b, a
        Dataset::from_named(
            vec![vec![0.0, 7.0], vec![2.0, 7.0], vec![4.0, 7.0]],
            &["a", "b", "a"],
        )
        .unwrap()
    }

    #[test]
    fn nearest_to_itself_and_index_ties() {
        let d = line();
        let n = k_nearest(&d, &[2.0, 0.0], 1, &mask("10")).unwrap();
        assert_eq!(
            n,
            vec![Neighbor {
                sample_index: 1,
                distance: 0.0,
                label: 1
            }]
        );
        // 1.0 is equidistant from samples 0 and 1
        let n = k_nearest(&d, &[1.0, 7.0], 1, &mask("11")).unwrap();
        assert_eq!(n[0].sample_index, 0);
        let n = k_nearest(&d, &[1.0, 7.0], 3, &mask("11")).unwrap();
        let order: Vec<usize> = n.iter().map(|x| x.sample_index).collect();
        assert_eq!(order, vec![0, 1, 2]);
        assert!(matches!(
            k_nearest(&d, &[1.0, 7.0], 4, &mask("11")),
            Err(Error::KOutOfRange { .. })
        ));
        assert!(k_nearest(&d, &[1.0, 7.0], 0, &mask("11")).is_err());
    }

    fn nb(label: usize, distance: f64) -> Neighbor {
        Neighbor {
            sample_index: 0,
            distance,
            label,
        }
    }

    #[test]
    fn voting_rules() {
        assert_eq!(vote(&[nb(0, 1.0), nb(0, 2.0), nb(1, 0.1)]), 0);
        assert_eq!(vote(&[nb(0, 0.5), nb(1, 0.9)]), 0);
        assert_eq!(vote(&[nb(1, 0.5), nb(0, 0.9)]), 1);
        // equal sums fall back to class id
        assert_eq!(vote(&[nb(2, 0.5), nb(1, 0.5)]), 1);
        assert_eq!(vote_with_reject(&[nb(0, 0.5), nb(1, 0.9)]), None);
        assert_eq!(
            vote_with_reject(&[nb(1, 0.5), nb(1, 0.9), nb(0, 0.1)]),
            Some(1)
        );
    }

    #[test]
    fn k1_matches_minimum_distance_rule() {
        let d = line();
        assert_eq!(classify(&d, &[3.2, 7.0], 1, &mask("11")).unwrap(), 0);
        assert_eq!(classify(&d, &[2.4, 7.0], 1, &mask("11")).unwrap(), 1);
        // k=2 at 2.4: b at 0.4, a at 1.6; one vote each, b has the smaller sum
        assert_eq!(classify(&d, &[2.4, 7.0], 2, &mask("11")).unwrap(), 1);
        assert_eq!(
            classify_with_reject(&d, &[2.4, 7.0], 2, &mask("11")).unwrap(),
            None
        );
    }

    #[test]
    fn recognition_on_itself_and_single_prototype() {
        let d = line();
        let r = recognition_rate(&d, &d, 1, &FeatureMask::full(2)).unwrap();
        assert_eq!((r.hits, r.rate), (3, 1.0));
        assert_eq!(r.per_sample, vec![(0, 0), (1, 1), (0, 0)]);

        let single = d.subset(&[1]);
        let r = recognition_rate(&single, &d, 1, &FeatureMask::full(2)).unwrap();
        assert_eq!(r.hits, 1);
        assert!(r.per_sample.iter().all(|&(p, _)| p == 1));
        assert_eq!(r.errors().count(), 2);
        assert_eq!(
            count_hits(&single, &d, 1, &FeatureMask::full(2)).unwrap(),
            1
        );
    }

    #[test]
    fn recognition_rate_arithmetic() {
        let hits = 49usize;
        assert_eq!(hits as f64 / 50.0, 0.98);
    }

    #[test]
    fn recognition_rejects_mismatched_sets() {
        let d = line();
        let other = Dataset::from_named(vec![vec![0.0, 1.0, 2.0]], &["a"]).unwrap();
        assert!(matches!(
            recognition_rate(&d, &other, 1, &FeatureMask::full(2)),
            Err(Error::Incompatible(_))
        ));
    }
}

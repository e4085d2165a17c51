//! Planted-feature benchmark datasets.
//!
//! Class means are zero on every non-informative feature. On the informative
//! features each class sits on its own lattice point: the class id is written
//! in a mixed radix (one digit per informative feature, least significant
//! first) and each digit is scaled by `class_separation`. Radices are grown
//! one at a time, always the smallest (lowest position on ties), until the
//! lattice has room for every class.
//!
//! Noise is Gaussian with standard deviation `noise_sd` on every feature,
//! produced by the Box-Muller transform from ChaCha8 uniforms: for each pair
//! `(u1, u2)` with `u1` in (0, 1] the generator emits
//! `sqrt(-2 ln u1) cos(2 pi u2)` and then `sqrt(-2 ln u1) sin(2 pi u2)`.
//! Training samples are generated first, class by class, then test samples.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub n_classes: usize,
    pub n_features: usize,
    pub informative: Vec<usize>,
    pub class_separation: f64,
    pub noise_sd: f64,
    /// Total training samples, spread over classes as evenly as possible.
    pub train_size: usize,
    /// Total test samples, spread the same way.
    pub test_size: usize,
    pub seed: u64,
}

impl Default for SynthSpec {
    /// 14 classes, 117 features of which 70, 101 and 112 carry the class, 187/50 split.
    fn default() -> Self {
        SynthSpec {
            n_classes: 14,
            n_features: 117,
            informative: vec![70, 101, 112],
            class_separation: 10.0,
            noise_sd: 1.0,
            train_size: 187,
            test_size: 50,
            seed: 12957,
        }
    }
}

impl fmt::Display for SynthSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inf: Vec<String> = self.informative.iter().map(usize::to_string).collect();
        writeln!(f, "n_classes = {}", self.n_classes)?;
        writeln!(f, "n_features = {}", self.n_features)?;
        writeln!(f, "informative = {}", inf.join(","))?;
        writeln!(f, "class_separation = {}", self.class_separation)?;
        writeln!(f, "noise_sd = {}", self.noise_sd)?;
        writeln!(f, "train_size = {}", self.train_size)?;
        writeln!(f, "test_size = {}", self.test_size)?;
        writeln!(f, "seed = {}", self.seed)
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.n_classes == 0 || self.n_features == 0 {
            return bad("n_classes and n_features must be positive".into());
        }
        if self.informative.is_empty() {
            return bad("at least one informative feature is required".into());
        }
        let distinct: BTreeSet<usize> = self.informative.iter().copied().collect();
        if distinct.len() != self.informative.len() {
            return bad("informative indices must be distinct".into());
        }
        if let Some(&i) = self.informative.iter().find(|&&i| i >= self.n_features) {
            return bad(format!(
                "informative index {i} out of range for {} features",
                self.n_features
            ));
        }
        if !(self.class_separation.is_finite() && self.class_separation > 0.0) {
            return bad("class_separation must be positive".into());
        }
        if !(self.noise_sd.is_finite() && self.noise_sd > 0.0) {
            return bad("noise_sd must be positive".into());
        }
        if self.train_size < self.n_classes || self.test_size == 0 {
            return bad("train_size must cover every class and test_size must be positive".into());
        }
        Ok(())
    }

    /// Mixed radices, one per informative feature.
    pub fn radices(&self) -> Vec<usize> {
        let mut r = vec![1usize; self.informative.len()];
        while r.iter().product::<usize>() < self.n_classes {
            let (pos, _) = r
                .iter()
                .enumerate()
                .min_by_key(|&(i, &v)| (v, i))
                .expect("non-empty");
            r[pos] += 1;
        }
        r
    }

    /// Lattice coordinates of `class` on the informative features.
    pub fn lattice_point(&self, class: usize) -> Vec<usize> {
        let mut rest = class;
        self.radices()
            .into_iter()
            .map(|r| {
                let digit = rest % r;
                rest /= r;
                digit
            })
            .collect()
    }

    /// Full-length mean vector of `class`.
    pub fn class_mean(&self, class: usize) -> Vec<f64> {
        let mut mean = vec![0.0; self.n_features];
        for (&j, d) in self.informative.iter().zip(self.lattice_point(class)) {
            mean[j] = d as f64 * self.class_separation;
        }
        mean
    }

    /// Samples per class for a split of `total`: the first `total % c` classes get one extra.
    pub fn per_class(&self, total: usize) -> Vec<usize> {
        let base = total / self.n_classes;
        let extra = total % self.n_classes;
        (0..self.n_classes)
            .map(|c| base + usize::from(c < extra))
            .collect()
    }

    pub fn class_name(class: usize) -> String {
        format!("C{}", class + 1)
    }

    /// Parses `key = value` lines (the same form [`Display`](fmt::Display)
    /// writes). Unknown keys are rejected; missing keys keep their defaults.
    pub fn parse_config(text: &str) -> Result<Self> {
        let mut spec = SynthSpec::default();
        for (n, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::InvalidConfig(format!("line {}: expected key = value", n + 1))
            })?;
            let (key, value) = (key.trim(), value.trim());
            let num_err = |_: std::num::ParseIntError| {
                Error::InvalidConfig(format!("line {}: bad value for {key}", n + 1))
            };
            let float_err = |_: std::num::ParseFloatError| {
                Error::InvalidConfig(format!("line {}: bad value for {key}", n + 1))
            };
            match key {
                "n_classes" => spec.n_classes = value.parse().map_err(num_err)?,
                "n_features" => spec.n_features = value.parse().map_err(num_err)?,
                "informative" => {
                    spec.informative = value
                        .split(',')
                        .map(|t| t.trim().parse::<usize>())
                        .collect::<std::result::Result<_, _>>()
                        .map_err(num_err)?
                }
                "class_separation" => spec.class_separation = value.parse().map_err(float_err)?,
                "noise_sd" => spec.noise_sd = value.parse().map_err(float_err)?,
                "train_size" => spec.train_size = value.parse().map_err(num_err)?,
                "test_size" => spec.test_size = value.parse().map_err(num_err)?,
                "seed" => spec.seed = value.parse().map_err(num_err)?,
                other => {
                    return Err(Error::InvalidConfig(format!(
                        "line {}: unknown key {other:?}",
                        n + 1
                    )))
                }
            }
        }
        Ok(spec)
    }

    pub fn load_config(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse_config(&text)
    }
}

/// Box-Muller normal generator over a ChaCha8 stream.
pub struct GaussianStream {
    rng: ChaCha8Rng,
    spare: Option<f64>,
}

impl GaussianStream {
    pub fn new(seed: u64) -> Self {
        GaussianStream {
            rng: ChaCha8Rng::seed_from_u64(seed),
            spare: None,
        }
    }

    pub fn next_standard(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        let u1 = 1.0 - self.rng.gen::<f64>();
        let u2 = self.rng.gen::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = 2.0 * std::f64::consts::PI * u2;
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

/// Generates the train and test sets described by `spec`.
pub fn generate(spec: &SynthSpec) -> Result<(Dataset, Dataset)> {
    spec.validate()?;
    let mut noise = GaussianStream::new(spec.seed);
    let means: Vec<Vec<f64>> = (0..spec.n_classes).map(|c| spec.class_mean(c)).collect();
    let classes: Vec<String> = (0..spec.n_classes).map(SynthSpec::class_name).collect();

    let mut split = |total: usize| -> Result<Dataset> {
        let mut rows = Vec::with_capacity(total);
        let mut labels = Vec::with_capacity(total);
        for (class, count) in spec.per_class(total).into_iter().enumerate() {
            for _ in 0..count {
                rows.push(
                    means[class]
                        .iter()
                        .map(|m| m + spec.noise_sd * noise.next_standard())
                        .collect(),
                );
                labels.push(class);
            }
        }
        Dataset::new(rows, labels, classes.clone())
    };
    let train = split(spec.train_size)?;
    let test = split(spec.test_size)?;
    Ok((train, test))
}

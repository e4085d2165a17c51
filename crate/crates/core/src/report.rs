//! Run manifests and projection tables.
//!
//! The manifest is a flat `key = value` file whose keys follow the rows of a
//! GA parameter table (original features, individuals per generation,
//! generations run, recognition rate, final features, ...). It carries no
//! timing information so that replays are byte-identical.

use std::fmt::Write as _;
use std::io::Write;

use crate::dataset::Dataset;
use crate::ga::{Evolution, GaConfig, StopReason};
use crate::knn::FeatureMask;
use crate::pca::{project, ProjectionModel};
use crate::Result;

/// Share of the original features that were dropped, in percent.
pub fn reduction_rate(original: usize, selected: usize) -> f64 {
    if original == 0 {
        return 0.0;
    }
    (original - selected.min(original)) as f64 / original as f64 * 100.0
}

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_else(|| "none".into())
}

/// Holdout evaluation of the selected mask on a set the GA never saw.
#[derive(Debug, Clone)]
pub struct HoldoutReport {
    pub path: String,
    pub hits: usize,
    pub samples: usize,
}

#[derive(Debug, Clone)]
pub struct SelectManifest<'a> {
    pub train_path: &'a str,
    pub eval_path: &'a str,
    pub cfg: &'a GaConfig,
    pub feature_count: usize,
    pub eval_samples: usize,
    pub evolution: &'a Evolution,
    pub normalized: bool,
    pub holdout: Option<HoldoutReport>,
}

impl SelectManifest<'_> {
    pub fn render(&self) -> String {
        let cfg = self.cfg;
        let best = &self.evolution.best;
        let l = self.feature_count;
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("train_file", self.train_path.to_string());
        kv("eval_file", self.eval_path.to_string());
        kv("normalize", self.normalized.to_string());
        kv("n_original_features", l.to_string());
        kv("n_bits_per_individual", l.to_string());
        kv(
            "n_individuals_per_generation",
            cfg.population_size.to_string(),
        );
        kv(
            "generations_run",
            self.evolution.generations_run().to_string(),
        );
        kv("max_generations", cfg.max_generations.to_string());
        kv(
            "stop_reason",
            match self.evolution.stop_reason {
                StopReason::MaxGenerations => "max_generations",
                StopReason::FitnessReached => "fitness_reached",
                StopReason::Stalled => "stalled",
            }
            .to_string(),
        );
        kv(
            "distinct_evaluations",
            self.evolution.evaluations.to_string(),
        );
        kv(
            "recognition_rate_eval",
            format!("{} %", best.hits as f64 / self.eval_samples as f64 * 100.0),
        );
        kv("hits", format!("{} of {}", best.hits, self.eval_samples));
        kv("crossover_probability", cfg.crossover_prob.to_string());
        kv("mutation_probability", cfg.mutation_prob.to_string());
        kv(
            "per_bit_flip_rate",
            match cfg.per_bit_flip_rate {
                Some(r) => r.to_string(),
                None => format!("1/L = {}", cfg.flip_rate(l)),
            },
        );
        kv("n_final_features", format!("{} (of {l})", best.nf));
        kv("selected_features", best.mask().to_index_list());
        kv("best_mask", best.mask().to_string());
        kv("best_fitness", best.fitness.to_string());
        kv(
            "reduction_rate",
            format!("{:.2} %", reduction_rate(l, best.nf)),
        );
        kv("alpha", cfg.alpha.to_string());
        kv("beta", cfg.beta.to_string());
        kv("k", cfg.k.to_string());
        kv("elite_count", cfg.elite_count.to_string());
        kv("tournament_size", cfg.tournament_size.to_string());
        kv("stop_on_fitness", opt(cfg.stop_on_fitness));
        kv("stall_generations", opt(cfg.stall_generations));
        kv("random_seed", cfg.seed.to_string());
        if let Some(h) = &self.holdout {
            kv("holdout_file", h.path.clone());
            kv(
                "recognition_rate_holdout",
                format!("{} %", h.hits as f64 / h.samples as f64 * 100.0),
            );
            kv("holdout_hits", format!("{} of {}", h.hits, h.samples));
        }
        for w in cfg.warnings() {
            kv("warning", w);
        }
        s
    }
}

/// Reads a `key = value` manifest back into ordered pairs.
pub fn parse_manifest(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once(" = "))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}

/// Writes `sample_index,label_name,pc1,pc2` for every sample.
pub fn write_projection_csv(
    d: &Dataset,
    model: &ProjectionModel,
    w: &mut impl Write,
) -> Result<Vec<(f64, f64, usize)>> {
    let mut points = Vec::with_capacity(d.len());
    let mut out = String::from("sample_index,label_name,pc1,pc2\n");
    for (i, s) in d.samples().enumerate() {
        let (a, b) = project(model, s.features)?;
        let _ = writeln!(out, "{i},{},{a},{b}", csv_field(d.class_name(s.label)));
        points.push((a, b, s.label));
    }
    w.write_all(out.as_bytes())
        .map_err(|e| crate::Error::io("<projection>", e))?;
    Ok(points)
}

/// Writes raw feature pair coordinates with the same column layout.
pub fn write_pair_csv(
    d: &Dataset,
    i: usize,
    j: usize,
    w: &mut impl Write,
) -> Result<Vec<(f64, f64, usize)>> {
    let mut points = Vec::with_capacity(d.len());
    let mut out = format!(
        "sample_index,label_name,{},{}\n",
        csv_field(&d.feature_names()[i]),
        csv_field(&d.feature_names()[j])
    );
    for (n, s) in d.samples().enumerate() {
        let (a, b) = (s.features[i], s.features[j]);
        let _ = writeln!(out, "{n},{},{a},{b}", csv_field(d.class_name(s.label)));
        points.push((a, b, s.label));
    }
    w.write_all(out.as_bytes())
        .map_err(|e| crate::Error::io("<pair>", e))?;
    Ok(points)
}

/// Every unordered pair of active features, ascending.
pub fn feature_pairs(mask: &FeatureMask) -> Vec<(usize, usize)> {
    let a = mask.active();
    let mut out = Vec::new();
    for (x, &i) in a.iter().enumerate() {
        for &j in &a[x + 1..] {
            out.push((i, j));
        }
    }
    out
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

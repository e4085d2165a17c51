//! Labelled feature matrices: CSV loading, random splits and min-max scaling.
//!
//! Class ids are assigned in order of first appearance, so the first label
//! seen in a file gets id 0. Features are stored row-major as `f64`.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::File;
use std::io::Write;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Which CSV column carries the class label.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum LabelColumn {
    Name(String),
    Index(usize),
    Last,
}

impl FromStr for LabelColumn {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("last") {
            Ok(LabelColumn::Last)
        } else if let Ok(i) = s.parse::<usize>() {
            Ok(LabelColumn::Index(i))
        } else {
            Ok(LabelColumn::Name(s.to_string()))
        }
    }
}

impl fmt::Display for LabelColumn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LabelColumn::Name(n) => write!(f, "{n:?}"),
            LabelColumn::Index(i) => write!(f, "#{i}"),
            LabelColumn::Last => f.write_str("last"),
        }
    }
}

/// A borrowed view of one labelled sample.
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub features: &'a [f64],
    pub label: usize,
}

/// Immutable labelled feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    labels: Vec<usize>,
    feature_count: usize,
    classes: Vec<String>,
    feature_names: Vec<String>,
    label_name: String,
}

impl Dataset {
    /// Builds a dataset from rows and label ids into `classes`.
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<usize>, classes: Vec<String>) -> Result<Self> {
        let feature_count = rows.first().map(Vec::len).unwrap_or(0);
        if rows.len() != labels.len() {
            return Err(Error::LengthMismatch {
                expected: rows.len(),
                found: labels.len(),
            });
        }
        let mut values = Vec::with_capacity(rows.len() * feature_count);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != feature_count {
                return Err(Error::RaggedRow {
                    row: i,
                    expected: feature_count,
                    found: row.len(),
                });
            }
            values.extend(row);
        }
        Self::from_parts(values, labels, feature_count, classes)
    }

    /// Builds a dataset from rows and textual labels, assigning ids by first appearance.
    pub fn from_named(rows: Vec<Vec<f64>>, names: &[impl AsRef<str>]) -> Result<Self> {
        let (labels, classes) = assign_ids(names.iter().map(|s| s.as_ref()));
        Self::new(rows, labels, classes)
    }

    fn from_parts(
        values: Vec<f64>,
        labels: Vec<usize>,
        feature_count: usize,
        classes: Vec<String>,
    ) -> Result<Self> {
        let feature_names = (0..feature_count).map(|j| format!("f{j}")).collect();
        let d = Dataset {
            values,
            labels,
            feature_count,
            classes,
            feature_names,
            label_name: "label".to_string(),
        };
        d.validate()?;
        Ok(d)
    }

    fn validate(&self) -> Result<()> {
        if self.labels.is_empty() {
            return Err(Error::Empty("dataset has no samples".into()));
        }
        if self.feature_count == 0 {
            return Err(Error::InvalidDataset("no feature columns".into()));
        }
        if self.values.len() != self.labels.len() * self.feature_count {
            return Err(Error::InvalidDataset(
                "value buffer has the wrong size".into(),
            ));
        }
        if let Some(pos) = self.values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: pos / self.feature_count,
                column: pos % self.feature_count,
            });
        }
        if let Some(&bad) = self.labels.iter().find(|&&l| l >= self.classes.len()) {
            return Err(Error::InvalidDataset(format!(
                "label id {bad} outside vocabulary of {} classes",
                self.classes.len()
            )));
        }
        let mut seen = HashSet::new();
        for name in &self.classes {
            if name.is_empty() {
                return Err(Error::InvalidDataset("empty class name".into()));
            }
            if !seen.insert(name.as_str()) {
                return Err(Error::InvalidDataset(format!(
                    "duplicate class name {name:?}"
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn feature_count(&self) -> usize {
        self.feature_count
    }

    pub fn classes(&self) -> &[String] {
        &self.classes
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn class_name(&self, id: usize) -> &str {
        &self.classes[id]
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let start = i * self.feature_count;
        &self.values[start..start + self.feature_count]
    }

    pub fn sample(&self, i: usize) -> Sample<'_> {
        Sample {
            features: self.row(i),
            label: self.labels[i],
        }
    }

    pub fn samples(&self) -> impl Iterator<Item = Sample<'_>> + '_ {
        (0..self.len()).map(move |i| self.sample(i))
    }

    /// Number of samples per class id.
    pub fn class_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.classes.len()];
        for &l in &self.labels {
            counts[l] += 1;
        }
        counts
    }

    /// Returns the samples at `indices` (in that order), keeping the full vocabulary.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        let mut values = Vec::with_capacity(indices.len() * self.feature_count);
        let mut labels = Vec::with_capacity(indices.len());
        for &i in indices {
            values.extend_from_slice(self.row(i));
            labels.push(self.labels[i]);
        }
        Dataset {
            values,
            labels,
            feature_count: self.feature_count,
            classes: self.classes.clone(),
            feature_names: self.feature_names.clone(),
            label_name: self.label_name.clone(),
        }
    }

    /// Copy with the vocabulary replaced by `vocabulary`, which must contain
    /// every class name of `self`. Label ids are remapped by name.
    pub fn with_vocabulary(&self, vocabulary: &[String]) -> Result<Dataset> {
        let index: HashMap<&str, usize> = vocabulary
            .iter()
            .enumerate()
            .map(|(i, n)| (n.as_str(), i))
            .collect();
        let mapping = self
            .classes
            .iter()
            .map(|n| {
                index.get(n.as_str()).copied().ok_or_else(|| {
                    Error::Incompatible(format!("class {n:?} missing from vocabulary"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let mut out = self.clone();
        out.labels = self.labels.iter().map(|&l| mapping[l]).collect();
        out.classes = vocabulary.to_vec();
        out.validate()?;
        Ok(out)
    }

    /// Checks that two datasets can be used as train/test for one another.
    pub fn check_compatible(&self, other: &Dataset) -> Result<()> {
        if self.feature_count != other.feature_count {
            return Err(Error::Incompatible(format!(
                "feature counts differ ({} vs {})",
                self.feature_count, other.feature_count
            )));
        }
        if self.classes != other.classes {
            return Err(Error::Incompatible(
                "class vocabularies differ; unify them first".into(),
            ));
        }
        Ok(())
    }

    /// Sample-wise copy with features passed through `f(feature_index, value)`.
    pub(crate) fn map_values(&self, mut f: impl FnMut(usize, f64) -> f64) -> Dataset {
        let fc = self.feature_count;
        let mut out = self.clone();
        for (pos, v) in out.values.iter_mut().enumerate() {
            *v = f(pos % fc, *v);
        }
        out
    }

    /// Writes the dataset as CSV: a header row, feature columns, label column last.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv_to(&mut w).map_err(|e| Error::io(path, e))?;
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn write_csv_to(&self, w: &mut impl Write) -> std::io::Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        let mut header: Vec<&str> = self.feature_names.iter().map(String::as_str).collect();
        header.push(&self.label_name);
        wtr.write_record(&header)?;
        let mut record = Vec::with_capacity(self.feature_count + 1);
        for s in self.samples() {
            record.clear();
            record.extend(s.features.iter().map(|v| v.to_string()));
            record.push(self.classes[s.label].clone());
            wtr.write_record(&record)?;
        }
        wtr.flush()
    }

    /// Reads a dataset from CSV. Blank lines are skipped; the label column
    /// may sit anywhere.
    pub fn load_csv(path: impl AsRef<Path>, label: &LabelColumn, has_header: bool) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(file, label, has_header)
    }

    pub fn read_csv(
        reader: impl std::io::Read,
        label: &LabelColumn,
        has_header: bool,
    ) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(false)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut records = rdr.records();

        let mut header: Option<Vec<String>> = None;
        let mut first_data = None;
        if has_header {
            match records.next() {
                Some(r) => {
                    let r = r?;
                    let names: Vec<String> = r.iter().map(str::to_string).collect();
                    let mut seen = HashSet::new();
                    for n in &names {
                        if !seen.insert(n.as_str()) {
                            return Err(Error::DuplicateHeader(n.clone()));
                        }
                    }
                    header = Some(names);
                }
                None => return Err(Error::Empty("file has no rows".into())),
            }
        } else {
            first_data = records.next().transpose()?;
            if first_data.is_none() {
                return Err(Error::Empty("file has no rows".into()));
            }
        }

        let width = header
            .as_ref()
            .map(Vec::len)
            .or_else(|| first_data.as_ref().map(|r| r.len()))
            .unwrap_or(0);
        if width < 2 {
            return Err(Error::InvalidDataset(
                "need at least one feature column and a label column".into(),
            ));
        }
        let label_idx = match label {
            LabelColumn::Last => width - 1,
            LabelColumn::Index(i) if *i < width => *i,
            LabelColumn::Index(_) => return Err(Error::MissingLabelColumn(label.to_string())),
            LabelColumn::Name(n) => header
                .as_ref()
                .and_then(|h| h.iter().position(|c| c == n))
                .ok_or_else(|| Error::MissingLabelColumn(label.to_string()))?,
        };

        let feature_count = width - 1;
        let mut values = Vec::new();
        let mut names = Vec::new();
        for rec in first_data.into_iter().map(Ok).chain(records) {
            let rec = rec?;
            let row = rec.position().map(|p| p.line() as usize).unwrap_or(0);
            if rec.len() != width {
                return Err(Error::RaggedRow {
                    row,
                    expected: width,
                    found: rec.len(),
                });
            }
            for (column, cell) in rec.iter().enumerate() {
                if column == label_idx {
                    if cell.is_empty() {
                        return Err(Error::InvalidDataset(format!("row {row}: empty label")));
                    }
                    names.push(cell.to_string());
                    continue;
                }
                let v: f64 = cell.parse().map_err(|_| Error::NonNumeric {
                    row,
                    column,
                    value: cell.to_string(),
                })?;
                if !v.is_finite() {
                    return Err(Error::NonFinite { row, column });
                }
                values.push(v);
            }
        }
        if names.is_empty() {
            return Err(Error::Empty("file has a header but no data rows".into()));
        }

        let (labels, classes) = assign_ids(names.iter().map(String::as_str));
        let mut d = Self::from_parts(values, labels, feature_count, classes)?;
        if let Some(h) = header {
            d.label_name = h[label_idx].clone();
            d.feature_names = h
                .into_iter()
                .enumerate()
                .filter(|&(j, _)| j != label_idx)
                .map(|(_, n)| n)
                .collect();
        }
        Ok(d)
    }
}

fn assign_ids<'a>(names: impl Iterator<Item = &'a str>) -> (Vec<usize>, Vec<String>) {
    let mut ids: HashMap<&str, usize> = HashMap::new();
    let mut classes = Vec::new();
    let labels = names
        .map(|n| {
            *ids.entry(n).or_insert_with(|| {
                classes.push(n.to_string());
                classes.len() - 1
            })
        })
        .collect();
    (labels, classes)
}

/// Merges the vocabularies of `a` and `b` (a's classes first, then b's new
/// ones in first-appearance order) and returns both relabelled onto it.
pub fn unify_vocabulary(a: &Dataset, b: &Dataset) -> Result<(Dataset, Dataset)> {
    let mut vocab = a.classes.clone();
    for c in &b.classes {
        if !vocab.contains(c) {
            vocab.push(c.clone());
        }
    }
    Ok((a.with_vocabulary(&vocab)?, b.with_vocabulary(&vocab)?))
}

/// Uniform random train/test partition. Both parts keep input order and the
/// full class vocabulary.
pub fn split_random(d: &Dataset, test_count: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    let n = d.len();
    if test_count == 0 || test_count >= n {
        return Err(Error::SplitOutOfRange {
            test_count,
            total: n,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let mut test_idx = order[..test_count].to_vec();
    let mut train_idx = order[test_count..].to_vec();
    test_idx.sort_unstable();
    train_idx.sort_unstable();
    Ok((d.subset(&train_idx), d.subset(&test_idx)))
}

/// Per-class proportional partition; per-class test counts follow the
/// largest-remainder rule so they sum to `test_count`.
pub fn split_stratified(d: &Dataset, test_count: usize, seed: u64) -> Result<(Dataset, Dataset)> {
    let n = d.len();
    if test_count == 0 || test_count >= n {
        return Err(Error::SplitOutOfRange {
            test_count,
            total: n,
        });
    }
    let counts = d.class_counts();
    let mut quota: Vec<usize> = counts.iter().map(|&c| c * test_count / n).collect();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    // largest remainder first, lower class id on ties
    order.sort_by_key(|&c| (std::cmp::Reverse(counts[c] * test_count % n), c));
    let mut missing = test_count - quota.iter().sum::<usize>();
    for &c in order.iter().cycle().take(counts.len() * 2) {
        if missing == 0 {
            break;
        }
        if quota[c] < counts[c] {
            quota[c] += 1;
            missing -= 1;
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut test_idx = Vec::with_capacity(test_count);
    for (class, &q) in quota.iter().enumerate() {
        let mut members: Vec<usize> = (0..n).filter(|&i| d.label(i) == class).collect();
        members.shuffle(&mut rng);
        test_idx.extend_from_slice(&members[..q]);
    }
    test_idx.sort_unstable();
    let in_test: HashSet<usize> = test_idx.iter().copied().collect();
    let train_idx: Vec<usize> = (0..n).filter(|i| !in_test.contains(i)).collect();
    Ok((d.subset(&train_idx), d.subset(&test_idx)))
}

/// Per-feature range observed on the training set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeatureBounds {
    pub min: f64,
    pub max: f64,
}

impl FeatureBounds {
    pub fn scale(&self, v: f64) -> f64 {
        let span = self.max - self.min;
        if span > 0.0 {
            (v - self.min) / span
        } else {
            0.0
        }
    }
}

/// Min-max scaling fitted on `train` and applied unchanged to `others`.
/// Constant training features map to 0; values are not clamped.
pub fn normalize_minmax(
    train: &Dataset,
    others: &[&Dataset],
) -> Result<(Dataset, Vec<Dataset>, Vec<FeatureBounds>)> {
    let fc = train.feature_count();
    let mut bounds = vec![
        FeatureBounds {
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        };
        fc
    ];
    for s in train.samples() {
        for (b, &v) in bounds.iter_mut().zip(s.features) {
            b.min = b.min.min(v);
            b.max = b.max.max(v);
        }
    }
    let mut scaled = Vec::with_capacity(others.len());
    for o in others {
        if o.feature_count() != fc {
            return Err(Error::LengthMismatch {
                expected: fc,
                found: o.feature_count(),
            });
        }
        scaled.push(o.map_values(|j, v| bounds[j].scale(v)));
    }
    Ok((train.map_values(|j, v| bounds[j].scale(v)), scaled, bounds))
}

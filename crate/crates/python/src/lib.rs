//! Python bindings for `nnga`.
//!
//! ```python
//! import pynnga
//! train, test = pynnga.generate_synthetic(seed=1)
//! run = pynnga.evolve(train, test, pynnga.GaConfig(seed=1))
//! print(run.best.mask.active, run.best.hits)
//! ```

use pyo3::exceptions::{PyIndexError, PyOSError, PyValueError};
use pyo3::prelude::*;

use nnga::dataset::{self, LabelColumn};
use nnga::ga::{self, write_trace_csv};
use nnga::{knn, pca, synth};

type RecognitionTuple = (usize, f64, Vec<(usize, usize)>);

fn to_py(err: nnga::Error) -> PyErr {
    match err {
        nnga::Error::Io { .. } => PyOSError::new_err(err.to_string()),
        other => PyValueError::new_err(other.to_string()),
    }
}

/// Labelled feature matrix; class ids follow first appearance of each label.
#[pyclass(name = "Dataset", module = "pynnga", skip_from_py_object)]
#[derive(Clone)]
pub struct PyDataset {
    inner: nnga::Dataset,
}

#[pymethods]
impl PyDataset {
    #[new]
    fn new(rows: Vec<Vec<f64>>, labels: Vec<String>) -> PyResult<Self> {
        let inner = nnga::Dataset::from_named(rows, &labels).map_err(to_py)?;
        Ok(PyDataset { inner })
    }

    /// `label_column` is a header name, a 0-based index, or "last".
    #[staticmethod]
    #[pyo3(signature = (path, label_column = "label", has_header = true))]
    fn load_csv(path: &str, label_column: &str, has_header: bool) -> PyResult<Self> {
        let label: LabelColumn = label_column.parse().expect("infallible");
        let inner = nnga::Dataset::load_csv(path, &label, has_header).map_err(to_py)?;
        Ok(PyDataset { inner })
    }

    fn write_csv(&self, path: &str) -> PyResult<()> {
        self.inner.write_csv(path).map_err(to_py)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn feature_count(&self) -> usize {
        self.inner.feature_count()
    }

    #[getter]
    fn classes(&self) -> Vec<String> {
        self.inner.classes().to_vec()
    }

    #[getter]
    fn labels(&self) -> Vec<usize> {
        self.inner.labels().to_vec()
    }

    fn row(&self, i: usize) -> PyResult<Vec<f64>> {
        if i >= self.inner.len() {
            return Err(PyIndexError::new_err(format!("row {i} out of range")));
        }
        Ok(self.inner.row(i).to_vec())
    }

    #[pyo3(signature = (test_count, seed, stratified = false))]
    fn split(&self, test_count: usize, seed: u64, stratified: bool) -> PyResult<(Self, Self)> {
        let (a, b) = if stratified {
            dataset::split_stratified(&self.inner, test_count, seed)
        } else {
            dataset::split_random(&self.inner, test_count, seed)
        }
        .map_err(to_py)?;
        Ok((PyDataset { inner: a }, PyDataset { inner: b }))
    }

    /// Min-max scaling fitted on this set and applied to `others`.
    fn normalize_minmax(&self, others: Vec<PyRef<'_, PyDataset>>) -> PyResult<(Self, Vec<Self>)> {
        let refs: Vec<&nnga::Dataset> = others.iter().map(|d| &d.inner).collect();
        let (t, o, _) = dataset::normalize_minmax(&self.inner, &refs).map_err(to_py)?;
        Ok((
            PyDataset { inner: t },
            o.into_iter().map(|inner| PyDataset { inner }).collect(),
        ))
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset({} samples x {} features, {} classes)",
            self.inner.len(),
            self.inner.feature_count(),
            self.inner.class_count()
        )
    }
}

#[pyclass(name = "FeatureMask", module = "pynnga", skip_from_py_object)]
#[derive(Clone)]
pub struct PyFeatureMask {
    inner: knn::FeatureMask,
}

#[pymethods]
impl PyFeatureMask {
    /// Accepts a '0'/'1' string of the given length or a comma-separated index list.
    #[new]
    fn new(text: &str, length: usize) -> PyResult<Self> {
        Ok(PyFeatureMask {
            inner: knn::FeatureMask::parse(text, length).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn full(length: usize) -> Self {
        PyFeatureMask {
            inner: knn::FeatureMask::full(length),
        }
    }

    #[staticmethod]
    fn from_indices(length: usize, indices: Vec<usize>) -> PyResult<Self> {
        Ok(PyFeatureMask {
            inner: knn::FeatureMask::from_indices(length, &indices).map_err(to_py)?,
        })
    }

    #[getter]
    fn active(&self) -> Vec<usize> {
        self.inner.active().to_vec()
    }

    #[getter]
    fn active_count(&self) -> usize {
        self.inner.active_count()
    }

    #[getter]
    fn bits(&self) -> Vec<bool> {
        self.inner.bits().to_vec()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __str__(&self) -> String {
        self.inner.to_string()
    }

    fn __repr__(&self) -> String {
        format!("FeatureMask('{}')", self.inner.to_index_list())
    }

    fn __eq__(&self, other: PyRef<'_, PyFeatureMask>) -> bool {
        self.inner == other.inner
    }
}

#[pyclass(name = "GaConfig", module = "pynnga", skip_from_py_object)]
#[derive(Clone)]
pub struct PyGaConfig {
    inner: ga::GaConfig,
}

#[pymethods]
impl PyGaConfig {
    #[new]
    #[pyo3(signature = (
        population_size = 50,
        max_generations = 814,
        crossover_prob = 1.0,
        mutation_prob = 0.9,
        per_bit_flip_rate = None,
        alpha = 0.6,
        beta = 0.6,
        k = 1,
        seed = 12957,
        elite_count = 1,
        tournament_size = 2,
        stop_on_fitness = None,
        stall_generations = None,
        parallel = true,
    ))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        population_size: usize,
        max_generations: usize,
        crossover_prob: f64,
        mutation_prob: f64,
        per_bit_flip_rate: Option<f64>,
        alpha: f64,
        beta: f64,
        k: usize,
        seed: u64,
        elite_count: usize,
        tournament_size: usize,
        stop_on_fitness: Option<f64>,
        stall_generations: Option<usize>,
        parallel: bool,
    ) -> PyResult<Self> {
        let inner = ga::GaConfig {
            population_size,
            max_generations,
            crossover_prob,
            mutation_prob,
            per_bit_flip_rate,
            alpha,
            beta,
            k,
            seed,
            elite_count,
            tournament_size,
            stop_on_fitness,
            stall_generations,
            parallel,
        };
        inner.validate().map_err(to_py)?;
        Ok(PyGaConfig { inner })
    }

    #[staticmethod]
    fn lot() -> Self {
        PyGaConfig {
            inner: ga::GaConfig::lot(),
        }
    }

    #[staticmethod]
    fn rgb() -> Self {
        PyGaConfig {
            inner: ga::GaConfig::rgb(),
        }
    }

    fn warnings(&self) -> Vec<String> {
        self.inner.warnings()
    }

    #[getter]
    fn population_size(&self) -> usize {
        self.inner.population_size
    }

    #[getter]
    fn max_generations(&self) -> usize {
        self.inner.max_generations
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn beta(&self) -> f64 {
        self.inner.beta
    }

    #[getter]
    fn k(&self) -> usize {
        self.inner.k
    }

    #[getter]
    fn seed(&self) -> u64 {
        self.inner.seed
    }

    fn __repr__(&self) -> String {
        format!("{:?}", self.inner)
    }
}

#[pyclass(name = "Individual", module = "pynnga", frozen)]
pub struct PyIndividual {
    #[pyo3(get)]
    fitness: f64,
    #[pyo3(get)]
    hits: usize,
    #[pyo3(get)]
    nf: usize,
    mask: knn::FeatureMask,
}

#[pymethods]
impl PyIndividual {
    #[getter]
    fn mask(&self) -> PyFeatureMask {
        PyFeatureMask {
            inner: self.mask.clone(),
        }
    }

    fn __repr__(&self) -> String {
        format!(
            "Individual(fitness={}, hits={}, nf={}, features=[{}])",
            self.fitness,
            self.hits,
            self.nf,
            self.mask.to_index_list()
        )
    }
}

impl From<&ga::Individual> for PyIndividual {
    fn from(i: &ga::Individual) -> Self {
        PyIndividual {
            fitness: i.fitness,
            hits: i.hits,
            nf: i.nf,
            mask: i.mask(),
        }
    }
}

#[pyclass(name = "Evolution", module = "pynnga", frozen)]
pub struct PyEvolution {
    inner: ga::Evolution,
}

#[pymethods]
impl PyEvolution {
    #[getter]
    fn best(&self) -> PyIndividual {
        PyIndividual::from(&self.inner.best)
    }

    #[getter]
    fn generations_run(&self) -> usize {
        self.inner.generations_run()
    }

    /// Per-generation `(generation, best, median, min, best_nf, best_hits)` tuples.
    #[getter]
    fn trace(&self) -> Vec<(usize, f64, f64, f64, usize, usize)> {
        self.inner
            .trace
            .iter()
            .map(|s| {
                (
                    s.generation,
                    s.best_fitness,
                    s.median_fitness,
                    s.min_fitness,
                    s.best_nf,
                    s.best_hits,
                )
            })
            .collect()
    }

    /// The trace in the CLI's CSV layout.
    fn trace_csv(&self) -> String {
        let mut out = Vec::new();
        write_trace_csv(&self.inner.trace, &mut out).expect("writing to memory");
        String::from_utf8(out).expect("ascii")
    }
}

#[pyclass(name = "ProjectionModel", module = "pynnga", frozen)]
pub struct PyProjectionModel {
    inner: pca::ProjectionModel,
}

#[pymethods]
impl PyProjectionModel {
    #[getter]
    fn eigenvalues(&self) -> (f64, f64) {
        (self.inner.eigenvalue1, self.inner.eigenvalue2)
    }

    #[getter]
    fn axis1(&self) -> Vec<f64> {
        self.inner.axis1.clone()
    }

    #[getter]
    fn axis2(&self) -> Vec<f64> {
        self.inner.axis2.clone()
    }

    #[getter]
    fn mean(&self) -> Vec<f64> {
        self.inner.mean.clone()
    }

    fn project(&self, x: Vec<f64>) -> PyResult<(f64, f64)> {
        pca::project(&self.inner, &x).map_err(to_py)
    }
}

#[pyfunction]
fn masked_distance(x: Vec<f64>, m: Vec<f64>, mask: PyRef<'_, PyFeatureMask>) -> PyResult<f64> {
    knn::masked_distance(&x, &m, &mask.inner).map_err(to_py)
}

/// `(sample_index, distance, label)` for the k nearest training samples.
#[pyfunction]
fn k_nearest(
    train: PyRef<'_, PyDataset>,
    x: Vec<f64>,
    k: usize,
    mask: PyRef<'_, PyFeatureMask>,
) -> PyResult<Vec<(usize, f64, usize)>> {
    Ok(knn::k_nearest(&train.inner, &x, k, &mask.inner)
        .map_err(to_py)?
        .into_iter()
        .map(|n| (n.sample_index, n.distance, n.label))
        .collect())
}

#[pyfunction]
fn classify(
    train: PyRef<'_, PyDataset>,
    x: Vec<f64>,
    k: usize,
    mask: PyRef<'_, PyFeatureMask>,
) -> PyResult<usize> {
    knn::classify(&train.inner, &x, k, &mask.inner).map_err(to_py)
}

/// `(hits, rate, [(predicted, actual), ...])`.
#[pyfunction]
fn recognition_rate(
    train: PyRef<'_, PyDataset>,
    test: PyRef<'_, PyDataset>,
    k: usize,
    mask: PyRef<'_, PyFeatureMask>,
) -> PyResult<RecognitionTuple> {
    let r = knn::recognition_rate(&train.inner, &test.inner, k, &mask.inner).map_err(to_py)?;
    Ok((r.hits, r.rate, r.per_sample))
}

#[pyfunction]
fn fitness(
    mask: PyRef<'_, PyFeatureMask>,
    train: PyRef<'_, PyDataset>,
    eval_set: PyRef<'_, PyDataset>,
    config: PyRef<'_, PyGaConfig>,
) -> PyResult<PyIndividual> {
    let ch = ga::Chromosome::from(&mask.inner);
    let ind = ga::fitness(&ch, &train.inner, &eval_set.inner, &config.inner).map_err(to_py)?;
    Ok(PyIndividual::from(&ind))
}

/// Runs the GA with the GIL released.
#[pyfunction]
fn evolve(
    py: Python<'_>,
    train: PyRef<'_, PyDataset>,
    eval_set: PyRef<'_, PyDataset>,
    config: PyRef<'_, PyGaConfig>,
) -> PyResult<PyEvolution> {
    let (train, eval_set, cfg) = (
        train.inner.clone(),
        eval_set.inner.clone(),
        config.inner.clone(),
    );
    let inner = py
        .detach(move || ga::evolve(&train, &eval_set, &cfg))
        .map_err(to_py)?;
    Ok(PyEvolution { inner })
}

#[pyfunction]
#[pyo3(signature = (train, eval_set, config, max_features = ga::DEFAULT_MAX_EXHAUSTIVE))]
fn exhaustive_best(
    py: Python<'_>,
    train: PyRef<'_, PyDataset>,
    eval_set: PyRef<'_, PyDataset>,
    config: PyRef<'_, PyGaConfig>,
    max_features: usize,
) -> PyResult<PyIndividual> {
    let (train, eval_set, cfg) = (
        train.inner.clone(),
        eval_set.inner.clone(),
        config.inner.clone(),
    );
    let r = py
        .detach(move || ga::exhaustive_best(&train, &eval_set, &cfg, max_features))
        .map_err(to_py)?;
    Ok(PyIndividual {
        fitness: r.fitness,
        hits: r.hits,
        nf: r.nf,
        mask: r.mask,
    })
}

#[pyfunction]
#[pyo3(signature = (dataset, mask = None))]
fn fit_pca2(
    dataset: PyRef<'_, PyDataset>,
    mask: Option<PyRef<'_, PyFeatureMask>>,
) -> PyResult<PyProjectionModel> {
    let inner = pca::fit_pca2(&dataset.inner, mask.as_ref().map(|m| &m.inner)).map_err(to_py)?;
    Ok(PyProjectionModel { inner })
}

/// Planted-feature train/test pair; defaults give 14 classes, 117 features, 187/50 samples.
#[pyfunction]
#[pyo3(signature = (
    n_classes = 14,
    n_features = 117,
    informative = vec![70, 101, 112],
    class_separation = 10.0,
    noise_sd = 1.0,
    train_size = 187,
    test_size = 50,
    seed = 12957,
))]
#[allow(clippy::too_many_arguments)]
fn generate_synthetic(
    n_classes: usize,
    n_features: usize,
    informative: Vec<usize>,
    class_separation: f64,
    noise_sd: f64,
    train_size: usize,
    test_size: usize,
    seed: u64,
) -> PyResult<(PyDataset, PyDataset)> {
    let spec = synth::SynthSpec {
        n_classes,
        n_features,
        informative,
        class_separation,
        noise_sd,
        train_size,
        test_size,
        seed,
    };
    let (a, b) = synth::generate(&spec).map_err(to_py)?;
    Ok((PyDataset { inner: a }, PyDataset { inner: b }))
}

#[pymodule]
fn pynnga(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDataset>()?;
    m.add_class::<PyFeatureMask>()?;
    m.add_class::<PyGaConfig>()?;
    m.add_class::<PyIndividual>()?;
    m.add_class::<PyEvolution>()?;
    m.add_class::<PyProjectionModel>()?;
    m.add_function(wrap_pyfunction!(masked_distance, m)?)?;
    m.add_function(wrap_pyfunction!(k_nearest, m)?)?;
    m.add_function(wrap_pyfunction!(classify, m)?)?;
    m.add_function(wrap_pyfunction!(recognition_rate, m)?)?;
    m.add_function(wrap_pyfunction!(fitness, m)?)?;
    m.add_function(wrap_pyfunction!(evolve, m)?)?;
    m.add_function(wrap_pyfunction!(exhaustive_best, m)?)?;
    m.add_function(wrap_pyfunction!(fit_pca2, m)?)?;
    m.add_function(wrap_pyfunction!(generate_synthetic, m)?)?;
    Ok(())
}

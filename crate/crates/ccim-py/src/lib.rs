//! Python bindings: dictionary building, the intervention layer, the
//! synthetic benchmark, and model training/evaluation.
//!
//! Configs cross the boundary as JSON strings (`json.dumps(...)` on the
//! Python side); vectors as plain lists of floats.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use ccim_core::ablation;
use ccim_core::ccim;
use ccim_core::dictionary;
use ccim_core::matrix::Matrix;
use ccim_core::metrics;
use ccim_core::model;
use ccim_core::synthetic;

fn err(e: ccim_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix_from_rows(rows: Vec<Vec<f64>>) -> PyResult<Matrix> {
    Matrix::from_rows(rows).map_err(err)
}

fn rows_of(m: &Matrix) -> Vec<Vec<f64>> {
    m.iter_rows().map(|r| r.to_vec()).collect()
}

fn parse_kind(name: &str) -> PyResult<ccim::AttentionKind> {
    match name {
        "dot_product" => Ok(ccim::AttentionKind::DotProduct),
        "additive" => Ok(ccim::AttentionKind::Additive),
        "uniform" => Ok(ccim::AttentionKind::Uniform),
        "none" => Ok(ccim::AttentionKind::None),
        other => Err(PyValueError::new_err(format!(
            "unknown attention kind `{other}`; use dot_product, additive, uniform or none"
        ))),
    }
}

/// Stratified confounder dictionary: prototypes plus empirical priors.
#[pyclass(name = "ConfounderDictionary")]
struct PyDictionary {
    inner: dictionary::ConfounderDictionary,
}

#[pymethods]
impl PyDictionary {
    /// Cluster feature rows into `n` strata and average each cluster.
    #[staticmethod]
    #[pyo3(signature = (features, n, pca_dims=None, seed=0))]
    fn build(
        features: Vec<Vec<f64>>,
        n: usize,
        pca_dims: Option<usize>,
        seed: u64,
    ) -> PyResult<Self> {
        let features = matrix_from_rows(features)?;
        let d_p =
            pca_dims.unwrap_or_else(|| dictionary::default_pca_dims(features.rows(), features.cols()));
        let inner = dictionary::build_dictionary(&features, n, d_p, seed).map_err(err)?;
        Ok(PyDictionary { inner })
    }

    /// Random prototypes with uniform priors (ablation).
    #[staticmethod]
    #[pyo3(signature = (n, d, seed=0, scale=1.0))]
    fn random(n: usize, d: usize, seed: u64, scale: f64) -> PyResult<Self> {
        let inner = dictionary::random_dictionary(n, d, seed, scale).map_err(err)?;
        Ok(PyDictionary { inner })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        let inner = dictionary::deserialize_dictionary(path.as_ref()).map_err(err)?;
        Ok(PyDictionary { inner })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        dictionary::serialize_dictionary(&self.inner, path.as_ref()).map_err(err)
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    fn priors(&self) -> Vec<f64> {
        self.inner.priors().to_vec()
    }

    fn prototypes(&self) -> Vec<Vec<f64>> {
        rows_of(self.inner.prototypes())
    }

    fn fingerprint(&self) -> String {
        self.inner.fingerprint()
    }

    fn __repr__(&self) -> String {
        format!(
            "ConfounderDictionary(n={}, dim={}, source={:?})",
            self.inner.n(),
            self.inner.dim(),
            self.inner.source()
        )
    }
}

/// One split of a synthetic confounded dataset.
#[pyclass(name = "Dataset")]
struct PyDataset {
    inner: synthetic::Dataset,
}

#[pymethods]
impl PyDataset {
    fn __len__(&self) -> usize {
        self.inner.len()
    }

    #[getter]
    fn split(&self) -> String {
        self.inner.split.as_str().to_string()
    }

    fn labels(&self) -> Vec<usize> {
        self.inner.samples.iter().map(|s| s.label).collect()
    }

    fn context_ids(&self) -> Vec<usize> {
        self.inner.samples.iter().map(|s| s.context_id).collect()
    }

    /// Context rows for dictionary building; `mask_subject=False` keeps any
    /// generated subject leakage in place.
    #[pyo3(signature = (mask_subject=true))]
    fn context_features(&self, mask_subject: bool) -> Vec<Vec<f64>> {
        rows_of(&synthetic::context_features(&self.inner, mask_subject))
    }

    /// Per-context one-vs-rest entropy audit for one emotion.
    fn bias_audit<'py>(&self, py: Python<'py>, emotion: usize) -> PyResult<Bound<'py, PyDict>> {
        let report = synthetic::bias_audit(&self.inner, emotion).map_err(err)?;
        let out = PyDict::new(py);
        out.set_item("emotion", report.emotion)?;
        out.set_item("per_context_entropy", report.per_context_entropy)?;
        out.set_item("zero_entropy_fraction", report.zero_entropy_fraction)?;
        out.set_item("co_occurrence", report.co_occurrence)?;
        Ok(out)
    }

    fn mutual_information(&self) -> f64 {
        synthetic::empirical_mutual_information(&self.inner)
    }

    fn fingerprint(&self) -> String {
        self.inner.fingerprint()
    }

    fn __repr__(&self) -> String {
        format!(
            "Dataset(split={}, len={}, contexts={}, emotions={})",
            self.inner.split.as_str(),
            self.inner.len(),
            self.inner.config.n_contexts,
            self.inner.config.n_emotions
        )
    }
}

/// Generate a (train, test) pair from a generator config JSON string.
#[pyfunction]
#[pyo3(signature = (config_json, seed=0))]
fn generate(config_json: &str, seed: u64) -> PyResult<(PyDataset, PyDataset)> {
    let config: synthetic::GeneratorConfig = serde_json::from_str(config_json)
        .map_err(|e| PyValueError::new_err(format!("bad generator config: {e}")))?;
    let (train, test) = synthetic::generate(&config, seed).map_err(err)?;
    Ok((PyDataset { inner: train }, PyDataset { inner: test }))
}

/// The causal intervention layer bound to one dictionary.
#[pyclass(name = "CcimLayer")]
struct PyCcimLayer {
    dict: dictionary::ConfounderDictionary,
    params: ccim::CcimParams,
    kind: ccim::AttentionKind,
    use_prior: bool,
}

#[pymethods]
impl PyCcimLayer {
    #[new]
    #[pyo3(signature = (dictionary, joint_dim, out_dim, attn_dim, seed=0, init_scale=0.1, kind="dot_product", use_prior=true))]
    #[allow(clippy::too_many_arguments)]
    fn new(
        dictionary: &PyDictionary,
        joint_dim: usize,
        out_dim: usize,
        attn_dim: usize,
        seed: u64,
        init_scale: f64,
        kind: &str,
        use_prior: bool,
    ) -> PyResult<Self> {
        let dims = ccim::CcimDims::new(
            dictionary.inner.dim(),
            joint_dim,
            out_dim,
            attn_dim,
            dictionary.inner.n(),
        )
        .map_err(err)?;
        let params = ccim::init_params(dims, seed, init_scale).map_err(err)?;
        Ok(PyCcimLayer {
            dict: dictionary.inner.clone(),
            params,
            kind: parse_kind(kind)?,
            use_prior,
        })
    }

    fn forward(&self, joint: Vec<f64>) -> PyResult<Vec<f64>> {
        let (out, _) = ccim::ccim_forward(&joint, &self.dict, &self.params, self.kind, self.use_prior)
            .map_err(err)?;
        Ok(out)
    }

    fn attention_weights(&self, joint: Vec<f64>) -> PyResult<Vec<f64>> {
        ccim::attention_weights(&joint, &self.dict, &self.params, self.kind).map_err(err)
    }

    fn expectation(&self, joint: Vec<f64>) -> PyResult<Vec<f64>> {
        let weights =
            ccim::attention_weights(&joint, &self.dict, &self.params, self.kind).map_err(err)?;
        ccim::intervention_expectation(&weights, &self.dict, self.use_prior).map_err(err)
    }
}

/// A trained two-branch model (optionally with the intervention layer).
#[pyclass(name = "Model")]
struct PyModel {
    state: model::TrainState,
}

fn report_to_dict<'py>(
    py: Python<'py>,
    report: &metrics::MetricsReport,
) -> PyResult<Bound<'py, PyDict>> {
    let out = PyDict::new(py);
    out.set_item("accuracy", report.accuracy)?;
    out.set_item("map", report.map)?;
    out.set_item("per_class_ap", report.per_class_ap.clone())?;
    out.set_item("loss_curve", report.loss_curve.clone())?;
    Ok(out)
}

#[pymethods]
impl PyModel {
    /// Train from a model config JSON string. CCIM configs need the
    /// dictionary.
    #[staticmethod]
    #[pyo3(signature = (config_json, train_data, dictionary=None))]
    fn train(
        config_json: &str,
        train_data: &PyDataset,
        dictionary: Option<&PyDictionary>,
    ) -> PyResult<Self> {
        let config: model::ModelConfig = serde_json::from_str(config_json)
            .map_err(|e| PyValueError::new_err(format!("bad model config: {e}")))?;
        let state = model::train(&config, &train_data.inner, dictionary.map(|d| &d.inner))
            .map_err(err)?;
        Ok(PyModel { state })
    }

    fn evaluate<'py>(&self, py: Python<'py>, data: &PyDataset) -> PyResult<Bound<'py, PyDict>> {
        let report = model::evaluate(&self.state, &data.inner).map_err(err)?;
        report_to_dict(py, &report)
    }

    fn loss_curve(&self) -> Vec<f64> {
        self.state.loss_curve.clone()
    }

    fn save(&self, path: &str) -> PyResult<()> {
        let text = model::checkpoint_to_json(&self.state).map_err(err)?;
        std::fs::write(path, text).map_err(|e| PyValueError::new_err(e.to_string()))
    }
}

/// Run matched ablation variants; returns a list of per-run dicts.
#[pyfunction]
#[pyo3(signature = (config_json, train_data, test_data, variants, seeds, dict_n=8))]
fn run_ablation<'py>(
    py: Python<'py>,
    config_json: &str,
    train_data: &PyDataset,
    test_data: &PyDataset,
    variants: Vec<String>,
    seeds: Vec<u64>,
    dict_n: usize,
) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let config: model::ModelConfig = serde_json::from_str(config_json)
        .map_err(|e| PyValueError::new_err(format!("bad model config: {e}")))?;
    let variants: Vec<ablation::Variant> = variants
        .iter()
        .map(|v| ablation::Variant::parse(v))
        .collect::<ccim_core::Result<_>>()
        .map_err(err)?;
    let table = ablation::run_ablation(
        &config,
        &train_data.inner,
        &test_data.inner,
        &variants,
        &seeds,
        dict_n,
        None,
    )
    .map_err(err)?;
    let mut rows = Vec::new();
    for record in &table.records {
        let row = report_to_dict(py, &record.report)?;
        row.set_item("variant", record.variant.clone())?;
        row.set_item("seed", record.seed)?;
        row.set_item("n", record.n)?;
        rows.push(row);
    }
    Ok(rows)
}

#[pyfunction]
fn average_precision(scores: Vec<f64>, labels: Vec<bool>) -> PyResult<f64> {
    metrics::average_precision(&scores, &labels).map_err(err)
}

#[pyfunction]
fn binary_entropy(p: f64) -> f64 {
    synthetic::binary_entropy(p)
}

#[pymodule]
fn ccim_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyDictionary>()?;
    m.add_class::<PyDataset>()?;
    m.add_class::<PyCcimLayer>()?;
    m.add_class::<PyModel>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(run_ablation, m)?)?;
    m.add_function(wrap_pyfunction!(average_precision, m)?)?;
    m.add_function(wrap_pyfunction!(binary_entropy, m)?)?;
    m.add("__version__", env!("CARGO_PKG_VERSION"))?;
    Ok(())
}

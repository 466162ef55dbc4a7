//! Stratified confounder dictionary: context prototypes with empirical
//! priors.
//!
//! Prototypes are built by clustering masked context features in a reduced
//! PCA space, then averaging the members of each cluster back in the
//! original feature space, so downstream projections see full-width
//! prototypes. Priors are cluster occupancy fractions.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kmeans::{kmeans_fit, kmeanspp_init};
use crate::matrix::Matrix;
use crate::pca::{pca_fit, pca_project};

pub const DICTIONARY_SCHEMA_VERSION: &str = "ccim-dict/1";

/// Default PCA width when callers do not pick one: `min(64, d, n_samples)`.
pub fn default_pca_dims(n_samples: usize, dim: usize) -> usize {
    64usize.min(dim).min(n_samples)
}

/// Preset dictionary sizes named after the benchmark corpora they mirror.
pub fn preset_size(name: &str) -> Option<usize> {
    match name.to_ascii_lowercase().as_str() {
        "emotic" => Some(256),
        "caer-s" | "caers" => Some(128),
        "groupwalk" => Some(256),
        _ => None,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DictionarySource {
    Clustered,
    Random,
}

/// `n` context prototypes (rows, original feature space) with priors that
/// sum to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfounderDictionary {
    prototypes: Matrix,
    priors: Vec<f64>,
    source: DictionarySource,
}

impl ConfounderDictionary {
    pub fn new(prototypes: Matrix, priors: Vec<f64>, source: DictionarySource) -> Result<Self> {
        let dict = ConfounderDictionary {
            prototypes,
            priors,
            source,
        };
        dict.validate()?;
        Ok(dict)
    }

    pub fn n(&self) -> usize {
        self.prototypes.rows()
    }

    pub fn dim(&self) -> usize {
        self.prototypes.cols()
    }

    pub fn prototype(&self, i: usize) -> &[f64] {
        self.prototypes.row(i)
    }

    pub fn prototypes(&self) -> &Matrix {
        &self.prototypes
    }

    pub fn priors(&self) -> &[f64] {
        &self.priors
    }

    pub fn source(&self) -> DictionarySource {
        self.source
    }

    /// Short content fingerprint used to tie checkpoints to the dictionary
    /// they were trained with.
    pub fn fingerprint(&self) -> String {
        use sha2::{Digest, Sha256};
        let mut hasher = Sha256::new();
        for v in self.prototypes.as_slice() {
            hasher.update(v.to_le_bytes());
        }
        for v in &self.priors {
            hasher.update(v.to_le_bytes());
        }
        let digest = hasher.finalize();
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn validate(&self) -> Result<()> {
        if self.priors.len() != self.n() {
            return Err(Error::Validation(format!(
                "{} priors for {} prototypes",
                self.priors.len(),
                self.n()
            )));
        }
        if !self.prototypes.is_finite() {
            return Err(Error::Validation("prototypes contain non-finite values".into()));
        }
        let mut sum = 0.0;
        for (i, &p) in self.priors.iter().enumerate() {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::Validation(format!(
                    "prior {i} is {p}, must be in (0, 1]"
                )));
            }
            sum += p;
        }
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Validation(format!(
                "priors sum to {sum}, expected 1 within 1e-9"
            )));
        }
        Ok(())
    }
}

/// Knobs for [`build_dictionary_with`]; the defaults match
/// [`build_dictionary`].
#[derive(Debug, Clone, Copy)]
pub struct BuildOptions {
    pub max_iter: usize,
    pub tol: f64,
    pub restarts: u32,
}

impl Default for BuildOptions {
    fn default() -> Self {
        BuildOptions {
            max_iter: 300,
            tol: 1e-6,
            restarts: 1,
        }
    }
}

/// Cluster `features` into `n` strata (k-means++ in a `d_p`-dimensional PCA
/// space) and average each cluster in the original space.
pub fn build_dictionary(
    features: &Matrix,
    n: usize,
    d_p: usize,
    seed: u64,
) -> Result<ConfounderDictionary> {
    build_dictionary_with(features, n, d_p, seed, BuildOptions::default())
}

pub fn build_dictionary_with(
    features: &Matrix,
    n: usize,
    d_p: usize,
    seed: u64,
    opts: BuildOptions,
) -> Result<ConfounderDictionary> {
    if n < 1 || n > features.rows() {
        return Err(Error::Size(format!(
            "dictionary size must be in [1, {}], got {n}",
            features.rows()
        )));
    }
    let model = pca_fit(features, d_p)?;
    let reduced = pca_project(&model, features)?;

    let restarts = opts.restarts.max(1);
    let mut best: Option<crate::kmeans::ClusterAssignment> = None;
    for r in 0..restarts {
        let init = kmeanspp_init(&reduced, n, seed.wrapping_add(r as u64))?;
        let fit = kmeans_fit(&reduced, &init, opts.max_iter, opts.tol)?;
        let better = match &best {
            Some(b) => fit.inertia < b.inertia,
            None => true,
        };
        if better {
            best = Some(fit);
        }
    }
    let fit = best.expect("at least one restart runs");

    let (prototypes, priors) = from_assignment(features, &fit.labels, n)?;
    ConfounderDictionary::new(prototypes, priors, DictionarySource::Clustered)
}

/// Prototype means and occupancy priors for a fixed label assignment.
/// Averages run in the original feature space.
pub(crate) fn from_assignment(
    features: &Matrix,
    labels: &[usize],
    n: usize,
) -> Result<(Matrix, Vec<f64>)> {
    if labels.len() != features.rows() {
        return Err(Error::Dimension(format!(
            "{} labels for {} rows",
            labels.len(),
            features.rows()
        )));
    }
    let mut prototypes = Matrix::zeros(n, features.cols());
    let mut counts = vec![0usize; n];
    for (i, &l) in labels.iter().enumerate() {
        if l >= n {
            return Err(Error::Validation(format!("label {l} out of range [0, {n})")));
        }
        counts[l] += 1;
        let row = features.row(i);
        let proto = prototypes.row_mut(l);
        for (p, v) in proto.iter_mut().zip(row) {
            *p += v;
        }
    }
    if let Some(j) = counts.iter().position(|&c| c == 0) {
        return Err(Error::Validation(format!("cluster {j} is empty")));
    }
    let total = labels.len() as f64;
    let mut priors = Vec::with_capacity(n);
    for (j, &c) in counts.iter().enumerate() {
        let inv = 1.0 / c as f64;
        for p in prototypes.row_mut(j) {
            *p *= inv;
        }
        priors.push(c as f64 / total);
    }
    Ok((prototypes, priors))
}

/// Ablation dictionary: prototypes drawn i.i.d. from `N(0, scale^2)` with
/// uniform priors.
pub fn random_dictionary(n: usize, d: usize, seed: u64, scale: f64) -> Result<ConfounderDictionary> {
    if n < 1 || d < 1 {
        return Err(Error::Size(format!("need n >= 1 and d >= 1, got n={n} d={d}")));
    }
    if !(scale > 0.0) {
        return Err(Error::Parameter(format!("scale must be > 0, got {scale}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, scale).map_err(|e| Error::Parameter(e.to_string()))?;
    let mut prototypes = Matrix::zeros(n, d);
    for v in prototypes.as_mut_slice() {
        *v = normal.sample(&mut rng);
    }
    let mut priors = vec![1.0 / n as f64; n];
    let sum: f64 = priors.iter().sum();
    priors[n - 1] += 1.0 - sum;
    ConfounderDictionary::new(prototypes, priors, DictionarySource::Random)
}

// --- file format ------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct DictionaryFile {
    #[serde(default)]
    version: Option<String>,
    n: usize,
    d: usize,
    source: DictionarySource,
    priors: Vec<f64>,
    prototypes: Vec<Vec<f64>>,
}

pub fn dictionary_to_json(dict: &ConfounderDictionary) -> Result<String> {
    let file = DictionaryFile {
        version: Some(DICTIONARY_SCHEMA_VERSION.to_string()),
        n: dict.n(),
        d: dict.dim(),
        source: dict.source,
        priors: dict.priors.clone(),
        prototypes: dict.prototypes.iter_rows().map(|r| r.to_vec()).collect(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn dictionary_from_json(text: &str) -> Result<ConfounderDictionary> {
    let file: DictionaryFile = serde_json::from_str(text)?;
    match file.version.as_deref() {
        None => return Err(Error::Version("dictionary file has no version field".into())),
        Some(DICTIONARY_SCHEMA_VERSION) => {}
        Some(other) => {
            return Err(Error::Version(format!(
                "unsupported dictionary schema `{other}`"
            )))
        }
    }
    if file.prototypes.len() != file.n {
        return Err(Error::Validation(format!(
            "header says n={}, file has {} prototypes",
            file.n,
            file.prototypes.len()
        )));
    }
    if file.prototypes.iter().any(|r| r.len() != file.d) {
        return Err(Error::Validation("prototype width disagrees with header".into()));
    }
    let prototypes = Matrix::from_rows(file.prototypes)
        .map_err(|e| Error::Validation(format!("bad prototypes: {e}")))?;
    ConfounderDictionary::new(prototypes, file.priors, file.source)
}

pub fn serialize_dictionary(dict: &ConfounderDictionary, path: &Path) -> Result<()> {
    std::fs::write(path, dictionary_to_json(dict)?)?;
    Ok(())
}

pub fn deserialize_dictionary(path: &Path) -> Result<ConfounderDictionary> {
    let text = std::fs::read_to_string(path)?;
    dictionary_from_json(&text)
}

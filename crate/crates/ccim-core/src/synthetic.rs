//! Synthetic benchmark with a controllable context -> label confounder.
//!
//! Train samples draw a context stratum uniformly and then bias the label
//! toward that stratum's designated emotion with strength `rho`; test labels
//! are drawn independently of the context, so any context shortcut learned
//! from the train split stops paying off at test time. The bias auditor
//! reports, per context, the binary entropy of a one-vs-rest emotion split:
//! entropy zero means the context only ever co-occurs with one side.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::matrix::{dot, norm, Matrix};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    /// Number of context strata K.
    pub n_contexts: usize,
    /// Number of emotion labels E.
    pub n_emotions: usize,
    /// Subject feature width.
    pub d_s: usize,
    /// Context feature width.
    pub d_c: usize,
    /// Confounding strength in [0, 1]: probability mass pushed onto each
    /// context's designated label in the train split.
    pub rho: f64,
    /// Subject noise level.
    pub sigma_s: f64,
    /// Context noise level.
    pub sigma_c: f64,
    /// Strength of the true label signal carried by the subject vector.
    pub subject_signal: f64,
    pub n_train: usize,
    pub n_test: usize,
    /// Subject leakage mixed into stored context vectors (masking ablation).
    #[serde(default)]
    pub leak_alpha: f64,
}

impl GeneratorConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("n_contexts", self.n_contexts),
            ("n_emotions", self.n_emotions),
            ("d_s", self.d_s),
            ("d_c", self.d_c),
            ("n_train", self.n_train),
            ("n_test", self.n_test),
        ] {
            if v < 1 {
                return Err(Error::Parameter(format!("{name} must be >= 1, got {v}")));
            }
        }
        if !(self.rho >= 0.0 && self.rho <= 1.0) {
            return Err(Error::Parameter(format!(
                "rho must be in [0, 1], got {}",
                self.rho
            )));
        }
        for (name, v) in [
            ("sigma_s", self.sigma_s),
            ("sigma_c", self.sigma_c),
            ("subject_signal", self.subject_signal),
            ("leak_alpha", self.leak_alpha),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::Parameter(format!("{name} must be >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Designated emotion for a context stratum.
    pub fn designated_emotion(&self, context_id: usize) -> usize {
        context_id % self.n_emotions
    }
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            n_contexts: 8,
            n_emotions: 4,
            d_s: 16,
            d_c: 16,
            rho: 0.95,
            sigma_s: 1.0,
            sigma_c: 0.3,
            subject_signal: 1.0,
            n_train: 2000,
            n_test: 2000,
            leak_alpha: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Split {
    Train,
    Test,
}

impl Split {
    pub fn as_str(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Test => "test",
        }
    }
}

/// One sample: the subject pathway, the (stored) context pathway, the label,
/// and the ground-truth context stratum (hidden from models).
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub subject: Vec<f64>,
    pub context: Vec<f64>,
    pub label: usize,
    pub context_id: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub samples: Vec<Sample>,
    pub split: Split,
    pub config: GeneratorConfig,
    pub seed: u64,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn fingerprint(&self) -> String {
        fingerprint_of(&self.config, self.seed)
    }
}

pub fn fingerprint_of(config: &GeneratorConfig, seed: u64) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_string(config).expect("config serializes").as_bytes());
    hasher.update(seed.to_le_bytes());
    let digest = hasher.finalize();
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

/// Zero-pad (or truncate) the subject vector into context width.
fn subject_padding(subject: &[f64], d_c: usize) -> Vec<f64> {
    let mut pad = vec![0.0; d_c];
    for (p, s) in pad.iter_mut().zip(subject) {
        *p = *s;
    }
    pad
}

/// Draw unit vectors that keep all pairwise |cosine| below 0.8, rejecting
/// until that holds. Fails once a vector burns through its attempt budget.
fn separated_unit_vectors(
    rng: &mut ChaCha8Rng,
    count: usize,
    dim: usize,
    what: &str,
) -> Result<Vec<Vec<f64>>> {
    const MAX_COS: f64 = 0.8;
    const ATTEMPTS: usize = 2000;
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(count);
    for _ in 0..count {
        let mut accepted = false;
        for _ in 0..ATTEMPTS {
            let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
            let len = norm(&v);
            if len < 1e-12 {
                continue;
            }
            for x in v.iter_mut() {
                *x /= len;
            }
            if vectors.iter().all(|u| dot(u, &v).abs() < MAX_COS) {
                vectors.push(v);
                accepted = true;
                break;
            }
        }
        if !accepted {
            return Err(Error::Generation(format!(
                "could not place {count} separated {what} vectors in {dim} dimensions"
            )));
        }
    }
    Ok(vectors)
}

/// Generate a (train, test) pair. Context and label anchor vectors are drawn
/// once per seed; the train split applies the `rho` label bias while the
/// test split draws labels uniformly, independent of the context.
pub fn generate(config: &GeneratorConfig, seed: u64) -> Result<(Dataset, Dataset)> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);

    let context_means = separated_unit_vectors(&mut rng, config.n_contexts, config.d_c, "context")?;
    let label_means = separated_unit_vectors(&mut rng, config.n_emotions, config.d_s, "label")?;

    let make_sample = |rng: &mut ChaCha8Rng, context_id: usize, label: usize| -> Sample {
        let mut subject = vec![0.0; config.d_s];
        for (j, s) in subject.iter_mut().enumerate() {
            let noise: f64 = StandardNormal.sample(rng);
            *s = config.subject_signal * label_means[label][j] + config.sigma_s * noise;
        }
        let mut context = vec![0.0; config.d_c];
        for (j, c) in context.iter_mut().enumerate() {
            let noise: f64 = StandardNormal.sample(rng);
            *c = context_means[context_id][j] + config.sigma_c * noise;
        }
        if config.leak_alpha > 0.0 {
            let pad = subject_padding(&subject, config.d_c);
            for (c, p) in context.iter_mut().zip(&pad) {
                *c += config.leak_alpha * p;
            }
        }
        Sample {
            subject,
            context,
            label,
            context_id,
        }
    };

    let mut train_samples = Vec::with_capacity(config.n_train);
    for _ in 0..config.n_train {
        let context_id = rng.random_range(0..config.n_contexts);
        let label = if rng.random::<f64>() < config.rho {
            config.designated_emotion(context_id)
        } else {
            rng.random_range(0..config.n_emotions)
        };
        train_samples.push(make_sample(&mut rng, context_id, label));
    }

    let mut test_samples = Vec::with_capacity(config.n_test);
    for _ in 0..config.n_test {
        let context_id = rng.random_range(0..config.n_contexts);
        let label = rng.random_range(0..config.n_emotions);
        test_samples.push(make_sample(&mut rng, context_id, label));
    }

    Ok((
        Dataset {
            samples: train_samples,
            split: Split::Train,
            config: config.clone(),
            seed,
        },
        Dataset {
            samples: test_samples,
            split: Split::Test,
            config: config.clone(),
            seed,
        },
    ))
}

/// Context rows for dictionary building. With `mask_subject` the stored
/// leakage component is removed, leaving pure background context; without it
/// the stored rows are returned as generated.
pub fn context_features(data: &Dataset, mask_subject: bool) -> Matrix {
    let d_c = data.config.d_c;
    let alpha = data.config.leak_alpha;
    let mut out = Matrix::zeros(data.len(), d_c);
    for (i, sample) in data.samples.iter().enumerate() {
        let row = out.row_mut(i);
        row.copy_from_slice(&sample.context);
        if mask_subject && alpha > 0.0 {
            let pad = subject_padding(&sample.subject, d_c);
            for (r, p) in row.iter_mut().zip(&pad) {
                *r -= alpha * p;
            }
        }
    }
    out
}

/// Masked context rows with a caller-chosen leakage strength added back;
/// used by the masking ablation to contaminate dictionary input on demand.
pub fn leaked_context_features(data: &Dataset, alpha: f64) -> Matrix {
    let d_c = data.config.d_c;
    let mut out = context_features(data, true);
    if alpha > 0.0 {
        for (i, sample) in data.samples.iter().enumerate() {
            let pad = subject_padding(&sample.subject, d_c);
            let row = out.row_mut(i);
            for (r, p) in row.iter_mut().zip(&pad) {
                *r += alpha * p;
            }
        }
    }
    out
}

/// Binary entropy in bits, with `0 log 0 := 0`.
pub fn binary_entropy(p: f64) -> f64 {
    let term = |x: f64| if x > 0.0 { -x * x.log2() } else { 0.0 };
    term(p) + term(1.0 - p)
}

/// Per-context one-vs-rest bias audit for one emotion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BiasAuditReport {
    pub emotion: usize,
    /// Entropy per context id; contexts with no samples hold 0 and are
    /// excluded from `zero_entropy_fraction`.
    pub per_context_entropy: Vec<f64>,
    /// Fraction of nonempty contexts whose entropy is exactly zero.
    pub zero_entropy_fraction: f64,
    /// (positive, negative) counts per context id.
    pub co_occurrence: Vec<(usize, usize)>,
}

pub fn bias_audit(data: &Dataset, emotion: usize) -> Result<BiasAuditReport> {
    let k = data.config.n_contexts;
    if emotion >= data.config.n_emotions {
        return Err(Error::Parameter(format!(
            "emotion id {emotion} out of range [0, {})",
            data.config.n_emotions
        )));
    }
    let mut co = vec![(0usize, 0usize); k];
    for s in &data.samples {
        if s.label == emotion {
            co[s.context_id].0 += 1;
        } else {
            co[s.context_id].1 += 1;
        }
    }
    let mut entropy = vec![0.0; k];
    let mut nonempty = 0usize;
    let mut zero = 0usize;
    for (i, &(pos, neg)) in co.iter().enumerate() {
        let total = pos + neg;
        if total == 0 {
            continue;
        }
        nonempty += 1;
        let p = pos as f64 / total as f64;
        entropy[i] = binary_entropy(p);
        if entropy[i] == 0.0 {
            zero += 1;
        }
    }
    let fraction = if nonempty > 0 {
        zero as f64 / nonempty as f64
    } else {
        0.0
    };
    Ok(BiasAuditReport {
        emotion,
        per_context_entropy: entropy,
        zero_entropy_fraction: fraction,
        co_occurrence: co,
    })
}

/// Plug-in mutual information (bits) between context id and label.
pub fn empirical_mutual_information(data: &Dataset) -> f64 {
    let mut joint: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut p_ctx: BTreeMap<usize, f64> = BTreeMap::new();
    let mut p_lab: BTreeMap<usize, f64> = BTreeMap::new();
    let n = data.len() as f64;
    for s in &data.samples {
        *joint.entry((s.context_id, s.label)).or_insert(0.0) += 1.0 / n;
        *p_ctx.entry(s.context_id).or_insert(0.0) += 1.0 / n;
        *p_lab.entry(s.label).or_insert(0.0) += 1.0 / n;
    }
    let mut mi = 0.0;
    for (&(k, e), &p) in &joint {
        if p > 0.0 {
            mi += p * (p / (p_ctx[&k] * p_lab[&e])).log2();
        }
    }
    mi
}

// --- files -------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct FingerprintFile {
    config: GeneratorConfig,
    seed: u64,
    fingerprint: String,
}

/// Write `train.csv`, `test.csv` and `fingerprint.json` into `dir`.
pub fn write_dataset_dir(train: &Dataset, test: &Dataset, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    write_dataset_csv(train, &dir.join("train.csv"))?;
    write_dataset_csv(test, &dir.join("test.csv"))?;
    let fp = FingerprintFile {
        config: train.config.clone(),
        seed: train.seed,
        fingerprint: train.fingerprint(),
    };
    std::fs::write(
        dir.join("fingerprint.json"),
        serde_json::to_string_pretty(&fp)?,
    )?;
    Ok(())
}

pub fn write_dataset_csv(data: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![
        "split".to_string(),
        "label".to_string(),
        "context_id".to_string(),
    ];
    header.extend((0..data.config.d_s).map(|i| format!("s_{i}")));
    header.extend((0..data.config.d_c).map(|i| format!("c_{i}")));
    w.write_record(&header)?;
    for s in &data.samples {
        let mut rec = vec![
            data.split.as_str().to_string(),
            s.label.to_string(),
            s.context_id.to_string(),
        ];
        rec.extend(s.subject.iter().map(|v| v.to_string()));
        rec.extend(s.context.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

/// Load the pair written by [`write_dataset_dir`], cross-checking the stored
/// fingerprint against the config it claims to come from.
pub fn load_dataset_dir(dir: &Path) -> Result<(Dataset, Dataset)> {
    let fp_path = dir.join("fingerprint.json");
    let text = std::fs::read_to_string(&fp_path).map_err(|e| {
        Error::Validation(format!("cannot read {}: {e}", fp_path.display()))
    })?;
    let fp: FingerprintFile = serde_json::from_str(&text)?;
    if fp.fingerprint != fingerprint_of(&fp.config, fp.seed) {
        return Err(Error::Validation(
            "fingerprint.json does not match its own config/seed".into(),
        ));
    }
    let train = read_dataset_csv(&dir.join("train.csv"), &fp.config, fp.seed, Split::Train)?;
    let test = read_dataset_csv(&dir.join("test.csv"), &fp.config, fp.seed, Split::Test)?;
    Ok((train, test))
}

pub fn read_dataset_csv(
    path: &Path,
    config: &GeneratorConfig,
    seed: u64,
    split: Split,
) -> Result<Dataset> {
    let mut r = csv::Reader::from_path(path)?;
    let expected_cols = 3 + config.d_s + config.d_c;
    let mut samples = Vec::new();
    for record in r.records() {
        let rec = record?;
        if rec.len() != expected_cols {
            return Err(Error::Validation(format!(
                "row has {} columns, config implies {expected_cols}",
                rec.len()
            )));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|e| Error::Validation(format!("bad float `{s}`: {e}")))
        };
        let label: usize = rec[1]
            .parse()
            .map_err(|e| Error::Validation(format!("bad label: {e}")))?;
        let context_id: usize = rec[2]
            .parse()
            .map_err(|e| Error::Validation(format!("bad context_id: {e}")))?;
        if label >= config.n_emotions || context_id >= config.n_contexts {
            return Err(Error::Validation(format!(
                "label {label} / context {context_id} out of configured range"
            )));
        }
        let mut subject = Vec::with_capacity(config.d_s);
        for i in 0..config.d_s {
            subject.push(parse_f(&rec[3 + i])?);
        }
        let mut context = Vec::with_capacity(config.d_c);
        for i in 0..config.d_c {
            context.push(parse_f(&rec[3 + config.d_s + i])?);
        }
        samples.push(Sample {
            subject,
            context,
            label,
            context_id,
        });
    }
    if samples.is_empty() {
        return Err(Error::Validation(format!("{} holds no samples", path.display())));
    }
    Ok(Dataset {
        samples,
        split,
        config: config.clone(),
        seed,
    })
}

/// Write the per-context audit rows (nonempty contexts only) and a JSON
/// summary next to them.
pub fn write_audit_report(report: &BiasAuditReport, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("audit.csv"))?;
    w.write_record(["context_id", "count", "p", "entropy"])?;
    for (i, &(pos, neg)) in report.co_occurrence.iter().enumerate() {
        let total = pos + neg;
        if total == 0 {
            continue;
        }
        let p = pos as f64 / total as f64;
        w.write_record(&[
            i.to_string(),
            total.to_string(),
            p.to_string(),
            report.per_context_entropy[i].to_string(),
        ])?;
    }
    w.flush()?;
    std::fs::write(
        dir.join("audit_summary.json"),
        serde_json::to_string_pretty(report)?,
    )?;
    Ok(())
}

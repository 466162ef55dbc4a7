//! Causal intervention layer.
//!
//! Instead of feeding the fused feature straight to the classifier, the layer
//! mixes in a weighted average over the confounder dictionary's context
//! prototypes, each weighted by attention against the fused feature and by
//! the prototype's empirical prior:
//!
//! ```text
//! out = F h + G sum_i lambda_i z_i P(z_i)
//! ```
//!
//! Both the forward pass and the exact analytic backward pass live here; the
//! dictionary itself is frozen (no gradients flow into the prototypes).

use serde::{Deserialize, Serialize};

use crate::dictionary::ConfounderDictionary;
use crate::error::{Error, Result};
use crate::matrix::{axpy, dot, Matrix};

pub const PARAMS_SCHEMA_VERSION: &str = "ccim-params/1";

/// Layer dimensions. `proto_dim` is the prototype width, `joint_dim` the
/// fused-feature width, `out_dim` / `attn_dim` the output and attention
/// widths, `n_prototypes` the dictionary size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CcimDims {
    pub proto_dim: usize,
    pub joint_dim: usize,
    pub out_dim: usize,
    pub attn_dim: usize,
    pub n_prototypes: usize,
}

impl CcimDims {
    pub fn new(
        proto_dim: usize,
        joint_dim: usize,
        out_dim: usize,
        attn_dim: usize,
        n_prototypes: usize,
    ) -> Result<Self> {
        let dims = CcimDims {
            proto_dim,
            joint_dim,
            out_dim,
            attn_dim,
            n_prototypes,
        };
        if [proto_dim, joint_dim, out_dim, attn_dim, n_prototypes].contains(&0) {
            return Err(Error::Size(format!("all dims must be >= 1, got {dims:?}")));
        }
        Ok(dims)
    }

    /// Reference defaults for the output and attention widths (128 / 256).
    pub fn with_default_widths(proto_dim: usize, joint_dim: usize, n_prototypes: usize) -> Result<Self> {
        CcimDims::new(proto_dim, joint_dim, 128, 256, n_prototypes)
    }
}

/// How the per-prototype weights are produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttentionKind {
    /// Scaled dot product between projected feature and projected prototype.
    DotProduct,
    /// Additive scoring through a tanh hidden layer.
    Additive,
    /// Ablation: fixed uniform weights 1/n.
    Uniform,
    /// Ablation: weights dropped entirely (all ones), so the expectation
    /// reduces to the prior-weighted prototype sum.
    None,
}

impl AttentionKind {
    pub fn is_learned(self) -> bool {
        matches!(self, AttentionKind::DotProduct | AttentionKind::Additive)
    }
}

/// Learnable maps of the layer. Shapes (with dims `proto_dim = d`,
/// `joint_dim = d_h`, `out_dim = d_m`, `attn_dim = d_n`):
/// `feature_proj: d_m x d_h`, `context_proj: d_m x d`,
/// `query_proj: d_n x d_h`, `key_proj: d_n x d`, `score_weights: d_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcimParams {
    pub feature_proj: Matrix,
    pub context_proj: Matrix,
    pub query_proj: Matrix,
    pub key_proj: Matrix,
    pub score_weights: Vec<f64>,
}

impl CcimParams {
    pub fn dims(&self) -> CcimDims {
        CcimDims {
            proto_dim: self.context_proj.cols(),
            joint_dim: self.feature_proj.cols(),
            out_dim: self.feature_proj.rows(),
            attn_dim: self.query_proj.rows(),
            // n is a dictionary property; callers pair params with a dict
            n_prototypes: 0,
        }
    }

    pub fn zeros(dims: CcimDims) -> Self {
        CcimParams {
            feature_proj: Matrix::zeros(dims.out_dim, dims.joint_dim),
            context_proj: Matrix::zeros(dims.out_dim, dims.proto_dim),
            query_proj: Matrix::zeros(dims.attn_dim, dims.joint_dim),
            key_proj: Matrix::zeros(dims.attn_dim, dims.proto_dim),
            score_weights: vec![0.0; dims.attn_dim],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.feature_proj.is_finite()
            && self.context_proj.is_finite()
            && self.query_proj.is_finite()
            && self.key_proj.is_finite()
            && self.score_weights.iter().all(|v| v.is_finite())
    }
}

/// Everything the backward pass needs from a forward call.
#[derive(Debug, Clone)]
pub struct CcimCache {
    joint: Vec<f64>,
    query: Vec<f64>,
    keys: Matrix,
    tanh_acts: Option<Matrix>,
    weights: Vec<f64>,
    expectation: Vec<f64>,
    kind: AttentionKind,
    use_prior: bool,
    scale: f64,
}

impl CcimCache {
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn expectation(&self) -> &[f64] {
        &self.expectation
    }
}

/// Gradients with the same shapes as [`CcimParams`], plus the gradient with
/// respect to the fused input feature.
#[derive(Debug, Clone)]
pub struct CcimGrads {
    pub feature_proj: Matrix,
    pub context_proj: Matrix,
    pub query_proj: Matrix,
    pub key_proj: Matrix,
    pub score_weights: Vec<f64>,
    pub joint: Vec<f64>,
}

/// Draw all parameter entries i.i.d. uniform in `[-scale, scale)`.
pub fn init_params(dims: CcimDims, seed: u64, scale: f64) -> Result<CcimParams> {
    use rand::Rng;
    use rand::SeedableRng;
    if !(scale > 0.0) {
        return Err(Error::Parameter(format!("init scale must be > 0, got {scale}")));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut params = CcimParams::zeros(dims);
    for target in [
        params.feature_proj.as_mut_slice(),
        params.context_proj.as_mut_slice(),
        params.query_proj.as_mut_slice(),
        params.key_proj.as_mut_slice(),
        params.score_weights.as_mut_slice(),
    ] {
        for v in target {
            *v = rng.random_range(-scale..scale);
        }
    }
    Ok(params)
}

/// Max-subtracted softmax.
pub(crate) fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut out: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let sum: f64 = out.iter().sum();
    for v in out.iter_mut() {
        *v /= sum;
    }
    out
}

fn check_shapes(params: &CcimParams, dict: &ConfounderDictionary, joint_len: usize) -> Result<()> {
    let out_dim = params.feature_proj.rows();
    if params.feature_proj.cols() != joint_len {
        return Err(Error::Dimension(format!(
            "feature_proj expects joint dim {}, got {joint_len}",
            params.feature_proj.cols()
        )));
    }
    if params.context_proj.rows() != out_dim {
        return Err(Error::Dimension(
            "feature_proj and context_proj disagree on output dim".into(),
        ));
    }
    if params.context_proj.cols() != dict.dim() {
        return Err(Error::Dimension(format!(
            "context_proj expects prototype dim {}, dictionary has {}",
            params.context_proj.cols(),
            dict.dim()
        )));
    }
    if params.query_proj.cols() != joint_len {
        return Err(Error::Dimension(
            "query_proj and joint feature disagree".into(),
        ));
    }
    if params.key_proj.cols() != dict.dim() {
        return Err(Error::Dimension(
            "key_proj and prototype dim disagree".into(),
        ));
    }
    if params.key_proj.rows() != params.query_proj.rows() {
        return Err(Error::Dimension(
            "query_proj and key_proj disagree on attention dim".into(),
        ));
    }
    if params.score_weights.len() != params.query_proj.rows() {
        return Err(Error::Dimension(
            "score_weights and attention dim disagree".into(),
        ));
    }
    Ok(())
}

/// Per-prototype weights for the given attention kind. The softmax runs over
/// the prototype index; the dot-product variant scales by the square root of
/// the prototype dimension (see [`attention_weights_scaled`] to override).
pub fn attention_weights(
    joint: &[f64],
    dict: &ConfounderDictionary,
    params: &CcimParams,
    kind: AttentionKind,
) -> Result<Vec<f64>> {
    attention_weights_scaled(joint, dict, params, kind, dict.dim())
}

/// Same as [`attention_weights`] with an explicit dimension for the
/// dot-product `1/sqrt(dim)` scale.
pub fn attention_weights_scaled(
    joint: &[f64],
    dict: &ConfounderDictionary,
    params: &CcimParams,
    kind: AttentionKind,
    scale_dim: usize,
) -> Result<Vec<f64>> {
    check_shapes(params, dict, joint.len())?;
    let n = dict.n();
    match kind {
        AttentionKind::Uniform => Ok(uniform_weights(n)),
        AttentionKind::None => Ok(vec![1.0; n]),
        AttentionKind::DotProduct | AttentionKind::Additive => {
            let scale = (scale_dim as f64).sqrt();
            let query = params.query_proj.matvec(joint)?;
            let mut logits = Vec::with_capacity(n);
            for i in 0..n {
                let key = params.key_proj.matvec(dict.prototype(i))?;
                logits.push(match kind {
                    AttentionKind::DotProduct => dot(&query, &key) / scale,
                    AttentionKind::Additive => {
                        let mut acc = 0.0;
                        for (a, (&q, &k)) in query.iter().zip(&key).enumerate() {
                            acc += params.score_weights[a] * (q + k).tanh();
                        }
                        acc
                    }
                    _ => unreachable!(),
                });
            }
            Ok(softmax(&logits))
        }
    }
}

fn uniform_weights(n: usize) -> Vec<f64> {
    let mut w = vec![1.0 / n as f64; n];
    // force the sum to exactly one
    let sum: f64 = w.iter().sum();
    w[n - 1] += 1.0 - sum;
    w
}

/// Weighted prototype average `sum_i lambda_i z_i P(z_i)` (or without the
/// prior factor when `use_prior` is false).
pub fn intervention_expectation(
    weights: &[f64],
    dict: &ConfounderDictionary,
    use_prior: bool,
) -> Result<Vec<f64>> {
    if weights.len() != dict.n() {
        return Err(Error::Dimension(format!(
            "expected {} attention weights, got {}",
            dict.n(),
            weights.len()
        )));
    }
    let mut out = vec![0.0; dict.dim()];
    for (i, &w) in weights.iter().enumerate() {
        let coeff = if use_prior { w * dict.priors()[i] } else { w };
        axpy(coeff, dict.prototype(i), &mut out);
    }
    Ok(out)
}

/// Forward pass: `out = feature_proj * joint + context_proj * expectation`.
pub fn ccim_forward(
    joint: &[f64],
    dict: &ConfounderDictionary,
    params: &CcimParams,
    kind: AttentionKind,
    use_prior: bool,
) -> Result<(Vec<f64>, CcimCache)> {
    ccim_forward_scaled(joint, dict, params, kind, use_prior, dict.dim())
}

pub fn ccim_forward_scaled(
    joint: &[f64],
    dict: &ConfounderDictionary,
    params: &CcimParams,
    kind: AttentionKind,
    use_prior: bool,
    scale_dim: usize,
) -> Result<(Vec<f64>, CcimCache)> {
    check_shapes(params, dict, joint.len())?;
    let n = dict.n();
    let attn_dim = params.query_proj.rows();
    let scale = (scale_dim as f64).sqrt();

    let query = params.query_proj.matvec(joint)?;
    let mut keys = Matrix::zeros(n, attn_dim);
    for i in 0..n {
        let key = params.key_proj.matvec(dict.prototype(i))?;
        keys.row_mut(i).copy_from_slice(&key);
    }

    let mut tanh_acts = None;
    let weights = match kind {
        AttentionKind::Uniform => uniform_weights(n),
        AttentionKind::None => vec![1.0; n],
        AttentionKind::DotProduct => {
            let logits: Vec<f64> = (0..n).map(|i| dot(&query, keys.row(i)) / scale).collect();
            softmax(&logits)
        }
        AttentionKind::Additive => {
            let mut acts = Matrix::zeros(n, attn_dim);
            let mut logits = Vec::with_capacity(n);
            for i in 0..n {
                let mut logit = 0.0;
                let row = acts.row_mut(i);
                for (a, (&q, &k)) in query.iter().zip(keys.row(i)).enumerate() {
                    let t = (q + k).tanh();
                    row[a] = t;
                    logit += params.score_weights[a] * t;
                }
                logits.push(logit);
            }
            tanh_acts = Some(acts);
            softmax(&logits)
        }
    };

    let expectation = intervention_expectation(&weights, dict, use_prior)?;
    let mut out = params.feature_proj.matvec(joint)?;
    let ctx = params.context_proj.matvec(&expectation)?;
    for (o, c) in out.iter_mut().zip(&ctx) {
        *o += c;
    }

    let cache = CcimCache {
        joint: joint.to_vec(),
        query,
        keys,
        tanh_acts,
        weights,
        expectation,
        kind,
        use_prior,
        scale,
    };
    Ok((out, cache))
}

/// Exact gradients of `grad_out . out` with respect to every parameter and
/// the fused input. The cache must come from a matching forward call.
pub fn ccim_backward(
    cache: &CcimCache,
    dict: &ConfounderDictionary,
    params: &CcimParams,
    kind: AttentionKind,
    use_prior: bool,
    grad_out: &[f64],
) -> Result<CcimGrads> {
    check_shapes(params, dict, cache.joint.len())?;
    if cache.kind != kind || cache.use_prior != use_prior {
        return Err(Error::CacheMismatch(format!(
            "cache built with ({:?}, prior={}) but backward asked for ({:?}, prior={})",
            cache.kind, cache.use_prior, kind, use_prior
        )));
    }
    if cache.weights.len() != dict.n() || cache.keys.cols() != params.query_proj.rows() {
        return Err(Error::CacheMismatch(
            "cache shapes do not match dictionary/params".into(),
        ));
    }
    if grad_out.len() != params.feature_proj.rows() {
        return Err(Error::Dimension(format!(
            "grad_out length {} does not match output dim {}",
            grad_out.len(),
            params.feature_proj.rows()
        )));
    }

    let n = dict.n();
    let dims = params.dims();
    let mut grads = CcimGrads {
        feature_proj: Matrix::zeros(dims.out_dim, dims.joint_dim),
        context_proj: Matrix::zeros(dims.out_dim, dims.proto_dim),
        query_proj: Matrix::zeros(dims.attn_dim, dims.joint_dim),
        key_proj: Matrix::zeros(dims.attn_dim, dims.proto_dim),
        score_weights: vec![0.0; dims.attn_dim],
        joint: vec![0.0; dims.joint_dim],
    };

    // Direct linear paths.
    grads.feature_proj.add_outer(1.0, grad_out, &cache.joint);
    grads.context_proj.add_outer(1.0, grad_out, &cache.expectation);
    grads.joint = params.feature_proj.matvec_t(grad_out)?;

    // Gradient into the expectation vector.
    let grad_e = params.context_proj.matvec_t(grad_out)?;

    if !kind.is_learned() {
        // Constant weights: nothing flows into the attention maps.
        return Ok(grads);
    }

    // d L / d lambda_i.
    let mut grad_w: Vec<f64> = (0..n)
        .map(|i| {
            let coeff = if use_prior { dict.priors()[i] } else { 1.0 };
            coeff * dot(dict.prototype(i), &grad_e)
        })
        .collect();

    // Softmax Jacobian: dl_i = w_i (dL/dw_i - sum_j w_j dL/dw_j).
    let mix: f64 = cache
        .weights
        .iter()
        .zip(&grad_w)
        .map(|(w, g)| w * g)
        .sum();
    for (gl, w) in grad_w.iter_mut().zip(&cache.weights) {
        *gl = w * (*gl - mix);
    }
    let grad_logits = grad_w;

    let mut grad_query = vec![0.0; dims.attn_dim];
    match kind {
        AttentionKind::DotProduct => {
            let inv_scale = 1.0 / cache.scale;
            for i in 0..n {
                let gl = grad_logits[i] * inv_scale;
                axpy(gl, cache.keys.row(i), &mut grad_query);
                grads.key_proj.add_outer(gl, &cache.query, dict.prototype(i));
            }
        }
        AttentionKind::Additive => {
            let acts = cache
                .tanh_acts
                .as_ref()
                .ok_or_else(|| Error::CacheMismatch("additive cache missing activations".into()))?;
            let mut grad_pre = vec![0.0; dims.attn_dim];
            for i in 0..n {
                let gl = grad_logits[i];
                let t = acts.row(i);
                for a in 0..dims.attn_dim {
                    grads.score_weights[a] += gl * t[a];
                    grad_pre[a] = gl * params.score_weights[a] * (1.0 - t[a] * t[a]);
                }
                for (gq, gp) in grad_query.iter_mut().zip(&grad_pre) {
                    *gq += gp;
                }
                grads.key_proj.add_outer(1.0, &grad_pre, dict.prototype(i));
            }
        }
        _ => unreachable!(),
    }

    grads.query_proj.add_outer(1.0, &grad_query, &cache.joint);
    let h_attn = params.query_proj.matvec_t(&grad_query)?;
    axpy(1.0, &h_attn, &mut grads.joint);

    Ok(grads)
}

// --- parameter checkpoint -------------------------------------------------

/// Versioned on-disk form of the layer parameters; also embedded verbatim in
/// model checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcimParamsFile {
    #[serde(default)]
    pub version: Option<String>,
    pub dims: CcimDims,
    pub matrices: CcimParams,
}

impl CcimParamsFile {
    pub fn new(params: &CcimParams, n_prototypes: usize) -> Self {
        let mut dims = params.dims();
        dims.n_prototypes = n_prototypes;
        CcimParamsFile {
            version: Some(PARAMS_SCHEMA_VERSION.to_string()),
            dims,
            matrices: params.clone(),
        }
    }

    /// Validate the version tag and shape consistency, yielding the params.
    pub fn into_params(self) -> Result<CcimParams> {
        match self.version.as_deref() {
            None => return Err(Error::Version("parameter file has no version field".into())),
            Some(PARAMS_SCHEMA_VERSION) => {}
            Some(other) => {
                return Err(Error::Version(format!(
                    "unsupported parameter schema `{other}`"
                )))
            }
        }
        let p = self.matrices;
        if !p.is_finite() {
            return Err(Error::Validation("parameter file has non-finite entries".into()));
        }
        let d = self.dims;
        if p.feature_proj.rows() != d.out_dim
            || p.feature_proj.cols() != d.joint_dim
            || p.context_proj.cols() != d.proto_dim
            || p.query_proj.rows() != d.attn_dim
        {
            return Err(Error::Validation(
                "parameter shapes disagree with declared dims".into(),
            ));
        }
        Ok(p)
    }
}

pub fn params_to_json(params: &CcimParams, n_prototypes: usize) -> Result<String> {
    Ok(serde_json::to_string_pretty(&CcimParamsFile::new(
        params,
        n_prototypes,
    ))?)
}

pub fn params_from_json(text: &str) -> Result<CcimParams> {
    let file: CcimParamsFile = serde_json::from_str(text)?;
    file.into_params()
}

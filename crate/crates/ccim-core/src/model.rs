//! Two-branch classifier with optional causal intervention before the head.
//!
//! Subject and context vectors pass through separate one-hidden-layer tanh
//! encoders (no biases), get concatenated, optionally run through the
//! intervention layer, and feed a linear softmax classifier. All gradients
//! are hand-written; training is bit-reproducible for a fixed seed (fixed
//! shuffle stream, fixed accumulation order).

use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::ccim::{
    ccim_backward, ccim_forward_scaled, init_params, softmax, AttentionKind, CcimDims, CcimParams,
    CcimParamsFile,
};
use crate::dictionary::ConfounderDictionary;
use crate::error::{Error, Result};
use crate::matrix::{axpy, Matrix};
use crate::metrics::{average_precision, MetricsReport};
use crate::synthetic::{Dataset, Sample};

pub const CHECKPOINT_SCHEMA_VERSION: &str = "ccim-checkpoint/1";

fn default_momentum() -> f64 {
    0.9
}

fn default_init_scale() -> f64 {
    0.1
}

/// Intervention-layer settings carried by the model config. Prototype and
/// joint dims come from the dictionary and the encoders at build time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CcimSettings {
    pub out_dim: usize,
    pub attn_dim: usize,
    pub kind: AttentionKind,
    pub use_prior: bool,
    /// Override for the dot-product `1/sqrt(dim)` scale (defaults to the
    /// prototype dimension).
    #[serde(default)]
    pub scale_dim_override: Option<usize>,
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
}

impl Default for CcimSettings {
    fn default() -> Self {
        CcimSettings {
            out_dim: 32,
            attn_dim: 16,
            kind: AttentionKind::DotProduct,
            use_prior: true,
            scale_dim_override: None,
            init_scale: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub enc_hidden: usize,
    /// Fused feature width; the two encoder outputs each get half.
    pub d_h: usize,
    pub use_ccim: bool,
    #[serde(default)]
    pub ccim: Option<CcimSettings>,
    pub lr: f64,
    #[serde(default = "default_momentum")]
    pub momentum: f64,
    pub epochs: usize,
    pub batch: usize,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            enc_hidden: 32,
            d_h: 32,
            use_ccim: false,
            ccim: None,
            lr: 0.05,
            momentum: 0.9,
            epochs: 15,
            batch: 64,
            seed: 0,
        }
    }
}

impl ModelConfig {
    pub fn validate(&self) -> Result<()> {
        if self.enc_hidden < 1 {
            return Err(Error::Parameter("enc_hidden must be >= 1".into()));
        }
        if self.d_h < 2 || !self.d_h.is_multiple_of(2) {
            return Err(Error::Parameter(format!(
                "d_h must be an even count >= 2, got {}",
                self.d_h
            )));
        }
        if !(self.lr > 0.0) {
            return Err(Error::Parameter(format!("lr must be > 0, got {}", self.lr)));
        }
        if !(self.momentum >= 0.0 && self.momentum < 1.0) {
            return Err(Error::Parameter(format!(
                "momentum must be in [0, 1), got {}",
                self.momentum
            )));
        }
        if self.batch < 1 {
            return Err(Error::Parameter("batch must be >= 1".into()));
        }
        if self.use_ccim {
            match &self.ccim {
                None => {
                    return Err(Error::Config(
                        "use_ccim is set but no ccim settings are present".into(),
                    ))
                }
                Some(c) => {
                    if c.out_dim < 1 || c.attn_dim < 1 {
                        return Err(Error::Parameter("ccim dims must be >= 1".into()));
                    }
                    if !(c.init_scale > 0.0) {
                        return Err(Error::Parameter("ccim init_scale must be > 0".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Width the classifier consumes: the fused feature for the baseline,
    /// the intervention output otherwise.
    pub fn classifier_input_dim(&self) -> usize {
        if self.use_ccim {
            self.ccim.as_ref().map(|c| c.out_dim).unwrap_or(self.d_h)
        } else {
            self.d_h
        }
    }

    /// Named presets mirroring published backbone widths.
    pub fn preset(name: &str) -> Option<ModelConfig> {
        match name.to_ascii_lowercase().as_str() {
            "emot-net" | "emotnet" => Some(ModelConfig {
                enc_hidden: 128,
                d_h: 256,
                use_ccim: true,
                ccim: Some(CcimSettings {
                    out_dim: 128,
                    attn_dim: 256,
                    ..CcimSettings::default()
                }),
                ..ModelConfig::default()
            }),
            _ => None,
        }
    }
}

/// One-hidden-layer tanh encoder without biases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncoderParams {
    /// hidden x in
    pub w1: Matrix,
    /// out x hidden
    pub w2: Matrix,
}

impl EncoderParams {
    fn zeros(input: usize, hidden: usize, output: usize) -> Self {
        EncoderParams {
            w1: Matrix::zeros(hidden, input),
            w2: Matrix::zeros(output, hidden),
        }
    }
}

/// `tanh(W2 tanh(W1 x))`.
pub fn encode(params: &EncoderParams, x: &[f64]) -> Result<Vec<f64>> {
    Ok(encode_cached(params, x)?.0)
}

fn encode_cached(params: &EncoderParams, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut hidden = params.w1.matvec(x)?;
    for v in hidden.iter_mut() {
        *v = v.tanh();
    }
    let mut out = params.w2.matvec(&hidden)?;
    for v in out.iter_mut() {
        *v = v.tanh();
    }
    Ok((out, hidden))
}

/// Gradients wrt both weight matrices; the input is treated as constant.
fn encoder_backward(
    params: &EncoderParams,
    x: &[f64],
    hidden: &[f64],
    out: &[f64],
    grad_out: &[f64],
    gw1: &mut Matrix,
    gw2: &mut Matrix,
) -> Result<()> {
    let d_pre2: Vec<f64> = grad_out
        .iter()
        .zip(out)
        .map(|(g, o)| g * (1.0 - o * o))
        .collect();
    gw2.add_outer(1.0, &d_pre2, hidden);
    let d_hidden = params.w2.matvec_t(&d_pre2)?;
    let d_pre1: Vec<f64> = d_hidden
        .iter()
        .zip(hidden)
        .map(|(g, h)| g * (1.0 - h * h))
        .collect();
    gw1.add_outer(1.0, &d_pre1, x);
    Ok(())
}

/// Concatenate the two branch outputs.
pub fn fuse(subject: &[f64], context: &[f64]) -> Vec<f64> {
    let mut h = Vec::with_capacity(subject.len() + context.len());
    h.extend_from_slice(subject);
    h.extend_from_slice(context);
    h
}

/// Numerically stabilized softmax cross-entropy.
pub fn loss_ce(logits: &[f64], label: usize) -> Result<f64> {
    if label >= logits.len() {
        return Err(Error::Parameter(format!(
            "label {label} out of range [0, {})",
            logits.len()
        )));
    }
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let lse = max + logits.iter().map(|l| (l - max).exp()).sum::<f64>().ln();
    Ok(lse - logits[label])
}

/// `softmax(logits) - onehot(label)`.
pub fn loss_ce_grad(logits: &[f64], label: usize) -> Result<Vec<f64>> {
    if label >= logits.len() {
        return Err(Error::Parameter(format!(
            "label {label} out of range [0, {})",
            logits.len()
        )));
    }
    let mut g = softmax(logits);
    g[label] -= 1.0;
    Ok(g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Velocity {
    enc_subject: EncoderParams,
    enc_context: EncoderParams,
    classifier: Matrix,
    ccim: Option<CcimParams>,
}

/// Full model state after (or before) training. The frozen dictionary
/// travels with the state so evaluation is self-contained.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainState {
    pub config: ModelConfig,
    pub n_classes: usize,
    pub d_s: usize,
    pub d_c: usize,
    pub enc_subject: EncoderParams,
    pub enc_context: EncoderParams,
    /// n_classes x classifier_input_dim
    pub classifier: Matrix,
    pub ccim_params: Option<CcimParams>,
    pub dictionary: Option<ConfounderDictionary>,
    pub epoch: usize,
    pub loss_curve: Vec<f64>,
    velocity: Velocity,
}

impl TrainState {
    fn scale_dim(&self) -> usize {
        let dict_dim = self.dictionary.as_ref().map(|d| d.dim()).unwrap_or(1);
        self.config
            .ccim
            .as_ref()
            .and_then(|c| c.scale_dim_override)
            .unwrap_or(dict_dim)
    }

    /// Fused feature, classifier input feature, and logits for one sample.
    pub fn forward(&self, sample: &Sample) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
        let s_out = encode(&self.enc_subject, &sample.subject)?;
        let c_out = encode(&self.enc_context, &sample.context)?;
        let h = fuse(&s_out, &c_out);
        let feat = if self.config.use_ccim {
            let dict = self
                .dictionary
                .as_ref()
                .ok_or_else(|| Error::Config("state uses ccim but holds no dictionary".into()))?;
            let params = self
                .ccim_params
                .as_ref()
                .ok_or_else(|| Error::Config("state uses ccim but holds no parameters".into()))?;
            let settings = self.config.ccim.as_ref().expect("validated config");
            let (out, _) = ccim_forward_scaled(
                &h,
                dict,
                params,
                settings.kind,
                settings.use_prior,
                self.scale_dim(),
            )?;
            out
        } else {
            h.clone()
        };
        let logits = self.classifier.matvec(&feat)?;
        Ok((h, feat, logits))
    }

    /// Encoded context branch (the learned context features).
    pub fn encode_context(&self, sample: &Sample) -> Result<Vec<f64>> {
        encode(&self.enc_context, &sample.context)
    }
}

fn fill_uniform(rng: &mut ChaCha8Rng, m: &mut Matrix) {
    let scale = 1.0 / (m.cols() as f64).sqrt();
    for v in m.as_mut_slice() {
        *v = rng.random_range(-scale..scale);
    }
}

fn init_state(
    config: &ModelConfig,
    d_s: usize,
    d_c: usize,
    n_classes: usize,
    dict: Option<&ConfounderDictionary>,
) -> Result<TrainState> {
    config.validate()?;
    let half = config.d_h / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);

    let mut enc_subject = EncoderParams::zeros(d_s, config.enc_hidden, half);
    let mut enc_context = EncoderParams::zeros(d_c, config.enc_hidden, half);
    fill_uniform(&mut rng, &mut enc_subject.w1);
    fill_uniform(&mut rng, &mut enc_subject.w2);
    fill_uniform(&mut rng, &mut enc_context.w1);
    fill_uniform(&mut rng, &mut enc_context.w2);

    let mut classifier = Matrix::zeros(n_classes, config.classifier_input_dim());
    fill_uniform(&mut rng, &mut classifier);

    let (ccim_params, ccim_vel) = if config.use_ccim {
        let settings = config.ccim.as_ref().expect("validated config");
        let dict = dict.ok_or_else(|| {
            Error::Config("use_ccim requires a confounder dictionary".into())
        })?;
        let dims = CcimDims::new(
            dict.dim(),
            config.d_h,
            settings.out_dim,
            settings.attn_dim,
            dict.n(),
        )?;
        let params = init_params(dims, config.seed.wrapping_add(1), settings.init_scale)?;
        let vel = CcimParams::zeros(dims);
        (Some(params), Some(vel))
    } else {
        (None, None)
    };

    let velocity = Velocity {
        enc_subject: EncoderParams::zeros(d_s, config.enc_hidden, half),
        enc_context: EncoderParams::zeros(d_c, config.enc_hidden, half),
        classifier: Matrix::zeros(n_classes, config.classifier_input_dim()),
        ccim: ccim_vel,
    };

    Ok(TrainState {
        config: config.clone(),
        n_classes,
        d_s,
        d_c,
        enc_subject,
        enc_context,
        classifier,
        ccim_params,
        dictionary: dict.cloned(),
        epoch: 0,
        loss_curve: Vec::new(),
        velocity,
    })
}

#[derive(Debug)]
struct GradSet {
    enc_subject: EncoderParams,
    enc_context: EncoderParams,
    classifier: Matrix,
    ccim: Option<CcimParams>,
}

impl GradSet {
    fn zeros_like(state: &TrainState) -> Self {
        GradSet {
            enc_subject: EncoderParams::zeros(
                state.d_s,
                state.config.enc_hidden,
                state.config.d_h / 2,
            ),
            enc_context: EncoderParams::zeros(
                state.d_c,
                state.config.enc_hidden,
                state.config.d_h / 2,
            ),
            classifier: Matrix::zeros(state.n_classes, state.config.classifier_input_dim()),
            ccim: state.ccim_params.as_ref().map(|p| CcimParams::zeros(CcimDims {
                proto_dim: p.context_proj.cols(),
                joint_dim: p.feature_proj.cols(),
                out_dim: p.feature_proj.rows(),
                attn_dim: p.query_proj.rows(),
                n_prototypes: 1,
            })),
        }
    }
}

fn add_scaled(target: &mut Matrix, src: &Matrix, alpha: f64) {
    for (t, s) in target.as_mut_slice().iter_mut().zip(src.as_slice()) {
        *t += alpha * s;
    }
}

/// Minibatch SGD with momentum. Deterministic for a fixed seed.
pub fn train(
    config: &ModelConfig,
    data: &Dataset,
    dict: Option<&ConfounderDictionary>,
) -> Result<TrainState> {
    config.validate()?;
    if config.use_ccim && dict.is_none() {
        return Err(Error::Config(
            "use_ccim requires a confounder dictionary".into(),
        ));
    }
    let mut state = init_state(
        config,
        data.config.d_s,
        data.config.d_c,
        data.config.n_emotions,
        dict,
    )?;

    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9E37_79B9_7F4A_7C15);
    let n = data.len();
    for _ in 0..config.epochs {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut shuffle_rng);
        let mut epoch_loss = 0.0;
        for batch in order.chunks(config.batch) {
            epoch_loss += train_batch(&mut state, data, batch)?;
        }
        state.loss_curve.push(epoch_loss / n as f64);
        state.epoch += 1;
    }
    Ok(state)
}

fn train_batch(state: &mut TrainState, data: &Dataset, batch: &[usize]) -> Result<f64> {
    let mut grads = GradSet::zeros_like(state);
    let mut loss_sum = 0.0;
    let settings = state.config.ccim.clone();
    let scale_dim = state.scale_dim();

    for &idx in batch {
        let sample = &data.samples[idx];
        let (s_out, s_hidden) = encode_cached(&state.enc_subject, &sample.subject)?;
        let (c_out, c_hidden) = encode_cached(&state.enc_context, &sample.context)?;
        let h = fuse(&s_out, &c_out);

        let (feat, cache) = if state.config.use_ccim {
            let dict = state.dictionary.as_ref().expect("checked");
            let params = state.ccim_params.as_ref().expect("checked");
            let s = settings.as_ref().expect("validated config");
            let (out, cache) =
                ccim_forward_scaled(&h, dict, params, s.kind, s.use_prior, scale_dim)?;
            (out, Some(cache))
        } else {
            (h.clone(), None)
        };

        let logits = state.classifier.matvec(&feat)?;
        loss_sum += loss_ce(&logits, sample.label)?;
        let grad_logits = loss_ce_grad(&logits, sample.label)?;

        grads.classifier.add_outer(1.0, &grad_logits, &feat);
        let grad_feat = state.classifier.matvec_t(&grad_logits)?;

        let grad_h = if let Some(cache) = &cache {
            let dict = state.dictionary.as_ref().expect("checked");
            let params = state.ccim_params.as_ref().expect("checked");
            let s = settings.as_ref().expect("validated config");
            let g = ccim_backward(cache, dict, params, s.kind, s.use_prior, &grad_feat)?;
            let acc = grads.ccim.as_mut().expect("ccim grads allocated");
            add_scaled(&mut acc.feature_proj, &g.feature_proj, 1.0);
            add_scaled(&mut acc.context_proj, &g.context_proj, 1.0);
            add_scaled(&mut acc.query_proj, &g.query_proj, 1.0);
            add_scaled(&mut acc.key_proj, &g.key_proj, 1.0);
            axpy(1.0, &g.score_weights, &mut acc.score_weights);
            g.joint
        } else {
            grad_feat
        };

        let half = state.config.d_h / 2;
        encoder_backward(
            &state.enc_subject,
            &sample.subject,
            &s_hidden,
            &s_out,
            &grad_h[..half],
            &mut grads.enc_subject.w1,
            &mut grads.enc_subject.w2,
        )?;
        encoder_backward(
            &state.enc_context,
            &sample.context,
            &c_hidden,
            &c_out,
            &grad_h[half..],
            &mut grads.enc_context.w1,
            &mut grads.enc_context.w2,
        )?;
    }

    let inv = 1.0 / batch.len() as f64;
    let lr = state.config.lr;
    let mom = state.config.momentum;

    let sgd = |w: &mut Matrix, v: &mut Matrix, g: &Matrix| {
        for ((wi, vi), gi) in w
            .as_mut_slice()
            .iter_mut()
            .zip(v.as_mut_slice())
            .zip(g.as_slice())
        {
            *vi = mom * *vi + gi * inv;
            *wi -= lr * *vi;
        }
    };
    sgd(
        &mut state.enc_subject.w1,
        &mut state.velocity.enc_subject.w1,
        &grads.enc_subject.w1,
    );
    sgd(
        &mut state.enc_subject.w2,
        &mut state.velocity.enc_subject.w2,
        &grads.enc_subject.w2,
    );
    sgd(
        &mut state.enc_context.w1,
        &mut state.velocity.enc_context.w1,
        &grads.enc_context.w1,
    );
    sgd(
        &mut state.enc_context.w2,
        &mut state.velocity.enc_context.w2,
        &grads.enc_context.w2,
    );
    sgd(
        &mut state.classifier,
        &mut state.velocity.classifier,
        &grads.classifier,
    );
    if let (Some(p), Some(v), Some(g)) = (
        state.ccim_params.as_mut(),
        state.velocity.ccim.as_mut(),
        grads.ccim.as_ref(),
    ) {
        sgd(&mut p.feature_proj, &mut v.feature_proj, &g.feature_proj);
        sgd(&mut p.context_proj, &mut v.context_proj, &g.context_proj);
        sgd(&mut p.query_proj, &mut v.query_proj, &g.query_proj);
        sgd(&mut p.key_proj, &mut v.key_proj, &g.key_proj);
        for ((wi, vi), gi) in p
            .score_weights
            .iter_mut()
            .zip(v.score_weights.iter_mut())
            .zip(&g.score_weights)
        {
            *vi = mom * *vi + gi * inv;
            *wi -= lr * *vi;
        }
    }

    Ok(loss_sum)
}

/// Accuracy on argmax plus one-vs-rest average precision per class.
pub fn evaluate(state: &TrainState, data: &Dataset) -> Result<MetricsReport> {
    if data.config.d_s != state.d_s || data.config.d_c != state.d_c {
        return Err(Error::Dimension(format!(
            "model expects subject/context dims {}x{}, data has {}x{}",
            state.d_s, state.d_c, data.config.d_s, data.config.d_c
        )));
    }
    let n_classes = state.n_classes;
    let mut correct = 0usize;
    let mut scores = vec![Vec::with_capacity(data.len()); n_classes];
    let mut positives = vec![Vec::with_capacity(data.len()); n_classes];
    for sample in &data.samples {
        let (_, _, logits) = state.forward(sample)?;
        let probs = softmax(&logits);
        let mut arg = 0usize;
        for (i, p) in probs.iter().enumerate() {
            if *p > probs[arg] {
                arg = i;
            }
        }
        if arg == sample.label {
            correct += 1;
        }
        for e in 0..n_classes {
            scores[e].push(probs[e]);
            positives[e].push(sample.label == e);
        }
    }
    let mut per_class_ap = Vec::with_capacity(n_classes);
    for e in 0..n_classes {
        per_class_ap.push(average_precision(&scores[e], &positives[e])?);
    }
    let map = per_class_ap.iter().sum::<f64>() / n_classes as f64;
    Ok(MetricsReport {
        accuracy: correct as f64 / data.len() as f64,
        per_class_ap,
        map,
        loss_curve: state.loss_curve.clone(),
    })
}

// --- checkpoint ---------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    #[serde(default)]
    version: Option<String>,
    config: ModelConfig,
    n_classes: usize,
    d_s: usize,
    d_c: usize,
    enc_subject: EncoderParams,
    enc_context: EncoderParams,
    classifier: Matrix,
    /// Intervention parameters in their own versioned document.
    ccim_params: Option<CcimParamsFile>,
    dict_fingerprint: Option<String>,
    epoch: usize,
    loss_curve: Vec<f64>,
}

pub fn checkpoint_to_json(state: &TrainState) -> Result<String> {
    let n_protos = state.dictionary.as_ref().map(|d| d.n()).unwrap_or(0);
    let file = CheckpointFile {
        version: Some(CHECKPOINT_SCHEMA_VERSION.to_string()),
        config: state.config.clone(),
        n_classes: state.n_classes,
        d_s: state.d_s,
        d_c: state.d_c,
        enc_subject: state.enc_subject.clone(),
        enc_context: state.enc_context.clone(),
        classifier: state.classifier.clone(),
        ccim_params: state
            .ccim_params
            .as_ref()
            .map(|p| CcimParamsFile::new(p, n_protos)),
        dict_fingerprint: state.dictionary.as_ref().map(|d| d.fingerprint()),
        epoch: state.epoch,
        loss_curve: state.loss_curve.clone(),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

/// Rebuild a state from a checkpoint. A dictionary must be supplied when the
/// checkpointed model uses the intervention layer, and its fingerprint must
/// match the one recorded at training time.
pub fn checkpoint_from_json(
    text: &str,
    dict: Option<&ConfounderDictionary>,
) -> Result<TrainState> {
    let file: CheckpointFile = serde_json::from_str(text)?;
    match file.version.as_deref() {
        None => return Err(Error::Version("checkpoint has no version field".into())),
        Some(CHECKPOINT_SCHEMA_VERSION) => {}
        Some(other) => {
            return Err(Error::Version(format!(
                "unsupported checkpoint schema `{other}`"
            )))
        }
    }
    file.config.validate()?;
    if file.config.use_ccim {
        let dict = dict.ok_or_else(|| {
            Error::Config("checkpoint uses ccim; pass the dictionary it was trained with".into())
        })?;
        match &file.dict_fingerprint {
            Some(fp) if *fp == dict.fingerprint() => {}
            Some(fp) => {
                return Err(Error::Validation(format!(
                    "dictionary fingerprint {} does not match checkpoint {fp}",
                    dict.fingerprint()
                )))
            }
            None => {
                return Err(Error::Validation(
                    "ccim checkpoint lacks a dictionary fingerprint".into(),
                ))
            }
        }
    }
    let ccim_params = match file.ccim_params {
        Some(pf) => Some(pf.into_params()?),
        None => None,
    };
    let half = file.config.d_h / 2;
    let velocity = Velocity {
        enc_subject: EncoderParams::zeros(file.d_s, file.config.enc_hidden, half),
        enc_context: EncoderParams::zeros(file.d_c, file.config.enc_hidden, half),
        classifier: Matrix::zeros(file.n_classes, file.config.classifier_input_dim()),
        ccim: ccim_params.as_ref().map(|p| {
            CcimParams::zeros(CcimDims {
                proto_dim: p.context_proj.cols(),
                joint_dim: p.feature_proj.cols(),
                out_dim: p.feature_proj.rows(),
                attn_dim: p.query_proj.rows(),
                n_prototypes: 1,
            })
        }),
    };
    Ok(TrainState {
        config: file.config,
        n_classes: file.n_classes,
        d_s: file.d_s,
        d_c: file.d_c,
        enc_subject: file.enc_subject,
        enc_context: file.enc_context,
        classifier: file.classifier,
        ccim_params,
        dictionary: dict.cloned(),
        epoch: file.epoch,
        loss_curve: file.loss_curve,
        velocity,
    })
}

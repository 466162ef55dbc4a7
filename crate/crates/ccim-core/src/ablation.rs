//! Variant runner: trains matched model configurations on identical data so
//! dictionary and weighting choices can be compared seed by seed.

use std::collections::BTreeMap;

use crate::ccim::AttentionKind;
use crate::dictionary::{
    build_dictionary, default_pca_dims, random_dictionary, ConfounderDictionary,
};
use crate::error::{Error, Result};
use crate::metrics::MetricsReport;
use crate::model::{evaluate, train, ModelConfig};
use crate::synthetic::{context_features, leaked_context_features, Dataset};

/// Leakage strength injected into dictionary features for the masking
/// ablation.
pub const NO_MASKING_LEAK: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Variant {
    Baseline,
    CcimFullDot,
    CcimFullAdditive,
    RandomZ,
    UniformLambda,
    NoPrior,
    NoMasking,
}

impl Variant {
    pub const ALL: [Variant; 7] = [
        Variant::Baseline,
        Variant::CcimFullDot,
        Variant::CcimFullAdditive,
        Variant::RandomZ,
        Variant::UniformLambda,
        Variant::NoPrior,
        Variant::NoMasking,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Variant::Baseline => "baseline",
            Variant::CcimFullDot => "ccim_full_dot",
            Variant::CcimFullAdditive => "ccim_full_additive",
            Variant::RandomZ => "random_Z",
            Variant::UniformLambda => "uniform_lambda",
            Variant::NoPrior => "no_prior",
            Variant::NoMasking => "no_masking",
        }
    }

    pub fn parse(text: &str) -> Result<Variant> {
        let lowered = text.trim().to_ascii_lowercase();
        Variant::ALL
            .iter()
            .copied()
            .find(|v| v.id().to_ascii_lowercase() == lowered)
            .ok_or_else(|| {
                let valid: Vec<&str> = Variant::ALL.iter().map(|v| v.id()).collect();
                Error::UnknownVariant(text.to_string(), valid.join(", "))
            })
    }
}

/// One trained run. `n` records the dictionary size the run used.
#[derive(Debug, Clone)]
pub struct RunRecord {
    pub variant: String,
    pub seed: u64,
    pub n: usize,
    pub report: MetricsReport,
}

#[derive(Debug, Clone, Default)]
pub struct AblationTable {
    pub records: Vec<RunRecord>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum DictFlavor {
    Clustered,
    Random,
    Leaked,
}

/// Build (and cache) the dictionary a variant needs for a given seed.
fn dictionary_for(
    variant: Variant,
    train_data: &Dataset,
    n: usize,
    d_p: usize,
    seed: u64,
    cache: &mut BTreeMap<DictFlavor, ConfounderDictionary>,
) -> Result<Option<ConfounderDictionary>> {
    let flavor = match variant {
        Variant::Baseline => return Ok(None),
        Variant::RandomZ => DictFlavor::Random,
        Variant::NoMasking => DictFlavor::Leaked,
        _ => DictFlavor::Clustered,
    };
    if let Some(d) = cache.get(&flavor) {
        return Ok(Some(d.clone()));
    }
    let dict = match flavor {
        DictFlavor::Clustered => {
            build_dictionary(&context_features(train_data, true), n, d_p, seed)?
        }
        DictFlavor::Random => {
            // random entries drawn at the context features' scale, standing in
            // for the averaged features they replace
            let features = context_features(train_data, true);
            let rms = (features.as_slice().iter().map(|v| v * v).sum::<f64>()
                / features.as_slice().len() as f64)
                .sqrt();
            let scale = if rms > 0.0 { rms } else { 1.0 };
            random_dictionary(n, train_data.config.d_c, seed, scale)?
        }
        DictFlavor::Leaked => build_dictionary(
            &leaked_context_features(train_data, NO_MASKING_LEAK),
            n,
            d_p,
            seed,
        )?,
    };
    cache.insert(flavor, dict.clone());
    Ok(Some(dict))
}

fn configure(base: &ModelConfig, variant: Variant, seed: u64) -> Result<ModelConfig> {
    let mut config = base.clone();
    config.seed = seed;
    match variant {
        Variant::Baseline => {
            config.use_ccim = false;
        }
        _ => {
            config.use_ccim = true;
            let ccim = config.ccim.as_mut().ok_or_else(|| {
                Error::Config("ablation base config carries no ccim settings".into())
            })?;
            ccim.kind = match variant {
                Variant::CcimFullAdditive => AttentionKind::Additive,
                Variant::UniformLambda => AttentionKind::Uniform,
                _ => AttentionKind::DotProduct,
            };
            ccim.use_prior = variant != Variant::NoPrior;
        }
    }
    Ok(config)
}

/// Train every requested variant for every seed on identical data.
/// Duplicate variant ids are dropped with a recorded warning.
pub fn run_ablation(
    base: &ModelConfig,
    train_data: &Dataset,
    test_data: &Dataset,
    variants: &[Variant],
    seeds: &[u64],
    dict_n: usize,
    d_p: Option<usize>,
) -> Result<AblationTable> {
    let mut table = AblationTable::default();
    let mut unique: Vec<Variant> = Vec::new();
    for &v in variants {
        if unique.contains(&v) {
            table
                .warnings
                .push(format!("duplicate variant `{}` dropped", v.id()));
        } else {
            unique.push(v);
        }
    }
    if unique.is_empty() {
        return Err(Error::Parameter("no variants requested".into()));
    }
    let d_p = d_p.unwrap_or_else(|| default_pca_dims(train_data.len(), train_data.config.d_c));

    for &seed in seeds {
        let mut dict_cache = BTreeMap::new();
        for &variant in &unique {
            let dict = dictionary_for(variant, train_data, dict_n, d_p, seed, &mut dict_cache)?;
            let config = configure(base, variant, seed)?;
            let state = train(&config, train_data, dict.as_ref())?;
            let report = evaluate(&state, test_data)?;
            table.records.push(RunRecord {
                variant: variant.id().to_string(),
                seed,
                n: dict.as_ref().map(|d| d.n()).unwrap_or(0),
                report,
            });
        }
    }
    Ok(table)
}

/// Dictionary-size sweep: the full dot-product model retrained with a fresh
/// clustered dictionary at every size in `n_list`.
pub fn sweep_n(
    base: &ModelConfig,
    train_data: &Dataset,
    test_data: &Dataset,
    n_list: &[usize],
    seeds: &[u64],
    d_p: Option<usize>,
) -> Result<Vec<RunRecord>> {
    if n_list.is_empty() {
        return Err(Error::Parameter("n list must not be empty".into()));
    }
    let d_p = d_p.unwrap_or_else(|| default_pca_dims(train_data.len(), train_data.config.d_c));
    let features = context_features(train_data, true);
    let mut records = Vec::new();
    for &seed in seeds {
        for &n in n_list {
            let dict = build_dictionary(&features, n, d_p, seed)?;
            let config = configure(base, Variant::CcimFullDot, seed)?;
            let state = train(&config, train_data, Some(&dict))?;
            let report = evaluate(&state, test_data)?;
            records.push(RunRecord {
                variant: format!("n={n}"),
                seed,
                n,
                report,
            });
        }
    }
    Ok(records)
}

/// Median helper for directional comparisons across seeds.
pub fn median(values: &[f64]) -> f64 {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

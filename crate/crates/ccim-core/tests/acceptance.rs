//! Acceptance suite: one test per criterion, each printing a PASS line with
//! the measured numbers. Run with `cargo test --test acceptance -- --nocapture`
//! to see the per-criterion lines.

use std::time::Instant;

use ccim_core::ablation::{median, run_ablation, Variant};
use ccim_core::ccim::{
    attention_weights, ccim_backward, ccim_forward, init_params, AttentionKind, CcimDims,
    CcimParams,
};
use ccim_core::dictionary::{build_dictionary, random_dictionary, ConfounderDictionary};
use ccim_core::matrix::Matrix;
use ccim_core::metrics::average_precision;
use ccim_core::model::{CcimSettings, ModelConfig};
use ccim_core::synthetic::{bias_audit, binary_entropy, generate, GeneratorConfig};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Shared dataset config for the de-confounding and ablation criteria: a
/// strong train-split confounder (rho = 0.95) over a wide, noisy context,
/// with the subject signal tuned so the baseline lands mid-range.
fn benchmark_generator() -> GeneratorConfig {
    GeneratorConfig {
        n_contexts: 8,
        n_emotions: 4,
        d_s: 16,
        d_c: 48,
        rho: 0.95,
        sigma_s: 0.6,
        sigma_c: 2.0,
        subject_signal: 1.2,
        n_train: 500,
        n_test: 2000,
        leak_alpha: 0.0,
    }
}

fn benchmark_model() -> ModelConfig {
    ModelConfig {
        enc_hidden: 32,
        d_h: 32,
        use_ccim: false,
        ccim: Some(CcimSettings {
            out_dim: 32,
            attn_dim: 16,
            init_scale: 2.0,
            ..CcimSettings::default()
        }),
        lr: 0.1,
        momentum: 0.9,
        epochs: 40,
        batch: 64,
        seed: 0,
    }
}

/// Relative error with an absolute floor: central differences at step 1e-5
/// cannot resolve entries below ~1e-4 of the loss scale (roundoff in the
/// difference), so tinier entries are effectively compared absolutely.
fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-4)
}

// --- criterion 1: gradient parity ------------------------------------------

fn fd_max_rel_err(seed: u64, kind: AttentionKind, use_prior: bool) -> f64 {
    let dims = CcimDims::new(8, 6, 4, 5, 3).unwrap();
    let params = init_params(dims, seed, 0.7).unwrap();
    let dict = random_dictionary(3, 8, seed.wrapping_add(977), 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(4242));
    let joint: Vec<f64> = (0..6).map(|_| rng.random_range(-1.0..1.0)).collect();
    let grad_out: Vec<f64> = (0..4).map(|_| rng.random_range(-1.0..1.0)).collect();

    let loss = |p: &CcimParams, h: &[f64]| -> f64 {
        let (out, _) = ccim_forward(h, &dict, p, kind, use_prior).unwrap();
        out.iter().zip(&grad_out).map(|(o, g)| o * g).sum()
    };

    let (_, cache) = ccim_forward(&joint, &dict, &params, kind, use_prior).unwrap();
    let grads = ccim_backward(&cache, &dict, &params, kind, use_prior, &grad_out).unwrap();

    let eps = 1e-5;
    let mut worst: f64 = 0.0;

    macro_rules! check_matrix {
        ($field:ident) => {
            for r in 0..params.$field.rows() {
                for c in 0..params.$field.cols() {
                    let mut plus = params.clone();
                    plus.$field.set(r, c, plus.$field.get(r, c) + eps);
                    let mut minus = params.clone();
                    minus.$field.set(r, c, minus.$field.get(r, c) - eps);
                    let num = (loss(&plus, &joint) - loss(&minus, &joint)) / (2.0 * eps);
                    worst = worst.max(rel_err(grads.$field.get(r, c), num));
                }
            }
        };
    }
    check_matrix!(feature_proj);
    check_matrix!(context_proj);
    check_matrix!(query_proj);
    check_matrix!(key_proj);
    for a in 0..params.score_weights.len() {
        let mut plus = params.clone();
        plus.score_weights[a] += eps;
        let mut minus = params.clone();
        minus.score_weights[a] -= eps;
        let num = (loss(&plus, &joint) - loss(&minus, &joint)) / (2.0 * eps);
        worst = worst.max(rel_err(grads.score_weights[a], num));
    }
    for j in 0..joint.len() {
        let mut plus = joint.clone();
        plus[j] += eps;
        let mut minus = joint.clone();
        minus[j] -= eps;
        let num = (loss(&params, &plus) - loss(&params, &minus)) / (2.0 * eps);
        worst = worst.max(rel_err(grads.joint[j], num));
    }
    worst
}

#[test]
fn criterion_1_gradient_parity() {
    let started = Instant::now();
    let mut worst: f64 = 0.0;
    for seed in 0..20u64 {
        for kind in [AttentionKind::DotProduct, AttentionKind::Additive] {
            for use_prior in [true, false] {
                worst = worst.max(fd_max_rel_err(seed, kind, use_prior));
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        worst < 1e-5,
        "max relative error {worst} across 20 seeds x kinds x prior modes"
    );
    assert!(elapsed < 5.0, "gradient parity took {elapsed:.2}s (limit 5s)");
    println!(
        "ACCEPTANCE 1 PASS gradient parity: max rel err {worst:.2e} (< 1e-5), {elapsed:.2}s (< 5s)"
    );
}

// --- criterion 2: normalization invariants ----------------------------------

#[test]
fn criterion_2_normalization_invariants() {
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    // attention weights over 1000 random instances
    for trial in 0..1000u64 {
        let n = rng.random_range(1..=12);
        let d = rng.random_range(1..=10);
        let d_h = rng.random_range(1..=10);
        let d_n = rng.random_range(1..=8);
        let dims = CcimDims::new(d, d_h, 3, d_n, n).unwrap();
        let params = init_params(dims, trial, 1.5).unwrap();
        let dict = random_dictionary(n, d, trial.wrapping_add(5000), 2.0).unwrap();
        let joint: Vec<f64> = (0..d_h).map(|_| rng.random_range(-3.0..3.0)).collect();
        let kind = if trial % 2 == 0 {
            AttentionKind::DotProduct
        } else {
            AttentionKind::Additive
        };
        let weights = attention_weights(&joint, &dict, &params, kind).unwrap();
        let sum: f64 = weights.iter().sum();
        assert!(
            (sum - 1.0).abs() < 1e-12,
            "trial {trial}: attention sum {sum}"
        );
        assert!(weights.iter().all(|&w| w >= 0.0));
    }

    // dictionary priors over 1000 randomized builds (mixed clustered/random)
    for trial in 0..1000u64 {
        let dict = if trial % 2 == 0 {
            let rows: Vec<Vec<f64>> = (0..40)
                .map(|_| (0..4).map(|_| rng.random_range(-2.0..2.0)).collect())
                .collect();
            let features = Matrix::from_rows(rows).unwrap();
            let n = 1 + (trial as usize % 7);
            build_dictionary(&features, n, 3, trial).unwrap()
        } else {
            random_dictionary(1 + (trial as usize % 9), 5, trial, 1.0).unwrap()
        };
        let sum: f64 = dict.priors().iter().sum();
        assert!(
            (sum - 1.0).abs() < 1e-12,
            "trial {trial}: prior sum {sum}"
        );
    }
    println!(
        "ACCEPTANCE 2 PASS normalization: attention sums and prior sums within 1e-12 over 1000 trials each"
    );
}

// --- criterion 3: oracle equivalence ----------------------------------------

/// Scalar-loop evaluation of the layer, independent of the crate's matrix
/// helpers.
fn oracle_forward(
    joint: &[f64],
    dict: &ConfounderDictionary,
    p: &CcimParams,
    kind: AttentionKind,
    use_prior: bool,
) -> Vec<f64> {
    let n = dict.n();
    let d = dict.dim();
    let d_n = p.score_weights.len();
    let d_m = p.feature_proj.rows();

    let mut query = vec![0.0; d_n];
    for (a, q) in query.iter_mut().enumerate() {
        for (j, &hj) in joint.iter().enumerate() {
            *q += p.query_proj.get(a, j) * hj;
        }
    }
    let mut logits = vec![0.0; n];
    for i in 0..n {
        let z = dict.prototype(i);
        let mut key = vec![0.0; d_n];
        for (a, k) in key.iter_mut().enumerate() {
            for (c, &zc) in z.iter().enumerate() {
                *k += p.key_proj.get(a, c) * zc;
            }
        }
        logits[i] = match kind {
            AttentionKind::DotProduct => {
                let mut acc = 0.0;
                for a in 0..d_n {
                    acc += query[a] * key[a];
                }
                acc / (d as f64).sqrt()
            }
            AttentionKind::Additive => {
                let mut acc = 0.0;
                for a in 0..d_n {
                    acc += p.score_weights[a] * (query[a] + key[a]).tanh();
                }
                acc
            }
            _ => 0.0,
        };
    }
    let lambda: Vec<f64> = match kind {
        AttentionKind::Uniform => vec![1.0 / n as f64; n],
        AttentionKind::None => vec![1.0; n],
        _ => {
            let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
            let s: f64 = exps.iter().sum();
            exps.iter().map(|e| e / s).collect()
        }
    };
    let mut expectation = vec![0.0; d];
    for i in 0..n {
        let w = if use_prior {
            lambda[i] * dict.priors()[i]
        } else {
            lambda[i]
        };
        for (c, &zc) in dict.prototype(i).iter().enumerate() {
            expectation[c] += w * zc;
        }
    }
    let mut out = vec![0.0; d_m];
    for (m, o) in out.iter_mut().enumerate() {
        for (j, &hj) in joint.iter().enumerate() {
            *o += p.feature_proj.get(m, j) * hj;
        }
        for (c, &ec) in expectation.iter().enumerate() {
            *o += p.context_proj.get(m, c) * ec;
        }
    }
    out
}

/// Rank every positive by counting pairwise comparisons, then sum
/// precision-at-rank in rank order.
fn brute_force_ap(scores: &[f64], labels: &[bool]) -> f64 {
    let n = scores.len();
    let beats = |i: usize, j: usize| scores[j] > scores[i] || (scores[j] == scores[i] && j < i);
    let mut entries: Vec<(usize, f64)> = Vec::new();
    for i in 0..n {
        if !labels[i] {
            continue;
        }
        let rank = 1 + (0..n).filter(|&j| j != i && beats(i, j)).count();
        let at_or_above = (0..n)
            .filter(|&p| labels[p])
            .filter(|&p| (0..n).filter(|&j| j != p && beats(p, j)).count() < rank)
            .count();
        entries.push((rank, at_or_above as f64 / rank as f64));
    }
    if entries.is_empty() {
        return 0.0;
    }
    entries.sort_by_key(|&(r, _)| r);
    let n_pos = entries.len() as f64;
    entries.iter().map(|&(_, p)| p).sum::<f64>() / n_pos
}

#[test]
fn criterion_3_oracle_equivalence() {
    let mut rng = ChaCha8Rng::seed_from_u64(30);
    let mut worst: f64 = 0.0;
    for trial in 0..100u64 {
        let n = rng.random_range(1..=10);
        let d = rng.random_range(1..=9);
        let d_h = rng.random_range(1..=9);
        let d_m = rng.random_range(1..=6);
        let d_n = rng.random_range(1..=7);
        let dims = CcimDims::new(d, d_h, d_m, d_n, n).unwrap();
        let params = init_params(dims, trial, 0.8).unwrap();
        let dict = random_dictionary(n, d, trial.wrapping_add(31), 1.3).unwrap();
        let joint: Vec<f64> = (0..d_h).map(|_| rng.random_range(-2.0..2.0)).collect();
        let kind = match trial % 4 {
            0 => AttentionKind::DotProduct,
            1 => AttentionKind::Additive,
            2 => AttentionKind::Uniform,
            _ => AttentionKind::None,
        };
        let use_prior = trial % 3 != 0;
        let (out, _) = ccim_forward(&joint, &dict, &params, kind, use_prior).unwrap();
        let oracle = oracle_forward(&joint, &dict, &params, kind, use_prior);
        for (a, b) in out.iter().zip(&oracle) {
            worst = worst.max((a - b).abs());
        }
    }
    assert!(worst < 1e-12, "layer vs scalar oracle diverged by {worst}");

    for trial in 0..500u64 {
        let mut trng = ChaCha8Rng::seed_from_u64(4000 + trial);
        let len = trng.random_range(1..=20);
        let scores: Vec<f64> = (0..len).map(|_| trng.random_range(0..6) as f64).collect();
        let labels: Vec<bool> = (0..len).map(|_| trng.random::<f64>() < 0.4).collect();
        let fast = average_precision(&scores, &labels).unwrap();
        let slow = brute_force_ap(&scores, &labels);
        assert_eq!(fast, slow, "AP mismatch on trial {trial}");
    }
    println!(
        "ACCEPTANCE 3 PASS oracle equivalence: forward within {worst:.2e} of scalar loop (100 trials); AP exact vs brute force (500 trials, len <= 20)"
    );
}

// --- criterion 4: dictionary recovery ----------------------------------------

#[test]
fn criterion_4_dictionary_recovery() {
    let mut worst_dist: f64 = 0.0;
    for seed in 0..10u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let noise = Normal::new(0.0, 0.5).unwrap();
        let mut rows = Vec::new();
        for sign in [1.0f64, -1.0] {
            for _ in 0..100 {
                rows.push(
                    (0..8)
                        .map(|_| 5.0 * sign + noise.sample(&mut rng))
                        .collect::<Vec<f64>>(),
                );
            }
        }
        let features = Matrix::from_rows(rows).unwrap();
        let mut blob_means = [vec![0.0; 8], vec![0.0; 8]];
        for i in 0..100 {
            for c in 0..8 {
                blob_means[0][c] += features.get(i, c) / 100.0;
                blob_means[1][c] += features.get(100 + i, c) / 100.0;
            }
        }

        let dict = build_dictionary(&features, 2, 4, seed).unwrap();
        let mut priors = dict.priors().to_vec();
        priors.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert_eq!(priors, vec![0.5, 0.5], "seed {seed}: priors not (0.5, 0.5)");
        for target in &blob_means {
            let best = (0..2)
                .map(|i| {
                    dict.prototype(i)
                        .iter()
                        .zip(target.iter())
                        .map(|(a, b)| (a - b) * (a - b))
                        .sum::<f64>()
                        .sqrt()
                })
                .fold(f64::INFINITY, f64::min);
            assert!(best < 0.15, "seed {seed}: prototype {best} from blob mean");
            worst_dist = worst_dist.max(best);
        }
    }
    println!(
        "ACCEPTANCE 4 PASS dictionary recovery: priors exactly (0.5, 0.5) and prototypes within {worst_dist:.4} (< 0.15) of blob means, 10/10 seeds"
    );
}

// --- criterion 5: bias audit ---------------------------------------------------

#[test]
fn criterion_5_bias_audit() {
    let mut config = benchmark_generator();
    config.d_c = 16; // audit only looks at labels/context ids
    config.rho = 1.0;
    config.n_train = 2000;
    let (train_data, _) = generate(&config, 0).unwrap();
    let full_bias = bias_audit(&train_data, 0).unwrap();
    assert_eq!(full_bias.zero_entropy_fraction, 1.0);

    config.rho = 0.0;
    config.n_train = 10_000;
    let (train_data, _) = generate(&config, 1).unwrap();
    let no_bias = bias_audit(&train_data, 0).unwrap();
    assert!(
        no_bias.zero_entropy_fraction < 0.05,
        "rho=0 fraction {}",
        no_bias.zero_entropy_fraction
    );

    let h = binary_entropy(0.25);
    assert!((h - 0.811278).abs() < 1e-6, "entropy(0.25) = {h}");
    println!(
        "ACCEPTANCE 5 PASS bias audit: rho=1 fraction 1.0 exactly; rho=0 fraction {:.4} (< 0.05); H(0.25) = {h:.6} (0.811278 +- 1e-6)",
        no_bias.zero_entropy_fraction
    );
}

// --- criteria 6 & 7: de-confounding and ablation directions -------------------

#[test]
fn criterion_6_deconfounding_direction() {
    let started = Instant::now();
    let gen = benchmark_generator();
    let model = benchmark_model();
    let seeds: Vec<u64> = (0..7).collect();
    let mut base_acc = Vec::new();
    let mut ccim_acc = Vec::new();
    for &seed in &seeds {
        let (train_data, test_data) = generate(&gen, seed).unwrap();
        let table = run_ablation(
            &model,
            &train_data,
            &test_data,
            &[Variant::Baseline, Variant::CcimFullDot],
            &[seed],
            8,
            None,
        )
        .unwrap();
        for r in &table.records {
            assert!(
                r.report.loss_curve.iter().all(|l| l.is_finite()),
                "non-finite train loss in {} seed {seed}",
                r.variant
            );
            if r.variant == "baseline" {
                base_acc.push(r.report.accuracy);
            } else {
                ccim_acc.push(r.report.accuracy);
            }
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    let base = median(&base_acc);
    let ccim = median(&ccim_acc);
    let chance = 0.25;
    assert!(
        base > chance && base < 0.9,
        "baseline median {base} outside (chance, 0.9)"
    );
    assert!(ccim >= base, "ccim median {ccim} < baseline median {base}");
    assert!(ccim > chance);
    assert!(elapsed < 300.0, "took {elapsed:.0}s (limit 300s)");
    println!(
        "ACCEPTANCE 6 PASS de-confounding direction: median accuracy ccim {ccim:.4} >= baseline {base:.4}, both > {chance}, in {elapsed:.0}s (< 300s)"
    );
}

#[test]
fn criterion_7_ablation_directions() {
    let gen = benchmark_generator();
    let model = benchmark_model();
    let seeds: Vec<u64> = (0..7).collect();
    let variants = [
        Variant::CcimFullDot,
        Variant::RandomZ,
        Variant::UniformLambda,
        Variant::NoPrior,
        Variant::NoMasking,
    ];
    let mut map_by: std::collections::BTreeMap<String, Vec<f64>> = Default::default();
    for &seed in &seeds {
        let (train_data, test_data) = generate(&gen, seed).unwrap();
        let table =
            run_ablation(&model, &train_data, &test_data, &variants, &[seed], 8, None).unwrap();
        for r in &table.records {
            map_by
                .entry(r.variant.clone())
                .or_default()
                .push(r.report.map);
        }
    }
    let full = median(&map_by["ccim_full_dot"]);
    let mut line = format!("ccim_full_dot {full:.4}");
    for v in ["random_Z", "uniform_lambda", "no_prior", "no_masking"] {
        let m = median(&map_by[v]);
        assert!(
            full >= m,
            "median mAP: ccim_full_dot {full:.4} < {v} {m:.4}"
        );
        line.push_str(&format!(" >= {v} {m:.4}"));
    }
    println!("ACCEPTANCE 7 PASS ablation directions (median mAP over 7 seeds): {line}");
}

// --- criteria 8 & 9: CLI machinery ---------------------------------------------

fn ccim_bin() -> std::process::Command {
    std::process::Command::new(env!("CARGO_BIN_EXE_ccim"))
}

fn quick_generator_json() -> String {
    serde_json::to_string(&GeneratorConfig {
        n_contexts: 8,
        n_emotions: 4,
        d_s: 8,
        d_c: 12,
        rho: 0.95,
        sigma_s: 0.6,
        sigma_c: 0.5,
        subject_signal: 1.2,
        n_train: 200,
        n_test: 200,
        leak_alpha: 0.0,
    })
    .unwrap()
}

fn quick_model_json() -> String {
    serde_json::to_string(&ModelConfig {
        enc_hidden: 8,
        d_h: 8,
        use_ccim: true,
        ccim: Some(CcimSettings {
            out_dim: 8,
            attn_dim: 4,
            ..CcimSettings::default()
        }),
        lr: 0.1,
        momentum: 0.9,
        epochs: 3,
        batch: 32,
        seed: 0,
    })
    .unwrap()
}

#[test]
fn criterion_8_sweep_machinery() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("gen.json");
    std::fs::write(&cfg, quick_generator_json()).unwrap();
    let data_dir = dir.path().join("data");
    let status = ccim_bin()
        .args(["gen-data", "--config"])
        .arg(&cfg)
        .args(["--seed", "0", "--out"])
        .arg(&data_dir)
        .status()
        .unwrap();
    assert!(status.success());

    let model_cfg = dir.path().join("model.json");
    std::fs::write(&model_cfg, quick_model_json()).unwrap();
    let sweep_dir = dir.path().join("sweep");
    let status = ccim_bin()
        .args(["sweep-n", "--data"])
        .arg(&data_dir)
        .args(["--n-list", "2,4,8,16,32", "--seeds", "3", "--model"])
        .arg(&model_cfg)
        .args(["--out"])
        .arg(&sweep_dir)
        .status()
        .unwrap();
    assert!(status.success());

    let text = std::fs::read_to_string(sweep_dir.join("sweep.csv")).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap();
    assert_eq!(header, "n,seed,metric,value");
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 15, "expected 15 rows, got {}", rows.len());
    // one row per (n, seed) pair, enough to plot metric vs N
    let mut pairs = std::collections::BTreeSet::new();
    for row in &rows {
        let fields: Vec<&str> = row.split(',').collect();
        pairs.insert((fields[0].to_string(), fields[1].to_string()));
        fields[3].parse::<f64>().unwrap();
    }
    assert_eq!(pairs.len(), 15);
    println!("ACCEPTANCE 8 PASS sweep machinery: 5 sizes x 3 seeds -> 15 rows in sweep.csv");
}

#[test]
fn criterion_9_cli_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("gen.json");
    std::fs::write(&cfg, quick_generator_json()).unwrap();

    let mut datasets = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("data{run}"));
        let status = ccim_bin()
            .args(["gen-data", "--config"])
            .arg(&cfg)
            .args(["--seed", "7", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        datasets.push(out);
    }
    for file in ["train.csv", "test.csv", "fingerprint.json"] {
        let a = std::fs::read(datasets[0].join(file)).unwrap();
        let b = std::fs::read(datasets[1].join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical invocations");
    }

    // identical dictionaries from identical flags
    let mut dicts = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("dict{run}.json"));
        let status = ccim_bin()
            .args(["build-dict", "--features"])
            .arg(datasets[0].join("train.csv"))
            .args(["--n", "4", "--seed", "3", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        dicts.push(out);
    }
    assert_eq!(
        std::fs::read(&dicts[0]).unwrap(),
        std::fs::read(&dicts[1]).unwrap()
    );

    // identical metrics from identical training runs
    let model_cfg = dir.path().join("model.json");
    std::fs::write(&model_cfg, quick_model_json()).unwrap();
    let mut metrics = Vec::new();
    for run in 0..2 {
        let out = dir.path().join(format!("run{run}"));
        let status = ccim_bin()
            .args(["train", "--data"])
            .arg(&datasets[0])
            .args(["--dict"])
            .arg(&dicts[0])
            .args(["--model"])
            .arg(&model_cfg)
            .args(["--seed", "11", "--out"])
            .arg(&out)
            .status()
            .unwrap();
        assert!(status.success());
        metrics.push(std::fs::read(out.join("metrics.csv")).unwrap());
    }
    assert_eq!(metrics[0], metrics[1], "metrics.csv differs across reruns");
    println!(
        "ACCEPTANCE 9 PASS determinism: gen-data, build-dict and train reproduce byte-identical outputs"
    );
}

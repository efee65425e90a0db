//! Checks shared by the acceptance runner and the per-area integration tests.
//! Each check returns a one-line summary on success and a reason on failure.
#![allow(dead_code)]

use std::path::PathBuf;
use std::time::{Duration, Instant};

use rand::seq::index::sample as sample_indices;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use senti_risk::alert::{alerts_to_jsonl, detect_inflections, AlertKind, AlertRuleConfig};
use senti_risk::data::{
    clean_text, make_windows, prepare, split_chronological, AlignedDay, Lexicon, PrepareConfig, RawTextDoc,
    Sentiment, SplitRatios, WindowSample, UNK_ID,
};
use senti_risk::layers::{
    attention_pool, conv1d_forward, gru_forward, gru_step, global_max_pool, global_max_pool_backward, AttentionParams,
    Conv1dParams, DenseParams, EmbeddingTable, GruParams,
};
use senti_risk::model::{build_model, checkpoint_to_string, load_checkpoint, save_checkpoint, ArchKind, Model, ModelConfig};
use senti_risk::numeric::relative_error;
use senti_risk::optim::OptimizerKind;
use senti_risk::synthetic::{ablation_dataset, random_sample, sinusoid_bars, AblationSpec, ABLATION_DOC_LEN, ABLATION_VOCAB};
use senti_risk::train::{
    compare_ablations, history_to_jsonl, mean_loss, parse_daily_predictions, persistence_mse, price_mse, price_rows,
    train, MetricsReport, TrainConfig,
};
use senti_risk::Matrix;

pub type Check = Result<String, String>;

pub const FD_STEP: f64 = 1e-5;
pub const GRAD_TOL: f64 = 1e-4;
pub const MIN_COORDS: usize = 100;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join("fixtures").join(name)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, budget: Duration, what: &str) -> Result<(), String> {
    ensure(elapsed < budget, || format!("{what} took {elapsed:.1?}, budget {budget:?}"))
}

pub fn normal_matrix(rows: usize, cols: usize, std: f64, rng: &mut ChaCha8Rng) -> Matrix {
    let n = Normal::new(0.0, std).unwrap();
    Matrix::from_vec(rows, cols, (0..rows * cols).map(|_| n.sample(rng)).collect()).unwrap()
}

fn dot(a: &Matrix, b: &Matrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| x * y).sum()
}

// ---------------------------------------------------------------- gradients

/// Every coordinate when the tensor has at most [`MIN_COORDS`] entries among
/// `allowed`, otherwise [`MIN_COORDS`] distinct random ones.
pub fn probe_coords(allowed: &[usize], rng: &mut ChaCha8Rng) -> Vec<usize> {
    if allowed.len() <= MIN_COORDS {
        return allowed.to_vec();
    }
    let mut picked: Vec<usize> = sample_indices(rng, allowed.len(), MIN_COORDS).into_iter().map(|i| allowed[i]).collect();
    picked.sort_unstable();
    picked
}

/// Largest relative error between `analytic` and central differences of `f`
/// around `x`, over `coords`.
pub fn fd_error(x: &Matrix, analytic: &Matrix, coords: &[usize], mut f: impl FnMut(&Matrix) -> f64) -> f64 {
    assert_eq!(x.shape(), analytic.shape());
    let mut probe = x.clone();
    let mut worst = 0.0f64;
    for &i in coords {
        let orig = x.as_slice()[i];
        probe.as_mut_slice()[i] = orig + FD_STEP;
        let plus = f(&probe);
        probe.as_mut_slice()[i] = orig - FD_STEP;
        let minus = f(&probe);
        probe.as_mut_slice()[i] = orig;
        let numeric = (plus - minus) / (2.0 * FD_STEP);
        worst = worst.max(relative_error(analytic.as_slice()[i], numeric));
    }
    worst
}

#[derive(Debug, Clone)]
pub struct GradReport {
    pub name: String,
    pub coords: usize,
    pub max_rel_err: f64,
}

fn report(name: impl Into<String>, coords: usize, err: f64) -> GradReport {
    GradReport {
        name: name.into(),
        coords,
        max_rel_err: err,
    }
}

fn all(len: usize) -> Vec<usize> {
    (0..len).collect()
}

/// Compares a tensor's analytic gradient with central differences at the
/// probed coordinates and records the result.
fn check_into(out: &mut Vec<GradReport>, name: String, x: &Matrix, analytic: &Matrix, rng: &mut ChaCha8Rng, f: impl FnMut(&Matrix) -> f64) {
    let coords = probe_coords(&all(x.len()), rng);
    let err = fd_error(x, analytic, &coords, f);
    out.push(report(name, coords.len(), err));
}

pub fn conv_gradients(rng: &mut ChaCha8Rng) -> Vec<GradReport> {
    let (len, channels, filters) = (30, 40, 3);
    let params = Conv1dParams::new((0..filters).map(|_| normal_matrix(3, channels, 0.5, rng)).collect(), 3).unwrap();
    let input = normal_matrix(len, channels, 1.0, rng);
    let (out, cache) = conv1d_forward(&params, &input).unwrap();
    let c = normal_matrix(out.rows(), filters, 1.0, rng);
    let mut grads = params.zeros_like();
    let d_input = params.backward(&cache, &c, &mut grads).unwrap();
    let mut reports = Vec::new();
    check_into(&mut reports, "conv1d input".into(), &input, &d_input, rng, |x| dot(&conv1d_forward(&params, x).unwrap().0, &c));
    for f in 0..filters {
        check_into(&mut reports, format!("conv1d kernel {f}"), &params.kernels[f], &grads.kernels[f], rng, |k| {
            let mut p = params.clone();
            p.kernels[f] = k.clone();
            dot(&conv1d_forward(&p, &input).unwrap().0, &c)
        });
    }
    reports
}

pub fn max_pool_gradients(rng: &mut ChaCha8Rng) -> Vec<GradReport> {
    let featmap = normal_matrix(10, 12, 1.0, rng);
    let c = normal_matrix(12, 1, 1.0, rng);
    let (_, memo) = global_max_pool(&featmap).unwrap();
    let d = global_max_pool_backward(&memo, featmap.rows(), &c).unwrap();
    let mut reports = Vec::new();
    check_into(&mut reports, "max-pool input".into(), &featmap, &d, rng, |x| dot(&global_max_pool(x).unwrap().0, &c));
    reports
}

fn gru_params(h: usize, d: usize, rng: &mut ChaCha8Rng) -> GruParams {
    GruParams::new(normal_matrix(h, h + d, 0.5, rng), normal_matrix(h, h + d, 0.5, rng), normal_matrix(h, h + d, 0.5, rng)).unwrap()
}

fn with_gru_tensor(p: &GruParams, which: usize, m: &Matrix) -> GruParams {
    let mut p = p.clone();
    *[&mut p.w_z, &mut p.w_r, &mut p.w][which] = m.clone();
    p
}

pub fn gru_step_gradients(rng: &mut ChaCha8Rng) -> Vec<GradReport> {
    let (h, d) = (8, 8);
    let params = gru_params(h, d, rng);
    let h_prev = normal_matrix(h, 1, 0.5, rng);
    let x = normal_matrix(d, 1, 1.0, rng);
    let c = normal_matrix(h, 1, 1.0, rng);
    let (_, cache) = gru_step(&params, &h_prev, &x).unwrap();
    let mut grads = params.zeros_like();
    let (d_h_prev, d_x) = params.step_backward(&cache, &c, &mut grads).unwrap();
    let loss = |p: &GruParams, hp: &Matrix, x: &Matrix| dot(&gru_step(p, hp, x).unwrap().0, &c);
    let mut reports = Vec::new();
    for (which, name) in ["w_z", "w_r", "w"].iter().enumerate() {
        let analytic = [&grads.w_z, &grads.w_r, &grads.w][which];
        let current = [&params.w_z, &params.w_r, &params.w][which];
        check_into(&mut reports, format!("gru step {name}"), current, analytic, rng, |m| loss(&with_gru_tensor(&params, which, m), &h_prev, &x));
    }
    check_into(&mut reports, "gru step h_prev".into(), &h_prev, &d_h_prev, rng, |m| loss(&params, m, &x));
    check_into(&mut reports, "gru step x".into(), &x, &d_x, rng, |m| loss(&params, &h_prev, m));
    reports
}

pub fn gru_unrolled_gradients(rng: &mut ChaCha8Rng) -> Vec<GradReport> {
    let (h, d, steps) = (8, 8, 5);
    let params = gru_params(h, d, rng);
    let h0 = normal_matrix(h, 1, 0.5, rng);
    let xs: Vec<Matrix> = (0..steps).map(|_| normal_matrix(d, 1, 1.0, rng)).collect();
    let cs: Vec<Matrix> = (0..steps).map(|_| normal_matrix(h, 1, 1.0, rng)).collect();
    let loss = |p: &GruParams, h0: &Matrix, xs: &[Matrix]| -> f64 {
        let trace = gru_forward(p, xs, Some(h0)).unwrap();
        trace.hiddens.iter().zip(&cs).map(|(hh, c)| dot(hh, c)).sum()
    };
    let trace = gru_forward(&params, &xs, Some(&h0)).unwrap();
    let mut grads = params.zeros_like();
    let (d_xs, d_h0) = params.backward(&trace.caches, &cs, &mut grads).unwrap();
    let mut reports = Vec::new();
    for (which, name) in ["w_z", "w_r", "w"].iter().enumerate() {
        let analytic = [&grads.w_z, &grads.w_r, &grads.w][which];
        let current = [&params.w_z, &params.w_r, &params.w][which];
        check_into(&mut reports, format!("gru x5 {name}"), current, analytic, rng, |m| loss(&with_gru_tensor(&params, which, m), &h0, &xs));
    }
    check_into(&mut reports, "gru x5 h0".into(), &h0, &d_h0, rng, |m| loss(&params, m, &xs));
    for t in 0..steps {
        check_into(&mut reports, format!("gru x5 x[{t}]"), &xs[t], &d_xs[t], rng, |m| {
            let mut v = xs.clone();
            v[t] = m.clone();
            loss(&params, &h0, &v)
        });
    }
    reports
}

pub fn attention_gradients(rng: &mut ChaCha8Rng) -> Vec<GradReport> {
    let (n, h, a) = (6, 20, 10);
    let params = AttentionParams::new(normal_matrix(a, h, 0.4, rng), normal_matrix(a, 1, 1.0, rng)).unwrap();
    let hiddens: Vec<Matrix> = (0..n).map(|_| normal_matrix(h, 1, 0.7, rng)).collect();
    let c = normal_matrix(h, 1, 1.0, rng);
    let loss = |p: &AttentionParams, hs: &[Matrix]| dot(&attention_pool(p, hs).unwrap().0, &c);
    let (_, _, cache) = attention_pool(&params, &hiddens).unwrap();
    let mut grads = params.zeros_like();
    let d_hiddens = params.backward(&cache, &c, &mut grads).unwrap();
    let mut reports = Vec::new();
    check_into(&mut reports, "attention w_a".into(), &params.w_a, &grads.w_a, rng, |m| {
        loss(&AttentionParams::new(m.clone(), params.u.clone()).unwrap(), &hiddens)
    });
    check_into(&mut reports, "attention u".into(), &params.u, &grads.u, rng, |m| {
        loss(&AttentionParams::new(params.w_a.clone(), m.clone()).unwrap(), &hiddens)
    });
    for t in 0..n {
        check_into(&mut reports, format!("attention h[{t}]"), &hiddens[t], &d_hiddens[t], rng, |m| {
            let mut v = hiddens.clone();
            v[t] = m.clone();
            loss(&params, &v)
        });
    }
    reports
}

pub fn dense_gradients(rng: &mut ChaCha8Rng) -> Vec<GradReport> {
    let params = DenseParams::new(normal_matrix(10, 12, 0.5, rng), normal_matrix(10, 1, 0.5, rng)).unwrap();
    let x = normal_matrix(12, 1, 1.0, rng);
    let c = normal_matrix(10, 1, 1.0, rng);
    let mut grads = params.zeros_like();
    let d_x = params.backward(&x, &c, &mut grads).unwrap();
    let loss = |p: &DenseParams, x: &Matrix| dot(&p.forward(x).unwrap(), &c);
    let mut reports = Vec::new();
    check_into(&mut reports, "dense w".into(), &params.w, &grads.w, rng, |m| loss(&DenseParams::new(m.clone(), params.b.clone()).unwrap(), &x));
    check_into(&mut reports, "dense b".into(), &params.b, &grads.b, rng, |m| loss(&DenseParams::new(params.w.clone(), m.clone()).unwrap(), &x));
    check_into(&mut reports, "dense x".into(), &x, &d_x, rng, |m| loss(&params, m));
    reports
}

/// Rows 1.. of an embedding table; the pad row is frozen at zero.
fn non_pad_coords(table: &Matrix) -> Vec<usize> {
    (table.cols()..table.len()).collect()
}

pub fn embedding_gradients(rng: &mut ChaCha8Rng) -> Result<Vec<GradReport>, String> {
    let (vocab, dim, max_len) = (30, 5, 10);
    let table = EmbeddingTable::new(normal_matrix(vocab, dim, 1.0, rng));
    // repeats, pads and two ids past max_len that must be truncated away
    let ids: Vec<u32> = vec![3, 7, 0, 3, 29, 1, 0, 12, 7, 5, 9, 9];
    let c = normal_matrix(max_len, dim, 1.0, rng);
    let mut grad = Matrix::zeros(vocab, dim);
    table.backward(&ids, max_len, &c, &mut grad).unwrap();
    ensure(grad.row(0).iter().all(|&g| g == 0.0), || "pad row received gradient".into())?;
    let coords = probe_coords(&non_pad_coords(&table.table), rng);
    let err = fd_error(&table.table, &grad, &coords, |m| {
        let mut t = table.clone();
        t.table = m.clone();
        dot(&t.lookup(&ids, max_len).unwrap(), &c)
    });
    Ok(vec![report("embedding table", coords.len(), err)])
}

pub fn tiny_model_config(vocab_size: usize) -> ModelConfig {
    ModelConfig {
        vocab_size,
        embed_dim: 4,
        num_filters: 2,
        gru_hidden: 2,
        window: 3,
        max_doc_len: 9,
        attention_dim: 2,
        lambda: 0.4,
        seed: 3,
        ..ModelConfig::default()
    }
}

/// Full-model gradients of the joint loss, summed over a few random samples.
pub fn model_gradients(model: &Model, samples: &[WindowSample], rng: &mut ChaCha8Rng) -> Vec<GradReport> {
    let loss = |m: &Model| -> f64 {
        samples
            .iter()
            .map(|s| {
                let out = m.forward(s).unwrap();
                m.loss(&out, s.target_return, s.target_class).unwrap().joint
            })
            .sum()
    };
    let mut grads = model.params.zeros_like();
    for s in samples {
        let out = model.forward(s).unwrap();
        model.backward(&out.cache, s.target_return, s.target_class, &mut grads).unwrap();
    }
    let names: Vec<String> = model.params.tensors().into_iter().map(|(n, _)| n).collect();
    let analytic: Vec<Matrix> = grads.tensors().into_iter().map(|(_, m)| m.clone()).collect();
    let current: Vec<Matrix> = model.params.tensors().into_iter().map(|(_, m)| m.clone()).collect();
    let mut reports = Vec::new();
    for (k, name) in names.iter().enumerate() {
        let allowed = if name == "embedding" { non_pad_coords(&current[k]) } else { all(current[k].len()) };
        let coords = probe_coords(&allowed, rng);
        let err = fd_error(&current[k], &analytic[k], &coords, |m| {
            let mut probe = model.clone();
            *probe.params.tensors_mut()[k] = m.clone();
            loss(&probe)
        });
        reports.push(report(format!("{} {name}", model.arch), coords.len(), err));
    }
    reports
}

pub fn tiny_model_gradients(rng: &mut ChaCha8Rng) -> Vec<GradReport> {
    let mut reports = Vec::new();
    for (arch, attention) in [
        (ArchKind::CnnGru, true),
        (ArchKind::CnnGru, false),
        (ArchKind::GruOnly, true),
        (ArchKind::GruOnly, false),
        (ArchKind::CnnOnly, false),
    ] {
        let cfg = ModelConfig {
            attention_enabled: attention,
            ..tiny_model_config(12)
        };
        let model = build_model(&cfg, arch).unwrap();
        let samples: Vec<WindowSample> = (0..3).map(|_| random_sample(&cfg, rng)).collect();
        reports.extend(model_gradients(&model, &samples, rng));
    }
    reports
}

pub fn criterion_gradients() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut reports = Vec::new();
    reports.extend(conv_gradients(&mut rng));
    reports.extend(max_pool_gradients(&mut rng));
    reports.extend(gru_step_gradients(&mut rng));
    reports.extend(gru_unrolled_gradients(&mut rng));
    reports.extend(attention_gradients(&mut rng));
    reports.extend(dense_gradients(&mut rng));
    reports.extend(embedding_gradients(&mut rng)?);
    reports.extend(tiny_model_gradients(&mut rng));
    let worst = reports.iter().max_by(|a, b| a.max_rel_err.total_cmp(&b.max_rel_err)).unwrap();
    for r in &reports {
        ensure(r.max_rel_err <= GRAD_TOL, || format!("{}: max relative error {:.3e} over {} coords", r.name, r.max_rel_err, r.coords))?;
    }
    within(start.elapsed(), Duration::from_secs(60), "gradient checks")?;
    let coords: usize = reports.iter().map(|r| r.coords).sum();
    Ok(format!(
        "{} tensors, {coords} coords, worst {:.2e} ({}), {:.1?}",
        reports.len(),
        worst.max_rel_err,
        worst.name,
        start.elapsed()
    ))
}

// ---------------------------------------------------------------- GRU laws

/// Scalar GRU step written out element by element, independent of the matrix code.
pub fn reference_gru_step(p: &GruParams, h_prev: &[f64], x: &[f64]) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let (h, d) = (h_prev.len(), x.len());
    let sig = |v: f64| 1.0 / (1.0 + (-v).exp());
    let cat: Vec<f64> = h_prev.iter().chain(x).copied().collect();
    let gate = |w: &Matrix| -> Vec<f64> { (0..h).map(|i| sig((0..h + d).map(|j| w.get(i, j) * cat[j]).sum())).collect() };
    let z = gate(&p.w_z);
    let r = gate(&p.w_r);
    let reset: Vec<f64> = (0..h).map(|j| r[j] * h_prev[j]).chain(x.iter().copied()).collect();
    let cand: Vec<f64> = (0..h).map(|i| (0..h + d).map(|j| p.w.get(i, j) * reset[j]).sum::<f64>().tanh()).collect();
    let out = (0..h).map(|i| (1.0 - z[i]) * h_prev[i] + z[i] * cand[i]).collect();
    (z, r, cand, out)
}

pub fn criterion_gru_invariants() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut checked = 0usize;
    for trial in 0..1000 {
        let h = rng.random_range(1..=8);
        let d = rng.random_range(1..=8);
        let scale = rng.random_range(0.1..2.0);
        let p = gru_params(h, d, &mut rng);
        let p = GruParams::new(p.w_z.scale(scale), p.w_r.scale(scale), p.w.scale(scale)).unwrap();
        let h_prev: Vec<f64> = (0..h).map(|_| rng.random_range(-1.0..1.0)).collect();
        let x: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
        let (h_t, cache) = gru_step(&p, &Matrix::column(&h_prev).unwrap(), &Matrix::column(&x).unwrap()).unwrap();
        let open = |v: &f64, lo: f64, hi: f64| *v > lo && *v < hi;
        ensure(cache.z_t.as_slice().iter().all(|v| open(v, 0.0, 1.0)), || format!("trial {trial}: z outside (0,1)"))?;
        ensure(cache.r_t.as_slice().iter().all(|v| open(v, 0.0, 1.0)), || format!("trial {trial}: r outside (0,1)"))?;
        ensure(cache.h_tilde.as_slice().iter().all(|v| open(v, -1.0, 1.0)), || format!("trial {trial}: candidate outside (-1,1)"))?;
        for i in 0..h {
            let (a, b) = (h_prev[i], cache.h_tilde.get(i, 0));
            let slack = 4.0 * f64::EPSILON * a.abs().max(b.abs());
            let v = h_t.get(i, 0);
            ensure(v >= a.min(b) - slack && v <= a.max(b) + slack, || {
                format!("trial {trial}: h_t[{i}]={v} outside [{}, {}]", a.min(b), a.max(b))
            })?;
            checked += 1;
        }
    }
    Ok(format!("1000 triples, {checked} components inside the interpolation interval"))
}

pub fn criterion_param_count() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut pairs = Vec::new();
    for _ in 0..20 {
        let h = rng.random_range(1..=64usize);
        let d = rng.random_range(1..=64usize);
        let count = GruParams::init(h, d, &mut rng).param_count();
        let expected = 3 * h * (h + d);
        let lstm = 4 * h * (h + d);
        ensure(count == expected, || format!("h={h} d={d}: {count} parameters, expected {expected}"))?;
        ensure(4 * count == 3 * lstm, || format!("h={h} d={d}: {count} is not 3/4 of {lstm}"))?;
        // the same law seen through a whole model
        let cfg = ModelConfig {
            vocab_size: 7,
            embed_dim: 3,
            gru_hidden: h,
            window: 2,
            max_doc_len: 3,
            attention_enabled: false,
            ..ModelConfig::default()
        };
        let model = build_model(&cfg, ArchKind::GruOnly).unwrap();
        let gru_tensors: usize = model.params.tensors().iter().filter(|(n, _)| n.starts_with("gru.")).map(|(_, m)| m.len()).sum();
        let input = cfg.day_dim(ArchKind::GruOnly);
        ensure(gru_tensors == 3 * h * (h + input), || format!("model with h={h}: {gru_tensors} GRU parameters"))?;
        pairs.push((h, d));
    }
    Ok(format!("20 (h,d) pairs, e.g. {:?} -> {}", pairs[0], 3 * pairs[0].0 * (pairs[0].0 + pairs[0].1)))
}

// ---------------------------------------------------------------- ablation

pub struct AblationSetup {
    pub spec: AblationSpec,
    pub model: ModelConfig,
    pub train: TrainConfig,
    pub ratios: SplitRatios,
}

pub fn ablation_setup() -> AblationSetup {
    AblationSetup {
        spec: AblationSpec {
            episodes: 400,
            ..AblationSpec::default()
        },
        model: ModelConfig {
            vocab_size: ABLATION_VOCAB,
            embed_dim: 8,
            num_filters: 8,
            max_doc_len: ABLATION_DOC_LEN,
            attention_enabled: false,
            attention_dim: 8,
            lambda: 0.1,
            seed: 1,
            ..ModelConfig::default()
        },
        train: TrainConfig {
            lr: 3e-3,
            batch_size: 32,
            epochs: 50,
            patience: 1000,
            optimizer: OptimizerKind::Adam,
            weight_decay: 0.0,
            seed: 1,
        },
        ratios: SplitRatios::new(0.6, 0.2, 0.2).unwrap(),
    }
}

pub fn criterion_ablation() -> Check {
    let start = Instant::now();
    let setup = ablation_setup();
    let days = setup.spec.episodes * (setup.spec.warmup + setup.spec.rule_days);
    ensure(days >= 600, || format!("only {days} days generated"))?;
    let samples = ablation_dataset(&setup.spec, setup.model.window).map_err(|e| e.to_string())?;
    let splits = split_chronological(samples, setup.ratios).map_err(|e| e.to_string())?;
    let report = compare_ablations(&splits, &setup.model, &setup.train).map_err(|e| e.to_string())?;
    let acc = |arch| report.get(arch).and_then(|e| e.metrics.test.as_ref()).map(|m| m.accuracy).unwrap_or(f64::NAN);
    let (both, cnn, gru) = (acc(ArchKind::CnnGru), acc(ArchKind::CnnOnly), acc(ArchKind::GruOnly));
    let summary = format!("{days} days; test accuracy CNN+GRU {both:.3}, CNN {cnn:.3}, GRU {gru:.3}; {:.1?}", start.elapsed());
    ensure(both >= 0.90, || format!("CNN+GRU below 0.90: {summary}"))?;
    ensure(both - cnn >= 0.05 && both - gru >= 0.05, || format!("margin below 5 points: {summary}"))?;
    within(start.elapsed(), Duration::from_secs(300), "ablation")?;
    Ok(summary)
}

// ---------------------------------------------------------------- sinusoid

pub fn criterion_sinusoid() -> Check {
    let start = Instant::now();
    let amplitude = 10.0;
    let bars = sinusoid_bars(600, 100.0, amplitude, 40.0, 0.1 * amplitude, 5);
    let cfg = PrepareConfig {
        ratios: SplitRatios::new(0.6, 0.2, 0.2).unwrap(),
        ..PrepareConfig::default()
    };
    let data = prepare(&bars, &[], &Lexicon::bundled(), &cfg).map_err(|e| e.to_string())?;
    let mcfg = ModelConfig {
        vocab_size: data.vocab.len(),
        embed_dim: 4,
        num_filters: 4,
        max_doc_len: 3,
        attention_enabled: false,
        lambda: 0.9,
        seed: 1,
        ..ModelConfig::default()
    };
    let tcfg = TrainConfig {
        lr: 3e-3,
        batch_size: 32,
        epochs: 60,
        patience: 15,
        optimizer: OptimizerKind::Adam,
        weight_decay: 0.0,
        seed: 1,
    };
    let model = build_model(&mcfg, ArchKind::CnnGru).map_err(|e| e.to_string())?;
    let outcome = train(&model, &data.splits.train, &data.splits.val, &tcfg).map_err(|e| e.to_string())?;
    let test = &data.splits.test;
    let preds: Vec<f64> = test.iter().map(|s| outcome.model.forward(s).map(|o| o.return_pred)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let rows = price_rows(test, &preds, Some(&data.norm_stats)).map_err(|e| e.to_string())?;
    let (model_mse, naive) = (price_mse(&rows), persistence_mse(test));
    let ratio = model_mse / naive;
    let summary = format!("test MSE {model_mse:.4} vs persistence {naive:.4} (ratio {ratio:.3}); {:.1?}", start.elapsed());
    ensure(ratio <= 0.9, || format!("ratio above 0.9: {summary}"))?;
    within(start.elapsed(), Duration::from_secs(120), "sinusoid run")?;
    Ok(summary)
}

// ---------------------------------------------------------------- overfit

pub fn overfit_samples() -> Vec<WindowSample> {
    let spec = AblationSpec {
        episodes: 2,
        seed: 21,
        ..AblationSpec::default()
    };
    ablation_dataset(&spec, 20).unwrap().into_iter().take(10).collect()
}

pub fn criterion_overfit() -> Check {
    let samples = overfit_samples();
    ensure(samples.len() == 10, || format!("{} samples", samples.len()))?;
    let mcfg = ModelConfig {
        vocab_size: ABLATION_VOCAB,
        max_doc_len: ABLATION_DOC_LEN,
        seed: 2,
        ..ModelConfig::default()
    };
    let tcfg = TrainConfig {
        lr: 1e-2,
        batch_size: 10,
        epochs: 500,
        patience: 500,
        optimizer: OptimizerKind::Adam,
        weight_decay: 0.0,
        seed: 2,
    };
    let model = build_model(&mcfg, ArchKind::CnnGru).map_err(|e| e.to_string())?;
    let outcome = train(&model, &samples, &samples, &tcfg).map_err(|e| e.to_string())?;
    let final_loss = mean_loss(&outcome.model, &samples).map_err(|e| e.to_string())?.joint;
    let first = outcome.history.iter().find(|r| r.val_loss < 0.05).map(|r| r.epoch);
    let summary = format!("joint loss {final_loss:.2e}, first below 0.05 at epoch {first:?}");
    ensure(final_loss < 0.05 && first.is_some(), || summary.clone())?;
    Ok(summary)
}

// ---------------------------------------------------------------- metrics

/// Metrics straight from the pairs, with no confusion matrix.
pub fn brute_force_metrics(preds: &[usize], labels: &[usize], k: usize) -> (f64, f64, f64) {
    let n = preds.len();
    let correct = preds.iter().zip(labels).filter(|(p, t)| p == t).count();
    let (mut recall_sum, mut f1_sum, mut present) = (0.0, 0.0, 0usize);
    for c in 0..k {
        let tp = preds.iter().zip(labels).filter(|&(&p, &t)| p == c && t == c).count();
        let fp = preds.iter().zip(labels).filter(|&(&p, &t)| p == c && t != c).count();
        let fneg = preds.iter().zip(labels).filter(|&(&p, &t)| p != c && t == c).count();
        if tp + fp + fneg == 0 {
            continue;
        }
        present += 1;
        let precision = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
        let recall = if tp + fneg == 0 { 0.0 } else { tp as f64 / (tp + fneg) as f64 };
        recall_sum += recall;
        f1_sum += if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else { 0.0 };
    }
    (correct as f64 / n as f64, recall_sum / present as f64, f1_sum / present as f64)
}

pub fn criterion_metrics() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..50 {
        // later trials skew toward fewer classes so absent classes are covered
        let k_used = 1 + trial % 3;
        let preds: Vec<usize> = (0..200).map(|_| rng.random_range(0..(k_used + 1).min(3))).collect();
        let labels: Vec<usize> = (0..200).map(|_| rng.random_range(0..k_used)).collect();
        let got = MetricsReport::from_predictions(&preds, &labels, 3, 0.0).map_err(|e| e.to_string())?;
        let want = brute_force_metrics(&preds, &labels, 3);
        ensure((got.accuracy, got.macro_recall, got.macro_f1) == want, || {
            format!("trial {trial}: got {:?}, oracle {want:?}", (got.accuracy, got.macro_recall, got.macro_f1))
        })?;
    }
    Ok("50 sets of 200 pairs match the brute-force oracle exactly".into())
}

// ---------------------------------------------------------------- determinism

pub fn determinism_setup() -> (ModelConfig, TrainConfig, Vec<WindowSample>, Vec<WindowSample>) {
    let spec = AblationSpec {
        episodes: 12,
        seed: 4,
        ..AblationSpec::default()
    };
    let samples = ablation_dataset(&spec, 20).unwrap();
    let (train_set, val) = samples.split_at(48);
    let mcfg = ModelConfig {
        vocab_size: ABLATION_VOCAB,
        embed_dim: 6,
        num_filters: 5,
        gru_hidden: 6,
        max_doc_len: ABLATION_DOC_LEN,
        attention_dim: 4,
        seed: 8,
        ..ModelConfig::default()
    };
    let tcfg = TrainConfig {
        lr: 5e-3,
        batch_size: 16,
        epochs: 6,
        patience: 6,
        optimizer: OptimizerKind::Adam,
        weight_decay: 1e-4,
        seed: 8,
    };
    (mcfg, tcfg, train_set.to_vec(), val.to_vec())
}

fn output_bits(model: &Model, samples: &[WindowSample]) -> Result<Vec<u64>, String> {
    let mut bits = Vec::new();
    for s in samples {
        let out = model.forward(s).map_err(|e| e.to_string())?;
        bits.push(out.return_pred.to_bits());
        bits.extend(out.logits.as_slice().iter().map(|v| v.to_bits()));
        bits.extend(out.attention.iter().flatten().map(|v| v.to_bits()));
    }
    Ok(bits)
}

pub fn criterion_determinism() -> Check {
    let (mcfg, tcfg, train_set, val) = determinism_setup();
    let run = || -> Result<(String, String, Model), String> {
        let model = build_model(&mcfg, ArchKind::CnnGru).map_err(|e| e.to_string())?;
        let out = train(&model, &train_set, &val, &tcfg).map_err(|e| e.to_string())?;
        let history = history_to_jsonl(&out.history).map_err(|e| e.to_string())?;
        let ckpt = checkpoint_to_string(&out.model).map_err(|e| e.to_string())?;
        Ok((history, ckpt, out.model))
    };
    let (h1, c1, m1) = run()?;
    let (h2, c2, _) = run()?;
    ensure(h1 == h2, || "training histories differ between identical runs".into())?;
    ensure(c1 == c2, || "checkpoints differ between identical runs".into())?;
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let path = dir.path().join("model.ckpt.json");
    save_checkpoint(&m1, &path).map_err(|e| e.to_string())?;
    let loaded = load_checkpoint(&path).map_err(|e| e.to_string())?;
    let all_samples: Vec<WindowSample> = train_set.iter().chain(&val).cloned().collect();
    let (a, b) = (output_bits(&m1, &all_samples)?, output_bits(&loaded, &all_samples)?);
    ensure(a == b, || "forward outputs changed after save and load".into())?;
    Ok(format!(
        "{} history lines and {}-byte checkpoints identical; {} output words identical after reload",
        h1.lines().count(),
        c1.len(),
        a.len()
    ))
}

// ---------------------------------------------------------------- pipeline

pub fn golden_clean_text() -> Result<usize, String> {
    let inputs = std::fs::read_to_string(fixture("clean_text_inputs.jsonl")).map_err(|e| e.to_string())?;
    let golden = std::fs::read(fixture("clean_text_golden.txt")).map_err(|e| e.to_string())?;
    let mut produced = String::new();
    let mut n = 0;
    for line in inputs.lines() {
        let raw: String = serde_json::from_str(line).map_err(|e| e.to_string())?;
        produced.push_str(&clean_text(&raw));
        produced.push('\n');
        n += 1;
    }
    if produced.as_bytes() != golden.as_slice() {
        let got: Vec<&str> = produced.lines().collect();
        let want = String::from_utf8_lossy(&golden);
        let first = want.lines().zip(&got).position(|(w, g)| w != *g);
        return Err(format!("clean_text differs from the golden fixture at line {first:?}"));
    }
    Ok(n)
}

pub fn plain_days(n: usize) -> Vec<AlignedDay> {
    let bars = sinusoid_bars(n, 50.0, 5.0, 12.0, 0.3, 1);
    senti_risk::data::align_days(&bars, &[]).unwrap().days
}

fn leakage_bars() -> Vec<senti_risk::data::MarketBar> {
    sinusoid_bars(120, 80.0, 6.0, 30.0, 0.5, 2)
}

pub fn leakage_fixture() -> senti_risk::data::PreparedDataset {
    let bars = leakage_bars();
    let docs: Vec<RawTextDoc> = bars
        .iter()
        .enumerate()
        .map(|(i, b)| RawTextDoc {
            timestamp: b.date.and_hms_opt(20, 0, 0).unwrap().and_utc(),
            text: format!("word{} rally stock{}", i % 17, i),
            source: "fixture".into(),
            label: None,
        })
        .collect();
    let cfg = PrepareConfig {
        window: 10,
        ..PrepareConfig::default()
    };
    prepare(&bars, &docs, &Lexicon::bundled(), &cfg).unwrap()
}

pub fn check_no_leakage(data: &senti_risk::data::PreparedDataset) -> Result<(), String> {
    let s = &data.splits;
    let parts = [("train", &s.train), ("val", &s.val), ("test", &s.test)];
    for w in parts.windows(2) {
        let (early_name, early) = w[0];
        let (late_name, late) = w[1];
        let last_target = early.iter().map(|x| x.target_date).max();
        let last_input = early.iter().flat_map(|x| x.inputs.iter().map(|d| d.date)).max();
        let first_late = late.iter().map(|x| x.target_date).min();
        if let (Some(t), Some(i), Some(f)) = (last_target, last_input, first_late) {
            ensure(t < f && i < f, || format!("{early_name} reaches {t} but {late_name} starts at {f}"))?;
        }
    }
    // every split is internally chronological
    for (name, part) in parts {
        ensure(part.windows(2).all(|p| p[0].target_date < p[1].target_date), || format!("{name} is out of order"))?;
    }
    // the vocabulary only knows words from days the training windows read
    let last_train_day = s.train.iter().flat_map(|x| x.inputs.iter().map(|d| d.date)).max().unwrap();
    let mut seen = (0, 0);
    for (i, bar) in leakage_bars().iter().enumerate() {
        let known = data.vocab.id(&format!("stock{i}")) != UNK_ID;
        if bar.date > last_train_day {
            ensure(!known, || format!("stock{i} from {} leaked into the vocabulary", bar.date))?;
            seen.1 += 1;
        } else if known {
            seen.0 += 1;
        }
    }
    ensure(seen.0 > 0 && seen.1 > 0, || format!("vocabulary check saw {seen:?} known/later words"))?;
    Ok(())
}

pub fn criterion_pipeline() -> Check {
    let n = golden_clean_text()?;
    let windows = make_windows(&plain_days(25), 20).map_err(|e| e.to_string())?;
    ensure(windows.len() == 5, || format!("25 days with window 20 gave {} samples", windows.len()))?;
    let data = leakage_fixture();
    check_no_leakage(&data)?;
    Ok(format!(
        "{n} golden strings byte-identical; 25 days -> {} windows; splits {}/{}/{} disjoint in time",
        windows.len(),
        data.splits.train.len(),
        data.splits.val.len(),
        data.splits.test.len()
    ))
}

// ---------------------------------------------------------------- alerts

pub fn criterion_alerts() -> Check {
    let text = std::fs::read_to_string(fixture("alert_stream.jsonl")).map_err(|e| e.to_string())?;
    let preds = parse_daily_predictions(&text).map_err(|e| e.to_string())?;
    let alerts = detect_inflections(&preds, &AlertRuleConfig::default()).map_err(|e| e.to_string())?;
    let jsonl = alerts_to_jsonl(&alerts).map_err(|e| e.to_string())?;
    let kinds: Vec<String> = jsonl
        .lines()
        .map(|l| serde_json::from_str::<serde_json::Value>(l).map(|v| v["kind"].as_str().unwrap_or("").to_string()))
        .collect::<Result<_, _>>()
        .map_err(|e| e.to_string())?;
    let count = |k: &str| kinds.iter().filter(|x| *x == k).count();
    let counts = (count("bearish_flip"), count("bullish_flip"), count("risk_threshold"));
    ensure(counts == (2, 1, 3) && kinds.len() == 6, || format!("kind counts {counts:?} from {kinds:?}"))?;
    ensure(alerts.windows(2).all(|w| w[0].date <= w[1].date), || "alerts out of chronological order".into())?;
    let expected = [
        AlertKind::BearishFlip,
        AlertKind::RiskThreshold,
        AlertKind::BullishFlip,
        AlertKind::BearishFlip,
        AlertKind::RiskThreshold,
        AlertKind::RiskThreshold,
    ];
    ensure(alerts.iter().map(|a| a.kind).eq(expected), || format!("unexpected sequence {kinds:?}"))?;
    ensure(alerts.iter().all(|a| preds.iter().any(|p| p.date == a.date)), || "alert on a day without a prediction".into())?;
    ensure(alerts.iter().all(|a| a.predicted_class != Sentiment::Neutral || a.kind == AlertKind::RiskThreshold), || "flip on neutral day".into())?;
    Ok(format!("{} lines: 2 bearish_flip, 1 bullish_flip, 3 risk_threshold in date order", kinds.len()))
}

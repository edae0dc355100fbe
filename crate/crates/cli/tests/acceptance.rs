//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails. Runs without the libtest harness.

use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::Rng as _;
use unlearn_core::eval::{auc, flops_estimate, flops_from_counts};
use unlearn_core::experiment::{files, run_pipeline, ExperimentConfig, PipelineOutcome};
use unlearn_core::graph::{generate_sbm, sample_forget_edges, split_edges, Graph};
use unlearn_core::nn::{forward_on, init_params, Matrix, ModelParams, NormAdj, Tape};
use unlearn_core::rng::rng_for;
use unlearn_core::train::{train, TrainConfig};
use unlearn_core::unlearn::{d2dgn_unlearn, make_destroyer, Strategy, UnlearnConfig};
use unlearn_core::{Arch, Edge, Locality};

const SEEDS: [u64; 5] = [1, 2, 3, 4, 5];
const GRAD_CONFIGS: usize = 100;
const FD_STEP: f64 = 1e-5;
const GRAD_REL_TOL: f64 = 1e-4;
/// Denominator floor for the relative error of near-zero gradient entries.
const GRAD_REL_FLOOR: f64 = 1e-6;
/// Configurations with a ReLU input closer than this to zero are redrawn.
const KINK_MARGIN: f64 = 1e-3;
const AUC_VECTORS: usize = 1000;
const AUC_TOL: f64 = 1e-12;
const GOLD_RETAIN_MIN: f64 = 0.85;
const RETAIN_GAP_MAX: f64 = 0.05;
const FORGET_GAP_MAX: f64 = 0.15;
const FIXTURE_BUDGET_SECS: f64 = 600.0;
const SPEED_RATIO_MAX: f64 = 2.0 / 3.0;
const LOW_RATIO: f64 = 0.025;
const HIGH_RATIO: f64 = 0.5;

struct Verdict {
    pass: bool,
    detail: String,
}

impl Verdict {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }

    fn error(e: impl std::fmt::Display) -> Self {
        Self::new(false, format!("error: {e}"))
    }
}

// ---------------------------------------------------------------------------
// Criterion 1: gradients against an independent dense oracle.

struct GradCase {
    arch: Arch,
    num_nodes: usize,
    edges: Vec<Edge>,
    features: Vec<Vec<f64>>,
    params: ModelParams<f64>,
    pairs: Vec<Edge>,
    labels: Vec<f64>,
    kl_targets: Vec<f64>,
    /// One dense target per layer for the MSE term.
    mse_targets: Vec<Vec<Vec<f64>>>,
    mse_rows: Vec<usize>,
    temperature: f64,
    weights: [f64; 3],
}

type Dense = Vec<Vec<f64>>;

fn dense_matmul(a: &Dense, b: &Dense) -> Dense {
    let cols = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..cols)
                .map(|j| row.iter().zip(b).map(|(x, brow)| x * brow[j]).sum())
                .collect()
        })
        .collect()
}

fn to_dense(m: &Matrix<f64>) -> Dense {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

/// Loss of the case recomputed from scratch, plus every ReLU input.
fn oracle_loss(case: &GradCase, tensors: &[Matrix<f64>]) -> (f64, Vec<f64>) {
    let n = case.num_nodes;
    let mut adj = vec![vec![0.0; n]; n];
    for &(u, v) in &case.edges {
        adj[u][v] = 1.0;
        adj[v][u] = 1.0;
    }
    let deg: Vec<f64> = adj.iter().map(|r| 1.0 + r.iter().sum::<f64>()).collect();
    let mut norm = adj.clone();
    for u in 0..n {
        norm[u][u] = 1.0;
        for v in 0..n {
            norm[u][v] /= (deg[u] * deg[v]).sqrt();
        }
    }

    let layers = case.params.num_layers();
    let mut relu_inputs = Vec::new();
    let mut h = case.features.clone();
    let mut per_layer = Vec::new();
    for l in 0..layers {
        let z = match case.arch {
            Arch::Gcn => dense_matmul(&norm, &dense_matmul(&h, &to_dense(&tensors[l]))),
            Arch::Gin => {
                let (w0, w1, eps) = (&tensors[3 * l], &tensors[3 * l + 1], tensors[3 * l + 2].as_slice()[0]);
                let agg = dense_matmul(&adj, &h);
                let combined: Dense = h
                    .iter()
                    .zip(&agg)
                    .map(|(hr, ar)| hr.iter().zip(ar).map(|(x, a)| (1.0 + eps) * x + a).collect())
                    .collect();
                let mut inner = dense_matmul(&combined, &to_dense(w0));
                for x in inner.iter_mut().flatten() {
                    relu_inputs.push(*x);
                    *x = x.max(0.0);
                }
                dense_matmul(&inner, &to_dense(w1))
            }
        };
        h = z;
        if l + 1 < layers {
            for x in h.iter_mut().flatten() {
                relu_inputs.push(*x);
                *x = x.max(0.0);
            }
        }
        per_layer.push(h.clone());
    }

    let k = case.pairs.len() as f64;
    let probs: Vec<f64> = case
        .pairs
        .iter()
        .map(|&(u, v)| {
            let z: f64 = h[u].iter().zip(&h[v]).map(|(a, b)| a * b).sum();
            1.0 / (1.0 + (-z / case.temperature).exp())
        })
        .collect();
    let bce = probs
        .iter()
        .zip(&case.labels)
        .map(|(&p, &y)| -(y * p.ln() + (1.0 - y) * (1.0 - p).ln()))
        .sum::<f64>()
        / k;
    let kl = probs
        .iter()
        .zip(&case.kl_targets)
        .map(|(&q, &p)| p * (p / q).ln() + (1.0 - p) * ((1.0 - p) / (1.0 - q)).ln())
        .sum::<f64>()
        / k;
    let mut mse = 0.0;
    for (hl, target) in per_layer.iter().zip(&case.mse_targets) {
        let width = hl[0].len() as f64;
        let sq: f64 = case
            .mse_rows
            .iter()
            .flat_map(|&r| hl[r].iter().zip(&target[r]).map(|(a, b)| (a - b) * (a - b)))
            .sum();
        mse += sq / (case.mse_rows.len() as f64 * width);
    }
    // Probabilities near the clamp would make the library loss flat.
    relu_inputs.extend(probs.iter().map(|p| p.min(1.0 - p)));
    let [a, b, c] = case.weights;
    (a * bce + b * kl + c * mse, relu_inputs)
}

/// Loss and parameter gradients through the library's tape.
fn tape_loss_and_grads(case: &GradCase) -> unlearn_core::Result<(f64, Vec<Matrix<f64>>)> {
    let rows: Vec<Vec<f64>> = case.features.clone();
    let adj = NormAdj::<f64>::from_edges(case.num_nodes, &case.edges)?;
    let mut tape = Tape::new();
    let w = case.params.bind(&mut tape, true);
    let x = tape.constant(Matrix::from_rows(&rows)?);
    let layers = forward_on(&mut tape, case.arch, &w, &adj, x)?;
    let last = *layers.last().expect("at least one layer");
    let z = tape.edge_dot(last, &case.pairs)?;
    let p = tape.sigmoid(z, case.temperature);
    let bce = tape.bce(p, &case.labels)?;
    let kl = tape.kl(p, &case.kl_targets)?;
    let [a, b, c] = case.weights;
    let mut loss = tape.scale(bce, a);
    let kl = tape.scale(kl, b);
    loss = tape.add(loss, kl)?;
    for (&h, target) in layers.iter().zip(&case.mse_targets) {
        let m = tape.mse_rows(h, Matrix::from_rows(target)?, &case.mse_rows)?;
        let m = tape.scale(m, c);
        loss = tape.add(loss, m)?;
    }
    let value = tape.value(loss).item();
    let mut grads = tape.backward(loss)?;
    Ok((value, grads.collect(&w)))
}

fn draw_case(seed: u64, arch: Arch) -> GradCase {
    let mut rng = rng_for(seed, "grad-case", 0);
    let num_nodes = rng.gen_range(3..=7);
    let mut edges = Vec::new();
    for u in 0..num_nodes {
        for v in (u + 1)..num_nodes {
            if rng.gen_bool(0.45) {
                edges.push((u, v));
            }
        }
    }
    let layers = rng.gen_range(1..=3);
    let dims: Vec<usize> = (0..=layers).map(|_| rng.gen_range(1..=4)).collect();
    let features: Dense = (0..num_nodes)
        .map(|_| (0..dims[0]).map(|_| rng.gen_range(-1.0..1.0)).collect())
        .collect();
    let mut params = init_params::<f64>(arch, &dims, rng.gen()).expect("valid dims");
    if arch == Arch::Gin {
        for l in 0..layers {
            params.tensors[3 * l + 2] = Matrix::scalar(rng.gen_range(-0.5..0.5));
        }
    }
    let k = rng.gen_range(2..=6);
    let pairs: Vec<Edge> = (0..k)
        .map(|_| {
            let u = rng.gen_range(0..num_nodes);
            let v = (u + rng.gen_range(1..num_nodes)) % num_nodes;
            (u, v)
        })
        .collect();
    let labels = (0..k).map(|_| if rng.gen_bool(0.5) { 1.0 } else { 0.0 }).collect();
    let kl_targets = (0..k).map(|_| rng.gen_range(0.05..0.95)).collect();
    let mse_targets = dims[1..]
        .iter()
        .map(|&w| (0..num_nodes).map(|_| (0..w).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect())
        .collect();
    let mut mse_rows: Vec<usize> = (0..num_nodes).filter(|_| rng.gen_bool(0.6)).collect();
    if mse_rows.is_empty() {
        mse_rows.push(0);
    }
    GradCase {
        arch,
        num_nodes,
        edges,
        features,
        params,
        pairs,
        labels,
        kl_targets,
        mse_targets,
        mse_rows,
        temperature: rng.gen_range(0.5..2.0),
        weights: [rng.gen_range(0.1..1.0), rng.gen_range(0.1..1.0), rng.gen_range(0.1..1.0)],
    }
}

fn criterion_gradients() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut checked = 0usize;
    let mut redrawn = 0usize;
    let mut attempt = 0u64;
    let mut done = 0usize;
    while done < GRAD_CONFIGS {
        attempt += 1;
        let arch = if done % 2 == 0 { Arch::Gcn } else { Arch::Gin };
        let case = draw_case(attempt, arch);
        let (oracle_value, margins) = oracle_loss(&case, &case.params.tensors);
        if margins.iter().any(|x| x.abs() < KINK_MARGIN) {
            redrawn += 1;
            continue;
        }
        let (value, grads) = match tape_loss_and_grads(&case) {
            Ok(r) => r,
            Err(e) => return Verdict::error(e),
        };
        if (value - oracle_value).abs() > 1e-10 * oracle_value.abs().max(1.0) {
            return Verdict::new(false, format!("config {attempt}: loss {value} vs oracle {oracle_value}"));
        }
        for (t, grad) in grads.iter().enumerate() {
            for i in 0..grad.as_slice().len() {
                let mut plus = case.params.tensors.clone();
                plus[t].as_mut_slice()[i] += FD_STEP;
                let mut minus = case.params.tensors.clone();
                minus[t].as_mut_slice()[i] -= FD_STEP;
                let fd = (oracle_loss(&case, &plus).0 - oracle_loss(&case, &minus).0) / (2.0 * FD_STEP);
                let g = grad.as_slice()[i];
                let rel = (g - fd).abs() / g.abs().max(fd.abs()).max(GRAD_REL_FLOOR);
                worst = worst.max(rel);
                checked += 1;
            }
        }
        done += 1;
    }
    let secs = start.elapsed().as_secs_f64();
    Verdict::new(
        worst < GRAD_REL_TOL && secs < 60.0,
        format!(
            "{GRAD_CONFIGS} configs ({redrawn} redrawn near ReLU kinks), {checked} entries, \
             max rel err {worst:.2e} (< {GRAD_REL_TOL:e}), {secs:.2}s (< 60s)"
        ),
    )
}

// ---------------------------------------------------------------------------
// Criterion 2: AUC against brute-force pair counting.

fn brute_auc(scores: &[f64], labels: &[bool]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for (i, &si) in scores.iter().enumerate() {
        if !labels[i] {
            continue;
        }
        for (j, &sj) in scores.iter().enumerate() {
            if labels[j] {
                continue;
            }
            pairs += 1.0;
            if si > sj {
                wins += 1.0;
            } else if si == sj {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

fn criterion_auc() -> Verdict {
    let mut rng = rng_for(2, "auc-vectors", 0);
    let mut worst: f64 = 0.0;
    for case in 0..AUC_VECTORS {
        let len = rng.gen_range(2..=200);
        // Every third vector draws from a handful of values to force ties.
        let tied = case % 3 == 0;
        let scores: Vec<f64> = (0..len)
            .map(|_| if tied { rng.gen_range(0..5) as f64 * 0.25 } else { rng.gen_range(-3.0..3.0) })
            .collect();
        let mut labels: Vec<bool> = (0..len).map(|_| rng.gen_bool(0.4)).collect();
        labels[0] = true;
        labels[1] = false;
        let got = match auc(&scores, &labels) {
            Ok(a) => a,
            Err(e) => return Verdict::error(e),
        };
        worst = worst.max((got - brute_auc(&scores, &labels)).abs());
    }
    Verdict::new(
        worst <= AUC_TOL,
        format!("{AUC_VECTORS} vectors, max |auc - brute force| {worst:.1e} (<= {AUC_TOL:e})"),
    )
}

// ---------------------------------------------------------------------------
// Criterion 3: alpha = 1 leaves the source untouched.

fn criterion_alpha_one() -> Verdict {
    let run = || -> unlearn_core::Result<Vec<String>> {
        let graph: Graph<f64> = generate_sbm(4, 15, 0.4, 0.02, 8, 3)?;
        let split = split_edges(&graph, 0.05, 0.1, 3)?;
        let forget = sample_forget_edges(&graph, &split, 0.1, Locality::In, 3)?;
        let cfg = TrainConfig {
            hidden: vec![16, 8],
            epochs: 100,
            lr: 0.01,
            seed: 3,
            ..TrainConfig::default()
        };
        let (source, _) = train(&graph, &split.train, &split.val, &split.val_neg, &cfg)?;
        let mut changed = Vec::new();
        for strategy in Strategy::ALL {
            let destroyer = make_destroyer(strategy.default_destroyer(), &source, &forget, &graph, 5)?;
            let ucfg = UnlearnConfig {
                strategy,
                alpha: 1.0,
                epochs: 30,
                lr: 0.01,
                seed: 5,
                ..UnlearnConfig::default()
            };
            let (params, _) = d2dgn_unlearn(&source, &graph, &split, &forget, &destroyer, &ucfg)?;
            let identical = params.tensors.len() == source.tensors.len()
                && params.tensors.iter().zip(&source.tensors).all(|(a, b)| {
                    a.shape() == b.shape()
                        && a.as_slice().iter().zip(b.as_slice()).all(|(x, y)| x.to_bits() == y.to_bits())
                });
            if !identical {
                changed.push(strategy.to_string());
            }
        }
        Ok(changed)
    };
    match run() {
        Ok(changed) if changed.is_empty() => Verdict::new(true, "strategies 1, 2, 3: parameters bit-identical after 30 epochs"),
        Ok(changed) => Verdict::new(false, format!("parameters changed for strategies {}", changed.join(", "))),
        Err(e) => Verdict::error(e),
    }
}

// ---------------------------------------------------------------------------
// Criterion 4: FLOPs hand count and linearity.

fn criterion_flops() -> Verdict {
    let dims = [2, 3, 2];
    let graph = match Graph::<f64>::new(4, [(0, 1), (1, 2), (2, 3)], Matrix::zeros(4, 2)) {
        Ok(g) => g,
        Err(e) => return Verdict::error(e),
    };
    let hand = flops_estimate(Arch::Gcn, &dims, &graph);
    let mut linear = true;
    for arch in [Arch::Gcn, Arch::Gin] {
        for (n, nnz) in [(4u64, 10u64), (1000, 9000), (12_345, 400_001)] {
            let f = |n, nnz| flops_from_counts(arch, &dims, n, nnz);
            // f = a·N + b·nnz, so doubling one count adds exactly its share.
            linear &= f(2 * n, nnz) - f(n, nnz) == f(n, 0);
            linear &= f(n, 2 * nnz) - f(n, nnz) == f(0, nnz);
            linear &= f(n, 0) + f(0, nnz) == f(n, nnz);
        }
    }
    Verdict::new(
        hand == 196 && linear,
        format!("4-node fixture = {hand} (expected 196), linear under doubling N and nnz: {linear}"),
    )
}

// ---------------------------------------------------------------------------
// Criteria 5-9: the SBM fixture.

fn fixture_config(seed: u64, ratio: f64) -> ExperimentConfig {
    let mut cfg = ExperimentConfig {
        seed: Some(seed),
        ..Default::default()
    };
    cfg.data.sbm_blocks = 10;
    cfg.data.sbm_block_size = 30;
    cfg.data.sbm_p_in = 0.3;
    cfg.data.sbm_p_out = 0.002;
    cfg.data.sbm_feature_dim = 16;
    cfg.model.arch = Arch::Gcn;
    cfg.model.hidden = vec![128, 64];
    cfg.train.epochs = 500;
    cfg.train.lr = 0.01;
    cfg.train.patience = 100;
    cfg.forget.ratio = ratio;
    cfg.forget.locality = Locality::In;
    cfg.unlearn.strategy = Strategy::SoftTargets;
    cfg.unlearn.alpha = 0.5;
    cfg.unlearn.epochs = 50;
    cfg.unlearn.lr = 0.01;
    cfg.output.timing = false;
    cfg
}

fn fixture_cli_args(seed: u64) -> Vec<String> {
    let args = [
        "--sbm-blocks", "10", "--sbm-block-size", "30", "--sbm-p-in", "0.3", "--sbm-p-out", "0.002",
        "--sbm-feature-dim", "16", "--arch", "gcn", "--hidden", "128,64", "--epochs", "500", "--lr", "0.01",
        "--patience", "100", "--forget-ratio", "0.025", "--locality", "in", "--strategy", "1", "--alpha", "0.5",
        "--unlearn-epochs", "50", "--unlearn-lr", "0.01", "--no-timing",
    ];
    let mut v: Vec<String> = args.iter().map(|s| s.to_string()).collect();
    v.extend(["--seed".to_string(), seed.to_string()]);
    v
}

fn mean(xs: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    v.iter().sum::<f64>() / v.len() as f64
}

fn criteria_fixture(root: &Path) -> Vec<(usize, Verdict)> {
    let start = Instant::now();
    let mut low: Vec<PipelineOutcome> = Vec::new();
    for seed in SEEDS {
        match run_pipeline(&fixture_config(seed, LOW_RATIO), &root.join(format!("low_{seed}"))) {
            Ok(o) => low.push(o),
            Err(e) => return (5..=9).map(|c| (c, Verdict::error(format!("seed {seed}: {e:#}")))).collect(),
        }
    }
    let low_secs = start.elapsed().as_secs_f64();

    let per_seed = |f: &dyn Fn(&PipelineOutcome) -> f64| low.iter().map(f).collect::<Vec<_>>();
    let gold_r = mean(per_seed(&|o| o.report.gold.auc_retain));
    let unl_r = mean(per_seed(&|o| o.report.unlearned.auc_retain));
    let gold_f = mean(per_seed(&|o| o.report.gold.auc_forget));
    let unl_f = mean(per_seed(&|o| o.report.unlearned.auc_forget));
    let (dr, df) = ((unl_r - gold_r).abs(), (unl_f - gold_f).abs());
    let c5 = Verdict::new(
        gold_r >= GOLD_RETAIN_MIN && dr <= RETAIN_GAP_MAX && df <= FORGET_GAP_MAX && low_secs <= FIXTURE_BUDGET_SECS,
        format!(
            "gold retain {gold_r:.3} (>= {GOLD_RETAIN_MIN}), |retain gap| {dr:.3} (<= {RETAIN_GAP_MAX}), \
             |forget gap| {df:.3} (<= {FORGET_GAP_MAX}), {} seeds in {low_secs:.1}s",
            SEEDS.len()
        ),
    );

    let unlearn_secs: f64 = low.iter().map(|o| o.unlearn_seconds).sum();
    let gold_secs: f64 = low.iter().map(|o| o.gold_seconds).sum();
    let ratio = unlearn_secs / gold_secs;
    let c6 = Verdict::new(
        ratio <= SPEED_RATIO_MAX,
        format!("unlearn {unlearn_secs:.2}s vs gold retrain {gold_secs:.2}s, ratio {ratio:.3} (<= 0.667)"),
    );

    let mi = per_seed(&|o| o.report.unlearned.mi_ratio);
    let mi_mean = mean(mi.iter().copied());
    let c7 = Verdict::new(
        mi.iter().all(|&m| m >= 1.0) && mi_mean > 1.0,
        format!(
            "per seed [{}], mean {mi_mean:.4} (each >= 1, mean > 1)",
            mi.iter().map(|m| format!("{m:.4}")).collect::<Vec<_>>().join(", ")
        ),
    );

    let kl: Vec<(f64, f64)> = low
        .iter()
        .filter_map(|o| o.trace.as_ref())
        .map(|t| (t.records[0].kl_info_bound, t.records[t.records.len() - 1].kl_info_bound))
        .collect();
    let c8 = Verdict::new(
        kl.len() == low.len() && kl.iter().all(|(first, last)| last <= first),
        format!(
            "epoch 0 -> final forget KL: {}",
            kl.iter().map(|(a, b)| format!("{a:.3}->{b:.3}")).collect::<Vec<_>>().join(", ")
        ),
    );

    let mut high = Vec::new();
    for seed in SEEDS {
        match run_pipeline(&fixture_config(seed, HIGH_RATIO), &root.join(format!("high_{seed}"))) {
            Ok(o) => high.push(o.report.unlearned.auc_retain),
            Err(e) => {
                let c9 = Verdict::error(format!("seed {seed} at ratio {HIGH_RATIO}: {e:#}"));
                return vec![(5, c5), (6, c6), (7, c7), (8, c8), (9, c9)];
            }
        }
    }
    let low_r = per_seed(&|o| o.report.unlearned.auc_retain);
    let high_mean = mean(high.iter().copied());
    let c9 = Verdict::new(
        high_mean <= unl_r,
        format!(
            "retain AUC seed mean at {}%: {high_mean:.3} vs at {}%: {unl_r:.3}; per seed {}",
            HIGH_RATIO * 100.0,
            LOW_RATIO * 100.0,
            low_r
                .iter()
                .zip(&high)
                .map(|(l, h)| format!("{l:.3}->{h:.3}"))
                .collect::<Vec<_>>()
                .join(", ")
        ),
    );
    vec![(5, c5), (6, c6), (7, c7), (8, c8), (9, c9)]
}

// ---------------------------------------------------------------------------
// Criterion 10: two bench executions are byte-identical.

fn criterion_determinism(root: &Path) -> Verdict {
    let bin = env!("CARGO_BIN_EXE_gnn-unlearn");
    let mut outputs = Vec::new();
    for run in ["a", "b"] {
        let out = root.join(format!("bench_{run}"));
        let status = Command::new(bin)
            .arg("bench")
            .args(fixture_cli_args(1))
            .arg("--out")
            .arg(&out)
            .env_remove("D2D_OUT")
            .output();
        match status {
            Ok(o) if o.status.success() => outputs.push(out),
            Ok(o) => return Verdict::new(false, format!("bench failed: {}", String::from_utf8_lossy(&o.stderr))),
            Err(e) => return Verdict::error(e),
        }
    }
    let mut compared = Vec::new();
    for name in [files::REPORT_JSON, files::TRACE, files::SOURCE_HISTORY, files::GOLD_HISTORY] {
        let read = |dir: &Path| std::fs::read(dir.join(name));
        match (read(&outputs[0]), read(&outputs[1])) {
            (Ok(a), Ok(b)) if a == b => compared.push(name),
            (Ok(_), Ok(_)) => return Verdict::new(false, format!("{name} differs between runs")),
            (Err(e), _) | (_, Err(e)) => return Verdict::error(format!("{name}: {e}")),
        }
    }
    Verdict::new(true, format!("identical bytes: {}", compared.join(", ")))
}

fn main() -> ExitCode {
    let tmp = match tempfile::tempdir() {
        Ok(t) => t,
        Err(e) => {
            eprintln!("cannot create temp dir: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut verdicts = vec![
        (1, criterion_gradients()),
        (2, criterion_auc()),
        (3, criterion_alpha_one()),
        (4, criterion_flops()),
    ];
    verdicts.extend(criteria_fixture(tmp.path()));
    verdicts.push((10, criterion_determinism(tmp.path())));

    let mut failed = 0;
    for (n, v) in &verdicts {
        println!("criterion {n:>2}: {} {}", if v.pass { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.pass);
    }
    println!("{} of {} criteria passed", verdicts.len() - failed, verdicts.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

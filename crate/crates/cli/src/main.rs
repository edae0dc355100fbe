//! `gnn-unlearn`: train link-prediction GNNs, unlearn edges or nodes, and
//! evaluate the result.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use unlearn_core::eval::{write_reports_csv, EvalReport};
use unlearn_core::experiment::{
    artifact, evaluate, files, load_data, resolve_out_dir, run_pipeline, select_forget, split_data, sweep,
    train_on, unlearn_model, DataSource, ExperimentConfig, Method, SweepAxes, OUT_ENV, SWEEP_CSV,
};
use unlearn_core::nn::{load_checkpoint, save_checkpoint};
use unlearn_core::unlearn::{DestroyerKind, RetainBatch, Strategy};
use unlearn_core::{Arch, Locality};

#[derive(Parser)]
#[command(name = "gnn-unlearn", version, about = "Graph unlearning for link-prediction GNNs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a source model on the training split.
    Train(ExpArgs),
    /// Unlearn a forget set from a trained checkpoint.
    Unlearn {
        #[command(flatten)]
        exp: ExpArgs,
        /// Checkpoint of the model to unlearn from.
        #[arg(long)]
        model: PathBuf,
    },
    /// Score a checkpoint on the retain, forget and membership metrics.
    Eval {
        #[command(flatten)]
        exp: ExpArgs,
        #[arg(long)]
        model: PathBuf,
        /// Model before unlearning, for the membership ratio (defaults to --model).
        #[arg(long)]
        source: Option<PathBuf>,
        /// Value of the report's strategy column.
        #[arg(long, default_value = "eval")]
        label: String,
    },
    /// Full pipeline: source, gold retrain, unlearning, evaluation.
    Bench(ExpArgs),
    /// Run the pipeline over the Cartesian product of the given axes.
    Sweep {
        #[command(flatten)]
        exp: ExpArgs,
        #[arg(long, value_delimiter = ',')]
        ratios: Vec<f64>,
        /// Unlearning learning rates.
        #[arg(long = "unlearn-lrs", value_delimiter = ',')]
        lrs: Vec<f64>,
        #[arg(long, value_delimiter = ',')]
        strategies: Vec<Strategy>,
    },
}

/// Experiment settings; every flag overrides the config file.
#[derive(Args, Clone, Default)]
struct ExpArgs {
    /// TOML experiment config.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long, value_name = "OUT_DIR")]
    out: Option<PathBuf>,
    /// Write all timings as 0 so reruns are byte-identical.
    #[arg(long)]
    no_timing: bool,

    /// `sbm` or `files`; `--edges` implies `files`.
    #[arg(long)]
    dataset: Option<DataSource>,
    #[arg(long)]
    name: Option<String>,
    #[arg(long)]
    edges: Option<PathBuf>,
    #[arg(long)]
    features: Option<PathBuf>,
    #[arg(long)]
    feature_dim: Option<usize>,
    #[arg(long)]
    sbm_blocks: Option<usize>,
    #[arg(long)]
    sbm_block_size: Option<usize>,
    #[arg(long)]
    sbm_p_in: Option<f64>,
    #[arg(long)]
    sbm_p_out: Option<f64>,
    #[arg(long)]
    sbm_feature_dim: Option<usize>,
    #[arg(long)]
    sbm_seed: Option<u64>,
    #[arg(long)]
    val_frac: Option<f64>,
    #[arg(long)]
    test_frac: Option<f64>,

    #[arg(long)]
    arch: Option<Arch>,
    /// Layer widths after the input, e.g. `128,64`.
    #[arg(long, value_delimiter = ',')]
    hidden: Option<Vec<usize>>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    patience: Option<usize>,
    #[arg(long)]
    neg_ratio: Option<usize>,
    #[arg(long)]
    fixed_negatives: bool,

    #[arg(long)]
    forget_ratio: Option<f64>,
    #[arg(long)]
    locality: Option<Locality>,
    /// Nodes to delete with `--locality node`.
    #[arg(long, value_delimiter = ',')]
    nodes: Option<Vec<usize>>,
    /// Number of random nodes to delete with `--locality node`.
    #[arg(long)]
    node_count: Option<usize>,

    /// `d2dgn` or `ascent`.
    #[arg(long)]
    method: Option<Method>,
    #[arg(long)]
    strategy: Option<Strategy>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    unlearn_epochs: Option<usize>,
    #[arg(long)]
    unlearn_lr: Option<f64>,
    /// `auto`, `all`, or a count.
    #[arg(long)]
    retain_batch: Option<RetainBatch>,
    /// `random` or `negative`; chosen from the strategy when omitted.
    #[arg(long)]
    destroyer: Option<DestroyerKind>,
    #[arg(long)]
    resample_pairs: bool,
}

macro_rules! set {
    ($target:expr, $value:expr) => {
        if let Some(v) = $value.clone() {
            $target = v;
        }
    };
}

impl ExpArgs {
    fn config(&self) -> Result<(ExperimentConfig, PathBuf)> {
        let mut cfg = match &self.config {
            Some(p) => ExperimentConfig::load(p).with_context(|| format!("reading config {}", p.display()))?,
            None => ExperimentConfig::default(),
        };
        let d = &mut cfg.data;
        if self.edges.is_some() {
            d.source = DataSource::Files;
        }
        set!(d.source, self.dataset);
        if self.name.is_some() {
            d.name = self.name.clone();
        }
        if self.edges.is_some() {
            d.edges = self.edges.clone();
        }
        if self.features.is_some() {
            d.features = self.features.clone();
        }
        if self.feature_dim.is_some() {
            d.feature_dim = self.feature_dim;
        }
        set!(d.sbm_blocks, self.sbm_blocks);
        set!(d.sbm_block_size, self.sbm_block_size);
        set!(d.sbm_p_in, self.sbm_p_in);
        set!(d.sbm_p_out, self.sbm_p_out);
        set!(d.sbm_feature_dim, self.sbm_feature_dim);
        if self.sbm_seed.is_some() {
            d.sbm_seed = self.sbm_seed;
        }
        set!(d.val_frac, self.val_frac);
        set!(d.test_frac, self.test_frac);

        set!(cfg.model.arch, self.arch);
        set!(cfg.model.hidden, self.hidden);
        set!(cfg.train.epochs, self.epochs);
        set!(cfg.train.lr, self.lr);
        set!(cfg.train.patience, self.patience);
        set!(cfg.train.neg_ratio, self.neg_ratio);
        cfg.train.fixed_negatives |= self.fixed_negatives;

        set!(cfg.forget.ratio, self.forget_ratio);
        set!(cfg.forget.locality, self.locality);
        set!(cfg.forget.nodes, self.nodes);
        set!(cfg.forget.node_count, self.node_count);

        let u = &mut cfg.unlearn;
        set!(u.method, self.method);
        if let Some(s) = self.strategy {
            if s != u.strategy && self.destroyer.is_none() {
                u.destroyer = None;
            }
            u.strategy = s;
        }
        set!(u.alpha, self.alpha);
        set!(u.temperature, self.temperature);
        set!(u.epochs, self.unlearn_epochs);
        set!(u.lr, self.unlearn_lr);
        set!(u.retain_batch, self.retain_batch);
        if self.destroyer.is_some() {
            u.destroyer = self.destroyer;
        }
        u.resample_pairs |= self.resample_pairs;

        if self.seed.is_some() {
            cfg.seed = self.seed;
        }
        if self.no_timing {
            cfg.output.timing = false;
        }
        let out = resolve_out_dir(self.out.clone(), std::env::var(OUT_ENV).ok(), cfg.output.dir.clone());
        cfg.output.dir = Some(out.clone());
        cfg.validate()?;
        Ok((cfg, out))
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn cmd_train(exp: &ExpArgs) -> Result<()> {
    let (cfg, out) = exp.config()?;
    let graph = load_data(&cfg)?;
    let split = split_data(&cfg, &graph)?;
    let (params, history) = train_on(&cfg, &graph, &split.train, &split)?;
    save_checkpoint(&params, cfg.seed()?, &artifact(&out, files::SOURCE_CKPT)?)?;
    history.write_csv(&out.join(files::SOURCE_HISTORY))?;
    write(&out.join(files::CONFIG), &cfg.to_toml_string())?;
    let best = &history.records[history.best_epoch];
    println!(
        "trained {} on {} edges: best epoch {} (val AUC {:.4}), {} epochs run -> {}",
        params.arch,
        split.train.len(),
        history.best_epoch,
        best.val_auc,
        history.records.len(),
        out.join(files::SOURCE_CKPT).display()
    );
    Ok(())
}

fn cmd_unlearn(exp: &ExpArgs, model: &Path) -> Result<()> {
    let (cfg, out) = exp.config()?;
    let (source, _) = load_checkpoint::<f64>(model)?;
    let graph = load_data(&cfg)?;
    let split = split_data(&cfg, &graph)?;
    let forget = select_forget(&cfg, &graph, &split)?;
    let (params, trace, seconds) = unlearn_model(&cfg, &source, &graph, &split, &forget)?;
    save_checkpoint(&params, cfg.seed()?, &artifact(&out, files::UNLEARNED_CKPT)?)?;
    if let Some(t) = &trace {
        t.write_csv(&out.join(files::TRACE), cfg.output.timing)?;
    }
    write(&out.join(files::CONFIG), &cfg.to_toml_string())?;
    println!(
        "unlearned {} edges in {:.3}s -> {}",
        forget.forget.len(),
        seconds,
        out.join(files::UNLEARNED_CKPT).display()
    );
    Ok(())
}

fn cmd_eval(exp: &ExpArgs, model: &Path, source: Option<&Path>, label: &str) -> Result<()> {
    let (cfg, out) = exp.config()?;
    let (params, _) = load_checkpoint::<f64>(model)?;
    let source = match source {
        Some(p) => load_checkpoint::<f64>(p)?.0,
        None => params.clone(),
    };
    let graph = load_data(&cfg)?;
    let split = split_data(&cfg, &graph)?;
    let forget = select_forget(&cfg, &graph, &split)?;
    let report = evaluate(&cfg, label, &params, &source, &graph, &split, &forget, 0.0)?;
    let json = report.to_json() + "\n";
    write(&artifact(&out, files::REPORT_JSON)?, &json)?;
    write_reports_csv(&out.join(files::REPORT_CSV), std::slice::from_ref(&report))?;
    print!("{json}");
    Ok(())
}

fn summary_line(r: &EvalReport) -> String {
    format!(
        "{:>8}  retain {:.4}  forget {:.4}  mi {:.4}  seconds {:.3}",
        r.strategy, r.auc_retain, r.auc_forget, r.mi_ratio, r.unlearn_seconds
    )
}

fn cmd_bench(exp: &ExpArgs) -> Result<()> {
    let (cfg, out) = exp.config()?;
    let outcome = run_pipeline(&cfg, &out)?;
    let r = &outcome.report;
    for report in [&r.source, &r.gold, &r.unlearned] {
        println!("{}", summary_line(report));
    }
    println!("artifacts in {}", out.display());
    Ok(())
}

fn cmd_sweep(exp: &ExpArgs, axes: SweepAxes) -> Result<()> {
    let (cfg, out) = exp.config()?;
    let rows = sweep(&cfg, &axes, &out)?;
    let failed = rows.iter().filter(|r| r.outcome.is_err()).count();
    for row in &rows {
        match &row.outcome {
            Ok(r) => println!("run {:03}  ratio {:<6} {}", row.run, row.config.forget.ratio, summary_line(r)),
            Err(e) => println!("run {:03}  failed: {e}", row.run),
        }
    }
    println!("{} runs, {failed} failed -> {}", rows.len(), out.join(SWEEP_CSV).display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train(exp) => cmd_train(&exp),
        Command::Unlearn { exp, model } => cmd_unlearn(&exp, &model),
        Command::Eval {
            exp,
            model,
            source,
            label,
        } => cmd_eval(&exp, &model, source.as_deref(), &label),
        Command::Bench(exp) => cmd_bench(&exp),
        Command::Sweep {
            exp,
            ratios,
            lrs,
            strategies,
        } => cmd_sweep(
            &exp,
            SweepAxes {
                ratios,
                lrs,
                strategies,
            },
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

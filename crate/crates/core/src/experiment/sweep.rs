use std::path::Path;

use super::config::ExperimentConfig;
use super::pipeline::{artifact, method_label, run_pipeline};
use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::unlearn::Strategy;

pub const SWEEP_CSV: &str = "sweep.csv";

/// Values to sweep. An empty axis keeps the template's value.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SweepAxes {
    pub ratios: Vec<f64>,
    /// Unlearning learning rates.
    pub lrs: Vec<f64>,
    pub strategies: Vec<Strategy>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub run: usize,
    pub config: ExperimentConfig,
    /// Report of the unlearned model, or the error message.
    pub outcome: std::result::Result<EvalReport, String>,
}

/// Cartesian product of the axes, ratio-major. Run `i` uses seed
/// `template seed + i`.
pub fn expand(template: &ExperimentConfig, axes: &SweepAxes) -> Result<Vec<ExperimentConfig>> {
    let base_seed = template.seed()?;
    let ratios = if axes.ratios.is_empty() { vec![template.forget.ratio] } else { axes.ratios.clone() };
    let lrs = if axes.lrs.is_empty() { vec![template.unlearn.lr] } else { axes.lrs.clone() };
    let strategies = if axes.strategies.is_empty() {
        vec![template.unlearn.strategy]
    } else {
        axes.strategies.clone()
    };
    let mut runs = Vec::new();
    for &ratio in &ratios {
        for &lr in &lrs {
            for &strategy in &strategies {
                let mut cfg = template.clone();
                cfg.seed = Some(base_seed + runs.len() as u64);
                cfg.forget.ratio = ratio;
                cfg.unlearn.lr = lr;
                if cfg.unlearn.strategy != strategy {
                    cfg.unlearn.strategy = strategy;
                    cfg.unlearn.destroyer = None;
                }
                runs.push(cfg);
            }
        }
    }
    Ok(runs)
}

fn row_fields(row: &SweepRow) -> Vec<String> {
    let mut fields = vec![row.run.to_string()];
    match &row.outcome {
        Ok(r) => {
            fields.push("ok".into());
            fields.extend([
                r.dataset.clone(),
                r.arch.to_string(),
                r.strategy.clone(),
                r.locality.to_string(),
                r.ratio.to_string(),
                r.seed.to_string(),
                r.auc_retain.to_string(),
                r.auc_forget.to_string(),
                r.mi_ratio.to_string(),
                r.unlearn_seconds.to_string(),
                r.flops_forward.to_string(),
            ]);
        }
        Err(msg) => {
            let c = &row.config;
            fields.push(format!("error: {msg}"));
            fields.extend([
                c.dataset_name(),
                c.model.arch.to_string(),
                method_label(c),
                c.forget.locality.to_string(),
                c.forget.ratio.to_string(),
                c.seed.map(|s| s.to_string()).unwrap_or_default(),
            ]);
            fields.extend(std::iter::repeat(String::new()).take(5));
        }
    }
    fields
}

fn write_sweep_csv(path: &Path, rows: &[SweepRow]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .map_err(|e| Error::Serialize(e.to_string()))?;
    let header: Vec<&str> = ["run", "status"].into_iter().chain(EvalReport::CSV_HEADER.split(',')).collect();
    w.write_record(&header).map_err(|e| Error::Serialize(e.to_string()))?;
    for row in rows {
        w.write_record(row_fields(row)).map_err(|e| Error::Serialize(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Runs every configuration of the product sequentially, each in
/// `out_dir/run_NNN`, rewriting `out_dir/sweep.csv` after every run. A
/// failing run is recorded in its row and the sweep continues.
pub fn sweep(template: &ExperimentConfig, axes: &SweepAxes, out_dir: &Path) -> Result<Vec<SweepRow>> {
    let configs = expand(template, axes)?;
    let csv_path = artifact(out_dir, SWEEP_CSV)?;
    let mut rows = Vec::with_capacity(configs.len());
    for (run, config) in configs.into_iter().enumerate() {
        let outcome = run_pipeline(&config, &out_dir.join(format!("run_{run:03}")))
            .map(|o| o.report.unlearned)
            .map_err(|e| e.to_string());
        rows.push(SweepRow { run, config, outcome });
        write_sweep_csv(&csv_path, &rows)?;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiment::pipeline::files;

    fn template() -> ExperimentConfig {
        let mut cfg = ExperimentConfig {
            seed: Some(10),
            ..Default::default()
        };
        cfg.data.sbm_blocks = 3;
        cfg.data.sbm_block_size = 12;
        cfg.data.sbm_p_in = 0.5;
        cfg.data.sbm_p_out = 0.02;
        cfg.data.sbm_feature_dim = 4;
        cfg.data.test_frac = 0.1;
        cfg.model.hidden = vec![8, 4];
        cfg.train.epochs = 10;
        cfg.train.lr = 0.01;
        cfg.forget.ratio = 0.1;
        cfg.unlearn.epochs = 5;
        cfg.output.timing = false;
        cfg
    }

    #[test]
    fn table_axes_expand_to_expected_row_counts() {
        let ratios = vec![0.005, 0.025, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5];
        let runs = expand(&template(), &SweepAxes { ratios: ratios.clone(), ..Default::default() }).unwrap();
        assert_eq!(runs.len(), 8);
        assert_eq!(runs.iter().map(|c| c.forget.ratio).collect::<Vec<_>>(), ratios);
        assert_eq!(runs.iter().map(|c| c.seed.unwrap()).collect::<Vec<_>>(), (10..18).collect::<Vec<_>>());

        let lrs = vec![0.001, 0.005, 0.01, 0.1, 1.0, 10.0];
        let runs = expand(&template(), &SweepAxes { lrs, ..Default::default() }).unwrap();
        assert_eq!(runs.len(), 6);

        let runs = expand(
            &template(),
            &SweepAxes {
                ratios: vec![0.1, 0.2],
                lrs: vec![0.01, 0.1],
                strategies: Strategy::ALL.to_vec(),
            },
        )
        .unwrap();
        assert_eq!(runs.len(), 12);
    }

    #[test]
    fn single_point_sweep_matches_one_pipeline_run() {
        let dir = tempfile::tempdir().unwrap();
        let t = template();
        let rows = sweep(&t, &SweepAxes::default(), &dir.path().join("sweep")).unwrap();
        assert_eq!(rows.len(), 1);
        let direct = run_pipeline(&t, &dir.path().join("direct")).unwrap();
        assert_eq!(rows[0].outcome.as_ref().unwrap(), &direct.report.unlearned);
        assert_eq!(
            std::fs::read(dir.path().join("sweep/run_000").join(files::REPORT_JSON)).unwrap(),
            std::fs::read(dir.path().join("direct").join(files::REPORT_JSON)).unwrap()
        );
    }

    #[test]
    fn failures_are_recorded_and_the_sweep_continues() {
        let dir = tempfile::tempdir().unwrap();
        let axes = SweepAxes {
            ratios: vec![0.1, 0.0001, 0.2],
            ..Default::default()
        };
        let rows = sweep(&template(), &axes, dir.path()).unwrap();
        assert!(rows[0].outcome.is_ok());
        assert!(rows[1].outcome.is_err());
        assert!(rows[2].outcome.is_ok());
        let text = std::fs::read_to_string(dir.path().join(SWEEP_CSV)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines[0].starts_with("run,status,dataset,arch"));
        assert!(lines[2].starts_with("1,\"error:") || lines[2].starts_with("1,error:"));
    }
}

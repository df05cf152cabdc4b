//! Sweeps over Landau rates with many trials per point.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::HarnessError;
use crate::trial::{run_trial, trial_rng, TrialRecord};

/// Aggregates for one sweep point; one CSV row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub landau_hz: f64,
    /// Total sampling rate over the Landau rate.
    pub ratio: f64,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    pub ill_posed_rate: f64,
    /// Ill-posed trials that were still recovered.
    pub ill_posed_recovered: usize,
    pub mean_runtime_s: f64,
    /// Over trials with a finite condition number.
    pub mean_condition: f64,
    pub max_condition: f64,
    pub infinite_condition: usize,
    /// Largest finite known-support condition number.
    pub max_support_condition: f64,
    pub mean_aliased_bins: f64,
    pub stage_errors: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: ExperimentConfig,
    pub points: Vec<SweepPoint>,
    pub trials: Vec<TrialRecord>,
}

fn aggregate(landau_hz: f64, total_rate: f64, records: &[TrialRecord]) -> SweepPoint {
    let n = records.len();
    let nf = n as f64;
    let successes = records.iter().filter(|r| r.success).count();
    let ill = records.iter().filter(|r| r.ill_posed).count();
    let finite: Vec<f64> = records.iter().filter_map(|r| r.condition_number).collect();
    SweepPoint {
        landau_hz,
        ratio: total_rate / landau_hz,
        trials: n,
        successes,
        success_rate: successes as f64 / nf,
        ill_posed_rate: ill as f64 / nf,
        ill_posed_recovered: records.iter().filter(|r| r.ill_posed && r.success).count(),
        mean_runtime_s: records.iter().map(|r| r.runtime_s).sum::<f64>() / nf,
        mean_condition: if finite.is_empty() {
            f64::NAN
        } else {
            finite.iter().sum::<f64>() / finite.len() as f64
        },
        max_condition: finite.iter().copied().fold(f64::NAN, f64::max),
        infinite_condition: n - finite.len(),
        max_support_condition: records
            .iter()
            .filter_map(|r| r.support_condition_number)
            .fold(f64::NAN, f64::max),
        mean_aliased_bins: records
            .iter()
            .map(|r| r.aliased_bin_count as f64)
            .sum::<f64>()
            / nf,
        stage_errors: records
            .iter()
            .filter(|r| {
                r.failure_reason
                    .as_deref()
                    .is_some_and(|m| !m.starts_with("error above") && !m.starts_with("solver did"))
            })
            .count(),
    }
}

/// Runs every trial of every sweep point in parallel. Each trial seeds its
/// own generator from `(seed, point, trial)`, so the result does not depend
/// on scheduling.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<SweepResult, HarnessError> {
    cfg.validate()?;
    let points = cfg.sweep_points();
    let jobs: Vec<(usize, usize)> = (0..points.len())
        .flat_map(|p| (0..cfg.trials).map(move |t| (p, t)))
        .collect();
    let trials = jobs
        .par_iter()
        .map(|&(p, t)| {
            let mut rng = trial_rng(cfg.seed, p, t);
            run_trial(cfg, points[p], t, &mut rng)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let total = cfg.total_rate();
    let summary = points
        .iter()
        .enumerate()
        .map(|(p, &f)| aggregate(f, total, &trials[p * cfg.trials..(p + 1) * cfg.trials]))
        .collect();
    Ok(SweepResult {
        config: cfg.clone(),
        points: summary,
        trials,
    })
}

impl SweepResult {
    pub fn write_csv(&self, path: &Path) -> Result<(), HarnessError> {
        let mut w = csv::Writer::from_path(path)?;
        for p in &self.points {
            w.serialize(p)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json(&self, path: &Path) -> Result<(), HarnessError> {
        let file = std::io::BufWriter::new(std::fs::File::create(path)?);
        serde_json::to_writer_pretty(file, self)?;
        Ok(())
    }

    /// Writes `results.csv` and `trials.json` into `dir`.
    pub fn write_outputs(&self, dir: &Path) -> Result<(), HarnessError> {
        std::fs::create_dir_all(dir)?;
        self.write_csv(&dir.join("results.csv"))?;
        self.write_json(&dir.join("trials.json"))
    }
}

//! One Monte-Carlo trial: generate, sample, reconstruct, score.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use smrs_core::{
    build_real_split, condition_number, fold_spectrum, reconstruct, reduce_system, ChannelConfig,
    ChannelSamples64, Complex64, FoldingMatrix, GridLayout, GridSpec, Posedness, SpectrumGrid64,
    SupportMask,
};

use crate::config::{ExperimentConfig, SuccessRule};
use crate::error::HarnessError;
use crate::signal::{add_noise, generate_signal, BandSupport};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: usize,
    pub landau_hz: f64,
    pub success: bool,
    pub ill_posed: bool,
    /// Condition number of the matrix the solver finally inverted (the whole
    /// reduced system for a direct solve, the selected columns after block
    /// OMP); `None` when rank deficient.
    pub condition_number: Option<f64>,
    /// Condition number of the reduced system built on the true support, as
    /// if band locations were known; `None` when rank deficient.
    pub support_condition_number: Option<f64>,
    pub aliased_bin_count: usize,
    /// Solve-stage wall-clock seconds (zero when timing is off).
    pub runtime_s: f64,
    /// Per true band (positive bands for real signals): mean absolute error
    /// for the perfect and ℓ1 rules, RMS error for the ℓ2 rule.
    pub band_errors: Vec<f64>,
    /// Mean absolute error over the whole grid.
    pub mean_abs_error: f64,
    pub iterations: usize,
    pub converged: bool,
    pub supports_agree: bool,
    pub failure_reason: Option<String>,
}

/// Seed for one trial, derived from the master seed, the sweep point and
/// the trial index only.
pub fn trial_seed(master: u64, point: usize, trial: usize) -> u64 {
    let mut z = master
        ^ (point as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (trial as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    // splitmix64 finalizer
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn trial_rng(master: u64, point: usize, trial: usize) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(master, point, trial))
}

/// Support bins (positive ones for real signals) whose residue class holds
/// at least two support bins in every channel, i.e. bins aliased everywhere.
pub fn aliased_bin_count(support: &BandSupport, channels: &[ChannelConfig]) -> usize {
    let signed = support.signed_bins();
    let counts: Vec<Vec<u32>> = channels
        .iter()
        .map(|c| {
            let mut per_class = vec![0u32; c.bins_per_period()];
            for &l in &signed {
                per_class[c.class_of(l)] += 1;
            }
            per_class
        })
        .collect();
    let candidates = match support.layout {
        GridLayout::Complex => signed,
        GridLayout::Real => support.positive_bins(),
    };
    candidates
        .iter()
        .filter(|&&l| {
            channels
                .iter()
                .zip(&counts)
                .all(|(c, per_class)| per_class[c.class_of(l)] >= 2)
        })
        .count()
}

/// Condition number of the known-support system: the true bins only, every
/// row that touches them. For real signals, the larger of the two split
/// systems' values.
pub fn support_condition_number(
    samples: &[ChannelSamples64],
    grid: GridSpec,
    support: &BandSupport,
) -> Result<f64, HarnessError> {
    let channels: Vec<ChannelConfig> = samples.iter().map(ChannelSamples64::config).collect();
    let full = FoldingMatrix::new(channels, grid)?;
    let mask = SupportMask::from_bins(grid, support.signed_bins());
    match grid.layout() {
        GridLayout::Complex => {
            let stacked: Vec<Complex64> = samples
                .iter()
                .flat_map(|s| s.baseband().iter().copied())
                .collect();
            let system = reduce_system(&full, &stacked, &mask, None)?;
            Ok(condition_number(&system)?)
        }
        GridLayout::Real => {
            let full = full.with_retained_columns(support.positive_bins())?;
            let split = build_real_split(&full, samples, None)?;
            Ok(condition_number(&split.real)?.max(condition_number(&split.imag)?))
        }
    }
}

pub fn band_errors(
    truth: &SpectrumGrid64,
    estimate: &SpectrumGrid64,
    support: &BandSupport,
    rule: SuccessRule,
) -> Vec<f64> {
    support
        .bands
        .iter()
        .map(|band| {
            let diffs = band.bins().map(|l| (estimate.get(l) - truth.get(l)).norm());
            let n = band.len() as f64;
            match rule {
                SuccessRule::PerBandL2 => (diffs.map(|d| d * d).sum::<f64>() / n).sqrt(),
                SuccessRule::Perfect | SuccessRule::PerBandL1 => diffs.sum::<f64>() / n,
            }
        })
        .collect()
}

fn mean_abs_error(truth: &SpectrumGrid64, estimate: &SpectrumGrid64) -> f64 {
    let sum: f64 = truth
        .values()
        .iter()
        .zip(estimate.values())
        .map(|(a, b)| (a - b).norm())
        .sum();
    sum / truth.values().len() as f64
}

fn sample_channels(
    spectrum: &SpectrumGrid64,
    channels: &[ChannelConfig],
) -> Result<Vec<ChannelSamples64>, HarnessError> {
    Ok(channels
        .iter()
        .map(|c| fold_spectrum(spectrum, c))
        .collect::<Result<_, _>>()?)
}

/// Runs one trial at the given Landau rate, drawing all randomness from
/// `rng`. Stage errors become a failed record with a reason.
pub fn run_trial<R: Rng + ?Sized>(
    cfg: &ExperimentConfig,
    landau_hz: f64,
    trial_id: usize,
    rng: &mut R,
) -> Result<TrialRecord, HarnessError> {
    let channels = cfg.channel_configs()?;
    let grid = cfg.grid()?;
    let signal = generate_signal(cfg, landau_hz, rng)?;
    let observed = add_noise(&signal.spectrum, cfg.noise_sigma, rng)?;
    let aliased = aliased_bin_count(&signal.support, &channels);

    let samples = sample_channels(&observed, &channels)?;
    let support_cond = support_condition_number(&samples, grid, &signal.support)?;
    let outcome = reconstruct(&samples, grid, &cfg.detector, &cfg.solver);

    let mut record = TrialRecord {
        trial_id,
        landau_hz,
        success: false,
        ill_posed: false,
        condition_number: None,
        support_condition_number: support_cond.is_finite().then_some(support_cond),
        aliased_bin_count: aliased,
        runtime_s: 0.0,
        band_errors: Vec::new(),
        mean_abs_error: 0.0,
        iterations: 0,
        converged: false,
        supports_agree: true,
        failure_reason: None,
    };
    let estimate = match outcome {
        Ok(report) => {
            record.ill_posed = report.posedness == Posedness::IllPosed;
            record.condition_number = report
                .condition_number
                .is_finite()
                .then_some(report.condition_number);
            if cfg.record_timing {
                record.runtime_s = report.solve_time.as_secs_f64();
            }
            record.iterations = report.iterations;
            record.converged = report.converged;
            record.supports_agree = report.supports_agree;
            report.spectrum
        }
        Err(e) => {
            record.failure_reason = Some(e.to_string());
            let zeros = vec![Complex64::new(0.0, 0.0); grid.len()];
            SpectrumGrid64::new(cfg.delta_f, grid, zeros)?
        }
    };

    record.band_errors = band_errors(
        &signal.spectrum,
        &estimate,
        &signal.support,
        cfg.success_rule,
    );
    record.mean_abs_error = mean_abs_error(&signal.spectrum, &estimate);
    if record.failure_reason.is_none() {
        let threshold = cfg.threshold();
        record.success = match cfg.success_rule {
            SuccessRule::Perfect => record.mean_abs_error < threshold,
            SuccessRule::PerBandL1 | SuccessRule::PerBandL2 => {
                let limit = threshold * cfg.noise_sigma;
                record.band_errors.iter().all(|&e| e < limit)
            }
        };
        if !record.success {
            record.failure_reason = Some(if record.converged {
                "error above threshold".into()
            } else {
                "solver did not converge".into()
            });
        }
    }
    Ok(record)
}

#[cfg(test)]
mod tests {
    use super::*;
    use smrs_core::Block;

    #[test]
    fn seeds_differ_across_points_and_trials() {
        let a = trial_seed(1, 0, 0);
        assert_ne!(a, trial_seed(1, 0, 1));
        assert_ne!(a, trial_seed(1, 1, 0));
        assert_ne!(a, trial_seed(2, 0, 0));
        assert_eq!(a, trial_seed(1, 0, 0));
    }

    fn brute_force_aliased(support: &BandSupport, channels: &[ChannelConfig]) -> usize {
        let signed = support.signed_bins();
        let candidates = match support.layout {
            GridLayout::Complex => signed.clone(),
            GridLayout::Real => support.positive_bins(),
        };
        candidates
            .iter()
            .filter(|&&l| {
                channels.iter().all(|c| {
                    let m = c.bins_per_period() as i64;
                    signed
                        .iter()
                        .filter(|&&x| (x - l).rem_euclid(m) == 0)
                        .count()
                        >= 2
                })
            })
            .count()
    }

    #[test]
    fn aliased_count_matches_brute_force() {
        let channels = vec![
            ChannelConfig::new(4, 1.0).unwrap(),
            ChannelConfig::new(6, 1.0).unwrap(),
        ];
        let support = BandSupport {
            layout: GridLayout::Complex,
            bands: vec![Block::new(0, 1), Block::new(12, 13), Block::new(7, 7)],
        };
        // 0≡12 mod 4 and mod 6, 1≡13 likewise; 7 is alone mod 6.
        assert_eq!(aliased_bin_count(&support, &channels), 4);
        assert_eq!(brute_force_aliased(&support, &channels), 4);

        let real = BandSupport {
            layout: GridLayout::Real,
            bands: vec![Block::new(1, 3), Block::new(9, 10)],
        };
        assert_eq!(
            aliased_bin_count(&real, &channels),
            brute_force_aliased(&real, &channels)
        );
    }

    #[test]
    fn noiseless_complex_trial_succeeds() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
mode = "complex"
channels = [0.95e9, 1.0e9, 1.05e9]
delta_f = 25e6
f_max = 20e9
band_count = 4
landau_sweep = [0.4e9]
trials = 1
seed = 1
success_rule = "perfect"
"#,
        )
        .unwrap();
        let mut rng = trial_rng(cfg.seed, 0, 0);
        let rec = run_trial(&cfg, 0.4e9, 0, &mut rng).unwrap();
        assert!(rec.success, "{rec:?}");
        assert_eq!(rec.band_errors.len(), 4);
        assert!(rec.mean_abs_error < 1e-10);
    }
}

//! Monte-Carlo experiments for multirate spectrum reconstruction: random
//! multiband signals, trial scoring, parallel sweeps and their outputs.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod error;
pub mod signal;
pub mod spectra_io;
pub mod stats;
pub mod sweep;
pub mod trial;

pub use config::{ExperimentConfig, SuccessRule};
pub use error::HarnessError;
pub use signal::{
    add_noise, generate_complex_signal, generate_real_signal, BandSupport, GeneratedSignal,
};
pub use sweep::{run_sweep, SweepPoint, SweepResult};
pub use trial::{aliased_bin_count, run_trial, trial_rng, TrialRecord};

/// Parses a comma-separated list of rates in Hz. Values may carry a
/// `k`, `M` or `G` suffix, with or without a trailing `Hz`.
pub fn parse_rates(spec: &str) -> Result<Vec<f64>, HarnessError> {
    spec.split(',')
        .map(|item| {
            let item = item.trim();
            let body = item.strip_suffix("Hz").unwrap_or(item).trim_end();
            let (num, scale) = match body.chars().last() {
                Some('k') => (&body[..body.len() - 1], 1e3),
                Some('M') => (&body[..body.len() - 1], 1e6),
                Some('G') => (&body[..body.len() - 1], 1e9),
                _ => (body, 1.0),
            };
            num.trim()
                .parse::<f64>()
                .map(|v| v * scale)
                .map_err(|_| HarnessError::Config(format!("bad rate `{item}`")))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::parse_rates;

    #[test]
    fn rates_with_suffixes() {
        assert_eq!(
            parse_rates("0.95G, 1GHz,1.05e9").unwrap(),
            vec![0.95e9, 1e9, 1.05e9]
        );
        assert_eq!(parse_rates("200MHz").unwrap(), vec![200e6]);
        assert!(parse_rates("fast").is_err());
    }
}

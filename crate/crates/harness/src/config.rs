//! Experiment configuration, read from TOML.

use std::path::Path;

use serde::{Deserialize, Serialize};
use smrs_core::{ChannelConfig, DetectorConfig, GridLayout, GridSpec, SolveConfig};

use crate::error::HarnessError;

/// How a trial is judged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuccessRule {
    /// Mean absolute spectral error over the whole grid below an absolute
    /// threshold (default 1e-10).
    Perfect,
    /// Per band, mean absolute error below `threshold · σ` (default
    /// `2·sqrt(f_max / F_mid)` with `F_mid` the median channel rate).
    PerBandL1,
    /// Per band, RMS error below `threshold · σ` (default 3.3).
    PerBandL2,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub mode: GridLayout,
    /// Channel sampling rates in Hz; each must be a multiple of `delta_f`.
    pub channels: Vec<f64>,
    pub delta_f: f64,
    /// Highest signal frequency in Hz. Real signals occupy `[-f_max, f_max]`.
    pub f_max: f64,
    /// Number of bands; for real signals, positive-frequency bands (each is
    /// mirrored).
    pub band_count: usize,
    /// Fixed band width in Hz. When set, the sweep has the single point
    /// implied by it and `landau_sweep` may be left empty.
    #[serde(default)]
    pub band_width: Option<f64>,
    /// Total occupied bandwidth per sweep point, Hz (both sides for real
    /// signals). Each point splits it into bands of equal width, as nearly
    /// as the grid allows.
    #[serde(default)]
    pub landau_sweep: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Standard deviation of the per-bin complex noise; 0 means noiseless.
    #[serde(default)]
    pub noise_sigma: f64,
    #[serde(default)]
    pub detector: DetectorConfig,
    #[serde(default)]
    pub solver: SolveConfig,
    pub success_rule: SuccessRule,
    /// Overrides the rule's default threshold.
    #[serde(default)]
    pub success_threshold: Option<f64>,
    /// When false, runtimes are recorded as zero so outputs are
    /// byte-reproducible.
    #[serde(default = "default_true")]
    pub record_timing: bool,
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        let cfg: Self = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// The full-resolution setting: 5 MHz grid, 1000 trials per point.
    pub fn with_full_scale(mut self) -> Self {
        self.delta_f = 5e6;
        self.trials = 1000;
        self
    }

    pub fn channel_configs(&self) -> Result<Vec<ChannelConfig>, HarnessError> {
        self.channels
            .iter()
            .map(|&r| ChannelConfig::from_rate(r, self.delta_f).map_err(HarnessError::from))
            .collect()
    }

    pub fn grid(&self) -> Result<GridSpec, HarnessError> {
        let span = match self.mode {
            GridLayout::Complex => self.f_max,
            GridLayout::Real => 2.0 * self.f_max,
        };
        Ok(GridSpec::from_span(self.mode, span, self.delta_f)?)
    }

    /// Landau rate implied by `band_width`.
    pub fn fixed_landau(&self) -> Option<f64> {
        let sides = match self.mode {
            GridLayout::Complex => 1.0,
            GridLayout::Real => 2.0,
        };
        self.band_width.map(|w| w * self.band_count as f64 * sides)
    }

    /// The sweep points actually run.
    pub fn sweep_points(&self) -> Vec<f64> {
        if self.landau_sweep.is_empty() {
            self.fixed_landau().into_iter().collect()
        } else {
            self.landau_sweep.clone()
        }
    }

    pub fn total_rate(&self) -> f64 {
        self.channels.iter().sum()
    }

    /// Bins available to bands: `[0, M)` for complex signals, `(0, ⌊M/2⌋]`
    /// for real ones.
    pub fn band_span_bins(&self) -> Result<usize, HarnessError> {
        let grid = self.grid()?;
        Ok(match self.mode {
            GridLayout::Complex => grid.m_total(),
            GridLayout::Real => grid.last_index() as usize,
        })
    }

    /// Occupied bins for a Landau rate: `round(F_Landau / delta_f)` for
    /// complex signals, half that (the positive side) for real ones.
    pub fn landau_bins(&self, landau_hz: f64) -> usize {
        let bins = (landau_hz / self.delta_f).round() as usize;
        match self.mode {
            GridLayout::Complex => bins,
            GridLayout::Real => bins / 2,
        }
    }

    pub fn threshold(&self) -> f64 {
        if let Some(t) = self.success_threshold {
            return t;
        }
        match self.success_rule {
            SuccessRule::Perfect => 1e-10,
            SuccessRule::PerBandL1 => {
                let mut rates = self.channels.clone();
                rates.sort_by(f64::total_cmp);
                let mid = rates[rates.len() / 2];
                2.0 * (self.f_max / mid).sqrt()
            }
            SuccessRule::PerBandL2 => 3.3,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::Config(m));
        if self.channels.is_empty() {
            return bad("at least one channel rate is required".into());
        }
        if !(self.f_max > 0.0) {
            return bad("f_max must be positive".into());
        }
        for c in self.channel_configs()? {
            c.check_layout(self.mode)?;
        }
        if self.band_count == 0 {
            return bad("band_count must be ≥ 1".into());
        }
        if self.trials == 0 {
            return bad("trials must be ≥ 1".into());
        }
        if !(self.noise_sigma >= 0.0) {
            return bad("noise_sigma must be ≥ 0".into());
        }
        if let Some(w) = self.band_width {
            if !(w > 0.0) {
                return bad("band_width must be positive".into());
            }
            let implied = self.fixed_landau().unwrap_or_default();
            if self
                .landau_sweep
                .iter()
                .any(|&f| (f - implied).abs() > 1e-6 * implied)
            {
                return bad(format!(
                    "landau_sweep contradicts band_width (implied Landau rate {implied} Hz)"
                ));
            }
        }
        let points = self.sweep_points();
        if points.is_empty() {
            return bad("either landau_sweep or band_width is required".into());
        }
        let span = self.band_span_bins()?;
        for &f in &points {
            let bins = self.landau_bins(f);
            if bins < self.band_count {
                return bad(format!(
                    "Landau rate {f} Hz leaves less than one bin per band at delta_f = {} Hz",
                    self.delta_f
                ));
            }
            if bins > span {
                return bad(format!("Landau rate {f} Hz exceeds the available span"));
            }
        }
        self.detector.validate(self.delta_f)?;
        self.solver.validate(self.delta_f)?;
        Ok(())
    }
}

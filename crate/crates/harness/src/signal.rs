//! Random multiband test signals and additive noise.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use smrs_core::{Block, Complex64, GridLayout, GridSpec, SpectrumGrid64};

use crate::config::ExperimentConfig;
use crate::error::HarnessError;

/// Placement attempts before giving up on a non-overlapping layout.
pub const MAX_PLACEMENT_ATTEMPTS: usize = 10_000;

/// True band locations. For real signals only the positive bands are
/// listed; each has a mirror image at negative frequencies.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandSupport {
    pub layout: GridLayout,
    pub bands: Vec<Block>,
}

impl BandSupport {
    /// Every occupied grid index, mirrored bins included.
    pub fn signed_bins(&self) -> Vec<i64> {
        let mut bins: Vec<i64> = self.bands.iter().flat_map(Block::bins).collect();
        if self.layout == GridLayout::Real {
            let mirrored: Vec<i64> = bins.iter().map(|&l| -l).collect();
            bins.extend(mirrored);
        }
        bins.sort_unstable();
        bins.dedup();
        bins
    }

    /// Occupied bins counted once per conjugate pair.
    pub fn positive_bins(&self) -> Vec<i64> {
        let mut bins: Vec<i64> = self.bands.iter().flat_map(Block::bins).collect();
        bins.sort_unstable();
        bins
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSignal {
    pub spectrum: SpectrumGrid64,
    pub support: BandSupport,
    /// ℓ2 norm of each complex band, or amplitude `A` of each real band.
    pub band_scale: Vec<f64>,
}

/// Splits `total` bins into `count` widths differing by at most one.
pub fn band_widths(total: usize, count: usize) -> Vec<usize> {
    let base = total / count;
    let extra = total % count;
    (0..count).map(|i| base + usize::from(i < extra)).collect()
}

/// Draws uniform start positions in `[lo, hi]` (inclusive span) until no two
/// bands overlap.
pub fn place_bands<R: Rng + ?Sized>(
    widths: &[usize],
    lo: i64,
    hi: i64,
    rng: &mut R,
) -> Result<Vec<Block>, HarnessError> {
    let fail = || HarnessError::Placement {
        bands: widths.len(),
        width: widths.iter().copied().max().unwrap_or(0),
        attempts: MAX_PLACEMENT_ATTEMPTS,
    };
    if widths.contains(&0) {
        return Err(HarnessError::Config("band width of zero bins".into()));
    }
    let span = hi - lo + 1;
    if widths.iter().any(|&w| w as i64 > span) {
        return Err(fail());
    }
    'attempt: for _ in 0..MAX_PLACEMENT_ATTEMPTS {
        let mut bands: Vec<Block> = Vec::with_capacity(widths.len());
        for &w in widths {
            let start = rng.random_range(lo..=hi - w as i64 + 1);
            let band = Block::new(start, start + w as i64 - 1);
            if bands
                .iter()
                .any(|b| b.start <= band.end && band.start <= b.end)
            {
                continue 'attempt;
            }
            bands.push(band);
        }
        return Ok(bands);
    }
    Err(fail())
}

fn band_layout<R: Rng + ?Sized>(
    cfg: &ExperimentConfig,
    landau_hz: f64,
    rng: &mut R,
) -> Result<(GridSpec, Vec<Block>), HarnessError> {
    let grid = cfg.grid()?;
    let bins = cfg.landau_bins(landau_hz);
    if bins < cfg.band_count {
        return Err(HarnessError::Config(format!(
            "Landau rate {landau_hz} Hz gives a band narrower than one bin"
        )));
    }
    let widths = band_widths(bins, cfg.band_count);
    let (lo, hi) = match cfg.mode {
        GridLayout::Complex => (0, grid.last_index()),
        GridLayout::Real => (1, grid.last_index()),
    };
    Ok((grid, place_bands(&widths, lo, hi, rng)?))
}

/// Bands of i.i.d. standard-normal bins, each rescaled to an ℓ2 norm drawn
/// from `U[1, 5]`.
pub fn generate_complex_signal<R: Rng + ?Sized>(
    cfg: &ExperimentConfig,
    landau_hz: f64,
    rng: &mut R,
) -> Result<GeneratedSignal, HarnessError> {
    if cfg.mode != GridLayout::Complex {
        return Err(HarnessError::Config(
            "complex generator needs mode = complex".into(),
        ));
    }
    let (grid, bands) = band_layout(cfg, landau_hz, rng)?;
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    let mut band_scale = Vec::with_capacity(bands.len());
    for band in &bands {
        let raw: Vec<Complex64> = band
            .bins()
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let energy: f64 = rng.random_range(1.0..=5.0);
        let norm = raw.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        for (l, v) in band.bins().zip(raw) {
            values[grid.position(l).expect("band inside grid")] = v * (energy / norm);
        }
        band_scale.push(energy);
    }
    Ok(GeneratedSignal {
        spectrum: SpectrumGrid64::new(cfg.delta_f, grid, values)?,
        support: BandSupport {
            layout: GridLayout::Complex,
            bands,
        },
        band_scale,
    })
}

/// Half-sine bands `A·sin(π(f − a)/(b − a))·e^{jθ}` with `A ~ U[1, 1.2]`,
/// `θ ~ U[0, 2π]`, mirrored to negative frequencies. The envelope is
/// sampled at bin centres.
pub fn generate_real_signal<R: Rng + ?Sized>(
    cfg: &ExperimentConfig,
    landau_hz: f64,
    rng: &mut R,
) -> Result<GeneratedSignal, HarnessError> {
    if cfg.mode != GridLayout::Real {
        return Err(HarnessError::Config(
            "real generator needs mode = real".into(),
        ));
    }
    let (grid, bands) = band_layout(cfg, landau_hz, rng)?;
    let mut positive = vec![Complex64::new(0.0, 0.0); grid.last_index() as usize + 1];
    let mut band_scale = Vec::with_capacity(bands.len());
    for band in &bands {
        let amp: f64 = rng.random_range(1.0..=1.2);
        let theta: f64 = rng.random_range(0.0..=2.0 * PI);
        let w = band.len() as f64;
        for l in band.bins() {
            let u = (l - band.start) as f64 + 0.5;
            positive[l as usize] = Complex64::from_polar(amp * (PI * u / w).sin(), theta);
        }
        band_scale.push(amp);
    }
    Ok(GeneratedSignal {
        spectrum: SpectrumGrid64::from_positive(cfg.delta_f, grid.m_total(), &positive)?,
        support: BandSupport {
            layout: GridLayout::Real,
            bands,
        },
        band_scale,
    })
}

/// Dispatches on `cfg.mode`.
pub fn generate_signal<R: Rng + ?Sized>(
    cfg: &ExperimentConfig,
    landau_hz: f64,
    rng: &mut R,
) -> Result<GeneratedSignal, HarnessError> {
    match cfg.mode {
        GridLayout::Complex => generate_complex_signal(cfg, landau_hz, rng),
        GridLayout::Real => generate_real_signal(cfg, landau_hz, rng),
    }
}

fn complex_noise<R: Rng + ?Sized>(sigma: f64, rng: &mut R) -> Complex64 {
    let s = sigma / 2f64.sqrt();
    Complex64::new(
        s * rng.sample::<f64, _>(StandardNormal),
        s * rng.sample::<f64, _>(StandardNormal),
    )
}

/// Adds circular complex Gaussian noise with `E|n|² = σ²` to every bin.
/// Real spectra get i.i.d. noise on the positive bins, its mirror on the
/// negative bins and real noise of variance `σ²` at DC.
pub fn add_noise<R: Rng + ?Sized>(
    signal: &SpectrumGrid64,
    sigma: f64,
    rng: &mut R,
) -> Result<SpectrumGrid64, HarnessError> {
    if !(sigma >= 0.0) {
        return Err(HarnessError::Config("noise sigma must be ≥ 0".into()));
    }
    if sigma == 0.0 {
        return Ok(signal.clone());
    }
    let grid = signal.grid();
    match grid.layout() {
        GridLayout::Complex => {
            let values = signal
                .values()
                .iter()
                .map(|&v| v + complex_noise(sigma, rng))
                .collect();
            Ok(SpectrumGrid64::new(signal.delta_f(), grid, values)?)
        }
        GridLayout::Real => {
            let mut positive = signal.positive_half().to_vec();
            positive[0].re += sigma * rng.sample::<f64, _>(StandardNormal);
            for v in positive.iter_mut().skip(1) {
                *v += complex_noise(sigma, rng);
            }
            Ok(SpectrumGrid64::from_positive(
                signal.delta_f(),
                grid.m_total(),
                &positive,
            )?)
        }
    }
}

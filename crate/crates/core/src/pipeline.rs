//! Detection, reduction and inversion in one call.

use std::time::{Duration, Instant};

use nalgebra::{Complex, ComplexField};

use crate::error::{Result, SmrsError};
use crate::linalg::Field;
use crate::realvalued::{build_real_split, solve_real};
use crate::scalar::Scalar;
use crate::solver::{reconstruct_system, Posedness, SolveConfig};
use crate::spectral::{ChannelSamples, FoldingMatrix, GridLayout, GridSpec, SpectrumGrid};
use crate::support::{
    detect_channel, intersect_indicators, reduce_system, split_blocks, widen_mask,
    ChannelIndicator, DetectionMode, DetectorConfig, SupportMask,
};

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionReport<T: Scalar> {
    pub spectrum: SpectrumGrid<T>,
    /// Candidate support the system was reduced to.
    pub mask: SupportMask,
    pub posedness: Posedness,
    pub iterations: usize,
    pub residual_norm: T,
    pub condition_number: T,
    pub converged: bool,
    /// Wall-clock time of the solve stage (classification and inversion).
    pub solve_time: Duration,
    /// Reduced system shape; for real signals, rows and columns of the real
    /// part system.
    pub rows: usize,
    pub columns: usize,
    /// Real signals only: whether both split systems chose the same blocks.
    pub supports_agree: bool,
}

/// Detects the support from the channel samples and reconstructs the
/// spectrum on `grid`.
pub fn reconstruct<T: Scalar>(
    samples: &[ChannelSamples<T>],
    grid: GridSpec,
    detector: &DetectorConfig,
    solver: &SolveConfig,
) -> Result<ReconstructionReport<T>>
where
    Complex<T>: Field + ComplexField<RealField = T>,
{
    let first = samples
        .first()
        .ok_or_else(|| SmrsError::InvalidChannel("no channel samples".into()))?;
    let delta_f = first.config().delta_f();
    detector.validate(delta_f)?;
    let indicators = samples
        .iter()
        .map(|s| detect_channel(s, detector))
        .collect::<Result<Vec<_>>>()?;
    let extended: Vec<Vec<bool>> = indicators.iter().map(|i| i.extend(grid)).collect();
    let mut mask = intersect_indicators(grid, &extended)?;
    if detector.widen_fraction > 0.0 {
        mask = widen_mask(&mask, detector.widen_fraction)?;
    }
    // Noisy baseband bins are never exactly zero, and the bins added by
    // widening land on rows the detector rejected; dropping those rows would
    // leave the added columns without equations. Only untouched rows go.
    let row_filter = match detector.mode {
        DetectionMode::Noiseless => Some(indicators.as_slice()),
        DetectionMode::Noisy => None,
    };
    reconstruct_on_mask(samples, grid, &mask, row_filter, solver)
}

/// Reconstructs with a given candidate support (known band locations when
/// `indicators` is `None`).
pub fn reconstruct_on_mask<T: Scalar>(
    samples: &[ChannelSamples<T>],
    grid: GridSpec,
    mask: &SupportMask,
    indicators: Option<&[ChannelIndicator]>,
    solver: &SolveConfig,
) -> Result<ReconstructionReport<T>>
where
    Complex<T>: Field + ComplexField<RealField = T>,
{
    let first = samples
        .first()
        .ok_or_else(|| SmrsError::InvalidChannel("no channel samples".into()))?;
    let delta_f = first.config().delta_f();
    solver.validate(delta_f)?;
    if samples.iter().any(|s| s.layout() != grid.layout()) {
        return Err(SmrsError::InvalidGrid(
            "sample layout differs from grid".into(),
        ));
    }
    if mask.is_empty() {
        return Err(SmrsError::NoSignal);
    }
    let channels: Vec<_> = samples.iter().map(ChannelSamples::config).collect();
    let full = FoldingMatrix::new(channels, grid)?;

    match grid.layout() {
        GridLayout::Complex => {
            let stacked: Vec<Complex<T>> = samples
                .iter()
                .flat_map(|s| s.baseband().iter().copied())
                .collect();
            let system = reduce_system(&full, &stacked, mask, indicators)?;
            let mut blocks = mask.blocks().to_vec();
            if solver.noisy_mode {
                blocks = split_blocks(&blocks, solver.subblock_bins(delta_f));
            }
            let block_cols = system.block_columns(&blocks);
            let start = Instant::now();
            let outcome = reconstruct_system(&system, &block_cols, solver)?;
            let solve_time = start.elapsed();
            let mut values = vec![Complex::new(T::zero(), T::zero()); grid.len()];
            for (&l, v) in system.column_map.iter().zip(outcome.solution.iter()) {
                values[grid.position(l).expect("column inside grid")] = *v;
            }
            Ok(ReconstructionReport {
                spectrum: SpectrumGrid::new(delta_f, grid, values)?,
                mask: mask.clone(),
                posedness: outcome.posedness,
                iterations: outcome.iterations,
                residual_norm: outcome.residual_norm,
                condition_number: outcome.condition_number,
                converged: outcome.converged,
                solve_time,
                rows: system.nrows(),
                columns: system.ncols(),
                supports_agree: true,
            })
        }
        GridLayout::Real => {
            let positive: Vec<i64> = mask.bins().filter(|&l| l >= 0).collect();
            let full = full.with_retained_columns(positive)?;
            let split = build_real_split(&full, samples, indicators)?;
            let start = Instant::now();
            let sol = solve_real(&split, solver, mask)?;
            let solve_time = start.elapsed();
            Ok(ReconstructionReport {
                posedness: sol.posedness(),
                iterations: sol.iterations(),
                residual_norm: sol.residual_norm(),
                condition_number: sol.condition_number,
                converged: sol.converged(),
                supports_agree: sol.supports_agree,
                spectrum: sol.spectrum,
                mask: mask.clone(),
                solve_time,
                rows: split.real.nrows(),
                columns: split.real.ncols(),
            })
        }
    }
}

//! Real-valued signals.
//!
//! A real signal has a conjugate-symmetric spectrum, so only the bins
//! `l = 0..=⌊M/2⌋` are unknown. Folding is not complex-linear in those
//! unknowns once the mirror `X[-l] = conj(X[l])` is substituted, so the
//! system splits into one for real parts and one for imaginary parts:
//!
//! ```text
//! Re X_i[k] = Σ_{l>0} (A(k,l) + A(k,-l)) Re X[l] + A(k,0) Re X[0]
//! Im X_i[k] = Σ_{l>0} (A(k,l) - A(k,-l)) Im X[l]
//! ```
//!
//! Rows are the non-negative baseband bins `k = 0..=M_i/2`. The DC column
//! appears once (it is its own mirror) and only in the real system; rows
//! `k = 0` and `k = M_i/2` are identically zero in the imaginary system and
//! are dropped.

use nalgebra::{Complex, DMatrix, DVector};

use crate::error::{Result, SmrsError};
use crate::scalar::Scalar;
use crate::solver::{reconstruct_system, Posedness, SolveConfig, SolveOutcome};
use crate::spectral::{ChannelConfig, ChannelSamples, FoldingMatrix, GridLayout, SpectrumGrid};
use crate::support::{split_blocks, ChannelIndicator, ReducedSystem, SupportMask};

/// The pair of real systems `x^r = A^r x^r`, `x^im = A^im x^im`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealSplitSystem<T: Scalar> {
    pub real: ReducedSystem<T>,
    pub imag: ReducedSystem<T>,
    pub m_total: usize,
    pub delta_f: f64,
}

/// Entries of `A^r` and `A^im` at row `k ≥ 0` and column `l ≥ 0`.
pub fn split_entries(channel: &ChannelConfig, k: i64, l: i64) -> (f64, f64) {
    let f = channel.rate();
    let direct = if channel.congruent(l, k) { f } else { 0.0 };
    if l == 0 {
        return (direct, 0.0);
    }
    let mirror = if channel.congruent(-l, k) { f } else { 0.0 };
    (direct + mirror, direct - mirror)
}

/// Builds the split systems over the retained non-negative columns of
/// `matrix` (all of `0..=⌊M/2⌋` when nothing is retained). Rows whose
/// baseband bin is inactive in `indicators` are dropped, as are all-zero
/// rows.
pub fn build_real_split<T: Scalar>(
    matrix: &FoldingMatrix,
    samples: &[ChannelSamples<T>],
    indicators: Option<&[ChannelIndicator]>,
) -> Result<RealSplitSystem<T>> {
    let grid = matrix.grid();
    if grid.layout() != GridLayout::Real {
        return Err(SmrsError::InvalidGrid(
            "split systems need a real-layout grid".into(),
        ));
    }
    let channels = matrix.channels();
    if samples.len() != channels.len() {
        return Err(SmrsError::DimensionMismatch {
            expected: channels.len(),
            actual: samples.len(),
            context: "sample vectors per channel",
        });
    }
    for (ch, s) in channels.iter().zip(samples) {
        ch.check_layout(GridLayout::Real)?;
        if s.config() != *ch || s.layout() != GridLayout::Real {
            return Err(SmrsError::InvalidChannel(
                "samples do not match matrix channels".into(),
            ));
        }
    }
    let real_cols: Vec<i64> = match matrix.retained_columns() {
        Some(c) => c.iter().copied().filter(|&l| l >= 0).collect(),
        None => (0..=grid.last_index()).collect(),
    };
    if real_cols.is_empty() {
        return Err(SmrsError::NoSignal);
    }
    let imag_cols: Vec<i64> = real_cols.iter().copied().filter(|&l| l > 0).collect();

    let mut rows = Vec::new();
    for (i, ch) in channels.iter().enumerate() {
        for k in 0..=(ch.bins_per_period() / 2) as i64 {
            if indicators.is_none_or(|ind| ind[i].is_active(k)) {
                rows.push((i, k));
            }
        }
    }
    let value =
        |(i, k): (usize, i64)| -> Complex<T> { samples[i].get(k).expect("k within baseband") };

    let real = ReducedSystem {
        matrix: DMatrix::from_fn(rows.len(), real_cols.len(), |r, c| {
            T::lit(split_entries(&channels[rows[r].0], rows[r].1, real_cols[c]).0)
        }),
        rhs: DVector::from_iterator(rows.len(), rows.iter().map(|&r| value(r).re)),
        column_map: real_cols,
        row_map: rows.clone(),
    }
    .drop_empty_rows();
    let imag = ReducedSystem {
        matrix: DMatrix::from_fn(rows.len(), imag_cols.len(), |r, c| {
            T::lit(split_entries(&channels[rows[r].0], rows[r].1, imag_cols[c]).1)
        }),
        rhs: DVector::from_iterator(rows.len(), rows.iter().map(|&r| value(r).im)),
        column_map: imag_cols,
        row_map: rows,
    }
    .drop_empty_rows();
    Ok(RealSplitSystem {
        real,
        imag,
        m_total: grid.m_total(),
        delta_f: matrix.delta_f(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct RealSolution<T: Scalar> {
    pub spectrum: SpectrumGrid<T>,
    pub real: SolveOutcome<T>,
    /// `None` when the imaginary system has no unknowns (only DC retained).
    pub imag: Option<SolveOutcome<T>>,
    /// Larger of the two systems' condition numbers.
    pub condition_number: T,
    /// Whether both systems ended on the same set of blocks.
    pub supports_agree: bool,
}

impl<T: Scalar> RealSolution<T> {
    pub fn posedness(&self) -> Posedness {
        let ill = self.real.posedness == Posedness::IllPosed
            || self
                .imag
                .as_ref()
                .is_some_and(|o| o.posedness == Posedness::IllPosed);
        if ill {
            Posedness::IllPosed
        } else {
            Posedness::WellPosed
        }
    }

    pub fn converged(&self) -> bool {
        self.real.converged && self.imag.as_ref().is_none_or(|o| o.converged)
    }

    pub fn iterations(&self) -> usize {
        self.real.iterations + self.imag.as_ref().map_or(0, |o| o.iterations)
    }

    pub fn residual_norm(&self) -> T {
        let i = self.imag.as_ref().map_or(T::zero(), |o| o.residual_norm);
        (self.real.residual_norm * self.real.residual_norm + i * i).sqrt()
    }
}

fn supported_bins<T: Scalar>(system: &ReducedSystem<T>, outcome: &SolveOutcome<T>) -> Vec<i64> {
    system
        .column_map
        .iter()
        .zip(outcome.solution.iter())
        .filter(|(_, v)| **v != T::zero())
        .map(|(&l, _)| l)
        .collect()
}

/// Solves both split systems independently (direct or block OMP as each
/// classifies) and reassembles the conjugate-symmetric spectrum.
pub fn solve_real<T: Scalar>(
    system: &RealSplitSystem<T>,
    cfg: &SolveConfig,
    mask: &SupportMask,
) -> Result<RealSolution<T>> {
    cfg.validate(system.delta_f)?;
    let mut blocks = mask.positive_blocks();
    if cfg.noisy_mode {
        blocks = split_blocks(&blocks, cfg.subblock_bins(system.delta_f));
    }
    let real = reconstruct_system(&system.real, &system.real.block_columns(&blocks), cfg)?;
    let imag = if system.imag.ncols() == 0 {
        None
    } else {
        Some(reconstruct_system(
            &system.imag,
            &system.imag.block_columns(&blocks),
            cfg,
        )?)
    };

    let half = system.m_total / 2 + 1;
    let mut positive = vec![Complex::new(T::zero(), T::zero()); half];
    for (&l, v) in system.real.column_map.iter().zip(real.solution.iter()) {
        positive[l as usize].re = *v;
    }
    if let Some(out) = &imag {
        for (&l, v) in system.imag.column_map.iter().zip(out.solution.iter()) {
            positive[l as usize].im = *v;
        }
    }
    let spectrum = SpectrumGrid::from_positive(system.delta_f, system.m_total, &positive)?;

    let condition_number = match &imag {
        Some(o) => real.condition_number.max(o.condition_number),
        None => real.condition_number,
    };
    let supports_agree = match &imag {
        Some(o) => {
            let on = |bins: Vec<i64>| {
                blocks
                    .iter()
                    .map(|b| bins.iter().any(|&l| l > 0 && b.contains(l)))
                    .collect::<Vec<_>>()
            };
            on(supported_bins(&system.real, &real)) == on(supported_bins(&system.imag, o))
        }
        None => true,
    };
    Ok(RealSolution {
        spectrum,
        real,
        imag,
        condition_number,
        supports_agree,
    })
}

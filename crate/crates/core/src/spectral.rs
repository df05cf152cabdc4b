//! Discrete frequency grids, sampling channels and the folding operator.
//!
//! A channel sampling at `F_i = M_i * delta_f` folds every grid bin `l` onto
//! the baseband bin `k` with `l ≡ k (mod M_i)` and scales by `F_i`. As a
//! matrix, block `i` has entry `F_i` at `(k, l)` when the congruence holds
//! and zero elsewhere; stacking the blocks of all channels gives the full
//! system.
//!
//! Index conventions:
//! - complex layout: grid bins `l = 0..M`, baseband bins `k = 0..M_i`;
//! - real layout: grid bins `l = -⌊M/2⌋..=⌊M/2⌋`, baseband bins
//!   `k = -M_i/2..=M_i/2`. The two baseband end bins are congruent and always
//!   hold the same value.

use nalgebra::{Complex, DMatrix};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SmrsError};
use crate::scalar::Scalar;

/// Whether a grid carries an arbitrary complex spectrum on `[0, F_max)` or a
/// conjugate-symmetric one centred on zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GridLayout {
    Complex,
    Real,
}

/// Shape of a frequency grid: layout plus the bin count `M`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct GridSpec {
    layout: GridLayout,
    m_total: usize,
}

impl GridSpec {
    pub fn new(layout: GridLayout, m_total: usize) -> Result<Self> {
        if m_total == 0 {
            return Err(SmrsError::InvalidGrid("bin count must be positive".into()));
        }
        Ok(Self { layout, m_total })
    }

    pub fn complex(m_total: usize) -> Result<Self> {
        Self::new(GridLayout::Complex, m_total)
    }

    pub fn real(m_total: usize) -> Result<Self> {
        Self::new(GridLayout::Real, m_total)
    }

    /// `M = ⌈span / delta_f⌉`, where `span` is `F_max` for complex signals and
    /// the Nyquist span `2 F_max` for real ones.
    pub fn from_span(layout: GridLayout, span_hz: f64, delta_f: f64) -> Result<Self> {
        if !(delta_f > 0.0) || !(span_hz > 0.0) {
            return Err(SmrsError::InvalidGrid(format!(
                "span {span_hz} Hz and step {delta_f} Hz must be positive"
            )));
        }
        let ratio = span_hz / delta_f;
        // absorb representation error such as 20e9 / 25e6 = 800.0000000001
        let m = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) {
            ratio.round()
        } else {
            ratio.ceil()
        };
        Self::new(layout, m as usize)
    }

    pub fn layout(&self) -> GridLayout {
        self.layout
    }

    pub fn m_total(&self) -> usize {
        self.m_total
    }

    pub fn first_index(&self) -> i64 {
        match self.layout {
            GridLayout::Complex => 0,
            GridLayout::Real => -((self.m_total / 2) as i64),
        }
    }

    pub fn last_index(&self) -> i64 {
        match self.layout {
            GridLayout::Complex => self.m_total as i64 - 1,
            GridLayout::Real => (self.m_total / 2) as i64,
        }
    }

    /// Number of stored bins: `M` (complex) or `2⌊M/2⌋ + 1` (real).
    pub fn len(&self) -> usize {
        (self.last_index() - self.first_index() + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        self.first_index()..=self.last_index()
    }

    pub fn contains(&self, l: i64) -> bool {
        l >= self.first_index() && l <= self.last_index()
    }

    pub fn position(&self, l: i64) -> Option<usize> {
        self.contains(l).then(|| (l - self.first_index()) as usize)
    }

    pub fn index_at(&self, pos: usize) -> i64 {
        self.first_index() + pos as i64
    }
}

/// One sampling channel: `M_i` bins per baseband period at resolution
/// `delta_f`, so the rate is `F_i = M_i * delta_f` exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelConfig {
    bins_per_period: usize,
    delta_f: f64,
}

impl ChannelConfig {
    pub fn new(bins_per_period: usize, delta_f: f64) -> Result<Self> {
        if bins_per_period == 0 {
            return Err(SmrsError::InvalidChannel(
                "bins per period must be ≥ 1".into(),
            ));
        }
        if !(delta_f > 0.0) || !delta_f.is_finite() {
            return Err(SmrsError::InvalidChannel(format!(
                "frequency step must be positive, got {delta_f}"
            )));
        }
        Ok(Self {
            bins_per_period,
            delta_f,
        })
    }

    /// Builds a channel from its sampling rate; the rate must be an integer
    /// multiple of `delta_f` (to 1e-9 relative).
    pub fn from_rate(rate_hz: f64, delta_f: f64) -> Result<Self> {
        if !(delta_f > 0.0) || !(rate_hz > 0.0) {
            return Err(SmrsError::InvalidChannel(format!(
                "rate {rate_hz} Hz and step {delta_f} Hz must be positive"
            )));
        }
        let ratio = rate_hz / delta_f;
        let m = ratio.round();
        if (ratio - m).abs() > 1e-9 * ratio.max(1.0) || m < 1.0 {
            return Err(SmrsError::InvalidChannel(format!(
                "rate {rate_hz} Hz is not an integer multiple of {delta_f} Hz"
            )));
        }
        Self::new(m as usize, delta_f)
    }

    pub fn bins_per_period(&self) -> usize {
        self.bins_per_period
    }

    pub fn delta_f(&self) -> f64 {
        self.delta_f
    }

    pub fn rate(&self) -> f64 {
        self.bins_per_period as f64 * self.delta_f
    }

    pub fn check_layout(&self, layout: GridLayout) -> Result<()> {
        if layout == GridLayout::Real && !self.bins_per_period.is_multiple_of(2) {
            return Err(SmrsError::OddRealChannel(self.bins_per_period));
        }
        Ok(())
    }

    pub fn baseband_first(&self, layout: GridLayout) -> i64 {
        match layout {
            GridLayout::Complex => 0,
            GridLayout::Real => -((self.bins_per_period / 2) as i64),
        }
    }

    /// Baseband length: `M_i` (complex) or `M_i + 1` (real, centred).
    pub fn baseband_len(&self, layout: GridLayout) -> usize {
        match layout {
            GridLayout::Complex => self.bins_per_period,
            GridLayout::Real => 2 * (self.bins_per_period / 2) + 1,
        }
    }

    pub fn baseband_indices(&self, layout: GridLayout) -> std::ops::RangeInclusive<i64> {
        let first = self.baseband_first(layout);
        first..=first + self.baseband_len(layout) as i64 - 1
    }

    /// Residue class of `l` in `0..M_i`.
    pub fn class_of(&self, l: i64) -> usize {
        l.rem_euclid(self.bins_per_period as i64) as usize
    }

    pub fn congruent(&self, l: i64, k: i64) -> bool {
        (l - k).rem_euclid(self.bins_per_period as i64) == 0
    }
}

fn same_step(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs())
}

/// A uniformly discretized spectrum `X[l] = X(l * delta_f)`.
///
/// Real-layout grids always satisfy `X[-l] = conj(X[l])` exactly; the
/// constructors reject or build values accordingly.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumGrid<T: Scalar> {
    delta_f: f64,
    grid: GridSpec,
    values: Vec<Complex<T>>,
}

impl<T: Scalar> SpectrumGrid<T> {
    pub fn new(delta_f: f64, grid: GridSpec, values: Vec<Complex<T>>) -> Result<Self> {
        if !(delta_f > 0.0) {
            return Err(SmrsError::InvalidGrid(format!(
                "step must be positive, got {delta_f}"
            )));
        }
        if values.len() != grid.len() {
            return Err(SmrsError::DimensionMismatch {
                expected: grid.len(),
                actual: values.len(),
                context: "spectrum values",
            });
        }
        let out = Self {
            delta_f,
            grid,
            values,
        };
        if grid.layout() == GridLayout::Real {
            for l in 0..=grid.last_index() {
                if out.get(-l) != out.get(l).conj() {
                    return Err(SmrsError::NotConjugateSymmetric(l));
                }
            }
        }
        Ok(out)
    }

    pub fn zeros(delta_f: f64, grid: GridSpec) -> Result<Self> {
        Self::new(
            delta_f,
            grid,
            vec![Complex::new(T::zero(), T::zero()); grid.len()],
        )
    }

    /// Real-layout grid from its non-negative half `X[0..=⌊M/2⌋]`; the
    /// negative half is the conjugate mirror. `X[0]` must be real.
    pub fn from_positive(delta_f: f64, m_total: usize, positive: &[Complex<T>]) -> Result<Self> {
        let grid = GridSpec::real(m_total)?;
        let half = (m_total / 2) + 1;
        if positive.len() != half {
            return Err(SmrsError::DimensionMismatch {
                expected: half,
                actual: positive.len(),
                context: "positive half-spectrum",
            });
        }
        if positive[0].im != T::zero() {
            return Err(SmrsError::NotConjugateSymmetric(0));
        }
        let values = positive
            .iter()
            .skip(1)
            .rev()
            .map(|v| v.conj())
            .chain(positive.iter().copied())
            .collect();
        Self::new(delta_f, grid, values)
    }

    pub fn delta_f(&self) -> f64 {
        self.delta_f
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn layout(&self) -> GridLayout {
        self.grid.layout()
    }

    pub fn m_total(&self) -> usize {
        self.grid.m_total()
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    /// Value at grid index `l`; zero outside the grid.
    pub fn get(&self, l: i64) -> Complex<T> {
        self.grid
            .position(l)
            .map(|p| self.values[p])
            .unwrap_or_else(|| Complex::new(T::zero(), T::zero()))
    }

    /// Iterates `(l, X[l])` in ascending `l`.
    pub fn iter(&self) -> impl Iterator<Item = (i64, Complex<T>)> + '_ {
        self.grid.indices().zip(self.values.iter().copied())
    }

    /// `X[0..=last]`; for real grids this is all the information there is.
    pub fn positive_half(&self) -> &[Complex<T>] {
        let start = self.grid.position(0).unwrap_or(0);
        &self.values[start..]
    }

    /// `α·self + β·other`, same grid required.
    pub fn combine(&self, alpha: T, other: &Self, beta: T) -> Result<Self> {
        if self.grid != other.grid {
            return Err(SmrsError::InvalidGrid("grids differ".into()));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.scale(alpha) + b.scale(beta))
            .collect();
        Ok(Self {
            delta_f: self.delta_f,
            grid: self.grid,
            values,
        })
    }
}

/// Baseband spectrum of one channel, `(x_i)[k] = X_i[k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSamples<T: Scalar> {
    config: ChannelConfig,
    layout: GridLayout,
    baseband: Vec<Complex<T>>,
}

impl<T: Scalar> ChannelSamples<T> {
    pub fn new(
        config: ChannelConfig,
        layout: GridLayout,
        baseband: Vec<Complex<T>>,
    ) -> Result<Self> {
        config.check_layout(layout)?;
        let expected = config.baseband_len(layout);
        if baseband.len() != expected {
            return Err(SmrsError::DimensionMismatch {
                expected,
                actual: baseband.len(),
                context: "baseband length",
            });
        }
        Ok(Self {
            config,
            layout,
            baseband,
        })
    }

    pub fn config(&self) -> ChannelConfig {
        self.config
    }

    pub fn layout(&self) -> GridLayout {
        self.layout
    }

    pub fn baseband(&self) -> &[Complex<T>] {
        &self.baseband
    }

    pub fn indices(&self) -> std::ops::RangeInclusive<i64> {
        self.config.baseband_indices(self.layout)
    }

    /// Baseband value at index `k` (within the stored range).
    pub fn get(&self, k: i64) -> Option<Complex<T>> {
        let pos = k - self.config.baseband_first(self.layout);
        (pos >= 0 && (pos as usize) < self.baseband.len()).then(|| self.baseband[pos as usize])
    }

    /// Value of the baseband bin that grid bin `l` folds onto.
    pub fn value_for_bin(&self, l: i64) -> Complex<T> {
        let m = self.config.bins_per_period() as i64;
        let first = self.config.baseband_first(self.layout);
        let k = first + (l - first).rem_euclid(m);
        self.baseband[(k - first) as usize]
    }
}

/// Folds a spectrum through one channel:
/// `X_i[k] = F_i · Σ_{l ≡ k (mod M_i)} X[l]`, summed in ascending `l`.
pub fn fold_spectrum<T: Scalar>(
    signal: &SpectrumGrid<T>,
    channel: &ChannelConfig,
) -> Result<ChannelSamples<T>> {
    let layout = signal.layout();
    channel.check_layout(layout)?;
    if !same_step(signal.delta_f(), channel.delta_f()) {
        return Err(SmrsError::InvalidChannel(format!(
            "channel step {} Hz differs from grid step {} Hz",
            channel.delta_f(),
            signal.delta_f()
        )));
    }
    let m = channel.bins_per_period() as i64;
    let grid = signal.grid();
    let rate = T::lit(channel.rate());
    let baseband = channel
        .baseband_indices(layout)
        .map(|k| {
            let first = grid.first_index();
            let mut l = first + (k - first).rem_euclid(m);
            let mut acc = Complex::new(T::zero(), T::zero());
            while l <= grid.last_index() {
                acc += signal.get(l);
                l += m;
            }
            acc.scale(rate)
        })
        .collect();
    ChannelSamples::new(*channel, layout, baseband)
}

/// Implicit aliasing matrix: one block per channel, rows in channel order and
/// ascending baseband index, columns the grid bins (or a retained subset).
#[derive(Debug, Clone, PartialEq)]
pub struct FoldingMatrix {
    channels: Vec<ChannelConfig>,
    grid: GridSpec,
    retained_columns: Option<Vec<i64>>,
}

impl FoldingMatrix {
    pub fn new(channels: Vec<ChannelConfig>, grid: GridSpec) -> Result<Self> {
        if channels.is_empty() {
            return Err(SmrsError::InvalidChannel(
                "at least one channel required".into(),
            ));
        }
        let step = channels[0].delta_f();
        for c in &channels {
            c.check_layout(grid.layout())?;
            if !same_step(step, c.delta_f()) {
                return Err(SmrsError::InvalidChannel(
                    "channels use different frequency steps".into(),
                ));
            }
        }
        Ok(Self {
            channels,
            grid,
            retained_columns: None,
        })
    }

    /// Restricts the columns to `columns` (grid indices, any order, no
    /// duplicates).
    pub fn with_retained_columns(mut self, columns: Vec<i64>) -> Result<Self> {
        let mut cols = columns;
        cols.sort_unstable();
        let before = cols.len();
        cols.dedup();
        if cols.len() != before {
            return Err(SmrsError::InvalidGrid("duplicate retained column".into()));
        }
        if let Some(bad) = cols.iter().find(|&&l| !self.grid.contains(l)) {
            return Err(SmrsError::InvalidGrid(format!(
                "retained column {bad} outside grid"
            )));
        }
        self.retained_columns = Some(cols);
        Ok(self)
    }

    pub fn channels(&self) -> &[ChannelConfig] {
        &self.channels
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn delta_f(&self) -> f64 {
        self.channels[0].delta_f()
    }

    pub fn retained_columns(&self) -> Option<&[i64]> {
        self.retained_columns.as_deref()
    }

    /// Grid index of each column, in column order.
    pub fn columns(&self) -> Vec<i64> {
        match &self.retained_columns {
            Some(c) => c.clone(),
            None => self.grid.indices().collect(),
        }
    }

    /// `(channel, baseband index)` of each row, in row order.
    pub fn row_map(&self) -> Vec<(usize, i64)> {
        let layout = self.grid.layout();
        self.channels
            .iter()
            .enumerate()
            .flat_map(|(i, c)| c.baseband_indices(layout).map(move |k| (i, k)))
            .collect()
    }

    pub fn nrows(&self) -> usize {
        let layout = self.grid.layout();
        self.channels.iter().map(|c| c.baseband_len(layout)).sum()
    }

    pub fn ncols(&self) -> usize {
        self.retained_columns
            .as_ref()
            .map_or(self.grid.len(), Vec::len)
    }

    /// Entry at row `(channel, k)` and grid column `l`: `F_i` or zero.
    pub fn entry(&self, row: (usize, i64), l: i64) -> f64 {
        let c = &self.channels[row.0];
        if c.congruent(l, row.1) {
            c.rate()
        } else {
            0.0
        }
    }

    pub fn to_dense<T: Scalar>(&self) -> DMatrix<T> {
        let rows = self.row_map();
        let cols = self.columns();
        DMatrix::from_fn(rows.len(), cols.len(), |r, c| {
            T::lit(self.entry(rows[r], cols[c]))
        })
    }

    /// Matrix-vector product with the signal restricted to this matrix's
    /// columns, accumulated per row in ascending column order.
    pub fn apply<T: Scalar>(&self, signal: &SpectrumGrid<T>) -> Result<Vec<Complex<T>>> {
        if signal.grid() != self.grid {
            return Err(SmrsError::InvalidGrid(
                "signal grid differs from matrix grid".into(),
            ));
        }
        let cols = self.columns();
        Ok(self
            .row_map()
            .into_iter()
            .map(|row| {
                let mut acc = Complex::new(T::zero(), T::zero());
                for &l in &cols {
                    let e = self.entry(row, l);
                    if e != 0.0 {
                        acc += signal.get(l).scale(T::lit(e));
                    }
                }
                acc
            })
            .collect())
    }

    pub fn column_nonzeros(&self, l: i64) -> usize {
        self.row_map()
            .into_iter()
            .filter(|&row| self.entry(row, l) != 0.0)
            .count()
    }

    pub fn row_nonzeros(&self, row: (usize, i64)) -> usize {
        self.columns()
            .into_iter()
            .filter(|&l| self.entry(row, l) != 0.0)
            .count()
    }
}

/// Single-channel block `A_i` of shape `M_i × M` (complex) or
/// `(M_i + 1) × (2⌊M/2⌋ + 1)` (real).
pub fn build_channel_matrix(channel: &ChannelConfig, grid: GridSpec) -> Result<FoldingMatrix> {
    FoldingMatrix::new(vec![*channel], grid)
}

/// Stacks per-channel blocks and their baseband vectors, in the given order.
pub fn concatenate_system<T: Scalar>(
    blocks: &[FoldingMatrix],
    samples: &[ChannelSamples<T>],
) -> Result<(FoldingMatrix, Vec<Complex<T>>)> {
    let first = blocks
        .first()
        .ok_or_else(|| SmrsError::InvalidChannel("no blocks to concatenate".into()))?;
    if blocks.len() != samples.len() {
        return Err(SmrsError::DimensionMismatch {
            expected: blocks.len(),
            actual: samples.len(),
            context: "sample vectors per block",
        });
    }
    let grid = first.grid();
    let mut channels = Vec::new();
    let mut stacked = Vec::new();
    for (block, s) in blocks.iter().zip(samples) {
        if block.grid() != grid {
            return Err(SmrsError::InvalidGrid(
                "blocks built for different grids".into(),
            ));
        }
        if block.retained_columns() != first.retained_columns() {
            return Err(SmrsError::InvalidGrid(
                "blocks retain different columns".into(),
            ));
        }
        if s.layout() != grid.layout() {
            return Err(SmrsError::InvalidGrid(
                "sample layout differs from grid".into(),
            ));
        }
        if block.channels() != [s.config()] || s.baseband().len() != block.nrows() {
            return Err(SmrsError::DimensionMismatch {
                expected: block.nrows(),
                actual: s.baseband().len(),
                context: "sample vector vs block rows",
            });
        }
        channels.extend_from_slice(block.channels());
        stacked.extend_from_slice(s.baseband());
    }
    let mut matrix = FoldingMatrix::new(channels, grid)?;
    if let Some(cols) = first.retained_columns() {
        matrix = matrix.with_retained_columns(cols.to_vec())?;
    }
    Ok((matrix, stacked))
}

/// Outcome of the column-uniqueness check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct UniquenessVerdict {
    /// `M < lcm(M_1, …, M_P)`.
    pub ok: bool,
    /// `lcm(M_1, …, M_P)`, saturating at `u128::MAX`.
    pub lcm: u128,
    /// Two grid bins whose columns coincide, when the grid is wider than the
    /// common period.
    pub duplicate: Option<(i64, i64)>,
}

impl UniquenessVerdict {
    /// Largest frequency span `lcm · delta_f` the channels can disambiguate.
    pub fn max_span_hz(&self, delta_f: f64) -> f64 {
        self.lcm as f64 * delta_f
    }
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

pub fn lcm_of(values: impl IntoIterator<Item = usize>) -> u128 {
    values.into_iter().fold(1u128, |acc, v| {
        let v = v as u128;
        (acc / gcd(acc, v)).saturating_mul(v)
    })
}

/// Columns of the stacked matrix are periodic with period `lcm(M_i)`, so
/// they are pairwise distinct only when the grid fits inside one period.
pub fn check_unique_columns(
    channels: &[ChannelConfig],
    grid: GridSpec,
) -> Result<UniquenessVerdict> {
    if channels.is_empty() {
        return Err(SmrsError::InvalidChannel(
            "at least one channel required".into(),
        ));
    }
    let lcm = lcm_of(channels.iter().map(ChannelConfig::bins_per_period));
    let ok = (grid.m_total() as u128) < lcm;
    let duplicate = ((grid.len() as u128) > lcm).then(|| {
        let a = grid.first_index();
        (a, a + lcm as i64)
    });
    Ok(UniquenessVerdict { ok, lcm, duplicate })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn brute_fold(x: &SpectrumGrid<f64>, ch: &ChannelConfig) -> Vec<Complex<f64>> {
        ch.baseband_indices(x.layout())
            .map(|k| {
                let mut acc = c(0.0, 0.0);
                for (l, v) in x.iter() {
                    if (l - k) % ch.bins_per_period() as i64 == 0 {
                        acc += v;
                    }
                }
                acc * ch.rate()
            })
            .collect()
    }

    #[test]
    fn fold_two_aliased_bins() {
        let grid = GridSpec::complex(12).unwrap();
        let mut vals = vec![c(0.0, 0.0); 12];
        let (a, b) = (c(1.5, -0.5), c(-0.25, 2.0));
        vals[1] = a;
        vals[9] = b;
        let x = SpectrumGrid::new(1.0, grid, vals).unwrap();
        let ch = ChannelConfig::new(4, 1.0).unwrap();
        let out = fold_spectrum(&x, &ch).unwrap();
        let oracle = brute_fold(&x, &ch);
        assert_eq!(out.baseband(), &oracle[..]);
        assert_eq!(out.baseband()[1], (a + b) * 4.0);
        for k in [0usize, 2, 3] {
            assert_eq!(out.baseband()[k], c(0.0, 0.0));
        }
    }

    #[test]
    fn fold_zero_and_unaliased() {
        let grid = GridSpec::complex(10).unwrap();
        let ch = ChannelConfig::new(16, 2.0).unwrap();
        let zero = SpectrumGrid::<f64>::zeros(2.0, grid).unwrap();
        assert!(fold_spectrum(&zero, &ch)
            .unwrap()
            .baseband()
            .iter()
            .all(|v| *v == c(0.0, 0.0)));

        let vals: Vec<_> = (0..10).map(|k| c(k as f64, 1.0)).collect();
        let x = SpectrumGrid::new(2.0, grid, vals.clone()).unwrap();
        let out = fold_spectrum(&x, &ch).unwrap();
        for (got, v) in out.baseband().iter().zip(&vals) {
            assert_eq!(*got, v * 32.0);
        }
    }

    #[test]
    fn fold_rejects_odd_real_channel() {
        let x = SpectrumGrid::<f64>::zeros(1.0, GridSpec::real(10).unwrap()).unwrap();
        let ch = ChannelConfig::new(5, 1.0).unwrap();
        assert_eq!(fold_spectrum(&x, &ch), Err(SmrsError::OddRealChannel(5)));
    }

    #[test]
    fn channel_rows_follow_congruence() {
        let ch = ChannelConfig::new(4, 1.0).unwrap();
        let m = build_channel_matrix(&ch, GridSpec::complex(12).unwrap()).unwrap();
        let dense = m.to_dense::<f64>();
        assert_eq!(dense.shape(), (4, 12));
        for k in 0..4 {
            let nz: Vec<usize> = (0..12).filter(|&l| dense[(k, l)] != 0.0).collect();
            assert_eq!(nz, vec![k, k + 4, k + 8]);
            assert!(nz.iter().all(|&l| dense[(k, l)] == 4.0));
        }
    }

    #[test]
    fn single_replica_matrix_is_scaled_identity() {
        let ch = ChannelConfig::new(7, 0.5).unwrap();
        let dense = build_channel_matrix(&ch, GridSpec::complex(7).unwrap())
            .unwrap()
            .to_dense::<f64>();
        assert_eq!(dense, DMatrix::identity(7, 7) * 3.5);
    }

    #[test]
    fn full_scale_channels_have_three_nonzeros_per_column() {
        let df = 5e6;
        let chans: Vec<_> = [190, 200, 210]
            .iter()
            .map(|&m| ChannelConfig::new(m, df).unwrap())
            .collect();
        let grid = GridSpec::from_span(GridLayout::Complex, 20e9, df).unwrap();
        assert_eq!(grid.m_total(), 4000);
        let blocks: Vec<_> = chans
            .iter()
            .map(|ch| build_channel_matrix(ch, grid).unwrap())
            .collect();
        let samples: Vec<_> = chans
            .iter()
            .map(|ch| {
                ChannelSamples::<f64>::new(
                    *ch,
                    GridLayout::Complex,
                    vec![c(0.0, 0.0); ch.bins_per_period()],
                )
                .unwrap()
            })
            .collect();
        let (full, stacked) = concatenate_system(&blocks, &samples).unwrap();
        assert_eq!((full.nrows(), full.ncols()), (600, 4000));
        assert_eq!(stacked.len(), 600);
        for l in (0..4000).step_by(37) {
            assert_eq!(full.column_nonzeros(l), 3);
        }
    }

    #[test]
    fn concatenate_small_system_is_underdetermined() {
        let grid = GridSpec::complex(12).unwrap();
        let chans = [
            ChannelConfig::new(4, 1.0).unwrap(),
            ChannelConfig::new(6, 1.0).unwrap(),
        ];
        let blocks: Vec<_> = chans
            .iter()
            .map(|c| build_channel_matrix(c, grid).unwrap())
            .collect();
        let x = SpectrumGrid::new(1.0, grid, (0..12).map(|k| c(k as f64, 0.0)).collect()).unwrap();
        let samples: Vec<_> = chans
            .iter()
            .map(|ch| fold_spectrum(&x, ch).unwrap())
            .collect();
        let (full, stacked) = concatenate_system(&blocks, &samples).unwrap();
        assert_eq!((full.nrows(), full.ncols()), (10, 12));
        assert_eq!(stacked, full.apply(&x).unwrap());

        let (single, _) = concatenate_system(&blocks[..1], &samples[..1]).unwrap();
        assert_eq!(single, blocks[0]);

        assert!(concatenate_system(&blocks, &samples[..1]).is_err());
        assert!(concatenate_system(&blocks, &[samples[1].clone(), samples[0].clone()]).is_err());
    }

    #[test]
    fn uniqueness_check_examples() {
        let df = 5e6;
        let chans: Vec<_> = [190, 200, 210]
            .iter()
            .map(|&m| ChannelConfig::new(m, df).unwrap())
            .collect();
        let v = check_unique_columns(&chans, GridSpec::complex(4000).unwrap()).unwrap();
        assert!(v.ok);
        assert_eq!(v.lcm, 79_800);
        assert!((v.max_span_hz(df) - 399e9).abs() < 1.0);

        let small = [
            ChannelConfig::new(4, 1.0).unwrap(),
            ChannelConfig::new(6, 1.0).unwrap(),
        ];
        let v = check_unique_columns(&small, GridSpec::complex(12).unwrap()).unwrap();
        assert!(!v.ok);
        assert_eq!(v.lcm, 12);

        let v = check_unique_columns(&small, GridSpec::complex(13).unwrap()).unwrap();
        assert_eq!(v.duplicate, Some((0, 12)));

        let one = [ChannelConfig::new(9, 1.0).unwrap()];
        assert!(
            !check_unique_columns(&one, GridSpec::complex(9).unwrap())
                .unwrap()
                .ok
        );
    }

    #[test]
    fn rate_must_be_integer_multiple() {
        assert_eq!(
            ChannelConfig::from_rate(0.95e9, 25e6)
                .unwrap()
                .bins_per_period(),
            38
        );
        assert_eq!(
            ChannelConfig::from_rate(4.2e9, 25e6)
                .unwrap()
                .bins_per_period(),
            168
        );
        assert!(ChannelConfig::from_rate(1.01e9, 25e6).is_err());
    }

    #[test]
    fn real_grid_enforces_conjugate_symmetry() {
        let grid = GridSpec::real(8).unwrap();
        assert_eq!(grid.len(), 9);
        let mut vals = vec![c(0.0, 0.0); 9];
        vals[5] = c(1.0, 2.0);
        assert_eq!(
            SpectrumGrid::new(1.0, grid, vals.clone()),
            Err(SmrsError::NotConjugateSymmetric(1))
        );
        vals[3] = c(1.0, -2.0);
        assert!(SpectrumGrid::new(1.0, grid, vals).is_ok());

        let x = SpectrumGrid::from_positive(
            1.0,
            8,
            &[
                c(0.5, 0.0),
                c(1.0, 2.0),
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(3.0, -1.0),
            ],
        )
        .unwrap();
        assert_eq!(x.get(-4), c(3.0, 1.0));
        assert_eq!(x.get(-1), c(1.0, -2.0));
        assert!(SpectrumGrid::from_positive(1.0, 2, &[c(0.0, 1.0), c(0.0, 0.0)]).is_err());
    }

    #[test]
    fn real_baseband_end_bins_coincide() {
        let x = SpectrumGrid::from_positive(
            1.0,
            8,
            &[
                c(0.0, 0.0),
                c(0.0, 0.0),
                c(1.0, 0.5),
                c(0.0, 0.0),
                c(0.0, 0.0),
            ],
        )
        .unwrap();
        let ch = ChannelConfig::new(4, 1.0).unwrap();
        let s = fold_spectrum(&x, &ch).unwrap();
        assert_eq!(s.baseband().len(), 5);
        assert_eq!(s.get(-2), s.get(2));
        // tone at +2 and its mirror at -2 share class 2 mod 4
        assert_eq!(s.get(2).unwrap(), (c(1.0, 0.5) + c(1.0, -0.5)) * 4.0);
        assert_eq!(s.baseband(), &brute_fold(&x, &ch)[..]);
    }
}

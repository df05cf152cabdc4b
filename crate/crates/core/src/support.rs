//! Support detection and system reduction.
//!
//! Each channel marks the baseband bins that carry energy; the periodic
//! extension of those marks over the grid says which grid bins could have
//! produced them. A grid bin stays a candidate only if every channel agrees.
//! The surviving bins are the columns of the reduced system, and baseband
//! bins without energy drop their rows.

use nalgebra::{Complex, ComplexField, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Result, SmrsError};
use crate::scalar::Scalar;
use crate::spectral::{ChannelConfig, ChannelSamples, FoldingMatrix, GridLayout, GridSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DetectionMode {
    /// A baseband bin is active when its magnitude is nonzero (relative to
    /// the channel peak, see `zero_tolerance`).
    Noiseless,
    /// A baseband bin is active when the mean energy in a window around it
    /// exceeds a threshold.
    Noisy,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectorConfig {
    pub mode: DetectionMode,
    /// Width of the local energy average in Hz (noisy mode).
    pub energy_window: f64,
    /// Absolute energy threshold; when unset the threshold is
    /// `threshold_factor` times a noise-floor estimate.
    pub energy_threshold: Option<f64>,
    pub threshold_factor: f64,
    /// Fraction of the window energies, lowest first, averaged into the
    /// noise-floor estimate.
    pub floor_quantile: f64,
    /// Per-side block widening as a fraction of block length.
    pub widen_fraction: f64,
    /// Noiseless zero test: `|X_i[k]| > zero_tolerance · max_k |X_i[k]|`.
    pub zero_tolerance: f64,
}

impl Default for DetectorConfig {
    fn default() -> Self {
        Self {
            mode: DetectionMode::Noiseless,
            energy_window: 100e6,
            energy_threshold: None,
            threshold_factor: 3.0,
            floor_quantile: 0.1,
            widen_fraction: 0.0,
            zero_tolerance: 1e-12,
        }
    }
}

impl DetectorConfig {
    pub fn noisy() -> Self {
        Self {
            mode: DetectionMode::Noisy,
            widen_fraction: 0.2,
            threshold_factor: 2.5,
            ..Self::default()
        }
    }

    pub fn validate(&self, delta_f: f64) -> Result<()> {
        if !(self.widen_fraction >= 0.0) {
            return Err(SmrsError::InvalidConfig(
                "widen_fraction must be ≥ 0".into(),
            ));
        }
        if self.mode == DetectionMode::Noisy && !(self.energy_window >= delta_f * (1.0 - 1e-9)) {
            return Err(SmrsError::InvalidConfig(format!(
                "energy_window {} Hz must be at least the frequency step {delta_f} Hz",
                self.energy_window
            )));
        }
        if !(self.floor_quantile > 0.0 && self.floor_quantile <= 1.0) {
            return Err(SmrsError::InvalidConfig(
                "floor_quantile must lie in (0, 1]".into(),
            ));
        }
        if !(self.threshold_factor > 0.0) || !(self.zero_tolerance >= 0.0) {
            return Err(SmrsError::InvalidConfig(
                "threshold_factor must be > 0 and zero_tolerance ≥ 0".into(),
            ));
        }
        Ok(())
    }
}

/// Per-channel activity over the stored baseband bins.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelIndicator {
    channel: ChannelConfig,
    layout: GridLayout,
    active: Vec<bool>,
}

impl ChannelIndicator {
    pub fn channel(&self) -> ChannelConfig {
        self.channel
    }

    pub fn active(&self) -> &[bool] {
        &self.active
    }

    pub fn is_active(&self, k: i64) -> bool {
        let pos = k - self.channel.baseband_first(self.layout);
        pos >= 0 && self.active.get(pos as usize).copied().unwrap_or(false)
    }

    /// Whether the baseband bin that grid bin `l` folds onto is active.
    pub fn covers(&self, l: i64) -> bool {
        let first = self.channel.baseband_first(self.layout);
        let m = self.channel.bins_per_period() as i64;
        self.active[(l - first).rem_euclid(m) as usize]
    }

    /// Periodic extension over the grid: `χ_i[l]`.
    pub fn extend(&self, grid: GridSpec) -> Vec<bool> {
        grid.indices().map(|l| self.covers(l)).collect()
    }
}

/// Marks the active baseband bins of one channel.
pub fn detect_channel<T: Scalar>(
    samples: &ChannelSamples<T>,
    cfg: &DetectorConfig,
) -> Result<ChannelIndicator> {
    let channel = samples.config();
    cfg.validate(channel.delta_f())?;
    let layout = samples.layout();
    let m = channel.bins_per_period();
    let first = channel.baseband_first(layout);
    // one value per residue class; the centred real baseband repeats its ends
    let class_value = |c: usize| {
        let k = first + (c as i64 - first).rem_euclid(m as i64);
        samples.get(k).expect("baseband covers every class")
    };
    let class_active: Vec<bool> = match cfg.mode {
        DetectionMode::Noiseless => {
            let mags: Vec<f64> = (0..m).map(|c| class_value(c).modulus().as_f64()).collect();
            let peak = mags.iter().copied().fold(0.0, f64::max);
            let tol = cfg.zero_tolerance * peak;
            mags.iter().map(|&v| v > tol && v > 0.0).collect()
        }
        DetectionMode::Noisy => {
            let energy: Vec<f64> = (0..m).map(|c| class_value(c).norm_sqr().as_f64()).collect();
            let width = ((cfg.energy_window / channel.delta_f()).round() as usize).clamp(1, m);
            let lo = (width as i64 - 1) / 2;
            let avg: Vec<f64> = (0..m as i64)
                .map(|c| {
                    (-lo..-lo + width as i64)
                        .map(|o| energy[(c + o).rem_euclid(m as i64) as usize])
                        .sum::<f64>()
                        / width as f64
                })
                .collect();
            let threshold = match cfg.energy_threshold {
                Some(t) => t,
                None => {
                    let mut sorted = avg.clone();
                    sorted.sort_by(f64::total_cmp);
                    let n = ((m as f64 * cfg.floor_quantile).ceil() as usize).clamp(1, m);
                    let floor = sorted[..n].iter().sum::<f64>() / n as f64;
                    cfg.threshold_factor * floor
                }
            };
            avg.iter().map(|&e| e > threshold).collect()
        }
    };
    let active = samples
        .indices()
        .map(|k| class_active[channel.class_of(k)])
        .collect();
    Ok(ChannelIndicator {
        channel,
        layout,
        active,
    })
}

/// `χ_i[l]` over the full grid.
pub fn channel_indicator<T: Scalar>(
    samples: &ChannelSamples<T>,
    cfg: &DetectorConfig,
    grid: GridSpec,
) -> Result<Vec<bool>> {
    if samples.layout() != grid.layout() {
        return Err(SmrsError::InvalidGrid(
            "sample layout differs from grid".into(),
        ));
    }
    Ok(detect_channel(samples, cfg)?.extend(grid))
}

/// Inclusive run of grid bins `start..=end`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Block {
    pub start: i64,
    pub end: i64,
}

impl Block {
    pub fn new(start: i64, end: i64) -> Self {
        debug_assert!(start <= end);
        Self { start, end }
    }

    pub fn len(&self) -> usize {
        (self.end - self.start + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, l: i64) -> bool {
        l >= self.start && l <= self.end
    }

    pub fn bins(&self) -> std::ops::RangeInclusive<i64> {
        self.start..=self.end
    }
}

/// Candidate support `χ[l]` together with its maximal runs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportMask {
    grid: GridSpec,
    mask: Vec<bool>,
    blocks: Vec<Block>,
}

impl SupportMask {
    pub fn from_mask(grid: GridSpec, mask: Vec<bool>) -> Result<Self> {
        if mask.len() != grid.len() {
            return Err(SmrsError::DimensionMismatch {
                expected: grid.len(),
                actual: mask.len(),
                context: "support mask",
            });
        }
        let blocks = runs(grid, &mask);
        Ok(Self { grid, mask, blocks })
    }

    /// Mask that is true exactly on the given bins (outside-grid bins are
    /// ignored).
    pub fn from_bins(grid: GridSpec, bins: impl IntoIterator<Item = i64>) -> Self {
        let mut mask = vec![false; grid.len()];
        for l in bins {
            if let Some(p) = grid.position(l) {
                mask[p] = true;
            }
        }
        let blocks = runs(grid, &mask);
        Self { grid, mask, blocks }
    }

    pub fn full(grid: GridSpec) -> Self {
        Self::from_bins(grid, grid.indices())
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn contains(&self, l: i64) -> bool {
        self.grid.position(l).is_some_and(|p| self.mask[p])
    }

    pub fn count(&self) -> usize {
        self.mask.iter().filter(|&&b| b).count()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn bins(&self) -> impl Iterator<Item = i64> + '_ {
        self.grid
            .indices()
            .zip(&self.mask)
            .filter_map(|(l, &m)| m.then_some(l))
    }

    /// Blocks clipped to non-negative bins; for real grids these index the
    /// unknowns of the split systems.
    pub fn positive_blocks(&self) -> Vec<Block> {
        self.blocks
            .iter()
            .filter(|b| b.end >= 0)
            .map(|b| Block::new(b.start.max(0), b.end))
            .collect()
    }
}

fn runs(grid: GridSpec, mask: &[bool]) -> Vec<Block> {
    let mut out = Vec::new();
    let mut start = None;
    for (pos, &m) in mask.iter().enumerate() {
        match (m, start) {
            (true, None) => start = Some(pos),
            (false, Some(s)) => {
                out.push(Block::new(grid.index_at(s), grid.index_at(pos - 1)));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push(Block::new(grid.index_at(s), grid.last_index()));
    }
    out
}

/// `χ[l] = Π_i χ_i[l]`.
pub fn intersect_indicators(grid: GridSpec, per_channel: &[Vec<bool>]) -> Result<SupportMask> {
    let mut mask = vec![!per_channel.is_empty(); grid.len()];
    for ind in per_channel {
        if ind.len() != grid.len() {
            return Err(SmrsError::DimensionMismatch {
                expected: grid.len(),
                actual: ind.len(),
                context: "channel indicator",
            });
        }
        for (m, &v) in mask.iter_mut().zip(ind) {
            *m &= v;
        }
    }
    SupportMask::from_mask(grid, mask)
}

/// Grows every block by `round(fraction · len)` bins per side, clipped to the
/// grid; blocks that meet merge.
pub fn widen_mask(mask: &SupportMask, widen_fraction: f64) -> Result<SupportMask> {
    if !(widen_fraction >= 0.0) {
        return Err(SmrsError::InvalidConfig(
            "widen_fraction must be ≥ 0".into(),
        ));
    }
    let grid = mask.grid();
    let mut out = mask.mask().to_vec();
    for b in mask.blocks() {
        let w = (widen_fraction * b.len() as f64).round() as i64;
        let lo = (b.start - w).max(grid.first_index());
        let hi = (b.end + w).min(grid.last_index());
        for l in lo..=hi {
            out[grid.position(l).expect("clipped to grid")] = true;
        }
    }
    SupportMask::from_mask(grid, out)
}

/// Cuts blocks into consecutive pieces of at most `max_len` bins.
pub fn split_blocks(blocks: &[Block], max_len: usize) -> Vec<Block> {
    let max_len = max_len.max(1) as i64;
    blocks
        .iter()
        .flat_map(|b| {
            (b.start..=b.end)
                .step_by(max_len as usize)
                .map(move |s| Block::new(s, (s + max_len - 1).min(b.end)))
        })
        .collect()
}

/// Dense linear system restricted to candidate columns and informative rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedSystem<E: nalgebra::ComplexField> {
    pub matrix: DMatrix<E>,
    pub rhs: DVector<E>,
    /// Grid bin of each column, ascending.
    pub column_map: Vec<i64>,
    /// `(channel, baseband bin)` of each row.
    pub row_map: Vec<(usize, i64)>,
}

impl<E: nalgebra::ComplexField> ReducedSystem<E> {
    pub fn nrows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.matrix.ncols()
    }

    /// Column positions covered by each block; blocks with no retained
    /// column are dropped.
    pub fn block_columns(&self, blocks: &[Block]) -> Vec<Vec<usize>> {
        blocks
            .iter()
            .map(|b| {
                let lo = self.column_map.partition_point(|&l| l < b.start);
                let hi = self.column_map.partition_point(|&l| l <= b.end);
                (lo..hi).collect::<Vec<_>>()
            })
            .filter(|cols| !cols.is_empty())
            .collect()
    }

    /// Keeps only rows with at least one nonzero entry.
    pub(crate) fn drop_empty_rows(self) -> Self {
        let keep: Vec<usize> = (0..self.matrix.nrows())
            .filter(|&r| self.matrix.row(r).iter().any(|e| !e.is_zero()))
            .collect();
        if keep.len() == self.matrix.nrows() {
            return self;
        }
        let matrix = self.matrix.select_rows(keep.iter());
        let rhs = self.rhs.select_rows(keep.iter());
        let row_map = keep.iter().map(|&r| self.row_map[r]).collect();
        Self {
            matrix,
            rhs,
            column_map: self.column_map,
            row_map,
        }
    }
}

/// Restricts the full system to the bins of `mask`, then drops rows whose
/// baseband bin is inactive (when indicators are given) and rows left
/// without a nonzero entry.
pub fn reduce_system<T: Scalar>(
    full: &FoldingMatrix,
    stacked: &[Complex<T>],
    mask: &SupportMask,
    indicators: Option<&[ChannelIndicator]>,
) -> Result<ReducedSystem<Complex<T>>> {
    if mask.grid() != full.grid() {
        return Err(SmrsError::DimensionMismatch {
            expected: full.grid().len(),
            actual: mask.grid().len(),
            context: "mask vs matrix grid",
        });
    }
    if stacked.len() != full.nrows() {
        return Err(SmrsError::DimensionMismatch {
            expected: full.nrows(),
            actual: stacked.len(),
            context: "stacked samples vs matrix rows",
        });
    }
    if let Some(ind) = indicators {
        if ind.len() != full.channels().len() {
            return Err(SmrsError::DimensionMismatch {
                expected: full.channels().len(),
                actual: ind.len(),
                context: "indicators per channel",
            });
        }
    }
    let column_map: Vec<i64> = mask.bins().collect();
    if column_map.is_empty() {
        return Err(SmrsError::NoSignal);
    }
    let all_rows = full.row_map();
    let keep: Vec<usize> = (0..all_rows.len())
        .filter(|&r| {
            let (i, k) = all_rows[r];
            indicators.is_none_or(|ind| ind[i].is_active(k))
        })
        .collect();
    let row_map: Vec<(usize, i64)> = keep.iter().map(|&r| all_rows[r]).collect();
    let matrix = DMatrix::from_fn(row_map.len(), column_map.len(), |r, c| {
        Complex::new(T::lit(full.entry(row_map[r], column_map[c])), T::zero())
    });
    let rhs = DVector::from_iterator(keep.len(), keep.iter().map(|&r| stacked[r]));
    Ok(ReducedSystem {
        matrix,
        rhs,
        column_map,
        row_map,
    }
    .drop_empty_rows())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{fold_spectrum, SpectrumGrid};

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn toy_signal() -> SpectrumGrid<f64> {
        let mut vals = vec![c(0.0, 0.0); 12];
        vals[1] = c(1.0, 0.5);
        vals[9] = c(-2.0, 0.25);
        SpectrumGrid::new(1.0, GridSpec::complex(12).unwrap(), vals).unwrap()
    }

    #[test]
    fn indicator_is_periodic_extension() {
        let grid = GridSpec::complex(12).unwrap();
        let ch = ChannelConfig::new(4, 1.0).unwrap();
        let mut bb = vec![c(0.0, 0.0); 4];
        bb[1] = c(3.0, 0.0);
        let s = ChannelSamples::new(ch, GridLayout::Complex, bb).unwrap();
        let chi = channel_indicator(&s, &DetectorConfig::default(), grid).unwrap();
        let on: Vec<i64> = grid.indices().filter(|&l| chi[l as usize]).collect();
        assert_eq!(on, vec![1, 5, 9]);

        let zero = ChannelSamples::new(ch, GridLayout::Complex, vec![c(0.0, 0.0); 4]).unwrap();
        assert!(channel_indicator(&zero, &DetectorConfig::default(), grid)
            .unwrap()
            .iter()
            .all(|&b| !b));
    }

    #[test]
    fn noiseless_tolerance_is_relative_to_peak() {
        let ch = ChannelConfig::new(3, 1.0).unwrap();
        let s = ChannelSamples::new(
            ch,
            GridLayout::Complex,
            vec![c(1e6, 0.0), c(1e-7, 0.0), c(0.0, 1e-5)],
        )
        .unwrap();
        let ind = detect_channel(&s, &DetectorConfig::default()).unwrap();
        assert_eq!(ind.active(), &[true, false, true]);
    }

    #[test]
    fn intersect_examples() {
        let grid = GridSpec::complex(6).unwrap();
        let a = vec![true, true, false, false, false, false];
        let b = vec![false, false, true, true, false, false];
        assert!(intersect_indicators(grid, &[a.clone(), b])
            .unwrap()
            .is_empty());
        let single = intersect_indicators(grid, std::slice::from_ref(&a)).unwrap();
        assert_eq!(single.mask(), &a[..]);
        assert_eq!(single.blocks(), &[Block::new(0, 1)]);
    }

    #[test]
    fn three_channel_intersection_contains_support() {
        // enumerate the periodic extensions by hand for support {1, 9} on M=12
        let x = toy_signal();
        let grid = x.grid();
        let per: Vec<Vec<bool>> = [4usize, 6, 5]
            .iter()
            .map(|&m| {
                let ch = ChannelConfig::new(m, 1.0).unwrap();
                let s = fold_spectrum(&x, &ch).unwrap();
                channel_indicator(&s, &DetectorConfig::default(), grid).unwrap()
            })
            .collect();
        let mask = intersect_indicators(grid, &per).unwrap();
        // mod 4: {1,5,9}; mod 6: classes {1,3} -> {1,3,7,9}; mod 5: classes {1,4} -> {1,4,6,9,11}
        let expected: Vec<i64> = (0..12)
            .filter(|l| {
                [1, 5, 9].contains(l) && [1, 3, 7, 9].contains(l) && [1, 4, 6, 9, 11].contains(l)
            })
            .collect();
        assert_eq!(mask.bins().collect::<Vec<_>>(), expected);
        assert_eq!(expected, vec![1, 9]);
    }

    #[test]
    fn widen_examples() {
        let grid = GridSpec::complex(200).unwrap();
        let m = SupportMask::from_bins(grid, 50..90);
        let w = widen_mask(&m, 0.2).unwrap();
        assert_eq!(w.blocks(), &[Block::new(42, 97)]);
        assert_eq!(widen_mask(&m, 0.0).unwrap(), m);

        // two 10-bin blocks two bins apart, widened by round(0.2*10)=2 per side
        let m = SupportMask::from_bins(grid, (10..20).chain(22..32));
        let w = widen_mask(&m, 0.2).unwrap();
        assert_eq!(w.blocks(), &[Block::new(8, 33)]);

        let edge = SupportMask::from_bins(grid, 0..10);
        assert_eq!(
            widen_mask(&edge, 0.5).unwrap().blocks(),
            &[Block::new(0, 14)]
        );
        assert!(widen_mask(&edge, -0.1).is_err());
    }

    #[test]
    fn blocks_split_on_single_gap() {
        let grid = GridSpec::complex(10).unwrap();
        let m = SupportMask::from_bins(grid, [1, 2, 4, 5, 6, 9]);
        assert_eq!(
            m.blocks(),
            &[Block::new(1, 2), Block::new(4, 6), Block::new(9, 9)]
        );
        assert_eq!(
            split_blocks(m.blocks(), 2),
            vec![
                Block::new(1, 2),
                Block::new(4, 5),
                Block::new(6, 6),
                Block::new(9, 9)
            ]
        );
    }

    #[test]
    fn reduce_with_known_support() {
        let x = toy_signal();
        let grid = x.grid();
        let chans = vec![
            ChannelConfig::new(4, 1.0).unwrap(),
            ChannelConfig::new(6, 1.0).unwrap(),
        ];
        let full = FoldingMatrix::new(chans, grid).unwrap();
        let stacked = full.apply(&x).unwrap();
        let mask = SupportMask::from_bins(grid, [1, 9]);
        let sys = reduce_system(&full, &stacked, &mask, None).unwrap();
        assert_eq!(sys.column_map, vec![1, 9]);
        // channel 1 row 1 aliases both; channel 2 rows 1 and 3 see one each
        assert_eq!(sys.row_map, vec![(0, 1), (1, 1), (1, 3)]);
        assert_eq!(sys.matrix[(0, 0)], c(4.0, 0.0));
        assert_eq!(sys.matrix[(0, 1)], c(4.0, 0.0));
        assert_eq!(sys.matrix[(1, 1)], c(0.0, 0.0));
        assert_eq!(sys.rhs[1], x.get(1) * 6.0);
        assert_eq!(sys.rhs[2], x.get(9) * 6.0);
    }

    #[test]
    fn reduce_with_full_mask_keeps_everything_nonempty() {
        let x = toy_signal();
        let grid = x.grid();
        let chans = vec![
            ChannelConfig::new(4, 1.0).unwrap(),
            ChannelConfig::new(6, 1.0).unwrap(),
        ];
        let full = FoldingMatrix::new(chans.clone(), grid).unwrap();
        let stacked = full.apply(&x).unwrap();
        let sys = reduce_system(&full, &stacked, &SupportMask::full(grid), None).unwrap();
        assert_eq!((sys.nrows(), sys.ncols()), (10, 12));

        let inds: Vec<_> = chans
            .iter()
            .map(|ch| {
                detect_channel(&fold_spectrum(&x, ch).unwrap(), &DetectorConfig::default()).unwrap()
            })
            .collect();
        let sys = reduce_system(&full, &stacked, &SupportMask::full(grid), Some(&inds)).unwrap();
        assert_eq!(sys.row_map, vec![(0, 1), (1, 1), (1, 3)]);
        assert_eq!(sys.ncols(), 12);

        let empty = SupportMask::from_bins(grid, []);
        assert_eq!(
            reduce_system(&full, &stacked, &empty, None),
            Err(SmrsError::NoSignal)
        );
    }

    #[test]
    fn cancellation_violates_the_zero_assumption() {
        // X[1] = -X[9] cancels in the mod-4 channel, so its indicator misses
        // the true support and the intersection loses it
        let grid = GridSpec::complex(12).unwrap();
        let mut vals = vec![c(0.0, 0.0); 12];
        vals[1] = c(1.0, 0.0);
        vals[9] = c(-1.0, 0.0);
        let x = SpectrumGrid::new(1.0, grid, vals).unwrap();
        let chans = [
            ChannelConfig::new(4, 1.0).unwrap(),
            ChannelConfig::new(6, 1.0).unwrap(),
        ];
        let per: Vec<_> = chans
            .iter()
            .map(|ch| {
                channel_indicator(
                    &fold_spectrum(&x, ch).unwrap(),
                    &DetectorConfig::default(),
                    grid,
                )
                .unwrap()
            })
            .collect();
        let mask = intersect_indicators(grid, &per).unwrap();
        assert!(!mask.contains(1) && !mask.contains(9));
    }

    #[test]
    fn noisy_detector_matches_direct_thresholding() {
        let ch = ChannelConfig::new(40, 25e6).unwrap();
        let mut bb: Vec<Complex<f64>> = (0..40)
            .map(|k| {
                c(
                    0.05 * ((k * 7 % 5) as f64 - 2.0),
                    0.03 * ((k * 3 % 4) as f64 - 1.5),
                )
            })
            .collect();
        for v in &mut bb[10..18] {
            *v += c(2.0, -1.0);
        }
        let s = ChannelSamples::new(ch, GridLayout::Complex, bb.clone()).unwrap();
        let cfg = DetectorConfig {
            energy_threshold: Some(0.5),
            ..DetectorConfig::noisy()
        };
        let ind = detect_channel(&s, &cfg).unwrap();
        // oracle: 4-bin window starting one bin left of centre, mean energy > 0.5
        let oracle: Vec<bool> = (0..40i64)
            .map(|k| {
                let e: f64 = (k - 1..k + 3)
                    .map(|j| bb[j.rem_euclid(40) as usize].norm_sqr())
                    .sum();
                e / 4.0 > 0.5
            })
            .collect();
        assert_eq!(ind.active(), &oracle[..]);
        let on: Vec<usize> = (0..40).filter(|&k| oracle[k]).collect();
        assert_eq!(on.first(), Some(&8));
        assert_eq!(on.last(), Some(&18));
    }
}

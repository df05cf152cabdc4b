//! Inversion of reduced systems.
//!
//! A full-column-rank system is solved directly in the least-squares sense.
//! Otherwise the solution with the fewest candidate bands is sought greedily:
//! block OMP grows a column set one whole block at a time, always taking the
//! block whose addition leaves the smallest residual.

use approx::AbsDiffEq;
use nalgebra::{ComplexField, DMatrix, DVector, RealField};
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SmrsError};
use crate::linalg::Field;
use crate::support::ReducedSystem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveConfig {
    /// Singular values at or below `rank_tolerance · σ_max` count as zero.
    pub rank_tolerance: f64,
    /// Block OMP stops once `‖r‖² ≤ omp_threshold · ‖b‖²`.
    pub omp_threshold: f64,
    /// Noisy stopping rule: stop before a block that would make the selected
    /// columns rank deficient.
    pub noisy_mode: bool,
    /// Sub-block width in Hz used to cut candidate bands in noisy mode.
    pub subblock_width: f64,
    /// Noisy mode only, off at 0: stop when a block's gain per new column is
    /// below this multiple of the residual energy per remaining degree of
    /// freedom, i.e. when the block explains no more than noise would.
    pub significance: f64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        Self {
            rank_tolerance: 1e-10,
            omp_threshold: 1e-20,
            noisy_mode: false,
            subblock_width: 100e6,
            significance: 0.0,
        }
    }
}

impl SolveConfig {
    /// Settings tuned for noisy inputs: sub-block candidates, the rank stop
    /// rule and a noise-significance test.
    pub fn noisy() -> Self {
        Self {
            omp_threshold: 0.005,
            noisy_mode: true,
            significance: 4.0,
            ..Self::default()
        }
    }

    pub fn validate(&self, delta_f: f64) -> Result<()> {
        if !(self.rank_tolerance > 0.0 && self.rank_tolerance < 1.0) {
            return Err(SmrsError::InvalidConfig(
                "rank_tolerance must lie in (0, 1)".into(),
            ));
        }
        if !(self.omp_threshold >= 0.0) {
            return Err(SmrsError::InvalidConfig("omp_threshold must be ≥ 0".into()));
        }
        if !(self.significance >= 0.0) {
            return Err(SmrsError::InvalidConfig("significance must be ≥ 0".into()));
        }
        if self.noisy_mode && !(self.subblock_width >= delta_f * (1.0 - 1e-9)) {
            return Err(SmrsError::InvalidConfig(format!(
                "subblock_width {} Hz must be at least the frequency step {delta_f} Hz",
                self.subblock_width
            )));
        }
        Ok(())
    }

    /// Sub-block length in bins at resolution `delta_f`.
    pub fn subblock_bins(&self, delta_f: f64) -> usize {
        ((self.subblock_width / delta_f).round() as usize).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Posedness {
    WellPosed,
    IllPosed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome<E: ComplexField> {
    /// One coefficient per column of the system; unselected columns are zero.
    pub solution: DVector<E>,
    pub posedness: Posedness,
    /// Indices into the block list, in selection order (empty for a direct
    /// solve). Picks dropped after an exact but rank-deficient fit are left
    /// out.
    pub selected_blocks: Vec<usize>,
    pub residual_norm: E::RealField,
    /// `σ_max / σ_min` of the matrix actually solved; infinite when it is
    /// rank deficient.
    pub condition_number: E::RealField,
    /// Greedy selection steps taken.
    pub iterations: usize,
    /// Residual norm before the first and after every accepted block.
    pub residual_history: Vec<E::RealField>,
    /// False when block OMP ran out of useful blocks without meeting its
    /// stopping rule.
    pub converged: bool,
}

struct LeastSquares<E: ComplexField> {
    x: DVector<E>,
    residual: E::RealField,
    rank: usize,
}

fn real_lit<R: RealField>(v: f64) -> R {
    nalgebra::convert(v)
}

fn singular_values<E: Field>(a: &DMatrix<E>) -> Result<DVector<E::RealField>> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Ok(DVector::zeros(0));
    }
    E::singular_values(a)
}

fn numerical_rank<E: ComplexField>(sv: &DVector<E::RealField>, rank_tol: f64) -> usize {
    let smax = sv
        .iter()
        .cloned()
        .fold(E::RealField::zero(), |a, b| a.max(b));
    if smax <= E::RealField::zero() {
        return 0;
    }
    let cut = smax * real_lit::<E::RealField>(rank_tol);
    sv.iter().filter(|&s| *s > cut).count()
}

/// Minimum-norm least squares via SVD, with singular values at or below
/// `rank_tol · σ_max` truncated.
fn least_squares<E: Field>(
    a: &DMatrix<E>,
    b: &DVector<E>,
    rank_tol: f64,
) -> Result<LeastSquares<E>> {
    let n = a.ncols();
    let empty = || LeastSquares {
        x: DVector::zeros(n),
        residual: b.norm(),
        rank: 0,
    };
    if n == 0 || a.nrows() == 0 {
        return Ok(empty());
    }
    let svd = E::thin_svd(a)?;
    let rank = numerical_rank::<E>(&svd.s, rank_tol);
    if rank == 0 {
        return Ok(empty());
    }
    // x = V_r · diag(1/s_r) · U_rᴴ b
    let mut coeffs = svd.u.columns(0, rank).ad_mul(b);
    for (c, s) in coeffs.iter_mut().zip(svd.s.iter()) {
        *c = c.unscale(s.clone());
    }
    let x = svd.v.columns(0, rank) * coeffs;
    let residual = (b - a * &x).norm();
    Ok(LeastSquares { x, residual, rank })
}

fn condition_of<E: Field>(a: &DMatrix<E>) -> Result<E::RealField> {
    let inf = real_lit::<E::RealField>(f64::INFINITY);
    if a.ncols() == 0 || a.nrows() < a.ncols() {
        return Ok(inf);
    }
    let sv = singular_values(a)?;
    let smax = sv
        .iter()
        .cloned()
        .fold(E::RealField::zero(), |a, b| a.max(b));
    let smin = sv.iter().cloned().fold(smax.clone(), |a, b| a.min(b));
    let floor = smax.clone()
        * E::RealField::default_epsilon()
        * real_lit::<E::RealField>(a.nrows().max(a.ncols()) as f64);
    Ok(if smin <= floor { inf } else { smax / smin })
}

/// `σ_max / σ_min` of the system matrix; `+∞` when rank deficient.
pub fn condition_number<E: Field>(system: &ReducedSystem<E>) -> Result<E::RealField> {
    condition_of(&system.matrix)
}

/// Well posed iff the numerical rank equals the column count.
pub fn classify_posedness<E: Field>(
    system: &ReducedSystem<E>,
    cfg: &SolveConfig,
) -> Result<Posedness> {
    let n = system.ncols();
    if n == 0 || system.nrows() < n {
        return Ok(Posedness::IllPosed);
    }
    Ok(
        if numerical_rank::<E>(&singular_values(&system.matrix)?, cfg.rank_tolerance) == n {
            Posedness::WellPosed
        } else {
            Posedness::IllPosed
        },
    )
}

/// Pseudo-inverse solution over all columns.
pub fn solve_direct<E: Field>(
    system: &ReducedSystem<E>,
    cfg: &SolveConfig,
) -> Result<SolveOutcome<E>> {
    if system.ncols() == 0 {
        return Err(SmrsError::Degenerate("system has no columns"));
    }
    let ls = least_squares(&system.matrix, &system.rhs, cfg.rank_tolerance)?;
    let posedness = if ls.rank == system.ncols() {
        Posedness::WellPosed
    } else {
        Posedness::IllPosed
    };
    Ok(SolveOutcome {
        solution: ls.x,
        posedness,
        selected_blocks: Vec::new(),
        residual_norm: ls.residual.clone(),
        condition_number: condition_of(&system.matrix)?,
        iterations: 0,
        residual_history: vec![system.rhs.norm(), ls.residual],
        converged: true,
    })
}

/// Orthonormal basis of the numerical column space of `a`.
fn range_basis<E: Field>(a: &DMatrix<E>, rank_tol: f64) -> Result<DMatrix<E>> {
    if a.ncols() == 0 {
        return Ok(DMatrix::zeros(a.nrows(), 0));
    }
    let svd = E::thin_svd(a)?;
    let rank = numerical_rank::<E>(&svd.s, rank_tol);
    Ok(svd.u.columns(0, rank).into_owned())
}

/// Effect of appending `block` to columns spanned by `basis`: the drop in
/// residual energy and whether the merged columns keep full rank.
struct Gain<R> {
    energy: R,
    rank: usize,
    full_rank: bool,
}

fn block_gain<E: Field>(
    basis: &DMatrix<E>,
    scale: E::RealField,
    block: &DMatrix<E>,
    residual: &DVector<E>,
    rank_tol: f64,
) -> Result<Gain<E::RealField>> {
    let orth = block - basis * basis.ad_mul(block);
    let svd = E::thin_svd(&orth)?;
    let scale = scale.max(block.norm());
    let cut = scale * real_lit::<E::RealField>(rank_tol);
    let rank = svd.s.iter().filter(|s| **s > cut).count();
    let energy = svd.u.columns(0, rank).ad_mul(residual).norm_squared();
    Ok(Gain {
        energy,
        rank,
        full_rank: rank == block.ncols(),
    })
}

fn union_columns(blocks: &[Vec<usize>], chosen: &[usize]) -> Vec<usize> {
    let mut cols: Vec<usize> = chosen
        .iter()
        .flat_map(|&j| blocks[j].iter().copied())
        .collect();
    cols.sort_unstable();
    cols.dedup();
    cols
}

/// Block orthogonal matching pursuit.
///
/// `blocks` holds column positions of the system, one entry per candidate
/// band, ordered by position; ties in residual go to the lower index.
///
/// Candidates are scored by projecting each block off the span of the
/// selected columns, so one iteration costs one small SVD per block rather
/// than a least-squares solve over the whole selection.
pub fn block_omp<E: Field>(
    system: &ReducedSystem<E>,
    blocks: &[Vec<usize>],
    cfg: &SolveConfig,
) -> Result<SolveOutcome<E>> {
    if blocks.is_empty() {
        return Err(SmrsError::Degenerate("no candidate blocks"));
    }
    if let Some(bad) = blocks.iter().flatten().find(|&&c| c >= system.ncols()) {
        return Err(SmrsError::InvalidConfig(format!(
            "block column {bad} out of range"
        )));
    }
    let a = &system.matrix;
    let b = &system.rhs;
    let b_energy = b.norm_squared();
    let stop = real_lit::<E::RealField>(cfg.omp_threshold) * b_energy.clone();
    // gains closer than this count as equal, so ties resolve by index
    let tie = b_energy.clone() * E::RealField::default_epsilon() * real_lit::<E::RealField>(64.0);

    let mut selected_blocks = Vec::new();
    let mut columns: Vec<usize> = Vec::new();
    let mut basis = DMatrix::<E>::zeros(a.nrows(), 0);
    let mut scale = E::RealField::zero();
    let mut residual = b.clone();
    let mut history = vec![b.norm()];
    let mut remaining: Vec<usize> = (0..blocks.len()).collect();
    let mut converged = b_energy <= stop;

    while !converged && !remaining.is_empty() {
        let mut best: Option<(usize, Gain<E::RealField>)> = None;
        for (slot, &j) in remaining.iter().enumerate() {
            let fresh: Vec<usize> = blocks[j]
                .iter()
                .copied()
                .filter(|c| !columns.contains(c))
                .collect();
            let gain = if fresh.is_empty() {
                Gain {
                    energy: E::RealField::zero(),
                    rank: 0,
                    full_rank: true,
                }
            } else {
                block_gain(
                    &basis,
                    scale.clone(),
                    &a.select_columns(fresh.iter()),
                    &residual,
                    cfg.rank_tolerance,
                )?
            };
            if best
                .as_ref()
                .is_none_or(|(_, cur)| gain.energy > cur.energy.clone() + tie.clone())
            {
                best = Some((slot, gain));
            }
        }
        let (slot, gain) = best.expect("remaining is non-empty");
        if gain.energy <= tie {
            // nothing lowers the residual any further
            converged = cfg.noisy_mode && !selected_blocks.is_empty();
            break;
        }
        if cfg.noisy_mode && !gain.full_rank {
            converged = !selected_blocks.is_empty();
            break;
        }
        if cfg.noisy_mode && cfg.significance > 0.0 && !selected_blocks.is_empty() {
            let dof = a.nrows().saturating_sub(basis.ncols() + gain.rank).max(1);
            let left = residual.norm_squared() - gain.energy.clone();
            let per_dof = left / real_lit::<E::RealField>(dof as f64);
            let needed = per_dof * real_lit::<E::RealField>(cfg.significance * gain.rank as f64);
            if gain.energy <= needed {
                converged = true;
                break;
            }
        }
        let j = remaining.remove(slot);
        columns.extend_from_slice(&blocks[j]);
        columns.sort_unstable();
        columns.dedup();
        selected_blocks.push(j);
        let sub = a.select_columns(columns.iter());
        scale = sub.norm();
        basis = range_basis(&sub, cfg.rank_tolerance)?;
        residual = b - &basis * basis.ad_mul(b);
        let energy = residual.norm_squared();
        history.push(energy.clone().sqrt());
        if energy <= stop {
            converged = true;
        }
    }
    if cfg.noisy_mode && remaining.is_empty() && !selected_blocks.is_empty() {
        converged = true;
    }

    let iterations = selected_blocks.len();
    let mut ls = least_squares(&a.select_columns(columns.iter()), b, cfg.rank_tolerance)?;
    // An exact fit on rank-deficient columns means some pick lies in the span
    // of later ones, and the minimum-norm solution smears energy onto it.
    // Drop every block the fit does not need, earliest picks first.
    if converged && !cfg.noisy_mode && ls.rank < columns.len() {
        let mut i = 0;
        while i < selected_blocks.len() && ls.rank < columns.len() {
            let mut fewer = selected_blocks.clone();
            fewer.remove(i);
            let cols = union_columns(blocks, &fewer);
            let fit = least_squares(&a.select_columns(cols.iter()), b, cfg.rank_tolerance)?;
            if fit.residual.clone() * fit.residual.clone() <= stop {
                selected_blocks = fewer;
                columns = cols;
                ls = fit;
            } else {
                i += 1;
            }
        }
    }

    let sub = a.select_columns(columns.iter());
    let mut solution = DVector::zeros(system.ncols());
    for (pos, &c) in columns.iter().enumerate() {
        solution[c] = ls.x[pos];
    }
    Ok(SolveOutcome {
        solution,
        posedness: Posedness::IllPosed,
        iterations,
        selected_blocks,
        residual_norm: ls.residual,
        condition_number: condition_of(&sub)?,
        residual_history: history,
        converged,
    })
}

/// Direct solve when well posed, block OMP otherwise. The outcome's
/// `posedness` always reports the classification of the whole system.
pub fn reconstruct_system<E: Field>(
    system: &ReducedSystem<E>,
    blocks: &[Vec<usize>],
    cfg: &SolveConfig,
) -> Result<SolveOutcome<E>> {
    if system.ncols() == 0 {
        return Err(SmrsError::Degenerate("system has no columns"));
    }
    match classify_posedness(system, cfg)? {
        Posedness::WellPosed => solve_direct(system, cfg),
        Posedness::IllPosed => {
            let mut out = block_omp(system, blocks, cfg)?;
            out.posedness = Posedness::IllPosed;
            Ok(out)
        }
    }
}

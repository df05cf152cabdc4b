//! Reconstruction of sparse multiband spectra from synchronized multirate
//! samples.
//!
//! A signal spectrum on a uniform grid of step `delta_f` is observed through
//! a handful of channels, each folding the whole spectrum onto a baseband of
//! `M_i` bins. The channels together give a linear system whose unknowns are
//! the grid bins. This crate builds that system ([`spectral`]), narrows it to
//! the bins that can carry signal ([`support`]), inverts it with a direct
//! least-squares solve or a block-greedy pursuit ([`solver`]), and handles
//! real-valued signals through split real/imaginary systems ([`realvalued`]).
//! [`pipeline`] strings those stages together.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases at the crate root fix the scalar to `f64`.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod linalg;
pub mod pipeline;
pub mod realvalued;
pub mod scalar;
pub mod solver;
pub mod spectral;
pub mod support;

pub use error::{Result, SmrsError};
pub use linalg::Field;
pub use nalgebra::Complex;
pub use pipeline::{reconstruct, reconstruct_on_mask, ReconstructionReport};
pub use realvalued::{build_real_split, solve_real, RealSolution, RealSplitSystem};
pub use scalar::Scalar;
pub use solver::{
    block_omp, classify_posedness, condition_number, reconstruct_system, solve_direct, Posedness,
    SolveConfig, SolveOutcome,
};
pub use spectral::{
    build_channel_matrix, check_unique_columns, concatenate_system, fold_spectrum, ChannelConfig,
    ChannelSamples, FoldingMatrix, GridLayout, GridSpec, SpectrumGrid, UniquenessVerdict,
};
pub use support::{
    channel_indicator, detect_channel, intersect_indicators, reduce_system, split_blocks,
    widen_mask, Block, ChannelIndicator, DetectionMode, DetectorConfig, ReducedSystem, SupportMask,
};

pub type SpectrumGrid64 = SpectrumGrid<f64>;
pub type SpectrumGrid32 = SpectrumGrid<f32>;
pub type ChannelSamples64 = ChannelSamples<f64>;
pub type ChannelSamples32 = ChannelSamples<f32>;
pub type ReducedSystem64 = ReducedSystem<Complex<f64>>;
pub type RealSplitSystem64 = RealSplitSystem<f64>;
pub type RealSolution64 = RealSolution<f64>;
pub type ReconstructionReport64 = ReconstructionReport<f64>;
pub type Complex64 = Complex<f64>;

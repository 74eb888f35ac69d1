//! Variable-size symmetry-based graph Fourier transforms (SBGFTs) for block
//! transform coding.
//!
//! The crate builds symmetric graphs on N×N grids, eigendecomposes their
//! Laplacians into orthonormal transform bases with butterfly-accelerated
//! forward/inverse paths, and drives a rate-distortion-optimized multi-
//! transform block codec together with the evaluation ladder (configurations
//! A through F and the reduced-candidate F_C variant).
//!
//! Modules follow the processing pipeline:
//!
//! * [`grid`] — grid graphs, reflection axes, symmetry-based graph builders
//! * [`gft`] — eigendecomposition, canonical bases, fast transform plans
//! * [`symmetry`] — supports, mirroring, symmetry ratios, residual histograms
//! * [`bank`] — candidate transform banks (SBGFTs and sinusoidal separables)
//! * [`codec`] — quantization, rate estimation, RDOT selection, entropy coding
//! * [`partition`] — quad-tree partitioning and the simplified intra predictor
//! * [`subsets`] — prediction-mode-conditioned top-C transform subsets
//! * [`eval`] — PSNR, BD-rate, and the configuration experiment runner
//! * [`image`] — grayscale images and PGM I/O
//! * [`stream`] — the coded-stream container

pub mod arith;
pub mod bank;
pub mod codec;
pub mod eval;
pub mod gft;
pub mod grid;
pub mod image;
pub mod partition;
pub mod stream;
pub mod subsets;
pub mod symmetry;

mod error;

pub use error::{Error, Result};
pub use grid::{Direction, GridGraph, NodeId, ReflectionAxis};

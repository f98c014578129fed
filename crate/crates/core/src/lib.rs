//! Exact experiments on random integer matrices.
//!
//! The crate is split along the lines of the experiments it supports:
//!
//! * [`exact_linalg`]: fraction-free determinants, exact rank and rational kernels.
//! * [`sampling`]: reproducible entry distributions and matrix samplers.
//! * [`singularity_lab`]: Monte Carlo and exhaustive estimates of `Pr[det M = 0]`.
//! * [`mds_forge`]: verification and random generation of integer MDS matrices.
//! * [`vector_geometry`]: compressibility, LCD scans and spectral-norm probes.
//! * [`charfunc`]: the Dirichlet-kernel characteristic function and small-ball probes.
//!
//! Everything is deterministic given a [`sampling::Seed`]; parallel work is
//! split into fixed shards so the thread count never changes a result.

pub mod charfunc;
pub mod error;
pub mod exact_linalg;
pub mod mc;
pub mod mds_forge;
pub mod sampling;
pub mod singularity_lab;
pub mod vector_geometry;

pub use error::{Error, Result};
pub use exact_linalg::{IntMatrix, RationalVector};
pub use sampling::{EntryDistribution, Seed};
pub use vector_geometry::{LcdParams, RealVector};

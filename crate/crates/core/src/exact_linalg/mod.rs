//! Exact integer and rational linear algebra.

mod det;
mod kernel;
mod matrix;
pub(crate) mod modp;

pub use det::{det, det_i64, is_singular, is_singular_i64, small_path_ok};
pub use kernel::{kernel_basis, rank, RationalVector};
pub use matrix::IntMatrix;

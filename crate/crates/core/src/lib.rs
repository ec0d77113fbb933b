//! Best subspace approximation of dense real 3-tensors.
//!
//! Given a tensor `T` of shape `m1 x m2 x m3` and target dimensions `(p, q, r)`,
//! the best subspace approximation looks for subspaces `X`, `Y`, `Z` of
//! dimensions `p`, `q`, `r` that minimize the Hilbert-Schmidt distance from `T`
//! to `X ⊗ Y ⊗ Z`, or equivalently maximize the squared norm of the orthogonal
//! projection of `T` onto that subspace. The crate provides:
//!
//! - [`tensor`]: dense storage, unfoldings, mode products, inner products and
//!   multilinear ranks.
//! - [`subspace`]: orthonormal frames, coefficient tensors, projections and
//!   distances.
//! - [`bsta`]: HOSVD initialization, the alternating SVD relaxation, and a
//!   critical-point certificate.
//! - [`flrta`]: a fast Tucker approximation assembled from sampled sections
//!   and cross (pseudoinverse) approximations, plus least-squares core fits.
//!
//! The crate is `no_std` and only needs an allocator.
//!
//! ```
//! use tapprox_core::{bsta::{bsta_solve, BstaOptions}, DenseTensor3};
//!
//! let t = DenseTensor3::from_fn([3, 3, 2], |i, j, k| (i + 2 * j + k) as f64);
//! let result = bsta_solve(&t, &BstaOptions::new([1, 1, 1])).unwrap();
//! assert!(result.approx_error <= t.hs_norm());
//! ```
#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod bsta;
mod error;
pub mod flrta;
pub mod linalg;
mod matrix;
pub mod subspace;
pub mod tensor;

pub use error::{Error, Result};
pub use matrix::Matrix;
pub use subspace::{Subspace, SubspaceTriple};
pub use tensor::DenseTensor3;

#[cfg(test)]
pub(crate) mod testutil;

//! Explicit block encoding of periodic Difference-of-Gaussian (DoG) operators.
//!
//! The DoG stencil `A_h = Σ_t (p_t − q_t) S_t` is a signed combination of
//! cyclic shifts weighted by two normalized discrete Gaussians. Because both
//! weight vectors are probability distributions, the operator can be encoded
//! as a linear combination of unitaries with subnormalization `λ = 2`: one
//! indicator qubit selects the `p` or `q` branch, a Pauli-Z on that qubit
//! turns the sum into a difference, and a shift register controls the data
//! shifts.
//!
//! Modules:
//!
//! - [`grid`]: periodic grid indexing and cyclic shift permutations.
//! - [`kernel`]: stencils, normalized Gaussian weights and DoG coefficients.
//! - [`operator`]: dense assembly of `A_h`.
//! - [`spectral`]: Fourier diagonalization and the transfer function `μ(ω)`.
//! - [`circuit`]: PREPARE / SELECT / `U` synthesis, block extraction and
//!   post-selection.
//! - [`analysis`]: exact, bounded and asymptotic success probabilities.

pub mod analysis;
pub mod circuit;
pub mod csv;
pub mod error;
pub mod grid;
pub mod kernel;
pub mod linalg;
pub mod operator;
pub mod spectral;

pub use error::{Error, Result};
pub use grid::{GridSpec, MultiIndex};
pub use kernel::{KernelPair, Stencil, StencilShape};
pub use linalg::{DenseOperator, StateVector};
pub use spectral::TransferFunction;

/// Subnormalization of the LCU encoding; independent of grid, dimension and stencil.
pub const SUBNORMALIZATION: f64 = 2.0;

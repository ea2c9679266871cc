//! Gaussian loaders `G_π` with `G_π |0⟩ = Σ_t √π_t |t⟩`.
//!
//! Any unitary with the right first column satisfies the encoding identity,
//! so loaders are realized as a single real Householder reflection.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{domain, Result};
use crate::linalg::{DenseOperator, StateVector};

/// Tolerance on `‖amplitudes‖₂ = 1`.
pub const AMPLITUDE_NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LoaderUnitary {
    shift_qubits: u32,
    matrix: DenseOperator,
}

impl LoaderUnitary {
    /// Wraps an arbitrary unitary on `s` qubits, rejecting matrices whose
    /// unitarity residual exceeds `tol`.
    pub fn from_unitary(matrix: DenseOperator, tol: f64) -> Result<Self> {
        let dim = matrix.dim();
        if !dim.is_power_of_two() {
            return domain(format!("loader dimension {dim} is not a power of two"));
        }
        let residual = matrix.unitarity_residual();
        if residual > tol {
            return domain(format!("loader is not unitary (residual {residual:e})"));
        }
        Ok(Self { shift_qubits: dim.trailing_zeros(), matrix })
    }

    /// Loader for a probability vector over the stencil: amplitudes `√w`
    /// padded with zeros to `2^s` entries.
    pub fn for_weights(weights: &[f64], shift_qubits: u32) -> Result<Self> {
        let dim = 1usize << shift_qubits;
        if weights.len() > dim {
            return domain(format!("{} weights do not fit {shift_qubits} shift qubits", weights.len()));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return domain("weights must be finite and nonnegative");
        }
        let mut amplitudes: Vec<f64> = weights.iter().map(|w| w.sqrt()).collect();
        amplitudes.resize(dim, 0.0);
        loader_unitary(&amplitudes, shift_qubits)
    }

    pub fn shift_qubits(&self) -> u32 {
        self.shift_qubits
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    pub fn matrix(&self) -> &DenseOperator {
        &self.matrix
    }

    /// `G|0⟩`.
    pub fn first_column(&self) -> StateVector {
        self.matrix.as_matrix().column(0).into_owned()
    }
}

/// Householder completion of a real unit vector into an orthogonal matrix
/// whose first column is `amplitudes`.
pub fn loader_unitary(amplitudes: &[f64], shift_qubits: u32) -> Result<LoaderUnitary> {
    let dim = 1usize << shift_qubits;
    if amplitudes.len() != dim {
        return domain(format!("expected {dim} amplitudes, got {}", amplitudes.len()));
    }
    if amplitudes.iter().any(|a| !a.is_finite() || *a < 0.0) {
        return domain("amplitudes must be finite and nonnegative");
    }
    let norm_sq: f64 = amplitudes.iter().map(|a| a * a).sum();
    if (norm_sq - 1.0).abs() > AMPLITUDE_NORM_TOL {
        return domain(format!("amplitudes have squared norm {norm_sq}, expected 1"));
    }

    // reflect across w = (a − e₀)/‖a − e₀‖, so that (I − 2wwᵀ)e₀ = a
    let mut w = amplitudes.to_vec();
    w[0] -= 1.0;
    let len = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    let matrix = if len == 0.0 {
        DenseOperator::identity(dim)
    } else {
        w.iter_mut().for_each(|x| *x /= len);
        DenseOperator::from_real_fn(dim, |r, c| {
            let delta = if r == c { 1.0 } else { 0.0 };
            delta - 2.0 * w[r] * w[c]
        })
    };
    Ok(LoaderUnitary { shift_qubits, matrix })
}

/// `G·e^{i·magnitude·H}` for a random Hermitian `H` with `‖H‖ = 1`, so that
/// `‖(G̃ − G)|0⟩‖ ≤ magnitude`.
pub fn perturb_loader<R: Rng + ?Sized>(loader: &LoaderUnitary, magnitude: f64, rng: &mut R) -> LoaderUnitary {
    let dim = loader.dim();
    let mut sample = || Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal));
    let x = DMatrix::from_fn(dim, dim, |_, _| sample());
    let mut h = (&x + x.adjoint()) * Complex64::new(0.5, 0.0);
    let norm = h.singular_values().max();
    if norm > 0.0 {
        h /= Complex64::new(norm, 0.0);
    }
    let eig = SymmetricEigen::new(h);
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, magnitude * l)));
    let v = &eig.eigenvectors * phases * eig.eigenvectors.adjoint();
    LoaderUnitary {
        shift_qubits: loader.shift_qubits,
        matrix: DenseOperator::from_matrix(loader.matrix.as_matrix() * v),
    }
}

//! Dense assembly of the periodic DoG operator `A_h = Σ_t c_t S_t`.

use std::io::Write;

use log::warn;
use num_complex::Complex64;

use crate::csv::{fmt_float, write_header, write_record};
use crate::error::{domain, Error, Result};
use crate::grid::{shift_permutation, GridSpec};
use crate::kernel::{KernelPair, Stencil};
use crate::linalg::{DenseOperator, StateVector};

/// Largest data-space dimension assembled densely by [`assemble_dog`].
pub const MAX_DENSE_DIM: usize = 4096;

/// Default tolerance for [`is_hermitian`].
pub const HERMITIAN_TOL: f64 = 1e-12;

pub(crate) fn check_compatible(stencil: &Stencil, g: &GridSpec) -> Result<()> {
    if stencil.dim() != g.dim() {
        return domain(format!(
            "stencil dimension {} does not match grid dimension {}",
            stencil.dim(),
            g.dim()
        ));
    }
    if let Some(t) = stencil.offsets().iter().find(|t| g.aliases(t)) {
        warn!(
            "offset {t:?} reaches half the grid (N = {}); periodic wrap-around aliases stencil taps",
            g.points_per_axis()
        );
    }
    Ok(())
}

/// `A_h` for the kernel pair on grid `g`, capped at [`MAX_DENSE_DIM`].
pub fn assemble_dog(kp: &KernelPair, g: &GridSpec) -> Result<DenseOperator> {
    assemble_with_coefficients(kp.stencil(), kp.coefficients(), g, MAX_DENSE_DIM)
}

/// `Σ_t c_t S_t` for arbitrary (possibly asymmetric) coefficients.
pub fn assemble_with_coefficients(
    stencil: &Stencil,
    coefficients: &[f64],
    g: &GridSpec,
    cap: usize,
) -> Result<DenseOperator> {
    check_compatible(stencil, g)?;
    if coefficients.len() != stencil.len() {
        return domain("coefficient count does not match the stencil");
    }
    if g.len() > cap {
        return Err(Error::Resource { dim: g.len(), cap });
    }
    let mut a = DenseOperator::zeros(g.len());
    for (t, &c) in stencil.offsets().iter().zip(coefficients) {
        for (col, row) in shift_permutation(t, g).into_iter().enumerate() {
            a[(row, col)] += Complex64::new(c, 0.0);
        }
    }
    Ok(a)
}

/// `A_h v` by direct stencil application, `O(|T| N^D)`.
pub fn apply_dog(kp: &KernelPair, g: &GridSpec, v: &[Complex64]) -> Result<StateVector> {
    check_compatible(kp.stencil(), g)?;
    if v.len() != g.len() {
        return domain(format!("vector has length {}, grid has {} points", v.len(), g.len()));
    }
    let mut out = StateVector::zeros(g.len());
    for (t, &c) in kp.stencil().offsets().iter().zip(kp.coefficients()) {
        for (j, target) in shift_permutation(t, g).into_iter().enumerate() {
            out[target] += v[j] * c;
        }
    }
    Ok(out)
}

pub fn is_hermitian(a: &DenseOperator, tol: f64) -> bool {
    a.hermiticity_residual() <= tol
}

/// Row-major dump: one line per matrix row, columns `re0,im0,re1,im1,...`.
pub fn write_operator_csv<W: Write>(a: &DenseOperator, out: &mut W) -> Result<()> {
    let header: Vec<String> = (0..a.dim()).flat_map(|k| [format!("re{k}"), format!("im{k}")]).collect();
    write_header(out, &header)?;
    for r in 0..a.dim() {
        let row: Vec<String> = (0..a.dim())
            .flat_map(|c| [fmt_float(a[(r, c)].re), fmt_float(a[(r, c)].im)])
            .collect();
        write_record(out, &row)?;
    }
    Ok(())
}

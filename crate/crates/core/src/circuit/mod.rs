//! Register-level synthesis of the block-encoding unitary
//!
//! ```text
//! U = (P† ⊗ I_data) · SEL · (Z_ind ⊗ I ⊗ I) · (P ⊗ I_data)
//! P = (|0⟩⟨0| ⊗ G_p + |1⟩⟨1| ⊗ G_q)(H ⊗ I)
//! SEL = Σ_t I ⊗ |t⟩⟨t| ⊗ S_t
//! ```
//!
//! Registers are ordered indicator ⊗ shift ⊗ data with the indicator most
//! significant, so `(⟨0,0| ⊗ I) U (|0,0⟩ ⊗ I)` is literally the leading
//! `N^D × N^D` block of `U`, and equals `A_h / 2`.
//!
//! Two realizations are provided: dense matrices ([`prepare_unitary`],
//! [`select_unitary`], [`block_encoding_unitary`]) for small registers, and
//! [`BlockEncoding`], which applies the same factors to state vectors
//! without materializing `U`.

mod loader;
mod resources;

pub use loader::{loader_unitary, perturb_loader, LoaderUnitary, AMPLITUDE_NORM_TOL};
pub use resources::{resource_estimate, LoaderMode, ResourceReport};

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{domain, Error, Result};
use crate::grid::{shift_permutation, GridSpec};
use crate::kernel::{KernelPair, Stencil};
use crate::linalg::{squared_norm, DenseOperator, StateVector, C_ONE};
use crate::operator::check_compatible;
use crate::spectral::circulant_spectral_norm;

/// Largest full-space dimension for which dense `SEL` and `U` are built.
pub const DENSE_CIRCUIT_CAP: usize = 4096;

/// Success probabilities at or below this are reported as failed post-selection.
pub const POSTSELECT_FLOOR: f64 = 1e-14;

/// Qubit partition `indicator (1) ⊗ shift (s) ⊗ data (D·n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisterLayout {
    shift_qubits: u32,
    grid: GridSpec,
}

impl RegisterLayout {
    /// Layout for a stencil of `stencil_len` offsets: `s = ⌈log₂|T|⌉`.
    pub fn new(stencil_len: usize, grid: GridSpec) -> Result<Self> {
        if stencil_len == 0 {
            return domain("stencil must contain at least one offset");
        }
        let shift_qubits = stencil_len.next_power_of_two().trailing_zeros();
        let total_bits = 1 + shift_qubits + grid.data_qubits();
        if total_bits >= usize::BITS {
            return domain(format!("{total_bits} qubits are not addressable"));
        }
        Ok(Self { shift_qubits, grid })
    }

    pub fn for_stencil(stencil: &Stencil, grid: GridSpec) -> Result<Self> {
        Self::new(stencil.len(), grid)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn shift_qubits(&self) -> u32 {
        self.shift_qubits
    }

    /// `a = s + 1`.
    pub fn ancilla_qubits(&self) -> u32 {
        self.shift_qubits + 1
    }

    pub fn data_qubits(&self) -> u32 {
        self.grid.data_qubits()
    }

    pub fn shift_dim(&self) -> usize {
        1 << self.shift_qubits
    }

    pub fn ancilla_dim(&self) -> usize {
        2 << self.shift_qubits
    }

    pub fn data_dim(&self) -> usize {
        self.grid.len()
    }

    /// `2^{1+s} · N^D`.
    pub fn total_dim(&self) -> usize {
        self.ancilla_dim() * self.data_dim()
    }

    /// `((ind·2^s) + label)·N^D + data`.
    pub fn index(&self, indicator: usize, label: usize, data: usize) -> usize {
        debug_assert!(indicator < 2 && label < self.shift_dim() && data < self.data_dim());
        ((indicator << self.shift_qubits) + label) * self.data_dim() + data
    }

    /// Inverse of [`RegisterLayout::index`].
    pub fn split(&self, index: usize) -> (usize, usize, usize) {
        let data = index % self.data_dim();
        let ancilla = index / self.data_dim();
        (ancilla >> self.shift_qubits, ancilla & (self.shift_dim() - 1), data)
    }
}

/// Bijection between stencil positions and shift-register basis states.
///
/// Position `i` in stencil order is label `i`; labels `|T|..2^s` are padding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShiftLabels {
    used: usize,
    shift_qubits: u32,
}

impl ShiftLabels {
    pub fn len(&self) -> usize {
        1 << self.shift_qubits
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn used(&self) -> usize {
        self.used
    }

    pub fn shift_qubits(&self) -> u32 {
        self.shift_qubits
    }

    pub fn label_of(&self, position: usize) -> Option<usize> {
        (position < self.used).then_some(position)
    }

    pub fn position_of(&self, label: usize) -> Option<usize> {
        (label < self.used).then_some(label)
    }

    pub fn is_padding(&self, label: usize) -> bool {
        label >= self.used && label < self.len()
    }
}

pub fn shift_label_map(stencil: &Stencil) -> ShiftLabels {
    ShiftLabels {
        used: stencil.len(),
        shift_qubits: stencil.len().next_power_of_two().trailing_zeros(),
    }
}

/// `P = (|0⟩⟨0| ⊗ G_p + |1⟩⟨1| ⊗ G_q)(H ⊗ I)` on indicator ⊗ shift.
pub fn prepare_unitary(gp: &LoaderUnitary, gq: &LoaderUnitary) -> Result<DenseOperator> {
    if gp.dim() != gq.dim() {
        return domain(format!("loader sizes differ ({} vs {})", gp.dim(), gq.dim()));
    }
    let m = gp.dim();
    let mut controlled = DMatrix::zeros(2 * m, 2 * m);
    controlled.view_mut((0, 0), (m, m)).copy_from(gp.matrix().as_matrix());
    controlled.view_mut((m, m), (m, m)).copy_from(gq.matrix().as_matrix());
    let hadamard = DenseOperator::from_real_fn(2, |r, c| {
        if r == 1 && c == 1 {
            -FRAC_1_SQRT_2
        } else {
            FRAC_1_SQRT_2
        }
    });
    let h_on_indicator = hadamard.kron(&DenseOperator::identity(m));
    Ok(DenseOperator::from_matrix(controlled).matmul(&h_on_indicator))
}

/// Per-label data permutations; padding labels act as the identity.
fn label_permutations(stencil: &Stencil, layout: &RegisterLayout) -> Vec<Vec<usize>> {
    let labels = shift_label_map(stencil);
    (0..layout.shift_dim())
        .map(|label| match labels.position_of(label) {
            Some(pos) => shift_permutation(stencil.offset(pos), layout.grid()),
            None => (0..layout.data_dim()).collect(),
        })
        .collect()
}

fn check_layout(stencil: &Stencil, g: &GridSpec, layout: &RegisterLayout) -> Result<()> {
    check_compatible(stencil, g)?;
    if layout.grid() != g || layout.shift_dim() < stencil.len() {
        return domain("register layout is inconsistent with the stencil and grid");
    }
    Ok(())
}

fn check_dense(dim: usize) -> Result<()> {
    if dim > DENSE_CIRCUIT_CAP {
        return Err(Error::Resource { dim, cap: DENSE_CIRCUIT_CAP });
    }
    Ok(())
}

/// `SEL = Σ_t I_ind ⊗ |t⟩⟨t| ⊗ S_t` on the full space.
pub fn select_unitary(stencil: &Stencil, g: &GridSpec, layout: &RegisterLayout) -> Result<DenseOperator> {
    check_layout(stencil, g, layout)?;
    check_dense(layout.total_dim())?;
    let perms = label_permutations(stencil, layout);
    let mut sel = DenseOperator::zeros(layout.total_dim());
    for indicator in 0..2 {
        for (label, perm) in perms.iter().enumerate() {
            for (j, &target) in perm.iter().enumerate() {
                sel[(layout.index(indicator, label, target), layout.index(indicator, label, j))] = C_ONE;
            }
        }
    }
    Ok(sel)
}

/// Dense `U = (P† ⊗ I) SEL (Z ⊗ I ⊗ I)(P ⊗ I)`.
pub fn block_encoding_unitary(
    prepare: &DenseOperator,
    select: &DenseOperator,
    layout: &RegisterLayout,
) -> Result<DenseOperator> {
    if prepare.dim() != layout.ancilla_dim() || select.dim() != layout.total_dim() {
        return domain("PREPARE/SELECT dimensions do not match the register layout");
    }
    check_dense(layout.total_dim())?;
    let p_full = prepare.kron(&DenseOperator::identity(layout.data_dim()));
    let mut z_p = p_full.clone();
    // Z on the indicator: negate every row whose indicator bit is 1
    let half = layout.total_dim() / 2;
    for r in half..layout.total_dim() {
        for c in 0..layout.total_dim() {
            z_p[(r, c)] = -z_p[(r, c)];
        }
    }
    Ok(p_full.adjoint().matmul(&select.matmul(&z_p)))
}

/// `(⟨0,0| ⊗ I) U (|0,0⟩ ⊗ I)`: the leading `N^D × N^D` block.
pub fn extract_block(u: &DenseOperator, layout: &RegisterLayout) -> Result<DenseOperator> {
    if u.dim() != layout.total_dim() {
        return domain(format!(
            "operator has dimension {}, layout expects {}",
            u.dim(),
            layout.total_dim()
        ));
    }
    Ok(u.leading_block(layout.data_dim()))
}

/// Anything that maps full-space states to full-space states.
pub trait FullSpaceAction {
    fn full_dim(&self) -> usize;
    fn act(&self, psi: &StateVector) -> StateVector;
}

impl FullSpaceAction for DenseOperator {
    fn full_dim(&self) -> usize {
        self.dim()
    }

    fn act(&self, psi: &StateVector) -> StateVector {
        self.apply(psi)
    }
}

/// Matrix-free `U`: the ancilla factors are applied as a small dense matrix
/// on the ancilla index, the shifts as index permutations on the data index.
#[derive(Debug, Clone)]
pub struct BlockEncoding {
    layout: RegisterLayout,
    prepare: DenseOperator,
    permutations: Vec<Vec<usize>>,
}

impl BlockEncoding {
    /// Encoding of `A_h` with Householder loaders for `√p` and `√q`.
    pub fn new(kp: &KernelPair, g: &GridSpec) -> Result<Self> {
        let layout = RegisterLayout::for_stencil(kp.stencil(), *g)?;
        let gp = LoaderUnitary::for_weights(kp.p(), layout.shift_qubits())?;
        let gq = LoaderUnitary::for_weights(kp.q(), layout.shift_qubits())?;
        Self::from_loaders(&gp, &gq, kp.stencil(), g)
    }

    pub fn from_loaders(gp: &LoaderUnitary, gq: &LoaderUnitary, stencil: &Stencil, g: &GridSpec) -> Result<Self> {
        let layout = RegisterLayout::for_stencil(stencil, *g)?;
        check_layout(stencil, g, &layout)?;
        if gp.dim() != layout.shift_dim() {
            return domain(format!(
                "loaders act on {} states, the shift register has {}",
                gp.dim(),
                layout.shift_dim()
            ));
        }
        Ok(Self {
            prepare: prepare_unitary(gp, gq)?,
            permutations: label_permutations(stencil, &layout),
            layout,
        })
    }

    pub fn layout(&self) -> &RegisterLayout {
        &self.layout
    }

    pub fn prepare(&self) -> &DenseOperator {
        &self.prepare
    }

    /// Column `j` of the leading block: the data part of `U|0,0⟩|j⟩`.
    pub fn block_column(&self, j: usize) -> StateVector {
        let m = self.layout.data_dim();
        let mut psi = StateVector::zeros(self.layout.total_dim());
        psi[self.layout.index(0, 0, j)] = C_ONE;
        self.act(&psi).rows(0, m).into_owned()
    }

    /// `(⟨0,0| ⊗ I) U (|0,0⟩ ⊗ I)`, obtained by simulating `U` on every
    /// `|0,0⟩|j⟩`.
    pub fn block(&self) -> DenseOperator {
        let m = self.layout.data_dim();
        let mut out = DenseOperator::zeros(m);
        let mut psi = StateVector::zeros(self.layout.total_dim());
        for j in 0..m {
            psi.fill(Complex64::new(0.0, 0.0));
            psi[self.layout.index(0, 0, j)] = C_ONE;
            let col = self.act(&psi);
            for r in 0..m {
                out[(r, j)] = col[r];
            }
        }
        out
    }

    /// Materializes `U` column by column, refusing dimensions above `cap`.
    pub fn to_dense(&self, cap: usize) -> Result<DenseOperator> {
        let dim = self.layout.total_dim();
        if dim > cap {
            return Err(Error::Resource { dim, cap });
        }
        let mut u = DenseOperator::zeros(dim);
        let mut psi = StateVector::zeros(dim);
        for c in 0..dim {
            psi.fill(Complex64::new(0.0, 0.0));
            psi[c] = C_ONE;
            let col = self.act(&psi);
            for r in 0..dim {
                u[(r, c)] = col[r];
            }
        }
        Ok(u)
    }
}

impl FullSpaceAction for BlockEncoding {
    fn full_dim(&self) -> usize {
        self.layout.total_dim()
    }

    fn act(&self, psi: &StateVector) -> StateVector {
        assert_eq!(psi.len(), self.full_dim(), "state does not live on the full register space");
        let a = self.layout.ancilla_dim();
        let m = self.layout.data_dim();
        // rows index the ancilla (indicator ⊗ shift), columns the data register
        let grid = DMatrix::from_row_slice(a, m, psi.as_slice());
        let prepared = self.prepare.as_matrix() * grid;

        let shift_dim = self.layout.shift_dim();
        let mut selected = DMatrix::zeros(a, m);
        for row in 0..a {
            let sign = if row >= shift_dim { -1.0 } else { 1.0 };
            let perm = &self.permutations[row % shift_dim];
            for (j, &target) in perm.iter().enumerate() {
                selected[(row, target)] = prepared[(row, j)] * sign;
            }
        }
        let out = self.prepare.as_matrix().adjoint() * selected;
        StateVector::from_iterator(a * m, out.transpose().iter().copied())
    }
}

/// Outcome of measuring the ancillas in `|0,0⟩`.
#[derive(Debug, Clone)]
pub struct PostSelection {
    pub success_probability: f64,
    /// Normalized post-measurement data state, absent when the success
    /// probability is at most [`POSTSELECT_FLOOR`].
    pub state: Option<StateVector>,
}

/// Runs `U(|0,0⟩ ⊗ v)` and projects the ancillas onto `|0,0⟩`.
pub fn apply_and_postselect<U: FullSpaceAction + ?Sized>(
    u: &U,
    layout: &RegisterLayout,
    v: &StateVector,
) -> Result<PostSelection> {
    if u.full_dim() != layout.total_dim() {
        return domain("unitary dimension does not match the register layout");
    }
    if v.len() != layout.data_dim() {
        return domain(format!("data state has length {}, expected {}", v.len(), layout.data_dim()));
    }
    let norm_sq = squared_norm(v);
    if (norm_sq - 1.0).abs() > 1e-10 {
        return domain(format!("data state has squared norm {norm_sq}, expected 1"));
    }
    let mut psi = StateVector::zeros(layout.total_dim());
    psi.rows_mut(0, layout.data_dim()).copy_from(v);
    let out = u.act(&psi);
    let component = out.rows(0, layout.data_dim()).into_owned();
    let success_probability = squared_norm(&component);
    let state = (success_probability > POSTSELECT_FLOOR)
        .then(|| component / Complex64::new(success_probability.sqrt(), 0.0));
    Ok(PostSelection { success_probability, state })
}

/// Loader-precision report: `ε_G = max_π ‖(G̃_π − G_π)|0⟩‖` and the spectral
/// norm of the resulting change in the encoded block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbationReport {
    pub epsilon_g: f64,
    pub block_error: f64,
}

impl PerturbationReport {
    /// `block_error ≤ 2 ε_G`, with a rounding allowance of `1e-13`.
    pub fn within_bound(&self) -> bool {
        self.block_error <= 2.0 * self.epsilon_g + 1e-13
    }
}

pub fn perturbed_encoding_error(
    gp: &LoaderUnitary,
    gq: &LoaderUnitary,
    gp_tilde: &LoaderUnitary,
    gq_tilde: &LoaderUnitary,
    stencil: &Stencil,
    g: &GridSpec,
) -> Result<PerturbationReport> {
    let dims = [gp.dim(), gq.dim(), gp_tilde.dim(), gq_tilde.dim()];
    if dims.iter().any(|&d| d != dims[0]) {
        return domain("all four loaders must act on the same shift register");
    }
    let epsilon_g = [(gp, gp_tilde), (gq, gq_tilde)]
        .iter()
        .map(|(g0, g1)| (g1.first_column() - g0.first_column()).norm())
        .fold(0.0, f64::max);
    let exact = BlockEncoding::from_loaders(gp, gq, stencil, g)?.block();
    let approx = BlockEncoding::from_loaders(gp_tilde, gq_tilde, stencil, g)?.block();
    Ok(PerturbationReport { epsilon_g, block_error: (&approx - &exact).spectral_norm() })
}

/// Same report as [`perturbed_encoding_error`] without materializing either
/// block. Any block of this circuit is a combination of shifts, hence
/// circulant, so its norm follows from one column.
pub fn perturbed_encoding_error_circulant(
    gp: &LoaderUnitary,
    gq: &LoaderUnitary,
    gp_tilde: &LoaderUnitary,
    gq_tilde: &LoaderUnitary,
    stencil: &Stencil,
    g: &GridSpec,
) -> Result<PerturbationReport> {
    let dims = [gp.dim(), gq.dim(), gp_tilde.dim(), gq_tilde.dim()];
    if dims.iter().any(|&d| d != dims[0]) {
        return domain("all four loaders must act on the same shift register");
    }
    let epsilon_g = [(gp, gp_tilde), (gq, gq_tilde)]
        .iter()
        .map(|(g0, g1)| (g1.first_column() - g0.first_column()).norm())
        .fold(0.0, f64::max);
    let exact = BlockEncoding::from_loaders(gp, gq, stencil, g)?.block_column(0);
    let approx = BlockEncoding::from_loaders(gp_tilde, gq_tilde, stencil, g)?.block_column(0);
    let diff: Vec<Complex64> = (approx - exact).iter().copied().collect();
    Ok(PerturbationReport { epsilon_g, block_error: circulant_spectral_norm(&diff, g)? })
}

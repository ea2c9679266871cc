//! Periodic grids `Z_N^D` with `N = 2^n`, row-major basis ordering and
//! cyclic shift permutations `S_t |j⟩ = |j + t mod N⟩`.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::linalg::{DenseOperator, C_ONE};

/// Largest number of qubits per axis accepted by [`GridSpec::new`].
pub const MAX_QUBITS_PER_AXIS: u32 = 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridSpec {
    dim: usize,
    qubits_per_axis: u32,
}

impl GridSpec {
    /// Grid with `dim` axes of `2^qubits_per_axis` points each.
    pub fn new(dim: usize, qubits_per_axis: u32) -> Result<Self> {
        if dim == 0 {
            return domain("grid dimension must be positive");
        }
        if qubits_per_axis == 0 || qubits_per_axis > MAX_QUBITS_PER_AXIS {
            return domain(format!(
                "qubits per axis must lie in 1..={MAX_QUBITS_PER_AXIS}, got {qubits_per_axis}"
            ));
        }
        let total_bits = dim as u64 * qubits_per_axis as u64;
        if total_bits >= usize::BITS as u64 {
            return domain(format!("grid with {total_bits} data qubits is not addressable"));
        }
        Ok(Self { dim, qubits_per_axis })
    }

    /// Grid with `points` per axis; `points` must be a power of two and at least 2.
    pub fn with_points(dim: usize, points: usize) -> Result<Self> {
        if points < 2 || !points.is_power_of_two() {
            return domain(format!("points per axis must be a power of two >= 2, got {points}"));
        }
        Self::new(dim, points.trailing_zeros())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn qubits_per_axis(&self) -> u32 {
        self.qubits_per_axis
    }

    /// `N = 2^n`.
    pub fn points_per_axis(&self) -> usize {
        1usize << self.qubits_per_axis
    }

    /// `h = 1/N`.
    pub fn spacing(&self) -> f64 {
        1.0 / self.points_per_axis() as f64
    }

    /// Total number of data qubits `D·n`.
    pub fn data_qubits(&self) -> u32 {
        self.dim as u32 * self.qubits_per_axis
    }

    /// Dimension of the data Hilbert space, `N^D`.
    pub fn len(&self) -> usize {
        1usize << self.data_qubits()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Iterates all grid points in flattened order.
    pub fn indices(&self) -> impl Iterator<Item = MultiIndex> + '_ {
        (0..self.len()).map(move |i| self.unflatten_unchecked(i))
    }

    fn unflatten_unchecked(&self, mut index: usize) -> MultiIndex {
        let n = self.points_per_axis();
        let mut coords = vec![0; self.dim];
        for c in coords.iter_mut().rev() {
            *c = index % n;
            index /= n;
        }
        MultiIndex(coords)
    }

    /// Whether offset `t` wraps far enough around the torus to alias with
    /// another offset (`|t_k| >= N/2` on some axis).
    pub fn aliases(&self, offset: &[i64]) -> bool {
        let half = (self.points_per_axis() / 2) as i64;
        offset.iter().any(|&t| t.abs() >= half)
    }
}

/// A grid point `j ∈ Z_N^D`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(pub Vec<usize>);

impl MultiIndex {
    pub fn new(coords: impl Into<Vec<usize>>) -> Self {
        Self(coords.into())
    }

    pub fn coords(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for MultiIndex {
    fn from(coords: Vec<usize>) -> Self {
        Self(coords)
    }
}

/// Row-major linear index `Σ_k j_k N^{D−1−k}`.
pub fn flatten(j: &MultiIndex, g: &GridSpec) -> Result<usize> {
    if j.0.len() != g.dim() {
        return domain(format!(
            "multi-index has {} coordinates, grid has dimension {}",
            j.0.len(),
            g.dim()
        ));
    }
    let n = g.points_per_axis();
    let mut out = 0usize;
    for &c in &j.0 {
        if c >= n {
            return domain(format!("coordinate {c} outside [0, {n})"));
        }
        out = out * n + c;
    }
    Ok(out)
}

pub fn unflatten(index: usize, g: &GridSpec) -> Result<MultiIndex> {
    if index >= g.len() {
        return domain(format!("linear index {index} outside [0, {})", g.len()));
    }
    Ok(g.unflatten_unchecked(index))
}

/// `perm[j] = flatten(j + t mod N)` for every flattened `j`.
///
/// `t` may have any integer components; they are reduced mod `N`. Panics if
/// `t.len() != g.dim()`.
pub fn shift_permutation(t: &[i64], g: &GridSpec) -> Vec<usize> {
    assert_eq!(t.len(), g.dim(), "offset dimension does not match the grid");
    let n = g.points_per_axis();
    let mask = n - 1;
    let bits = g.qubits_per_axis() as usize;
    let reduced: Vec<usize> = t.iter().map(|&c| c.rem_euclid(n as i64) as usize).collect();

    (0..g.len())
        .map(|j| {
            let mut out = 0usize;
            for (axis, r) in reduced.iter().enumerate() {
                let shift = bits * (g.dim() - 1 - axis);
                let c = (j >> shift) & mask;
                out |= ((c + r) & mask) << shift;
            }
            out
        })
        .collect()
}

/// Dense permutation matrix of the cyclic shift `S_t`.
pub fn shift_operator(t: &[i64], g: &GridSpec) -> DenseOperator {
    let perm = shift_permutation(t, g);
    let mut out = DenseOperator::zeros(g.len());
    for (col, &row) in perm.iter().enumerate() {
        out[(row, col)] = C_ONE;
    }
    out
}

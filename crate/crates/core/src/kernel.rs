//! Truncated symmetric stencils and the normalized Gaussian pair that defines
//! the DoG coefficients `c_t = p_t − q_t`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::Write;
use std::str::FromStr;

use log::warn;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::csv::{fmt_float, write_header, write_record};
use crate::error::{domain, Error, Result};

/// Tolerance on `Σp = 1`, `Σq = 1` accepted by [`KernelPair::from_weights`].
pub const NORMALIZATION_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StencilShape {
    /// Every offset in `{−R..R}^D`.
    #[default]
    Hypercube,
    /// The origin plus `±r·e_k` for `1 ≤ r ≤ R` along each axis.
    Cross,
}

impl fmt::Display for StencilShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StencilShape::Hypercube => "hypercube",
            StencilShape::Cross => "cross",
        })
    }
}

impl FromStr for StencilShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "hypercube" => Ok(StencilShape::Hypercube),
            "cross" => Ok(StencilShape::Cross),
            other => domain(format!("unknown stencil shape `{other}` (expected hypercube or cross)")),
        }
    }
}

/// Finite symmetric offset set `T ⊂ Z^D` in lexicographic order.
///
/// Because the set is symmetric and sorted, negation reverses the order:
/// the mirror of position `i` is position `len − 1 − i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stencil {
    dim: usize,
    radius: usize,
    shape: StencilShape,
    offsets: Vec<Vec<i64>>,
}

impl Stencil {
    pub fn new(dim: usize, radius: usize, shape: StencilShape) -> Result<Self> {
        if dim == 0 {
            return domain("stencil dimension must be positive");
        }
        let r = radius as i64;
        let offsets = match shape {
            StencilShape::Hypercube => {
                let side = 2 * radius + 1;
                let count = side.checked_pow(dim as u32).ok_or_else(|| {
                    Error::Domain(format!("hypercube stencil {side}^{dim} is too large"))
                })?;
                (0..count)
                    .map(|mut k| {
                        let mut t = vec![0i64; dim];
                        for c in t.iter_mut().rev() {
                            *c = (k % side) as i64 - r;
                            k /= side;
                        }
                        t
                    })
                    .collect()
            }
            StencilShape::Cross => {
                let mut offsets = vec![vec![0i64; dim]];
                for axis in 0..dim {
                    for step in 1..=r {
                        for sign in [-1, 1] {
                            let mut t = vec![0i64; dim];
                            t[axis] = sign * step;
                            offsets.push(t);
                        }
                    }
                }
                offsets.sort();
                offsets
            }
        };
        Ok(Self { dim, radius, shape, offsets })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn shape(&self) -> StencilShape {
        self.shape
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }

    pub fn offsets(&self) -> &[Vec<i64>] {
        &self.offsets
    }

    pub fn offset(&self, position: usize) -> &[i64] {
        &self.offsets[position]
    }

    pub fn position_of(&self, t: &[i64]) -> Option<usize> {
        self.offsets.binary_search_by(|o| o.as_slice().cmp(t)).ok()
    }

    /// Position of `−t` given the position of `t`.
    pub fn mirror(&self, position: usize) -> usize {
        self.len() - 1 - position
    }

    /// `‖t‖²` as an exact integer.
    pub fn squared_norm(&self, position: usize) -> i64 {
        self.offsets[position].iter().map(|c| c * c).sum()
    }
}

/// Convenience wrapper over [`Stencil::new`].
pub fn build_stencil(dim: usize, radius: usize, shape: StencilShape) -> Result<Stencil> {
    Stencil::new(dim, radius, shape)
}

/// Normalized weights `∝ exp(−‖t‖²/2σ²)` over the stencil.
///
/// Each weight is evaluated once per distinct integer `‖t‖²`, so `t` and
/// `−t` receive bit-identical values.
pub fn gaussian_weights(stencil: &Stencil, sigma: f64) -> Result<Vec<f64>> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return domain(format!("sigma must be positive and finite, got {sigma}"));
    }
    let two_var = 2.0 * sigma * sigma;
    let mut by_norm: BTreeMap<i64, f64> = BTreeMap::new();
    let raw: Vec<f64> = (0..stencil.len())
        .map(|i| {
            let r2 = stencil.squared_norm(i);
            *by_norm.entry(r2).or_insert_with(|| (-(r2 as f64) / two_var).exp())
        })
        .collect();
    let total: f64 = raw.iter().sum();
    if !(total.is_finite() && total > 0.0) {
        return Err(Error::DegenerateKernel { sigma });
    }
    Ok(raw.into_iter().map(|w| w / total).collect())
}

/// Elementwise `p − q`.
pub fn dog_coefficients(p: &[f64], q: &[f64]) -> Result<Vec<f64>> {
    if p.len() != q.len() {
        return domain(format!("weight vectors differ in length ({} vs {})", p.len(), q.len()));
    }
    Ok(p.iter().zip(q).map(|(a, b)| a - b).collect())
}

/// `Σ|c_t|`.
pub fn coefficient_one_norm(c: &[f64]) -> f64 {
    c.iter().map(|x| x.abs()).sum()
}

/// Pair of normalized nonnegative weight vectors over a common stencil,
/// with their difference `c`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelPair {
    stencil: Stencil,
    sigmas: Option<(f64, f64)>,
    p: Vec<f64>,
    q: Vec<f64>,
    c: Vec<f64>,
}

impl KernelPair {
    /// Discrete Gaussians with scales `sigma_p` (narrow) and `sigma_q` (wide).
    pub fn gaussian(stencil: Stencil, sigma_p: f64, sigma_q: f64) -> Result<Self> {
        if sigma_p > sigma_q {
            warn!("sigma_p = {sigma_p} exceeds sigma_q = {sigma_q}; the DoG response changes sign");
        }
        let p = gaussian_weights(&stencil, sigma_p)?;
        let q = gaussian_weights(&stencil, sigma_q)?;
        let c = dog_coefficients(&p, &q)?;
        Ok(Self { stencil, sigmas: Some((sigma_p, sigma_q)), p, q, c })
    }

    /// Arbitrary weight pair. Both must be nonnegative, finite and sum to 1
    /// within [`NORMALIZATION_TOL`]; symmetry is not required.
    pub fn from_weights(stencil: Stencil, p: Vec<f64>, q: Vec<f64>) -> Result<Self> {
        for (name, w) in [("p", &p), ("q", &q)] {
            if w.len() != stencil.len() {
                return domain(format!(
                    "{name} has {} entries, stencil has {}",
                    w.len(),
                    stencil.len()
                ));
            }
            if w.iter().any(|x| !x.is_finite() || *x < 0.0) {
                return domain(format!("{name} must be finite and nonnegative"));
            }
            let sum: f64 = w.iter().sum();
            if (sum - 1.0).abs() > NORMALIZATION_TOL {
                return domain(format!("{name} sums to {sum}, expected 1"));
            }
        }
        let c = dog_coefficients(&p, &q)?;
        Ok(Self { stencil, sigmas: None, p, q, c })
    }

    pub fn stencil(&self) -> &Stencil {
        &self.stencil
    }

    pub fn dim(&self) -> usize {
        self.stencil.dim()
    }

    /// `(σ_p, σ_q)` when built by [`KernelPair::gaussian`].
    pub fn sigmas(&self) -> Option<(f64, f64)> {
        self.sigmas
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.c
    }

    pub fn one_norm(&self) -> f64 {
        coefficient_one_norm(&self.c)
    }

    /// Exact mirror symmetry `p_t = p_{−t}` and `q_t = q_{−t}`.
    pub fn is_symmetric(&self) -> bool {
        (0..self.stencil.len()).all(|i| {
            let m = self.stencil.mirror(i);
            self.p[i] == self.p[m] && self.q[i] == self.q[m]
        })
    }
}

/// `C_DoG = ½ Σ_t c_t ‖t‖²`. Negative for `σ_p < σ_q`.
pub fn c_dog_constant(kp: &KernelPair) -> f64 {
    0.5 * kp
        .coefficients()
        .iter()
        .enumerate()
        .map(|(i, c)| c * kp.stencil().squared_norm(i) as f64)
        .sum::<f64>()
}

/// Second-moment matrix `Σ_t c_t t tᵀ`; equals `(2 C_DoG / D) I` for
/// isotropic weights on hypercube or cross stencils.
pub fn isotropy_matrix(kp: &KernelPair) -> DMatrix<f64> {
    let d = kp.dim();
    let mut m = DMatrix::zeros(d, d);
    for (t, c) in kp.stencil().offsets().iter().zip(kp.coefficients()) {
        for a in 0..d {
            for b in 0..d {
                m[(a, b)] += c * (t[a] * t[b]) as f64;
            }
        }
    }
    m
}

/// Writes `t1..tD,p,q,c`, one row per offset in stencil order.
pub fn write_kernel_csv<W: Write>(kp: &KernelPair, out: &mut W) -> Result<()> {
    let mut header: Vec<String> = (1..=kp.dim()).map(|k| format!("t{k}")).collect();
    header.extend(["p", "q", "c"].map(String::from));
    write_header(out, &header)?;
    for (i, t) in kp.stencil().offsets().iter().enumerate() {
        let mut row: Vec<String> = t.iter().map(|x| x.to_string()).collect();
        row.extend([kp.p()[i], kp.q()[i], kp.coefficients()[i]].map(fmt_float));
        write_record(out, &row)?;
    }
    Ok(())
}

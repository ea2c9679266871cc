//! Leading-order T-gate bookkeeping for the encoding circuit. Every
//! constant is set to 1: the terms are asymptotic scalings, not gate counts.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::grid::GridSpec;
use crate::kernel::KernelPair;

use super::RegisterLayout;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LoaderMode {
    /// Arbitrary state preparation: `O(2^s)` rotations, no extra ancillas.
    Generic,
    /// Gaussian-structured preparation: `O(s²)` rotations, `⌊(s−1)/2⌋`
    /// extra ancillas, subnormalization `γ < 1` inside the loader.
    Structured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub mode: LoaderMode,
    pub shift_qubits: u32,
    pub stencil_len: usize,
    /// `2^s·log₂(1/ε_G)` (generic) or `s²·log₂(1/ε_G)` (structured).
    pub rotation_term: f64,
    /// `|T|·D·log₂N`.
    pub shift_term: f64,
    pub ancilla_qubits: u32,
    /// `2`, or `2/γ` in structured mode when `γ` is supplied.
    pub subnormalization: Option<f64>,
    pub subnormalization_expr: String,
    pub gamma: Option<f64>,
    pub asymptotic: bool,
}

impl ResourceReport {
    pub fn leading_total(&self) -> f64 {
        self.rotation_term + self.shift_term
    }
}

pub fn resource_estimate(
    kp: &KernelPair,
    g: &GridSpec,
    mode: LoaderMode,
    eps_g: f64,
    gamma: Option<f64>,
) -> Result<ResourceReport> {
    if !(eps_g > 0.0 && eps_g < 1.0) {
        return domain(format!("eps_G must lie in (0, 1), got {eps_g}"));
    }
    if let Some(gm) = gamma {
        if !(gm > 0.0 && gm <= 1.0) {
            return domain(format!("gamma must lie in (0, 1], got {gm}"));
        }
    }
    let layout = RegisterLayout::for_stencil(kp.stencil(), *g)?;
    let s = layout.shift_qubits();
    let precision = (1.0 / eps_g).log2();
    let shift_term = (kp.stencil().len() * g.dim()) as f64 * g.qubits_per_axis() as f64;

    let (rotation_term, ancilla_qubits, subnormalization, expr) = match mode {
        LoaderMode::Generic => ((1u64 << s) as f64 * precision, s + 1, Some(2.0), "2".to_string()),
        LoaderMode::Structured => (
            (s * s) as f64 * precision,
            s + 1 + s.saturating_sub(1) / 2,
            gamma.map(|gm| 2.0 / gm),
            "2/gamma".to_string(),
        ),
    };
    Ok(ResourceReport {
        mode,
        shift_qubits: s,
        stencil_len: kp.stencil().len(),
        rotation_term,
        shift_term,
        ancilla_qubits,
        subnormalization,
        subnormalization_expr: expr,
        gamma: if mode == LoaderMode::Structured { gamma } else { None },
        asymptotic: true,
    })
}

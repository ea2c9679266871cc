//! Fourier diagonalization of the DoG operator.
//!
//! Conventions: kernel transforms use `π̂(ω) = Σ_t π_t e^{−2πi⟨ω,t⟩/N}`,
//! basis states use `|ω⟩ = N^{−D/2} Σ_j e^{+2πi⟨ω,j⟩/N} |j⟩`. With these,
//! `A_h |ω⟩ = (p̂(ω) − q̂(ω)) |ω⟩`.

use std::f64::consts::TAU;
use std::io::Write;

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::csv::{fmt_float, write_header, write_record};
use crate::error::{domain, Result};
use crate::grid::{flatten, GridSpec, MultiIndex};
use crate::kernel::{KernelPair, Stencil};
use crate::linalg::StateVector;
use crate::operator::check_compatible;

/// `e^{−2πik/N}` for `k ∈ [0, N)`.
fn twiddles(n: usize) -> Vec<Complex64> {
    (0..n).map(|k| Complex64::from_polar(1.0, -TAU * k as f64 / n as f64)).collect()
}

/// `π̂(ω)` for every flattened frequency, by direct summation over the stencil.
pub fn kernel_dft(stencil: &Stencil, weights: &[f64], g: &GridSpec) -> Result<Vec<Complex64>> {
    check_compatible(stencil, g)?;
    if weights.len() != stencil.len() {
        return domain("weight count does not match the stencil");
    }
    let n = g.points_per_axis();
    let table = twiddles(n);
    let reduced: Vec<Vec<usize>> = stencil
        .offsets()
        .iter()
        .map(|t| t.iter().map(|&c| c.rem_euclid(n as i64) as usize).collect())
        .collect();

    Ok(g
        .indices()
        .map(|omega| {
            reduced
                .iter()
                .zip(weights)
                .map(|(t, &w)| {
                    let phase = omega.coords().iter().zip(t).map(|(a, b)| a * b).sum::<usize>() % n;
                    table[phase] * w
                })
                .sum()
        })
        .collect())
}

/// Eigenvalues `μ(ω) = p̂(ω) − q̂(ω)` of `A_h` with the component transforms.
#[derive(Debug, Clone)]
pub struct TransferFunction {
    grid: GridSpec,
    mu: Vec<Complex64>,
    p_hat: Vec<Complex64>,
    q_hat: Vec<Complex64>,
}

impl TransferFunction {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `μ` indexed by flattened frequency.
    pub fn mu(&self) -> &[Complex64] {
        &self.mu
    }

    pub fn p_hat(&self) -> &[Complex64] {
        &self.p_hat
    }

    pub fn q_hat(&self) -> &[Complex64] {
        &self.q_hat
    }

    pub fn max_imaginary(&self) -> f64 {
        self.mu.iter().map(|z| z.im.abs()).fold(0.0, f64::max)
    }

    /// Flattened frequency and value of the largest `|μ(ω)|` (first on ties).
    pub fn peak(&self) -> (usize, f64) {
        self.mu
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, z)| {
                if z.norm() > best.1 {
                    (i, z.norm())
                } else {
                    best
                }
            })
    }
}

pub fn transfer_function(kp: &KernelPair, g: &GridSpec) -> Result<TransferFunction> {
    let p_hat = kernel_dft(kp.stencil(), kp.p(), g)?;
    let q_hat = kernel_dft(kp.stencil(), kp.q(), g)?;
    let mu = p_hat.iter().zip(&q_hat).map(|(a, b)| a - b).collect();
    Ok(TransferFunction { grid: *g, mu, p_hat, q_hat })
}

/// `‖A_h‖ = max_ω |μ(ω)|`.
pub fn operator_norm(tf: &TransferFunction) -> f64 {
    tf.peak().1.max(0.0)
}

pub fn fourier_basis_vector(omega: &MultiIndex, g: &GridSpec) -> Result<StateVector> {
    flatten(omega, g)?;
    let n = g.points_per_axis();
    let table = twiddles(n);
    let amp = (g.len() as f64).sqrt().recip();
    Ok(StateVector::from_iterator(
        g.len(),
        g.indices().map(|j| {
            let phase = omega.coords().iter().zip(j.coords()).map(|(a, b)| a * b).sum::<usize>() % n;
            // conj turns the e^{−} table into e^{+}
            table[phase].conj() * amp
        }),
    ))
}

/// Fourier coefficients `⟨ω|v⟩ = N^{−D/2} Σ_j e^{−2πi⟨ω,j⟩/N} v_j`, computed
/// axis by axis with an FFT.
pub fn state_spectrum(values: &[Complex64], g: &GridSpec) -> Result<Vec<Complex64>> {
    if values.len() != g.len() {
        return domain(format!("signal has length {}, grid has {} points", values.len(), g.len()));
    }
    let n = g.points_per_axis();
    let fft = FftPlanner::<f64>::new().plan_fft_forward(n);
    let mut data = values.to_vec();
    let mut line = vec![Complex64::new(0.0, 0.0); n];

    for axis in 0..g.dim() {
        let stride = n.pow((g.dim() - 1 - axis) as u32);
        let block = stride * n;
        for base in (0..data.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for (k, slot) in line.iter_mut().enumerate() {
                    *slot = data[start + k * stride];
                }
                fft.process(&mut line);
                for (k, value) in line.iter().enumerate() {
                    data[start + k * stride] = *value;
                }
            }
        }
    }
    let scale = (g.len() as f64).sqrt().recip();
    data.iter_mut().for_each(|z| *z *= scale);
    Ok(data)
}

/// Spectral norm of the circulant operator on `g` whose first column is
/// `column`: the largest magnitude of its unnormalized DFT.
pub fn circulant_spectral_norm(column: &[Complex64], g: &GridSpec) -> Result<f64> {
    let scale = (g.len() as f64).sqrt();
    Ok(state_spectrum(column, g)?.iter().map(|z| z.norm() * scale).fold(0.0, f64::max))
}

/// Writes `omega1..omegaD,re_mu,im_mu,abs_mu`. In one dimension with
/// `half_band`, only `ω = 0..N/2` is written; otherwise the full grid.
pub fn write_transfer_csv<W: Write>(tf: &TransferFunction, half_band: bool, out: &mut W) -> Result<()> {
    let g = tf.grid();
    let mut header: Vec<String> = (1..=g.dim()).map(|k| format!("omega{k}")).collect();
    header.extend(["re_mu", "im_mu", "abs_mu"].map(String::from));
    write_header(out, &header)?;
    let rows = if half_band && g.dim() == 1 { g.points_per_axis() / 2 + 1 } else { g.len() };
    for (omega, mu) in g.indices().zip(tf.mu()).take(rows) {
        let mut row: Vec<String> = omega.coords().iter().map(|c| c.to_string()).collect();
        row.extend([mu.re, mu.im, mu.norm()].map(fmt_float));
        write_record(out, &row)?;
    }
    Ok(())
}

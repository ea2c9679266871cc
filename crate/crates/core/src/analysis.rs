//! Success-probability analysis of the encoding: the exact Parseval form
//! `P = ¼ Σ_ω |μ(ω)|² |v̂(ω)|²`, the spectral bound `P ≤ ¼‖A_h‖²`, and the
//! small-`h` behaviour `P ≈ C_DoG²/(4D²) h⁴ ‖Δv‖²/‖v‖²` for smooth fields.

use std::f64::consts::{PI, TAU};
use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::csv::{fmt_float, write_header, write_record};
use crate::error::{domain, Error, Result};
use crate::grid::GridSpec;
use crate::kernel::{c_dog_constant, KernelPair};
use crate::linalg::StateVector;
use crate::operator::apply_dog;
use crate::spectral::{operator_norm, state_spectrum, transfer_function, TransferFunction};

type FieldFn = Arc<dyn Fn(&[f64]) -> Complex64 + Send + Sync>;

/// A periodic function on `[0,1)^D` together with its analytic Laplacian
/// and the `L²` norms of both.
#[derive(Clone)]
pub struct SmoothField {
    name: String,
    dim: usize,
    value: FieldFn,
    laplacian: FieldFn,
    l2_norm: f64,
    laplacian_l2_norm: f64,
}

impl fmt::Debug for SmoothField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SmoothField")
            .field("name", &self.name)
            .field("dim", &self.dim)
            .field("l2_norm", &self.l2_norm)
            .field("laplacian_l2_norm", &self.laplacian_l2_norm)
            .finish_non_exhaustive()
    }
}

impl SmoothField {
    /// Caller-supplied field; smoothness and periodicity are not checked.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        value: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
        laplacian: impl Fn(&[f64]) -> Complex64 + Send + Sync + 'static,
        l2_norm: f64,
        laplacian_l2_norm: f64,
    ) -> Self {
        Self {
            name: name.into(),
            dim,
            value: Arc::new(value),
            laplacian: Arc::new(laplacian),
            l2_norm,
            laplacian_l2_norm,
        }
    }

    /// `v ≡ 1`.
    pub fn constant(dim: usize) -> Self {
        Self::new("constant", dim, |_| Complex64::new(1.0, 0.0), |_| Complex64::new(0.0, 0.0), 1.0, 0.0)
    }

    /// `v(x) = sin(2πx₁)`: `Δv = −4π² v`, `‖v‖² = ½`.
    pub fn sin1d(dim: usize) -> Self {
        let k2 = 4.0 * PI * PI;
        Self::new(
            "sin1d",
            dim,
            |x| Complex64::new((TAU * x[0]).sin(), 0.0),
            move |x| Complex64::new(-k2 * (TAU * x[0]).sin(), 0.0),
            0.5f64.sqrt(),
            k2 * 0.5f64.sqrt(),
        )
    }

    /// `v(x) = Π_k sin(2πx_k)`: `Δv = −4π²D v`, `‖v‖² = 2^{−D}`.
    pub fn sin_product(dim: usize) -> Self {
        let k2 = 4.0 * PI * PI * dim as f64;
        let norm = 0.5f64.powi(dim as i32).sqrt();
        let value = |x: &[f64]| x.iter().map(|xi| (TAU * xi).sin()).product::<f64>();
        Self::new(
            "sin-product",
            dim,
            move |x| Complex64::new(value(x), 0.0),
            move |x| Complex64::new(-k2 * value(x), 0.0),
            norm,
            k2 * norm,
        )
    }

    /// Periodic bump `v(x) = Π_k exp(κ(cos 2πx_k − 1))`. Norms are evaluated
    /// by the periodic trapezoid rule on the 1-D factors.
    pub fn gaussian_bump(dim: usize, kappa: f64) -> Self {
        let f = move |x: f64| (kappa * ((TAU * x).cos() - 1.0)).exp();
        // f'' = 4π²κ (κ sin²θ − cos θ) f
        let f2 = move |x: f64| {
            let th = TAU * x;
            4.0 * PI * PI * kappa * (kappa * th.sin().powi(2) - th.cos()) * f(x)
        };

        let samples = 4096;
        let mean = |g: &dyn Fn(f64) -> f64| (0..samples).map(|k| g(k as f64 / samples as f64)).sum::<f64>() / samples as f64;
        let ff = mean(&|x| f(x) * f(x));
        let f2f2 = mean(&|x| f2(x) * f2(x));
        let ff2 = mean(&|x| f(x) * f2(x));
        let d = dim as i32;
        let norm_sq = ff.powi(d);
        // ‖Σ_k g_k‖² with g_k = f''(x_k) Π_{l≠k} f(x_l)
        let lap_sq = dim as f64 * f2f2 * ff.powi(d - 1)
            + (dim * (dim - 1)) as f64 * ff2 * ff2 * if dim >= 2 { ff.powi(d - 2) } else { 0.0 };

        Self::new(
            "gaussian-bump",
            dim,
            move |x| Complex64::new(x.iter().map(|&xi| f(xi)).product(), 0.0),
            move |x| {
                let lap: f64 = (0..x.len())
                    .map(|k| {
                        x.iter()
                            .enumerate()
                            .map(|(l, &xl)| if l == k { f2(xl) } else { f(xl) })
                            .product::<f64>()
                    })
                    .sum();
                Complex64::new(lap, 0.0)
            },
            norm_sq.sqrt(),
            lap_sq.sqrt(),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn value(&self, x: &[f64]) -> Complex64 {
        (self.value)(x)
    }

    pub fn laplacian(&self, x: &[f64]) -> Complex64 {
        (self.laplacian)(x)
    }

    pub fn l2_norm(&self) -> f64 {
        self.l2_norm
    }

    pub fn laplacian_l2_norm(&self) -> f64 {
        self.laplacian_l2_norm
    }
}

/// Named analytic test fields.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FieldKind {
    #[default]
    Sin1d,
    SinProduct,
    Constant,
    GaussianBump,
}

/// `κ` used for [`FieldKind::GaussianBump`].
pub const BUMP_KAPPA: f64 = 4.0;

impl FieldKind {
    pub fn build(self, dim: usize) -> SmoothField {
        match self {
            FieldKind::Sin1d => SmoothField::sin1d(dim),
            FieldKind::SinProduct => SmoothField::sin_product(dim),
            FieldKind::Constant => SmoothField::constant(dim),
            FieldKind::GaussianBump => SmoothField::gaussian_bump(dim, BUMP_KAPPA),
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FieldKind::Sin1d => "sin1d",
            FieldKind::SinProduct => "sin-product",
            FieldKind::Constant => "constant",
            FieldKind::GaussianBump => "gaussian-bump",
        })
    }
}

impl FromStr for FieldKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sin1d" => Ok(FieldKind::Sin1d),
            "sin-product" => Ok(FieldKind::SinProduct),
            "constant" => Ok(FieldKind::Constant),
            "gaussian-bump" => Ok(FieldKind::GaussianBump),
            other => domain(format!(
                "unknown field `{other}` (expected sin1d, sin-product, constant or gaussian-bump)"
            )),
        }
    }
}

/// Grid samples `v_h(j) = v(hj)` and their `ℓ²` norm.
#[derive(Debug, Clone)]
pub struct SampledSignal {
    grid: GridSpec,
    values: Vec<Complex64>,
    norm: f64,
}

impl SampledSignal {
    pub fn from_values(grid: GridSpec, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.len() {
            return domain(format!("{} samples for a grid of {} points", values.len(), grid.len()));
        }
        let norm = values.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        Ok(Self { grid, values, norm })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// `‖v_h‖₂` before normalization.
    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `|v_h⟩ = v_h / ‖v_h‖₂`; `None` for the zero signal.
    pub fn state(&self) -> Option<StateVector> {
        (self.norm > 0.0).then(|| {
            StateVector::from_iterator(self.values.len(), self.values.iter().map(|z| z / self.norm))
        })
    }
}

pub fn sample(field: &SmoothField, g: &GridSpec) -> Result<SampledSignal> {
    if field.dim() != g.dim() {
        return domain(format!("field is {}-dimensional, grid is {}-dimensional", field.dim(), g.dim()));
    }
    let h = g.spacing();
    let values = g
        .indices()
        .map(|j| {
            let x: Vec<f64> = j.coords().iter().map(|&c| c as f64 * h).collect();
            field.value(&x)
        })
        .collect();
    SampledSignal::from_values(*g, values)
}

/// `¼ Σ_ω |μ(ω)|² |v̂_h(ω)|²` for the normalized signal.
pub fn success_probability_exact(v: &SampledSignal, tf: &TransferFunction) -> Result<f64> {
    if v.grid() != tf.grid() {
        return domain("signal and transfer function live on different grids");
    }
    if v.norm() == 0.0 {
        return domain("the zero signal has no normalized state");
    }
    let normalized: Vec<Complex64> = v.values().iter().map(|z| z / v.norm()).collect();
    let spectrum = state_spectrum(&normalized, v.grid())?;
    Ok(0.25 * tf.mu().iter().zip(&spectrum).map(|(m, s)| m.norm_sqr() * s.norm_sqr()).sum::<f64>())
}

/// `¼ ‖A_h‖²`.
pub fn success_probability_bound(tf: &TransferFunction) -> f64 {
    0.25 * operator_norm(tf).powi(2)
}

/// Leading term `C_DoG²/(4D²) · h⁴ · ‖Δv‖²/‖v‖²`.
pub fn success_probability_asymptotic(field: &SmoothField, kp: &KernelPair, g: &GridSpec) -> Result<f64> {
    if field.l2_norm() == 0.0 {
        return domain("field has zero L2 norm");
    }
    let d = g.dim() as f64;
    let c = c_dog_constant(kp);
    let ratio = field.laplacian_l2_norm() / field.l2_norm();
    Ok(c * c / (4.0 * d * d) * g.spacing().powi(4) * ratio * ratio)
}

/// `max_j |(A_h v_h)(j) − (C_DoG/D) h² Δv(hj)|` on the unnormalized samples.
pub fn taylor_consistency(field: &SmoothField, kp: &KernelPair, g: &GridSpec) -> Result<f64> {
    let v = sample(field, g)?;
    let av = apply_dog(kp, g, v.values())?;
    let h = g.spacing();
    let scale = c_dog_constant(kp) / g.dim() as f64 * h * h;
    Ok(g
        .indices()
        .zip(av.iter())
        .map(|(j, a)| {
            let x: Vec<f64> = j.coords().iter().map(|&c| c as f64 * h).collect();
            (a - field.laplacian(&x) * scale).norm()
        })
        .fold(0.0, f64::max))
}

/// Least-squares slope of `log₂ y` against `log₂ x`. `None` with fewer than
/// two points or any nonpositive value.
pub fn fit_loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 || xs.iter().chain(ys).any(|&v| v.is_nan() || v <= 0.0) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.log2()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.log2()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub h: f64,
    pub p_exact: f64,
    pub p_asym: f64,
    /// `P_exact / P_asym`; `None` when `P_asym = 0`.
    pub ratio: Option<f64>,
}

/// One sweep entry on `N` points per axis.
pub fn convergence_row(field: &SmoothField, kp: &KernelPair, points: usize) -> Result<ConvergenceRow> {
    let g = GridSpec::with_points(field.dim(), points)?;
    let tf = transfer_function(kp, &g)?;
    let p_exact = success_probability_exact(&sample(field, &g)?, &tf)?;
    let p_asym = success_probability_asymptotic(field, kp, &g)?;
    Ok(ConvergenceRow {
        n: points,
        h: g.spacing(),
        p_exact,
        p_asym,
        ratio: (p_asym > 0.0).then(|| p_exact / p_asym),
    })
}

/// Checks that `points` is a nonempty ascending list of powers of two.
pub fn validate_sweep(points: &[usize]) -> Result<()> {
    if points.is_empty() {
        return domain("sweep needs at least one grid size");
    }
    if let Some(&bad) = points.iter().find(|&&n| n < 2 || !n.is_power_of_two()) {
        return domain(format!("grid size {bad} is not a power of two >= 2"));
    }
    if points.windows(2).any(|w| w[0] >= w[1]) {
        return domain("sweep grid sizes must be strictly ascending");
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
}

pub fn convergence_study(field: &SmoothField, kp: &KernelPair, points: &[usize]) -> Result<ConvergenceStudy> {
    validate_sweep(points)?;
    let rows = points.iter().map(|&n| convergence_row(field, kp, n)).collect::<Result<_>>()?;
    Ok(ConvergenceStudy { rows })
}

impl ConvergenceStudy {
    fn slope(&self, pick: impl Fn(&ConvergenceRow) -> f64) -> Option<f64> {
        let xs: Vec<f64> = self.rows.iter().map(|r| r.n as f64).collect();
        let ys: Vec<f64> = self.rows.iter().map(pick).collect();
        fit_loglog_slope(&xs, &ys)
    }

    /// Fitted slope of `log₂ P_exact` against `log₂ N`.
    pub fn slope_exact(&self) -> Option<f64> {
        self.slope(|r| r.p_exact)
    }

    pub fn slope_asymptotic(&self) -> Option<f64> {
        self.slope(|r| r.p_asym)
    }

    pub fn final_ratio(&self) -> Option<f64> {
        self.rows.last().and_then(|r| r.ratio)
    }

    /// Writes `N,h,P_exact,P_asym,ratio`; an undefined ratio is written as `nan`.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> Result<()> {
        write_header(out, &["N", "h", "P_exact", "P_asym", "ratio"].map(String::from))?;
        for r in &self.rows {
            write_record(
                out,
                &[
                    r.n.to_string(),
                    fmt_float(r.h),
                    fmt_float(r.p_exact),
                    fmt_float(r.p_asym),
                    r.ratio.map_or_else(|| "nan".to_string(), fmt_float),
                ],
            )?;
        }
        Ok(())
    }
}

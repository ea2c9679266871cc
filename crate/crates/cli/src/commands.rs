use std::fs;
use std::path::Path;
use std::time::Instant;

use dog_lcu::analysis::{convergence_row, sample, success_probability_exact, validate_sweep, ConvergenceStudy, SampledSignal};
use dog_lcu::circuit::{
    apply_and_postselect, block_encoding_unitary, perturb_loader, perturbed_encoding_error_circulant,
    prepare_unitary, select_unitary, BlockEncoding, FullSpaceAction, LoaderUnitary, RegisterLayout,
};
use dog_lcu::grid::{flatten, unflatten};
use dog_lcu::kernel::{c_dog_constant, write_kernel_csv};
use dog_lcu::operator::apply_dog;
use dog_lcu::spectral::{operator_norm, transfer_function, write_transfer_csv};
use dog_lcu::{GridSpec, KernelPair, MultiIndex, StateVector, SUBNORMALIZATION};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::{CliError, CliResult};

/// Registers at or below this size also get dense `SEL` and `U` unitarity checks.
const DENSE_CHECK_DIM: usize = 512;
const ISOMETRY_SAMPLES: usize = 8;
const PARSEVAL_SAMPLES: usize = 100;
const PERTURBATION_MAGNITUDES: [f64; 3] = [1e-2, 1e-3, 1e-4];
const PERTURBATION_TRIALS: usize = 20;

/// Whether every check passed.
pub type Verdict = bool;

fn write_output(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|source| CliError::Write { path: dir.into(), source })?;
    }
    fs::write(path, bytes).map_err(|source| CliError::Write { path: path.into(), source })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_output(path, text.as_bytes())
}

fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> StateVector {
    let v = StateVector::from_fn(dim, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

fn basis(dim: usize, k: usize) -> StateVector {
    let mut v = StateVector::zeros(dim);
    v[k] = Complex64::new(1.0, 0.0);
    v
}

#[derive(Serialize)]
struct KernelReport {
    dim: usize,
    radius: usize,
    shape: String,
    sigma_p: f64,
    sigma_q: f64,
    stencil_len: usize,
    one_norm: f64,
    c_dog: f64,
    lambda: f64,
    lambda_check: bool,
    symmetric: bool,
}

pub fn kernel(cfg: &ExperimentConfig) -> CliResult<Verdict> {
    let kp = cfg.kernel()?;
    let mut csv = Vec::new();
    write_kernel_csv(&kp, &mut csv)?;
    write_output(&cfg.out.join("kernel.csv"), &csv)?;

    let report = KernelReport {
        dim: cfg.dim,
        radius: cfg.radius,
        shape: cfg.shape.to_string(),
        sigma_p: cfg.sigma_p,
        sigma_q: cfg.sigma_q,
        stencil_len: kp.stencil().len(),
        one_norm: kp.one_norm(),
        c_dog: c_dog_constant(&kp),
        lambda: SUBNORMALIZATION,
        lambda_check: kp.one_norm() <= SUBNORMALIZATION,
        symmetric: kp.is_symmetric(),
    };
    write_json(&cfg.out.join("kernel.json"), &report)?;
    println!("stencil     {} offsets ({} R={}, D={})", report.stencil_len, report.shape, report.radius, report.dim);
    println!("sum|c_t|    {:.6}", report.one_norm);
    println!("C_DoG       {:.6}", report.c_dog);
    println!(
        "lambda      {} ({})",
        report.lambda,
        if report.lambda_check { "sum|c_t| <= lambda" } else { "sum|c_t| exceeds lambda" }
    );
    Ok(report.lambda_check)
}

#[derive(Serialize)]
struct SpectrumReport {
    n: usize,
    file: String,
    operator_norm: f64,
    peak_index: Vec<usize>,
    mu_at_zero: f64,
    max_imaginary: f64,
}

pub fn spectrum(cfg: &ExperimentConfig) -> CliResult<Verdict> {
    let kp = cfg.kernel()?;
    let mut reports = Vec::new();
    for &n in &cfg.n_points {
        let g = cfg.grid(n)?;
        let tf = transfer_function(&kp, &g)?;
        let file = format!("transfer_n{n}.csv");
        let mut csv = Vec::new();
        write_transfer_csv(&tf, g.dim() == 1, &mut csv)?;
        write_output(&cfg.out.join(&file), &csv)?;
        let (peak, _) = tf.peak();
        let report = SpectrumReport {
            n,
            file,
            operator_norm: operator_norm(&tf),
            peak_index: unflatten(peak, &g)?.0,
            mu_at_zero: tf.mu()[0].norm(),
            max_imaginary: tf.max_imaginary(),
        };
        println!(
            "N={n:<5} ||A_h|| = {:.6} at omega = {:?}, |mu(0)| = {:.1e}  -> {}",
            report.operator_norm, report.peak_index, report.mu_at_zero, report.file
        );
        reports.push(report);
    }
    write_json(&cfg.out.join("spectrum.json"), &reports)?;
    Ok(true)
}

#[derive(Serialize)]
struct Check {
    n: usize,
    name: &'static str,
    residual: f64,
    threshold: f64,
    pass: bool,
    note: String,
}

impl Check {
    fn new(n: usize, name: &'static str, residual: f64, threshold: f64, note: impl Into<String>) -> Self {
        Self { n, name, residual, threshold, pass: residual <= threshold, note: note.into() }
    }
}

fn unitarity_check(kp: &KernelPair, g: &GridSpec, enc: &BlockEncoding, rng: &mut ChaCha8Rng, tol: f64) -> CliResult<Check> {
    let layout = enc.layout();
    let mut residual = enc.prepare().unitarity_residual();
    let note;
    if layout.total_dim() <= DENSE_CHECK_DIM {
        let gp = LoaderUnitary::for_weights(kp.p(), layout.shift_qubits())?;
        let gq = LoaderUnitary::for_weights(kp.q(), layout.shift_qubits())?;
        let sel = select_unitary(kp.stencil(), g, layout)?;
        let u = block_encoding_unitary(&prepare_unitary(&gp, &gq)?, &sel, layout)?;
        residual = residual.max(sel.unitarity_residual()).max(u.unitarity_residual());
        note = "dense P, SEL, U".to_string();
    } else {
        for _ in 0..ISOMETRY_SAMPLES {
            let x = random_state(rng, layout.total_dim());
            let y = random_state(rng, layout.total_dim());
            let (ux, uy) = (enc.act(&x), enc.act(&y));
            residual = residual.max((ux.norm() - 1.0).abs()).max((ux.dotc(&uy) - x.dotc(&y)).norm());
        }
        note = format!("dense P, U isometry on {ISOMETRY_SAMPLES} random pairs");
    }
    Ok(Check::new(g.points_per_axis(), "unitarity", residual, tol, note))
}

/// Frobenius distance between the leading block and `A_h/2`, which bounds
/// the spectral distance.
fn block_check(kp: &KernelPair, g: &GridSpec, enc: &BlockEncoding, tol: f64) -> CliResult<Check> {
    let m = g.len();
    let mut sum_sq = 0.0;
    for j in 0..m {
        let expected = apply_dog(kp, g, basis(m, j).as_slice())? / Complex64::new(SUBNORMALIZATION, 0.0);
        sum_sq += (enc.block_column(j) - expected).norm_squared();
    }
    Ok(Check::new(g.points_per_axis(), "block identity", sum_sq.sqrt(), tol, "Frobenius norm"))
}

/// `A_h` is circulant, so `max |A − A†|` is read off its first column.
fn hermiticity_check(kp: &KernelPair, g: &GridSpec, tol: f64) -> CliResult<Check> {
    let n = g.points_per_axis();
    let col = apply_dog(kp, g, basis(g.len(), 0).as_slice())?;
    let mut residual = 0.0f64;
    for j in 0..g.len() {
        let neg: Vec<usize> = unflatten(j, g)?.0.iter().map(|&k| (n - k) % n).collect();
        let mirrored = flatten(&MultiIndex(neg), g)?;
        residual = residual.max((col[j] - col[mirrored].conj()).norm());
    }
    Ok(Check::new(n, "hermiticity", residual, tol, "max |A - A^dagger|"))
}

fn parseval_check(kp: &KernelPair, g: &GridSpec, enc: &BlockEncoding, rng: &mut ChaCha8Rng, tol: f64) -> CliResult<Check> {
    let tf = transfer_function(kp, g)?;
    let mut residual = 0.0f64;
    for _ in 0..PARSEVAL_SAMPLES {
        let v = random_state(rng, g.len());
        let parseval = success_probability_exact(&SampledSignal::from_values(*g, v.iter().copied().collect())?, &tf)?;
        let direct = apply_dog(kp, g, v.as_slice())?.norm_squared() / SUBNORMALIZATION.powi(2);
        let born = apply_and_postselect(enc, enc.layout(), &v)?.success_probability;
        residual = residual.max((parseval - direct).abs()).max((parseval - born).abs()).max((direct - born).abs());
    }
    Ok(Check::new(
        g.points_per_axis(),
        "parseval",
        residual,
        tol,
        format!("Fourier, direct and Born probabilities on {PARSEVAL_SAMPLES} random states"),
    ))
}

/// Worst `block_error / 2ε_G` over randomized loader perturbations.
fn perturbation_check(kp: &KernelPair, g: &GridSpec, layout: &RegisterLayout, rng: &mut ChaCha8Rng) -> CliResult<Check> {
    let gp = LoaderUnitary::for_weights(kp.p(), layout.shift_qubits())?;
    let gq = LoaderUnitary::for_weights(kp.q(), layout.shift_qubits())?;
    let mut worst_ratio = 0.0f64;
    let mut pass = true;
    for magnitude in PERTURBATION_MAGNITUDES {
        for _ in 0..PERTURBATION_TRIALS {
            let gp_t = perturb_loader(&gp, magnitude, rng);
            let gq_t = perturb_loader(&gq, magnitude, rng);
            let r = perturbed_encoding_error_circulant(&gp, &gq, &gp_t, &gq_t, kp.stencil(), g)?;
            pass &= r.within_bound();
            worst_ratio = worst_ratio.max(r.block_error / (2.0 * r.epsilon_g));
        }
    }
    let mut check = Check::new(
        g.points_per_axis(),
        "loader precision",
        worst_ratio,
        1.0,
        format!("max block_error/(2 eps_G) over {} trials", PERTURBATION_TRIALS * PERTURBATION_MAGNITUDES.len()),
    );
    check.pass = pass;
    Ok(check)
}

pub fn verify(cfg: &ExperimentConfig) -> CliResult<Verdict> {
    let kp = cfg.kernel()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut checks = Vec::new();
    for &n in &cfg.n_points {
        let g = cfg.grid(n)?;
        let layout = RegisterLayout::for_stencil(kp.stencil(), g)?;
        if layout.total_dim() > cfg.max_dim_cap {
            return Err(CliError::Config(format!(
                "N={n}: register dimension {} exceeds max_dim_cap {}",
                layout.total_dim(),
                cfg.max_dim_cap
            )));
        }
        let enc = BlockEncoding::new(&kp, &g)?;
        let mut timed = |run: &mut dyn FnMut() -> CliResult<Check>| -> CliResult<()> {
            let start = Instant::now();
            let check = run()?;
            log::info!("N={n} {} took {:.3}s", check.name, start.elapsed().as_secs_f64());
            checks.push(check);
            Ok(())
        };
        timed(&mut || unitarity_check(&kp, &g, &enc, &mut rng, cfg.tol))?;
        timed(&mut || block_check(&kp, &g, &enc, cfg.tol))?;
        timed(&mut || hermiticity_check(&kp, &g, cfg.tol))?;
        timed(&mut || parseval_check(&kp, &g, &enc, &mut rng, cfg.tol))?;
        timed(&mut || perturbation_check(&kp, &g, &layout, &mut rng))?;
    }
    for c in &checks {
        println!(
            "{}  N={:<5} {:<17} {:.3e} (<= {:.1e})  {}",
            if c.pass { "PASS" } else { "FAIL" },
            c.n,
            c.name,
            c.residual,
            c.threshold,
            c.note
        );
    }
    write_json(&cfg.out.join("verify.json"), &checks)?;
    Ok(checks.iter().all(|c| c.pass))
}

#[derive(Serialize)]
struct BornCheck {
    n: usize,
    p_born: f64,
    deviation: f64,
    pass: bool,
}

#[derive(Serialize)]
struct SweepReport {
    field: String,
    dim: usize,
    slope_exact: Option<f64>,
    slope_asymptotic: Option<f64>,
    final_ratio: Option<f64>,
    born_checks: Vec<BornCheck>,
}

pub fn sweep(cfg: &ExperimentConfig) -> CliResult<Verdict> {
    validate_sweep(&cfg.n_points)?;
    let kp = cfg.kernel()?;
    let field = cfg.smooth_field();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start {} worker threads: {e}", cfg.threads)))?;

    let rows = pool.install(|| {
        cfg.n_points.par_iter().map(|&n| convergence_row(&field, &kp, n)).collect::<Result<Vec<_>, _>>()
    })?;
    let study = ConvergenceStudy { rows };

    let mut born_checks = Vec::new();
    for row in &study.rows {
        let g = cfg.grid(row.n)?;
        let layout = RegisterLayout::for_stencil(kp.stencil(), g)?;
        if layout.total_dim() > cfg.max_dim_cap {
            continue;
        }
        let Some(state) = sample(&field, &g)?.state() else { continue };
        let enc = BlockEncoding::new(&kp, &g)?;
        let p_born = apply_and_postselect(&enc, &layout, &state)?.success_probability;
        let deviation = (p_born - row.p_exact).abs();
        born_checks.push(BornCheck { n: row.n, p_born, deviation, pass: deviation <= cfg.tol });
    }

    let mut csv = Vec::new();
    study.write_csv(&mut csv)?;
    write_output(&cfg.out.join("convergence.csv"), &csv)?;
    let report = SweepReport {
        field: cfg.field.to_string(),
        dim: cfg.dim,
        slope_exact: study.slope_exact(),
        slope_asymptotic: study.slope_asymptotic(),
        final_ratio: study.final_ratio(),
        born_checks,
    };
    write_json(&cfg.out.join("convergence.json"), &report)?;

    for r in &study.rows {
        let ratio = r.ratio.map_or_else(|| "-".to_string(), |x| format!("{x:.6}"));
        println!("N={:<5} P_exact {:.6e}  P_asym {:.6e}  ratio {ratio}", r.n, r.p_exact, r.p_asym);
    }
    let show = |x: Option<f64>| x.map_or_else(|| "undefined".to_string(), |v| format!("{v:.4}"));
    println!("slope {}  (asymptotic {})", show(report.slope_exact), show(report.slope_asymptotic));
    let failed: Vec<usize> = report.born_checks.iter().filter(|b| !b.pass).map(|b| b.n).collect();
    println!(
        "Born cross-check on {} grid(s): {}",
        report.born_checks.len(),
        if failed.is_empty() { "PASS".to_string() } else { format!("FAIL at N = {failed:?}") }
    );
    Ok(failed.is_empty())
}

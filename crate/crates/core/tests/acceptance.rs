//! Acceptance suite: each criterion runs at its pinned tolerance and prints a
//! single PASS/FAIL line. Exits nonzero if any criterion fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use dog_lcu::analysis::{
    convergence_study, fit_loglog_slope, success_probability_bound, success_probability_exact, taylor_consistency,
    SampledSignal, SmoothField,
};
use dog_lcu::circuit::{
    apply_and_postselect, block_encoding_unitary, extract_block, perturb_loader, perturbed_encoding_error,
    prepare_unitary, select_unitary, LoaderUnitary, RegisterLayout,
};
use dog_lcu::grid::unflatten;
use dog_lcu::kernel::{c_dog_constant, isotropy_matrix};
use dog_lcu::operator::assemble_dog;
use dog_lcu::spectral::{fourier_basis_vector, operator_norm, transfer_function};
use dog_lcu::{DenseOperator, GridSpec, KernelPair, StateVector, Stencil, StencilShape};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const SIGMA_P: f64 = 0.8;
const SIGMA_Q: f64 = 1.6;

const BLOCK_TOL: f64 = 1e-10;
const BLOCK_RUNTIME: Duration = Duration::from_secs(5);
const ONE_NORM_TARGET: f64 = 0.556;
const ONE_NORM_TOL: f64 = 5e-3;
const EIGEN_RESIDUAL_TOL: f64 = 1e-10;
const NORM_MATCH_TOL: f64 = 1e-10;
const DC_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;
const AGREEMENT_TOL: f64 = 1e-12;
const RANDOM_STATES: usize = 100;
const SATURATION_TOL: f64 = 1e-12;
const PERTURBATION_TRIALS: usize = 100;
const PERTURBATION_MAGNITUDES: [f64; 3] = [1e-2, 1e-3, 1e-4];
const SLOPE_TARGET: f64 = -4.0;
const SLOPE_TOL: f64 = 0.3;
const RATIO_BAND: (f64, f64) = (0.95, 1.05);
const SWEEP_RUNTIME: Duration = Duration::from_secs(30);
const TAYLOR_MIN_ORDER: f64 = 3.7;
const ISOTROPY_TOL: f64 = 1e-12;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn kernel(dim: usize, radius: usize, shape: StencilShape) -> KernelPair {
    KernelPair::gaussian(Stencil::new(dim, radius, shape).unwrap(), SIGMA_P, SIGMA_Q).unwrap()
}

fn reference_setup() -> (KernelPair, GridSpec) {
    (kernel(1, 3, StencilShape::Hypercube), GridSpec::with_points(1, 16).unwrap())
}

fn dense_u(kp: &KernelPair, g: &GridSpec) -> (DenseOperator, RegisterLayout) {
    let layout = RegisterLayout::for_stencil(kp.stencil(), *g).unwrap();
    let gp = LoaderUnitary::for_weights(kp.p(), layout.shift_qubits()).unwrap();
    let gq = LoaderUnitary::for_weights(kp.q(), layout.shift_qubits()).unwrap();
    let p = prepare_unitary(&gp, &gq).unwrap();
    let sel = select_unitary(kp.stencil(), g, &layout).unwrap();
    (block_encoding_unitary(&p, &sel, &layout).unwrap(), layout)
}

fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> StateVector {
    let v = StateVector::from_fn(dim, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

fn block_identity() -> Outcome {
    let cases = [
        ("D=1 N=16 T={-3..3}", kernel(1, 3, StencilShape::Hypercube), GridSpec::with_points(1, 16).unwrap()),
        ("D=2 N=4 cross R=1", kernel(2, 1, StencilShape::Cross), GridSpec::with_points(2, 4).unwrap()),
    ];
    let mut details = Vec::new();
    for (name, kp, g) in cases {
        let start = Instant::now();
        let (u, layout) = dense_u(&kp, &g);
        let block = extract_block(&u, &layout).unwrap();
        let target = assemble_dog(&kp, &g).unwrap().scale(0.5);
        let residual = (&block - &target).spectral_norm();
        let elapsed = start.elapsed();
        details.push(format!("{name}: residual {residual:.2e} in {:.2}s", elapsed.as_secs_f64()));
        if residual.is_nan() || residual > BLOCK_TOL || elapsed >= BLOCK_RUNTIME {
            return Err(details.join("; "));
        }
    }
    Ok(details.join("; "))
}

fn one_norm() -> Outcome {
    let (kp, _) = reference_setup();
    let value = kp.one_norm();
    let detail = format!("sum|c_t| = {value:.6}");
    if (value - ONE_NORM_TARGET).abs() <= ONE_NORM_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn spectral_consistency() -> Outcome {
    let (kp, g) = reference_setup();
    let a = assemble_dog(&kp, &g).unwrap();
    let tf = transfer_function(&kp, &g).unwrap();
    let worst_eigen = (0..g.len())
        .map(|w| {
            let v = fourier_basis_vector(&unflatten(w, &g).unwrap(), &g).unwrap();
            (a.apply(&v) - &v * tf.mu()[w]).norm()
        })
        .fold(0.0, f64::max);
    let dense_norm = a.hermitian_eigenvalues().iter().map(|x| x.abs()).fold(0.0, f64::max);
    let norm_gap = (operator_norm(&tf) - dense_norm).abs();
    let dc = tf.mu()[0].norm();
    let herm = a.hermiticity_residual();
    let detail = format!(
        "eigen residual {worst_eigen:.2e}, norm gap {norm_gap:.2e}, |mu(0)| {dc:.2e}, hermiticity {herm:.2e}"
    );
    if worst_eigen <= EIGEN_RESIDUAL_TOL && norm_gap <= NORM_MATCH_TOL && dc <= DC_TOL && herm <= HERMITIAN_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Returns (worst three-way disagreement, worst exact − bound) over random states.
fn three_way(kp: &KernelPair, g: &GridSpec, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let tf = transfer_function(kp, g).unwrap();
    let a = assemble_dog(kp, g).unwrap();
    let (u, layout) = dense_u(kp, g);
    let bound = success_probability_bound(&tf);
    let mut worst = 0.0f64;
    let mut excess = f64::NEG_INFINITY;
    for _ in 0..RANDOM_STATES {
        let v = random_state(rng, g.len());
        let signal = SampledSignal::from_values(*g, v.iter().copied().collect()).unwrap();
        let parseval = success_probability_exact(&signal, &tf).unwrap();
        let dense = a.apply(&v).norm_squared() / 4.0;
        let born = apply_and_postselect(&u, &layout, &v).unwrap().success_probability;
        worst = worst.max((parseval - dense).abs()).max((parseval - born).abs()).max((dense - born).abs());
        excess = excess.max(parseval - bound);
    }
    (worst, excess)
}

fn success_agreement() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let (kp1, g1) = reference_setup();
    let (d1, _) = three_way(&kp1, &g1, &mut rng);
    let (d2, _) = three_way(&kernel(2, 1, StencilShape::Cross), &GridSpec::with_points(2, 4).unwrap(), &mut rng);
    let detail = format!("max disagreement D=1 N=16: {d1:.2e}, D=2 N=4: {d2:.2e}");
    if d1 <= AGREEMENT_TOL && d2 <= AGREEMENT_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bound_dominance() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xb0b);
    let (kp, g) = reference_setup();
    let (_, excess1) = three_way(&kp, &g, &mut rng);
    let g2 = GridSpec::with_points(2, 4).unwrap();
    let (_, excess2) = three_way(&kernel(2, 1, StencilShape::Cross), &g2, &mut rng);

    let tf = transfer_function(&kp, &g).unwrap();
    let (arg, _) = tf.peak();
    let mode = fourier_basis_vector(&unflatten(arg, &g).unwrap(), &g).unwrap();
    let signal = SampledSignal::from_values(g, mode.iter().copied().collect()).unwrap();
    let saturation = (success_probability_exact(&signal, &tf).unwrap() - success_probability_bound(&tf)).abs();
    let detail = format!(
        "max(P - bound) = {:.2e}, argmax-mode gap {saturation:.2e} at omega = {arg}",
        excess1.max(excess2)
    );
    if excess1 <= 0.0 && excess2 <= 0.0 && saturation <= SATURATION_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn finite_precision() -> Outcome {
    let (kp, g) = reference_setup();
    let gp = LoaderUnitary::for_weights(kp.p(), 3).unwrap();
    let gq = LoaderUnitary::for_weights(kp.q(), 3).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0xe11);
    let mut worst_ratio = 0.0f64;
    for magnitude in PERTURBATION_MAGNITUDES {
        for trial in 0..PERTURBATION_TRIALS {
            let gp_t = perturb_loader(&gp, magnitude, &mut rng);
            let gq_t = perturb_loader(&gq, magnitude, &mut rng);
            let report = perturbed_encoding_error(&gp, &gq, &gp_t, &gq_t, kp.stencil(), &g).unwrap();
            if !report.within_bound() {
                return Err(format!("magnitude {magnitude:e}, trial {trial}: {report:?}"));
            }
            worst_ratio = worst_ratio.max(report.block_error / (2.0 * report.epsilon_g));
        }
    }
    Ok(format!(
        "{} trials, max block_error / (2 eps_G) = {worst_ratio:.3}",
        PERTURBATION_TRIALS * PERTURBATION_MAGNITUDES.len()
    ))
}

fn asymptotic_scaling() -> Outcome {
    let start = Instant::now();
    let (kp, _) = reference_setup();
    let points: Vec<usize> = (4..=10).map(|k| 1usize << k).collect();
    let study = convergence_study(&SmoothField::sin1d(1), &kp, &points).unwrap();
    let elapsed = start.elapsed();
    let slope = study.slope_exact().unwrap_or(f64::NAN);
    let ratio = study.final_ratio().unwrap_or(f64::NAN);
    let detail = format!("slope {slope:.4}, ratio at N=1024 {ratio:.6}, {:.2}s", elapsed.as_secs_f64());
    if (slope - SLOPE_TARGET).abs() <= SLOPE_TOL
        && ratio >= RATIO_BAND.0
        && ratio <= RATIO_BAND.1
        && elapsed < SWEEP_RUNTIME
    {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn taylor_order() -> Outcome {
    let (kp, _) = reference_setup();
    let ns = [16usize, 32, 64, 128];
    let residuals: Vec<f64> = ns
        .iter()
        .map(|&n| taylor_consistency(&SmoothField::sin1d(1), &kp, &GridSpec::with_points(1, n).unwrap()).unwrap())
        .collect();
    let orders: Vec<f64> = residuals.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    let min_order = orders.iter().copied().fold(f64::INFINITY, f64::min);
    let xs: Vec<f64> = ns.iter().map(|&n| n as f64).collect();
    let fitted = -fit_loglog_slope(&xs, &residuals).unwrap_or(f64::NAN);
    let detail = format!("pairwise orders {orders:.3?}, fitted {fitted:.3}");
    if min_order >= TAYLOR_MIN_ORDER {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn isotropy() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for shape in [StencilShape::Hypercube, StencilShape::Cross] {
        for dim in 1..=3 {
            for radius in 1..=3 {
                let kp = kernel(dim, radius, shape);
                let target = 2.0 * c_dog_constant(&kp) / dim as f64;
                let m = isotropy_matrix(&kp);
                for a in 0..dim {
                    for b in 0..dim {
                        let expected = if a == b { target } else { 0.0 };
                        worst = worst.max((m[(a, b)] - expected).abs());
                    }
                }
                cases += 1;
            }
        }
    }
    let detail = format!("{cases} stencils, max deviation {worst:.2e}");
    if worst <= ISOTROPY_TOL {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("block-encoding identity", block_identity),
        ("coefficient one-norm", one_norm),
        ("spectral consistency", spectral_consistency),
        ("three-way success probability", success_agreement),
        ("bound dominance", bound_dominance),
        ("finite-precision bound", finite_precision),
        ("asymptotic scaling", asymptotic_scaling),
        ("taylor consistency", taylor_order),
        ("isotropy identity", isotropy),
    ];
    let mut failures = 0;
    for (name, run) in criteria {
        match run() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failures += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("acceptance: {} passed, {failures} failed", criteria.len() - failures);
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

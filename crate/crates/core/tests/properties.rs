use dog_lcu::analysis::{success_probability_exact, SampledSignal};
use dog_lcu::circuit::{
    apply_and_postselect, block_encoding_unitary, extract_block, prepare_unitary, select_unitary, BlockEncoding,
    FullSpaceAction, LoaderUnitary, RegisterLayout,
};
use dog_lcu::grid::unflatten;
use dog_lcu::operator::assemble_dog;
use dog_lcu::spectral::{operator_norm, transfer_function};
use dog_lcu::{GridSpec, KernelPair, StateVector, Stencil, StencilShape};
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const DENSE_CAP: usize = 512;

fn random_state(rng: &mut ChaCha8Rng, dim: usize) -> StateVector {
    let v = StateVector::from_fn(dim, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let norm = v.norm();
    v / Complex64::new(norm, 0.0)
}

/// Random centrally symmetric normalized weights on the stencil.
fn symmetric_weights(stencil: &Stencil, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut w = vec![0.0; stencil.len()];
    for i in 0..stencil.len() {
        let j = stencil.mirror(i);
        if j >= i {
            let x: f64 = rng.random_range(0.05..1.0);
            w[i] = x;
            w[j] = x;
        }
    }
    let total: f64 = w.iter().sum();
    w.iter().map(|x| x / total).collect()
}

#[test]
fn dense_spectrum_matches_transfer_function() {
    let kp = KernelPair::gaussian(Stencil::new(1, 3, StencilShape::Hypercube).unwrap(), 0.8, 1.6).unwrap();
    for n in [8, 16, 32] {
        let g = GridSpec::with_points(1, n).unwrap();
        let eigen = assemble_dog(&kp, &g).unwrap().hermitian_eigenvalues();
        let mut mu: Vec<f64> = transfer_function(&kp, &g).unwrap().mu().iter().map(|z| z.re).collect();
        mu.sort_by(f64::total_cmp);
        for (a, b) in eigen.iter().zip(&mu) {
            assert!((a - b).abs() < 1e-12, "N={n}: {a} vs {b}");
        }
    }
}

#[test]
fn operator_norm_matches_eigensolver_for_random_kernels() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for trial in 0..100 {
        let dim = 1 + trial % 2;
        let radius = 1 + trial % 3;
        let shape = if trial % 4 < 2 { StencilShape::Hypercube } else { StencilShape::Cross };
        let stencil = Stencil::new(dim, radius, shape).unwrap();
        let p = symmetric_weights(&stencil, &mut rng);
        let q = symmetric_weights(&stencil, &mut rng);
        let kp = KernelPair::from_weights(stencil, p, q).unwrap();
        let g = GridSpec::with_points(dim, if dim == 1 { 16 } else { 8 }).unwrap();
        let dense = assemble_dog(&kp, &g).unwrap().spectral_norm();
        let spectral = operator_norm(&transfer_function(&kp, &g).unwrap());
        assert!((dense - spectral).abs() < 1e-10, "trial {trial}: {dense} vs {spectral}");
    }
}

#[test]
fn unitarity_and_block_identity_sweep() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for dim in 1..=2 {
        for n in [4, 8, 16] {
            for radius in 1..=3 {
                for shape in [StencilShape::Hypercube, StencilShape::Cross] {
                    let stencil = Stencil::new(dim, radius, shape).unwrap();
                    let kp = KernelPair::gaussian(stencil, 0.8, 1.6).unwrap();
                    let g = GridSpec::with_points(dim, n).unwrap();
                    let target = assemble_dog(&kp, &g).unwrap().scale(0.5);
                    let enc = BlockEncoding::new(&kp, &g).unwrap();
                    let layout = *enc.layout();
                    let tag = format!("D={dim} N={n} R={radius} {shape}");

                    assert!(enc.prepare().unitarity_residual() < 1e-12, "{tag}: prepare");
                    assert!((&enc.block() - &target).max_abs() < 1e-10, "{tag}: block");

                    if layout.total_dim() <= DENSE_CAP {
                        let gp = LoaderUnitary::for_weights(kp.p(), layout.shift_qubits()).unwrap();
                        let gq = LoaderUnitary::for_weights(kp.q(), layout.shift_qubits()).unwrap();
                        let p = prepare_unitary(&gp, &gq).unwrap();
                        let sel = select_unitary(kp.stencil(), &g, &layout).unwrap();
                        assert!(sel.unitarity_residual() < 1e-12, "{tag}: select");
                        let u = block_encoding_unitary(&p, &sel, &layout).unwrap();
                        assert!(u.unitarity_residual() < 1e-12, "{tag}: U");
                        let block = extract_block(&u, &layout).unwrap();
                        assert!((&block - &target).max_abs() < 1e-10, "{tag}: dense block");
                    } else {
                        // isometry on random states: norms and inner products survive
                        let x = random_state(&mut rng, layout.total_dim());
                        let y = random_state(&mut rng, layout.total_dim());
                        let (ux, uy) = (enc.act(&x), enc.act(&y));
                        assert!((ux.norm() - 1.0).abs() < 1e-12, "{tag}: norm");
                        assert!((ux.dotc(&uy) - x.dotc(&y)).norm() < 1e-12, "{tag}: inner product");
                    }
                }
            }
        }
    }
}

#[test]
fn born_probability_matches_parseval_and_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(37);
    let kp = KernelPair::gaussian(Stencil::new(1, 3, StencilShape::Hypercube).unwrap(), 0.8, 1.6).unwrap();
    let g = GridSpec::with_points(1, 32).unwrap();
    let a = assemble_dog(&kp, &g).unwrap();
    let tf = transfer_function(&kp, &g).unwrap();
    let enc = BlockEncoding::new(&kp, &g).unwrap();
    for _ in 0..100 {
        let v = random_state(&mut rng, g.len());
        let post = apply_and_postselect(&enc, enc.layout(), &v).unwrap();
        let signal = SampledSignal::from_values(g, v.iter().copied().collect()).unwrap();
        let parseval = success_probability_exact(&signal, &tf).unwrap();
        let dense = a.apply(&v).norm_squared() / 4.0;
        assert!((post.success_probability - parseval).abs() < 1e-12);
        assert!((dense - parseval).abs() < 1e-12);
        let state = post.state.expect("nonzero success probability");
        let expected = a.apply(&v) / Complex64::new(a.apply(&v).norm(), 0.0);
        assert!((state - expected).norm() < 1e-10);
    }
}

#[test]
fn loaders_prepare_square_roots() {
    let kp = KernelPair::gaussian(Stencil::new(2, 1, StencilShape::Hypercube).unwrap(), 0.8, 1.6).unwrap();
    let layout = RegisterLayout::for_stencil(kp.stencil(), GridSpec::with_points(2, 4).unwrap()).unwrap();
    let gp = LoaderUnitary::for_weights(kp.p(), layout.shift_qubits()).unwrap();
    let col = gp.first_column();
    for (i, &w) in kp.p().iter().enumerate() {
        assert!((col[i] - Complex64::new(w.sqrt(), 0.0)).norm() < 1e-14);
    }
    assert!(col.iter().skip(kp.p().len()).all(|z| z.norm() < 1e-14));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn transfer_function_is_conjugate_symmetric(
        dim in 1usize..=2,
        radius in 1usize..=3,
        cross in any::<bool>(),
        log_n in 3u32..=5,
        sp in 0.4f64..1.5,
        ratio in 1.1f64..3.0,
    ) {
        let shape = if cross { StencilShape::Cross } else { StencilShape::Hypercube };
        let kp = KernelPair::gaussian(Stencil::new(dim, radius, shape).unwrap(), sp, sp * ratio).unwrap();
        let g = GridSpec::new(dim, log_n).unwrap();
        let tf = transfer_function(&kp, &g).unwrap();
        let n = g.points_per_axis();
        for w in 0..g.len() {
            let omega = unflatten(w, &g).unwrap();
            let neg: Vec<usize> = omega.0.iter().map(|&k| (n - k) % n).collect();
            let mirrored = dog_lcu::grid::flatten(&dog_lcu::MultiIndex(neg), &g).unwrap();
            prop_assert!((tf.mu()[w] - tf.mu()[mirrored].conj()).norm() < 1e-12);
            prop_assert!(tf.mu()[w].im.abs() < 1e-12);
        }
    }
}

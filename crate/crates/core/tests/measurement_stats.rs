mod common;

use common::*;
use cqe_core::cqe::InitialState;
use cqe_core::measurement::{derive_seed, operator_variance};
use cqe_core::{build_tavis_cummings, Backend, GammaOp, Observable, TcParams};

fn setup() -> (cqe_core::Hamiltonian, cqe_core::StateVector) {
    let h = build_tavis_cummings(&TcParams::default().with_coupling(1.0)).unwrap();
    let psi = InitialState::TcProduct.build(h.basis()).unwrap();
    (h, psi)
}

fn estimates(
    obs: &Observable<'_>,
    psi: &cqe_core::StateVector,
    shots: u64,
    n: u64,
) -> Vec<cqe_core::Complex64> {
    (0..n)
        .map(|i| {
            Backend::sampled(shots, derive_seed(99, i))
                .unwrap()
                .expect(obs, psi)
                .unwrap()
        })
        .collect()
}

#[test]
fn estimates_are_unbiased_with_model_variance() {
    let (h, psi) = setup();
    let obs = Observable::Hamiltonian(&h);
    let exact = h.energy(&psi).unwrap();
    let var = operator_variance(&obs, &psi).unwrap() / 1000.0;
    let xs: Vec<f64> = estimates(&obs, &psi, 1000, 1000)
        .iter()
        .map(|z| z.re)
        .collect();
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let sample_var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
    let stderr = (var / xs.len() as f64).sqrt();
    assert!(
        (mean - exact).abs() <= 3.0 * stderr,
        "bias {} vs stderr {stderr}",
        mean - exact
    );
    assert!(
        (sample_var / var - 1.0).abs() <= 0.2,
        "variance ratio {}",
        sample_var / var
    );
}

#[test]
fn complex_estimates_split_the_variance() {
    let (_, psi) = setup();
    // a non-Hermitian coupling term
    let op = GammaOp::new(vec![1], vec![0], vec![], vec![0]).unwrap();
    let obs = Observable::Gamma(&op);
    let exact = psi.inner(&op.apply(&psi).unwrap()).unwrap();
    let var = operator_variance(&obs, &psi).unwrap() / 500.0;
    let zs = estimates(&obs, &psi, 500, 2000);
    let n = zs.len() as f64;
    let var_re = zs.iter().map(|z| (z.re - exact.re).powi(2)).sum::<f64>() / n;
    let var_im = zs.iter().map(|z| (z.im - exact.im).powi(2)).sum::<f64>() / n;
    assert!((var_re / (0.5 * var) - 1.0).abs() <= 0.2);
    assert!((var_im / (0.5 * var) - 1.0).abs() <= 0.2);
}

#[test]
fn mean_error_scales_as_inverse_root_shots() {
    let (h, psi) = setup();
    let obs = Observable::Hamiltonian(&h);
    let exact = h.energy(&psi).unwrap();
    let shots = [100u64, 1_000, 10_000, 100_000];
    let x: Vec<f64> = shots.iter().map(|&s| (s as f64).ln()).collect();
    let y: Vec<f64> = shots
        .iter()
        .map(|&s| {
            let errs = estimates(&obs, &psi, s, 100);
            (errs.iter().map(|z| (z.re - exact).abs()).sum::<f64>() / 100.0).ln()
        })
        .collect();
    let (slope, _) = fit(&x, &y);
    assert!((slope + 0.5).abs() <= 0.1, "slope {slope}");
}

#[test]
fn eigenstate_observables_carry_no_noise() {
    let h = build_tavis_cummings(&TcParams::default().with_coupling(0.4)).unwrap();
    let ground = cqe_core::diagonalize(&h, 1).unwrap();
    let psi = ground.ground_state();
    let mut backend = Backend::sampled(1, 5).unwrap();
    let e = backend
        .expect_real(&Observable::Hamiltonian(&h), psi)
        .unwrap();
    assert!((e - ground.ground_energy()).abs() <= 1e-6);
}

//! Test-side oracles built without the library's operator machinery.

#![allow(dead_code)]

use std::sync::Arc;

use cqe_core::{Complex64, FockBasis, GammaOp, Hamiltonian, StateVector, TcParams};
use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Sends one basis configuration through
/// `a†_{i1} .. a†_{iq} a_{kr} .. a_{k1} b†.. b..`, rightmost operator first.
/// `None` means the configuration was annihilated.
fn act(
    op: &GammaOp,
    mut occ: u64,
    mut bosons: Vec<usize>,
    n_max: usize,
) -> Option<(f64, u64, Vec<usize>)> {
    let mut amp = 1.0;
    for &m in op.boson_annihilate_modes().iter().rev() {
        if bosons[m] == 0 {
            return None;
        }
        amp *= (bosons[m] as f64).sqrt();
        bosons[m] -= 1;
    }
    for &m in op.boson_create_modes().iter().rev() {
        if bosons[m] == n_max {
            return None;
        }
        bosons[m] += 1;
        amp *= (bosons[m] as f64).sqrt();
    }
    let parity = |occ: u64, p: usize| {
        if (occ & ((1u64 << p) - 1)).count_ones() % 2 == 1 {
            -1.0
        } else {
            1.0
        }
    };
    for &p in op.fermion_annihilate_indices() {
        if occ >> p & 1 == 0 {
            return None;
        }
        amp *= parity(occ, p);
        occ &= !(1 << p);
    }
    for &p in op.fermion_create_indices().iter().rev() {
        if occ >> p & 1 == 1 {
            return None;
        }
        amp *= parity(occ, p);
        occ |= 1 << p;
    }
    Some((amp, occ, bosons))
}

/// Dense matrix of `op`, column by column from basis configurations.
pub fn gamma_matrix(op: &GammaOp, basis: &Arc<FockBasis>) -> DMatrix<Complex64> {
    let dim = basis.dim();
    let mut m = DMatrix::zeros(dim, dim);
    for col in 0..dim {
        let (occ, bosons) = basis.occupation_of(col);
        if let Some((amp, occ2, b2)) = act(op, occ, bosons, basis.n_boson_max()) {
            if let Ok(row) = basis.index_of(occ2, &b2) {
                m[(row, col)] += c(amp, 0.0);
            }
        }
    }
    m
}

pub fn hamiltonian_matrix(h: &Hamiltonian) -> DMatrix<Complex64> {
    let dim = h.basis().dim();
    h.terms()
        .iter()
        .fold(DMatrix::zeros(dim, dim), |acc, (coef, op)| {
            acc + gamma_matrix(op, h.basis()) * *coef
        })
}

pub fn column(psi: &StateVector) -> nalgebra::DVector<Complex64> {
    nalgebra::DVector::from_column_slice(psi.amplitudes())
}

/// `<ψ|M|ψ>` with dense linear algebra.
pub fn dense_expect(m: &DMatrix<Complex64>, psi: &StateVector) -> Complex64 {
    let v = column(psi);
    v.dotc(&(m * &v))
}

pub fn random_state(rng: &mut ChaCha8Rng, basis: &Arc<FockBasis>) -> StateVector {
    let amps = (0..basis.dim())
        .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    StateVector::from_amplitudes(basis, amps)
        .unwrap()
        .normalize()
        .unwrap()
}

fn random_subset(rng: &mut ChaCha8Rng, modes: usize, max_len: usize) -> Vec<usize> {
    let mut all: Vec<usize> = (0..modes).collect();
    let len = rng.random_range(0..=max_len.min(modes));
    let mut out = Vec::with_capacity(len);
    for _ in 0..len {
        let k = rng.random_range(0..all.len());
        out.push(all.swap_remove(k));
    }
    out
}

/// Random non-identity Γ with at most two operators per string.
pub fn random_gamma(rng: &mut ChaCha8Rng, fermion_modes: usize, boson_modes: usize) -> GammaOp {
    loop {
        let fc = random_subset(rng, fermion_modes, 2);
        let fa = random_subset(rng, fermion_modes, 2);
        let mut bc = Vec::new();
        let mut ba = Vec::new();
        if boson_modes > 0 {
            for _ in 0..rng.random_range(0..=2) {
                bc.push(rng.random_range(0..boson_modes));
            }
            for _ in 0..rng.random_range(0..=2) {
                ba.push(rng.random_range(0..boson_modes));
            }
        }
        let op = GammaOp::new(fc, fa, bc, ba).unwrap();
        if !op.is_identity() {
            return op;
        }
    }
}

/// Random Hermitian fermion-boson Hamiltonian on the full Fock space, redrawn
/// until it is not a multiple of the identity.
pub fn random_hamiltonian(rng: &mut ChaCha8Rng, fermion_modes: usize, n_max: usize) -> Hamiltonian {
    let basis = FockBasis::builder(fermion_modes)
        .n_max(n_max)
        .build()
        .unwrap();
    loop {
        let h = draw_hamiltonian(rng, &basis);
        let m = hamiltonian_matrix(&h);
        let diag = m[(0, 0)];
        let scalar = m.iter().enumerate().all(|(k, x)| {
            let (i, j) = (k % m.nrows(), k / m.nrows());
            (x - if i == j { diag } else { c(0.0, 0.0) }).norm() < 1e-3
        });
        if !scalar {
            return h;
        }
    }
}

fn draw_hamiltonian(rng: &mut ChaCha8Rng, basis: &Arc<FockBasis>) -> Hamiltonian {
    let fermion_modes = basis.n_fermion_modes();
    let mut terms = Vec::new();
    for _ in 0..rng.random_range(3..=6) {
        let op = random_gamma(rng, fermion_modes, 1);
        let re: f64 = rng.random_range(-1.0..1.0);
        let im: f64 = rng.random_range(-1.0..1.0);
        if op.is_self_adjoint() {
            terms.push((c(re, 0.0), op));
        } else {
            terms.push((c(re, im), op.adjoint()));
            terms.push((c(re, -im), op));
        }
    }
    Hamiltonian::new(basis, terms).unwrap()
}

/// Lowest energy of the TC model within excitation sector `m`, from the
/// permutation-symmetric states `|k up, m-k photons>`. `None` when the
/// truncation leaves the sector empty.
pub fn dicke_sector(p: &TcParams, m: usize) -> Option<(f64, f64)> {
    let n = p.n_sites;
    let ks: Vec<usize> = (m.saturating_sub(p.n_max)..=m.min(n)).collect();
    if ks.is_empty() {
        return None;
    }
    let d = ks.len();
    let mut h = DMatrix::<f64>::zeros(d, d);
    for (i, &k) in ks.iter().enumerate() {
        h[(i, i)] = p.omega_f * k as f64 + p.omega_b * (m - k) as f64;
        if i + 1 < d {
            let photons = (m - k) as f64;
            let v = p.g_c * photons.sqrt() * (((k + 1) * (n - k)) as f64).sqrt();
            h[(i, i + 1)] = v;
            h[(i + 1, i)] = v;
        }
    }
    let eig = SymmetricEigen::new(h);
    let (j, e) = eig
        .eigenvalues
        .iter()
        .copied()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    let v = eig.eigenvectors.column(j);
    let mean_up: f64 = ks
        .iter()
        .enumerate()
        .map(|(i, &k)| v[i] * v[i] * k as f64)
        .sum();
    Some((e, 1.0 - mean_up / n as f64))
}

/// Ground energy, lower-orbital population per site and sector of the TC model.
pub fn dicke_ground(p: &TcParams) -> (f64, f64, usize) {
    (0..=p.n_sites + p.n_max)
        .filter_map(|m| dicke_sector(p, m).map(|(e, pop)| (e, pop, m)))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .unwrap()
}

/// Sector changes of the Dicke ground state, located by bisection on `[lo, hi]`.
pub fn dicke_crossings(
    p: &TcParams,
    lo: f64,
    hi: f64,
    scan: usize,
    tol: f64,
) -> Vec<(f64, usize, usize)> {
    let sector = |g: f64| dicke_ground(&p.with_coupling(g)).2;
    let mut out = Vec::new();
    let step = (hi - lo) / scan as f64;
    for i in 0..scan {
        let (mut a, mut b) = (lo + step * i as f64, lo + step * (i + 1) as f64);
        let (sa, sb) = (sector(a), sector(b));
        if sa == sb {
            continue;
        }
        while b - a > tol {
            let mid = 0.5 * (a + b);
            if sector(mid) == sa {
                a = mid;
            } else {
                b = mid;
            }
        }
        out.push((0.5 * (a + b), sa, sb));
    }
    out
}

/// Least-squares slope and intercept.
pub fn fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

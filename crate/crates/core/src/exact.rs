//! Dense exact diagonalization used as the reference oracle.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use nalgebra::SymmetricEigen;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::StateVector;
use crate::hamiltonian::{
    build_tavis_cummings, excitation_labels, format_terms, lower_mode, Hamiltonian, TcParams,
};

pub const DEFAULT_DENSE_CAP: usize = 4096;
/// Eigenvalues closer than this are reported as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-9;
const RESIDUAL_TOL: f64 = 1e-9;
const ORTHONORMALITY_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Spectrum {
    pub energies: Vec<f64>,
    pub states: Vec<StateVector>,
    pub hamiltonian_hash: u64,
    pub n_max: usize,
}

impl Spectrum {
    pub fn ground_energy(&self) -> f64 {
        self.energies[0]
    }

    pub fn ground_state(&self) -> &StateVector {
        &self.states[0]
    }

    /// True when the first excited level lies within [`DEGENERACY_TOL`] of the ground level.
    pub fn ground_degenerate(&self) -> bool {
        self.energies.len() > 1 && self.energies[1] - self.energies[0] <= DEGENERACY_TOL
    }
}

fn hamiltonian_hash(h: &Hamiltonian) -> u64 {
    let mut hasher = DefaultHasher::new();
    format_terms(h.terms()).hash(&mut hasher);
    h.basis().dim().hash(&mut hasher);
    h.basis().n_boson_max().hash(&mut hasher);
    hasher.finish()
}

pub fn diagonalize(h: &Hamiltonian, k: usize) -> Result<Spectrum> {
    diagonalize_with_cap(h, k, DEFAULT_DENSE_CAP)
}

/// Lowest `k` eigenpairs (all of them when `k` exceeds the dimension).
pub fn diagonalize_with_cap(h: &Hamiltonian, k: usize, cap: usize) -> Result<Spectrum> {
    let basis = h.basis();
    let dim = basis.dim();
    if dim > cap {
        return Err(Error::DimensionCap { dim, cap });
    }
    let dense = h.matrix().to_dense();
    let eig = SymmetricEigen::new(dense.clone());
    let mut order: Vec<usize> = (0..dim).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    order.truncate(k.min(dim));

    let mut energies = Vec::with_capacity(order.len());
    let mut states = Vec::with_capacity(order.len());
    for &idx in &order {
        let e = eig.eigenvalues[idx];
        let col = eig.eigenvectors.column(idx);
        let mut amps: Vec<Complex64> = col.iter().copied().collect();
        // fix the global phase: largest component real and positive
        let (_, pivot) = amps.iter().enumerate().fold((0.0, 0), |(m, j), (i, a)| {
            if a.norm() > m + 1e-12 {
                (a.norm(), i)
            } else {
                (m, j)
            }
        });
        let phase = amps[pivot].conj() / amps[pivot].norm();
        amps.iter_mut().for_each(|a| *a *= phase);
        let state = StateVector::from_amplitudes(basis, amps)?.normalize()?;

        let mut resid = h.apply(&state)?;
        resid.axpy(Complex64::new(-e, 0.0), &state)?;
        if resid.norm() > RESIDUAL_TOL {
            return Err(Error::NonFinite(format!(
                "eigenpair residual {:e} above tolerance",
                resid.norm()
            )));
        }
        energies.push(e);
        states.push(state);
    }
    for i in 0..states.len() {
        for j in 0..=i {
            let overlap = states[i].inner(&states[j])?;
            let target = if i == j { 1.0 } else { 0.0 };
            if (overlap - target).norm() > ORTHONORMALITY_TOL {
                return Err(Error::NonFinite(format!(
                    "eigenvectors {i}, {j} not orthonormal"
                )));
            }
        }
    }
    Ok(Spectrum {
        energies,
        states,
        hamiltonian_hash: hamiltonian_hash(h),
        n_max: basis.n_boson_max(),
    })
}

/// `<a†_{i−} a_{i−}>` per site of a TC-layout state.
pub fn site_populations(psi: &StateVector, n_sites: usize) -> Vec<f64> {
    let basis = psi.basis();
    let mut pops = vec![0.0; n_sites];
    for (p, a) in psi.amplitudes().iter().enumerate() {
        let w = a.norm_sqr();
        if w == 0.0 {
            continue;
        }
        let (occ, _) = basis.occupation_of(p);
        for (i, pop) in pops.iter_mut().enumerate() {
            if occ >> lower_mode(i) & 1 == 1 {
                *pop += w;
            }
        }
    }
    pops
}

#[derive(Debug, Clone, PartialEq)]
pub struct Populations {
    pub per_site: Vec<f64>,
    /// Set when the ground level is degenerate, so the split between
    /// degenerate states (and hence the populations) is convention-dependent.
    pub degenerate: bool,
}

impl Populations {
    pub fn mean(&self) -> f64 {
        self.per_site.iter().sum::<f64>() / self.per_site.len() as f64
    }
}

pub fn ground_populations(s: &Spectrum, n_sites: usize) -> Populations {
    Populations {
        per_site: site_populations(s.ground_state(), n_sites),
        degenerate: s.ground_degenerate(),
    }
}

/// `<M>` of a TC-layout state.
pub fn mean_excitation(psi: &StateVector, n_sites: usize) -> f64 {
    let labels = excitation_labels(psi.basis(), n_sites);
    psi.amplitudes()
        .iter()
        .zip(labels)
        .map(|(a, m)| a.norm_sqr() * m as f64)
        .sum()
}

/// Weight of `psi` in each excitation sector `M = 0, 1, ..`.
pub fn sector_weights(psi: &StateVector, labels: &[usize]) -> Vec<f64> {
    let n = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut w = vec![0.0; n];
    for (a, &m) in psi.amplitudes().iter().zip(labels) {
        w[m] += a.norm_sqr();
    }
    w
}

/// Rounded `<M>` of the exact TC ground state at `params`.
pub fn ground_sector(params: &TcParams) -> Result<usize> {
    let h = build_tavis_cummings(params)?;
    let s = diagonalize(&h, 1)?;
    Ok(mean_excitation(s.ground_state(), params.n_sites).round() as usize)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub g: f64,
    pub sector_below: usize,
    pub sector_above: usize,
}

/// Bisects on the ground-state sector label until the bracket is narrower than `tol`.
pub fn find_crossing(params: &TcParams, g_lo: f64, g_hi: f64, tol: f64) -> Result<Crossing> {
    let (mut lo, mut hi) = if g_lo <= g_hi {
        (g_lo, g_hi)
    } else {
        (g_hi, g_lo)
    };
    let sector_lo = ground_sector(&params.with_coupling(lo))?;
    let sector_hi = ground_sector(&params.with_coupling(hi))?;
    if sector_lo == sector_hi {
        return Err(Error::NoCrossing { lo, hi });
    }
    let mut below = sector_lo;
    let mut above = sector_hi;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let s = ground_sector(&params.with_coupling(mid))?;
        if s == sector_lo {
            lo = mid;
            below = s;
        } else {
            hi = mid;
            above = s;
        }
    }
    Ok(Crossing {
        g: 0.5 * (lo + hi),
        sector_below: below,
        sector_above: above,
    })
}

/// Scans `[g_lo, g_hi]` on `scan_points` intervals and bisects each sector change.
pub fn find_crossings(
    params: &TcParams,
    g_lo: f64,
    g_hi: f64,
    scan_points: usize,
    tol: f64,
) -> Result<Vec<Crossing>> {
    if !(g_hi > g_lo) || scan_points == 0 {
        return Ok(Vec::new());
    }
    let step = (g_hi - g_lo) / scan_points as f64;
    let grid: Vec<f64> = (0..=scan_points).map(|i| g_lo + step * i as f64).collect();
    let sectors = grid
        .iter()
        .map(|&g| ground_sector(&params.with_coupling(g)))
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::new();
    for i in 0..scan_points {
        if sectors[i] != sectors[i + 1] {
            out.push(find_crossing(params, grid[i], grid[i + 1], tol)?);
        }
    }
    Ok(out)
}

//! Tavis-Cummings model: `N` two-level fermionic sites coupled to one
//! boson mode under the rotating-wave approximation.
//!
//! Site `i` uses fermionic mode `2i` for its lower orbital and `2i + 1` for
//! its upper orbital; the basis keeps exactly one fermion per site.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::{FockBasis, OccupationFilter};
use crate::hamiltonian::Hamiltonian;
use crate::operator::{GammaOp, SparseOperator};

pub fn lower_mode(site: usize) -> usize {
    2 * site
}

pub fn upper_mode(site: usize) -> usize {
    2 * site + 1
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TcParams {
    pub n_sites: usize,
    pub omega_b: f64,
    pub omega_f: f64,
    pub g_c: f64,
    pub n_max: usize,
}

impl Default for TcParams {
    fn default() -> Self {
        Self {
            n_sites: 3,
            omega_b: 2.0,
            omega_f: 0.5,
            g_c: 0.0,
            n_max: 4,
        }
    }
}

impl TcParams {
    pub fn with_coupling(self, g_c: f64) -> Self {
        Self { g_c, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_sites == 0 {
            return Err(Error::Config("n_sites must be at least 1".into()));
        }
        if self.n_max == 0 {
            return Err(Error::Config(
                "n_max must be at least 1: the coupling needs a boson space".into(),
            ));
        }
        for (name, v) in [
            ("omega_b", self.omega_b),
            ("omega_f", self.omega_f),
            ("g_c", self.g_c),
        ] {
            if !v.is_finite() {
                return Err(Error::Config(format!("{name} must be finite")));
            }
        }
        Ok(())
    }

    pub fn basis(&self) -> Result<Arc<FockBasis>> {
        self.validate()?;
        FockBasis::new(
            2 * self.n_sites,
            self.n_max,
            OccupationFilter::OnePerPair {
                n_sites: self.n_sites,
            },
        )
    }
}

pub fn build_tavis_cummings(p: &TcParams) -> Result<Hamiltonian> {
    let basis = p.basis()?;
    let c = |x: f64| Complex64::new(x, 0.0);
    let mut terms = vec![(c(p.omega_b), GammaOp::boson_number(0))];
    for i in 0..p.n_sites {
        let (lo, hi) = (lower_mode(i), upper_mode(i));
        terms.push((c(p.omega_f), GammaOp::fermion_number(hi)));
        terms.push((c(p.g_c), GammaOp::new(vec![hi], vec![lo], vec![], vec![0])?));
        terms.push((c(p.g_c), GammaOp::new(vec![lo], vec![hi], vec![0], vec![])?));
    }
    Hamiltonian::new(&basis, terms)
}

/// Excitation number `M = b†b + Σ_i a†_{i+} a_{i+}` of every basis state.
pub fn excitation_labels(basis: &FockBasis, n_sites: usize) -> Vec<usize> {
    (0..basis.dim())
        .map(|p| {
            let (occ, bosons) = basis.occupation_of(p);
            let excited = (0..n_sites)
                .filter(|&i| occ >> upper_mode(i) & 1 == 1)
                .count();
            bosons[0] + excited
        })
        .collect()
}

pub fn excitation_number(basis: &Arc<FockBasis>, n_sites: usize) -> SparseOperator {
    let t = excitation_labels(basis, n_sites)
        .into_iter()
        .enumerate()
        .map(|(p, m)| (p, p, Complex64::new(m as f64, 0.0)))
        .collect();
    SparseOperator::from_triplets(basis, t)
}

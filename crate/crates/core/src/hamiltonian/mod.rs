//! Mixed fermion-boson Hamiltonians as weighted sums of Γ strings.

mod io;
mod tavis_cummings;

use std::collections::HashMap;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::{same_basis, FockBasis, StateVector};
use crate::operator::{GammaOp, SparseOperator};

pub use io::{format_terms, parse_terms};
pub use tavis_cummings::{
    build_tavis_cummings, excitation_labels, excitation_number, lower_mode, upper_mode, TcParams,
};

/// Hermiticity tolerance on `‖H − H†‖_F`.
pub const HERMITICITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone)]
pub struct Hamiltonian {
    basis: Arc<FockBasis>,
    terms: Vec<(Complex64, GammaOp)>,
    matrix: SparseOperator,
}

impl Hamiltonian {
    /// Merges duplicate Γ strings (first occurrence keeps its position),
    /// realizes the matrix and rejects non-Hermitian term lists.
    pub fn new(basis: &Arc<FockBasis>, terms: Vec<(Complex64, GammaOp)>) -> Result<Self> {
        let mut merged: Vec<(Complex64, GammaOp)> = Vec::with_capacity(terms.len());
        let mut seen: HashMap<GammaOp, usize> = HashMap::new();
        for (c, op) in terms {
            op.validate(basis)?;
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::NonFinite(format!("coefficient of {op}")));
            }
            match seen.get(&op) {
                Some(&k) => merged[k].0 += c,
                None => {
                    seen.insert(op.clone(), merged.len());
                    merged.push((c, op));
                }
            }
        }

        let mats = merged
            .iter()
            .map(|(_, op)| SparseOperator::from_gamma(op, basis))
            .collect::<Result<Vec<_>>>()?;
        let matrix = SparseOperator::linear_combination(
            basis,
            merged.iter().map(|(c, _)| *c).zip(mats.iter()),
        )?;
        let residual = matrix.hermiticity_residual();
        if residual > HERMITICITY_TOL {
            return Err(Error::NotHermitian(residual));
        }
        Ok(Self {
            basis: basis.clone(),
            terms: merged,
            matrix,
        })
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn terms(&self) -> &[(Complex64, GammaOp)] {
        &self.terms
    }

    pub fn matrix(&self) -> &SparseOperator {
        &self.matrix
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        self.matrix.apply(psi)
    }

    /// `<ψ|H|ψ>` for normalized `ψ`.
    pub fn energy(&self, psi: &StateVector) -> Result<f64> {
        Ok(psi.inner(&self.apply(psi)?)?.re)
    }

    /// `<H²> − <H>²`, clamped at zero.
    pub fn variance(&self, psi: &StateVector) -> Result<f64> {
        let h_psi = self.apply(psi)?;
        let e = psi.inner(&h_psi)?.re;
        Ok((h_psi.norm_sqr() - e * e).max(0.0))
    }

    /// `Σ h <Γ>` evaluated term by term with Γ applications.
    pub fn term_energy(&self, psi: &StateVector) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, op) in &self.terms {
            acc += c * psi.inner(&op.apply(psi)?)?;
        }
        Ok(acc)
    }

    /// `Σ h <Γ H>`, the contracted left-hand side whose value minus `E²`
    /// equals the energy variance.
    pub fn contracted_second_moment(&self, psi: &StateVector) -> Result<Complex64> {
        let h_psi = self.apply(psi)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (c, op) in &self.terms {
            acc += c * psi.inner(&op.apply(&h_psi)?)?;
        }
        Ok(acc)
    }

    pub fn same_basis(&self, psi: &StateVector) -> bool {
        same_basis(&self.basis, psi.basis())
    }
}

pub fn build_hamiltonian(
    basis: &Arc<FockBasis>,
    terms: Vec<(Complex64, GammaOp)>,
) -> Result<Hamiltonian> {
    Hamiltonian::new(basis, terms)
}

pub fn energy(h: &Hamiltonian, psi: &StateVector) -> Result<f64> {
    h.energy(psi)
}

pub fn variance(h: &Hamiltonian, psi: &StateVector) -> Result<f64> {
    h.variance(psi)
}

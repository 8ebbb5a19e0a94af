//! Action of `exp(η X)` on a state by a sub-stepped Taylor series.
//!
//! The step is split so that `|η| ‖X‖₁ / steps ≤ 1`; each sub-step sums the
//! series until the last increment falls below `tol / steps` relative to the
//! partial sum. The result is renormalized. Anti-Hermitian generators must
//! preserve the norm to within `10 tol`, which is checked.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::{same_basis, StateVector};
use crate::operator::{SparseOperator, Symmetry};

pub const DEFAULT_MAX_TERMS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpOptions {
    pub tol: f64,
    pub max_terms: usize,
}

impl Default for ExpOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_terms: DEFAULT_MAX_TERMS,
        }
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

/// Normalized `exp(η X) ψ`.
pub fn apply_exp(x: &SparseOperator, eta: f64, psi: &StateVector, tol: f64) -> Result<StateVector> {
    apply_exp_with(
        x,
        eta,
        psi,
        ExpOptions {
            tol,
            ..ExpOptions::default()
        },
    )
    .map(|(s, _)| s)
}

/// Returns the normalized state and the norm ratio `‖exp(ηX)ψ‖ / ‖ψ‖`
/// observed before renormalization.
pub fn apply_exp_with(
    x: &SparseOperator,
    eta: f64,
    psi: &StateVector,
    opts: ExpOptions,
) -> Result<(StateVector, f64)> {
    if !same_basis(x.basis(), psi.basis()) {
        return Err(Error::BasisMismatch);
    }
    if !(opts.tol > 0.0) {
        return Err(Error::Config(format!(
            "exponential tolerance must be positive, got {}",
            opts.tol
        )));
    }
    if !eta.is_finite() {
        return Err(Error::NonFinite("exponential step size".into()));
    }
    let in_norm = psi.norm();
    if eta == 0.0 || x.nnz() == 0 {
        return Ok((psi.normalize()?, 1.0));
    }

    let t = eta.abs() * x.one_norm();
    let steps = t.ceil().max(1.0) as usize;
    let h = eta / steps as f64;
    let step_tol = opts.tol / steps as f64;

    let dim = psi.dim();
    let mut acc = psi.amplitudes().to_vec();
    let mut term = vec![Complex64::new(0.0, 0.0); dim];
    let mut next = vec![Complex64::new(0.0, 0.0); dim];
    for _ in 0..steps {
        term.copy_from_slice(&acc);
        let mut converged = false;
        let mut last = f64::INFINITY;
        for k in 1..=opts.max_terms {
            x.apply_slice(&term, &mut next);
            let scale = h / k as f64;
            for (t, n) in term.iter_mut().zip(&next) {
                *t = n * scale;
            }
            for (a, t) in acc.iter_mut().zip(&term) {
                *a += t;
            }
            last = norm(&term);
            let acc_norm = norm(&acc);
            if !last.is_finite() || !acc_norm.is_finite() {
                return Err(Error::NonFinite("exponential series".into()));
            }
            if last <= step_tol * acc_norm {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::ExpNotConverged {
                last_increment: last,
            });
        }
    }

    let out_norm = norm(&acc);
    let ratio = out_norm / in_norm;
    if x.symmetry() == Symmetry::AntiHermitian {
        let drift = (ratio - 1.0).abs();
        if drift > 10.0 * opts.tol {
            return Err(Error::ExpNormDrift { drift });
        }
    }
    let mut out = StateVector::from_raw(psi.basis().clone(), acc);
    out.normalize_in_place()?;
    Ok((out, ratio))
}

//! Residual expectations `<ψ|[Γ, H]|ψ>` and `<ψ|{Γ, H − E}|ψ>`, evaluated
//! with operator-on-vector applications only.

use num_complex::Complex64;

use crate::error::Result;
use crate::fockspace::StateVector;
use crate::hamiltonian::Hamiltonian;
use crate::operator::GammaOp;

/// `<ψ|Γ H − H Γ|ψ>`, using `<ψ|H Γ ψ> = <Hψ|Γψ>`.
pub fn commutator_expect(gamma: &GammaOp, h: &Hamiltonian, psi: &StateVector) -> Result<Complex64> {
    let h_psi = h.apply(psi)?;
    let gamma_h_psi = gamma.apply(&h_psi)?;
    let gamma_psi = gamma.apply(psi)?;
    Ok(psi.inner(&gamma_h_psi)? - h_psi.inner(&gamma_psi)?)
}

/// `<ψ|Γ (H − E) + (H − E) Γ|ψ>`.
pub fn anticommutator_expect(
    gamma: &GammaOp,
    h: &Hamiltonian,
    e: f64,
    psi: &StateVector,
) -> Result<Complex64> {
    let mut shifted = h.apply(psi)?;
    shifted.axpy(Complex64::new(-e, 0.0), psi)?;
    let gamma_shifted = gamma.apply(&shifted)?;
    let gamma_psi = gamma.apply(psi)?;
    Ok(psi.inner(&gamma_shifted)? + shifted.inner(&gamma_psi)?)
}

//! Expectation-value backends.
//!
//! The sampled backend emulates finite-shot estimation on an ideal device:
//! each requested expectation `<O>` is returned with additive Gaussian noise
//! of standard deviation `sqrt(Var_ψ(O) / shots)`, where
//! `Var_ψ(O) = <O†O> − |<O>|²` is evaluated exactly. Hermitian observables
//! receive real noise, anti-Hermitian ones imaginary noise, and general
//! operators split the variance evenly between both parts.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fockspace::StateVector;
use crate::hamiltonian::Hamiltonian;
use crate::operator::{GammaOp, SparseOperator, Symmetry};

/// An operator whose action on a state can be formed without a dense matrix.
#[derive(Debug, Clone, Copy)]
pub enum Observable<'a> {
    Operator(&'a SparseOperator),
    Gamma(&'a GammaOp),
    Hamiltonian(&'a Hamiltonian),
    HamiltonianSquared(&'a Hamiltonian),
    /// `[Γ, H]`
    Commutator(&'a GammaOp, &'a Hamiltonian),
    /// `{Γ, H − E}`
    Anticommutator(&'a GammaOp, &'a Hamiltonian, f64),
}

impl Observable<'_> {
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        match *self {
            Observable::Operator(x) => x.apply(psi),
            Observable::Gamma(g) => g.apply(psi),
            Observable::Hamiltonian(h) => h.apply(psi),
            Observable::HamiltonianSquared(h) => h.apply(&h.apply(psi)?),
            Observable::Commutator(g, h) => {
                let mut out = g.apply(&h.apply(psi)?)?;
                out.axpy(Complex64::new(-1.0, 0.0), &h.apply(&g.apply(psi)?)?)?;
                Ok(out)
            }
            Observable::Anticommutator(g, h, e) => {
                let mut shifted = h.apply(psi)?;
                shifted.axpy(Complex64::new(-e, 0.0), psi)?;
                let g_psi = g.apply(psi)?;
                let mut out = g.apply(&shifted)?;
                out.axpy(Complex64::new(1.0, 0.0), &h.apply(&g_psi)?)?;
                out.axpy(Complex64::new(-e, 0.0), &g_psi)?;
                Ok(out)
            }
        }
    }

    pub fn symmetry(&self) -> Symmetry {
        match *self {
            Observable::Operator(x) => x.symmetry(),
            Observable::Gamma(g) if g.is_self_adjoint() => Symmetry::Hermitian,
            Observable::Gamma(_) => Symmetry::General,
            Observable::Hamiltonian(_) | Observable::HamiltonianSquared(_) => Symmetry::Hermitian,
            Observable::Commutator(g, _) if g.is_self_adjoint() => Symmetry::AntiHermitian,
            Observable::Anticommutator(g, _, _) if g.is_self_adjoint() => Symmetry::Hermitian,
            Observable::Commutator(..) | Observable::Anticommutator(..) => Symmetry::General,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "lowercase")]
pub enum BackendSpec {
    Exact,
    Sampled { shots: u64, seed: u64 },
}

impl BackendSpec {
    pub fn build(&self) -> Result<Backend> {
        match *self {
            BackendSpec::Exact => Ok(Backend::exact()),
            BackendSpec::Sampled { shots, seed } => Backend::sampled(shots, seed),
        }
    }
}

#[derive(Debug, Clone)]
enum Mode {
    Exact,
    Sampled { shots: u64, rng: ChaCha8Rng },
}

/// Expectation-value source confined to one solve.
#[derive(Debug, Clone)]
pub struct Backend {
    mode: Mode,
    evaluations: u64,
}

impl Backend {
    pub fn exact() -> Self {
        Self {
            mode: Mode::Exact,
            evaluations: 0,
        }
    }

    pub fn sampled(shots: u64, seed: u64) -> Result<Self> {
        if shots == 0 {
            return Err(Error::Config(
                "sampled backend needs at least one shot".into(),
            ));
        }
        Ok(Self {
            mode: Mode::Sampled {
                shots,
                rng: ChaCha8Rng::seed_from_u64(seed),
            },
            evaluations: 0,
        })
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.mode, Mode::Exact)
    }

    pub fn shots(&self) -> Option<u64> {
        match self.mode {
            Mode::Exact => None,
            Mode::Sampled { shots, .. } => Some(shots),
        }
    }

    /// Number of expectations served so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn expect(&mut self, obs: &Observable<'_>, psi: &StateVector) -> Result<Complex64> {
        self.evaluations += 1;
        let o_psi = obs.apply(psi)?;
        let mut value = psi.inner(&o_psi)?;
        let symmetry = obs.symmetry();
        match symmetry {
            Symmetry::Hermitian => value.im = 0.0,
            Symmetry::AntiHermitian => value.re = 0.0,
            _ => {}
        }
        let Mode::Sampled { shots, rng } = &mut self.mode else {
            return Ok(value);
        };
        let var = (o_psi.norm_sqr() - value.norm_sqr()).max(0.0);
        let sigma = (var / *shots as f64).sqrt();
        let z_re: f64 = StandardNormal.sample(rng);
        let z_im: f64 = StandardNormal.sample(rng);
        match symmetry {
            Symmetry::Hermitian => value.re += sigma * z_re,
            Symmetry::AntiHermitian => value.im += sigma * z_im,
            Symmetry::Zero => {}
            Symmetry::General => {
                let half = sigma * std::f64::consts::FRAC_1_SQRT_2;
                value.re += half * z_re;
                value.im += half * z_im;
            }
        }
        Ok(value)
    }

    /// Real part of [`Backend::expect`], for Hermitian observables.
    pub fn expect_real(&mut self, obs: &Observable<'_>, psi: &StateVector) -> Result<f64> {
        Ok(self.expect(obs, psi)?.re)
    }
}

/// Exact `Var_ψ(O) = <O†O> − |<O>|²`.
pub fn operator_variance(obs: &Observable<'_>, psi: &StateVector) -> Result<f64> {
    let o_psi = obs.apply(psi)?;
    Ok((o_psi.norm_sqr() - psi.inner(&o_psi)?.norm_sqr()).max(0.0))
}

/// Derives an independent per-task seed from a root seed (splitmix64 finalizer).
pub fn derive_seed(root: u64, index: u64) -> u64 {
    let mut z = root ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

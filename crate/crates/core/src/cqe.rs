//! Contracted quantum eigensolver.
//!
//! Each iteration measures the anti-Hermitian residual `A_k = <Ψ|[Γ_k, H]|Ψ>`
//! over the operator pool, applies the unitary `exp(η_A Â)`, measures the
//! Hermitian residual `B_k = <Φ|{Γ_k, H − E}|Φ>` on the updated state and
//! applies the non-unitary `exp(η_B B̂)` followed by renormalization. Both
//! step sizes come from a golden-section search on the energy, taken along
//! the generator scaled to unit coefficient norm.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::sector_weights;
use crate::fockspace::{FockBasis, OccupationFilter, StateVector};
use crate::hamiltonian::{lower_mode, upper_mode, Hamiltonian};
use crate::measurement::{Backend, BackendSpec, Observable};
use crate::operator::{apply_exp_with, ExpOptions, GammaOp, SparseOperator};

/// Distinct non-identity Γ strings of a Hamiltonian, closed under adjoint.
#[derive(Debug, Clone)]
pub struct CqePool {
    ops: Vec<GammaOp>,
    adjoint_of: Vec<usize>,
    matrices: Vec<SparseOperator>,
}

impl CqePool {
    pub fn ops(&self) -> &[GammaOp] {
        &self.ops
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Position of `adjoint(ops[k])` in the pool.
    pub fn adjoint_index(&self, k: usize) -> usize {
        self.adjoint_of[k]
    }

    pub fn closed_under_adjoint(&self) -> bool {
        self.ops
            .iter()
            .enumerate()
            .all(|(k, op)| self.ops[self.adjoint_of[k]] == op.adjoint())
    }

    pub fn matrices(&self) -> &[SparseOperator] {
        &self.matrices
    }

    pub fn basis(&self) -> Option<&Arc<FockBasis>> {
        self.matrices.first().map(|m| m.basis())
    }
}

/// Pool in Hamiltonian term order with missing adjoints appended.
pub fn build_pool(h: &Hamiltonian) -> Result<CqePool> {
    let mut ops: Vec<GammaOp> = Vec::new();
    let mut index: HashMap<GammaOp, usize> = HashMap::new();
    let mut push = |op: GammaOp, ops: &mut Vec<GammaOp>| {
        if !op.is_identity() && !index.contains_key(&op) {
            index.insert(op.clone(), ops.len());
            ops.push(op);
        }
    };
    for (_, op) in h.terms() {
        push(op.clone(), &mut ops);
    }
    for k in 0..ops.len() {
        let adj = ops[k].adjoint();
        push(adj, &mut ops);
    }
    let position: HashMap<&GammaOp, usize> =
        ops.iter().enumerate().map(|(k, op)| (op, k)).collect();
    let adjoint_of = ops.iter().map(|op| position[&op.adjoint()]).collect();
    let matrices = ops
        .iter()
        .map(|op| SparseOperator::from_gamma(op, h.basis()))
        .collect::<Result<_>>()?;
    Ok(CqePool {
        ops,
        adjoint_of,
        matrices,
    })
}

/// `A_k = <ψ|[Γ_k, H]|ψ>` through `backend`.
pub fn residual_a(
    pool: &CqePool,
    h: &Hamiltonian,
    psi: &StateVector,
    backend: &mut Backend,
) -> Result<Vec<Complex64>> {
    pool.ops
        .iter()
        .map(|g| backend.expect(&Observable::Commutator(g, h), psi))
        .collect()
}

/// `B_k = <Φ|{Γ_k, H − E}|Φ>` through `backend`.
pub fn residual_b(
    pool: &CqePool,
    h: &Hamiltonian,
    phi: &StateVector,
    e: f64,
    backend: &mut Backend,
) -> Result<Vec<Complex64>> {
    pool.ops
        .iter()
        .map(|g| backend.expect(&Observable::Anticommutator(g, h, e), phi))
        .collect()
}

#[derive(Debug, Clone)]
pub struct Assembled {
    pub operator: SparseOperator,
    /// Weights of the pool operators: conjugated residuals after
    /// (anti-)symmetrization over adjoint pairs.
    pub coefficients: Vec<Complex64>,
    /// Set when the raw coefficients broke the adjoint-pair relation by more
    /// than round-off, as happens with sampled residuals.
    pub symmetrized: bool,
}

fn assemble(pool: &CqePool, coeffs: &[Complex64], sign: f64) -> Result<Assembled> {
    if coeffs.len() != pool.len() {
        return Err(Error::Config(format!(
            "{} coefficients for a pool of {}",
            coeffs.len(),
            pool.len()
        )));
    }
    let Some(basis) = pool.basis() else {
        return Err(Error::Config("empty operator pool".into()));
    };
    let sym: Vec<Complex64> = (0..pool.len())
        .map(|k| 0.5 * (coeffs[k] + sign * coeffs[pool.adjoint_of[k]].conj()))
        .collect();
    let scale = coeffs.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let symmetrized = sym
        .iter()
        .zip(coeffs)
        .any(|(s, c)| (s - c).norm() > 1e-12 * scale);
    // conjugated weights make the first-order energy change -Σ|A_k|² (or Σ|B_k|²),
    // which the unconjugated sum only guarantees for real states
    let weights: Vec<Complex64> = sym.iter().map(|c| c.conj()).collect();
    let operator = SparseOperator::linear_combination(
        basis,
        weights.iter().copied().zip(pool.matrices.iter()),
    )?;
    Ok(Assembled {
        operator,
        coefficients: weights,
        symmetrized,
    })
}

/// `Â = Σ conj(A_k) Γ_k`, anti-Hermitian by construction.
pub fn assemble_antihermitian(pool: &CqePool, a: &[Complex64]) -> Result<Assembled> {
    assemble(pool, a, -1.0)
}

/// `B̂ = Σ conj(B_k) Γ_k`, Hermitian by construction.
pub fn assemble_hermitian(pool: &CqePool, b: &[Complex64]) -> Result<Assembled> {
    assemble(pool, b, 1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineSearchSpec {
    pub lo: f64,
    pub hi: f64,
    pub tol: f64,
    pub max_evals: usize,
}

impl Default for LineSearchSpec {
    fn default() -> Self {
        Self {
            lo: -1.0,
            hi: 1.0,
            tol: 1e-6,
            max_evals: 60,
        }
    }
}

impl LineSearchSpec {
    fn validate(&self) -> Result<()> {
        if !(self.lo <= 0.0 && self.hi >= 0.0 && self.lo < self.hi) {
            return Err(Error::Config(format!(
                "line-search bracket [{}, {}] must contain 0",
                self.lo, self.hi
            )));
        }
        if !(self.tol > 0.0) || self.max_evals < 2 {
            return Err(Error::Config(
                "line search needs tol > 0 and at least 2 evaluations".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct LineSearchResult {
    pub eta: f64,
    pub state: StateVector,
    /// Energy at `eta` as seen by the search.
    pub energy: f64,
    pub evals: usize,
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section minimization of `E(η)` for `exp(η X) ψ` over `spec`'s bracket.
/// Falls back to `η = 0` when no evaluated point beats `e0`.
fn golden_section(
    x: &SparseOperator,
    psi: &StateVector,
    e0: f64,
    spec: &LineSearchSpec,
    exp: ExpOptions,
    energy: &mut dyn FnMut(&StateVector) -> Result<f64>,
) -> Result<LineSearchResult> {
    spec.validate()?;
    let unchanged = |evals| LineSearchResult {
        eta: 0.0,
        state: psi.clone(),
        energy: e0,
        evals,
    };
    if x.nnz() == 0 {
        return Ok(unchanged(0));
    }

    let mut eval = |eta: f64| -> Result<(f64, StateVector)> {
        let (state, _) = apply_exp_with(x, eta, psi, exp)?;
        let e = energy(&state)?;
        if !e.is_finite() {
            return Err(Error::NonFinite(format!("energy at eta = {eta}")));
        }
        Ok((e, state))
    };

    let mut run = |lo: f64, hi: f64| -> Result<LineSearchResult> {
        let (mut a, mut b) = (lo, hi);
        let mut c = b - INV_PHI * (b - a);
        let mut d = a + INV_PHI * (b - a);
        let (mut fc, sc) = eval(c)?;
        let (mut fd, sd) = eval(d)?;
        let mut evals = 2;
        let mut best = if fc <= fd { (c, fc, sc) } else { (d, fd, sd) };
        while b - a > spec.tol && evals < spec.max_evals {
            let (point, value, state);
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - INV_PHI * (b - a);
                (value, state) = eval(c)?;
                fc = value;
                point = c;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + INV_PHI * (b - a);
                (value, state) = eval(d)?;
                fd = value;
                point = d;
            }
            evals += 1;
            if value < best.1 {
                best = (point, value, state);
            }
        }
        let (eta, e, state) = best;
        if e <= e0 {
            Ok(LineSearchResult {
                eta,
                state,
                energy: e,
                evals,
            })
        } else {
            Ok(unchanged(evals))
        }
    };

    match run(spec.lo, spec.hi) {
        Err(Error::NonFinite(_)) | Err(Error::ExpNotConverged { .. }) => {
            run(0.5 * spec.lo, 0.5 * spec.hi)
        }
        other => other,
    }
}

/// Line search with exact energies.
pub fn line_search(
    h: &Hamiltonian,
    x: &SparseOperator,
    psi: &StateVector,
    spec: &LineSearchSpec,
) -> Result<LineSearchResult> {
    let e0 = h.energy(psi)?;
    golden_section(x, psi, e0, spec, ExpOptions::default(), &mut |s| {
        h.energy(s)
    })
}

#[derive(Debug, Clone, PartialEq, Default)]
pub enum InitialState {
    /// `⊗_i (cos θ |−>_i + sin θ |+>_i) ⊗ Σ_n c_n |n>` with `c_n ∝ κⁿ / √(n!)`.
    #[default]
    TcProduct,
    TcProductWith {
        theta: f64,
        kappa: f64,
    },
    /// Equal weight on every basis state.
    Uniform,
    State(StateVector),
}

pub const DEFAULT_THETA: f64 = 0.2;
pub const DEFAULT_KAPPA: f64 = 0.5;

fn tc_product(basis: &Arc<FockBasis>, theta: f64, kappa: f64) -> Result<StateVector> {
    let n_sites = match basis.filter() {
        OccupationFilter::OnePerPair { n_sites } => *n_sites,
        _ if basis.n_fermion_modes().is_multiple_of(2) => basis.n_fermion_modes() / 2,
        _ => {
            return Err(Error::Config(
                "product initial state needs paired fermionic modes".into(),
            ))
        }
    };
    let mut boson_amp = Vec::with_capacity(basis.n_boson_max() + 1);
    let mut c = 1.0;
    for n in 0..=basis.n_boson_max() {
        if n > 0 {
            c *= kappa / (n as f64).sqrt();
        }
        boson_amp.push(c);
    }
    let amps = (0..basis.dim())
        .map(|p| {
            let (occ, bosons) = basis.occupation_of(p);
            let mut a = 1.0;
            for i in 0..n_sites {
                let lo = occ >> lower_mode(i) & 1 == 1;
                let hi = occ >> upper_mode(i) & 1 == 1;
                a *= match (lo, hi) {
                    (true, false) => theta.cos(),
                    (false, true) => theta.sin(),
                    _ => 0.0,
                };
            }
            for &n in &bosons {
                a *= boson_amp[n];
            }
            Complex64::new(a, 0.0)
        })
        .collect();
    StateVector::from_amplitudes(basis, amps)?.normalize()
}

impl InitialState {
    pub fn build(&self, basis: &Arc<FockBasis>) -> Result<StateVector> {
        match self {
            InitialState::TcProduct => tc_product(basis, DEFAULT_THETA, DEFAULT_KAPPA),
            InitialState::TcProductWith { theta, kappa } => tc_product(basis, *theta, *kappa),
            InitialState::Uniform => {
                StateVector::from_amplitudes(basis, vec![Complex64::new(1.0, 0.0); basis.dim()])?
                    .normalize()
            }
            InitialState::State(s) => {
                if !crate::fockspace::same_basis(s.basis(), basis) {
                    return Err(Error::BasisMismatch);
                }
                s.normalize()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CqeConfig {
    pub line_search: LineSearchSpec,
    pub tol_variance: f64,
    pub tol_energy: f64,
    pub max_iters: usize,
    pub initial_state: InitialState,
    pub backend: BackendSpec,
    /// Sector label per basis state (for example the TC excitation number);
    /// enables sector-weight bookkeeping in the trace.
    pub sectors: Option<Vec<usize>>,
    pub exp: ExpOptions,
}

impl Default for CqeConfig {
    fn default() -> Self {
        Self {
            line_search: LineSearchSpec::default(),
            tol_variance: 1e-8,
            tol_energy: 1e-9,
            max_iters: 500,
            initial_state: InitialState::default(),
            backend: BackendSpec::Exact,
            sectors: None,
            exp: ExpOptions::default(),
        }
    }
}

impl CqeConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_variance > 0.0) || !(self.tol_energy > 0.0) {
            return Err(Error::Config(
                "convergence tolerances must be positive".into(),
            ));
        }
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if let BackendSpec::Sampled { shots: 0, .. } = self.backend {
            return Err(Error::Config(
                "sampled backend needs at least one shot".into(),
            ));
        }
        self.line_search.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    ConvergedVariance,
    ConvergedEnergy,
    MaxIters,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::ConvergedVariance => "converged_variance",
            Verdict::ConvergedEnergy => "converged_energy",
            Verdict::MaxIters => "max_iters",
        })
    }
}

/// State of iteration `n` and the step taken from it. The terminal record
/// carries zero residual norms and step sizes.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub n: usize,
    /// Exact `<Ψ⁽ⁿ⁾|H|Ψ⁽ⁿ⁾>`.
    pub energy: f64,
    /// Energy as returned by the backend.
    pub energy_measured: f64,
    /// Exact variance of `Ψ⁽ⁿ⁾`.
    pub variance: f64,
    pub norm_a: f64,
    pub norm_b: f64,
    /// Step applied to the unscaled `Â`: the searched step over `‖A‖`.
    pub eta_a: f64,
    pub eta_b: f64,
    /// Sector weights of `Ψ⁽ⁿ⁾`; empty without sector labels.
    pub sector_weights: Vec<f64>,
    /// Largest sector-weight change across the unitary factor of this step.
    pub unitary_sector_drift: f64,
    pub symmetrized: bool,
}

#[derive(Debug, Clone)]
pub struct CqeTrace {
    pub records: Vec<IterationRecord>,
    pub final_state: StateVector,
    pub verdict: Verdict,
    pub backend_evaluations: u64,
}

impl CqeTrace {
    /// Number of update steps taken.
    pub fn iterations(&self) -> usize {
        self.records.len() - 1
    }

    pub fn final_energy(&self) -> f64 {
        self.records.last().map_or(f64::NAN, |r| r.energy)
    }
}

fn measured_variance(
    h: &Hamiltonian,
    psi: &StateVector,
    e: f64,
    backend: &mut Backend,
) -> Result<f64> {
    if backend.is_exact() {
        return h.variance(psi);
    }
    Ok((backend.expect_real(&Observable::HamiltonianSquared(h), psi)? - e * e).max(0.0))
}

fn max_drift(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Generator divided by the l2 norm of its coefficients, and that norm.
/// The line-search bracket then bounds the step along a unit direction,
/// so it does not shrink with the residual.
fn unit_direction(x: &Assembled) -> (SparseOperator, f64) {
    let norm = l2(&x.coefficients);
    if norm > 0.0 {
        (x.operator.scaled(Complex64::new(norm.recip(), 0.0)), norm)
    } else {
        (x.operator.clone(), 1.0)
    }
}

fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

pub fn solve(h: &Hamiltonian, config: &CqeConfig) -> Result<CqeTrace> {
    config.validate()?;
    let pool = build_pool(h)?;
    let mut backend = config.backend.build()?;
    let mut psi = config.initial_state.build(h.basis())?;
    let weights = |s: &StateVector| {
        config
            .sectors
            .as_deref()
            .map_or_else(Vec::new, |l| sector_weights(s, l))
    };
    if let Some(labels) = &config.sectors {
        if labels.len() != h.basis().dim() {
            return Err(Error::LengthMismatch {
                expected: h.basis().dim(),
                got: labels.len(),
            });
        }
    }

    let mut records = Vec::new();
    let mut e_meas = backend.expect_real(&Observable::Hamiltonian(h), &psi)?;
    let mut prev_e: Option<f64> = None;
    let mut streak = 0;
    let mut n = 0;
    let verdict = loop {
        let var_meas = measured_variance(h, &psi, e_meas, &mut backend)?;
        let mut record = IterationRecord {
            n,
            energy: h.energy(&psi)?,
            energy_measured: e_meas,
            variance: h.variance(&psi)?,
            norm_a: 0.0,
            norm_b: 0.0,
            eta_a: 0.0,
            eta_b: 0.0,
            sector_weights: weights(&psi),
            unitary_sector_drift: 0.0,
            symmetrized: false,
        };
        if let Some(p) = prev_e {
            streak = if (e_meas - p).abs() <= config.tol_energy {
                streak + 1
            } else {
                0
            };
        }
        let stop = if var_meas <= config.tol_variance {
            Some(Verdict::ConvergedVariance)
        } else if streak >= 3 {
            Some(Verdict::ConvergedEnergy)
        } else if n == config.max_iters || pool.is_empty() {
            Some(Verdict::MaxIters)
        } else {
            None
        };
        if let Some(v) = stop {
            records.push(record);
            break v;
        }

        let a = residual_a(&pool, h, &psi, &mut backend)?;
        let a_hat = assemble_antihermitian(&pool, &a)?;
        let (dir_a, scale_a) = unit_direction(&a_hat);
        let step_a = {
            let mut energy = |s: &StateVector| backend.expect_real(&Observable::Hamiltonian(h), s);
            golden_section(
                &dir_a,
                &psi,
                e_meas,
                &config.line_search,
                config.exp,
                &mut energy,
            )?
        };
        let phi = step_a.state;
        let e_phi = if step_a.eta == 0.0 && backend.is_exact() {
            e_meas
        } else {
            backend.expect_real(&Observable::Hamiltonian(h), &phi)?
        };

        let b = residual_b(&pool, h, &phi, e_phi, &mut backend)?;
        let b_hat = assemble_hermitian(&pool, &b)?;
        let (dir_b, scale_b) = unit_direction(&b_hat);
        let step_b = {
            let mut energy = |s: &StateVector| backend.expect_real(&Observable::Hamiltonian(h), s);
            golden_section(
                &dir_b,
                &phi,
                e_phi,
                &config.line_search,
                config.exp,
                &mut energy,
            )?
        };

        record.norm_a = l2(&a_hat.coefficients);
        record.norm_b = l2(&b_hat.coefficients);
        record.eta_a = step_a.eta / scale_a;
        record.eta_b = step_b.eta / scale_b;
        record.unitary_sector_drift = max_drift(&record.sector_weights, &weights(&phi));
        record.symmetrized = a_hat.symmetrized || b_hat.symmetrized;
        records.push(record);

        psi = step_b.state;
        prev_e = Some(e_meas);
        // a sampled backend measures afresh even when the state did not move,
        // so a rejected step cannot fake an energy stall
        e_meas = if step_b.eta == 0.0 && backend.is_exact() {
            e_phi
        } else {
            backend.expect_real(&Observable::Hamiltonian(h), &psi)?
        };
        n += 1;
    };

    Ok(CqeTrace {
        records,
        final_state: psi,
        verdict,
        backend_evaluations: backend.evaluations(),
    })
}

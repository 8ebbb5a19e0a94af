//! Contracted quantum eigensolver for mixed fermion-boson Hamiltonians.
//!
//! The crate realizes generalized density operators (normal-ordered products
//! of fermionic and bosonic ladder operators) as sparse matrices on a
//! truncated Fock space, builds Hamiltonians as weighted sums of them, and
//! drives trial states to eigenstates by alternating unitary and non-unitary
//! exponential updates derived from contracted residuals. A dense exact
//! diagonalization oracle and a shot-noise measurement emulator are included
//! for validation on the Tavis-Cummings model.

pub mod cqe;
pub mod error;
pub mod exact;
pub mod experiment;
pub mod fockspace;
pub mod hamiltonian;
pub mod measurement;
pub mod operator;

pub use cqe::{solve, CqeConfig, CqePool, CqeTrace, InitialState, LineSearchSpec, Verdict};
pub use error::{Error, Result};
pub use exact::{diagonalize, Spectrum};
pub use fockspace::{FockBasis, OccupationFilter, StateVector};
pub use hamiltonian::{build_tavis_cummings, Hamiltonian, TcParams};
pub use measurement::{Backend, BackendSpec, Observable};
pub use operator::{GammaOp, SparseOperator};

pub use num_complex::Complex64;

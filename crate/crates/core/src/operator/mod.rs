//! Generalized density operators and their sparse matrix realizations.

mod expect;
mod expm;
mod gamma;
mod sparse;

pub use expect::{anticommutator_expect, commutator_expect};
pub use expm::{apply_exp, apply_exp_with, ExpOptions, DEFAULT_MAX_TERMS};
pub use gamma::{adjoint, apply_gamma, GammaOp};
pub use sparse::{to_matrix, SparseOperator, Symmetry};

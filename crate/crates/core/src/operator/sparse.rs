use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::{same_basis, FockBasis, StateVector};
use crate::operator::GammaOp;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Hermiticity class of a sparse operator, determined to a fixed tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    Zero,
    Hermitian,
    AntiHermitian,
    General,
}

/// Compressed-row complex matrix in basis ordering.
#[derive(Debug, Clone)]
pub struct SparseOperator {
    basis: Arc<FockBasis>,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
    symmetry: OnceLock<Symmetry>,
}

impl SparseOperator {
    /// Builds from (row, col, value) triplets. Duplicates are summed and
    /// exact zeros dropped.
    pub fn from_triplets(
        basis: &Arc<FockBasis>,
        mut triplets: Vec<(usize, usize, Complex64)>,
    ) -> Self {
        let dim = basis.dim();
        triplets.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; dim + 1];
        let mut cols = Vec::with_capacity(triplets.len());
        let mut vals: Vec<Complex64> = Vec::with_capacity(triplets.len());
        let mut rows = Vec::with_capacity(triplets.len());
        for (r, c, v) in triplets {
            debug_assert!(r < dim && c < dim);
            if let (Some(&lr), Some(&lc)) = (rows.last(), cols.last()) {
                if lr == r && lc == c {
                    *vals.last_mut().unwrap() += v;
                    continue;
                }
            }
            rows.push(r);
            cols.push(c);
            vals.push(v);
        }
        let mut keep_cols = Vec::with_capacity(cols.len());
        let mut keep_vals = Vec::with_capacity(vals.len());
        for ((r, c), v) in rows.into_iter().zip(cols).zip(vals) {
            if v != ZERO {
                row_ptr[r + 1] += 1;
                keep_cols.push(c);
                keep_vals.push(v);
            }
        }
        for r in 0..dim {
            row_ptr[r + 1] += row_ptr[r];
        }
        Self {
            basis: basis.clone(),
            row_ptr,
            cols: keep_cols,
            vals: keep_vals,
            symmetry: OnceLock::new(),
        }
    }

    pub fn zero(basis: &Arc<FockBasis>) -> Self {
        Self::from_triplets(basis, Vec::new())
    }

    pub fn identity(basis: &Arc<FockBasis>) -> Self {
        let t = (0..basis.dim())
            .map(|p| (p, p, Complex64::new(1.0, 0.0)))
            .collect();
        Self::from_triplets(basis, t)
    }

    /// Matrix realization of a Γ string: column `p` is `Γ e_p`.
    pub fn from_gamma(op: &GammaOp, basis: &Arc<FockBasis>) -> Result<Self> {
        op.validate(basis)?;
        let t = (0..basis.dim())
            .filter_map(|col| {
                op.act_on_index(basis, col)
                    .map(|(row, m)| (row, col, Complex64::new(m, 0.0)))
            })
            .collect();
        Ok(Self::from_triplets(basis, t))
    }

    /// `Σ_k c_k X_k` over operators sharing this basis.
    pub fn linear_combination<'a, I>(basis: &Arc<FockBasis>, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Complex64, &'a SparseOperator)>,
    {
        let mut t = Vec::new();
        for (c, op) in terms {
            if !same_basis(basis, &op.basis) {
                return Err(Error::BasisMismatch);
            }
            if c == ZERO {
                continue;
            }
            t.extend(op.triplets().map(|(r, col, v)| (r, col, c * v)));
        }
        Ok(Self::from_triplets(basis, t))
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn triplets(&self) -> impl Iterator<Item = (usize, usize, Complex64)> + '_ {
        (0..self.dim()).flat_map(move |r| {
            (self.row_ptr[r]..self.row_ptr[r + 1]).map(move |k| (r, self.cols[k], self.vals[k]))
        })
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        let span = self.row_ptr[row]..self.row_ptr[row + 1];
        match self.cols[span.clone()].binary_search(&col) {
            Ok(k) => self.vals[span.start + k],
            Err(_) => ZERO,
        }
    }

    pub fn adjoint(&self) -> Self {
        let t = self.triplets().map(|(r, c, v)| (c, r, v.conj())).collect();
        Self::from_triplets(&self.basis, t)
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self::from_triplets(
            &self.basis,
            self.triplets().map(|(r, col, v)| (r, col, c * v)).collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        let one = Complex64::new(1.0, 0.0);
        Self::linear_combination(&self.basis, [(one, self), (one, other)])
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        Self::linear_combination(
            &self.basis,
            [
                (Complex64::new(1.0, 0.0), self),
                (Complex64::new(-1.0, 0.0), other),
            ],
        )
    }

    /// Sparse product `self * other`.
    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if !same_basis(&self.basis, &other.basis) {
            return Err(Error::BasisMismatch);
        }
        let mut t = Vec::new();
        for (r, k, a) in self.triplets() {
            for idx in other.row_ptr[k]..other.row_ptr[k + 1] {
                t.push((r, other.cols[idx], a * other.vals[idx]));
            }
        }
        Ok(Self::from_triplets(&self.basis, t))
    }

    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.sub(&other.matmul(self)?)
    }

    pub fn anticommutator(&self, other: &Self) -> Result<Self> {
        self.matmul(other)?.add(&other.matmul(self)?)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.vals.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let mut sums = vec![0.0; self.dim()];
        for (&c, v) in self.cols.iter().zip(&self.vals) {
            sums[c] += v.norm();
        }
        sums.into_iter().fold(0.0, f64::max)
    }

    /// `‖X − X†‖_F`
    pub fn hermiticity_residual(&self) -> f64 {
        self.sub(&self.adjoint())
            .map(|d| d.frobenius_norm())
            .unwrap_or(f64::INFINITY)
    }

    /// `‖X + X†‖_F`
    pub fn anti_hermiticity_residual(&self) -> f64 {
        self.add(&self.adjoint())
            .map(|d| d.frobenius_norm())
            .unwrap_or(f64::INFINITY)
    }

    /// Classified with a tolerance of `1e-12` relative to `max(1, ‖X‖_F)`.
    pub fn symmetry(&self) -> Symmetry {
        *self.symmetry.get_or_init(|| {
            let scale = self.frobenius_norm();
            if scale == 0.0 {
                return Symmetry::Zero;
            }
            let tol = 1e-12 * scale.max(1.0);
            if self.hermiticity_residual() <= tol {
                Symmetry::Hermitian
            } else if self.anti_hermiticity_residual() <= tol {
                Symmetry::AntiHermitian
            } else {
                Symmetry::General
            }
        })
    }

    #[inline]
    pub(crate) fn apply_slice(&self, input: &[Complex64], out: &mut [Complex64]) {
        for (r, o) in out.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.vals[k] * input[self.cols[k]];
            }
            *o = acc;
        }
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if !same_basis(&self.basis, psi.basis()) {
            return Err(Error::BasisMismatch);
        }
        let mut out = vec![ZERO; self.dim()];
        self.apply_slice(psi.amplitudes(), &mut out);
        Ok(StateVector::from_raw(self.basis.clone(), out))
    }

    /// `<psi| X |psi>`
    pub fn expectation(&self, psi: &StateVector) -> Result<Complex64> {
        psi.inner(&self.apply(psi)?)
    }

    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::zeros(self.dim(), self.dim());
        for (r, c, v) in self.triplets() {
            m[(r, c)] += v;
        }
        m
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        Ok(self
            .sub(other)?
            .vals
            .iter()
            .map(|v| v.norm())
            .fold(0.0, f64::max))
    }
}

pub fn to_matrix(op: &GammaOp, basis: &Arc<FockBasis>) -> Result<SparseOperator> {
    SparseOperator::from_gamma(op, basis)
}

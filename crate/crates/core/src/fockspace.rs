//! Truncated mixed fermion-boson Fock space.
//!
//! A basis state is a fermionic occupation bitstring (bit `p` set when mode
//! `p` is occupied) tensored with boson occupation numbers `0..=n_max` on
//! each boson mode. Flat indices are boson-configuration major and
//! fermionic-occupation minor; within each block the admitted occupations
//! appear in increasing binary order.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Default cap on the flat basis dimension.
pub const DEFAULT_DIM_CAP: usize = 1 << 22;

const MAX_FERMION_MODES: usize = 30;

/// Restricts which fermionic occupations enter the basis.
#[derive(Clone, Default)]
pub enum OccupationFilter {
    #[default]
    All,
    /// Exactly one of the modes `{2i, 2i+1}` occupied for each of `n_sites` sites.
    /// Modes beyond `2 * n_sites` are left unconstrained.
    OnePerPair {
        n_sites: usize,
    },
    /// Fixed total fermion number.
    ParticleNumber(usize),
    Custom(Arc<dyn Fn(u64) -> bool + Send + Sync>),
}

impl OccupationFilter {
    pub fn admits(&self, occupation: u64) -> bool {
        match self {
            OccupationFilter::All => true,
            OccupationFilter::OnePerPair { n_sites } => {
                (0..*n_sites).all(|i| ((occupation >> (2 * i)) & 0b11).count_ones() == 1)
            }
            OccupationFilter::ParticleNumber(n) => occupation.count_ones() as usize == *n,
            OccupationFilter::Custom(f) => f(occupation),
        }
    }
}

impl fmt::Debug for OccupationFilter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OccupationFilter::All => write!(f, "All"),
            OccupationFilter::OnePerPair { n_sites } => write!(f, "OnePerPair({n_sites})"),
            OccupationFilter::ParticleNumber(n) => write!(f, "ParticleNumber({n})"),
            OccupationFilter::Custom(_) => write!(f, "Custom"),
        }
    }
}

#[derive(Debug, Clone)]
pub struct FockBasisBuilder {
    n_fermion_modes: usize,
    n_boson_modes: usize,
    n_boson_max: usize,
    filter: OccupationFilter,
    dim_cap: usize,
}

impl FockBasisBuilder {
    pub fn boson_modes(mut self, n: usize) -> Self {
        self.n_boson_modes = n;
        self
    }

    pub fn n_max(mut self, n: usize) -> Self {
        self.n_boson_max = n;
        self
    }

    pub fn filter(mut self, filter: OccupationFilter) -> Self {
        self.filter = filter;
        self
    }

    pub fn dim_cap(mut self, cap: usize) -> Self {
        self.dim_cap = cap;
        self
    }

    pub fn build(self) -> Result<Arc<FockBasis>> {
        let f = self.n_fermion_modes;
        if f == 0 {
            return Err(Error::InvalidBasis(
                "at least one fermionic mode is required".into(),
            ));
        }
        if f > MAX_FERMION_MODES {
            return Err(Error::InvalidBasis(format!(
                "{f} fermionic modes exceeds the supported maximum of {MAX_FERMION_MODES}"
            )));
        }
        if self.n_boson_modes == 0 {
            return Err(Error::InvalidBasis(
                "at least one boson mode is required".into(),
            ));
        }

        let levels = self.n_boson_max + 1;
        let boson_dim = (0..self.n_boson_modes)
            .try_fold(1usize, |acc, _| acc.checked_mul(levels))
            .filter(|&d| d <= self.dim_cap)
            .ok_or(Error::DimensionCap {
                dim: usize::MAX,
                cap: self.dim_cap,
            })?;
        let admitted: Vec<u64> = (0..1u64 << f)
            .filter(|&occ| self.filter.admits(occ))
            .collect();
        if admitted.is_empty() {
            return Err(Error::InvalidBasis(
                "filter admits no fermionic occupation".into(),
            ));
        }
        let dim = admitted
            .len()
            .checked_mul(boson_dim)
            .ok_or(Error::DimensionCap {
                dim: usize::MAX,
                cap: self.dim_cap,
            })?;
        if dim > self.dim_cap {
            return Err(Error::DimensionCap {
                dim,
                cap: self.dim_cap,
            });
        }

        let strides = (0..self.n_boson_modes)
            .map(|m| levels.pow(m as u32))
            .collect();
        Ok(Arc::new(FockBasis {
            n_fermion_modes: f,
            n_boson_modes: self.n_boson_modes,
            n_boson_max: self.n_boson_max,
            admitted,
            boson_strides: strides,
            boson_dim,
            dim,
            filter: self.filter,
        }))
    }
}

/// Immutable basis of the truncated Hilbert space.
#[derive(Debug, Clone)]
pub struct FockBasis {
    n_fermion_modes: usize,
    n_boson_modes: usize,
    n_boson_max: usize,
    admitted: Vec<u64>,
    boson_strides: Vec<usize>,
    boson_dim: usize,
    dim: usize,
    filter: OccupationFilter,
}

impl PartialEq for FockBasis {
    fn eq(&self, other: &Self) -> bool {
        self.n_fermion_modes == other.n_fermion_modes
            && self.n_boson_modes == other.n_boson_modes
            && self.n_boson_max == other.n_boson_max
            && self.admitted == other.admitted
    }
}

impl FockBasis {
    pub fn builder(n_fermion_modes: usize) -> FockBasisBuilder {
        FockBasisBuilder {
            n_fermion_modes,
            n_boson_modes: 1,
            n_boson_max: 0,
            filter: OccupationFilter::All,
            dim_cap: DEFAULT_DIM_CAP,
        }
    }

    /// Single boson mode truncated at `n_max`.
    pub fn new(
        n_fermion_modes: usize,
        n_max: usize,
        filter: OccupationFilter,
    ) -> Result<Arc<Self>> {
        Self::builder(n_fermion_modes)
            .n_max(n_max)
            .filter(filter)
            .build()
    }

    pub fn n_fermion_modes(&self) -> usize {
        self.n_fermion_modes
    }

    pub fn n_boson_modes(&self) -> usize {
        self.n_boson_modes
    }

    pub fn n_boson_max(&self) -> usize {
        self.n_boson_max
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn filter(&self) -> &OccupationFilter {
        &self.filter
    }

    /// Admitted fermionic occupations in basis order.
    pub fn occupations(&self) -> &[u64] {
        &self.admitted
    }

    pub fn n_occupations(&self) -> usize {
        self.admitted.len()
    }

    pub fn boson_dim(&self) -> usize {
        self.boson_dim
    }

    pub(crate) fn boson_stride(&self, mode: usize) -> usize {
        self.boson_strides[mode]
    }

    /// Occupation number of `mode` in the packed boson configuration index.
    #[inline]
    pub(crate) fn boson_digit(&self, boson_index: usize, mode: usize) -> usize {
        (boson_index / self.boson_strides[mode]) % (self.n_boson_max + 1)
    }

    #[inline]
    pub(crate) fn occupation_position(&self, occupation: u64) -> Option<usize> {
        self.admitted.binary_search(&occupation).ok()
    }

    #[inline]
    pub(crate) fn flat_index(&self, occupation_pos: usize, boson_index: usize) -> usize {
        boson_index * self.admitted.len() + occupation_pos
    }

    /// Splits a flat index into (occupation bitstring, packed boson index).
    #[inline]
    pub(crate) fn split_index(&self, index: usize) -> (u64, usize) {
        let n_occ = self.admitted.len();
        (self.admitted[index % n_occ], index / n_occ)
    }

    pub fn index_of(&self, occupation: u64, bosons: &[usize]) -> Result<usize> {
        if bosons.len() != self.n_boson_modes {
            return Err(Error::InvalidBasis(format!(
                "expected {} boson occupation numbers, got {}",
                self.n_boson_modes,
                bosons.len()
            )));
        }
        let mut boson_index = 0;
        for (m, &n) in bosons.iter().enumerate() {
            if n > self.n_boson_max {
                return Err(Error::BosonOutOfRange {
                    n,
                    n_max: self.n_boson_max,
                });
            }
            boson_index += n * self.boson_strides[m];
        }
        let pos = self
            .occupation_position(occupation)
            .ok_or(Error::FilteredOccupation { occupation })?;
        Ok(self.flat_index(pos, boson_index))
    }

    /// Inverse of [`FockBasis::index_of`]; panics when `index >= dim`.
    pub fn occupation_of(&self, index: usize) -> (u64, Vec<usize>) {
        assert!(
            index < self.dim,
            "index {index} out of range for dim {}",
            self.dim
        );
        let (occ, boson_index) = self.split_index(index);
        let bosons = (0..self.n_boson_modes)
            .map(|m| self.boson_digit(boson_index, m))
            .collect();
        (occ, bosons)
    }
}

/// Complex amplitude vector over a [`FockBasis`].
#[derive(Debug, Clone)]
pub struct StateVector {
    basis: Arc<FockBasis>,
    amps: Vec<Complex64>,
}

impl PartialEq for StateVector {
    fn eq(&self, other: &Self) -> bool {
        same_basis(&self.basis, &other.basis) && self.amps == other.amps
    }
}

pub(crate) fn same_basis(a: &Arc<FockBasis>, b: &Arc<FockBasis>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl StateVector {
    pub fn zeros(basis: &Arc<FockBasis>) -> Self {
        Self {
            basis: basis.clone(),
            amps: vec![Complex64::new(0.0, 0.0); basis.dim()],
        }
    }

    /// Unit vector `e_index`.
    pub fn basis_state(basis: &Arc<FockBasis>, index: usize) -> Self {
        let mut s = Self::zeros(basis);
        s.amps[index] = Complex64::new(1.0, 0.0);
        s
    }

    pub fn from_amplitudes(basis: &Arc<FockBasis>, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != basis.dim() {
            return Err(Error::LengthMismatch {
                expected: basis.dim(),
                got: amps.len(),
            });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::NonFinite("state amplitude".into()));
        }
        Ok(Self {
            basis: basis.clone(),
            amps,
        })
    }

    pub(crate) fn from_raw(basis: Arc<FockBasis>, amps: Vec<Complex64>) -> Self {
        debug_assert_eq!(amps.len(), basis.dim());
        Self { basis, amps }
    }

    pub fn basis(&self) -> &Arc<FockBasis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn check_basis(&self, other: &StateVector) -> Result<()> {
        if same_basis(&self.basis, &other.basis) {
            Ok(())
        } else {
            Err(Error::BasisMismatch)
        }
    }

    /// `<self|other>`, conjugate-linear in `self`.
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        self.check_basis(other)?;
        Ok(dot(&self.amps, &other.amps))
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalize(&self) -> Result<StateVector> {
        let mut out = self.clone();
        out.normalize_in_place()?;
        Ok(out)
    }

    pub fn normalize_in_place(&mut self) -> Result<f64> {
        let n = self.norm();
        if n == 0.0 {
            return Err(Error::ZeroNorm);
        }
        if !n.is_finite() {
            return Err(Error::NonFinite("state norm".into()));
        }
        let inv = 1.0 / n;
        self.amps.iter_mut().for_each(|a| *a *= inv);
        Ok(n)
    }

    pub fn scale(&mut self, c: Complex64) {
        self.amps.iter_mut().for_each(|a| *a *= c);
    }

    /// `self += c * other`.
    pub fn axpy(&mut self, c: Complex64, other: &StateVector) -> Result<()> {
        self.check_basis(other)?;
        for (a, b) in self.amps.iter_mut().zip(&other.amps) {
            *a += c * b;
        }
        Ok(())
    }

    pub fn sub(&self, other: &StateVector) -> Result<StateVector> {
        let mut out = self.clone();
        out.axpy(Complex64::new(-1.0, 0.0), other)?;
        Ok(out)
    }
}

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub fn inner(a: &StateVector, b: &StateVector) -> Result<Complex64> {
    a.inner(b)
}

pub fn norm(a: &StateVector) -> f64 {
    a.norm()
}

pub fn normalize(a: &StateVector) -> Result<StateVector> {
    a.normalize()
}

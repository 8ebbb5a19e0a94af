use std::fmt;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fockspace::{FockBasis, StateVector};

/// Normal-ordered product of fermionic and bosonic ladder operators,
///
/// ```text
/// a†_{i1} .. a†_{iq}  a_{kr} .. a_{k1}  b†_{j1} .. b†_{js}  b_{lt} .. b_{l1}
/// ```
///
/// with `i = fermion_create`, `k = fermion_annihilate`, `j = boson_create`
/// and `l = boson_annihilate`. Boson entries are mode indices; a repeated
/// mode means a higher power. Boson lists are kept sorted since all boson
/// operators in a string of one kind commute.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GammaOp {
    fermion_create: Vec<usize>,
    fermion_annihilate: Vec<usize>,
    boson_create: Vec<usize>,
    boson_annihilate: Vec<usize>,
}

fn check_unique(list: &[usize]) -> Result<()> {
    for (n, &x) in list.iter().enumerate() {
        if list[..n].contains(&x) {
            return Err(Error::RepeatedFermionIndex(x));
        }
    }
    Ok(())
}

impl GammaOp {
    pub fn new(
        fermion_create: Vec<usize>,
        fermion_annihilate: Vec<usize>,
        mut boson_create: Vec<usize>,
        mut boson_annihilate: Vec<usize>,
    ) -> Result<Self> {
        check_unique(&fermion_create)?;
        check_unique(&fermion_annihilate)?;
        boson_create.sort_unstable();
        boson_annihilate.sort_unstable();
        Ok(Self {
            fermion_create,
            fermion_annihilate,
            boson_create,
            boson_annihilate,
        })
    }

    pub fn identity() -> Self {
        Self::default()
    }

    /// `a†_p a_p`
    pub fn fermion_number(p: usize) -> Self {
        Self {
            fermion_create: vec![p],
            fermion_annihilate: vec![p],
            ..Self::default()
        }
    }

    /// `b†_m b_m`
    pub fn boson_number(mode: usize) -> Self {
        Self {
            boson_create: vec![mode],
            boson_annihilate: vec![mode],
            ..Self::default()
        }
    }

    pub fn create(p: usize) -> Self {
        Self {
            fermion_create: vec![p],
            ..Self::default()
        }
    }

    pub fn annihilate(p: usize) -> Self {
        Self {
            fermion_annihilate: vec![p],
            ..Self::default()
        }
    }

    pub fn boson_create(mode: usize) -> Self {
        Self {
            boson_create: vec![mode],
            ..Self::default()
        }
    }

    pub fn boson_annihilate(mode: usize) -> Self {
        Self {
            boson_annihilate: vec![mode],
            ..Self::default()
        }
    }

    pub fn fermion_create_indices(&self) -> &[usize] {
        &self.fermion_create
    }

    pub fn fermion_annihilate_indices(&self) -> &[usize] {
        &self.fermion_annihilate
    }

    pub fn boson_create_modes(&self) -> &[usize] {
        &self.boson_create
    }

    pub fn boson_annihilate_modes(&self) -> &[usize] {
        &self.boson_annihilate
    }

    pub fn is_identity(&self) -> bool {
        self.fermion_create.is_empty()
            && self.fermion_annihilate.is_empty()
            && self.boson_create.is_empty()
            && self.boson_annihilate.is_empty()
    }

    /// Hermitian conjugate.
    ///
    /// Under the ordering above, conjugation swaps the creation and
    /// annihilation lists without reversing them: the reversed annihilator
    /// string `a_{kr} .. a_{k1}` conjugates to `a†_{k1} .. a†_{kr}`.
    pub fn adjoint(&self) -> Self {
        Self {
            fermion_create: self.fermion_annihilate.clone(),
            fermion_annihilate: self.fermion_create.clone(),
            boson_create: self.boson_annihilate.clone(),
            boson_annihilate: self.boson_create.clone(),
        }
    }

    pub fn is_self_adjoint(&self) -> bool {
        self.fermion_create == self.fermion_annihilate && self.boson_create == self.boson_annihilate
    }

    pub fn validate(&self, basis: &FockBasis) -> Result<()> {
        let f = basis.n_fermion_modes();
        let m = basis.n_boson_modes();
        for &p in self.fermion_create.iter().chain(&self.fermion_annihilate) {
            if p >= f {
                return Err(Error::ModeOutOfRange {
                    kind: "fermion",
                    index: p,
                    count: f,
                });
            }
        }
        for &j in self.boson_create.iter().chain(&self.boson_annihilate) {
            if j >= m {
                return Err(Error::ModeOutOfRange {
                    kind: "boson",
                    index: j,
                    count: m,
                });
            }
        }
        Ok(())
    }

    /// Acts on the basis state at flat index `col`. Returns the target index
    /// and matrix element, or `None` when the result vanishes or leaves the
    /// admitted basis. Assumes [`GammaOp::validate`] passed.
    pub(crate) fn act_on_index(&self, basis: &FockBasis, col: usize) -> Option<(usize, f64)> {
        let (mut occ, mut boson_index) = basis.split_index(col);
        let n_max = basis.n_boson_max();
        let mut negative = false;
        // product of the integer ladder factors; one square root at the end
        // keeps number-like strings exact
        let mut weight = 1u64;

        // rightmost factors act first: b string, then b† string
        for &mode in &self.boson_annihilate {
            let n = basis.boson_digit(boson_index, mode);
            if n == 0 {
                return None;
            }
            weight *= n as u64;
            boson_index -= basis.boson_stride(mode);
        }
        for &mode in &self.boson_create {
            let n = basis.boson_digit(boson_index, mode);
            if n == n_max {
                return None;
            }
            weight *= (n + 1) as u64;
            boson_index += basis.boson_stride(mode);
        }

        // a_{k1} acts first, a†_{i1} last
        for &p in &self.fermion_annihilate {
            let bit = 1u64 << p;
            if occ & bit == 0 {
                return None;
            }
            negative ^= (occ & (bit - 1)).count_ones() % 2 == 1;
            occ &= !bit;
        }
        for &p in self.fermion_create.iter().rev() {
            let bit = 1u64 << p;
            if occ & bit != 0 {
                return None;
            }
            negative ^= (occ & (bit - 1)).count_ones() % 2 == 1;
            occ |= bit;
        }
        let amp = (weight as f64).sqrt();
        let amp = if negative { -amp } else { amp };

        let pos = basis.occupation_position(occ)?;
        Some((basis.flat_index(pos, boson_index), amp))
    }

    pub(crate) fn apply_slice(
        &self,
        basis: &FockBasis,
        input: &[Complex64],
        out: &mut [Complex64],
    ) {
        out.iter_mut().for_each(|x| *x = Complex64::new(0.0, 0.0));
        for (col, &a) in input.iter().enumerate() {
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            if let Some((row, m)) = self.act_on_index(basis, col) {
                out[row] += a * m;
            }
        }
    }

    /// Applies the operator to `psi`; the result is not normalized.
    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        let basis = psi.basis();
        self.validate(basis)?;
        let mut out = vec![Complex64::new(0.0, 0.0); basis.dim()];
        self.apply_slice(basis, psi.amplitudes(), &mut out);
        Ok(StateVector::from_raw(basis.clone(), out))
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, label: &str, list: &[usize]) -> fmt::Result {
    write!(f, "{label}:")?;
    for x in list {
        write!(f, " {x}")?;
    }
    Ok(())
}

/// Renders the index lists in the Hamiltonian text layout,
/// `create_f: i.. | annih_f: k.. | create_b: j.. | annih_b: l..`.
impl fmt::Display for GammaOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_list(f, "create_f", &self.fermion_create)?;
        write!(f, " | ")?;
        write_list(f, "annih_f", &self.fermion_annihilate)?;
        write!(f, " | ")?;
        write_list(f, "create_b", &self.boson_create)?;
        write!(f, " | ")?;
        write_list(f, "annih_b", &self.boson_annihilate)
    }
}

pub fn apply_gamma(op: &GammaOp, psi: &StateVector) -> Result<StateVector> {
    op.apply(psi)
}

pub fn adjoint(op: &GammaOp) -> GammaOp {
    op.adjoint()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fockspace::OccupationFilter;
    use approx::assert_abs_diff_eq;

    fn boson_basis(n_max: usize) -> std::sync::Arc<FockBasis> {
        FockBasis::new(1, n_max, OccupationFilter::All).unwrap()
    }

    #[test]
    fn rejects_repeated_fermion_index() {
        assert_eq!(
            GammaOp::new(vec![1, 1], vec![], vec![], vec![]).unwrap_err(),
            Error::RepeatedFermionIndex(1)
        );
        assert!(GammaOp::new(vec![], vec![0, 2, 0], vec![], vec![]).is_err());
        // boson powers are fine
        assert!(GammaOp::new(vec![], vec![], vec![0, 0], vec![0]).is_ok());
    }

    #[test]
    fn boson_number_operator() {
        let basis = boson_basis(3);
        let idx = basis.index_of(0, &[2]).unwrap();
        let psi = StateVector::basis_state(&basis, idx);
        let out = GammaOp::boson_number(0).apply(&psi).unwrap();
        assert_eq!(out.amplitudes()[idx], Complex64::new(2.0, 0.0));
        assert_abs_diff_eq!(out.norm(), 2.0);
    }

    #[test]
    fn boson_pair_number_operator() {
        // <n| b† b† b b |n> = n (n - 1) by direct ladder evaluation
        let n_max = 5;
        let basis = boson_basis(n_max);
        let op = GammaOp::new(vec![], vec![], vec![0, 0], vec![0, 0]).unwrap();
        for n in 0..=n_max {
            let psi = StateVector::basis_state(&basis, basis.index_of(0, &[n]).unwrap());
            let mut expect = 1.0;
            let mut m = n;
            // b b
            for _ in 0..2 {
                expect *= (m as f64).sqrt();
                m = m.saturating_sub(1);
            }
            // b† b†
            for _ in 0..2 {
                expect *= ((m + 1) as f64).sqrt();
                m += 1;
            }
            let value = psi.inner(&op.apply(&psi).unwrap()).unwrap();
            assert_abs_diff_eq!(value.re, expect, epsilon = 1e-12);
            assert_abs_diff_eq!(value.re, (n * n.saturating_sub(1)) as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn raising_at_ceiling_vanishes() {
        let basis = boson_basis(2);
        let top = StateVector::basis_state(&basis, basis.index_of(0, &[2]).unwrap());
        assert_eq!(GammaOp::boson_create(0).apply(&top).unwrap().norm(), 0.0);
    }

    #[test]
    fn hopping_and_nilpotency() {
        let basis = FockBasis::new(2, 0, OccupationFilter::All).unwrap();
        let hop = GammaOp::new(vec![1], vec![0], vec![], vec![]).unwrap();
        let psi = StateVector::basis_state(&basis, basis.index_of(0b01, &[0]).unwrap());
        let out = hop.apply(&psi).unwrap();
        let target = basis.index_of(0b10, &[0]).unwrap();
        assert_eq!(out.amplitudes()[target].norm(), 1.0);
        assert_abs_diff_eq!(out.norm(), 1.0);

        let twice = GammaOp::create(1);
        for p in 0..basis.dim() {
            let e = StateVector::basis_state(&basis, p);
            let out = twice.apply(&twice.apply(&e).unwrap()).unwrap();
            assert_eq!(out.norm(), 0.0);
        }
    }

    #[test]
    fn parity_sign() {
        // a†_0 on |mode 1 occupied> has no modes below 0: +1
        // a†_1 on |mode 0 occupied> passes one fermion: -1
        let basis = FockBasis::new(2, 0, OccupationFilter::All).unwrap();
        let e01 = StateVector::basis_state(&basis, basis.index_of(0b01, &[0]).unwrap());
        let e10 = StateVector::basis_state(&basis, basis.index_of(0b10, &[0]).unwrap());
        let full = basis.index_of(0b11, &[0]).unwrap();
        assert_eq!(
            GammaOp::create(1).apply(&e01).unwrap().amplitudes()[full].re,
            -1.0
        );
        assert_eq!(
            GammaOp::create(0).apply(&e10).unwrap().amplitudes()[full].re,
            1.0
        );
    }

    #[test]
    fn adjoint_of_coupling_term() {
        let up = GammaOp::new(vec![1], vec![0], vec![], vec![0]).unwrap();
        let down = GammaOp::new(vec![0], vec![1], vec![0], vec![]).unwrap();
        assert_eq!(up.adjoint(), down);
        assert_eq!(GammaOp::identity().adjoint(), GammaOp::identity());
        assert!(GammaOp::fermion_number(3).is_self_adjoint());
    }

    #[test]
    fn out_of_range() {
        let basis = FockBasis::new(2, 1, OccupationFilter::All).unwrap();
        let psi = StateVector::basis_state(&basis, 0);
        assert!(matches!(
            GammaOp::create(2).apply(&psi),
            Err(Error::ModeOutOfRange {
                kind: "fermion",
                ..
            })
        ));
        assert!(matches!(
            GammaOp::boson_create(1).apply(&psi),
            Err(Error::ModeOutOfRange { kind: "boson", .. })
        ));
    }

    #[test]
    fn display_layout() {
        let op = GammaOp::new(vec![1], vec![0], vec![], vec![0]).unwrap();
        assert_eq!(
            op.to_string(),
            "create_f: 1 | annih_f: 0 | create_b: | annih_b: 0"
        );
    }
}

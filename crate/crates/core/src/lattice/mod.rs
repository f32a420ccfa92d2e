//! Integral lattices given by Gram matrices, sublattices, and discriminant forms.

mod builtin;
mod fqm;
mod io;

pub use builtin::{builtin, lattice_a, lattice_d, lattice_d_plus, lattice_e, lattice_z};
pub use fqm::{FiniteQuadraticModule, Residue};
pub use io::{parse_lat, read_lat, to_lat_string, write_lat};

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{hnf, left_kernel, snf, IntMatrix, RatMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Parity::Even => write!(f, "even"),
            Parity::Odd => write!(f, "odd"),
        }
    }
}

/// Integral positive definite lattice, stored as its Gram matrix.
#[derive(Clone, PartialEq, Eq)]
pub struct Lattice {
    gram: IntMatrix,
    label: Option<String>,
}

impl Lattice {
    /// Validates symmetry and positive definiteness. The rank-0 lattice is allowed.
    pub fn new(gram: IntMatrix) -> Result<Self> {
        if !gram.is_square() {
            return Err(Error::InvalidLattice(format!(
                "Gram matrix is {}x{}, not square",
                gram.rows(),
                gram.cols()
            )));
        }
        if !gram.is_symmetric() {
            return Err(Error::InvalidLattice("Gram matrix is not symmetric".into()));
        }
        if gram.rows() > 0 {
            match gram.leading_minors() {
                Some(m) if m.iter().all(|d| d.is_positive()) => {}
                _ => {
                    return Err(Error::InvalidLattice(
                        "Gram matrix is not positive definite (a leading principal minor is <= 0)"
                            .into(),
                    ))
                }
            }
        }
        Ok(Lattice { gram, label: None })
    }

    /// For Gram matrices already known to be positive definite.
    pub(crate) fn new_unchecked(gram: IntMatrix) -> Self {
        Lattice { gram, label: None }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        Self::new(IntMatrix::from_rows(rows))
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    pub fn gram(&self) -> &IntMatrix {
        &self.gram
    }

    pub fn rank(&self) -> usize {
        self.gram.rows()
    }

    pub fn det(&self) -> BigInt {
        if self.rank() == 0 {
            return BigInt::one();
        }
        self.gram.det()
    }

    pub fn parity(&self) -> Parity {
        let two = BigInt::from(2);
        if (0..self.rank()).all(|i| (&self.gram[(i, i)] % &two).is_zero()) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_even(&self) -> bool {
        self.parity() == Parity::Even
    }

    pub fn is_unimodular(&self) -> bool {
        self.det().is_one()
    }

    /// Gram matrix of the dual lattice in the dual basis: the inverse Gram.
    pub fn dual(&self) -> RatMatrix {
        self.gram
            .to_rat()
            .inverse()
            .expect("positive definite Gram is invertible")
    }

    pub fn residue(&self) -> Result<Residue> {
        Residue::of(self)
    }

    pub fn direct_sum(&self, other: &Lattice) -> Lattice {
        let label = match (&self.label, &other.label) {
            (Some(a), Some(b)) => Some(format!("{a}+{b}")),
            (Some(a), None) if other.rank() == 0 => Some(a.clone()),
            (None, Some(b)) if self.rank() == 0 => Some(b.clone()),
            _ => None,
        };
        Lattice {
            gram: self.gram.block_diag(&other.gram),
            label,
        }
    }

    /// Lattice spanned by the rows of `basis` (ambient coordinates); must be nonsingular.
    pub fn rebase(&self, basis: &IntMatrix) -> Result<Lattice> {
        Lattice::new(basis.mul(&self.gram).mul(&basis.transpose()))
    }

    pub fn inner(&self, x: &[BigInt], y: &[BigInt]) -> BigInt {
        let n = self.rank();
        let mut s = BigInt::zero();
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if !y[j].is_zero() && !self.gram[(i, j)].is_zero() {
                    s += &x[i] * &self.gram[(i, j)] * &y[j];
                }
            }
        }
        s
    }

    pub fn norm(&self, x: &[BigInt]) -> BigInt {
        self.inner(x, x)
    }

    /// Inner product in L ⊗ Q.
    pub fn inner_rat(&self, x: &[BigRational], y: &[BigRational]) -> BigRational {
        let n = self.rank();
        let mut s = BigRational::zero();
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if !y[j].is_zero() {
                    s += &x[i] * &y[j] * BigRational::from_integer(self.gram[(i, j)].clone());
                }
            }
        }
        s
    }

    /// Machine-integer Gram if every entry fits.
    pub fn gram_i64(&self) -> Option<Vec<i64>> {
        self.gram.to_i64()
    }
}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.label {
            Some(l) => write!(f, "Lattice({l}, {})", self.gram),
            None => write!(f, "Lattice({})", self.gram),
        }
    }
}

/// A sublattice of `ambient` spanned by the rows of `basis` (ambient coordinates).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Sublattice {
    ambient: Lattice,
    basis: IntMatrix,
}

impl Sublattice {
    pub fn new(ambient: Lattice, basis: IntMatrix) -> Result<Self> {
        if basis.cols() != ambient.rank() {
            return Err(Error::Dimension(format!(
                "basis has {} columns, ambient rank is {}",
                basis.cols(),
                ambient.rank()
            )));
        }
        if crate::exact::rank(&basis) != basis.rows() {
            return Err(Error::InvalidLattice(
                "sublattice basis rows are dependent".into(),
            ));
        }
        Ok(Sublattice { ambient, basis })
    }

    /// The zero sublattice.
    pub fn zero(ambient: Lattice) -> Self {
        let n = ambient.rank();
        Sublattice {
            ambient,
            basis: IntMatrix::zeros(0, n),
        }
    }

    pub fn ambient(&self) -> &Lattice {
        &self.ambient
    }

    pub fn basis(&self) -> &IntMatrix {
        &self.basis
    }

    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn gram(&self) -> IntMatrix {
        self.basis
            .mul(self.ambient.gram())
            .mul(&self.basis.transpose())
    }

    /// The sublattice as an abstract lattice in its own basis.
    pub fn lattice(&self) -> Lattice {
        Lattice::new(self.gram()).expect("induced Gram of independent vectors is positive definite")
    }

    /// Index of this sublattice in its saturation.
    pub fn saturation_index(&self) -> BigInt {
        if self.rank() == 0 {
            return BigInt::one();
        }
        snf(&self.basis).diagonal.iter().product()
    }

    pub fn is_saturated(&self) -> bool {
        self.saturation_index().is_one()
    }

    /// `ambient ∩ (span ⊗ Q)`; returns the input unchanged when already saturated.
    pub fn saturate(&self) -> Sublattice {
        if self.is_saturated() {
            return self.clone();
        }
        let s = snf(&self.basis);
        let vinv = s
            .right
            .to_rat()
            .inverse()
            .and_then(|m| m.to_int())
            .expect("unimodular transform has integral inverse");
        let k = self.rank();
        let rows: Vec<usize> = (0..k).collect();
        let (h, _) = hnf(&vinv.select_rows(&rows));
        Sublattice {
            ambient: self.ambient.clone(),
            basis: h,
        }
    }

    /// `{x ∈ ambient : x · a = 0 for all a}`.
    pub fn orthogonal_complement(&self) -> Sublattice {
        let n = self.ambient.rank();
        if self.rank() == 0 {
            return Sublattice {
                ambient: self.ambient.clone(),
                basis: IntMatrix::identity(n),
            };
        }
        let m = self.ambient.gram().mul(&self.basis.transpose());
        Sublattice {
            ambient: self.ambient.clone(),
            basis: left_kernel(&m),
        }
    }

    /// The sublattice spanned by both bases.
    pub fn sum(&self, other: &Sublattice) -> Result<Sublattice> {
        let stacked = self.basis.vstack(&other.basis);
        let b = crate::exact::row_basis(&stacked);
        Sublattice::new(self.ambient.clone(), b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    #[test]
    fn validation() {
        assert!(Lattice::from_rows(&[vec![1, 2], vec![3, 4]]).is_err());
        let e = Lattice::from_rows(&[vec![1, 2], vec![2, 1]]).unwrap_err();
        assert!(e.to_string().contains("positive definite"));
        assert!(Lattice::from_rows(&[vec![2, 1], vec![1, 2]]).is_ok());
    }

    #[test]
    fn parity_examples() {
        assert_eq!(lattice_z(1).parity(), Parity::Odd);
        assert_eq!(lattice_e(8).unwrap().parity(), Parity::Even);
        assert_eq!(lattice_a(1).direct_sum(&lattice_z(1)).parity(), Parity::Odd);
    }

    #[test]
    fn dual_examples() {
        assert_eq!(lattice_z(3).dual(), RatMatrix::identity(3));
        assert_eq!(lattice_a(1).dual()[(0, 0)], crate::exact::rat(1, 2));
        assert_eq!(lattice_d(4).unwrap().dual().det(), crate::exact::rat(1, 4));
    }

    #[test]
    fn direct_sums() {
        assert_eq!(
            lattice_z(1).direct_sum(&lattice_z(1)).gram(),
            lattice_z(2).gram()
        );
        let e8 = lattice_e(8).unwrap();
        let ee = e8.direct_sum(&e8);
        assert_eq!(ee.rank(), 16);
        assert!(ee.is_unimodular() && ee.is_even());
        let empty = Lattice::new(IntMatrix::zeros(0, 0)).unwrap();
        assert_eq!(lattice_a(1).direct_sum(&empty).gram(), lattice_a(1).gram());
    }

    #[test]
    fn saturation_examples() {
        let z1 = lattice_z(1);
        let two = Sublattice::new(z1.clone(), IntMatrix::from_rows(&[vec![2i64]])).unwrap();
        assert_eq!(two.saturate().basis(), &IntMatrix::identity(1));
        let z3 = lattice_z(3);
        let a = Sublattice::new(
            z3.clone(),
            IntMatrix::from_rows(&[vec![2i64, 0, 0], vec![0, 2, 0]]),
        )
        .unwrap();
        let s = a.saturate();
        assert_eq!(
            s.basis(),
            &IntMatrix::from_rows(&[vec![1i64, 0, 0], vec![0, 1, 0]])
        );
        assert_eq!(a.saturation_index(), int(4));
        let e1 = Sublattice::new(z3, IntMatrix::from_rows(&[vec![1i64, 0, 0]])).unwrap();
        assert_eq!(e1.saturate(), e1);
    }

    #[test]
    fn complements() {
        let z3 = lattice_z(3);
        let e1 = Sublattice::new(z3.clone(), IntMatrix::from_rows(&[vec![1i64, 0, 0]])).unwrap();
        let b = e1.orthogonal_complement();
        assert_eq!(b.rank(), 2);
        assert!(b.basis().mul(&e1.basis().transpose()).is_zero());
        let full = Sublattice::new(z3.clone(), IntMatrix::identity(3)).unwrap();
        assert_eq!(full.orthogonal_complement().rank(), 0);
        // a root of E8 has complement of determinant 2 (an E7)
        let e8 = lattice_e(8).unwrap();
        let mut r = vec![0i64; 8];
        r[0] = 1;
        let a1 = Sublattice::new(e8, IntMatrix::from_rows(&[r])).unwrap();
        let b = a1.orthogonal_complement();
        assert_eq!(b.rank(), 7);
        assert_eq!(b.lattice().det(), int(2));
    }
}

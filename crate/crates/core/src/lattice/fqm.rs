use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::Lattice;
use crate::error::{Error, Result};
use crate::exact::{snf, IntMatrix, RatMatrix};

/// Largest group order for which element-wise enumeration is allowed.
pub const ELEMENT_CAP: u64 = 1 << 20;

/// Finite abelian group `⊕ Z/d_i` with a Q/Z-valued bilinear form and
/// optionally a quadratic refinement.
///
/// All values are stored as numerators over the common denominator
/// `level = 2 · exponent`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FiniteQuadraticModule {
    orders: Vec<u64>,
    level: u64,
    bil: Vec<u64>,
    quad: Option<Vec<u64>>,
}

fn to_level(x: &BigRational, level: u64) -> Result<u64> {
    let scaled = x * BigRational::from_integer(BigInt::from(level));
    if !scaled.is_integer() {
        return Err(Error::InvalidLattice(format!(
            "value {x} is not a multiple of 1/{level}"
        )));
    }
    let l = BigInt::from(level);
    Ok(scaled.to_integer().mod_floor(&l).to_u64().unwrap())
}

impl FiniteQuadraticModule {
    pub fn trivial() -> Self {
        FiniteQuadraticModule {
            orders: vec![],
            level: 2,
            bil: vec![],
            quad: Some(vec![]),
        }
    }

    /// Builds a module from rational generator values (reduced mod 1 here).
    pub fn from_rationals(
        orders: Vec<u64>,
        bilinear: &[Vec<BigRational>],
        quadratic: Option<&[BigRational]>,
    ) -> Result<Self> {
        let g = orders.len();
        if orders.iter().any(|&d| d < 2) {
            return Err(Error::InvalidLattice("cyclic factor of order < 2".into()));
        }
        if orders.windows(2).any(|w| w[1] % w[0] != 0) {
            return Err(Error::InvalidLattice(
                "orders must form a divisibility chain".into(),
            ));
        }
        let exponent = orders.last().copied().unwrap_or(1);
        let level = exponent
            .checked_mul(2)
            .ok_or(Error::Overflow("residue exponent"))?;
        let mut bil = vec![0u64; g * g];
        for i in 0..g {
            for j in 0..g {
                bil[i * g + j] = to_level(&bilinear[i][j], level)?;
            }
        }
        let quad = match quadratic {
            None => None,
            Some(q) => Some(
                q.iter()
                    .map(|x| to_level(x, level))
                    .collect::<Result<Vec<_>>>()?,
            ),
        };
        let m = FiniteQuadraticModule {
            orders,
            level,
            bil,
            quad,
        };
        if !m.is_well_defined() {
            return Err(Error::InvalidLattice(
                "bilinear or quadratic values are incompatible with the orders".into(),
            ));
        }
        Ok(m)
    }

    pub fn orders(&self) -> &[u64] {
        &self.orders
    }

    /// Minimal number of generators.
    pub fn num_generators(&self) -> usize {
        self.orders.len()
    }

    pub fn order(&self) -> u64 {
        self.orders.iter().product()
    }

    pub fn is_trivial(&self) -> bool {
        self.orders.is_empty()
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn has_quadratic(&self) -> bool {
        self.quad.is_some()
    }

    fn num_to_rat(&self, n: u64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(self.level))
    }

    pub fn bilinear(&self, i: usize, j: usize) -> BigRational {
        self.num_to_rat(self.bil[i * self.orders.len() + j])
    }

    pub fn bilinear_matrix(&self) -> Vec<Vec<BigRational>> {
        let g = self.orders.len();
        (0..g)
            .map(|i| (0..g).map(|j| self.bilinear(i, j)).collect())
            .collect()
    }

    pub fn quadratic(&self, i: usize) -> Option<BigRational> {
        self.quad.as_ref().map(|q| self.num_to_rat(q[i]))
    }

    pub fn quadratic_values(&self) -> Option<Vec<BigRational>> {
        self.quad
            .as_ref()
            .map(|q| q.iter().map(|&x| self.num_to_rat(x)).collect())
    }

    /// `b(x, y)` as a numerator over `level`.
    pub fn b_num(&self, x: &[u64], y: &[u64]) -> u64 {
        let g = self.orders.len();
        let l = self.level as u128;
        let mut s: u128 = 0;
        for i in 0..g {
            if x[i] == 0 {
                continue;
            }
            for j in 0..g {
                if y[j] != 0 {
                    s = (s + x[i] as u128 * y[j] as u128 % l * self.bil[i * g + j] as u128) % l;
                }
            }
        }
        s as u64
    }

    pub fn b(&self, x: &[u64], y: &[u64]) -> BigRational {
        self.num_to_rat(self.b_num(x, y))
    }

    /// `q(x)` as a numerator over `level`, if the module is quadratic.
    pub fn q_num(&self, x: &[u64]) -> Option<u64> {
        let q = self.quad.as_ref()?;
        let g = self.orders.len();
        let l = self.level as u128;
        let mut s: u128 = 0;
        for i in 0..g {
            if x[i] == 0 {
                continue;
            }
            s = (s + (x[i] as u128 * x[i] as u128) % l * q[i] as u128) % l;
            for j in i + 1..g {
                if x[j] != 0 {
                    s = (s + x[i] as u128 * x[j] as u128 % l * self.bil[i * g + j] as u128) % l;
                }
            }
        }
        Some(s as u64)
    }

    pub fn q(&self, x: &[u64]) -> Option<BigRational> {
        self.q_num(x).map(|n| self.num_to_rat(n))
    }

    pub fn add(&self, x: &[u64], y: &[u64]) -> Vec<u64> {
        x.iter()
            .zip(y)
            .zip(&self.orders)
            .map(|((a, b), d)| (a + b) % d)
            .collect()
    }

    pub fn neg(&self, x: &[u64]) -> Vec<u64> {
        x.iter()
            .zip(&self.orders)
            .map(|(a, d)| (d - a) % d)
            .collect()
    }

    pub fn zero(&self) -> Vec<u64> {
        vec![0; self.orders.len()]
    }

    pub fn generator(&self, i: usize) -> Vec<u64> {
        let mut v = self.zero();
        v[i] = 1;
        v
    }

    /// Element with mixed-radix index `idx` (first coordinate fastest).
    pub fn element(&self, mut idx: u64) -> Vec<u64> {
        self.orders
            .iter()
            .map(|&d| {
                let c = idx % d;
                idx /= d;
                c
            })
            .collect()
    }

    pub fn index_of(&self, x: &[u64]) -> u64 {
        let mut idx = 0;
        for (c, d) in x.iter().zip(&self.orders).rev() {
            idx = idx * d + c;
        }
        idx
    }

    pub fn elements(&self) -> Result<Vec<Vec<u64>>> {
        let n = self.order();
        if n > ELEMENT_CAP {
            return Err(Error::ResourceLimit(format!(
                "discriminant group of order {n} is too large to enumerate"
            )));
        }
        Ok((0..n).map(|i| self.element(i)).collect())
    }

    /// Order of an element.
    pub fn element_order(&self, x: &[u64]) -> u64 {
        x.iter()
            .zip(&self.orders)
            .fold(1u64, |acc, (&c, &d)| acc.lcm(&(d / c.gcd(&d))))
    }

    /// Same group with `b` and `q` negated.
    pub fn negated(&self) -> Self {
        let l = self.level;
        FiniteQuadraticModule {
            orders: self.orders.clone(),
            level: l,
            bil: self.bil.iter().map(|&x| (l - x) % l).collect(),
            quad: self
                .quad
                .as_ref()
                .map(|q| q.iter().map(|&x| (l - x) % l).collect()),
        }
    }

    /// Generator values respect the orders: `d_i b(g_i, g_j) ≡ 0` and `d_i q(g_i) ≡ ...`.
    fn is_well_defined(&self) -> bool {
        let g = self.orders.len();
        let l = self.level as u128;
        for i in 0..g {
            for j in 0..g {
                if self.bil[i * g + j] != self.bil[j * g + i] {
                    return false;
                }
                if self.orders[i] as u128 * self.bil[i * g + j] as u128 % l != 0 {
                    return false;
                }
            }
            if let Some(q) = &self.quad {
                if (2 * q[i] as u128) % l != self.bil[i * g + i] as u128 {
                    return false;
                }
                let d = self.orders[i] as u128;
                if d * d % l * q[i] as u128 % l != 0 {
                    return false;
                }
            }
        }
        true
    }

    /// Brute-force nondegeneracy check: only 0 pairs trivially with everything.
    pub fn is_nondegenerate(&self) -> Result<bool> {
        let els = self.elements()?;
        let g = self.orders.len();
        for x in els.iter().skip(1) {
            if (0..g).all(|i| self.b_num(x, &self.generator(i)) == 0) {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

/// The discriminant form of a lattice together with the maps between
/// `L♯` and generator coordinates.
#[derive(Clone, Debug)]
pub struct Residue {
    module: FiniteQuadraticModule,
    lifts: RatMatrix,
    proj: IntMatrix,
}

impl Residue {
    pub fn of(l: &Lattice) -> Result<Self> {
        let n = l.rank();
        if n == 0 {
            return Ok(Residue {
                module: FiniteQuadraticModule::trivial(),
                lifts: RatMatrix::zeros(0, 0),
                proj: IntMatrix::zeros(0, 0),
            });
        }
        let g = l.gram();
        let s = snf(g);
        let kept: Vec<usize> = (0..n).filter(|&i| !s.diagonal[i].is_one()).collect();
        let orders = kept
            .iter()
            .map(|&i| {
                s.diagonal[i]
                    .to_u64()
                    .ok_or(Error::Overflow("residue order"))
            })
            .collect::<Result<Vec<u64>>>()?;
        let uinv = s
            .left
            .to_rat()
            .inverse()
            .expect("unimodular transform is invertible");
        let ginv = l.dual();
        // lifts: rows are G^{-1} U^{-1} e_i
        let full = ginv.mul(&uinv).transpose();
        let lifts = RatMatrix::from_fn(kept.len(), n, |a, j| full[(kept[a], j)].clone());
        let ug = s.left.mul(g);
        let proj = ug.select_rows(&kept);
        let w = lifts.mul(&g.to_rat()).mul(&lifts.transpose());
        let k = kept.len();
        let bilinear: Vec<Vec<BigRational>> = (0..k)
            .map(|i| (0..k).map(|j| w[(i, j)].clone()).collect())
            .collect();
        let quad: Option<Vec<BigRational>> = if l.is_even() {
            let half = BigRational::new(BigInt::one(), BigInt::from(2));
            Some((0..k).map(|i| &w[(i, i)] * &half).collect())
        } else {
            None
        };
        let module = FiniteQuadraticModule::from_rationals(orders, &bilinear, quad.as_deref())?;
        Ok(Residue {
            module,
            lifts,
            proj,
        })
    }

    pub fn module(&self) -> &FiniteQuadraticModule {
        &self.module
    }

    /// A dual vector (lattice coordinates) representing the class `x`.
    pub fn lift(&self, x: &[u64]) -> Vec<BigRational> {
        let n = self.lifts.cols();
        let mut v = vec![BigRational::zero(); n];
        for (a, &c) in x.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let c = BigRational::from_integer(BigInt::from(c));
            for j in 0..n {
                v[j] += &c * &self.lifts[(a, j)];
            }
        }
        v
    }

    /// Class of a dual vector given in lattice coordinates.
    pub fn project(&self, x: &[BigRational]) -> Result<Vec<u64>> {
        let n = self.proj.cols();
        let mut out = Vec::with_capacity(self.proj.rows());
        for a in 0..self.proj.rows() {
            let mut s = BigRational::zero();
            for j in 0..n {
                s += BigRational::from_integer(self.proj[(a, j)].clone()) * &x[j];
            }
            if !s.is_integer() {
                return Err(Error::Precondition(
                    "vector is not in the dual lattice".into(),
                ));
            }
            let d = BigInt::from(self.module.orders()[a]);
            out.push(s.to_integer().mod_floor(&d).to_u64().unwrap());
        }
        Ok(out)
    }

    /// Class of an integral-combination dual vector given as `G^{-1} y`.
    pub fn lifts(&self) -> &RatMatrix {
        &self.lifts
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;
    use crate::lattice::{lattice_a, lattice_d, lattice_e, lattice_z};

    #[test]
    fn examples() {
        assert!(lattice_z(8).residue().unwrap().module().is_trivial());
        let a1 = lattice_a(1).residue().unwrap();
        assert_eq!(a1.module().orders(), &[2]);
        assert_eq!(a1.module().q(&[1]).unwrap(), rat(1, 4));
        let d4 = lattice_d(4).unwrap().residue().unwrap();
        let m = d4.module();
        assert_eq!(m.orders(), &[2, 2]);
        for x in m.elements().unwrap().iter().skip(1) {
            assert_eq!(m.q(x).unwrap(), rat(1, 2));
        }
        assert!(m.is_nondegenerate().unwrap());
        let e7 = lattice_e(7).unwrap().residue().unwrap();
        assert_eq!(e7.module().q(&[1]).unwrap(), rat(3, 4));
    }

    #[test]
    fn lift_project_round_trip() {
        let r = lattice_d(6).unwrap().residue().unwrap();
        for x in r.module().elements().unwrap() {
            assert_eq!(r.project(&r.lift(&x)).unwrap(), x);
        }
    }

    fn random_lattice(n: usize, e: &[i64]) -> Option<Lattice> {
        // B Bᵀ + diagonal shift keeps things positive definite and integral
        let b = IntMatrix::from_fn(n, n, |i, j| BigInt::from(e[i * 6 + j]));
        let mut g = b.mul(&b.transpose());
        for i in 0..n {
            g[(i, i)] += BigInt::from(1);
        }
        Lattice::new(g).ok()
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(100))]
        #[test]
        fn orders_multiply_to_det(n in 1usize..=6, e in proptest::collection::vec(-2i64..=2, 36)) {
            let l = random_lattice(n, &e).unwrap();
            let r = l.residue().unwrap();
            proptest::prop_assert_eq!(BigInt::from(r.module().order()), l.det());
        }

        #[test]
        fn q_refines_b(n in 1usize..=4, e in proptest::collection::vec(-2i64..=2, 36)) {
            let l = random_lattice(n, &e).unwrap();
            let g = IntMatrix::from_fn(n, n, |i, j| &l.gram()[(i, j)] * BigInt::from(2));
            let even = Lattice::new(g).unwrap();
            let r = even.residue().unwrap();
            let m = r.module();
            if m.order() <= 64 {
                let els = m.elements().unwrap();
                for x in &els {
                    for y in &els {
                        let lhs = m.q(&m.add(x, y)).unwrap() - m.q(x).unwrap() - m.q(y).unwrap();
                        let diff = lhs - m.b(x, y);
                        proptest::prop_assert!(diff.is_integer());
                    }
                }
                proptest::prop_assert!(m.is_nondegenerate().unwrap());
            }
        }
    }
}

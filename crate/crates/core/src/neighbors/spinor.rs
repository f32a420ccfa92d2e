use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::modp::prime_factors;
use crate::exact::{IntMatrix, RatMatrix};
use crate::lattice::{Lattice, Parity, Sublattice};

/// An element of `Q^×/Q^×²`, stored as a squarefree integer.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SquareClass(BigInt);

const TRIAL_LIMIT: u64 = 1_000_000;

/// Squarefree part of a nonzero integer.
fn squarefree(n: &BigInt) -> Result<BigInt> {
    assert!(!n.is_zero());
    let sign = if n.is_negative() {
        -BigInt::one()
    } else {
        BigInt::one()
    };
    let mut m = n.abs();
    let mut out = BigInt::one();
    let mut d = 2u64;
    while d < TRIAL_LIMIT && m > BigInt::one() {
        let bd = BigInt::from(d);
        if &bd * &bd > m {
            break;
        }
        let mut e = 0;
        while m.is_multiple_of(&bd) {
            m /= &bd;
            e += 1;
        }
        if e % 2 == 1 {
            out *= &bd;
        }
        d += if d == 2 { 1 } else { 2 };
    }
    if m > BigInt::one() {
        let r = m.sqrt();
        if &r * &r == m {
            return Ok(sign * out);
        }
        // m has no prime factor below the trial limit, so below limit³ it is p, pq or p²
        let lim = BigInt::from(TRIAL_LIMIT);
        if m >= &lim * &lim * &lim && BigInt::from(d) >= lim {
            return Err(Error::ResourceLimit(
                "cofactor too large to certify squarefree".into(),
            ));
        }
        out *= m;
    }
    Ok(sign * out)
}

impl SquareClass {
    pub fn one() -> Self {
        SquareClass(BigInt::one())
    }

    pub fn from_integer(n: &BigInt) -> Result<Self> {
        if n.is_zero() {
            return Err(Error::Precondition("zero has no square class".into()));
        }
        Ok(SquareClass(squarefree(n)?))
    }

    pub fn from_rational(x: &BigRational) -> Result<Self> {
        Self::from_integer(&(x.numer() * x.denom()))
    }

    pub fn value(&self) -> &BigInt {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn mul(&self, other: &SquareClass) -> SquareClass {
        let g = self.0.gcd(&other.0);
        SquareClass(&self.0 * &other.0 / (&g * &g))
    }

    /// Parity of the `p`-adic valuation.
    pub fn valuation_is_odd(&self, p: u64) -> bool {
        (&self.0 % BigInt::from(p)).is_zero()
    }
}

impl fmt::Display for SquareClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

fn is_isometry(g: &RatMatrix, gram: &RatMatrix) -> bool {
    g.transpose().mul(gram).mul(g) == *gram
}

/// Spinor norm of `g ∈ O(V)`, with `gᵀ · gram · g = gram` (columns are images).
///
/// Factors `g` into reflections `s_v` fixing one basis vector at a time and
/// multiplies the classes of `q(v) = v·v/2`.
pub fn spinor_norm(g: &RatMatrix, gram: &IntMatrix) -> Result<SquareClass> {
    let n = gram.rows();
    if g.rows() != n || g.cols() != n {
        return Err(Error::Dimension(
            "isometry and Gram matrix differ in size".into(),
        ));
    }
    let gr = gram.to_rat();
    if !is_isometry(g, &gr) {
        return Err(Error::NotIsometry);
    }
    let half = BigRational::new(1.into(), 2.into());
    let dot = |x: &[BigRational], y: &[BigRational]| -> BigRational {
        let mut s = BigRational::zero();
        for i in 0..n {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..n {
                if !y[j].is_zero() {
                    s += &x[i] * &gr.row(i)[j] * &y[j];
                }
            }
        }
        s
    };
    // columns of h
    let mut cols: Vec<Vec<BigRational>> = (0..n)
        .map(|j| (0..n).map(|i| g.row(i)[j].clone()).collect())
        .collect();
    let mut sn = SquareClass::one();
    for i in 0..n {
        let mut v = cols[i].clone();
        v[i] -= BigRational::one();
        if v.iter().all(|x| x.is_zero()) {
            continue;
        }
        let vv = dot(&v, &v);
        sn = sn.mul(&SquareClass::from_rational(&(&vv * &half))?);
        // h ← s_v h, s_v(x) = x − 2 (x·v)/(v·v) v
        for c in cols.iter_mut() {
            let t = dot(c, &v) * BigRational::from_integer(2.into()) / &vv;
            if t.is_zero() {
                continue;
            }
            for (ci, vi) in c.iter_mut().zip(&v) {
                *ci -= &t * vi;
            }
        }
        debug_assert!((0..n).all(|r| cols[i][r]
            == if r == i {
                BigRational::one()
            } else {
                BigRational::zero()
            }));
    }
    Ok(sn)
}

/// Reason the genus (or inertial genus) is a single spinor genus.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum SpinorCertificate {
    /// `det L = 1`
    Unimodular,
    /// for every prime `p | 2 det L`, the `p`-rank `g_p` of the discriminant group
    /// satisfies `g_p ≤ n − 2` (`n − 3` at `p = 2` for odd `L`)
    LocalBound {
        rank: usize,
        p_ranks: Vec<(u64, usize)>,
    },
    /// inertial genus of `B = A^⊥` in a unimodular lattice of rank `m`
    Inertial {
        rank_a: usize,
        generators: usize,
        m: usize,
        complement_parity: Parity,
    },
}

/// Conservative certificate that the genus of `l` is one spinor genus; `None` means unknown.
pub fn sigma_trivial(l: &Lattice) -> Option<SpinorCertificate> {
    let n = l.rank();
    let det = l.det();
    if det.is_one() {
        return Some(SpinorCertificate::Unimodular);
    }
    let res = l.residue().ok()?;
    let orders = res.module().orders();
    let mut primes = prime_factors(&det);
    if !primes.contains(&2) {
        primes.insert(0, 2);
    }
    let mut p_ranks = Vec::new();
    for p in primes {
        let g = orders.iter().filter(|&&o| o % p == 0).count();
        let slack = if p == 2 && !l.is_even() { 3 } else { 2 };
        if g + slack > n {
            return None;
        }
        p_ranks.push((p, g));
    }
    Some(SpinorCertificate::LocalBound { rank: n, p_ranks })
}

/// Certificate that the inertial genus of `B = L ∩ A^⊥` is a single spinor genus,
/// for `L` unimodular and `A` saturated.
pub fn sigma_trivial_inertial(a: &Sublattice) -> Option<SpinorCertificate> {
    let l = a.ambient();
    if !l.is_unimodular() || !a.is_saturated() {
        return None;
    }
    let m = l.rank();
    let rank_a = a.rank();
    let generators = a.lattice().residue().ok()?.module().num_generators();
    let b = a.orthogonal_complement().lattice();
    let complement_parity = b.parity();
    let slack = if b.is_even() { 2 } else { 3 };
    if rank_a + generators + slack > m {
        return None;
    }
    Some(SpinorCertificate::Inertial {
        rank_a,
        generators,
        m,
        complement_parity,
    })
}

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::modp::{is_prime, legendre, valuation};
use crate::lattice::Lattice;

/// One Jordan constituent over `Z_p`: scale `p^scale`, rank, and whether the
/// determinant of the unit part is a square.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct JordanBlock {
    pub scale: u32,
    pub rank: usize,
    pub square: bool,
}

fn val_rat(x: &BigRational, p: u64) -> i64 {
    valuation(x.numer(), p) as i64 - valuation(x.denom(), p) as i64
}

/// Unit part `x / p^v(x)` reduced to a Legendre symbol.
fn unit_legendre(x: &BigRational, p: u64) -> i32 {
    let bp = BigInt::from(p);
    let mut n = x.numer().clone();
    let mut d = x.denom().clone();
    while (&n % &bp).is_zero() {
        n /= &bp;
    }
    while (&d % &bp).is_zero() {
        d /= &bp;
    }
    legendre(&(n * d), p)
}

/// Jordan decomposition of `L ⊗ Z_p` for odd `p`, blocks sorted by scale.
pub fn genus_symbol_odd(l: &Lattice, p: u64) -> Result<Vec<JordanBlock>> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p == 2 {
        return Err(Error::UnsupportedPrime(
            "the Jordan symbol is only implemented at odd primes".into(),
        ));
    }
    let n = l.rank();
    let mut a: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| BigRational::from_integer(l.gram()[(i, j)].clone()))
                .collect()
        })
        .collect();
    let mut diag: Vec<BigRational> = Vec::with_capacity(n);
    let mut live: Vec<usize> = (0..n).collect();
    while !live.is_empty() {
        // entry of minimal valuation; prefer the diagonal
        let mut best: Option<(i64, usize, usize)> = None;
        for (x, &i) in live.iter().enumerate() {
            for &j in &live[x..] {
                if a[i][j].is_zero() {
                    continue;
                }
                let v = val_rat(&a[i][j], p);
                let better = match best {
                    None => true,
                    Some((bv, bi, bj)) => v < bv || (v == bv && i == j && bi != bj),
                };
                if better {
                    best = Some((v, i, j));
                }
            }
        }
        let (_, i, j) = best.expect("nondegenerate form");
        if i != j {
            // e_i ← e_i + e_j makes the diagonal entry have the minimal valuation
            for k in 0..n {
                let t = a[j][k].clone();
                a[i][k] += t;
            }
            for k in 0..n {
                let t = a[k][j].clone();
                a[k][i] += t;
            }
        }
        let piv = a[i][i].clone();
        live.retain(|&k| k != i);
        for &r in &live {
            if a[r][i].is_zero() {
                continue;
            }
            let f = &a[r][i] / &piv;
            for &c in &live {
                let t = &f * &a[i][c];
                a[r][c] -= t;
            }
        }
        for &r in &live {
            a[r][i] = BigRational::zero();
            a[i][r] = BigRational::zero();
        }
        diag.push(piv);
    }
    let mut blocks: Vec<(u32, usize, i32)> = Vec::new();
    for d in &diag {
        let v = val_rat(d, p);
        debug_assert!(v >= 0);
        let v = v as u32;
        let s = unit_legendre(d, p);
        match blocks.iter_mut().find(|b| b.0 == v) {
            Some(b) => {
                b.1 += 1;
                b.2 *= s;
            }
            None => blocks.push((v, 1, s)),
        }
    }
    blocks.sort();
    Ok(blocks
        .into_iter()
        .map(|(scale, rank, s)| JordanBlock {
            scale,
            rank,
            square: s == 1,
        })
        .collect())
}

/// Equality of odd-`p` Jordan symbols, i.e. `L1 ⊗ Z_p ≅ L2 ⊗ Z_p`.
pub fn same_genus_odd(l1: &Lattice, l2: &Lattice, p: u64) -> Result<bool> {
    Ok(l1.rank() == l2.rank() && genus_symbol_odd(l1, p)? == genus_symbol_odd(l2, p)?)
}

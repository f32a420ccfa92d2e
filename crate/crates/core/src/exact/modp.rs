use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{ToPrimitive, Zero};

use super::matrix::IntMatrix;
use crate::error::{Error, Result};

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

/// Deterministic Miller-Rabin for 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d % 2 == 0 {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

pub fn require_prime(p: u64) -> Result<()> {
    if is_prime(p) {
        Ok(())
    } else {
        Err(Error::NotPrime(p))
    }
}

/// Reduces a big integer into `[0, p)`.
pub fn reduce(x: &BigInt, p: u64) -> u64 {
    x.mod_floor(&BigInt::from(p))
        .to_u64()
        .expect("residue fits in u64")
}

/// Modular inverse for `a` coprime to `m`.
pub fn inv_mod(a: u64, m: u64) -> Option<u64> {
    let e = (a as i128).extended_gcd(&(m as i128));
    if e.gcd != 1 {
        return None;
    }
    Some(e.x.rem_euclid(m as i128) as u64)
}

/// Legendre symbol `(a | p)` for an odd prime `p`.
pub fn legendre(a: &BigInt, p: u64) -> i32 {
    let a = reduce(a, p);
    if a == 0 {
        return 0;
    }
    if pow_mod(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

/// Kronecker symbol `(a | 2)`: 0 for even a, 1 for a ≡ ±1 mod 8, −1 for a ≡ ±3 mod 8.
pub fn kronecker2(a: &BigInt) -> i32 {
    let r = reduce(a, 8);
    match r {
        1 | 7 => 1,
        3 | 5 => -1,
        _ => 0,
    }
}

/// Square root modulo an odd prime by Tonelli-Shanks; `None` if `a` is a non-residue.
pub fn sqrt_mod(a: u64, p: u64) -> Option<u64> {
    let a = a % p;
    if a == 0 {
        return Some(0);
    }
    if p == 2 {
        return Some(a);
    }
    if pow_mod(a, (p - 1) / 2, p) != 1 {
        return None;
    }
    let mut q = p - 1;
    let mut s = 0u32;
    while q % 2 == 0 {
        q /= 2;
        s += 1;
    }
    let mut z = 2;
    while pow_mod(z, (p - 1) / 2, p) != p - 1 {
        z += 1;
    }
    let mut m = s;
    let mut c = pow_mod(z, q, p);
    let mut t = pow_mod(a, q, p);
    let mut r = pow_mod(a, q.div_ceil(2), p);
    while t != 1 {
        let mut i = 0;
        let mut tt = t;
        while tt != 1 {
            tt = mul_mod(tt, tt, p);
            i += 1;
        }
        let b = pow_mod(c, 1 << (m - i - 1), p);
        m = i;
        c = mul_mod(b, b, p);
        t = mul_mod(t, c, p);
        r = mul_mod(r, b, p);
    }
    Some(r)
}

/// Dense matrix over F_p, row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ModMatrix {
    pub p: u64,
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<u64>,
}

impl ModMatrix {
    pub fn from_int(m: &IntMatrix, p: u64) -> Self {
        ModMatrix {
            p,
            rows: m.rows(),
            cols: m.cols(),
            data: m.entries().iter().map(|x| reduce(x, p)).collect(),
        }
    }

    pub fn from_rows(rows: &[Vec<u64>], cols: usize, p: u64) -> Self {
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols);
            data.extend(r.iter().map(|x| x % p));
        }
        ModMatrix {
            p,
            rows: rows.len(),
            cols,
            data,
        }
    }

    pub fn get(&self, i: usize, j: usize) -> u64 {
        self.data[i * self.cols + j]
    }

    /// In-place reduced row echelon form; returns pivot columns.
    pub fn rref(&mut self) -> Vec<usize> {
        let p = self.p;
        let (rows, cols) = (self.rows, self.cols);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(piv) = (r..rows).find(|&i| self.data[i * cols + c] != 0) else {
                continue;
            };
            if piv != r {
                for j in 0..cols {
                    self.data.swap(piv * cols + j, r * cols + j);
                }
            }
            let inv = inv_mod(self.data[r * cols + c], p).expect("nonzero element is invertible");
            for j in 0..cols {
                self.data[r * cols + j] = mul_mod(self.data[r * cols + j], inv, p);
            }
            for i in 0..rows {
                if i == r {
                    continue;
                }
                let f = self.data[i * cols + c];
                if f == 0 {
                    continue;
                }
                for j in 0..cols {
                    let v = mul_mod(f, self.data[r * cols + j], p);
                    self.data[i * cols + j] = (self.data[i * cols + j] + p - v) % p;
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    pub fn rank(&self) -> usize {
        self.clone().rref().len()
    }

    /// Basis of `{v : self * v = 0}`.
    pub fn kernel(&self) -> Vec<Vec<u64>> {
        let mut a = self.clone();
        let pivots = a.rref();
        let p = self.p;
        let cols = self.cols;
        let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![0u64; cols];
                v[f] = 1;
                for (r, &pc) in pivots.iter().enumerate() {
                    let x = a.data[r * cols + f];
                    v[pc] = (p - x) % p;
                }
                v
            })
            .collect()
    }
}

/// Null space of `m` over F_p: `{v : m v ≡ 0 mod p}`.
pub fn kernel_mod_p(m: &IntMatrix, p: u64) -> Result<Vec<Vec<u64>>> {
    require_prime(p)?;
    Ok(ModMatrix::from_int(m, p).kernel())
}

pub fn rank_mod_p(m: &IntMatrix, p: u64) -> Result<usize> {
    require_prime(p)?;
    Ok(ModMatrix::from_int(m, p).rank())
}

/// Distinct prime factors by trial division.
pub fn prime_factors(n: &BigInt) -> Vec<u64> {
    let mut n = num_traits::Signed::abs(n);
    let mut out = Vec::new();
    let mut d = 2u64;
    while !n.is_zero() && n > BigInt::from(1) {
        let bd = BigInt::from(d);
        if &bd * &bd > n {
            out.push(
                n.to_u64()
                    .expect("prime factor beyond trial division range"),
            );
            break;
        }
        if n.is_multiple_of(&bd) {
            out.push(d);
            while n.is_multiple_of(&bd) {
                n /= &bd;
            }
        }
        d += if d == 2 { 1 } else { 2 };
    }
    out
}

/// `p`-adic valuation; panics on zero.
pub fn valuation(n: &BigInt, p: u64) -> u32 {
    assert!(!n.is_zero(), "valuation of zero");
    let bp = BigInt::from(p);
    let mut n = n.clone();
    let mut v = 0;
    while n.is_multiple_of(&bp) {
        n /= &bp;
        v += 1;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        let ps: Vec<u64> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(ps, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
        assert!(is_prime(1_000_000_007));
        assert!(!is_prime(1_000_000_007 * 3));
    }

    #[test]
    fn kernels() {
        assert!(kernel_mod_p(&IntMatrix::identity(3), 5).unwrap().is_empty());
        let row = IntMatrix::from_rows(&[vec![1i64, 1, 1]]);
        let k = kernel_mod_p(&row, 3).unwrap();
        assert_eq!(k.len(), 2);
        for v in &k {
            assert_eq!(v.iter().sum::<u64>() % 3, 0);
        }
        assert!(kernel_mod_p(&IntMatrix::identity(3), 3).unwrap().is_empty());
        assert!(matches!(kernel_mod_p(&row, 4), Err(Error::NotPrime(4))));
    }

    #[test]
    fn square_roots() {
        for p in [3u64, 5, 7, 11, 13, 17, 97, 193] {
            for a in 0..p {
                match sqrt_mod(a, p) {
                    Some(r) => assert_eq!(r * r % p, a),
                    None => assert_eq!(legendre(&BigInt::from(a), p), -1),
                }
            }
        }
    }

    #[test]
    fn factors() {
        assert_eq!(prime_factors(&BigInt::from(360)), vec![2, 3, 5]);
        assert_eq!(prime_factors(&BigInt::from(1)), Vec::<u64>::new());
        assert_eq!(valuation(&BigInt::from(-48), 2), 4);
    }

    proptest::proptest! {
        #[test]
        fn kernel_vectors_vanish(
            r in 1usize..5, c in 1usize..6,
            pi in 0usize..4,
            e in proptest::collection::vec(-20i64..20, 30),
        ) {
            let p = [2u64, 3, 5, 7][pi];
            let m = IntMatrix::from_fn(r, c, |i, j| BigInt::from(e[i * 6 + j]));
            let k = kernel_mod_p(&m, p).unwrap();
            let mm = ModMatrix::from_int(&m, p);
            proptest::prop_assert_eq!(k.len(), c - mm.rank());
            for v in &k {
                for i in 0..r {
                    let s: u64 = (0..c).map(|j| mm.get(i, j) * v[j]).sum();
                    proptest::prop_assert_eq!(s % p, 0);
                }
            }
            if !k.is_empty() {
                let km = ModMatrix::from_rows(&k, c, p);
                proptest::prop_assert_eq!(km.rank(), k.len());
            }
        }
    }
}

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::lines::{check_neighbor_prime, IsotropicLine};
use crate::error::{Error, Result};
use crate::exact::modp::inv_mod;
use crate::exact::{IntMatrix, RatMatrix};
use crate::lattice::Lattice;

/// A `p`-neighbor `N` of `L`; `basis` rows are a basis of `N` in the coordinates of `L`.
#[derive(Clone, Debug)]
pub struct Neighbor {
    pub lattice: Lattice,
    pub basis: RatMatrix,
    pub p: u64,
}

/// Rows of `p · B_N`, where `B_N` is a basis of the neighbor at the line through `v`.
pub(crate) fn neighbor_rows(gram: &[i64], n: usize, p: u64, v: &[u64]) -> Result<Vec<i64>> {
    let pi = p as i128;
    let k = v
        .iter()
        .position(|&x| x % p != 0)
        .ok_or(Error::NotIsotropic(p))?;
    let vi: Vec<i128> = v.iter().map(|&x| x as i128).collect();
    let gv: Vec<i128> = (0..n)
        .map(|i| (0..n).map(|j| gram[i * n + j] as i128 * vi[j]).sum())
        .collect();
    let vv: i128 = (0..n).map(|i| vi[i] * gv[i]).sum();
    let u: Vec<i128> = gv.iter().map(|x| x.rem_euclid(pi)).collect();
    let isotropic = if p == 2 {
        vv.rem_euclid(4) == 0
    } else {
        vv.rem_euclid(pi) == 0
    };
    if !isotropic {
        return Err(Error::NotIsotropic(p));
    }
    // lift v to x ∈ L with x·x ≡ 0 mod p² (mod 8 when p = 2)
    let j = (0..n)
        .rev()
        .find(|&i| u[i] != 0)
        .expect("form is nondegenerate mod p");
    let t = if p == 2 {
        (vv / 4).rem_euclid(2)
    } else {
        let inv = inv_mod((2 * u[j] % pi) as u64, p).unwrap() as i128;
        ((-(vv / pi)).rem_euclid(pi) * inv).rem_euclid(pi)
    };
    let mut x = vi.clone();
    x[j] += pi * t;
    // basis of M = {y : x·y ≡ 0 mod p}
    let jj = (0..n)
        .rev()
        .find(|&i| i != k && u[i] != 0)
        .expect("isotropic vector has a second nonzero coordinate of Gv");
    let inv = inv_mod(u[jj] as u64, p).unwrap() as i128;
    let c: Vec<i128> = (0..n)
        .map(|i| if i == jj { 0 } else { u[i] * inv % pi })
        .collect();
    let mut a = x.clone();
    let s: i128 = (0..n)
        .filter(|&i| i != jj)
        .map(|i| c[i] * x[i])
        .sum::<i128>()
        + x[jj];
    debug_assert_eq!(s.rem_euclid(pi), 0);
    a[jj] = s / pi;
    for ai in a.iter_mut() {
        *ai = ai.rem_euclid(pi);
    }
    let mut rows = vec![0i128; n * n];
    for r in 0..n {
        if r == k {
            continue;
        }
        if r == jj {
            rows[r * n + jj] = pi * pi;
        } else {
            rows[r * n + r] = pi;
            rows[r * n + jj] = -pi * c[r];
        }
    }
    // x' = Σ a_s m_s replaces row k
    for sidx in 0..n {
        if a[sidx] == 0 {
            continue;
        }
        if sidx == jj {
            rows[k * n + jj] += a[jj] * pi;
        } else {
            rows[k * n + sidx] += a[sidx];
            rows[k * n + jj] -= a[sidx] * c[sidx];
        }
    }
    rows.into_iter()
        .map(|x| i64::try_from(x).map_err(|_| Error::Overflow("neighbor basis")))
        .collect()
}

/// `B_N G B_Nᵀ` from the rows of `p · B_N`.
pub(crate) fn neighbor_gram_from_rows(
    gram: &[i64],
    n: usize,
    p: u64,
    rows: &[i64],
) -> Result<Vec<i64>> {
    let p2 = (p as i128) * (p as i128);
    let mut pg = vec![0i128; n * n];
    for r in 0..n {
        for j in 0..n {
            let mut s = 0i128;
            for i in 0..n {
                let x = rows[r * n + i];
                if x != 0 {
                    s += x as i128 * gram[i * n + j] as i128;
                }
            }
            pg[r * n + j] = s;
        }
    }
    let mut out = vec![0i64; n * n];
    for r in 0..n {
        for c in r..n {
            let s: i128 = (0..n)
                .map(|j| pg[r * n + j] * rows[c * n + j] as i128)
                .sum();
            if s % p2 != 0 {
                return Err(Error::NotNeighbor {
                    p,
                    reason: "neighbor Gram matrix is not integral".into(),
                });
            }
            let v = i64::try_from(s / p2).map_err(|_| Error::Overflow("neighbor Gram"))?;
            out[r * n + c] = v;
            out[c * n + r] = v;
        }
    }
    Ok(out)
}

/// Gram matrix of the neighbor at the line through `v`, in machine words.
pub(crate) fn neighbor_gram(gram: &[i64], n: usize, p: u64, v: &[u64]) -> Result<Vec<i64>> {
    let rows = neighbor_rows(gram, n, p, v)?;
    neighbor_gram_from_rows(gram, n, p, &rows)
}

/// The `p`-neighbor `N = Z x/p + M` for the isotropic line `ℓ`, where
/// `M = {y ∈ L : x·y ≡ 0 mod p}` and `x` is a lift of `ℓ` with
/// `x·x ≡ 0 mod p²` (mod 8 for `p = 2`).
pub fn neighbor(l: &Lattice, line: &IsotropicLine) -> Result<Neighbor> {
    let p = line.p;
    check_neighbor_prime(l, p)?;
    let n = l.rank();
    if line.rep.len() != n {
        return Err(Error::Dimension(format!(
            "line has {} coordinates, lattice has rank {n}",
            line.rep.len()
        )));
    }
    let gram = l
        .gram_i64()
        .ok_or(Error::Overflow("Gram entries exceed machine words"))?;
    let rows = neighbor_rows(&gram, n, p, &line.rep)?;
    let ng = neighbor_gram_from_rows(&gram, n, p, &rows)?;
    let lattice = Lattice::new(IntMatrix::from_i64(n, n, &ng))?;
    let pb = BigInt::from(p);
    let basis = RatMatrix::from_fn(n, n, |i, j| {
        BigRational::new(BigInt::from(rows[i * n + j]), pb.clone())
    });
    Ok(Neighbor { lattice, basis, p })
}

/// Recovers the isotropic line of a `p`-neighbor given by a basis in the coordinates of `L`.
pub fn line_of(l: &Lattice, basis: &RatMatrix, p: u64) -> Result<IsotropicLine> {
    check_neighbor_prime(l, p)?;
    let n = l.rank();
    let not = |reason: &str| Error::NotNeighbor {
        p,
        reason: reason.into(),
    };
    if basis.rows() != n || basis.cols() != n {
        return Err(Error::Dimension(
            "neighbor basis must be square of the lattice rank".into(),
        ));
    }
    let pb = BigInt::from(p);
    let pbm = RatMatrix::from_fn(n, n, |i, j| {
        &basis.row(i)[j] * BigRational::from_integer(pb.clone())
    });
    let pbasis = pbm
        .to_int()
        .ok_or_else(|| not("p·N is not contained in L"))?;
    let gram_n = basis.mul(&l.gram().to_rat()).mul(&basis.transpose());
    let gram_n = gram_n.to_int().ok_or_else(|| not("N is not integral"))?;
    if gram_n.det() != l.det() {
        return Err(not("determinant differs from L"));
    }
    if p == 2 && (0..n).any(|i| !(&gram_n[(i, i)] % BigInt::from(2)).is_zero()) {
        return Err(not("N is not even"));
    }
    if crate::exact::modp::rank_mod_p(&pbasis, p)? != 1 {
        return Err(not("[L + N : L] is not p"));
    }
    let row = (0..n)
        .find(|&i| pbasis.row(i).iter().any(|x| !(x % &pb).is_zero()))
        .unwrap();
    let v: Vec<u64> = pbasis
        .row(row)
        .iter()
        .map(|x| crate::exact::modp::reduce(x, p))
        .collect();
    let line = IsotropicLine::from_vector(p, &v).unwrap();
    let g = l
        .gram_i64()
        .ok_or(Error::Overflow("Gram entries exceed machine words"))?;
    let vv: i128 = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| line.rep[i] as i128 * g[i * n + j] as i128 * line.rep[j] as i128)
                .sum::<i128>()
        })
        .sum();
    let ok = if p == 2 {
        vv % 4 == 0
    } else {
        vv % p as i128 == 0
    };
    if !ok {
        return Err(Error::NotIsotropic(p));
    }
    Ok(line)
}

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::matrix::{to_f64, NeighborStats};
use crate::error::{Error, Result};

/// Largest class count for which the characteristic polynomial is computed exactly.
pub const EXACT_POLY_MAX: usize = 4;

/// Tolerance on `‖Sv − λv‖ / c_V(p)` for the floating eigen-decomposition.
pub const EIGEN_RESIDUAL_TOL: f64 = 1e-9;

/// Outcome of the Petersson identity check.
#[derive(Clone, Debug, Serialize)]
pub struct PeterssonReport {
    pub p: u64,
    pub pairs_checked: usize,
}

/// Checks `N(x, y)·|Γ_y| = N(y, x)·|Γ_x|` for every pair of an exact run.
pub fn petersson_check(stats: &NeighborStats) -> Result<PeterssonReport> {
    require_exact(stats)?;
    let k = stats.counts.len();
    let aut: Vec<&BigInt> = stats.catalog.classes.iter().map(|c| &c.aut_order).collect();
    let mut pairs = 0;
    for x in 0..k {
        for y in x + 1..k {
            let lhs = BigInt::from(stats.counts[x][y]) * aut[y];
            let rhs = BigInt::from(stats.counts[y][x]) * aut[x];
            if lhs != rhs {
                return Err(Error::Identity(format!(
                    "Petersson identity fails at ({x}, {y}): N(x,y)|Γ_y| = {lhs}, N(y,x)|Γ_x| = {rhs}"
                )));
            }
            pairs += 1;
        }
    }
    Ok(PeterssonReport {
        p: stats.p,
        pairs_checked: pairs,
    })
}

fn require_exact(stats: &NeighborStats) -> Result<()> {
    if !stats.mode.is_exact() {
        return Err(Error::Precondition("needs an exact neighbor matrix".into()));
    }
    if !stats.is_complete() {
        return Err(Error::Precondition(
            "needs every row of the neighbor matrix".into(),
        ));
    }
    Ok(())
}

/// Eigenvalues of the mass-symmetrized neighbor matrix.
#[derive(Clone, Debug)]
pub struct SpectrumReport {
    pub p: u64,
    pub c_v: BigInt,
    /// sorted by decreasing absolute value
    pub eigenvalues: Vec<f64>,
    /// `|λ₂| / c_V(p)`; zero for a single class
    pub gap_ratio: f64,
    /// exact characteristic polynomial, ascending coefficients (small catalogs)
    pub char_poly: Option<Vec<BigInt>>,
    /// the polynomial divided by `x − c_V(p)`
    pub deflated: Option<Vec<BigInt>>,
    /// `λ₂` when it is rational by construction (two classes)
    pub second_exact: Option<BigRational>,
    /// largest `‖Sv − λv‖ / c_V(p)` over the computed eigenpairs
    pub residual: f64,
}

/// `det(xI − N)` by Faddeev–LeVerrier, ascending coefficients.
pub fn characteristic_polynomial(n: &[Vec<u64>]) -> Vec<BigInt> {
    let k = n.len();
    let a: Vec<Vec<BigInt>> = n
        .iter()
        .map(|r| r.iter().map(|&v| BigInt::from(v)).collect())
        .collect();
    let mut coef = vec![BigInt::zero(); k + 1];
    coef[k] = BigInt::one();
    let mut m = vec![vec![BigInt::zero(); k]; k];
    for step in 1..=k {
        // M ← A·M + c_{k−step+1}·I
        let mut next = vec![vec![BigInt::zero(); k]; k];
        for i in 0..k {
            for j in 0..k {
                let mut s = BigInt::zero();
                for (l, row) in m.iter().enumerate() {
                    s += &a[i][l] * &row[j];
                }
                next[i][j] = s;
            }
            next[i][i] += &coef[k - step + 1];
        }
        m = next;
        let mut tr = BigInt::zero();
        for i in 0..k {
            for l in 0..k {
                tr += &a[i][l] * &m[l][i];
            }
        }
        coef[k - step] = -tr / BigInt::from(step);
    }
    coef
}

/// Divides an ascending polynomial by `x − r`; errors if `r` is not a root.
pub fn deflate(poly: &[BigInt], r: &BigInt) -> Result<Vec<BigInt>> {
    let d = poly.len() - 1;
    let mut q = vec![BigInt::zero(); d];
    let mut carry = BigInt::zero();
    for i in (1..=d).rev() {
        carry = &poly[i] + carry * r;
        q[i - 1] = carry.clone();
    }
    let rem = &poly[0] + carry * r;
    if !rem.is_zero() {
        return Err(Error::Identity(format!(
            "{r} is not a root of the characteristic polynomial"
        )));
    }
    Ok(q)
}

fn eval(poly: &[BigInt], x: f64) -> f64 {
    poly.iter()
        .rev()
        .fold(0.0, |acc, c| acc * x + c.to_f64().unwrap_or(f64::NAN))
}

/// Spectrum of `D^{1/2} N D^{−1/2}` with `D = diag(1/|Γ_x|)`.
pub fn spectrum(stats: &NeighborStats) -> Result<SpectrumReport> {
    require_exact(stats)?;
    let k = stats.counts.len();
    let c = stats.lines_total.clone();
    // constant vector is an eigenvector with eigenvalue c_V(p), exactly
    for (x, row) in stats.counts.iter().enumerate() {
        let s: BigInt = row.iter().map(|&v| BigInt::from(v)).sum();
        if s != c {
            return Err(Error::Identity(format!("row {x} sums to {s}, not {c}")));
        }
    }
    let aut: Vec<&BigInt> = stats
        .catalog
        .classes
        .iter()
        .map(|cl| &cl.aut_order)
        .collect();
    let s = DMatrix::from_fn(k, k, |x, y| {
        let w = to_f64(&BigRational::new(aut[y].clone(), aut[x].clone())).sqrt();
        stats.counts[x][y] as f64 * w
    });
    let asym = (0..k)
        .flat_map(|x| (0..k).map(move |y| (x, y)))
        .map(|(x, y)| (s[(x, y)] - s[(y, x)]).abs())
        .fold(0.0, f64::max);
    let cf = to_f64(&BigRational::from_integer(c.clone()));
    if asym > EIGEN_RESIDUAL_TOL * cf {
        return Err(Error::Identity(format!(
            "symmetrized matrix is not symmetric (defect {asym:e})"
        )));
    }
    let eig = SymmetricEigen::new(s.clone());
    let mut residual: f64 = 0.0;
    for i in 0..k {
        let v = eig.eigenvectors.column(i);
        let r = (&s * v - v * eig.eigenvalues[i]).norm() / v.norm();
        residual = residual.max(r / cf);
    }
    if residual > EIGEN_RESIDUAL_TOL {
        return Err(Error::Identity(format!(
            "eigen residual {residual:e} exceeds {EIGEN_RESIDUAL_TOL:e}"
        )));
    }
    let mut eigenvalues: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    eigenvalues.sort_by(|a, b| b.abs().total_cmp(&a.abs()).then(b.total_cmp(a)));

    let (mut char_poly, mut deflated, mut second_exact) = (None, None, None);
    if k <= EXACT_POLY_MAX {
        let poly = characteristic_polynomial(&stats.counts);
        let q = deflate(&poly, &c)?;
        // every floating eigenvalue must be a root of the exact polynomial
        let scale = cf.powi(k as i32).max(1.0);
        for &l in &eigenvalues {
            if eval(&poly, l).abs() > 1e-6 * scale {
                return Err(Error::Identity(format!(
                    "eigenvalue {l} is not a root of the exact polynomial"
                )));
            }
        }
        if k == 2 {
            let trace = BigInt::from(stats.counts[0][0]) + BigInt::from(stats.counts[1][1]);
            second_exact = Some(BigRational::from_integer(trace - &c));
        }
        char_poly = Some(poly);
        deflated = Some(q);
    }
    // λ₂: largest remaining eigenvalue once c_V(p) is removed
    let gap_ratio = match &second_exact {
        Some(l2) => to_f64(&(l2.abs() / BigRational::from_integer(c.clone()))),
        None => {
            let top = eigenvalues
                .iter()
                .enumerate()
                .min_by(|a, b| (a.1 - cf).abs().total_cmp(&(b.1 - cf).abs()))
                .map(|(i, _)| i);
            eigenvalues
                .iter()
                .enumerate()
                .filter(|(i, _)| Some(*i) != top)
                .map(|(_, l)| l.abs())
                .fold(0.0, f64::max)
                / cf
        }
    };
    Ok(SpectrumReport {
        p: stats.p,
        c_v: c,
        eigenvalues,
        gap_ratio,
        char_poly,
        deflated,
        second_exact,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(v: &[i64]) -> Vec<BigInt> {
        v.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn char_poly_small() {
        // [[2,1],[1,2]]: x² − 4x + 3
        assert_eq!(
            characteristic_polynomial(&[vec![2, 1], vec![1, 2]]),
            big(&[3, -4, 1])
        );
        // diagonal: (x−1)(x−2)(x−3)
        let d = vec![vec![1, 0, 0], vec![0, 2, 0], vec![0, 0, 3]];
        assert_eq!(characteristic_polynomial(&d), big(&[-6, 11, -6, 1]));
        assert_eq!(
            deflate(&big(&[-6, 11, -6, 1]), &BigInt::from(3)).unwrap(),
            big(&[2, -3, 1])
        );
        assert!(deflate(&big(&[-6, 11, -6, 1]), &BigInt::from(4)).is_err());
    }

    #[test]
    fn char_poly_matches_trace_and_det_oracle() {
        let m = vec![
            vec![5, 2, 0, 1],
            vec![1, 4, 3, 0],
            vec![0, 2, 6, 1],
            vec![3, 0, 1, 2],
        ];
        let poly = characteristic_polynomial(&m);
        let tr: i64 = (0..4).map(|i| m[i][i] as i64).sum();
        assert_eq!(poly[3], BigInt::from(-tr));
        // determinant by permutation expansion
        let mut det = 0i64;
        fn perms(k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            let mut out = vec![];
            for q in perms(k - 1) {
                for pos in 0..k {
                    let mut r = q.clone();
                    r.insert(pos, k - 1);
                    out.push(r);
                }
            }
            out
        }
        for p in perms(4) {
            let mut inv = 0;
            for i in 0..4 {
                for j in i + 1..4 {
                    if p[i] > p[j] {
                        inv += 1;
                    }
                }
            }
            let prod: i64 = (0..4).map(|i| m[i][p[i]] as i64).product();
            det += if inv % 2 == 0 { prod } else { -prod };
        }
        assert_eq!(poly[0], BigInt::from(det));
    }
}

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::exact::{IntMatrix, RatMatrix};
use crate::lattice::Lattice;

/// An LLL-reduced basis in machine integers: `gram = t · G · tᵀ`.
#[derive(Clone, Debug)]
pub struct Reduced {
    pub n: usize,
    pub gram: Vec<i64>,
    /// rows are the reduced basis vectors in the original coordinates
    pub transform: Vec<i64>,
}

impl Reduced {
    pub fn gram_at(&self, i: usize, j: usize) -> i64 {
        self.gram[i * self.n + j]
    }

    pub fn transform_matrix(&self) -> IntMatrix {
        IntMatrix::from_i64(self.n, self.n, &self.transform)
    }

    pub fn gram_matrix(&self) -> IntMatrix {
        IntMatrix::from_i64(self.n, self.n, &self.gram)
    }

    /// Maps reduced coordinates back to original coordinates.
    pub fn to_original(&self, x: &[i64]) -> Option<Vec<i64>> {
        let n = self.n;
        let mut out = vec![0i64; n];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for j in 0..n {
                let v = xi.checked_mul(self.transform[i * n + j])?;
                out[j] = out[j].checked_add(v)?;
            }
        }
        Some(out)
    }
}

/// Floating-point Gram LLL with exact integer Gram updates. `None` on i64 overflow.
fn lll_float(gram: &[i64], n: usize, delta: f64) -> Option<Reduced> {
    let mut g = gram.to_vec();
    let mut t = vec![0i64; n * n];
    for i in 0..n {
        t[i * n + i] = 1;
    }
    if n <= 1 {
        return Some(Reduced {
            n,
            gram: g,
            transform: t,
        });
    }
    let mut mu = vec![0f64; n * n];
    let mut r = vec![0f64; n * n];
    let mut b = vec![0f64; n];
    b[0] = g[0] as f64;
    let mut k = 1usize;
    let mut iterations = 0usize;
    // row k of the Gram-Schmidt data from the exact Gram
    let gso_row = |k: usize, g: &[i64], mu: &mut [f64], r: &mut [f64], b: &mut [f64]| {
        for j in 0..k {
            let mut s = g[k * n + j] as f64;
            for i in 0..j {
                s -= mu[j * n + i] * r[k * n + i];
            }
            r[k * n + j] = s;
            mu[k * n + j] = s / b[j];
        }
        let mut s = g[k * n + k] as f64;
        for j in 0..k {
            s -= mu[k * n + j] * r[k * n + j];
        }
        b[k] = s;
    };
    while k < n {
        iterations += 1;
        if iterations > 100_000 + 1000 * n * n {
            return None;
        }
        // size reduction, repeated while large multipliers appear
        loop {
            gso_row(k, &g, &mut mu, &mut r, &mut b);
            let mut big = false;
            let mut changed = false;
            for j in (0..k).rev() {
                let m = mu[k * n + j];
                if m.abs() <= 0.51 {
                    continue;
                }
                let q = m.round();
                if q.abs() > 1e15 {
                    return None;
                }
                if q.abs() > 1e6 {
                    big = true;
                }
                let qi = q as i64;
                changed = true;
                // b_k -= q b_j
                let gkk = g[k * n + k] as i128 - 2 * qi as i128 * g[k * n + j] as i128
                    + (qi as i128) * (qi as i128) * g[j * n + j] as i128;
                let gkk: i64 = gkk.try_into().ok()?;
                for i in 0..n {
                    if i == k {
                        continue;
                    }
                    let v = g[k * n + i].checked_sub(qi.checked_mul(g[j * n + i])?)?;
                    g[k * n + i] = v;
                    g[i * n + k] = v;
                }
                g[k * n + k] = gkk;
                for i in 0..n {
                    t[k * n + i] = t[k * n + i].checked_sub(qi.checked_mul(t[j * n + i])?)?;
                }
                for i in 0..j {
                    mu[k * n + i] -= q * mu[j * n + i];
                }
                mu[k * n + j] -= q;
                if big {
                    break;
                }
            }
            if !changed {
                break;
            }
        }
        let m = mu[k * n + k - 1];
        if b[k] < (delta - m * m) * b[k - 1] {
            for i in 0..n {
                t.swap(k * n + i, (k - 1) * n + i);
            }
            for i in 0..n {
                g.swap(k * n + i, (k - 1) * n + i);
            }
            for i in 0..n {
                g.swap(i * n + k, i * n + k - 1);
            }
            if k == 1 {
                b[0] = g[0] as f64;
            } else {
                k -= 1;
            }
        } else {
            k += 1;
        }
    }
    Some(Reduced {
        n,
        gram: g,
        transform: t,
    })
}

/// Exact integral LLL on a Gram matrix (integral Gram-Schmidt data only).
/// `delta = num/den`. Returns (reduced Gram, transform).
pub(crate) fn lll_exact(gram: &IntMatrix, num: i64, den: i64) -> (IntMatrix, IntMatrix) {
    let n = gram.rows();
    let mut g = gram.clone();
    let mut h = IntMatrix::identity(n);
    if n <= 1 {
        return (g, h);
    }
    let (num, den) = (BigInt::from(num), BigInt::from(den));
    // 1-based indexing for d; lam[k][j] for j < k (0-based)
    let mut d = vec![BigInt::zero(); n + 1];
    let mut lam = vec![vec![BigInt::zero(); n]; n];
    d[0] = BigInt::one();
    d[1] = g[(0, 0)].clone();
    let mut k = 1usize;
    let mut kmax = 0usize;

    fn redi(
        k: usize,
        l: usize,
        g: &mut IntMatrix,
        h: &mut IntMatrix,
        d: &[BigInt],
        lam: &mut [Vec<BigInt>],
    ) {
        let two_l = &lam[k][l] * BigInt::from(2);
        if two_l.abs() <= d[l + 1] {
            return;
        }
        // nearest integer to lam/d
        let q = (&two_l + &d[l + 1]).div_floor(&(&d[l + 1] * BigInt::from(2)));
        let nq = -&q;
        h.add_row_multiple(k, l, &nq);
        g.add_row_multiple(k, l, &nq);
        g.add_col_multiple(k, l, &nq);
        lam[k][l] -= &q * &d[l + 1];
        for i in 0..l {
            let v = &q * &lam[l][i];
            lam[k][i] -= v;
        }
    }

    while k < n {
        if k > kmax {
            kmax = k;
            for j in 0..=k {
                let mut u = g[(k, j)].clone();
                for i in 0..j {
                    u = (&d[i + 1] * &u - &lam[k][i] * &lam[j][i]) / &d[i];
                }
                if j < k {
                    lam[k][j] = u;
                } else {
                    d[k + 1] = u;
                }
            }
        }
        loop {
            redi(k, k - 1, &mut g, &mut h, &d, &mut lam);
            // den·d_k·d_{k-2} < num·d_{k-1}² − den·λ² (1-based) triggers a swap
            let lhs = &den * &d[k + 1] * &d[k - 1];
            let rhs = &num * &d[k] * &d[k] - &den * &lam[k][k - 1] * &lam[k][k - 1];
            if lhs < rhs {
                // swap k, k-1
                h.swap_rows(k, k - 1);
                g.swap_rows(k, k - 1);
                g.swap_cols(k, k - 1);
                for j in 0..k - 1 {
                    let tmp = std::mem::take(&mut lam[k][j]);
                    lam[k][j] = std::mem::replace(&mut lam[k - 1][j], tmp);
                }
                let l = lam[k][k - 1].clone();
                let bb = (&d[k - 1] * &d[k + 1] + &l * &l) / &d[k];
                for i in k + 1..=kmax {
                    let t = lam[i][k].clone();
                    lam[i][k] = (&d[k + 1] * &lam[i][k - 1] - &l * &t) / &d[k];
                    lam[i][k - 1] = (&bb * &t + &l * &lam[i][k]) / &d[k + 1];
                }
                d[k] = bb;
                if k > 1 {
                    k -= 1;
                }
            } else {
                break;
            }
        }
        for l in (0..k.saturating_sub(1)).rev() {
            redi(k, l, &mut g, &mut h, &d, &mut lam);
        }
        k += 1;
    }
    (g, h)
}

/// Exact check of the Lovász condition (and size reduction with slack 0.51).
pub fn is_lll_reduced(gram: &IntMatrix, delta: &BigRational) -> bool {
    let n = gram.rows();
    if n <= 1 {
        return true;
    }
    // rational Gram-Schmidt: mu and B
    let g = gram.to_rat();
    let mut mu = RatMatrix::zeros(n, n);
    let mut b = vec![BigRational::zero(); n];
    let mut r = RatMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..i {
            let mut s = g[(i, j)].clone();
            for k in 0..j {
                s -= &mu[(j, k)] * &r[(i, k)];
            }
            r[(i, j)] = s.clone();
            mu[(i, j)] = s / &b[j];
        }
        let mut s = g[(i, i)].clone();
        for j in 0..i {
            s -= &mu[(i, j)] * &r[(i, j)];
        }
        b[i] = s;
    }
    let eta = BigRational::new(BigInt::from(51), BigInt::from(100));
    for i in 1..n {
        for j in 0..i {
            if mu[(i, j)].abs() > eta {
                return false;
            }
        }
        let m = &mu[(i, i - 1)];
        if b[i] < (delta - m * m) * &b[i - 1] {
            return false;
        }
    }
    true
}

/// Reduction of a machine-word Gram matrix; `None` on overflow.
pub fn reduce_i64(gram: &[i64], n: usize) -> Option<Reduced> {
    lll_float(gram, n, 0.99)
}

/// Fast reduction for internal use: float LLL, or exact LLL if machine words overflow.
pub fn reduce(l: &Lattice) -> Reduced {
    let n = l.rank();
    if let Some(g) = l.gram_i64() {
        if let Some(r) = lll_float(&g, n, 0.99) {
            return r;
        }
    }
    let (g, t) = lll_exact(l.gram(), 99, 100);
    let gi = g.to_i64().expect("reduced Gram fits in machine words");
    let ti = t.to_i64().expect("reduced transform fits in machine words");
    // polish in floating point in case the exact pass was run
    let r = lll_float(&gi, n, 0.99).expect("reduced input cannot overflow");
    let tt = IntMatrix::from_i64(n, n, &r.transform).mul(&IntMatrix::from_i64(n, n, &ti));
    Reduced {
        n,
        gram: r.gram,
        transform: tt.to_i64().expect("transform fits"),
    }
}

/// LLL reduction with parameter `delta ∈ (1/4, 1)`.
///
/// Returns the reduced lattice and the unimodular `t` with
/// `reduced.gram = t · L.gram · tᵀ`. The Lovász condition is verified
/// exactly; if the floating pass falls short, an exact pass finishes.
pub fn lll(l: &Lattice, delta: &BigRational) -> (Lattice, IntMatrix) {
    assert!(
        delta > &BigRational::new(1.into(), 4.into()) && delta < &BigRational::one(),
        "delta must lie in (1/4, 1)"
    );
    let n = l.rank();
    let df = delta.to_f64().unwrap();
    let fast = l
        .gram_i64()
        .and_then(|g| lll_float(&g, n, (df + 0.005).min(0.999).max(df)));
    let (gram, t) = match fast {
        Some(r) => (r.gram_matrix(), r.transform_matrix()),
        None => lll_exact(l.gram(), 99, 100),
    };
    let (gram, t) = if is_lll_reduced(&gram, delta) {
        (gram, t)
    } else {
        let (num, den) = (
            delta.numer().to_i64().unwrap(),
            delta.denom().to_i64().unwrap(),
        );
        let (g2, t2) = lll_exact(&gram, num, den);
        (g2, t2.mul(&t))
    };
    let out = Lattice::new(gram).expect("reduction preserves positive definiteness");
    let out = match l.label() {
        Some(s) => out.with_label(s),
        None => out,
    };
    (out, t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{is_unimodular, rat};
    use crate::lattice::{lattice_e, lattice_z};

    fn check(l: &Lattice) -> Lattice {
        let (red, t) = lll(l, &rat(99, 100));
        assert!(is_unimodular(&t));
        assert_eq!(t.mul(l.gram()).mul(&t.transpose()), *red.gram());
        assert!(is_lll_reduced(red.gram(), &rat(99, 100)));
        red
    }

    #[test]
    fn skewed_plane() {
        let b = IntMatrix::from_rows(&[vec![1i64, 0], vec![1000, 1]]);
        let l = lattice_z(2).rebase(&b).unwrap();
        let red = check(&l);
        assert_eq!(red.gram(), &IntMatrix::identity(2));
    }

    #[test]
    fn standard_lattices() {
        let red = check(&lattice_z(3));
        assert_eq!(red.gram(), &IntMatrix::identity(3));
        let e8 = lattice_e(8).unwrap();
        assert_eq!(check(&e8).det(), BigInt::one());
    }

    #[test]
    fn exact_agrees() {
        let b = IntMatrix::from_rows(&[vec![1i64, 0, 0], vec![1000, 1, 0], vec![37, -500, 1]]);
        let l = lattice_z(3).rebase(&b).unwrap();
        let (g, t) = lll_exact(l.gram(), 99, 100);
        assert!(is_unimodular(&t));
        assert_eq!(t.mul(l.gram()).mul(&t.transpose()), g);
        assert!(is_lll_reduced(&g, &rat(99, 100)));
        assert_eq!(g, IntMatrix::identity(3));
    }

    proptest::proptest! {
        #[test]
        fn random_rebasings(n in 2usize..=8, e in proptest::collection::vec(-4i64..=4, 64), big in 0i64..1000) {
            let mut u = IntMatrix::identity(n);
            for i in 0..n {
                for j in i + 1..n {
                    u[(i, j)] = BigInt::from(e[i * 8 + j] * (1 + big % 7));
                }
            }
            let base = if n == 8 { lattice_e(8).unwrap() } else { lattice_z(n) };
            let l = base.rebase(&u.transpose().mul(&u)).unwrap();
            check(&l);
            let (g, t) = lll_exact(l.gram(), 99, 100);
            proptest::prop_assert_eq!(t.mul(l.gram()).mul(&t.transpose()), g.clone());
            proptest::prop_assert!(is_lll_reduced(&g, &rat(99, 100)));
        }
    }
}

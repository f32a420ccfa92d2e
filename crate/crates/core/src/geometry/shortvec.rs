use std::ops::ControlFlow;

use super::lll::{reduce, Reduced};
use crate::error::{Error, Result};
use crate::lattice::Lattice;

/// Relative slack on the floating bound; candidates are re-checked exactly.
const SLACK: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShortVector {
    pub coords: Vec<i64>,
    pub norm: i64,
}

/// All nonzero vectors of norm at most `bound`, one per ± pair.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShortVectorList {
    pub bound: i64,
    pub vectors: Vec<ShortVector>,
}

/// Floating Gram-Schmidt data of a reduced Gram: `Q(x) = Σ b_i (x_i + Σ_{j>i} mu[j][i] x_j)²`.
#[derive(Clone, Debug)]
pub struct Cholesky {
    n: usize,
    b: Vec<f64>,
    mu: Vec<f64>,
}

impl Cholesky {
    pub fn new(gram: &[i64], n: usize) -> Self {
        let mut mu = vec![0f64; n * n];
        let mut r = vec![0f64; n * n];
        let mut b = vec![0f64; n];
        for i in 0..n {
            for j in 0..i {
                let mut s = gram[i * n + j] as f64;
                for k in 0..j {
                    s -= mu[j * n + k] * r[i * n + k];
                }
                r[i * n + j] = s;
                mu[i * n + j] = s / b[j];
            }
            let mut s = gram[i * n + i] as f64;
            for j in 0..i {
                s -= mu[i * n + j] * r[i * n + j];
            }
            b[i] = s;
        }
        Cholesky { n, b, mu }
    }
}

/// Exact `xᵀ G x` in wide arithmetic.
#[inline]
pub fn exact_norm(gram: &[i64], n: usize, x: &[i64]) -> i128 {
    let mut s: i128 = 0;
    for i in 0..n {
        if x[i] == 0 {
            continue;
        }
        let mut t: i128 = 0;
        for j in 0..n {
            t += gram[i * n + j] as i128 * x[j] as i128;
        }
        s += t * x[i] as i128;
    }
    s
}

/// Fincke-Pohst enumeration of `{x ≠ 0 : xᵀ G x ≤ bound}` up to sign (the
/// last nonzero coordinate of each reported `x` is positive). The callback
/// receives exact norms and may stop the walk.
pub fn enumerate<F>(gram: &[i64], chol: &Cholesky, bound: i64, mut f: F) -> ControlFlow<()>
where
    F: FnMut(&[i64], i64) -> ControlFlow<()>,
{
    let n = chol.n;
    if n == 0 || bound <= 0 {
        return ControlFlow::Continue(());
    }
    let limit = bound as f64 * (1.0 + SLACK) + SLACK;
    let mut x = vec![0i64; n];
    let mut center = vec![0f64; n];
    let mut rem = vec![0f64; n + 1];
    let mut hi = vec![0i64; n];
    rem[n] = limit;
    // level i is being chosen; everything above is fixed
    let mut i = n - 1;
    let set_range = |i: usize, x: &[i64], center: &mut [f64], rem: &[f64], hi: &mut [i64]| -> i64 {
        let mut c = 0f64;
        for j in i + 1..n {
            c -= chol.mu[j * n + i] * x[j] as f64;
        }
        center[i] = c;
        let r = (rem[i + 1].max(0.0) / chol.b[i]).sqrt();
        let top_zero = x[i + 1..].iter().all(|&v| v == 0);
        let lo = if top_zero { 0 } else { (c - r).ceil() as i64 };
        hi[i] = (c + r).floor() as i64;
        lo
    };
    x[i] = set_range(i, &x, &mut center, &rem, &mut hi);
    loop {
        if x[i] > hi[i] {
            if i == n - 1 {
                return ControlFlow::Continue(());
            }
            i += 1;
            x[i] += 1;
            continue;
        }
        let d = x[i] as f64 - center[i];
        let r = rem[i + 1] - chol.b[i] * d * d;
        if r < 0.0 {
            x[i] += 1;
            continue;
        }
        if i == 0 {
            let zero = x.iter().all(|&v| v == 0);
            if !zero {
                let nm = exact_norm(gram, n, &x);
                if nm > 0 && nm <= bound as i128 {
                    f(&x, nm as i64)?;
                }
            }
            x[0] += 1;
            continue;
        }
        rem[i] = r;
        i -= 1;
        x[i] = set_range(i, &x, &mut center, &rem, &mut hi);
    }
}

/// Enumerates short vectors of a reduced basis, in reduced coordinates.
pub fn short_vectors_reduced(red: &Reduced, bound: i64) -> Vec<ShortVector> {
    let chol = Cholesky::new(&red.gram, red.n);
    let mut out = Vec::new();
    let _ = enumerate(&red.gram, &chol, bound, |x, nm| {
        out.push(ShortVector {
            coords: x.to_vec(),
            norm: nm,
        });
        ControlFlow::Continue(())
    });
    out
}

fn normalize_sign(v: &mut [i64]) {
    if let Some(&first) = v.iter().find(|&&c| c != 0) {
        if first < 0 {
            v.iter_mut().for_each(|c| *c = -*c);
        }
    }
}

/// Complete list of nonzero vectors with norm `≤ bound`, one per ± pair,
/// first nonzero coordinate positive, sorted lexicographically.
pub fn short_vectors(l: &Lattice, bound: i64) -> Result<ShortVectorList> {
    let red = reduce(l);
    let mut vectors = Vec::new();
    for v in short_vectors_reduced(&red, bound) {
        let mut c = red
            .to_original(&v.coords)
            .ok_or(Error::Overflow("short vector coordinates"))?;
        normalize_sign(&mut c);
        vectors.push(ShortVector {
            coords: c,
            norm: v.norm,
        });
    }
    vectors.sort_by(|a, b| a.coords.cmp(&b.coords));
    Ok(ShortVectorList { bound, vectors })
}

/// Representation numbers `r(0..=max_norm)` counting both signs.
pub fn theta_prefix(l: &Lattice, max_norm: i64) -> Vec<u64> {
    let red = reduce(l);
    theta_reduced(&red, max_norm, u64::MAX).expect("uncapped theta always completes")
}

/// Theta prefix of a reduced basis; `None` when more than `cap` vectors would be listed.
pub fn theta_reduced(red: &Reduced, max_norm: i64, cap: u64) -> Option<Vec<u64>> {
    let chol = Cholesky::new(&red.gram, red.n);
    let mut counts = vec![0u64; max_norm.max(0) as usize + 1];
    counts[0] = 1;
    let mut total = 0u64;
    let flow = enumerate(&red.gram, &chol, max_norm, |_, nm| {
        counts[nm as usize] += 2;
        total += 2;
        if total > cap {
            ControlFlow::Break(())
        } else {
            ControlFlow::Continue(())
        }
    });
    match flow {
        ControlFlow::Continue(()) => Some(counts),
        ControlFlow::Break(()) => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::IntMatrix;
    use crate::lattice::{lattice_a, lattice_e, lattice_z};

    /// Exhaustive box search oracle using a bound on coordinates from the dual Gram.
    fn brute(l: &Lattice, bound: i64) -> Vec<Vec<i64>> {
        let n = l.rank();
        let inv = l.dual();
        // |x_i|² ≤ bound · (G⁻¹)_ii
        let radius: Vec<i64> = (0..n)
            .map(|i| {
                let v = num_traits::ToPrimitive::to_f64(&inv[(i, i)]).unwrap();
                ((bound as f64) * v).sqrt().floor() as i64 + 1
            })
            .collect();
        let g = l.gram_i64().unwrap();
        let mut out = Vec::new();
        let mut x: Vec<i64> = radius.iter().map(|r| -r).collect();
        loop {
            let nm = exact_norm(&g, n, &x);
            if nm > 0 && nm <= bound as i128 {
                let mut c = x.clone();
                normalize_sign(&mut c);
                if c == x {
                    out.push(c);
                }
            }
            let mut k = 0;
            loop {
                if k == n {
                    out.sort();
                    return out;
                }
                x[k] += 1;
                if x[k] > radius[k] {
                    x[k] = -radius[k];
                    k += 1;
                } else {
                    break;
                }
            }
        }
    }

    #[test]
    fn examples() {
        assert_eq!(short_vectors(&lattice_z(3), 1).unwrap().vectors.len(), 3);
        let e8 = short_vectors(&lattice_e(8).unwrap(), 2).unwrap();
        assert_eq!(e8.vectors.len(), 120);
        assert_eq!(short_vectors(&lattice_a(2), 2).unwrap().vectors.len(), 3);
        assert_eq!(theta_prefix(&lattice_z(1), 4), vec![1, 2, 0, 0, 2]);
        assert_eq!(theta_prefix(&lattice_a(1), 2), vec![1, 0, 2]);
    }

    #[test]
    fn e8_box_oracle() {
        // a reduced basis keeps the search box small
        let (e8, _) = super::super::lll(&lattice_e(8).unwrap(), &crate::exact::rat(99, 100));
        let got: Vec<Vec<i64>> = short_vectors(&e8, 2)
            .unwrap()
            .vectors
            .into_iter()
            .map(|v| v.coords)
            .collect();
        assert_eq!(got, brute(&e8, 2));
        assert_eq!(theta_prefix(&e8, 4), vec![1, 0, 240, 0, 2160]);
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(50))]
        #[test]
        fn agrees_with_box_search(n in 1usize..=4, e in proptest::collection::vec(-3i64..=3, 16), bound in 1i64..=10) {
            let b = IntMatrix::from_fn(n, n, |i, j| num_bigint::BigInt::from(e[i * 4 + j] + if i == j { 4 } else { 0 }));
            if crate::exact::rank(&b) == n {
                let l = lattice_z(n).rebase(&b).unwrap();
                let got: Vec<Vec<i64>> = short_vectors(&l, bound).unwrap().vectors.into_iter().map(|v| v.coords).collect();
                proptest::prop_assert_eq!(got, brute(&l, bound));
            }
        }
    }
}

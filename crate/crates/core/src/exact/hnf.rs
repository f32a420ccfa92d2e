use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use super::matrix::IntMatrix;

/// Row Hermite normal form. Returns `(h, t)` with `t` unimodular and `t * m = h`.
///
/// `h` is upper echelon: each nonzero row has a positive pivot strictly to the
/// right of the previous one, and entries above a pivot lie in `[0, pivot)`.
/// Zero rows come last.
pub fn hnf(m: &IntMatrix) -> (IntMatrix, IntMatrix) {
    let rows = m.rows();
    let cols = m.cols();
    let mut h = m.clone();
    let mut t = IntMatrix::identity(rows);
    let mut r = 0usize;
    for c in 0..cols {
        if r == rows {
            break;
        }
        // Euclid on column c among rows r.. until a single nonzero remains.
        loop {
            let mut best: Option<usize> = None;
            for i in r..rows {
                if h[(i, c)].is_zero() {
                    continue;
                }
                match best {
                    None => best = Some(i),
                    Some(b) if h[(i, c)].abs() < h[(b, c)].abs() => best = Some(i),
                    _ => {}
                }
            }
            let Some(b) = best else { break };
            h.swap_rows(r, b);
            t.swap_rows(r, b);
            let mut done = true;
            for i in r + 1..rows {
                if h[(i, c)].is_zero() {
                    continue;
                }
                let q = h[(i, c)].div_floor(&h[(r, c)]);
                let nq = -q;
                h.add_row_multiple(i, r, &nq);
                t.add_row_multiple(i, r, &nq);
                if !h[(i, c)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[(r, c)].is_zero() {
            continue;
        }
        if h[(r, c)].is_negative() {
            h.negate_row(r);
            t.negate_row(r);
        }
        let piv = h[(r, c)].clone();
        for i in 0..r {
            let q = h[(i, c)].div_floor(&piv);
            if !q.is_zero() {
                let nq = -q;
                h.add_row_multiple(i, r, &nq);
                t.add_row_multiple(i, r, &nq);
            }
        }
        r += 1;
    }
    (h, t)
}

/// Nonzero rows of the HNF: a basis of the row lattice.
pub fn row_basis(m: &IntMatrix) -> IntMatrix {
    let (h, _) = hnf(m);
    let keep: Vec<usize> = (0..h.rows())
        .filter(|&i| h.row(i).iter().any(|x| !x.is_zero()))
        .collect();
    h.select_rows(&keep)
}

/// Integer basis of the left kernel `{x : x * m = 0}`, as rows.
pub fn left_kernel(m: &IntMatrix) -> IntMatrix {
    let (h, t) = hnf(m);
    let zero_rows: Vec<usize> = (0..h.rows())
        .filter(|&i| h.row(i).iter().all(Zero::is_zero))
        .collect();
    // The kernel rows of t are a basis of the (saturated) left kernel; reduce them for readability.
    let k = t.select_rows(&zero_rows);
    if k.rows() == 0 {
        return k;
    }
    row_basis(&k)
}

/// Checks that a square integer matrix has determinant ±1.
pub fn is_unimodular(m: &IntMatrix) -> bool {
    m.is_square() && m.det().abs() == BigInt::one()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn is_hnf(h: &IntMatrix) -> bool {
        let mut last: Option<usize> = None;
        let mut seen_zero = false;
        for i in 0..h.rows() {
            let piv = (0..h.cols()).find(|&j| !h[(i, j)].is_zero());
            match piv {
                None => seen_zero = true,
                Some(j) => {
                    if seen_zero || h[(i, j)].is_negative() {
                        return false;
                    }
                    if let Some(l) = last {
                        if j <= l {
                            return false;
                        }
                    }
                    for k in 0..i {
                        if h[(k, j)].is_negative() || h[(k, j)] >= h[(i, j)] {
                            return false;
                        }
                    }
                    last = Some(j);
                }
            }
        }
        true
    }

    #[test]
    fn identity_is_fixed() {
        let id = IntMatrix::identity(3);
        let (h, t) = hnf(&id);
        assert_eq!(h, id);
        assert_eq!(t, id);
    }

    #[test]
    fn small_example() {
        let m = IntMatrix::from_rows(&[vec![2i64, 4], vec![6, 8]]);
        let (h, t) = hnf(&m);
        assert_eq!(t.mul(&m), h);
        assert!(is_unimodular(&t));
        assert!(is_hnf(&h));
        assert_eq!(h, IntMatrix::from_rows(&[vec![2i64, 0], vec![0, 4]]));
    }

    #[test]
    fn zero_matrix() {
        let z = IntMatrix::zeros(2, 3);
        let (h, t) = hnf(&z);
        assert_eq!(h, z);
        assert_eq!(t, IntMatrix::identity(2));
    }

    #[test]
    fn kernel_of_column() {
        let m = IntMatrix::from_rows(&[vec![1i64], vec![1], vec![1]]);
        let k = left_kernel(&m);
        assert_eq!(k.rows(), 2);
        assert!(k.mul(&m).is_zero());
    }

    proptest::proptest! {
        #[test]
        fn hnf_properties(r in 1usize..6, c in 1usize..6, seed in proptest::collection::vec(-30i64..30, 36)) {
            let m = IntMatrix::from_fn(r, c, |i, j| BigInt::from(seed[i * 6 + j]));
            let (h, t) = hnf(&m);
            proptest::prop_assert_eq!(t.mul(&m), h.clone());
            proptest::prop_assert!(is_unimodular(&t));
            proptest::prop_assert!(is_hnf(&h));
            if r == c {
                proptest::prop_assert_eq!(h.det().abs(), m.det().abs());
            }
        }
    }
}

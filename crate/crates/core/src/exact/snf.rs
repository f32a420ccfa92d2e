use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::matrix::IntMatrix;

/// Smith normal form `left * m * right = diag(diagonal)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmithForm {
    /// `min(rows, cols)` nonnegative entries with `d_i | d_{i+1}`; zeros trail.
    pub diagonal: Vec<BigInt>,
    pub left: IntMatrix,
    pub right: IntMatrix,
}

impl SmithForm {
    /// Diagonal entries different from 1 and 0.
    pub fn invariant_factors(&self) -> Vec<BigInt> {
        self.diagonal
            .iter()
            .filter(|d| !d.is_zero() && !num_traits::One::is_one(*d))
            .cloned()
            .collect()
    }
}

pub fn snf(m: &IntMatrix) -> SmithForm {
    let rows = m.rows();
    let cols = m.cols();
    let mut a = m.clone();
    let mut left = IntMatrix::identity(rows);
    let mut right = IntMatrix::identity(cols);
    let k = rows.min(cols);
    for t in 0..k {
        // pivot: smallest nonzero absolute value in the trailing block
        loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if a[(i, j)].is_zero() {
                        continue;
                    }
                    match best {
                        Some((bi, bj)) if a[(i, j)].abs() >= a[(bi, bj)].abs() => {}
                        _ => best = Some((i, j)),
                    }
                }
            }
            let Some((bi, bj)) = best else {
                break;
            };
            a.swap_rows(t, bi);
            left.swap_rows(t, bi);
            a.swap_cols(t, bj);
            right.swap_cols(t, bj);
            let mut clean = true;
            for i in t + 1..rows {
                if a[(i, t)].is_zero() {
                    continue;
                }
                let q = -a[(i, t)].div_floor(&a[(t, t)]);
                a.add_row_multiple(i, t, &q);
                left.add_row_multiple(i, t, &q);
                if !a[(i, t)].is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                if a[(t, j)].is_zero() {
                    continue;
                }
                let q = -a[(t, j)].div_floor(&a[(t, t)]);
                a.add_col_multiple(j, t, &q);
                right.add_col_multiple(j, t, &q);
                if !a[(t, j)].is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // divisibility: pivot must divide the whole trailing block
            let bad = (t + 1..rows)
                .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                .find(|&(i, j)| !a[(i, j)].is_multiple_of(&a[(t, t)]));
            match bad {
                None => break,
                Some((i, _)) => {
                    let one = BigInt::from(1);
                    a.add_row_multiple(t, i, &one);
                    left.add_row_multiple(t, i, &one);
                }
            }
        }
        if a[(t, t)].is_negative() {
            a.negate_row(t);
            left.negate_row(t);
        }
    }
    let diagonal = (0..k).map(|i| a[(i, i)].clone()).collect();
    SmithForm {
        diagonal,
        left,
        right,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::hnf::is_unimodular;
    use num_traits::One;

    fn check(m: &IntMatrix) -> SmithForm {
        let s = snf(m);
        let d = s.left.mul(m).mul(&s.right);
        for i in 0..d.rows() {
            for j in 0..d.cols() {
                if i == j {
                    assert_eq!(d[(i, j)], s.diagonal[i]);
                } else {
                    assert!(d[(i, j)].is_zero());
                }
            }
        }
        assert!(is_unimodular(&s.left) && is_unimodular(&s.right));
        for w in s.diagonal.windows(2) {
            assert!(!w[0].is_negative());
            if w[0].is_zero() {
                assert!(w[1].is_zero());
            } else {
                assert!(w[1].is_multiple_of(&w[0]));
            }
        }
        s
    }

    #[test]
    fn diagonal_inputs() {
        let s = check(&IntMatrix::from_rows(&[vec![2i64]]));
        assert_eq!(s.diagonal, vec![BigInt::from(2)]);
        let s = check(&IntMatrix::from_rows(&[vec![4i64, 0], vec![0, 6]]));
        assert_eq!(s.diagonal, vec![BigInt::from(2), BigInt::from(12)]);
    }

    #[test]
    fn d4_gram() {
        let g = IntMatrix::from_rows(&[
            vec![2i64, -1, 0, 0],
            vec![-1, 2, -1, -1],
            vec![0, -1, 2, 0],
            vec![0, -1, 0, 2],
        ]);
        let s = check(&g);
        let want: Vec<BigInt> = [1, 1, 2, 2].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(s.diagonal, want);
        let prod: BigInt = s.diagonal.iter().product();
        assert_eq!(prod, g.det().abs());
        assert!(!prod.is_one());
    }

    #[test]
    fn rectangular_and_zero() {
        check(&IntMatrix::zeros(2, 3));
        check(&IntMatrix::from_rows(&[vec![2i64, 4, 6], vec![3, 5, 7]]));
    }

    proptest::proptest! {
        #![proptest_config(proptest::prelude::ProptestConfig::with_cases(200))]
        #[test]
        fn round_trip(r in 1usize..=8, c in 1usize..=8, e in proptest::collection::vec(-50i64..=50, 64)) {
            let m = IntMatrix::from_fn(r, c, |i, j| BigInt::from(e[i * 8 + j]));
            let s = check(&m);
            if r == c {
                let det = m.det();
                if !det.is_zero() {
                    let prod: BigInt = s.diagonal.iter().product();
                    proptest::prop_assert_eq!(prod, det.abs());
                }
            }
        }
    }
}

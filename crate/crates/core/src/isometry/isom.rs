use super::fingerprint::Fingerprint;
use super::search::{search, Shells};
use crate::exact::IntMatrix;
use crate::geometry::{reduce, short_vectors_reduced, Reduced};
use crate::lattice::Lattice;

/// Target side of an isometry search, reusable across queries.
#[derive(Clone, Debug)]
pub struct IsometryTarget {
    pub lattice: Lattice,
    pub fingerprint: Fingerprint,
    shells: Shells,
}

impl IsometryTarget {
    pub fn new(l: &Lattice) -> Self {
        let red = reduce(l);
        let fingerprint = Fingerprint::of_reduced(l, &red);
        let n = red.n;
        let bound = (0..n).map(|i| red.gram[i * n + i]).max().unwrap_or(0);
        IsometryTarget {
            lattice: l.clone(),
            fingerprint,
            shells: Shells::new(red, bound),
        }
    }

    /// Searches for `g` with `gᵀ · source.gram · g = target.gram`.
    pub fn find_from(&self, source: &Lattice) -> Option<IntMatrix> {
        let red = reduce(source);
        self.find_from_reduced(&red)
    }

    /// The reduced basis itself as search vectors, in search order.
    fn solve_on_basis(&self, red: &Reduced) -> Option<(Vec<i64>, Option<Shells>)> {
        let n = red.n;
        let order = search_order(&red.gram, n);
        let mut s = vec![0i64; n * n];
        let mut adj = vec![0i128; n * n];
        for (i, &o) in order.iter().enumerate() {
            s[i * n + o] = 1;
            adj[o * n + i] = 1;
        }
        let src = gram_of(&s, &red.gram, n)?;
        self.run((adj, 1), &src, n)
    }

    /// Matrix `M` (rows: images of the source reduced basis in target reduced
    /// coordinates) of an isometry, if one exists.
    fn solve(&self, red: &Reduced) -> Option<(Vec<i64>, Option<Shells>)> {
        let n = red.n;
        if n != self.lattice.rank() {
            return None;
        }
        if n == 0 {
            return Some((Vec::new(), None));
        }
        // search on short vectors, falling back to the reduced basis
        let Some(s0) = spanning_vectors(red) else {
            return self.solve_on_basis(red);
        };
        let g0 = gram_of(&s0, &red.gram, n)?;
        let order = search_order(&g0, n);
        let mut s = Vec::with_capacity(n * n);
        for &i in &order {
            s.extend_from_slice(&s0[i * n..(i + 1) * n]);
        }
        match int_inverse(&s, n) {
            Some(inv) if inv.1.abs() <= MAX_SEARCH_INDEX => {
                let src = gram_of(&s, &red.gram, n)?;
                self.run(inv, &src, n)
            }
            _ => self.solve_on_basis(red),
        }
    }

    /// Backtracking over images of the rows of `s` (Gram `src`); `inv = (d·s⁻¹, d)`.
    fn run(
        &self,
        inv: (Vec<i128>, i128),
        src: &[i64],
        n: usize,
    ) -> Option<(Vec<i64>, Option<Shells>)> {
        let need = (0..n).map(|i| src[i * n + i]).max().unwrap_or(0);
        let bigger = (need > self.shells.bound).then(|| Shells::new(self.shells.red.clone(), need));
        let shells = bigger.as_ref().unwrap_or(&self.shells);
        let (adj, d) = inv;
        let mut sol: Option<Vec<i64>> = None;
        search(src, n, shells, &[], &mut |img: &[u32]| {
            // M = S⁻¹ X must be integral
            let mut m = vec![0i64; n * n];
            for i in 0..n {
                for j in 0..n {
                    let mut acc: i128 = 0;
                    for k in 0..n {
                        let a = adj[i * n + k];
                        if a != 0 {
                            acc += a * shells.coords(img[k])[j] as i128;
                        }
                    }
                    if acc % d != 0 {
                        return false;
                    }
                    m[i * n + j] = (acc / d) as i64;
                }
            }
            sol = Some(m);
            true
        });
        Some((sol?, bigger))
    }

    /// Whether the reduced source is isometric to the target, without building the map.
    pub fn matches_reduced(&self, red: &Reduced) -> bool {
        self.solve(red).is_some()
    }

    /// Same as [`find_from`](Self::find_from) with the source reduction supplied.
    pub fn find_from_reduced(&self, red: &Reduced) -> Option<IntMatrix> {
        let n = red.n;
        let (m, bigger) = self.solve(red)?;
        if n == 0 {
            return Some(IntMatrix::zeros(0, 0));
        }
        let shells = bigger.as_ref().unwrap_or(&self.shells);
        let m = IntMatrix::from_i64(n, n, &m);
        let t1 = red.transform_matrix();
        let t2 = shells.red.transform_matrix();
        let t1inv = t1
            .to_rat()
            .inverse()
            .and_then(|m| m.to_int())
            .expect("unimodular");
        let m = t1inv.mul(&m).mul(&t2);
        let minv = m
            .to_rat()
            .inverse()
            .and_then(|m| m.to_int())
            .expect("isometry is unimodular");
        Some(minv.transpose())
    }
}

/// Search order: short vectors first, then those with the most nonzero inner
/// products with vectors already placed.
fn search_order(gram: &[i64], n: usize) -> Vec<usize> {
    let mut placed: Vec<usize> = Vec::with_capacity(n);
    let mut left: Vec<usize> = (0..n).collect();
    while !left.is_empty() {
        let (pos, _) = left
            .iter()
            .enumerate()
            .min_by_key(|(_, &i)| {
                let links = placed.iter().filter(|&&j| gram[i * n + j] != 0).count();
                (gram[i * n + i], std::cmp::Reverse(links), i)
            })
            .unwrap();
        placed.push(left.remove(pos));
    }
    placed
}

/// `S G Sᵀ` for rows `S`, in machine words.
fn gram_of(s: &[i64], g: &[i64], n: usize) -> Option<Vec<i64>> {
    let mut sg = vec![0i128; n * n];
    for i in 0..n {
        for k in 0..n {
            let a = s[i * n + k] as i128;
            if a != 0 {
                for j in 0..n {
                    sg[i * n + j] += a * g[k * n + j] as i128;
                }
            }
        }
    }
    let mut out = vec![0i64; n * n];
    for i in 0..n {
        for j in 0..n {
            let v: i128 = (0..n).map(|k| sg[i * n + k] * s[j * n + k] as i128).sum();
            out[i * n + j] = i64::try_from(v).ok()?;
        }
    }
    Some(out)
}

/// Largest sublattice index accepted for the search vectors.
const MAX_SEARCH_INDEX: i128 = 2;

/// Search vectors: a basis of short vectors obtained by exchanging short
/// vectors into the reduced basis, where remaining long vectors may be
/// swapped for short ones at the cost of a sublattice of index
/// ≤ [`MAX_SEARCH_INDEX`]. Returns rows sorted by norm; `None` keeps the reduced basis.
fn spanning_vectors(red: &Reduced) -> Option<Vec<i64>> {
    let n = red.n;
    let norm_of = |v: &[i64]| -> i64 {
        let mut s = 0i64;
        for i in 0..n {
            if v[i] != 0 {
                for j in 0..n {
                    s += v[i] * red.gram[i * n + j] * v[j];
                }
            }
        }
        s
    };
    let maxd = (0..n).map(|i| red.gram[i * n + i]).max().unwrap();
    let mind = (0..n).map(|i| red.gram[i * n + i]).min().unwrap();
    if mind == maxd {
        return None;
    }
    let mut sv = short_vectors_reduced(red, maxd - 1);
    if sv.len() > 50_000 {
        return None;
    }
    sv.sort_by(|a, b| (a.norm, &a.coords).cmp(&(b.norm, &b.coords)));
    // basis rows b and v = b⁻¹, both integral
    let mut b = vec![0i64; n * n];
    let mut v = vec![0i64; n * n];
    for i in 0..n {
        b[i * n + i] = 1;
        v[i * n + i] = 1;
    }
    let mut norms: Vec<i64> = (0..n).map(|i| red.gram[i * n + i]).collect();
    let coords_in = |x: &[i64], v: &[i64]| -> Vec<i64> {
        (0..n)
            .map(|j| (0..n).map(|i| x[i] * v[i * n + j]).sum())
            .collect()
    };
    for r in &sv {
        let c = coords_in(&r.coords, &v);
        let Some(i) = (0..n)
            .filter(|&i| c[i].abs() == 1 && norms[i] > r.norm)
            .max_by_key(|&i| (norms[i], i))
        else {
            continue;
        };
        // b_i ← r; v ← v E⁻¹ with E = I except row i = c
        let ci = c[i];
        let mut einv_row = vec![0i64; n];
        for j in 0..n {
            einv_row[j] = if j == i { ci } else { -c[j] * ci };
        }
        let mut nv = v.clone();
        for row in 0..n {
            let vi = v[row * n + i];
            for j in 0..n {
                nv[row * n + j] = if j == i {
                    vi * einv_row[i]
                } else {
                    v[row * n + j] + vi * einv_row[j]
                };
            }
        }
        v = nv;
        b[i * n..(i + 1) * n].copy_from_slice(&r.coords);
        norms[i] = r.norm;
    }
    // swap long rows for short vectors while the index stays small
    let mut index: i128 = 1;
    let short_max = sv.last().map_or(0, |x| x.norm);
    for i in 0..n {
        if norms[i] <= short_max {
            continue;
        }
        let mut best: Option<(i64, usize)> = None;
        for (k, r) in sv.iter().enumerate() {
            let c = coords_in(&r.coords, &v);
            let ci = c[i].unsigned_abs() as i64;
            if ci >= 2
                && index * ci as i128 <= MAX_SEARCH_INDEX
                && best.is_none_or(|(bc, _)| ci < bc)
            {
                best = Some((ci, k));
            }
        }
        if let Some((ci, k)) = best {
            // only the span of b changes here; v is no longer needed for row i
            b[i * n..(i + 1) * n].copy_from_slice(&sv[k].coords);
            norms[i] = sv[k].norm;
            index *= ci as i128;
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| norms[i]);
    let mut out = Vec::with_capacity(n * n);
    for &i in &order {
        debug_assert_eq!(norm_of(&b[i * n..(i + 1) * n]), norms[i]);
        out.extend_from_slice(&b[i * n..(i + 1) * n]);
    }
    Some(out)
}

macro_rules! fraction_free_inverse {
    ($name:ident, $t:ty) => {
        fn $name(s: &[i64], n: usize) -> Option<(Vec<i128>, i128)> {
            let w = 2 * n;
            let mut a: Vec<$t> = vec![0; n * w];
            for i in 0..n {
                for j in 0..n {
                    a[i * w + j] = s[i * n + j] as $t;
                }
                a[i * w + n + i] = 1;
            }
            let mut prev: $t = 1;
            for k in 0..n {
                let r = (k..n).find(|&r| a[r * w + k] != 0)?;
                if r != k {
                    for j in 0..w {
                        a.swap(r * w + j, k * w + j);
                    }
                }
                let piv = a[k * w + k];
                for i in 0..n {
                    if i == k {
                        continue;
                    }
                    let f = a[i * w + k];
                    for j in 0..w {
                        let x = piv
                            .checked_mul(a[i * w + j])?
                            .checked_sub(f.checked_mul(a[k * w + j])?)?;
                        a[i * w + j] = if prev == 1 { x } else { x / prev };
                    }
                }
                prev = piv;
            }
            // the left block is now d·I
            let d = a[0];
            let mut adj = vec![0i128; n * n];
            for i in 0..n {
                debug_assert_eq!(a[i * w + i], d);
                for j in 0..n {
                    adj[i * n + j] = a[i * w + n + j] as i128;
                }
            }
            Some((adj, d as i128))
        }
    };
}

fraction_free_inverse!(inverse_i64, i64);
fraction_free_inverse!(inverse_i128, i128);

/// `(d · S⁻¹, d)` by fraction-free Gauss-Jordan elimination; `None` on overflow.
fn int_inverse(s: &[i64], n: usize) -> Option<(Vec<i128>, i128)> {
    inverse_i64(s, n).or_else(|| inverse_i128(s, n))
}

/// Returns `g` with `gᵀ · L1.gram · g = L2.gram`, or `None` if the lattices are not isometric.
pub fn is_isometric(l1: &Lattice, l2: &Lattice) -> Option<IntMatrix> {
    if l1.rank() != l2.rank() || l1.det() != l2.det() || l1.parity() != l2.parity() {
        return None;
    }
    let red1 = reduce(l1);
    let f1 = Fingerprint::of_reduced(l1, &red1);
    let target = IsometryTarget::new(l2);
    if f1 != target.fingerprint {
        return None;
    }
    target.find_from_reduced(&red1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{builtin, lattice_a, lattice_d, lattice_e};

    #[test]
    fn fraction_free_inverse() {
        let s = [2i64, 1, 0, 1, 3, 1, 0, 1, 4];
        let (adj, d) = int_inverse(&s, 3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let v: i128 = (0..3).map(|k| adj[i * 3 + k] * s[k * 3 + j] as i128).sum();
                assert_eq!(v, if i == j { d } else { 0 });
            }
        }
        assert_eq!(d.abs(), 18);
    }

    #[test]
    fn isometries_verify() {
        let e8 = lattice_e(8).unwrap();
        let d16 = builtin("D16+").unwrap();
        for l in [
            lattice_a(4),
            lattice_d(5).unwrap(),
            e8.direct_sum(&e8),
            d16.clone(),
        ] {
            // scramble the basis
            let n = l.rank();
            let u = IntMatrix::from_fn(n, n, |i, j| {
                if i == j {
                    1.into()
                } else if j == i + 1 {
                    (-1i64).into()
                } else {
                    0.into()
                }
            });
            let l2 = l.rebase(&u).unwrap();
            let g = is_isometric(&l, &l2).expect("isometric");
            assert_eq!(g.transpose().mul(l.gram()).mul(&g), *l2.gram());
        }
        assert!(is_isometric(&e8.direct_sum(&e8), &d16).is_none());
    }
}

//! Shell data and the backtracking search for Gram-preserving bases.

use std::collections::HashMap;

use crate::geometry::{short_vectors_reduced, Reduced};

/// All vectors (both signs) of norm at most `bound` in a reduced basis.
#[derive(Clone, Debug)]
pub struct Shells {
    pub n: usize,
    pub red: Reduced,
    pub bound: i64,
    coords: Vec<i64>,
    gv: Vec<i64>,
    norms: Vec<i64>,
    by_norm: HashMap<i64, Vec<u32>>,
    index: HashMap<Vec<i64>, u32>,
}

impl Shells {
    pub fn new(red: Reduced, bound: i64) -> Self {
        let n = red.n;
        let mut all: Vec<(Vec<i64>, i64)> = Vec::new();
        for v in short_vectors_reduced(&red, bound) {
            let neg: Vec<i64> = v.coords.iter().map(|x| -x).collect();
            all.push((v.coords, v.norm));
            all.push((neg, v.norm));
        }
        all.sort();
        let m = all.len();
        let mut coords = Vec::with_capacity(m * n);
        let mut norms = Vec::with_capacity(m);
        let mut by_norm: HashMap<i64, Vec<u32>> = HashMap::new();
        let mut index = HashMap::with_capacity(m);
        for (k, (c, nm)) in all.into_iter().enumerate() {
            coords.extend_from_slice(&c);
            norms.push(nm);
            by_norm.entry(nm).or_default().push(k as u32);
            index.insert(c, k as u32);
        }
        let mut gv = vec![0i64; m * n];
        for k in 0..m {
            for i in 0..n {
                let mut s = 0i64;
                for j in 0..n {
                    s += red.gram[i * n + j] * coords[k * n + j];
                }
                gv[k * n + i] = s;
            }
        }
        Shells {
            n,
            red,
            bound,
            coords,
            gv,
            norms,
            by_norm,
            index,
        }
    }

    pub fn len(&self) -> usize {
        self.norms.len()
    }

    #[inline]
    pub fn coords(&self, k: u32) -> &[i64] {
        let n = self.n;
        &self.coords[k as usize * n..(k as usize + 1) * n]
    }

    #[inline]
    pub fn dot(&self, a: u32, b: u32) -> i64 {
        let n = self.n;
        let x = &self.gv[a as usize * n..(a as usize + 1) * n];
        let y = &self.coords[b as usize * n..(b as usize + 1) * n];
        x.iter().zip(y).map(|(p, q)| p * q).sum()
    }

    pub fn shell(&self, norm: i64) -> &[u32] {
        self.by_norm.get(&norm).map_or(&[], |v| v.as_slice())
    }

    pub fn find(&self, c: &[i64]) -> Option<u32> {
        self.index.get(c).copied()
    }

    /// Index of the `i`-th basis vector of the reduced basis.
    pub fn basis_index(&self, i: usize) -> u32 {
        let mut e = vec![0i64; self.n];
        e[i] = 1;
        self.find(&e).expect("basis vector lies in the shells")
    }

    /// Image of shell vector `k` under the map sending basis vector `i` to `images[i]`.
    pub fn image(&self, k: u32, images: &[u32]) -> Option<u32> {
        let n = self.n;
        let c = self.coords(k);
        let mut w = vec![0i64; n];
        for (i, &ci) in c.iter().enumerate() {
            if ci == 0 {
                continue;
            }
            let x = self.coords(images[i]);
            for j in 0..n {
                w[j] += ci * x[j];
            }
        }
        self.find(&w)
    }

    /// Permutation of the shell induced by a basis map.
    pub fn perm_of(&self, images: &[u32]) -> super::perm::Perm {
        super::perm::Perm(
            (0..self.len() as u32)
                .map(|k| self.image(k, images).expect("isometry permutes each shell"))
                .collect(),
        )
    }
}

/// Candidate list for each remaining level given fixed images of the first levels.
pub fn initial_candidates(
    src: &[i64],
    n: usize,
    tgt: &Shells,
    prefix: &[u32],
) -> Option<Vec<Vec<u32>>> {
    let k = prefix.len();
    let mut out = Vec::with_capacity(n - k);
    for l in k..n {
        let norm = src[l * n + l];
        if norm > tgt.bound {
            return None;
        }
        let c: Vec<u32> = tgt
            .shell(norm)
            .iter()
            .copied()
            .filter(|&v| (0..k).all(|j| tgt.dot(v, prefix[j]) == src[l * n + j]))
            .collect();
        if c.is_empty() {
            return None;
        }
        out.push(c);
    }
    Some(out)
}

/// Depth-first search for images `x_0..x_{n-1}` with `x_i · x_j = src[i][j]`.
/// `visit` receives each complete solution and returns `true` to stop.
pub fn search<F>(src: &[i64], n: usize, tgt: &Shells, prefix: &[u32], visit: &mut F) -> bool
where
    F: FnMut(&[u32]) -> bool,
{
    let Some(cands) = initial_candidates(src, n, tgt, prefix) else {
        return false;
    };
    let mut chosen = prefix.to_vec();
    dfs(src, n, tgt, &mut chosen, cands, visit)
}

fn dfs<F>(
    src: &[i64],
    n: usize,
    tgt: &Shells,
    chosen: &mut Vec<u32>,
    cands: Vec<Vec<u32>>,
    visit: &mut F,
) -> bool
where
    F: FnMut(&[u32]) -> bool,
{
    let k = chosen.len();
    if k == n {
        return visit(chosen);
    }
    'next: for &v in &cands[0] {
        let mut rest: Vec<Vec<u32>> = Vec::with_capacity(cands.len() - 1);
        for (off, list) in cands[1..].iter().enumerate() {
            let l = k + 1 + off;
            let want = src[l * n + k];
            let f: Vec<u32> = list
                .iter()
                .copied()
                .filter(|&w| tgt.dot(w, v) == want)
                .collect();
            if f.is_empty() {
                continue 'next;
            }
            rest.push(f);
        }
        chosen.push(v);
        if dfs(src, n, tgt, chosen, rest, visit) {
            chosen.pop();
            return true;
        }
        chosen.pop();
    }
    false
}

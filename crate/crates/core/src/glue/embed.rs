use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::exact::modp::prime_factors;
use crate::exact::IntMatrix;
use crate::geometry::reduce;
use crate::isometry::automorphisms;
use crate::isometry::search::Shells;
use crate::lattice::Lattice;

/// Default cap on the number of embeddings returned as a list.
pub const EMBEDDING_LIST_CAP: usize = 1_000_000;

/// Row echelon basis modulo `p`, used to test independence of chosen images.
#[derive(Clone)]
struct Echelon {
    p: i64,
    rows: Vec<(usize, Vec<i64>)>,
}

impl Echelon {
    fn new(p: u64) -> Self {
        Echelon {
            p: p as i64,
            rows: vec![],
        }
    }

    fn reduce(&self, v: &[i64]) -> Vec<i64> {
        let p = self.p;
        let mut w: Vec<i64> = v.iter().map(|x| x.rem_euclid(p)).collect();
        for (piv, r) in &self.rows {
            let c = w[*piv];
            if c != 0 {
                for (a, b) in w.iter_mut().zip(r) {
                    *a = (*a - c * b).rem_euclid(p);
                }
            }
        }
        w
    }

    fn independent(&self, v: &[i64]) -> bool {
        self.reduce(v).iter().any(|&x| x != 0)
    }

    fn push(&mut self, v: &[i64]) {
        let p = self.p;
        let mut w = self.reduce(v);
        let Some(piv) = w.iter().position(|&x| x != 0) else {
            return;
        };
        let inv = crate::exact::modp::inv_mod(w[piv] as u64, p as u64).unwrap() as i64;
        w.iter_mut().for_each(|x| *x = *x * inv % p);
        for (_, r) in self.rows.iter_mut() {
            let c = r[piv];
            if c != 0 {
                for (a, b) in r.iter_mut().zip(&w) {
                    *a = (*a - c * b).rem_euclid(p);
                }
            }
        }
        self.rows.push((piv, w));
    }
}

/// Backtracking search for Gram-preserving maps `A → U`.
struct Search {
    /// Gram of `A` in search order
    src: Vec<i64>,
    k: usize,
    /// search position `i` holds basis vector `order[i]` of `A`
    order: Vec<usize>,
    shells: Shells,
    /// primes `p` with `p² | det A`; saturation fails only at these
    primes: Vec<u64>,
    saturated: bool,
}

impl Search {
    fn new(a: &Lattice, u: &Lattice, saturated: bool) -> Result<Search> {
        let k = a.rank();
        let ga = a
            .gram_i64()
            .ok_or(Error::Overflow("Gram of A does not fit in i64"))?;
        let order = search_order(&ga, k);
        let mut src = vec![0i64; k * k];
        for i in 0..k {
            for j in 0..k {
                src[i * k + j] = ga[order[i] * k + order[j]];
            }
        }
        let bound = (0..k).map(|i| src[i * k + i]).max().unwrap_or(0);
        let shells = Shells::new(reduce(u), bound);
        let det = a.det();
        let primes = prime_factors(&det)
            .into_iter()
            .filter(|&p| (&det % BigInt::from(p * p)) == BigInt::from(0))
            .collect();
        Ok(Search {
            src,
            k,
            order,
            shells,
            primes,
            saturated,
        })
    }

    fn echelons(&self) -> Vec<Echelon> {
        if self.saturated {
            self.primes.iter().map(|&p| Echelon::new(p)).collect()
        } else {
            vec![]
        }
    }

    fn admissible(ech: &[Echelon], v: &[i64]) -> bool {
        ech.iter().all(|e| e.independent(v))
    }

    /// Candidate lists for every level after fixing `prefix`.
    fn candidates(&self, prefix: &[u32]) -> Option<Vec<Vec<u32>>> {
        let k = self.k;
        let m = prefix.len();
        let mut out = Vec::with_capacity(k - m);
        for l in m..k {
            let c: Vec<u32> = self
                .shells
                .shell(self.src[l * k + l])
                .iter()
                .copied()
                .filter(|&v| (0..m).all(|j| self.shells.dot(v, prefix[j]) == self.src[l * k + j]))
                .collect();
            if c.is_empty() {
                return None;
            }
            out.push(c);
        }
        Some(out)
    }

    /// Counts completions; the deepest level is counted without recursion.
    fn count_from(&self, chosen: &mut Vec<u32>, ech: &[Echelon], cands: &[Vec<u32>]) -> u128 {
        let level = chosen.len();
        let k = self.k;
        if level == k {
            return 1;
        }
        if level + 1 == k {
            return cands[0]
                .iter()
                .filter(|&&v| Self::admissible(ech, self.shells.coords(v)))
                .count() as u128;
        }
        let mut total = 0u128;
        'next: for &v in &cands[0] {
            let cv = self.shells.coords(v);
            if !Self::admissible(ech, cv) {
                continue;
            }
            let mut rest: Vec<Vec<u32>> = Vec::with_capacity(cands.len() - 1);
            for (off, list) in cands[1..].iter().enumerate() {
                let want = self.src[(level + 1 + off) * k + level];
                let f: Vec<u32> = list
                    .iter()
                    .copied()
                    .filter(|&w| self.shells.dot(w, v) == want)
                    .collect();
                if f.is_empty() {
                    continue 'next;
                }
                rest.push(f);
            }
            let mut e2 = ech.to_vec();
            e2.iter_mut().for_each(|e| e.push(cv));
            chosen.push(v);
            total += self.count_from(chosen, &e2, &rest);
            chosen.pop();
        }
        total
    }

    fn list_from(
        &self,
        chosen: &mut Vec<u32>,
        ech: &[Echelon],
        cands: &[Vec<u32>],
        cap: usize,
        out: &mut Vec<Vec<u32>>,
    ) -> bool {
        let level = chosen.len();
        let k = self.k;
        if level == k {
            if out.len() >= cap {
                return false;
            }
            out.push(chosen.clone());
            return true;
        }
        'next: for &v in &cands[0] {
            let cv = self.shells.coords(v);
            if !Self::admissible(ech, cv) {
                continue;
            }
            let mut rest: Vec<Vec<u32>> = Vec::with_capacity(cands.len() - 1);
            for (off, list) in cands[1..].iter().enumerate() {
                let want = self.src[(level + 1 + off) * k + level];
                let f: Vec<u32> = list
                    .iter()
                    .copied()
                    .filter(|&w| self.shells.dot(w, v) == want)
                    .collect();
                if f.is_empty() {
                    continue 'next;
                }
                rest.push(f);
            }
            let mut e2 = ech.to_vec();
            e2.iter_mut().for_each(|e| e.push(cv));
            chosen.push(v);
            let ok = self.list_from(chosen, &e2, &rest, cap, out);
            chosen.pop();
            if !ok {
                return false;
            }
        }
        true
    }

    /// Embedding matrix in the original coordinates of `U`, rows in the basis order of `A`.
    fn to_matrix(&self, images: &[u32]) -> IntMatrix {
        let n = self.shells.n;
        let t = &self.shells.red.transform;
        let mut m = IntMatrix::zeros(self.k, n);
        for (pos, &img) in images.iter().enumerate() {
            let c = self.shells.coords(img);
            for j in 0..n {
                let s: i64 = (0..n).map(|i| c[i] * t[i * n + j]).sum();
                m[(self.order[pos], j)] = s.into();
            }
        }
        m
    }

    /// `O(U)`-orbits on the first shell, as (representative, size).
    fn first_level_orbits(&self, u: &Lattice) -> Vec<(u32, u64)> {
        let n = self.shells.n;
        let first = self.shells.shell(self.src[0]).to_vec();
        let t = self.shells.red.transform_matrix();
        let tinv = t
            .to_rat()
            .inverse()
            .and_then(|m| m.to_int())
            .expect("unimodular transform");
        let reduced_gens: Vec<Vec<i64>> = automorphisms(u)
            .generators
            .iter()
            .map(|g| {
                t.mul(&g.transpose())
                    .mul(&tinv)
                    .to_i64()
                    .expect("automorphism entries fit in i64")
            })
            .collect();
        let pos: std::collections::HashMap<u32, usize> =
            first.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let mut parent: Vec<usize> = (0..first.len()).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        let mut img = vec![0i64; n];
        for (i, &v) in first.iter().enumerate() {
            let c = self.shells.coords(v);
            for g in &reduced_gens {
                for (j, slot) in img.iter_mut().enumerate() {
                    *slot = (0..n).map(|a| c[a] * g[a * n + j]).sum();
                }
                let w = self
                    .shells
                    .find(&img)
                    .expect("automorphisms preserve shells");
                let j = pos[&w];
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                if ri != rj {
                    parent[ri.max(rj)] = ri.min(rj);
                }
            }
        }
        let mut sizes: std::collections::BTreeMap<usize, u64> = Default::default();
        for i in 0..first.len() {
            *sizes.entry(find(&mut parent, i)).or_default() += 1;
        }
        sizes.into_iter().map(|(r, s)| (first[r], s)).collect()
    }
}

/// Decreasing norm, then most nonzero inner products with the vectors already placed.
fn search_order(g: &[i64], k: usize) -> Vec<usize> {
    let mut placed: Vec<usize> = Vec::with_capacity(k);
    let mut left: Vec<usize> = (0..k).collect();
    while !left.is_empty() {
        let (pos, _) = left
            .iter()
            .enumerate()
            .max_by_key(|(_, &i)| {
                let links = placed.iter().filter(|&&j| g[i * k + j] != 0).count();
                (g[i * k + i], links, std::cmp::Reverse(i))
            })
            .unwrap();
        placed.push(left.remove(pos));
    }
    placed
}

fn trivial(a: &Lattice, u: &Lattice) -> Option<u128> {
    if a.rank() == 0 {
        return Some(1);
    }
    if a.rank() > u.rank() {
        return Some(0);
    }
    None
}

/// `|emb(A, U)|`: isometric embeddings, with saturated image if requested.
/// The first basis vector is placed on `O(U)`-orbit representatives and
/// weighted by orbit size, which leaves the count exact.
pub fn count_embeddings(a: &Lattice, u: &Lattice, saturated: bool) -> Result<BigInt> {
    if let Some(c) = trivial(a, u) {
        return Ok(c.into());
    }
    let s = Search::new(a, u, saturated)?;
    let ech = s.echelons();
    let mut total = 0u128;
    for (rep, size) in s.first_level_orbits(u) {
        if !Search::admissible(&ech, s.shells.coords(rep)) {
            continue;
        }
        let Some(cands) = s.candidates(&[rep]) else {
            continue;
        };
        let mut e2 = ech.clone();
        e2.iter_mut().for_each(|e| e.push(s.shells.coords(rep)));
        let mut chosen = vec![rep];
        total += size as u128 * s.count_from(&mut chosen, &e2, &cands);
    }
    Ok(total.into())
}

/// The same count by plain backtracking over every first image.
pub fn count_embeddings_raw(a: &Lattice, u: &Lattice, saturated: bool) -> Result<BigInt> {
    if let Some(c) = trivial(a, u) {
        return Ok(c.into());
    }
    let s = Search::new(a, u, saturated)?;
    let Some(cands) = s.candidates(&[]) else {
        return Ok(BigInt::from(0));
    };
    let ech = s.echelons();
    Ok(s.count_from(&mut vec![], &ech, &cands).into())
}

/// Every isometric embedding `A → U` (saturated if requested), rows = images of the basis of `A`.
/// More than `cap` results is an error carrying the cap, never a truncated list.
pub fn embeddings(a: &Lattice, u: &Lattice, saturated: bool, cap: usize) -> Result<Vec<IntMatrix>> {
    match trivial(a, u) {
        Some(1) => return Ok(vec![IntMatrix::zeros(0, u.rank())]),
        Some(_) => return Ok(vec![]),
        None => {}
    }
    let s = Search::new(a, u, saturated)?;
    let Some(cands) = s.candidates(&[]) else {
        return Ok(vec![]);
    };
    let mut out = Vec::new();
    if !s.list_from(&mut vec![], &s.echelons(), &cands, cap, &mut out) {
        return Err(Error::ResourceLimit(format!(
            "more than {cap} embeddings (partial count {})",
            out.len()
        )));
    }
    Ok(out.iter().map(|im| s.to_matrix(im)).collect())
}

/// Some embedding `A → U` (saturated if requested), or `None` if there is none.
pub fn first_embedding(a: &Lattice, u: &Lattice, saturated: bool) -> Result<Option<IntMatrix>> {
    match trivial(a, u) {
        Some(1) => return Ok(Some(IntMatrix::zeros(0, u.rank()))),
        Some(_) => return Ok(None),
        None => {}
    }
    let s = Search::new(a, u, saturated)?;
    let Some(cands) = s.candidates(&[]) else {
        return Ok(None);
    };
    let mut out = Vec::new();
    s.list_from(&mut vec![], &s.echelons(), &cands, 1, &mut out);
    Ok(out.first().map(|im| s.to_matrix(im)))
}

/// Every saturated embedding, as in [`embeddings`].
pub fn saturated_embeddings(a: &Lattice, u: &Lattice, cap: usize) -> Result<Vec<IntMatrix>> {
    embeddings(a, u, true, cap)
}

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::One;

use super::perm::{Orbit, Perm};
use super::search::{initial_candidates, search, Shells};
use crate::exact::IntMatrix;
use crate::geometry::{reduce, Reduced};
use crate::lattice::Lattice;

/// Orthogonal group of a lattice.
#[derive(Clone, Debug)]
pub struct AutGroup {
    /// each `g` satisfies `gᵀ · gram · g = gram` (column convention)
    pub generators: Vec<IntMatrix>,
    pub order: BigInt,
}

impl AutGroup {
    /// Checks the Gram identity for every generator.
    pub fn verify(&self, gram: &IntMatrix) -> bool {
        self.generators
            .iter()
            .all(|g| g.transpose().mul(gram).mul(g) == *gram)
    }
}

/// Reorders a reduced basis: row `i` of the result is row `perm[i]` of the input.
pub(crate) fn reorder(red: &Reduced, perm: &[usize]) -> Reduced {
    let n = red.n;
    let mut gram = vec![0i64; n * n];
    let mut transform = vec![0i64; n * n];
    for i in 0..n {
        for j in 0..n {
            gram[i * n + j] = red.gram[perm[i] * n + perm[j]];
            transform[i * n + j] = red.transform[perm[i] * n + j];
        }
    }
    Reduced { n, gram, transform }
}

/// Basis order that keeps early candidate lists small: greedily take the
/// vector with the fewest shell vectors matching its norm and its inner
/// products with the vectors already placed.
pub(crate) fn fingerprint_order(red: &Reduced, shells: &Shells) -> Vec<usize> {
    let n = red.n;
    let basis: Vec<u32> = (0..n).map(|i| shells.basis_index(i)).collect();
    let mut lists: Vec<Vec<u32>> = (0..n)
        .map(|i| shells.shell(red.gram[i * n + i]).to_vec())
        .collect();
    let mut placed: Vec<usize> = Vec::new();
    let mut remaining: Vec<usize> = (0..n).collect();
    while !remaining.is_empty() {
        let (pos, &best) = remaining
            .iter()
            .enumerate()
            .min_by_key(|(_, &b)| (lists[b].len(), b))
            .unwrap();
        remaining.remove(pos);
        placed.push(best);
        for &b in &remaining {
            let want = red.gram[b * n + best];
            let img = basis[best];
            lists[b].retain(|&v| shells.dot(v, img) == want);
        }
    }
    placed
}

/// Automorphism data in a fixed reduced basis.
pub(crate) struct AutData {
    pub shells: Shells,
    /// generators as images of the basis vectors (shell indices)
    pub images: Vec<Vec<u32>>,
    pub order: BigInt,
}

impl AutData {
    pub fn compute(l: &Lattice) -> AutData {
        let red0 = reduce(l);
        let n = red0.n;
        let bound = (0..n).map(|i| red0.gram[i * n + i]).max().unwrap_or(0);
        let shells0 = Shells::new(red0.clone(), bound);
        let order = fingerprint_order(&red0, &shells0);
        let red = reorder(&red0, &order);
        let shells = Shells::new(red, bound);
        Self::compute_in(shells)
    }

    /// Stabilizer chain with the basis vectors as base, deepest level first.
    pub fn compute_in(shells: Shells) -> AutData {
        let n = shells.n;
        let src = shells.red.gram.clone();
        let basis: Vec<u32> = (0..n).map(|i| shells.basis_index(i)).collect();
        let mut images: Vec<Vec<u32>> = Vec::new();
        let mut perms: Vec<Perm> = Vec::new();
        let mut order = BigInt::one();
        let degree = shells.len();
        for i in (0..n).rev() {
            let prefix = &basis[..i];
            let cands = initial_candidates(&src, n, &shells, prefix)
                .expect("the identity extends every prefix");
            let mut orbit = Orbit::new(basis[i], &perms, degree);
            let mut impossible: HashSet<u32> = HashSet::new();
            for &c in &cands[0] {
                if orbit.contains(c) || impossible.contains(&c) {
                    continue;
                }
                let mut pre = prefix.to_vec();
                pre.push(c);
                let mut found: Option<Vec<u32>> = None;
                search(&src, n, &shells, &pre, &mut |sol: &[u32]| {
                    found = Some(sol.to_vec());
                    true
                });
                match found {
                    Some(sol) => {
                        log::trace!("level {i}: new generator");
                        perms.push(shells.perm_of(&sol));
                        images.push(sol);
                        orbit = Orbit::new(basis[i], &perms, degree);
                    }
                    None => {
                        let o = Orbit::new(c, &perms, degree);
                        impossible.extend(o.points);
                    }
                }
            }
            log::debug!("level {i}: orbit length {}", orbit.len());
            order *= BigInt::from(orbit.len());
        }
        AutData {
            shells,
            images,
            order,
        }
    }

    /// Generator `k` as a row matrix in the reduced basis.
    pub fn reduced_matrix(&self, k: usize) -> IntMatrix {
        let n = self.shells.n;
        IntMatrix::from_fn(n, n, |i, j| self.shells.coords(self.images[k][i])[j].into())
    }

    /// Generators in original coordinates, column convention.
    pub fn group(&self) -> AutGroup {
        let t = self.shells.red.transform_matrix();
        let tinv = t
            .to_rat()
            .inverse()
            .and_then(|m| m.to_int())
            .expect("unimodular transform");
        let generators = (0..self.images.len())
            .map(|k| tinv.mul(&self.reduced_matrix(k)).mul(&t).transpose())
            .collect();
        AutGroup {
            generators,
            order: self.order.clone(),
        }
    }
}

/// The full orthogonal group with its exact order.
pub fn automorphisms(l: &Lattice) -> AutGroup {
    if l.rank() == 0 {
        return AutGroup {
            generators: vec![],
            order: BigInt::one(),
        };
    }
    AutData::compute(l).group()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{lattice_a, lattice_d, lattice_e, lattice_z};

    fn check(l: &Lattice) -> BigInt {
        let g = automorphisms(l);
        assert!(g.verify(l.gram()));
        g.order
    }

    #[test]
    fn small_orders() {
        for n in 1..=6u64 {
            let fact: u64 = (1..=n).product();
            assert_eq!(
                check(&lattice_z(n as usize)),
                BigInt::from((1u64 << n) * fact)
            );
        }
        assert_eq!(check(&lattice_a(2)), BigInt::from(12));
        assert_eq!(check(&lattice_a(1)), BigInt::from(2));
        // O(D4) = W(F4) of order 1152
        assert_eq!(check(&lattice_d(4).unwrap()), BigInt::from(1152));
    }

    #[test]
    fn e8_order() {
        assert_eq!(check(&lattice_e(8).unwrap()), BigInt::from(696729600u64));
    }
}

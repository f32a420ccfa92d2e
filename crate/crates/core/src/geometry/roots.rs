use std::fmt;

use super::lll::{reduce, Reduced};
use super::shortvec::short_vectors_reduced;
use crate::lattice::Lattice;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RootType {
    A,
    D,
    E,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootComponent {
    pub kind: RootType,
    pub rank: usize,
}

impl RootComponent {
    /// Number of roots (both signs).
    pub fn root_count(&self) -> usize {
        let n = self.rank;
        match self.kind {
            RootType::A => n * (n + 1),
            RootType::D => 2 * n * (n - 1),
            RootType::E => match n {
                6 => 72,
                7 => 126,
                _ => 240,
            },
        }
    }

    pub fn coxeter_number(&self) -> usize {
        self.root_count() / self.rank
    }

    /// Names an irreducible simply-laced system from its rank and Coxeter number.
    /// `A3 = D3` is reported as `A3`.
    pub fn identify(rank: usize, coxeter: usize) -> Option<Self> {
        let kind = if coxeter == rank + 1 {
            RootType::A
        } else if rank >= 4 && coxeter == 2 * rank - 2 {
            RootType::D
        } else if matches!((rank, coxeter), (6, 12) | (7, 18) | (8, 30)) {
            RootType::E
        } else {
            return None;
        };
        Some(RootComponent { kind, rank })
    }
}

impl fmt::Display for RootComponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.kind, self.rank)
    }
}

/// Components of the root system of norm-2 vectors, sorted.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RootDecomposition {
    pub components: Vec<RootComponent>,
}

impl RootDecomposition {
    pub fn root_count(&self) -> usize {
        self.components.iter().map(|c| c.root_count()).sum()
    }

    pub fn rank(&self) -> usize {
        self.components.iter().map(|c| c.rank).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }
}

impl fmt::Display for RootDecomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.components.is_empty() {
            return write!(f, "none");
        }
        let parts: Vec<String> = self.components.iter().map(|c| c.to_string()).collect();
        write!(f, "{}", parts.join("+"))
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Decomposes a list of roots (one per ± pair, reduced coordinates).
pub fn decompose(red: &Reduced, roots: &[Vec<i64>]) -> RootDecomposition {
    let n = red.n;
    let m = roots.len();
    // g·r for each root
    let gr: Vec<Vec<i64>> = roots
        .iter()
        .map(|r| {
            (0..n)
                .map(|i| (0..n).map(|j| red.gram[i * n + j] * r[j]).sum())
                .collect()
        })
        .collect();
    let dot = |a: usize, b: usize| -> i64 { gr[a].iter().zip(&roots[b]).map(|(x, y)| x * y).sum() };
    let mut parent: Vec<usize> = (0..m).collect();
    // first representative per component and its count of ±1 neighbours
    for a in 0..m {
        for b in a + 1..m {
            if dot(a, b) != 0 {
                let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                if ra != rb {
                    parent[ra.max(rb)] = ra.min(rb);
                }
            }
        }
    }
    let mut comps: Vec<(usize, usize)> = Vec::new(); // (root, pair count)
    let mut index = vec![usize::MAX; m];
    for a in 0..m {
        let r = find(&mut parent, a);
        if index[r] == usize::MAX {
            index[r] = comps.len();
            comps.push((r, 0));
        }
        comps[index[r]].1 += 1;
    }
    let mut components: Vec<RootComponent> = comps
        .iter()
        .map(|&(rep, pairs)| {
            let ones = (0..m).filter(|&b| dot(rep, b).abs() == 1).count();
            let h = (ones + 4) / 2;
            let total = 2 * pairs;
            let rank = total / h;
            RootComponent::identify(rank, h).unwrap_or_else(|| {
                panic!("norm-2 vectors with {total} roots and h = {h} are not a root system")
            })
        })
        .collect();
    components.sort();
    RootDecomposition { components }
}

pub fn root_decomposition(l: &Lattice) -> RootDecomposition {
    let red = reduce(l);
    let roots: Vec<Vec<i64>> = short_vectors_reduced(&red, 2)
        .into_iter()
        .filter(|v| v.norm == 2)
        .map(|v| v.coords)
        .collect();
    decompose(&red, &roots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{lattice_a, lattice_d, lattice_d_plus, lattice_e, lattice_z};

    fn comp(kind: RootType, rank: usize) -> RootComponent {
        RootComponent { kind, rank }
    }

    #[test]
    fn rank_sixteen_pair() {
        let e8 = lattice_e(8).unwrap();
        let ee = root_decomposition(&e8.direct_sum(&e8));
        assert_eq!(
            ee.components,
            vec![comp(RootType::E, 8), comp(RootType::E, 8)]
        );
        let d = root_decomposition(&lattice_d_plus(16).unwrap());
        assert_eq!(d.components, vec![comp(RootType::D, 16)]);
        assert_eq!(d.root_count(), 480);
    }

    #[test]
    fn rootless_and_mixed() {
        // 2·Z⁴ has minimum 4
        let l = Lattice::new(crate::exact::IntMatrix::from_fn(4, 4, |i, j| {
            num_bigint::BigInt::from(if i == j { 4 } else { 0 })
        }))
        .unwrap();
        assert!(root_decomposition(&l).is_empty());
        let z = lattice_z(3);
        assert_eq!(
            root_decomposition(&z).components,
            vec![comp(RootType::D, 3).min(comp(RootType::A, 3))]
        );
        let mixed = lattice_a(2)
            .direct_sum(&lattice_e(6).unwrap())
            .direct_sum(&lattice_d(5).unwrap());
        assert_eq!(
            root_decomposition(&mixed).components,
            vec![
                comp(RootType::A, 2),
                comp(RootType::D, 5),
                comp(RootType::E, 6)
            ]
        );
    }

    #[test]
    fn standard_counts() {
        for n in 1..=16 {
            let r = root_decomposition(&lattice_a(n));
            assert_eq!(r.root_count(), n * (n + 1));
            assert_eq!(r.components, vec![comp(RootType::A, n)]);
        }
        for n in 4..=16 {
            let r = root_decomposition(&lattice_d(n).unwrap());
            assert_eq!(r.root_count(), 2 * n * (n - 1));
            assert_eq!(r.components, vec![comp(RootType::D, n)]);
        }
        assert_eq!(root_decomposition(&lattice_e(7).unwrap()).root_count(), 126);
    }
}

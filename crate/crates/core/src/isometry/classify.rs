use std::sync::atomic::{AtomicBool, Ordering};

use super::fingerprint::{roots_of, Fingerprint};
use super::isom::IsometryTarget;
use crate::error::{Error, Result};
use crate::geometry::{reduce, short_vectors_reduced, theta_reduced, Reduced, RootDecomposition};
use crate::lattice::Lattice;

/// The cheapest invariant that tells the representatives apart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tier {
    /// `r(1), ..., r(k)`
    Theta(i64),
    /// number of roots and the rank of their span modulo 2
    RootSpan,
    RootSystem,
    /// no cheap invariant separates the classes; full fingerprints and isometry tests
    Full,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Key {
    Theta(Vec<u64>),
    RootSpan(usize, usize),
    RootSystem(RootDecomposition),
    Full,
}

fn rank_mod2(rows: &[Vec<i64>], n: usize) -> usize {
    // Gaussian elimination over F_2 with u64 words
    let words = n.div_ceil(64);
    let mut basis: Vec<Vec<u64>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    for r in rows {
        let mut v = vec![0u64; words];
        for (j, &x) in r.iter().enumerate() {
            if x & 1 == 1 {
                v[j / 64] |= 1 << (j % 64);
            }
        }
        for (b, &p) in basis.iter().zip(&pivots) {
            if v[p / 64] >> (p % 64) & 1 == 1 {
                v.iter_mut().zip(b).for_each(|(a, c)| *a ^= c);
            }
        }
        if let Some(p) = (0..n).find(|&p| v[p / 64] >> (p % 64) & 1 == 1) {
            basis.push(v);
            pivots.push(p);
            if basis.len() == n {
                break;
            }
        }
    }
    basis.len()
}

fn key_of(tier: &Tier, red: &Reduced) -> Key {
    match tier {
        Tier::Theta(k) => {
            let t = theta_reduced(red, *k, u64::MAX).unwrap();
            Key::Theta(t)
        }
        Tier::RootSpan => {
            let roots: Vec<Vec<i64>> = short_vectors_reduced(red, 2)
                .into_iter()
                .filter(|v| v.norm == 2)
                .map(|v| v.coords)
                .collect();
            Key::RootSpan(roots.len(), rank_mod2(&roots, red.n))
        }
        Tier::RootSystem => Key::RootSystem(roots_of(red)),
        Tier::Full => Key::Full,
    }
}

/// Maps lattices of a genus to catalog indices.
pub struct Classifier {
    targets: Vec<IsometryTarget>,
    tier: Tier,
    keys: Vec<Key>,
    /// when set, a unique invariant match is accepted without an isometry test
    trust_unique: AtomicBool,
}

impl Classifier {
    pub fn new(reps: &[Lattice]) -> Self {
        let targets: Vec<IsometryTarget> = reps.iter().map(IsometryTarget::new).collect();
        let reds: Vec<Reduced> = reps.iter().map(reduce).collect();
        let separates = |tier: &Tier| -> Option<Vec<Key>> {
            let keys: Vec<Key> = reds.iter().map(|r| key_of(tier, r)).collect();
            let distinct = (0..keys.len()).all(|i| (0..i).all(|j| keys[i] != keys[j]));
            distinct.then_some(keys)
        };
        let mut tiers: Vec<Tier> = (1..=4).map(Tier::Theta).collect();
        tiers.extend([Tier::RootSpan, Tier::RootSystem]);
        for t in tiers {
            if let Some(keys) = separates(&t) {
                return Classifier {
                    targets,
                    tier: t,
                    keys,
                    trust_unique: AtomicBool::new(false),
                };
            }
        }
        let keys = vec![Key::Full; reps.len()];
        Classifier {
            targets,
            tier: Tier::Full,
            keys,
            trust_unique: AtomicBool::new(false),
        }
    }

    pub fn tier(&self) -> &Tier {
        &self.tier
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Accept a unique invariant match without an isometry test. Only sound
    /// when the representatives are known to cover every class of the genus.
    pub fn set_trust_unique(&self, on: bool) {
        self.trust_unique.store(on, Ordering::Relaxed);
    }

    pub fn representative(&self, i: usize) -> &Lattice {
        &self.targets[i].lattice
    }

    /// Index of the class of `l`, verified by an explicit isometry unless trusted.
    pub fn classify(&self, l: &Lattice) -> Result<usize> {
        self.classify_reduced(&reduce(l))
    }

    /// As [`Classifier::classify`], for a lattice given by a reduced basis.
    pub fn classify_reduced(&self, red: &Reduced) -> Result<usize> {
        let cands = self.candidates(red);
        if cands.len() == 1 && self.tier != Tier::Full && self.trust_unique.load(Ordering::Relaxed)
        {
            return Ok(cands[0]);
        }
        self.verify_among(red, &cands)
    }

    /// Classification with an explicit isometry test regardless of trust.
    pub fn classify_verified(&self, l: &Lattice) -> Result<usize> {
        let red = reduce(l);
        let cands = self.candidates(&red);
        self.verify_among(&red, &cands)
    }

    fn candidates(&self, red: &Reduced) -> Vec<usize> {
        if self.tier == Tier::Full {
            return (0..self.keys.len()).collect();
        }
        let key = key_of(&self.tier, red);
        (0..self.keys.len())
            .filter(|&i| self.keys[i] == key)
            .collect()
    }

    fn verify_among(&self, red: &Reduced, cands: &[usize]) -> Result<usize> {
        let lat = || Lattice::new(red.gram_matrix()).expect("reduced Gram is positive definite");
        match cands {
            [] => {}
            [i] => {
                if self.targets[*i].matches_reduced(red) {
                    return Ok(*i);
                }
            }
            _ => {
                let fp = Fingerprint::of_reduced(&lat(), red);
                for &i in cands {
                    let t = &self.targets[i];
                    if t.fingerprint == fp && t.matches_reduced(red) {
                        return Ok(i);
                    }
                }
            }
        }
        Err(Error::Unclassified {
            gram: lat().gram().to_string(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mod2_rank() {
        assert_eq!(rank_mod2(&[vec![1, 1], vec![1, -1]], 2), 1);
        assert_eq!(rank_mod2(&[vec![1, 0], vec![3, 1]], 2), 2);
    }
}

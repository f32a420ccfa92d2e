use num_bigint::BigInt;

use crate::geometry::{
    decompose, reduce, short_vectors_reduced, theta_reduced, Reduced, RootDecomposition,
};
use crate::lattice::{Lattice, Parity};

/// Highest norm included in the theta part of a fingerprint.
pub const THETA_MAX_NORM: i64 = 8;
/// The theta part stops at the largest norm whose cumulative vector count stays below this.
pub const THETA_VECTOR_CAP: u64 = 4_096;

/// Isometry invariants used to rule out isometries quickly.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    pub det: BigInt,
    pub parity: Parity,
    /// `r(0), ..., r(m)` for the capped `m ≤ 8`
    pub theta: Vec<u64>,
    pub roots: RootDecomposition,
    /// nonzero `r(k) · k` for the listed shells, sorted
    pub shell_weights: Vec<u64>,
}

/// Theta prefix to the largest norm `m ≤ max_norm` with at most `cap` nonzero vectors.
pub fn capped_theta(red: &Reduced, max_norm: i64, cap: u64) -> Vec<u64> {
    let mut best = vec![1];
    for m in 1..=max_norm {
        match theta_reduced(red, m, cap) {
            Some(t) => best = t,
            None => break,
        }
    }
    best
}

/// Root system of a reduced basis.
pub fn roots_of(red: &Reduced) -> RootDecomposition {
    let roots: Vec<Vec<i64>> = short_vectors_reduced(red, 2)
        .into_iter()
        .filter(|v| v.norm == 2)
        .map(|v| v.coords)
        .collect();
    decompose(red, &roots)
}

impl Fingerprint {
    pub fn of(l: &Lattice) -> Self {
        Self::of_reduced(l, &reduce(l))
    }

    pub fn of_reduced(l: &Lattice, red: &Reduced) -> Self {
        let theta = capped_theta(red, THETA_MAX_NORM, THETA_VECTOR_CAP);
        let mut shell_weights: Vec<u64> = theta
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &c)| c > 0)
            .map(|(k, &c)| c * k as u64)
            .collect();
        shell_weights.sort_unstable();
        Fingerprint {
            det: l.det(),
            parity: l.parity(),
            theta,
            roots: roots_of(red),
            shell_weights,
        }
    }
}

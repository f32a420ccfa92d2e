use std::collections::HashMap;

use log::{debug, info};
use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::catalog::{CatalogClass, GenusCatalog};
use super::construct::neighbor_gram;
use super::lines::{count_isotropic_lines, line_enumerator, line_orbits, LineEnumerator};
use crate::error::{Error, Result};
use crate::exact::modp::is_prime;
use crate::exact::IntMatrix;
use crate::geometry::{
    decompose, reduce, reduce_i64, short_vectors_reduced, Reduced, RootDecomposition,
};
use crate::isometry::{automorphisms, AutGroup, Fingerprint, IsometryTarget};
use crate::lattice::Lattice;

/// Limits and sampling parameters for [`enumerate_genus`].
#[derive(Clone, Debug)]
pub struct GenusOptions {
    pub max_classes: usize,
    /// below this many lines per representative all lines are used
    pub exhaustive_threshold: u64,
    /// lines drawn per representative above the threshold
    pub sample_size: usize,
    pub seed: u64,
    /// prime for the re-pass after sampling; chosen automatically when `None`
    pub second_prime: Option<u64>,
}

impl Default for GenusOptions {
    fn default() -> Self {
        GenusOptions {
            max_classes: 1000,
            exhaustive_threshold: 1_000_000,
            sample_size: 100_000,
            seed: 0,
            second_prime: None,
        }
    }
}

struct Known {
    lattice: Lattice,
    target: IsometryTarget,
    aut: AutGroup,
}

/// Classes found so far, indexed by a cheap theta key.
struct Explorer {
    known: Vec<Known>,
    by_key: HashMap<(Vec<u64>, RootDecomposition), Vec<usize>>,
    det: BigInt,
    max_classes: usize,
}

const QUICK_NORM: i64 = 3;

/// `r(0..=3)` and the root system, from one enumeration.
fn quick_key(red: &Reduced) -> (Vec<u64>, RootDecomposition) {
    let sv = short_vectors_reduced(red, QUICK_NORM);
    let mut theta = vec![0u64; QUICK_NORM as usize + 1];
    theta[0] = 1;
    let mut roots = Vec::new();
    for v in sv {
        theta[v.norm as usize] += 2;
        if v.norm == 2 {
            roots.push(v.coords);
        }
    }
    (theta, decompose(red, &roots))
}

impl Explorer {
    fn new(max_classes: usize, det: BigInt) -> Self {
        Explorer {
            known: Vec::new(),
            by_key: HashMap::new(),
            det,
            max_classes,
        }
    }

    /// Index of the class of the reduced lattice, adding it if new.
    fn insert(&mut self, red: &Reduced) -> Result<(usize, bool)> {
        let key = quick_key(red);
        if let Some(cands) = self.by_key.get(&key) {
            // a unique candidate goes straight to the search; otherwise fingerprints prune first
            let fp = (cands.len() > 1)
                .then(|| Fingerprint::of_reduced(&Lattice::new_unchecked(red.gram_matrix()), red));
            for &i in cands {
                let t = &self.known[i].target;
                if fp.as_ref().is_none_or(|f| *f == t.fingerprint) && t.matches_reduced(red) {
                    return Ok((i, false));
                }
            }
        }
        let lat = Lattice::new_unchecked(red.gram_matrix());
        debug_assert_eq!(lat.det(), self.det);
        if self.known.len() >= self.max_classes {
            return Err(Error::ResourceLimit(format!(
                "more than {} classes in the genus",
                self.max_classes
            )));
        }
        let idx = self.known.len();
        let target = IsometryTarget::new(&lat);
        let aut = automorphisms(&lat);
        self.known.push(Known {
            lattice: lat,
            target,
            aut,
        });
        self.by_key.entry(key).or_default().push(idx);
        Ok((idx, true))
    }

    /// Classifies neighbors of class `i` at `p`; returns the number of new classes.
    fn explore(&mut self, i: usize, p: u64, opts: &GenusOptions) -> Result<usize> {
        let rep = self.known[i].lattice.clone();
        let n = rep.rank();
        let gram = rep
            .gram_i64()
            .ok_or(Error::Overflow("Gram entries exceed machine words"))?;
        let e: LineEnumerator = line_enumerator(&rep, p)?;
        let total = count_isotropic_lines(n, &rep.det(), p)?;
        let before = self.known.len();
        let visit = |v: &[u64], me: &mut Explorer| -> Result<()> {
            let ng = neighbor_gram(&gram, n, p, v)?;
            let red = reduce_i64(&ng, n).ok_or(Error::Overflow("neighbor reduction"))?;
            me.insert(&red)?;
            Ok(())
        };
        let exhaustive = total
            .to_u64()
            .is_some_and(|t| t <= opts.exhaustive_threshold);
        if exhaustive {
            // isometric lines give isometric neighbors: one line per O(L)-orbit
            let gens = self.known[i].aut.generators.clone();
            for (line, _) in line_orbits(&e, &gens)? {
                visit(&line.rep, self)?;
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
            rng.set_stream((p << 32) ^ i as u64);
            for _ in 0..opts.sample_size {
                let line = e.sample(&mut rng);
                visit(&line.rep, self)?;
            }
        }
        debug!(
            "class {i}: {} lines at p = {p}, {} classes known",
            total,
            self.known.len()
        );
        Ok(self.known.len() - before)
    }

    fn close(&mut self, p: u64, opts: &GenusOptions, start: usize) -> Result<()> {
        let mut next = start;
        while next < self.known.len() {
            self.explore(next, p, opts)?;
            next += 1;
        }
        Ok(())
    }
}

fn second_prime(l: &Lattice, p: u64) -> u64 {
    let det = l.det();
    (3u64..)
        .find(|&q| q != p && is_prime(q) && (&det % BigInt::from(q)) != BigInt::from(0))
        .unwrap()
}

/// Closure of the class of `l` under `p`-neighbors, with masses from automorphism groups.
///
/// All lines are used when a representative has at most
/// `opts.exhaustive_threshold` of them; otherwise `opts.sample_size` seeded
/// random lines per representative, followed by a re-pass at a second prime
/// until neither prime finds a new class.
pub fn enumerate_genus(l: &Lattice, p: u64, opts: &GenusOptions) -> Result<GenusCatalog> {
    line_enumerator(l, p)?;
    let n = l.rank();
    let mut ex = Explorer::new(opts.max_classes, l.det());
    let red = reduce(l);
    if n > 0 && red.gram.iter().any(|&x| x.unsigned_abs() > 1 << 40) {
        return Err(Error::Overflow("Gram entries too large for enumeration"));
    }
    ex.insert(&red)?;
    let sampled = count_isotropic_lines(n, &l.det(), p)?
        .to_u64()
        .is_none_or(|t| t > opts.exhaustive_threshold);
    let mut primes = vec![p];
    ex.close(p, opts, 0)?;
    if sampled {
        let q = opts.second_prime.unwrap_or_else(|| second_prime(l, p));
        line_enumerator(l, q)?;
        primes.push(q);
        loop {
            let before = ex.known.len();
            // re-pass: every known class at q, then close new ones at p
            ex.close(q, opts, 0)?;
            if ex.known.len() == before {
                break;
            }
            ex.close(p, opts, before)?;
        }
    }
    info!("genus closed with {} classes", ex.known.len());
    let mut classes = Vec::with_capacity(ex.known.len());
    for (i, k) in ex.known.into_iter().enumerate() {
        let red = reduce(&k.lattice);
        let roots = crate::geometry::root_decomposition(&k.lattice);
        let label = if i == 0 {
            l.label()
                .map(str::to_string)
                .unwrap_or_else(|| format!("N0[{roots}]"))
        } else {
            format!("N{i}[{roots}]")
        };
        let aut = k.aut;
        let lattice = Lattice::new(IntMatrix::from_i64(n, n, &red.gram))?.with_label(label);
        classes.push(CatalogClass {
            lattice,
            aut_order: aut.order,
        });
    }
    GenusCatalog::new(primes, classes)
}

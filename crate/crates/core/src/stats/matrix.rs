use log::debug;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::reduce_i64;
use crate::glue::check_complete;
use crate::isometry::{automorphisms, Classifier};
use crate::lattice::{Lattice, Parity, Sublattice};
use crate::neighbors::{
    check_neighbor_prime, count_isotropic_lines, line_enumerator, line_orbits, neighbor_gram,
    BiasedLines, GenusCatalog, LineEnumerator,
};

/// How the lines behind a row of counts were chosen.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum StatsMode {
    /// every isotropic line
    Exact,
    /// `count` uniform lines from a seeded generator
    Sampled { seed: u64, count: usize },
}

impl StatsMode {
    pub fn is_exact(&self) -> bool {
        matches!(self, StatsMode::Exact)
    }
}

/// Execution parameters; none of them changes an exact result.
#[derive(Clone, Debug)]
pub struct StatsOptions {
    /// work units per row; sampled results depend on it (one RNG stream per chunk)
    pub chunks: usize,
    /// weight one line per automorphism orbit by the orbit size
    pub orbit_reduction: bool,
    /// accept a unique invariant match without an isometry test; set
    /// automatically when an even catalog passes the mass-formula check
    pub trust_catalog: bool,
}

impl Default for StatsOptions {
    fn default() -> Self {
        StatsOptions {
            chunks: 64,
            orbit_reduction: true,
            trust_catalog: false,
        }
    }
}

/// Counts `N_p(x, y)` of `p`-neighbors of class `x` isometric to class `y`.
#[derive(Clone, Debug)]
pub struct NeighborStats {
    pub catalog: GenusCatalog,
    pub p: u64,
    pub mode: StatsMode,
    /// `counts[x][y]`; rows that were not computed are empty
    pub counts: Vec<Vec<u64>>,
    /// number of isotropic lines `c_V(p)` of a representative
    pub lines_total: BigInt,
}

impl NeighborStats {
    /// Number of lines behind each row.
    pub fn row_total(&self) -> BigInt {
        match self.mode {
            StatsMode::Exact => self.lines_total.clone(),
            StatsMode::Sampled { count, .. } => BigInt::from(count),
        }
    }

    pub fn frequency(&self, x: usize, y: usize) -> BigRational {
        BigRational::new(BigInt::from(self.counts[x][y]), self.row_total())
    }

    pub fn is_complete(&self) -> bool {
        self.counts.iter().all(|r| !r.is_empty())
    }
}

/// Counts from the `p`-neighbors of `L` containing a saturated `A`.
#[derive(Clone, Debug)]
pub struct BiasedStats {
    pub catalog: GenusCatalog,
    /// label of the ambient lattice
    pub ambient: String,
    pub p: u64,
    pub mode: StatsMode,
    pub counts: Vec<u64>,
    /// `|C_B(Z/p)|` for `B = A^⊥`
    pub lines_total: BigInt,
}

impl BiasedStats {
    pub fn row_total(&self) -> BigInt {
        match self.mode {
            StatsMode::Exact => self.lines_total.clone(),
            StatsMode::Sampled { count, .. } => BigInt::from(count),
        }
    }

    pub fn frequency(&self, y: usize) -> BigRational {
        BigRational::new(BigInt::from(self.counts[y]), self.row_total())
    }
}

/// Classifier shared by all rows of one run.
pub(crate) struct RunContext {
    classifier: Classifier,
    k: usize,
}

impl RunContext {
    pub(crate) fn new(catalog: &GenusCatalog, opts: &StatsOptions) -> Self {
        let classifier = Classifier::new(&catalog.representatives());
        let proven = catalog.parity == Parity::Even && check_complete(catalog).is_ok();
        classifier.set_trust_unique(opts.trust_catalog || proven);
        debug!(
            "classifier tier {:?}, trusted {}",
            classifier.tier(),
            opts.trust_catalog || proven
        );
        RunContext {
            classifier,
            k: catalog.len(),
        }
    }

    fn classify(&self, gram: &[i64], n: usize, p: u64, v: &[u64]) -> Result<usize> {
        let ng = neighbor_gram(gram, n, p, v)?;
        let red = reduce_i64(&ng, n).ok_or(Error::Overflow("neighbor reduction"))?;
        self.classifier.classify_reduced(&red)
    }

    /// Weighted counts over explicit line representatives.
    fn count_weighted(
        &self,
        gram: &[i64],
        n: usize,
        p: u64,
        lines: &[(Vec<u64>, u64)],
        chunks: usize,
    ) -> Result<Vec<u64>> {
        let size = lines.len().div_ceil(chunks.max(1)).max(1);
        let parts: Vec<Result<Vec<u64>>> = lines
            .par_chunks(size)
            .map(|part| {
                let mut c = vec![0u64; self.k];
                for (v, w) in part {
                    c[self.classify(gram, n, p, v)?] += w;
                }
                Ok(c)
            })
            .collect();
        merge(parts, self.k)
    }

    /// Counts over every line of an enumerator.
    fn count_all(
        &self,
        gram: &[i64],
        n: usize,
        p: u64,
        e: &LineEnumerator,
        chunks: usize,
    ) -> Result<Vec<u64>> {
        let parts: Vec<Result<Vec<u64>>> = e
            .chunks(chunks)?
            .par_iter()
            .map(|ch| {
                let mut c = vec![0u64; self.k];
                let mut err = None;
                e.for_each_in(ch, |v| {
                    if err.is_some() {
                        return;
                    }
                    match self.classify(gram, n, p, v) {
                        Ok(i) => c[i] += 1,
                        Err(x) => err = Some(x),
                    }
                });
                err.map_or(Ok(c), Err)
            })
            .collect();
        merge(parts, self.k)
    }

    /// Counts over `count` sampled lines, one RNG stream per chunk.
    fn count_sampled<S>(
        &self,
        gram: &[i64],
        n: usize,
        p: u64,
        seed: u64,
        stream: u64,
        count: usize,
        chunks: usize,
        sample: S,
    ) -> Result<Vec<u64>>
    where
        S: Fn(&mut ChaCha8Rng) -> Vec<u64> + Sync,
    {
        let chunks = chunks.max(1);
        let parts: Vec<Result<Vec<u64>>> = (0..chunks)
            .into_par_iter()
            .map(|i| {
                let len = count / chunks + usize::from(i < count % chunks);
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream((stream << 32) | i as u64);
                let mut c = vec![0u64; self.k];
                for _ in 0..len {
                    let v = sample(&mut rng);
                    c[self.classify(gram, n, p, &v)?] += 1;
                }
                Ok(c)
            })
            .collect();
        merge(parts, self.k)
    }
}

fn merge(parts: Vec<Result<Vec<u64>>>, k: usize) -> Result<Vec<u64>> {
    let mut out = vec![0u64; k];
    for part in parts {
        for (o, c) in out.iter_mut().zip(part?) {
            *o += c;
        }
    }
    Ok(out)
}

fn machine_gram(l: &Lattice) -> Result<Vec<i64>> {
    l.gram_i64()
        .ok_or(Error::Overflow("Gram entries exceed machine words"))
}

fn row_of(
    ctx: &RunContext,
    l: &Lattice,
    x: usize,
    p: u64,
    mode: StatsMode,
    opts: &StatsOptions,
) -> Result<Vec<u64>> {
    let n = l.rank();
    let gram = machine_gram(l)?;
    let e = line_enumerator(l, p)?;
    match mode {
        StatsMode::Exact if opts.orbit_reduction => {
            let gens = automorphisms(l).generators;
            let orbits: Vec<(Vec<u64>, u64)> = line_orbits(&e, &gens)?
                .into_iter()
                .map(|(line, s)| (line.rep, s))
                .collect();
            debug!("class {x}: {} line orbits at p = {p}", orbits.len());
            ctx.count_weighted(&gram, n, p, &orbits, opts.chunks)
        }
        StatsMode::Exact => ctx.count_all(&gram, n, p, &e, opts.chunks),
        StatsMode::Sampled { seed, count } => {
            ctx.count_sampled(&gram, n, p, seed, x as u64, count, opts.chunks, |rng| {
                e.sample(rng).rep
            })
        }
    }
}

fn check_row(row: &[u64], want: &BigInt, x: usize) -> Result<()> {
    let sum: BigInt = row.iter().map(|&c| BigInt::from(c)).sum();
    if &sum != want {
        return Err(Error::Identity(format!(
            "row {x} sums to {sum}, expected {want}"
        )));
    }
    Ok(())
}

/// The rows `rows` of the neighbor matrix (all rows when `None`).
pub fn neighbor_rows(
    catalog: &GenusCatalog,
    p: u64,
    mode: StatsMode,
    rows: Option<&[usize]>,
    opts: &StatsOptions,
) -> Result<NeighborStats> {
    let reps = catalog.representatives();
    let first = reps
        .first()
        .ok_or_else(|| Error::Catalog("empty catalog".into()))?;
    check_neighbor_prime(first, p)?;
    let lines_total = count_isotropic_lines(catalog.rank, &catalog.det, p)?;
    let ctx = RunContext::new(catalog, opts);
    let all: Vec<usize> = (0..catalog.len()).collect();
    let wanted = rows.unwrap_or(&all);
    let mut counts = vec![Vec::new(); catalog.len()];
    for &x in wanted {
        let row = row_of(&ctx, &reps[x], x, p, mode, opts)?;
        let want = match mode {
            StatsMode::Exact => lines_total.clone(),
            StatsMode::Sampled { count, .. } => BigInt::from(count),
        };
        check_row(&row, &want, x)?;
        counts[x] = row;
    }
    Ok(NeighborStats {
        catalog: catalog.clone(),
        p,
        mode,
        counts,
        lines_total,
    })
}

/// The full matrix `N_p(x, y)` over a catalog.
pub fn neighbor_matrix(
    catalog: &GenusCatalog,
    p: u64,
    mode: StatsMode,
    opts: &StatsOptions,
) -> Result<NeighborStats> {
    neighbor_rows(catalog, p, mode, None, opts)
}

/// Classes of the `p`-neighbors of `a.ambient()` that contain `a`.
pub fn biased_counts(
    catalog: &GenusCatalog,
    a: &Sublattice,
    p: u64,
    mode: StatsMode,
    opts: &StatsOptions,
) -> Result<BiasedStats> {
    let l = a.ambient();
    let bl = BiasedLines::new(a, p)?;
    let lines_total = bl.count()?;
    let ctx = RunContext::new(catalog, opts);
    let n = l.rank();
    let gram = machine_gram(l)?;
    let counts = match mode {
        StatsMode::Exact if opts.orbit_reduction => {
            let orbits: Vec<(Vec<u64>, u64)> =
                bl.orbits()?.into_iter().map(|(l, s)| (l.rep, s)).collect();
            debug!("{} biased line orbits at p = {p}", orbits.len());
            ctx.count_weighted(&gram, n, p, &orbits, opts.chunks)?
        }
        StatsMode::Exact => {
            let lines: Vec<(Vec<u64>, u64)> = bl.lines()?.into_iter().map(|l| (l.rep, 1)).collect();
            ctx.count_weighted(&gram, n, p, &lines, opts.chunks)?
        }
        StatsMode::Sampled { seed, count } => {
            ctx.count_sampled(&gram, n, p, seed, 0, count, opts.chunks, |rng| {
                bl.sample(rng).rep
            })?
        }
    };
    let want = match mode {
        StatsMode::Exact => lines_total.clone(),
        StatsMode::Sampled { count, .. } => BigInt::from(count),
    };
    check_row(&counts, &want, 0)?;
    Ok(BiasedStats {
        catalog: catalog.clone(),
        ambient: l.label().unwrap_or("L").to_string(),
        p,
        mode,
        counts,
        lines_total,
    })
}

/// Exact rational to float for reporting.
pub(crate) fn to_f64(x: &BigRational) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{lattice_e, lattice_z};
    use crate::neighbors::{enumerate_genus, GenusOptions};

    fn z9_catalog() -> GenusCatalog {
        enumerate_genus(&lattice_z(9), 3, &GenusOptions::default()).unwrap()
    }

    #[test]
    fn exact_rows_sum_to_line_count() {
        let c = z9_catalog();
        let s = neighbor_matrix(&c, 3, StatsMode::Exact, &StatsOptions::default()).unwrap();
        assert_eq!(s.lines_total, BigInt::from(3280));
        for row in &s.counts {
            assert_eq!(row.iter().sum::<u64>(), 3280);
        }
        // orbit weighting and plain enumeration agree
        let raw = StatsOptions {
            orbit_reduction: false,
            ..Default::default()
        };
        let s2 = neighbor_matrix(&c, 3, StatsMode::Exact, &raw).unwrap();
        assert_eq!(s.counts, s2.counts);
    }

    #[test]
    fn single_class_row() {
        let e8 = lattice_e(8).unwrap();
        let c = enumerate_genus(&e8, 2, &GenusOptions::default()).unwrap();
        let s = neighbor_matrix(&c, 5, StatsMode::Exact, &StatsOptions::default()).unwrap();
        assert_eq!(
            BigInt::from(s.counts[0][0]),
            count_isotropic_lines(8, &BigInt::from(1), 5).unwrap()
        );
    }

    #[test]
    fn sampling_is_deterministic() {
        let c = z9_catalog();
        let mode = StatsMode::Sampled {
            seed: 7,
            count: 500,
        };
        let opts = StatsOptions {
            chunks: 4,
            ..Default::default()
        };
        let a = neighbor_matrix(&c, 5, mode, &opts).unwrap();
        let b = neighbor_matrix(&c, 5, mode, &opts).unwrap();
        assert_eq!(a.counts, b.counts);
        assert!(a.counts.iter().all(|r| r.iter().sum::<u64>() == 500));
        let other = neighbor_matrix(
            &c,
            5,
            StatsMode::Sampled {
                seed: 8,
                count: 500,
            },
            &opts,
        )
        .unwrap();
        assert_ne!(a.counts, other.counts);
    }

    #[test]
    fn sampled_within_five_sigma_of_exact() {
        let c = z9_catalog();
        let exact = neighbor_matrix(&c, 3, StatsMode::Exact, &StatsOptions::default()).unwrap();
        let n = 100_000usize;
        let s = neighbor_matrix(
            &c,
            3,
            StatsMode::Sampled { seed: 1, count: n },
            &StatsOptions::default(),
        )
        .unwrap();
        for x in 0..c.len() {
            for y in 0..c.len() {
                let q = exact.counts[x][y] as f64 / 3280.0;
                let sigma = (n as f64 * q * (1.0 - q)).sqrt();
                let dev = (s.counts[x][y] as f64 - n as f64 * q).abs();
                assert!(
                    dev <= 5.0 * sigma,
                    "({x},{y}): {} vs {}",
                    s.counts[x][y],
                    n as f64 * q
                );
            }
        }
    }
}

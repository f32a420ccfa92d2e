use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::exact::modp::{inv_mod, is_prime, kronecker2, legendre, reduce, sqrt_mod};
use crate::exact::IntMatrix;
use crate::lattice::Lattice;

/// A line of `L ⊗ F_p` on which the form vanishes; first nonzero coordinate is 1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IsotropicLine {
    pub p: u64,
    pub rep: Vec<u64>,
}

impl IsotropicLine {
    /// Normalizes a nonzero vector mod p.
    pub fn from_vector(p: u64, v: &[u64]) -> Option<Self> {
        let k = v.iter().position(|&x| x % p != 0)?;
        let inv = inv_mod(v[k] % p, p)?;
        let rep = v
            .iter()
            .map(|&x| ((x % p) as u128 * inv as u128 % p as u128) as u64)
            .collect();
        Some(IsotropicLine { p, rep })
    }

    pub fn leading_index(&self) -> usize {
        self.rep.iter().position(|&x| x != 0).unwrap()
    }
}

/// `|C_L(Z/p)|` for a rank-`n` lattice of determinant `det`:
/// `1 + p + ... + p^{n-2}`, plus `ε p^{n/2-1}` for even `n` with
/// `ε = ((-1)^{n/2} det | p)`. At `p = 2` (even unimodular lattices only)
/// `ε` is the Kronecker symbol.
pub fn count_isotropic_lines(n: usize, det: &BigInt, p: u64) -> Result<BigInt> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if (det % BigInt::from(p)).is_zero() {
        return Err(Error::PrimeDividesDet {
            p,
            det: det.to_string(),
        });
    }
    if p == 2 && n % 2 == 1 {
        return Err(Error::UnsupportedPrime(
            "p = 2 requires an even unimodular lattice (even rank)".into(),
        ));
    }
    let bp = BigInt::from(p);
    let mut total = BigInt::zero();
    let mut pw = BigInt::one();
    for _ in 0..n.saturating_sub(1) {
        total += &pw;
        pw *= &bp;
    }
    if n % 2 == 0 && n > 0 {
        let sign = if (n / 2) % 2 == 0 {
            BigInt::one()
        } else {
            -BigInt::one()
        };
        let d = sign * det;
        let eps = if p == 2 {
            kronecker2(&d)
        } else {
            legendre(&d, p)
        };
        let term = bp.pow((n / 2 - 1) as u32);
        total += BigInt::from(eps) * term;
    }
    Ok(total)
}

/// A quadratic form over F_p, `Q(v) = Σ_{i≤j} c_ij v_i v_j`, stored upper triangular.
#[derive(Clone, Debug)]
pub struct QuadForm {
    pub n: usize,
    pub p: u64,
    coef: Vec<u64>,
}

impl QuadForm {
    /// For odd `p`: `vᵀGv mod p`. For `p = 2`: `vᵀGv/2 mod 2` (G even).
    pub fn from_gram(gram: &IntMatrix, p: u64) -> Self {
        let n = gram.rows();
        let mut coef = vec![0u64; n * n];
        for i in 0..n {
            for j in i..n {
                let g = &gram[(i, j)];
                coef[i * n + j] = if p == 2 {
                    if i == j {
                        reduce(&(g / BigInt::from(2)), 2)
                    } else {
                        reduce(g, 2)
                    }
                } else if i == j {
                    reduce(g, p)
                } else {
                    reduce(&(g * BigInt::from(2)), p)
                };
            }
        }
        QuadForm { n, p, coef }
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize) -> u64 {
        self.coef[i * self.n + j]
    }

    pub fn eval(&self, v: &[u64]) -> u64 {
        let (n, p) = (self.n, self.p as u128);
        let mut s: u128 = 0;
        for i in 0..n {
            if v[i] == 0 {
                continue;
            }
            let mut t: u128 = 0;
            for j in i..n {
                t += self.coef[i * n + j] as u128 * v[j] as u128;
            }
            s = (s + (t % p) * v[i] as u128) % p;
        }
        s as u64
    }

    /// Roots in F_p of `a x² + b x + c`, ascending.
    fn solve(&self, a: u64, b: u64, c: u64) -> Vec<u64> {
        let p = self.p;
        if p == 2 {
            return (0..2)
                .filter(|&x| (a * x * x + b * x + c) % 2 == 0)
                .collect();
        }
        let pm = p as u128;
        if a == 0 {
            if b == 0 {
                return if c == 0 { (0..p).collect() } else { vec![] };
            }
            let x = (pm - c as u128) * inv_mod(b, p).unwrap() as u128 % pm;
            return vec![x as u64];
        }
        let disc = ((b as u128 * b as u128) % pm + pm * 4 - (4 * a as u128 * c as u128) % pm) % pm;
        let Some(s) = sqrt_mod(disc as u64, p) else {
            return vec![];
        };
        let inv2a = inv_mod((2 * a as u128 % pm) as u64, p).unwrap() as u128;
        let r1 = ((pm - b as u128 + s as u128) % pm) * inv2a % pm;
        let r2 = ((2 * pm - b as u128 - s as u128) % pm) * inv2a % pm;
        let mut r = vec![r1 as u64, r2 as u64];
        r.sort_unstable();
        r.dedup();
        r
    }
}

/// A contiguous block of the deterministic line order: chart `k` (leading
/// coordinate) and a range of free-coordinate indices.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct LineChunk {
    pub chart: usize,
    pub start: u64,
    pub end: u64,
}

/// Deterministic enumeration of isotropic lines by affine charts.
#[derive(Clone, Debug)]
pub struct LineEnumerator {
    pub form: QuadForm,
}

impl LineEnumerator {
    pub fn new(form: QuadForm) -> Self {
        LineEnumerator { form }
    }

    fn chart_size(&self, k: usize) -> Result<u64> {
        let n = self.form.n;
        if k + 1 >= n {
            return Ok(1);
        }
        self.form
            .p
            .checked_pow((n - 2 - k) as u32)
            .ok_or_else(|| Error::ResourceLimit("line chart too large to enumerate".into()))
    }

    /// Splits the enumeration into roughly `target` chunks, in order.
    pub fn chunks(&self, target: usize) -> Result<Vec<LineChunk>> {
        let n = self.form.n;
        let mut sizes = Vec::with_capacity(n);
        let mut total: u128 = 0;
        for k in 0..n {
            let s = self.chart_size(k)?;
            total += s as u128;
            sizes.push(s);
        }
        let per = (total / target.max(1) as u128).max(1) as u64;
        let mut out = Vec::new();
        for (k, &s) in sizes.iter().enumerate() {
            let mut start = 0;
            while start < s {
                let end = start.saturating_add(per).min(s);
                out.push(LineChunk {
                    chart: k,
                    start,
                    end,
                });
                start = end;
            }
        }
        Ok(out)
    }

    /// Calls `f` on each line of the chunk, in order.
    pub fn for_each_in<F: FnMut(&[u64])>(&self, chunk: &LineChunk, mut f: F) {
        let form = &self.form;
        let (n, p) = (form.n, form.p);
        let k = chunk.chart;
        let mut v = vec![0u64; n];
        v[k] = 1;
        if k == n - 1 {
            if chunk.start == 0 && form.c(k, k) == 0 {
                f(&v);
            }
            return;
        }
        let free = n - 2 - k; // coordinates k+1 .. n-2
        let last = n - 1;
        // decode the start index into the free coordinates (first free coordinate most significant)
        let mut idx = chunk.start;
        for t in (0..free).rev() {
            v[k + 1 + t] = idx % p;
            idx /= p;
        }
        let pm = p as u128;
        for _ in chunk.start..chunk.end {
            v[last] = 0;
            let c = form.eval(&v);
            let mut b: u128 = 0;
            for i in k..last {
                b += form.c(i, last) as u128 * v[i] as u128;
            }
            let b = (b % pm) as u64;
            let a = form.c(last, last);
            for x in form.solve(a, b, c) {
                v[last] = x;
                f(&v);
            }
            // increment the free coordinates in mixed radix
            let mut t = free;
            while t > 0 {
                t -= 1;
                let pos = k + 1 + t;
                v[pos] += 1;
                if v[pos] < p {
                    break;
                }
                v[pos] = 0;
            }
        }
    }

    pub fn for_each<F: FnMut(&[u64])>(&self, mut f: F) -> Result<()> {
        for ch in self.chunks(1)? {
            self.for_each_in(&ch, &mut f);
        }
        Ok(())
    }

    pub fn collect(&self) -> Result<Vec<IsotropicLine>> {
        let p = self.form.p;
        let mut out = Vec::new();
        self.for_each(|v| out.push(IsotropicLine { p, rep: v.to_vec() }))?;
        Ok(out)
    }

    /// Uniform random isotropic line by rejection sampling.
    pub fn sample(&self, rng: &mut impl Rng) -> IsotropicLine {
        let (n, p) = (self.form.n, self.form.p);
        let mut v = vec![0u64; n];
        loop {
            for x in v.iter_mut() {
                *x = rng.gen_range(0..p);
            }
            if v.iter().all(|&x| x == 0) {
                continue;
            }
            if self.form.eval(&v) == 0 {
                return IsotropicLine::from_vector(p, &v).unwrap();
            }
        }
    }
}

fn find(parent: &mut [u32], mut x: u32) -> u32 {
    while parent[x as usize] != x {
        parent[x as usize] = parent[parent[x as usize] as usize];
        x = parent[x as usize];
    }
    x
}

/// Orbits of a group of isometries (matrices `g` acting on coordinate columns)
/// on the isotropic lines. Returns one representative per orbit, the first in
/// enumeration order, with the orbit size.
pub fn line_orbits(
    e: &LineEnumerator,
    generators: &[IntMatrix],
) -> Result<Vec<(IsotropicLine, u64)>> {
    let (n, p) = (e.form.n, e.form.p);
    let mut flat: Vec<u32> = Vec::new();
    e.for_each(|v| flat.extend(v.iter().map(|&x| x as u32)))?;
    let count = if n == 0 { 0 } else { flat.len() / n };
    if count > u32::MAX as usize {
        return Err(Error::ResourceLimit(
            "too many lines for orbit computation".into(),
        ));
    }
    let key = |v: &[u32]| -> u128 { v.iter().fold(0u128, |a, &x| a * p as u128 + x as u128) };
    let mut index: std::collections::HashMap<u128, u32> =
        std::collections::HashMap::with_capacity(count);
    for i in 0..count {
        index.insert(key(&flat[i * n..(i + 1) * n]), i as u32);
    }
    let mut parent: Vec<u32> = (0..count as u32).collect();
    let mut w = vec![0u64; n];
    let mut wk = vec![0u32; n];
    for g in generators {
        let gm: Vec<u64> = g.entries().iter().map(|x| reduce(x, p)).collect();
        for i in 0..count {
            let v = &flat[i * n..(i + 1) * n];
            for (r, wr) in w.iter_mut().enumerate() {
                let mut s: u128 = 0;
                for (c, &vc) in v.iter().enumerate() {
                    if vc != 0 {
                        s += gm[r * n + c] as u128 * vc as u128;
                    }
                }
                *wr = (s % p as u128) as u64;
            }
            let lead = w
                .iter()
                .position(|&x| x != 0)
                .expect("isometries are invertible mod p");
            let inv = inv_mod(w[lead], p).unwrap() as u128;
            for (a, &b) in wk.iter_mut().zip(&w) {
                *a = (b as u128 * inv % p as u128) as u32;
            }
            let j = *index.get(&key(&wk)).ok_or_else(|| Error::NotIsometry)?;
            let (a, b) = (find(&mut parent, i as u32), find(&mut parent, j));
            if a != b {
                let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                parent[hi as usize] = lo;
            }
        }
    }
    let mut size = vec![0u64; count];
    for i in 0..count as u32 {
        let r = find(&mut parent, i);
        size[r as usize] += 1;
    }
    Ok((0..count)
        .filter(|&i| parent[i] == i as u32)
        .map(|i| {
            let rep = flat[i * n..(i + 1) * n].iter().map(|&x| x as u64).collect();
            (IsotropicLine { p, rep }, size[i])
        })
        .collect())
}

/// Checks that neighbors of `l` at `p` are supported.
pub fn check_neighbor_prime(l: &Lattice, p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    let det = l.det();
    if (&det % BigInt::from(p)).is_zero() {
        return Err(Error::PrimeDividesDet {
            p,
            det: det.to_string(),
        });
    }
    if p == 2 && !(l.is_even() && l.is_unimodular()) {
        return Err(Error::UnsupportedPrime(
            "2-neighbors are only supported for even unimodular lattices".into(),
        ));
    }
    Ok(())
}

pub fn line_enumerator(l: &Lattice, p: u64) -> Result<LineEnumerator> {
    check_neighbor_prime(l, p)?;
    Ok(LineEnumerator::new(QuadForm::from_gram(l.gram(), p)))
}

/// All isotropic lines in the deterministic chart order.
pub fn isotropic_lines(l: &Lattice, p: u64) -> Result<Vec<IsotropicLine>> {
    line_enumerator(l, p)?.collect()
}

/// `count` independent uniform lines from a seeded generator.
pub fn sample_isotropic_lines(
    l: &Lattice,
    p: u64,
    count: usize,
    seed: u64,
) -> Result<Vec<IsotropicLine>> {
    let e = line_enumerator(l, p)?;
    if count > 0 && count_isotropic_lines(l.rank(), &l.det(), p)?.is_zero() {
        return Err(Error::Precondition(
            "the lattice has no isotropic lines at this prime".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| e.sample(&mut rng)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;
    use crate::lattice::{lattice_a, lattice_e, lattice_z};

    fn brute(l: &Lattice, p: u64) -> usize {
        let f = QuadForm::from_gram(l.gram(), p);
        let n = l.rank();
        let total = p.pow(n as u32);
        let mut count = 0;
        for idx in 1..total {
            let mut v = vec![0u64; n];
            let mut x = idx;
            for c in v.iter_mut() {
                *c = x % p;
                x /= p;
            }
            let lead = v.iter().position(|&c| c != 0).unwrap();
            if v[lead] == 1 && f.eval(&v) == 0 {
                count += 1;
            }
        }
        count
    }

    #[test]
    fn formula_examples() {
        assert_eq!(count_isotropic_lines(3, &int(1), 3).unwrap(), int(4));
        assert_eq!(count_isotropic_lines(16, &int(1), 2).unwrap(), int(32895));
        assert_eq!(count_isotropic_lines(2, &int(4), 3).unwrap(), int(0));
        assert_eq!(count_isotropic_lines(8, &int(1), 3).unwrap(), int(1120));
        assert!(count_isotropic_lines(3, &int(3), 3).is_err());
    }

    #[test]
    fn enumeration_matches() {
        let z3 = lattice_z(3);
        let lines = isotropic_lines(&z3, 3).unwrap();
        assert_eq!(lines.len(), 4);
        assert!(lines.iter().any(|l| l.rep == vec![1, 1, 1]));
        assert_eq!(
            isotropic_lines(&lattice_e(8).unwrap(), 3).unwrap().len(),
            1120
        );
        assert_eq!(
            isotropic_lines(&lattice_e(8).unwrap(), 2).unwrap().len(),
            135
        );
        assert!(isotropic_lines(&lattice_z(4), 2).is_err());
        let a2z = lattice_a(2).direct_sum(&lattice_z(2));
        for p in [5u64, 7] {
            let n = isotropic_lines(&a2z, p).unwrap().len();
            assert_eq!(n, brute(&a2z, p));
            assert_eq!(int(n as i64), count_isotropic_lines(4, &int(3), p).unwrap());
        }
    }

    #[test]
    fn chunks_concatenate() {
        let l = lattice_z(5);
        let e = line_enumerator(&l, 5).unwrap();
        let all = e.collect().unwrap();
        let mut joined = Vec::new();
        for ch in e.chunks(7).unwrap() {
            e.for_each_in(&ch, |v| joined.push(v.to_vec()));
        }
        let all: Vec<Vec<u64>> = all.into_iter().map(|l| l.rep).collect();
        assert_eq!(all, joined);
    }

    #[test]
    fn orbits_partition_lines() {
        use crate::isometry::automorphisms;
        for (l, p) in [
            (lattice_z(4), 3u64),
            (lattice_e(8).unwrap(), 3),
            (lattice_a(2).direct_sum(&lattice_z(2)), 5),
        ] {
            let e = line_enumerator(&l, p).unwrap();
            let gens = automorphisms(&l).generators;
            let orbits = line_orbits(&e, &gens).unwrap();
            let total: u64 = orbits.iter().map(|o| o.1).sum();
            assert_eq!(total, e.collect().unwrap().len() as u64);
            if l.rank() == 8 {
                // W(E8) is transitive on the 1120 isotropic lines mod 3
                assert_eq!(orbits.len(), 1);
            }
        }
    }

    #[test]
    fn sampling() {
        let z3 = lattice_z(3);
        assert!(sample_isotropic_lines(&z3, 3, 0, 1).unwrap().is_empty());
        let a = sample_isotropic_lines(&z3, 3, 50, 9).unwrap();
        let b = sample_isotropic_lines(&z3, 3, 50, 9).unwrap();
        assert_eq!(a, b);
        let s = sample_isotropic_lines(&z3, 3, 10_000, 42).unwrap();
        let lines = isotropic_lines(&z3, 3).unwrap();
        for l in &lines {
            let k = s.iter().filter(|x| *x == l).count() as f64;
            let (mean, sd) = (2500.0, (10_000.0f64 * 0.25 * 0.75).sqrt());
            assert!((k - mean).abs() < 4.0 * sd, "frequency {k}");
        }
    }
}

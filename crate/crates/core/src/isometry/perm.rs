//! Permutation groups on `0..degree`: orbits, Schreier vectors and
//! stabilizer chains (Schreier-Sims).

use num_bigint::BigInt;
use num_traits::One;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Perm(pub Vec<u32>);

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm((0..n as u32).collect())
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn apply(&self, x: u32) -> u32 {
        self.0[x as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    /// `(self * other)(x) = self(other(x))`.
    pub fn compose(&self, other: &Perm) -> Perm {
        Perm(other.0.iter().map(|&x| self.0[x as usize]).collect())
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.0.len()];
        for (i, &x) in self.0.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Perm(inv)
    }

    pub fn first_moved(&self) -> Option<u32> {
        self.0
            .iter()
            .enumerate()
            .find(|(i, &x)| *i as u32 != x)
            .map(|(i, _)| i as u32)
    }
}

/// Orbit of a point with a Schreier vector for transversal reconstruction.
#[derive(Clone, Debug)]
pub struct Orbit {
    pub base: u32,
    pub points: Vec<u32>,
    /// for each point: index of the generator that reached it (u32::MAX = unvisited, base = u32::MAX - 1)
    via: Vec<u32>,
}

const UNSEEN: u32 = u32::MAX;
const ROOT: u32 = u32::MAX - 1;

impl Orbit {
    pub fn new(base: u32, gens: &[Perm], degree: usize) -> Self {
        let mut via = vec![UNSEEN; degree];
        via[base as usize] = ROOT;
        let mut o = Orbit {
            base,
            points: vec![base],
            via,
        };
        o.close(gens);
        o
    }

    fn close(&mut self, gens: &[Perm]) {
        let mut k = 0;
        while k < self.points.len() {
            let p = self.points[k];
            for (gi, g) in gens.iter().enumerate() {
                let q = g.apply(p);
                if self.via[q as usize] == UNSEEN {
                    self.via[q as usize] = gi as u32;
                    self.points.push(q);
                }
            }
            k += 1;
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, x: u32) -> bool {
        self.via[x as usize] != UNSEEN
    }

    /// Element mapping `base` to `x`, rebuilt from the Schreier vector.
    pub fn transversal(&self, x: u32, gens: &[Perm], inv: &[Perm]) -> Option<Perm> {
        if !self.contains(x) {
            return None;
        }
        let n = self.via.len();
        let mut word = Vec::new();
        let mut y = x;
        while self.via[y as usize] != ROOT {
            let gi = self.via[y as usize] as usize;
            word.push(gi);
            y = inv[gi].apply(y);
        }
        let mut u = Perm::identity(n);
        // u = g_{k} ... g_{1} applied in order from the base outward
        for &gi in word.iter().rev() {
            u = gens[gi].compose(&u);
        }
        debug_assert_eq!(u.apply(self.base), x);
        Some(u)
    }
}

/// Orbits of a group on a subset of points closed under it.
pub fn orbits_on(points: &[u32], gens: &[Perm]) -> Vec<Vec<u32>> {
    let degree = gens.first().map_or(0, |g| g.degree());
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for &p in points {
        if seen.contains(&p) {
            continue;
        }
        if gens.is_empty() || degree == 0 {
            seen.insert(p);
            out.push(vec![p]);
            continue;
        }
        let o = Orbit::new(p, gens, degree);
        for &q in &o.points {
            seen.insert(q);
        }
        out.push(o.points);
    }
    out
}

/// Base and strong generating set.
#[derive(Clone, Debug)]
pub struct StabChain {
    degree: usize,
    base: Vec<u32>,
    /// strong generators with the number of leading base points each fixes
    gens: Vec<(Perm, usize)>,
    orbits: Vec<Orbit>,
    /// per level: generators fixing the earlier base points, and their inverses
    cache: Vec<(Vec<Perm>, Vec<Perm>)>,
}

impl StabChain {
    pub fn trivial(degree: usize) -> Self {
        StabChain {
            degree,
            base: vec![],
            gens: vec![],
            orbits: vec![],
            cache: vec![],
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn base(&self) -> &[u32] {
        &self.base
    }

    pub fn order(&self) -> BigInt {
        self.orbits
            .iter()
            .fold(BigInt::one(), |acc, o| acc * BigInt::from(o.len()))
    }

    pub fn strong_generators(&self) -> Vec<Perm> {
        self.gens.iter().map(|(g, _)| g.clone()).collect()
    }

    fn level_gens(&self, i: usize) -> (Vec<Perm>, Vec<Perm>) {
        if i < self.cache.len() {
            return self.cache[i].clone();
        }
        (vec![], vec![])
    }

    fn rebuild_orbits(&mut self, upto: usize) {
        for i in 0..=upto.min(self.base.len().saturating_sub(1)) {
            let g: Vec<Perm> = self
                .gens
                .iter()
                .filter(|(_, l)| *l >= i)
                .map(|(g, _)| g.clone())
                .collect();
            let inv = g.iter().map(|x| x.inverse()).collect();
            self.orbits[i] = Orbit::new(self.base[i], &g, self.degree);
            self.cache[i] = (g, inv);
        }
    }

    /// Sifts `g`; returns the residue and the level where it stopped.
    pub fn sift(&self, g: &Perm) -> (Perm, usize) {
        let mut h = g.clone();
        for i in 0..self.base.len() {
            let x = h.apply(self.base[i]);
            if !self.orbits[i].contains(x) {
                return (h, i);
            }
            let (gens, inv) = &self.cache[i];
            let u = self.orbits[i].transversal(x, gens, inv).unwrap();
            h = u.inverse().compose(&h);
        }
        (h, self.base.len())
    }

    pub fn contains(&self, g: &Perm) -> bool {
        let (h, l) = self.sift(g);
        l == self.base.len() && h.is_identity()
    }

    /// Adds a sifted residue `h` stopping at `level`; returns false if it was trivial.
    fn add_residue(&mut self, h: Perm, level: usize) -> bool {
        if level == self.base.len() {
            if h.is_identity() {
                return false;
            }
            let p = h.first_moved().unwrap();
            self.base.push(p);
            self.orbits.push(Orbit::new(p, &[], self.degree));
            self.cache.push((vec![], vec![]));
        }
        self.gens.push((h, level));
        self.rebuild_orbits(level);
        true
    }

    /// Starts a chain whose base begins with `prefix`.
    fn with_base(degree: usize, prefix: &[u32]) -> Self {
        let mut c = StabChain::trivial(degree);
        for &p in prefix {
            c.base.push(p);
            c.orbits.push(Orbit::new(p, &[], degree));
            c.cache.push((vec![], vec![]));
        }
        c
    }

    /// Randomized Schreier-Sims for a group of known order.
    pub fn random_with_order(
        degree: usize,
        gens: &[Perm],
        order: &BigInt,
        base_prefix: &[u32],
        seed: u64,
    ) -> Self {
        let mut chain = StabChain::with_base(degree, base_prefix);
        if order.is_one() || gens.is_empty() {
            return chain;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut pool = RandomElements::new(gens, &mut rng);
        for g in gens {
            let (h, l) = chain.sift(g);
            chain.add_residue(h, l);
        }
        while &chain.order() < order {
            let g = pool.next(&mut rng);
            let (h, l) = chain.sift(&g);
            chain.add_residue(h, l);
        }
        assert_eq!(
            &chain.order(),
            order,
            "random Schreier-Sims overshot the stated order"
        );
        chain
    }

    /// Deterministic Schreier-Sims (all Schreier generators are sifted).
    pub fn deterministic(degree: usize, gens: &[Perm], base_prefix: &[u32]) -> Self {
        let mut chain = StabChain::with_base(degree, base_prefix);
        for g in gens {
            let (h, l) = chain.sift(g);
            chain.add_residue(h, l);
        }
        // process levels from the bottom until every Schreier generator sifts to identity
        let mut i = chain.base.len();
        while i > 0 {
            i -= 1;
            let (g, inv) = chain.level_gens(i);
            let orbit = chain.orbits[i].clone();
            'scan: for &x in &orbit.points {
                let ux = orbit.transversal(x, &g, &inv).unwrap();
                for s in &g {
                    let y = s.apply(x);
                    let uy = orbit.transversal(y, &g, &inv).unwrap();
                    let schreier = uy.inverse().compose(&s.compose(&ux));
                    let (h, l) = chain.sift(&schreier);
                    if chain.add_residue(h, l) {
                        // a new generator at level l >= i; restart from the deepest level
                        i = chain.base.len();
                        break 'scan;
                    }
                }
            }
        }
        chain
    }

    /// Generators of the pointwise stabilizer of the first `k` base points.
    pub fn stabilizer_gens(&self, k: usize) -> Vec<Perm> {
        self.level_gens(k).0
    }

    pub fn orbit(&self, i: usize) -> &Orbit {
        &self.orbits[i]
    }
}

/// Product replacement generator of nearly uniform random elements.
pub struct RandomElements {
    slots: Vec<Perm>,
    acc: Perm,
}

impl RandomElements {
    pub fn new(gens: &[Perm], rng: &mut impl Rng) -> Self {
        let n = gens[0].degree();
        let mut slots: Vec<Perm> = gens.to_vec();
        while slots.len() < 10 {
            slots.push(gens[slots.len() % gens.len()].clone());
        }
        let mut r = RandomElements {
            slots,
            acc: Perm::identity(n),
        };
        for _ in 0..50 {
            r.next(rng);
        }
        r
    }

    pub fn next(&mut self, rng: &mut impl Rng) -> Perm {
        let k = self.slots.len();
        let i = rng.gen_range(0..k);
        let mut j = rng.gen_range(0..k);
        while j == i {
            j = rng.gen_range(0..k);
        }
        self.slots[i] = if rng.gen_bool(0.5) {
            self.slots[i].compose(&self.slots[j])
        } else {
            self.slots[j].compose(&self.slots[i])
        };
        self.acc = self.acc.compose(&self.slots[i]);
        self.acc.clone()
    }
}

/// Generators of the stabilizer of `point` in a group of known order, via
/// random elements of the group multiplied back by transversal elements.
pub fn point_stabilizer(
    degree: usize,
    gens: &[Perm],
    order: &BigInt,
    point: u32,
    seed: u64,
) -> (Vec<Perm>, BigInt, usize) {
    let inv: Vec<Perm> = gens.iter().map(|g| g.inverse()).collect();
    let orbit = Orbit::new(point, gens, degree);
    let target = order / BigInt::from(orbit.len());
    if target.is_one() || gens.is_empty() {
        return (vec![], target, orbit.len());
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = RandomElements::new(gens, &mut rng);
    let mut chain = StabChain::trivial(degree);
    let mut found: Vec<Perm> = Vec::new();
    while chain.order() < target {
        let g = pool.next(&mut rng);
        let u = orbit.transversal(g.apply(point), gens, &inv).unwrap();
        let s = u.inverse().compose(&g);
        let (h, l) = chain.sift(&s);
        if chain.add_residue(h, l) {
            found.push(s);
        }
    }
    assert_eq!(chain.order(), target, "stabilizer order overshoot");
    (found, target, orbit.len())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cycle(n: usize) -> Perm {
        Perm((0..n as u32).map(|i| (i + 1) % n as u32).collect())
    }

    fn transposition(n: usize, a: u32, b: u32) -> Perm {
        let mut v: Vec<u32> = (0..n as u32).collect();
        v.swap(a as usize, b as usize);
        Perm(v)
    }

    #[test]
    fn symmetric_group_order() {
        for n in 2..=7 {
            let gens = vec![cycle(n), transposition(n, 0, 1)];
            let c = StabChain::deterministic(n, &gens, &[]);
            let fact: u64 = (1..=n as u64).product();
            assert_eq!(c.order(), BigInt::from(fact));
            let last = n as u32 - 1;
            let r = StabChain::random_with_order(n, &gens, &BigInt::from(fact), &[last], 1);
            assert_eq!(r.order(), BigInt::from(fact));
            assert_eq!(r.base()[0], last);
        }
    }

    #[test]
    fn cyclic_and_membership() {
        let c = StabChain::deterministic(6, &[cycle(6)], &[]);
        assert_eq!(c.order(), BigInt::from(6));
        assert!(c.contains(&cycle(6).compose(&cycle(6))));
        assert!(!c.contains(&transposition(6, 0, 1)));
    }

    #[test]
    fn stabilizer_of_point() {
        let n = 6;
        let gens = vec![cycle(n), transposition(n, 0, 1)];
        let (st, ord, orb) = point_stabilizer(n, &gens, &BigInt::from(720), 3, 7);
        assert_eq!(orb, 6);
        assert_eq!(ord, BigInt::from(120));
        assert!(st.iter().all(|g| g.apply(3) == 3));
        let c = StabChain::deterministic(n, &st, &[]);
        assert_eq!(c.order(), BigInt::from(120));
    }
}

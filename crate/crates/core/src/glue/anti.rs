use crate::error::{Error, Result};
use crate::isometry::automorphisms;
use crate::lattice::{FiniteQuadraticModule, Lattice, Residue};

/// Largest residue order accepted by the brute-force enumeration.
pub const ANTI_ISOMETRY_CAP: u64 = 10_000;

/// Group isomorphism `σ: source → target` with `b(σx, σy) = −b(x, y)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct AntiIsometry {
    pub source: FiniteQuadraticModule,
    pub target: FiniteQuadraticModule,
    /// image of source generator `i`, in target generator coordinates
    pub images: Vec<Vec<u64>>,
    /// `q(σx) = −q(x)` for all `x`; false when either side has no quadratic form
    pub quadratic: bool,
}

impl AntiIsometry {
    /// Wraps generator images and computes the quadratic flag.
    pub fn new(
        source: FiniteQuadraticModule,
        target: FiniteQuadraticModule,
        images: Vec<Vec<u64>>,
    ) -> Self {
        let quadratic = quadratic_anti(&source, &target, &images);
        AntiIsometry {
            source,
            target,
            images,
            quadratic,
        }
    }

    pub fn apply(&self, x: &[u64]) -> Vec<u64> {
        let t = &self.target;
        let mut out = t.zero();
        for (c, img) in x.iter().zip(&self.images) {
            for _ in 0..*c {
                out = t.add(&out, img);
            }
        }
        out
    }

    /// Checks the defining identities on all pairs of source generators.
    pub fn is_valid(&self) -> bool {
        let s = &self.source;
        let t = &self.target;
        let g = s.num_generators();
        if self.images.len() != g || s.order() != t.order() {
            return false;
        }
        for i in 0..g {
            if t.element_order(&self.images[i]) != s.orders()[i] {
                return false;
            }
            for j in 0..=i {
                if !anti(
                    s,
                    t,
                    &s.generator(i),
                    &s.generator(j),
                    &self.images[i],
                    &self.images[j],
                ) {
                    return false;
                }
            }
        }
        true
    }

    /// The set `{x + σx}` as pairs of coordinates.
    pub fn graph(&self) -> Result<Vec<(Vec<u64>, Vec<u64>)>> {
        Ok(self
            .source
            .elements()?
            .into_iter()
            .map(|x| {
                let y = self.apply(&x);
                (x, y)
            })
            .collect())
    }
}

fn anti(
    s: &FiniteQuadraticModule,
    t: &FiniteQuadraticModule,
    x: &[u64],
    y: &[u64],
    sx: &[u64],
    sy: &[u64],
) -> bool {
    // values live over the levels of the two modules
    let a = s.b_num(x, y) as u128 * t.level() as u128;
    let b = t.b_num(sx, sy) as u128 * s.level() as u128;
    let m = s.level() as u128 * t.level() as u128;
    (a + b) % m == 0
}

fn quadratic_anti(
    s: &FiniteQuadraticModule,
    t: &FiniteQuadraticModule,
    images: &[Vec<u64>],
) -> bool {
    if !s.has_quadratic() || !t.has_quadratic() {
        return false;
    }
    let m = s.level() as u128 * t.level() as u128;
    (0..s.num_generators()).all(|i| {
        let a = s.q_num(&s.generator(i)).unwrap() as u128 * t.level() as u128;
        let b = t.q_num(&images[i]).unwrap() as u128 * s.level() as u128;
        (a + b) % m == 0
    })
}

/// All anti-isometries between two finite quadratic modules.
pub fn anti_isometries_between(
    s: &FiniteQuadraticModule,
    t: &FiniteQuadraticModule,
) -> Result<Vec<AntiIsometry>> {
    if s.orders() != t.orders() {
        return Ok(vec![]);
    }
    if s.order() > ANTI_ISOMETRY_CAP {
        return Err(Error::ResourceLimit(format!(
            "residue of order {} exceeds the anti-isometry cap {ANTI_ISOMETRY_CAP}",
            s.order()
        )));
    }
    let g = s.num_generators();
    let elems = t.elements()?;
    let cands: Vec<Vec<&Vec<u64>>> = (0..g)
        .map(|i| {
            let gi = s.generator(i);
            elems
                .iter()
                .filter(|y| t.element_order(y) == s.orders()[i] && anti(s, t, &gi, &gi, y, y))
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    let mut chosen: Vec<Vec<u64>> = Vec::with_capacity(g);
    extend(s, t, &cands, &mut chosen, &mut out);
    Ok(out)
}

fn extend(
    s: &FiniteQuadraticModule,
    t: &FiniteQuadraticModule,
    cands: &[Vec<&Vec<u64>>],
    chosen: &mut Vec<Vec<u64>>,
    out: &mut Vec<AntiIsometry>,
) {
    let k = chosen.len();
    if k == cands.len() {
        let candidate = AntiIsometry::new(s.clone(), t.clone(), chosen.clone());
        // an anti-isometry of nondegenerate forms is injective, but a
        // degenerate input could still give a non-bijective map
        if is_bijective(&candidate) {
            out.push(candidate);
        }
        return;
    }
    let gk = s.generator(k);
    for &y in &cands[k] {
        if (0..k).all(|j| anti(s, t, &gk, &s.generator(j), y, &chosen[j])) {
            chosen.push(y.clone());
            extend(s, t, cands, chosen, out);
            chosen.pop();
        }
    }
}

fn is_bijective(sigma: &AntiIsometry) -> bool {
    let n = sigma.target.order() as usize;
    let mut seen = vec![false; n];
    for i in 0..sigma.source.order() {
        let y = sigma.apply(&sigma.source.element(i));
        let idx = sigma.target.index_of(&y) as usize;
        if seen[idx] {
            return false;
        }
        seen[idx] = true;
    }
    true
}

/// `Isom(−res A, res B)`, each element flagged as quadratic or not.
pub fn anti_isometries(a: &Lattice, b: &Lattice) -> Result<Vec<AntiIsometry>> {
    let ra = Residue::of(a)?;
    let rb = Residue::of(b)?;
    anti_isometries_between(ra.module(), rb.module())
}

/// Action of an isometry of `b` (column convention) on `res b`, as images of the generators.
pub fn residue_action(res: &Residue, g: &crate::exact::IntMatrix) -> Result<Vec<Vec<u64>>> {
    let m = res.module();
    let n = g.rows();
    (0..m.num_generators())
        .map(|i| {
            let x = res.lift(&m.generator(i));
            let gx: Vec<_> = (0..n)
                .map(|r| {
                    (0..n).fold(
                        num_rational::BigRational::from_integer(0.into()),
                        |acc, c| {
                            acc + num_rational::BigRational::from_integer(g[(r, c)].clone()) * &x[c]
                        },
                    )
                })
                .collect();
            res.project(&gx)
        })
        .collect()
}

/// Orbits of `O(b)` acting by `σ ↦ res(h) ∘ σ` on a list of anti-isometries with target `res b`.
pub fn anti_isometry_orbits(b: &Lattice, sigmas: &[AntiIsometry]) -> Result<Vec<Vec<usize>>> {
    let res = Residue::of(b)?;
    let t = res.module();
    let actions: Vec<Vec<Vec<u64>>> = automorphisms(b)
        .generators
        .iter()
        .map(|g| residue_action(&res, g))
        .collect::<Result<_>>()?;
    let apply = |act: &[Vec<u64>], y: &[u64]| -> Vec<u64> {
        let mut out = t.zero();
        for (c, img) in y.iter().zip(act) {
            for _ in 0..*c {
                out = t.add(&out, img);
            }
        }
        out
    };
    let mut parent: Vec<usize> = (0..sigmas.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (i, s) in sigmas.iter().enumerate() {
        for act in &actions {
            let images: Vec<Vec<u64>> = s.images.iter().map(|y| apply(act, y)).collect();
            let j = sigmas
                .iter()
                .position(|o| o.images == images)
                .ok_or_else(|| {
                    Error::Precondition("anti-isometry list is not O(B)-stable".into())
                })?;
            let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
            if ri != rj {
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut orbits: Vec<Vec<usize>> = Vec::new();
    let mut root_of: std::collections::HashMap<usize, usize> = Default::default();
    for i in 0..sigmas.len() {
        let r = find(&mut parent, i);
        let k = *root_of.entry(r).or_insert_with(|| {
            orbits.push(vec![]);
            orbits.len() - 1
        });
        orbits[k].push(i);
    }
    Ok(orbits)
}

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::anti::AntiIsometry;
use crate::error::{Error, Result};
use crate::exact::{left_kernel, row_basis, snf, IntMatrix, RatMatrix};
use crate::lattice::{Lattice, Residue, Sublattice};

/// An object `(B, σ)` with `σ ∈ Isom(−res A, res B)`.
#[derive(Clone, Debug)]
pub struct GluePair {
    pub a: Lattice,
    pub b: Lattice,
    pub sigma: AntiIsometry,
}

impl GluePair {
    pub fn new(a: Lattice, b: Lattice, sigma: AntiIsometry) -> Result<Self> {
        let ra = Residue::of(&a)?;
        let rb = Residue::of(&b)?;
        if &sigma.source != ra.module() || &sigma.target != rb.module() {
            return Err(Error::Precondition(
                "anti-isometry does not go from res A to res B".into(),
            ));
        }
        if !sigma.is_valid() {
            return Err(Error::Precondition("map is not an anti-isometry".into()));
        }
        Ok(GluePair { a, b, sigma })
    }

    /// Same parity in the sense of the groupoid of pairs: the complements have
    /// equal parity and, when both are even, `σ' ∘ σ⁻¹` preserves `q`.
    pub fn same_parity(&self, other: &GluePair) -> Result<bool> {
        if self.a.gram() != other.a.gram() {
            return Err(Error::Precondition(
                "pairs are over different lattices A".into(),
            ));
        }
        if self.b.parity() != other.b.parity() {
            return Ok(false);
        }
        if !self.b.is_even() {
            return Ok(true);
        }
        let s = &self.sigma;
        let o = &other.sigma;
        Ok((0..s.source.num_generators())
            .all(|i| s.target.q(&s.images[i]) == o.target.q(&o.images[i])))
    }
}

/// An object `(U, e)`: `U` unimodular and `e` a saturated isometric embedding of `A`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EmbeddedPair {
    pub u: Lattice,
    /// rows are the images of the basis of `A` in the coordinates of `U`
    pub e: IntMatrix,
}

impl EmbeddedPair {
    pub fn new(u: Lattice, e: IntMatrix) -> Result<Self> {
        if !u.is_unimodular() {
            return Err(Error::Precondition("U is not unimodular".into()));
        }
        let s = Sublattice::new(u.clone(), e.clone())?;
        if !s.is_saturated() {
            return Err(Error::Precondition(
                "embedded image is not saturated".into(),
            ));
        }
        Ok(EmbeddedPair { u, e })
    }

    /// The embedded lattice with its induced Gram matrix.
    pub fn a(&self) -> Lattice {
        Lattice::new(self.e.mul(self.u.gram()).mul(&self.e.transpose()))
            .expect("independent rows span a positive definite lattice")
    }
}

/// Basis of `L(σ) = π⁻¹ I(σ)`, rows in the coordinates of `A ⊕ B`.
pub fn glue_basis(pair: &GluePair) -> Result<RatMatrix> {
    let ra = Residue::of(&pair.a)?;
    let rb = Residue::of(&pair.b)?;
    let (na, nb) = (pair.a.rank(), pair.b.rank());
    let n = na + nb;
    let mut rows: Vec<Vec<BigRational>> = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| {
                    if i == j {
                        BigRational::one()
                    } else {
                        BigRational::zero()
                    }
                })
                .collect()
        })
        .collect();
    let m = ra.module();
    for i in 0..m.num_generators() {
        let mut r = ra.lift(&m.generator(i));
        r.extend(rb.lift(&pair.sigma.images[i]));
        rows.push(r);
    }
    let gens = RatMatrix::from_fn(rows.len(), n, |i, j| rows[i][j].clone());
    let (d, ints) = gens.clear_denominators();
    let basis = row_basis(&ints);
    let dr = BigRational::from_integer(d);
    Ok(RatMatrix::from_fn(n, n, |i, j| {
        BigRational::from_integer(basis[(i, j)].clone()) / &dr
    }))
}

fn gram_in(basis: &RatMatrix, ambient: &IntMatrix) -> Result<IntMatrix> {
    basis
        .mul_int(ambient)
        .mul(&basis.transpose())
        .to_int()
        .ok_or_else(|| Error::Precondition("glued lattice is not integral".into()))
}

/// The unimodular lattice `L(σ) ⊃ A ⊕ B`.
pub fn glue(pair: &GluePair) -> Result<Lattice> {
    let basis = glue_basis(pair)?;
    let g = gram_in(&basis, &pair.a.gram().block_diag(pair.b.gram()))?;
    Lattice::new(g)
}

/// `G(B, σ)` together with the basis of `U` in the coordinates of `A ⊕ B`.
fn functor_g_with_basis(pair: &GluePair) -> Result<(EmbeddedPair, RatMatrix)> {
    let (na, nb) = (pair.a.rank(), pair.b.rank());
    let n = na + nb;
    let t = glue_basis(pair)?;
    let tinv = t.inverse().expect("glue basis is nonsingular");
    let select = |from: usize, len: usize| {
        RatMatrix::from_fn(len, n, |i, j| {
            if j == from + i {
                BigRational::one()
            } else {
                BigRational::zero()
            }
        })
    };
    // B's basis in U coordinates, extended to a basis of U with B first
    let k0 = select(na, nb)
        .mul(&tinv)
        .to_int()
        .ok_or_else(|| Error::Precondition("B is not contained in L(σ)".into()))?;
    let w = if nb == 0 {
        IntMatrix::identity(n)
    } else {
        let s = snf(&k0);
        let rinv = s
            .right
            .to_rat()
            .inverse()
            .and_then(|m| m.to_int())
            .expect("unimodular transform");
        let rest: Vec<usize> = (nb..n).collect();
        k0.vstack(&rinv.select_rows(&rest))
    };
    if !w.det().abs().is_one() {
        return Err(Error::Precondition("B is not saturated in L(σ)".into()));
    }
    let t2 = w.to_rat().mul(&t);
    let ambient = pair.a.gram().block_diag(pair.b.gram());
    let u = Lattice::new(gram_in(&t2, &ambient)?)?;
    let e = select(0, na)
        .mul(&t2.inverse().expect("nonsingular"))
        .to_int()
        .expect("A ⊂ L(σ)");
    Ok((EmbeddedPair { u, e }, t2))
}

/// `G(B, σ) = (L(σ), A ⊂ A ⊕ B ⊂ L(σ))`. The basis of `L(σ)` starts with
/// the basis of `B`, so that `H ∘ G` is the identity on the nose.
pub fn functor_g(pair: &GluePair) -> Result<EmbeddedPair> {
    functor_g_with_basis(pair).map(|(x, _)| x)
}

/// Canonical basis of `e(A)^⊥ ∩ U` (Hermite normal form), rows in `U` coordinates.
fn complement_basis(x: &EmbeddedPair) -> IntMatrix {
    let n = x.u.rank();
    if x.e.rows() == 0 {
        return IntMatrix::identity(n);
    }
    let k = left_kernel(&x.u.gram().mul(&x.e.transpose()));
    if k.rows() == 0 {
        return k;
    }
    row_basis(&k)
}

/// `H(U, e) = (B, σ)` with `B = e(A)^⊥` and `U = L(σ)`.
pub fn functor_h(x: &EmbeddedPair) -> Result<GluePair> {
    let a = x.a();
    let c = complement_basis(x);
    let b = Lattice::new(c.mul(x.u.gram()).mul(&c.transpose()))?;
    let (na, n) = (a.rank(), x.u.rank());
    let m = x.e.vstack(&c);
    let minv = m.to_rat().inverse().expect("A ⊕ B has full rank");
    let ra = Residue::of(&a)?;
    let rb = Residue::of(&b)?;
    let (sa, sb) = (ra.module(), rb.module());
    // images of the basis of U in res A and res B
    let mut steps: Vec<(Vec<u64>, Vec<u64>)> = Vec::with_capacity(n);
    for i in 0..n {
        let row = minv.row(i);
        let za = ra.project(&row[..na])?;
        let zb = rb.project(&row[na..])?;
        steps.push((za, zb));
    }
    // the graph of σ is generated by these pairs
    let mut graph: HashMap<Vec<u64>, Vec<u64>> = HashMap::new();
    graph.insert(sa.zero(), sb.zero());
    let mut frontier = vec![sa.zero()];
    while let Some(xa) = frontier.pop() {
        let xb = graph[&xa].clone();
        for (da, db) in &steps {
            let ya = sa.add(&xa, da);
            let yb = sb.add(&xb, db);
            match graph.get(&ya) {
                Some(prev) if *prev != yb => {
                    return Err(Error::Precondition(
                        "U is not a glue of e(A) and its complement".into(),
                    ))
                }
                Some(_) => {}
                None => {
                    graph.insert(ya.clone(), yb);
                    frontier.push(ya);
                }
            }
        }
    }
    let images = (0..sa.num_generators())
        .map(|i| {
            graph.get(&sa.generator(i)).cloned().ok_or_else(|| {
                Error::Precondition("e(A) is not saturated or U is not unimodular".into())
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sigma = AntiIsometry::new(sa.clone(), sb.clone(), images);
    GluePair::new(a, b, sigma)
}

/// Isometry `φ: G(H(x)).U → x.U` with `e' · φ = e`, as a row matrix.
pub fn natural_isomorphism(x: &EmbeddedPair) -> Result<IntMatrix> {
    let y = functor_h(x)?;
    let (x2, t2) = functor_g_with_basis(&y)?;
    let m = x.e.vstack(&complement_basis(x));
    let phi = t2.mul_int(&m).to_int().ok_or(Error::NotIsometry)?;
    if phi.mul(x.u.gram()).mul(&phi.transpose()) != *x2.u.gram() || x2.e.mul(&phi) != x.e {
        return Err(Error::NotIsometry);
    }
    Ok(phi)
}

/// Exact index `[L(σ) : A ⊕ B]`.
pub fn glue_index(pair: &GluePair) -> Result<BigInt> {
    let det = glue_basis(pair)?.det();
    Ok((BigRational::one() / det).abs().to_integer())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::glue::anti::anti_isometries;
    use crate::isometry::is_isometric;
    use crate::lattice::{lattice_a, lattice_d, lattice_d_plus, lattice_e, lattice_z, Parity};

    fn pairs(a: &Lattice, b: &Lattice) -> Vec<GluePair> {
        anti_isometries(a, b)
            .unwrap()
            .into_iter()
            .map(|s| GluePair::new(a.clone(), b.clone(), s).unwrap())
            .collect()
    }

    #[test]
    fn trivial_and_a1() {
        let e8 = lattice_e(8).unwrap();
        let p = &pairs(&e8, &lattice_z(2))[0];
        assert_eq!(glue(p).unwrap().gram(), e8.direct_sum(&lattice_z(2)).gram());
        let a1 = lattice_a(1);
        let p = &pairs(&a1, &a1)[0];
        let l = glue(p).unwrap();
        assert!(l.is_unimodular());
        assert_eq!(l.parity(), Parity::Odd);
        assert!(is_isometric(&l, &lattice_z(2)).is_some());
        assert_eq!(glue_index(p).unwrap(), BigInt::from(2));
    }

    #[test]
    fn d8_glues() {
        let d8 = lattice_d(8).unwrap();
        let e8 = lattice_e(8).unwrap();
        let ee = e8.direct_sum(&e8);
        let d16 = lattice_d_plus(16).unwrap();
        let mut seen = Vec::new();
        for p in pairs(&d8, &d8) {
            let l = glue(&p).unwrap();
            assert!(l.is_unimodular());
            assert_eq!(l.is_even(), p.sigma.quadratic);
            if l.is_even() {
                let which = is_isometric(&l, &ee).is_some() as u8 * 2
                    + is_isometric(&l, &d16).is_some() as u8;
                assert!(which == 1 || which == 2);
            }
            // distinct σ give distinct subsets of (A ⊕ B) ⊗ Q
            let (h, _) = crate::exact::hnf(&glue_basis(&p).unwrap().clear_denominators().1);
            assert!(!seen.contains(&h));
            seen.push(h);
        }
    }

    #[test]
    fn functors_round_trip() {
        let d8 = lattice_d(8).unwrap();
        for p in pairs(&d8, &d8) {
            let x = functor_g(&p).unwrap();
            let y = functor_h(&x).unwrap();
            assert_eq!(y.b.gram(), p.b.gram());
            assert_eq!(y.sigma, p.sigma);
            natural_isomorphism(&x).unwrap();
        }
        let e6 = lattice_e(6).unwrap();
        for p in pairs(&lattice_a(2), &e6) {
            let x = functor_g(&p).unwrap();
            assert!(x.u.is_even() && x.u.is_unimodular());
            let y = functor_h(&x).unwrap();
            assert_eq!(y.b.gram(), e6.gram());
            assert_eq!(y.sigma, p.sigma);
        }
    }

    #[test]
    fn root_complement_in_e16() {
        let e8 = lattice_e(8).unwrap();
        let ee = e8.direct_sum(&e8);
        let mut r = vec![vec![0i64; 16]];
        r[0][0] = 1;
        let x = EmbeddedPair::new(ee, IntMatrix::from_rows(&r)).unwrap();
        let y = functor_h(&x).unwrap();
        assert_eq!(y.b.rank(), 15);
        assert_eq!(y.b.det(), BigInt::from(2));
        natural_isomorphism(&x).unwrap();
    }

    #[test]
    fn parity_transport() {
        let d8 = lattice_d(8).unwrap();
        let ps = pairs(&d8, &d8);
        for p in &ps {
            for q in &ps {
                let (u, v) = (glue(p).unwrap(), glue(q).unwrap());
                if p.same_parity(q).unwrap() {
                    assert_eq!(u.parity(), v.parity());
                }
                if u.is_even() && v.is_even() {
                    assert!(p.same_parity(q).unwrap());
                }
            }
        }
    }
}

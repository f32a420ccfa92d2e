use num_bigint::BigInt;
use num_traits::Zero;
use rand::Rng;

use std::collections::HashMap;

use super::lines::{
    check_neighbor_prime, count_isotropic_lines, line_orbits, IsotropicLine, LineEnumerator,
    QuadForm,
};
use crate::error::{Error, Result};
use crate::exact::modp::reduce;
use crate::exact::IntMatrix;
use crate::glue::residue_action;
use crate::isometry::automorphisms;
use crate::lattice::{Residue, Sublattice};

/// Isotropic lines of `L ⊗ F_p` coming from `B ⊗ F_p`, `B = L ∩ A^⊥`.
/// Their neighbors are exactly the `p`-neighbors of `L` containing `A`.
#[derive(Clone, Debug)]
pub struct BiasedLines {
    a: Sublattice,
    b: Sublattice,
    p: u64,
    enumerator: LineEnumerator,
    /// basis of `B` reduced mod p, rows in the coordinates of `L`
    basis_mod_p: Vec<Vec<u64>>,
}

impl BiasedLines {
    pub fn new(a: &Sublattice, p: u64) -> Result<Self> {
        let l = a.ambient();
        check_neighbor_prime(l, p)?;
        if p == 2 {
            return Err(Error::UnsupportedPrime(
                "biased neighbors require an odd prime".into(),
            ));
        }
        if !a.is_saturated() {
            return Err(Error::Precondition(
                "the sublattice must be saturated".into(),
            ));
        }
        let bp = BigInt::from(p);
        let da = a.lattice().det();
        if (&da % &bp).is_zero() {
            return Err(Error::PrimeDividesDet {
                p,
                det: da.to_string(),
            });
        }
        let b = a.orthogonal_complement();
        let db = b.lattice().det();
        if (&db % &bp).is_zero() {
            return Err(Error::PrimeDividesDet {
                p,
                det: db.to_string(),
            });
        }
        let enumerator = LineEnumerator::new(QuadForm::from_gram(&b.gram(), p));
        let basis_mod_p = (0..b.rank())
            .map(|i| b.basis().row(i).iter().map(|x| reduce(x, p)).collect())
            .collect();
        Ok(BiasedLines {
            a: a.clone(),
            b,
            p,
            enumerator,
            basis_mod_p,
        })
    }

    pub fn sublattice(&self) -> &Sublattice {
        &self.a
    }

    pub fn complement(&self) -> &Sublattice {
        &self.b
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    /// The line enumerator of `B ⊗ F_p`, in the coordinates of `B`.
    pub fn enumerator(&self) -> &LineEnumerator {
        &self.enumerator
    }

    /// `|C_B(Z/p)|`.
    pub fn count(&self) -> Result<BigInt> {
        count_isotropic_lines(self.b.rank(), &self.b.lattice().det(), self.p)
    }

    /// The line of `L ⊗ F_p` spanned by the image of a vector of `B ⊗ F_p`.
    pub fn to_ambient(&self, coords: &[u64]) -> IsotropicLine {
        let p = self.p as u128;
        let n = self.a.ambient().rank();
        let mut w = vec![0u128; n];
        for (c, row) in coords.iter().zip(&self.basis_mod_p) {
            if *c == 0 {
                continue;
            }
            for (wj, &r) in w.iter_mut().zip(row) {
                *wj = (*wj + *c as u128 * r as u128) % p;
            }
        }
        let w: Vec<u64> = w.into_iter().map(|x| x as u64).collect();
        IsotropicLine::from_vector(self.p, &w)
            .expect("B is saturated, so its basis stays independent mod p")
    }

    /// All biased lines in the deterministic order of `B`'s charts.
    pub fn lines(&self) -> Result<Vec<IsotropicLine>> {
        let mut out = Vec::new();
        self.enumerator.for_each(|v| out.push(self.to_ambient(v)))?;
        Ok(out)
    }

    /// Isometries `h` of `B` (column convention, coordinates of `B`) such that
    /// `id_A × h` preserves `L`. Built from Schreier generators of the kernel
    /// of `O(B) → O(res B)`; any generator that fails to extend is dropped.
    pub fn fixing_generators(&self) -> Result<Vec<IntMatrix>> {
        let bl = self.b.lattice();
        if bl.rank() == 0 {
            return Ok(vec![]);
        }
        let res = Residue::of(&bl)?;
        let gens = automorphisms(&bl).generators;
        let nb = bl.rank();
        let mut reps: HashMap<Vec<Vec<u64>>, IntMatrix> = HashMap::new();
        let id = IntMatrix::identity(nb);
        reps.insert(residue_action(&res, &id)?, id.clone());
        let mut queue = vec![id.clone()];
        let mut schreier: Vec<IntMatrix> = Vec::new();
        while let Some(r) = queue.pop() {
            for g in &gens {
                let m = g.mul(&r);
                let key = residue_action(&res, &m)?;
                match reps.get(&key) {
                    None => {
                        reps.insert(key, m.clone());
                        queue.push(m);
                    }
                    Some(rep) => {
                        let inv = rep
                            .to_rat()
                            .inverse()
                            .and_then(|x| x.to_int())
                            .expect("isometries are unimodular");
                        let s = inv.mul(&m);
                        if s != id && !schreier.contains(&s) {
                            schreier.push(s);
                        }
                    }
                }
            }
        }
        let a = self.a.basis();
        let m = a.vstack(self.b.basis());
        let minv = m.to_rat().inverse().expect("A ⊕ B has full rank");
        let k = a.rows();
        Ok(schreier
            .into_iter()
            .filter(|h| {
                let mut d = IntMatrix::identity(k + nb);
                for i in 0..nb {
                    for j in 0..nb {
                        d[(k + i, k + j)] = h[(j, i)].clone();
                    }
                }
                minv.mul_int(&d).mul_int(&m).is_integral()
            })
            .collect())
    }

    /// One biased line per orbit of [`fixing_generators`](Self::fixing_generators),
    /// with orbit sizes. Lines in one orbit have isometric neighbors.
    pub fn orbits(&self) -> Result<Vec<(IsotropicLine, u64)>> {
        let gens = self.fixing_generators()?;
        Ok(line_orbits(&self.enumerator, &gens)?
            .into_iter()
            .map(|(l, s)| (self.to_ambient(&l.rep), s))
            .collect())
    }

    pub fn sample(&self, rng: &mut impl Rng) -> IsotropicLine {
        let l = self.enumerator.sample(rng);
        self.to_ambient(&l.rep)
    }
}

/// Lines whose neighbors contain the saturated sublattice `a`.
pub fn biased_lines(a: &Sublattice, p: u64) -> Result<Vec<IsotropicLine>> {
    BiasedLines::new(a, p)?.lines()
}

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use super::embed::count_embeddings;
use crate::error::{Error, Result};
use crate::lattice::{Lattice, Parity};
use crate::neighbors::GenusCatalog;

/// Bernoulli numbers `B_0, ..., B_m` (with `B_1 = −1/2`).
pub fn bernoulli(m: usize) -> Vec<BigRational> {
    let mut b: Vec<BigRational> = vec![BigRational::one()];
    for k in 1..=m {
        let mut s = BigRational::zero();
        let mut binom = BigInt::one();
        for (j, bj) in b.iter().enumerate() {
            // binom = C(k + 1, j)
            s += BigRational::from_integer(binom.clone()) * bj;
            binom = binom * BigInt::from(k + 1 - j) / BigInt::from(j + 1);
        }
        b.push(-s / BigRational::from_integer(BigInt::from(k + 1)));
    }
    b
}

/// Mass of the genus of even unimodular lattices of rank `n ≡ 0 mod 8`:
/// `|B_{n/2}|/n · Π_{j<n/2} |B_{2j}|/(4j)`.
pub fn even_unimodular_mass(n: usize) -> Result<BigRational> {
    if n == 0 || n % 8 != 0 {
        return Err(Error::Precondition(format!(
            "no even unimodular lattices of rank {n}"
        )));
    }
    let k = n / 2;
    let b = bernoulli(n - 2);
    let mut m = b[k].abs() / BigRational::from_integer(BigInt::from(n));
    for j in 1..k {
        m *= b[2 * j].abs() / BigRational::from_integer(BigInt::from(4 * j));
    }
    Ok(m)
}

/// For even catalogs, compares the total mass with the mass formula.
pub fn check_complete(catalog: &GenusCatalog) -> Result<()> {
    if catalog.det != BigInt::one() {
        return Err(Error::Catalog("catalog is not a unimodular genus".into()));
    }
    if catalog.parity == Parity::Even {
        let want = even_unimodular_mass(catalog.rank)?;
        let have = catalog.total_mass();
        if want != have {
            return Err(Error::Catalog(format!(
                "incomplete catalog: total mass {have}, mass formula gives {want}"
            )));
        }
    }
    Ok(())
}

fn accepts(catalog: &GenusCatalog, filter: Option<Parity>) -> bool {
    filter.map_or(true, |p| p == catalog.parity)
}

/// Per-class terms `|emb(A, U)| / |O(U)|` with saturated embeddings.
pub fn groupoid_terms(a: &Lattice, catalog: &GenusCatalog) -> Result<Vec<(BigInt, BigRational)>> {
    catalog
        .classes
        .par_iter()
        .map(|c| {
            let e = count_embeddings(a, &c.lattice, true)?;
            let term = BigRational::new(e.clone(), c.aut_order.clone());
            Ok((e, term))
        })
        .collect()
}

/// `Σ_U |emb(A, U)| / |O(U)|` over the classes of a unimodular catalog whose
/// parity passes `parity_filter`. Even catalogs must pass the mass-formula check.
pub fn groupoid_mass(
    a: &Lattice,
    catalog: &GenusCatalog,
    parity_filter: Option<Parity>,
) -> Result<BigRational> {
    check_complete(catalog)?;
    if !accepts(catalog, parity_filter) || a.rank() > catalog.rank {
        return Ok(BigRational::zero());
    }
    Ok(groupoid_terms(a, catalog)?
        .into_iter()
        .fold(BigRational::zero(), |s, (_, t)| s + t))
}

/// Share of every class in the groupoid mass: `(|emb(A, U_i)|/|O(U_i)|) / m(A)`.
pub fn groupoid_shares(a: &Lattice, catalog: &GenusCatalog) -> Result<Vec<BigRational>> {
    check_complete(catalog)?;
    let terms = groupoid_terms(a, catalog)?;
    let total = terms.iter().fold(BigRational::zero(), |s, (_, t)| s + t);
    if total.is_zero() {
        return Err(Error::Precondition(
            "A has no saturated embedding in the genus".into(),
        ));
    }
    Ok(terms.into_iter().map(|(_, t)| t / &total).collect())
}

/// Share of class `i` in the groupoid mass.
pub fn groupoid_share(a: &Lattice, catalog: &GenusCatalog, i: usize) -> Result<BigRational> {
    groupoid_shares(a, catalog)?
        .into_iter()
        .nth(i)
        .ok_or_else(|| Error::Precondition(format!("no class {i}")))
}

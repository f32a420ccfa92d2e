use std::path::Path;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::IntMatrix;
use crate::isometry::is_isometric;
use crate::lattice::{Lattice, Parity};

/// One isometry class of a genus with the order of its automorphism group.
#[derive(Clone, Debug)]
pub struct CatalogClass {
    pub lattice: Lattice,
    pub aut_order: BigInt,
}

impl CatalogClass {
    pub fn mass(&self) -> BigRational {
        BigRational::new(BigInt::one(), self.aut_order.clone())
    }

    pub fn label(&self) -> &str {
        self.lattice.label().unwrap_or("")
    }
}

/// Pairwise non-isometric representatives of a genus with their masses.
#[derive(Clone, Debug)]
pub struct GenusCatalog {
    pub rank: usize,
    pub det: BigInt,
    pub parity: Parity,
    pub primes_used: Vec<u64>,
    pub classes: Vec<CatalogClass>,
}

fn big_of(v: &Value, what: &str) -> Result<BigInt> {
    match v {
        Value::String(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Catalog(format!("{what}: {s:?} is not an integer"))),
        Value::Number(n) => n
            .to_string()
            .parse()
            .map_err(|_| Error::Catalog(format!("{what}: {n} is not an integer"))),
        _ => Err(Error::Catalog(format!("{what}: expected an integer"))),
    }
}

fn field<'a>(v: &'a Value, key: &str) -> Result<&'a Value> {
    v.get(key)
        .ok_or_else(|| Error::Catalog(format!("missing field {key:?}")))
}

fn big_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

impl GenusCatalog {
    pub fn new(primes_used: Vec<u64>, classes: Vec<CatalogClass>) -> Result<Self> {
        let first = classes
            .first()
            .ok_or_else(|| Error::Catalog("a catalog needs at least one class".into()))?;
        let (rank, det, parity) = (
            first.lattice.rank(),
            first.lattice.det(),
            first.lattice.parity(),
        );
        for c in &classes {
            let l = &c.lattice;
            if l.rank() != rank || l.det() != det || l.parity() != parity {
                return Err(Error::Catalog(
                    "representatives differ in rank, determinant or parity".into(),
                ));
            }
            if !c.aut_order.is_positive() {
                return Err(Error::Catalog(
                    "automorphism orders must be positive".into(),
                ));
            }
        }
        Ok(GenusCatalog {
            rank,
            det,
            parity,
            primes_used,
            classes,
        })
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    pub fn representatives(&self) -> Vec<Lattice> {
        self.classes.iter().map(|c| c.lattice.clone()).collect()
    }

    pub fn masses(&self) -> Vec<BigRational> {
        self.classes.iter().map(|c| c.mass()).collect()
    }

    pub fn total_mass(&self) -> BigRational {
        self.masses()
            .into_iter()
            .fold(BigRational::zero(), |a, b| a + b)
    }

    /// `mass(class i) / total mass`.
    pub fn mass_fraction(&self, i: usize) -> BigRational {
        self.classes[i].mass() / self.total_mass()
    }

    /// Index of the class isometric to `l`, by explicit isometry search.
    pub fn find(&self, l: &Lattice) -> Option<usize> {
        self.classes
            .iter()
            .position(|c| is_isometric(&c.lattice, l).is_some())
    }

    /// True when the two catalogs have the same classes and masses up to isometry.
    pub fn agrees_with(&self, other: &GenusCatalog) -> bool {
        if self.len() != other.len() || self.total_mass() != other.total_mass() {
            return false;
        }
        let mut used = vec![false; other.len()];
        for c in &self.classes {
            let hit = (0..other.len()).find(|&j| {
                !used[j]
                    && other.classes[j].aut_order == c.aut_order
                    && is_isometric(&other.classes[j].lattice, &c.lattice).is_some()
            });
            match hit {
                Some(j) => used[j] = true,
                None => return false,
            }
        }
        true
    }

    pub fn to_json(&self) -> Value {
        let total = self.total_mass();
        let classes: Vec<Value> = self
            .classes
            .iter()
            .map(|c| {
                let n = c.lattice.rank();
                let gram: Vec<Value> = (0..n)
                    .flat_map(|i| {
                        c.lattice
                            .gram()
                            .row(i)
                            .iter()
                            .map(big_json)
                            .collect::<Vec<_>>()
                    })
                    .collect();
                json!({
                    "label": c.label(),
                    "gram": gram,
                    "aut_order": c.aut_order.to_string(),
                    "mass_num": "1",
                    "mass_den": c.aut_order.to_string(),
                })
            })
            .collect();
        json!({
            "rank": self.rank,
            "det": big_json(&self.det),
            "parity": self.parity.to_string(),
            "primes_used": self.primes_used,
            "total_mass_num": total.numer().to_string(),
            "total_mass_den": total.denom().to_string(),
            "classes": classes,
        })
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_json()).expect("catalog serializes")
    }

    /// Parses and validates a catalog: masses, total mass, and shared invariants.
    pub fn from_json(v: &Value) -> Result<Self> {
        let rank = field(v, "rank")?
            .as_u64()
            .ok_or_else(|| Error::Catalog("rank must be a nonnegative integer".into()))?
            as usize;
        let primes_used: Vec<u64> = match v.get("primes_used") {
            Some(Value::Array(a)) => a
                .iter()
                .map(|x| {
                    big_of(x, "primes_used")
                        .and_then(|b| b.to_u64().ok_or(Error::Catalog("prime too large".into())))
                })
                .collect::<Result<_>>()?,
            _ => Vec::new(),
        };
        let arr = field(v, "classes")?
            .as_array()
            .ok_or_else(|| Error::Catalog("classes must be an array".into()))?;
        let mut classes = Vec::with_capacity(arr.len());
        for (k, c) in arr.iter().enumerate() {
            let gram = field(c, "gram")?
                .as_array()
                .ok_or_else(|| Error::Catalog(format!("class {k}: gram must be an array")))?;
            if gram.len() != rank * rank {
                return Err(Error::Catalog(format!(
                    "class {k}: gram has {} entries, expected {}",
                    gram.len(),
                    rank * rank
                )));
            }
            let entries = gram
                .iter()
                .map(|x| big_of(x, "gram"))
                .collect::<Result<Vec<_>>>()?;
            let mut lattice = Lattice::new(IntMatrix::new(rank, rank, entries)?)?;
            if let Some(s) = c.get("label").and_then(Value::as_str) {
                if !s.is_empty() {
                    lattice = lattice.with_label(s);
                }
            }
            let aut_order = big_of(field(c, "aut_order")?, "aut_order")?;
            if let (Some(num), Some(den)) = (c.get("mass_num"), c.get("mass_den")) {
                let m = BigRational::new(big_of(num, "mass_num")?, big_of(den, "mass_den")?);
                if m != BigRational::new(BigInt::one(), aut_order.clone()) {
                    return Err(Error::Catalog(format!(
                        "class {k}: mass is not 1/aut_order"
                    )));
                }
            }
            classes.push(CatalogClass { lattice, aut_order });
        }
        let cat = GenusCatalog::new(primes_used, classes)?;
        if let Some(d) = v.get("det") {
            if big_of(d, "det")? != cat.det {
                return Err(Error::Catalog(
                    "det does not match the representatives".into(),
                ));
            }
        }
        if let (Some(num), Some(den)) = (v.get("total_mass_num"), v.get("total_mass_den")) {
            let t = BigRational::new(
                big_of(num, "total_mass_num")?,
                big_of(den, "total_mass_den")?,
            );
            if t != cat.total_mass() {
                return Err(Error::Catalog(
                    "total mass is not the sum of the class masses".into(),
                ));
            }
        }
        Ok(cat)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        Self::from_json(&serde_json::from_str(s)?)
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json_string() + "\n")?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;
    use crate::lattice::lattice_e;

    #[test]
    fn json_round_trip() {
        let e8 = lattice_e(8).unwrap().with_label("E8");
        let cat = GenusCatalog::new(
            vec![2],
            vec![CatalogClass {
                lattice: e8,
                aut_order: int(696729600),
            }],
        )
        .unwrap();
        let s = cat.to_json_string();
        let back = GenusCatalog::from_json_str(&s).unwrap();
        assert_eq!(back.len(), 1);
        assert_eq!(back.classes[0].label(), "E8");
        assert_eq!(back.total_mass(), BigRational::new(int(1), int(696729600)));
        assert!(back.agrees_with(&cat));
        let broken = s.replace(
            "\"total_mass_den\": \"696729600\"",
            "\"total_mass_den\": \"7\"",
        );
        assert!(GenusCatalog::from_json_str(&broken).is_err());
    }
}

use num_bigint::BigInt;

use super::Lattice;
use crate::error::{Error, Result};
use crate::exact::{hnf, IntMatrix};

pub fn lattice_z(n: usize) -> Lattice {
    Lattice::new(IntMatrix::identity(n))
        .unwrap()
        .with_label(format!("Z{n}"))
}

/// Root lattice A_n (Cartan matrix).
pub fn lattice_a(n: usize) -> Lattice {
    let g = IntMatrix::from_fn(n, n, |i, j| {
        BigInt::from(match i.abs_diff(j) {
            0 => 2,
            1 => -1,
            _ => 0,
        })
    });
    Lattice::new(g).unwrap().with_label(format!("A{n}"))
}

/// D_n basis in Z^n coordinates: e_i - e_{i+1}, e_{n-1} + e_n.
fn d_basis(n: usize) -> IntMatrix {
    let mut b = IntMatrix::zeros(n, n);
    for i in 0..n - 1 {
        b[(i, i)] = BigInt::from(1);
        b[(i, i + 1)] = BigInt::from(-1);
    }
    b[(n - 1, n - 2)] = BigInt::from(1);
    b[(n - 1, n - 1)] = BigInt::from(1);
    b
}

pub fn lattice_d(n: usize) -> Result<Lattice> {
    if n < 2 {
        return Err(Error::InvalidLattice(format!("D{n} needs rank at least 2")));
    }
    let b = d_basis(n);
    Ok(Lattice::new(b.mul(&b.transpose()))?.with_label(format!("D{n}")))
}

/// D_n⁺ = D_n + Z·(1/2, ..., 1/2), even unimodular for 8 | n.
pub fn lattice_d_plus(n: usize) -> Result<Lattice> {
    if n == 0 || n % 8 != 0 {
        return Err(Error::InvalidLattice(format!(
            "D{n}+ is only provided for ranks divisible by 8"
        )));
    }
    // work with 2 × coordinates so everything is integral
    let mut gens = IntMatrix::zeros(n + 1, n);
    let b = d_basis(n);
    for i in 0..n {
        for j in 0..n {
            gens[(i, j)] = &b[(i, j)] * BigInt::from(2);
        }
    }
    for j in 0..n {
        gens[(n, j)] = BigInt::from(1);
    }
    let (h, _) = hnf(&gens);
    let rows: Vec<usize> = (0..n).collect();
    let basis = h.select_rows(&rows);
    let g4 = basis.mul(&basis.transpose());
    let g = IntMatrix::from_fn(n, n, |i, j| &g4[(i, j)] / BigInt::from(4));
    Ok(Lattice::new(g)?.with_label(format!("D{n}+")))
}

/// E_6, E_7, E_8 from their Cartan matrices (Bourbaki labelling).
pub fn lattice_e(n: usize) -> Result<Lattice> {
    if !(6..=8).contains(&n) {
        return Err(Error::InvalidLattice(format!("E{n} does not exist")));
    }
    // node 2 hangs off node 4; 1-3-4-5-6-7-8 is a chain
    let edges = [(1, 3), (3, 4), (4, 5), (5, 6), (6, 7), (7, 8), (2, 4)];
    let mut g = IntMatrix::zeros(n, n);
    for i in 0..n {
        g[(i, i)] = BigInt::from(2);
    }
    for &(a, b) in &edges {
        if a <= n && b <= n {
            g[(a - 1, b - 1)] = BigInt::from(-1);
            g[(b - 1, a - 1)] = BigInt::from(-1);
        }
    }
    Ok(Lattice::new(g)?.with_label(format!("E{n}")))
}

/// Parses names such as `Z9`, `A2`, `D4`, `E8`, `D16+`, `E16`.
pub fn builtin(name: &str) -> Result<Lattice> {
    let bad = || Error::InvalidLattice(format!("unknown lattice name {name:?}"));
    let name = name.trim();
    let mut chars = name.chars();
    let kind = chars.next().ok_or_else(bad)?.to_ascii_uppercase();
    let rest: &str = chars.as_str();
    let (digits, plus) = match rest.strip_suffix('+') {
        Some(d) => (d, true),
        None => (rest, false),
    };
    let n: usize = digits.parse().map_err(|_| bad())?;
    match (kind, plus) {
        ('Z', false) => Ok(lattice_z(n)),
        ('A', false) if n >= 1 => Ok(lattice_a(n)),
        ('D', false) => lattice_d(n),
        ('D', true) => lattice_d_plus(n),
        ('E', false) if n == 16 => Ok(lattice_d_plus(16)?.with_label("E16")),
        ('E', false) => lattice_e(n),
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    #[test]
    fn determinants() {
        assert_eq!(lattice_a(2).det(), int(3));
        assert_eq!(lattice_d(4).unwrap().det(), int(4));
        assert_eq!(lattice_e(6).unwrap().det(), int(3));
        assert_eq!(lattice_e(7).unwrap().det(), int(2));
        let e8 = lattice_e(8).unwrap();
        assert!(e8.is_unimodular() && e8.is_even());
        for n in [8, 16, 24] {
            let d = lattice_d_plus(n).unwrap();
            assert!(d.is_unimodular() && d.is_even(), "D{n}+");
        }
        assert!(lattice_d_plus(12).is_err());
    }

    #[test]
    fn names() {
        assert_eq!(builtin("Z9").unwrap().rank(), 9);
        assert_eq!(builtin("e16").unwrap().label(), Some("E16"));
        assert_eq!(builtin("D16+").unwrap().rank(), 16);
        assert!(builtin("F4").is_err());
        assert!(builtin("E9").is_err());
    }
}

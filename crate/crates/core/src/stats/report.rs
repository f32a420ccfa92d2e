use std::io::Write;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use super::matrix::{
    biased_counts, neighbor_rows, to_f64, BiasedStats, NeighborStats, StatsMode, StatsOptions,
};
use crate::error::{Error, Result};
use crate::glue::groupoid_share;
use crate::lattice::Sublattice;
use crate::neighbors::{sigma_trivial, sigma_trivial_inertial, GenusCatalog};

/// One prime of a convergence table.
#[derive(Clone, Debug)]
pub struct ConvergenceRow {
    pub p: u64,
    pub class_from: String,
    pub class_to: String,
    pub count: u64,
    /// lines behind the ratio (`c_V(p)`, `|C_B|` or the sample size)
    pub lines_total: BigInt,
    pub exact: bool,
    pub ratio: BigRational,
    pub target: BigRational,
    pub residual: f64,
    pub residual_p: f64,
    pub residual_sqrt_p: f64,
}

impl ConvergenceRow {
    fn new(
        p: u64,
        from: &str,
        to: &str,
        count: u64,
        total: BigInt,
        exact: bool,
        target: BigRational,
    ) -> Self {
        let ratio = BigRational::new(BigInt::from(count), total.clone());
        let residual = to_f64(&(&ratio - &target).abs());
        ConvergenceRow {
            p,
            class_from: from.to_string(),
            class_to: to.to_string(),
            count,
            lines_total: total,
            exact,
            ratio,
            target,
            residual,
            residual_p: residual * p as f64,
            residual_sqrt_p: residual * (p as f64).sqrt(),
        }
    }
}

/// `N_p(from, to) / c_V(p)` against the mass fraction of `to`, one row per prime.
/// Refuses genera without a one-spinor-genus certificate.
pub fn convergence_report(
    catalog: &GenusCatalog,
    from: usize,
    to: usize,
    primes: &[u64],
    mode: StatsMode,
    opts: &StatsOptions,
) -> Result<Vec<ConvergenceRow>> {
    let reps = catalog.representatives();
    let first = reps
        .get(from)
        .ok_or_else(|| Error::Precondition(format!("no class {from}")))?;
    if to >= catalog.len() {
        return Err(Error::Precondition(format!("no class {to}")));
    }
    if sigma_trivial(first).is_none() {
        return Err(Error::Precondition(
            "no certificate that the genus is a single spinor genus; neighbor frequencies may then \
             depend on a quadratic character of p and need not approach the mass fraction"
                .into(),
        ));
    }
    let target = catalog.mass_fraction(to);
    primes
        .iter()
        .map(|&p| {
            let s = neighbor_rows(catalog, p, mode, Some(&[from]), opts)?;
            Ok(ConvergenceRow::new(
                p,
                catalog.classes[from].label(),
                catalog.classes[to].label(),
                s.counts[from][to],
                s.row_total(),
                mode.is_exact(),
                target.clone(),
            ))
        })
        .collect()
}

/// Biased frequencies of class `to` among neighbors of `a.ambient()` containing `a`,
/// against the groupoid share of `to`.
pub fn biased_report(
    catalog: &GenusCatalog,
    a: &Sublattice,
    to: usize,
    primes: &[u64],
    mode: StatsMode,
    opts: &StatsOptions,
) -> Result<Vec<ConvergenceRow>> {
    if to >= catalog.len() {
        return Err(Error::Precondition(format!("no class {to}")));
    }
    if sigma_trivial_inertial(a).is_none() {
        return Err(Error::Precondition(
            "no certificate that the inertial genus of the complement is a single spinor genus"
                .into(),
        ));
    }
    let target = groupoid_share(&a.lattice(), catalog, to)?;
    let from = a.ambient().label().unwrap_or("L").to_string();
    primes
        .iter()
        .map(|&p| {
            let s = biased_counts(catalog, a, p, mode, opts)?;
            Ok(ConvergenceRow::new(
                p,
                &from,
                catalog.classes[to].label(),
                s.counts[to],
                s.row_total(),
                mode.is_exact(),
                target.clone(),
            ))
        })
        .collect()
}

fn ratio_cells(exact: bool, r: &BigRational) -> [String; 3] {
    if exact {
        [r.numer().to_string(), r.denom().to_string(), String::new()]
    } else {
        [String::new(), String::new(), format!("{:.12}", to_f64(r))]
    }
}

const HEADER: [&str; 10] = [
    "p",
    "class_from",
    "class_to",
    "count",
    "lines_total",
    "ratio_num",
    "ratio_den",
    "ratio_float",
    "mass_frac_num",
    "mass_frac_den",
];

/// Writes every entry of a neighbor matrix as CSV.
pub fn write_stats_csv<W: Write>(stats: &NeighborStats, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = HEADER.to_vec();
    header.push("residual");
    w.write_record(&header).map_err(csv_err)?;
    let total = stats.row_total();
    for (x, row) in stats.counts.iter().enumerate() {
        for (y, &c) in row.iter().enumerate() {
            let ratio = BigRational::new(BigInt::from(c), total.clone());
            let frac = stats.catalog.mass_fraction(y);
            let [rn, rd, rf] = ratio_cells(stats.mode.is_exact(), &ratio);
            w.write_record([
                stats.p.to_string(),
                stats.catalog.classes[x].label().to_string(),
                stats.catalog.classes[y].label().to_string(),
                c.to_string(),
                total.to_string(),
                rn,
                rd,
                rf,
                frac.numer().to_string(),
                frac.denom().to_string(),
                format!("{:e}", to_f64(&(ratio - &frac).abs())),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Writes biased counts as CSV, with the groupoid share as the target fraction.
pub fn write_biased_csv<W: Write>(
    stats: &BiasedStats,
    shares: &[BigRational],
    out: W,
) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = HEADER.to_vec();
    header.push("residual");
    w.write_record(&header).map_err(csv_err)?;
    let total = stats.row_total();
    for (y, &c) in stats.counts.iter().enumerate() {
        let ratio = BigRational::new(BigInt::from(c), total.clone());
        let frac = &shares[y];
        let [rn, rd, rf] = ratio_cells(stats.mode.is_exact(), &ratio);
        w.write_record([
            stats.p.to_string(),
            stats.ambient.clone(),
            stats.catalog.classes[y].label().to_string(),
            c.to_string(),
            total.to_string(),
            rn,
            rd,
            rf,
            frac.numer().to_string(),
            frac.denom().to_string(),
            format!("{:e}", to_f64(&(ratio - frac).abs())),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes a convergence table as CSV, with the scaled residual columns.
pub fn write_report_csv<W: Write>(rows: &[ConvergenceRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let mut header = HEADER.to_vec();
    header.extend(["residual", "residual_p", "residual_sqrt_p"]);
    w.write_record(&header).map_err(csv_err)?;
    for r in rows {
        let [rn, rd, rf] = ratio_cells(r.exact, &r.ratio);
        w.write_record([
            r.p.to_string(),
            r.class_from.clone(),
            r.class_to.clone(),
            r.count.to_string(),
            r.lines_total.to_string(),
            rn,
            rd,
            rf,
            r.target.numer().to_string(),
            r.target.denom().to_string(),
            format!("{:e}", r.residual),
            format!("{:e}", r.residual_p),
            format!("{:e}", r.residual_sqrt_p),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{lattice_z, Lattice};
    use crate::neighbors::{enumerate_genus, GenusOptions};

    #[test]
    fn refuses_without_certificate() {
        // 2·Z³ has 2-rank 3 in rank 3, beyond the local bound
        let l = Lattice::from_rows(&[vec![2, 0, 0], vec![0, 2, 0], vec![0, 0, 2]]).unwrap();
        let c = enumerate_genus(&l, 3, &GenusOptions::default()).unwrap();
        let e = convergence_report(&c, 0, 0, &[5], StatsMode::Exact, &StatsOptions::default());
        assert!(matches!(e, Err(Error::Precondition(_))));
    }

    #[test]
    fn csv_columns() {
        let c = enumerate_genus(&lattice_z(9), 3, &GenusOptions::default()).unwrap();
        let s = super::super::neighbor_matrix(&c, 3, StatsMode::Exact, &StatsOptions::default())
            .unwrap();
        let mut buf = Vec::new();
        write_stats_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "p,class_from,class_to,count,lines_total,ratio_num,ratio_den,ratio_float,mass_frac_num,mass_frac_den,residual"
        );
        assert_eq!(lines.count(), 4);
    }
}

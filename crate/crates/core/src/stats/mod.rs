//! Neighbor-count matrices, Petersson and spectral checks, and convergence tables.

mod matrix;
mod report;
mod spectrum;

pub use matrix::{
    biased_counts, neighbor_matrix, neighbor_rows, BiasedStats, NeighborStats, StatsMode,
    StatsOptions,
};
pub use report::{
    biased_report, convergence_report, write_biased_csv, write_report_csv, write_stats_csv,
    ConvergenceRow,
};
pub use spectrum::{
    characteristic_polynomial, deflate, petersson_check, spectrum, PeterssonReport, SpectrumReport,
    EIGEN_RESIDUAL_TOL, EXACT_POLY_MAX,
};

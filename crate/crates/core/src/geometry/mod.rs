//! Basis reduction, short vectors, theta coefficients and root systems.

mod lll;
mod roots;
mod shortvec;

pub use lll::{is_lll_reduced, lll, reduce, reduce_i64, Reduced};
pub use roots::{decompose, root_decomposition, RootComponent, RootDecomposition, RootType};
pub use shortvec::{
    enumerate, exact_norm, short_vectors, short_vectors_reduced, theta_prefix, theta_reduced,
    Cholesky, ShortVector, ShortVectorList,
};

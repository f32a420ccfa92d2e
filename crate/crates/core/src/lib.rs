//! Exact computation with integral positive definite lattices: Kneser
//! neighbors, genus enumeration, automorphism groups, glueing and
//! neighbor statistics.

pub mod error;
pub mod exact;
pub mod geometry;
pub mod glue;
pub mod isometry;
pub mod lattice;
pub mod neighbors;
pub mod stats;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/lattices.md")]
    mod lattices {}
    #[doc = include_str!("../../../book/src/neighbors.md")]
    mod neighbors {}
    #[doc = include_str!("../../../book/src/automorphisms.md")]
    mod automorphisms {}
    #[doc = include_str!("../../../book/src/glueing.md")]
    mod glueing {}
    #[doc = include_str!("../../../book/src/statistics.md")]
    mod statistics {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

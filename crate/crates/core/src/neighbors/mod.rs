//! Kneser `p`-neighbors, genus enumeration and spinor invariants.

mod construct;
mod lines;

pub(crate) use construct::neighbor_gram;
pub use construct::{line_of, neighbor, Neighbor};
pub use lines::{
    check_neighbor_prime, count_isotropic_lines, isotropic_lines, line_enumerator, line_orbits,
    sample_isotropic_lines, IsotropicLine, LineChunk, LineEnumerator, QuadForm,
};
mod spinor;
pub use spinor::{
    sigma_trivial, sigma_trivial_inertial, spinor_norm, SpinorCertificate, SquareClass,
};
mod jordan;
pub use jordan::{genus_symbol_odd, same_genus_odd, JordanBlock};
mod catalog;
mod genus;
pub use catalog::{CatalogClass, GenusCatalog};
pub use genus::{enumerate_genus, GenusOptions};
mod biased;
pub use biased::{biased_lines, BiasedLines};

//! Automorphism groups, isometry tests and classification against a list
//! of class representatives.

mod aut;
mod classify;
mod fingerprint;
mod isom;
pub mod perm;
pub(crate) mod search;

pub use aut::{automorphisms, AutGroup};
pub use classify::{Classifier, Tier};
pub use fingerprint::{capped_theta, roots_of, Fingerprint, THETA_MAX_NORM, THETA_VECTOR_CAP};
pub use isom::{is_isometric, IsometryTarget};

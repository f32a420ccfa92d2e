//! Unimodular glueing along discriminant forms, the groupoids of pairs and
//! of embeddings, saturated embedding counts and groupoid masses.

mod anti;
mod embed;
mod mass;
mod pair;

pub use anti::{
    anti_isometries, anti_isometries_between, anti_isometry_orbits, residue_action, AntiIsometry,
    ANTI_ISOMETRY_CAP,
};
pub use embed::{
    count_embeddings, count_embeddings_raw, embeddings, first_embedding, saturated_embeddings,
    EMBEDDING_LIST_CAP,
};
pub use mass::{
    bernoulli, check_complete, even_unimodular_mass, groupoid_mass, groupoid_share,
    groupoid_shares, groupoid_terms,
};
pub use pair::{
    functor_g, functor_h, glue, glue_basis, glue_index, natural_isomorphism, EmbeddedPair, GluePair,
};

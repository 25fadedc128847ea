//! Isogenies of elliptic curves over small finite fields: volcanoes,
//! endomorphism conductors, kernel ideals, minimal isogeny degrees and
//! ideal counts in imaginary quadratic orders.

pub mod finite_field;
pub mod poly;
pub mod extension;
pub mod elliptic_curve;
pub mod torsion;
pub mod modpoly;
pub mod isogeny;
pub mod quadratic_order;
pub mod walk;
pub mod endo_ring;
pub mod isogeny_graph;
pub mod hom_index_kernel;
pub mod minimal_degree;

//! Train tracks on surfaces, orientable or not, as band complexes.
//!
//! Tracks carry twist bits, so one-sided curves are first-class. The crate
//! covers weight cones, carried curves, one-vertex classification,
//! uniformizing refinements with checked certificates, and an
//! intersection-number toolkit.

pub mod cone;
pub mod curves;
pub mod corpus;
pub mod exceptional;
pub mod first_return;
pub mod format;
pub mod lambda;
pub mod loops;
pub mod lp;
pub mod one_vertex;
pub mod procedure;
pub mod refine;
pub mod rat;
pub mod surface;
pub mod track;

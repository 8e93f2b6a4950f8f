//! Computer algebra for the exotic A∞ deformation of Batalin–Vilkovisky
//! algebras: chord diagrams on polygons, the Arnold form algebra and its
//! gravity/prime bases, tadpole-graph chains, multiple zeta values, period
//! integrals over associahedra, and a polydifferential representation on an
//! odd symplectic polynomial algebra used to check the resulting identities.

pub mod arnold;
pub mod darboux;
pub mod diagrams;
pub mod error;
pub mod exotic;
pub mod graphs;
pub mod linalg;
pub mod mzv;
pub mod periods;
pub mod sign;

pub use error::{Error, Result};

/// Exact rational numbers.
pub type Q = num_rational::BigRational;

//! Desk-scale computations on finite-stage Milnor join spaces.
//!
//! The crate builds classifying data for concrete structure groups:
//! principal bundles presented as cocycles over a small catalog of base
//! complexes, classifying maps into finite joins, the universal
//! connection and its pullbacks, horizontal lifts and holonomy,
//! curvature integrals, and symbolic homotopy-group bookkeeping.

pub mod base_complex;
pub mod bundle_cocycle;
pub mod classify;
pub mod connection;
pub mod error;
pub mod exprlang;
pub mod homotopy_tables;
pub mod lie_group;
pub mod milnor_join;
pub mod smooth;

pub use error::{Error, Result};
pub use lie_group::{AlgebraElement, GroupElement, GroupSpec};
// re-exports of join types land once milnor_join is in

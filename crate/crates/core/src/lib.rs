//! Sectorial normalization of saddle-node singularities of codimension `k`.
//!
//! Leaves of a field in Dulac form are integrated along paths into each node
//! sector; differences of sectorial primitives across the saddle parts give
//! the orbital and temporal moduli, and the block-triangular structure of
//! those periods is inverted to build fields with prescribed moduli.

pub mod algebra;
pub mod error;
pub mod geometry;
pub mod leaf;
pub mod normalform;
pub mod period;

pub use error::{Error, Result};

//! Exact finite-level machinery for deformation towers of two-dimensional
//! representations over truncated Witt rings.

pub mod arith;
pub mod coeffring;
pub mod cohomology;
pub mod density;
pub mod exec;
pub mod galois_model;
pub mod lifting;
pub mod linalg;
pub mod matlin;

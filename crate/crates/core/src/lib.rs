//! Combinatorial core: finite-set functions, truncated functors, coend
//! tensors with length/minimal-expression normal forms, relational-structure
//! rigidity, pairing systems, and presheaf encodings over the naturals.

pub mod error;
pub mod finset;
pub mod formula;
pub mod functor;
pub mod presheaf;
pub mod rel;
pub mod tensor;

pub use error::{Error, Result};

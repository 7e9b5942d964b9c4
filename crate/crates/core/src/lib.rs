//! Exact lattice arithmetic for K3^[n]-type lattices, the degree and
//! Mukai-vector construction built on it, and certificates recording every
//! step together with an independent verifier.

pub mod certificate;
pub mod check;
pub mod construction;
pub mod dec;
pub mod error;
pub mod instance;
pub mod lattice;
pub mod matrix;
pub mod obstruction;

pub use check::{Check, Report};
pub use error::{Error, Result};

//! Bell-diagonal lattice states on C⁴ ⊗ C⁴: PPT classification, a positive
//! but not completely positive semigroup Γ_t, and bound-entanglement
//! detection and separability certificates for every lattice subset.

pub mod detection;
pub mod equivalence;
pub mod error;
pub mod linalg;
pub mod maps;
pub mod pauli;
pub mod ppt;
pub mod report;
pub mod separability;
pub mod states;

pub use error::{Error, Result};

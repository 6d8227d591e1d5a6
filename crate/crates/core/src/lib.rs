//! Gentile-statistics operator algebra on finite Fock spaces.
//!
//! The crate builds the q-deformed ladder operators of a statistics with
//! maximum occupation `n`, assembles the exchange generators, the
//! transposition class sum and the unitary-group generators and Casimirs
//! from them, checks the operator identities relating these objects, and
//! solves the all-pairs exchange model by exact diagonalization and by
//! Casimir eigenvalues over integer partitions.

pub mod basis;
pub mod engine;
pub mod error;
pub mod heisenberg;
pub mod reptheory;
pub mod scalars;
pub mod verify;

pub use basis::{FockBasis, ModeIndex, OccupationState, Subspace};
pub use engine::{ComplexOperator, Level, OperatorBuilder};
pub use error::{GentileError, Result};
pub use reptheory::{CasimirVariant, Partition};
pub use scalars::{bracket_nu, coupling_j, occ_f, occ_g, GentileOrder, BOSE_PROXY_N};

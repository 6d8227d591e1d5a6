//! Operator engine: sparse operators, Gentile ladders, composite generators
//! and the Hermitian eigensolver.

pub mod eigen;
pub mod generators;
pub mod ladder;
pub mod sparse;

pub use eigen::{eigensolve_hermitian, Level};
pub use generators::{restrict, OperatorBuilder, Restricted, Route};
pub use ladder::{embed, single_mode_ops, Ladder, SingleModeSet, Word};
pub use sparse::ComplexOperator;

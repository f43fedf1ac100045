//! Lattice Schwinger-model Hamiltonians, a Lanczos eigensolver and the
//! observables and effective theories built on them.

pub mod basis;
pub mod coulomb;
pub mod effective;
pub mod eigen;
pub mod error;
pub mod fit;
pub mod lattice;
pub mod models;
pub mod observables;
pub mod operator;
pub mod scan;
pub mod symmetry;

pub use basis::{Basis, Filling, Statistics};
pub use eigen::{dense_diag, lanczos_lowest, solve_lowest, SolverConfig, Spectrum};
pub use error::{Error, Result};
pub use lattice::{CouplingSet, GaugeRep, GaussConvention, LatticeSpec};
pub use operator::{LinearOperator, C64};

//! Trust-region subproblem solvers: GLTR and eigenvalue-based methods.
//!
//! The problem is `min gᵀs + ½ sᵀAs` subject to `‖s‖_B ≤ Δ` with sparse
//! symmetric `A` and SPD `B`.

pub mod dense;
pub mod eig;
pub mod error;
pub mod gen;
pub mod gltr;
pub mod mtx;
pub mod oracle;
pub mod problem;
pub mod sparse;
pub mod vecops;

pub use eig::{eig_trs_solve, EigReport, EigSolveResult, ShiftRule, StoppingConfig, Variant};
pub use error::{Error, Result};
pub use gltr::{gltr_solve, GltrOptions};
pub use problem::{PairOperator, Status, TrsProblem, TrsSolution};
pub use sparse::{BOperator, MvCounter, SparseSymMatrix};

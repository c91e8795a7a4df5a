//! Eigenvalue-based TRS solvers: implicitly restarted Arnoldi with exact
//! (IRA) or refined (IRRA) shifts on the pair `(M, B̃)`.

pub mod arnoldi;
pub mod extract;
pub mod recover;
pub mod restart;
pub mod shifts;
pub mod solver;

pub use arnoldi::{ArnoldiOutcome, ArnoldiState};
pub use extract::{assemble_vector, direct_residual, extract_refined, extract_ritz, RefinedPair, RitzPair};
pub use recover::{recover_solution, translate_tolerance, EigVector, Recovery};
pub use restart::implicit_restart;
pub use shifts::{select_shifts_exact, select_shifts_refined};
pub use solver::{eig_trs_solve, CycleRecord, EigReport, EigSolveResult, ShiftRule, StoppingConfig, Variant};

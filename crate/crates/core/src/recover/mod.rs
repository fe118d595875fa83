//! Low-rank plus jointly sparse recovery of the load matrix.
//!
//! Loads are written in the difference domain, `P = (K + Dᴾ)·U` and
//! `Q = Dᵠ·U`, where `U` is the running-sum operator. `K` carries the
//! spatially correlated PV and is penalized by its nuclear norm (or fixed to
//! `u·vᵀ` in rank-one mode); `(Dᴾ, Dᵠ)` carry appliance switching and are
//! penalized by the group L1 norm that couples each house-minute's active and
//! reactive change. Both measurement sets enter as entrywise error boxes.

pub mod admm;
pub mod difference;
pub mod problem;
pub mod prox;

pub use admm::{solve, solve_full, solve_rank_one};
pub use difference::DifferenceOperator;
pub use problem::{default_lambda, Diagnostics, RecoveryOptions, RecoveryProblem, RecoverySolution, SolverMode};
pub use prox::{group_l1_norm, nuclear_norm, project_box, prox_group_l1, prox_nuclear};

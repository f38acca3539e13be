//! Solvers for infinite-horizon discounted Markov decision processes.
//!
//! The crate implements the inexact policy iteration family over sparse
//! transition data: value iteration, exact policy iteration, modified policy
//! iteration and inexact policy iteration with Richardson or GMRES as the
//! inner policy-evaluation solver. Backups and inner kernels run on a
//! state-partitioned worker pool.
//!
//! ```
//! use ipi_core::{io::builtin, solve, Method, SolveOptions};
//!
//! let mdp = builtin::e1(0.9);
//! let res = solve(&mdp, &SolveOptions { tol: 1e-10, ..SolveOptions::new(Method::Ipi) }, None).unwrap();
//! assert_eq!(res.policy.0, vec![1, 0]);
//! assert!((res.value[0] - 2.0).abs() < 1e-9);
//! ```

pub mod error;
pub mod io;
pub mod mdp;
pub mod parallel;
pub mod solvers;
pub mod sparse;

pub use error::{Error, Result};
pub use mdp::{bellman_apply, bellman_residual, policy_system, policy_value_residual, Mdp, Policy, ValidationReport, ValueFunction, Violation};
pub use parallel::{make_partition, parallel_bellman, parallel_reduce, Partition, ReduceKind, Workers};
pub use solvers::{
    solve, solve_observed, value_iteration_step, InnerSolver, Method, SolveOptions, SolveResult, SolveStats,
};
pub use sparse::SparseMatrix;

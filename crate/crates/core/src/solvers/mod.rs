//! Outer solution methods and their inner policy-evaluation solvers.
//!
//! Every method runs the same outer loop. At iteration `k` the greedy policy
//! `π_k` and the Bellman residual `r_k = ‖TV_k − V_k‖_∞` come from one
//! backup; the loop stops once `r_k ≤ tol`, otherwise the next iterate is
//! produced by (approximately) evaluating `π_k` from the warm start `V_k`:
//!
//! | method | next iterate |
//! |--------|--------------|
//! | `vi`   | `TV_k` |
//! | `mpi`  | `mpi_steps` Richardson sweeps |
//! | `ipi`  | inner solve to relative residual `max(α·min(1, r_k), 1e-14)` |
//! | `pi`   | GMRES to relative residual `1e-14`; stops early on a repeated policy |
//!
//! `mpi` is exactly `ipi` with Richardson and a fixed sweep count.
//!
//! The returned value is one more backup of the last iterate, `TV_k`, and the
//! returned policy is greedy for it. That makes the reported bound
//! `γ/(1−γ)·r_k` a true bound on `‖V − V*‖_∞`.

pub mod gmres;
pub mod richardson;

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::error::{Error, Result};
use crate::mdp::{policy_system, Mdp, Policy, ValueFunction};
use crate::parallel::{parallel_bellman, Workers};

pub use gmres::{gmres_solve, FnOperator, GmresParams, LinearOperator, PolicyOperator};
pub use richardson::{richardson_solve, RichardsonStop};

/// Lower bound on the inner relative-residual target.
pub const TAU_FLOOR: f64 = 1e-14;
/// Relative residual used for "exact" policy evaluation in `pi`.
pub const EXACT_EVAL_TOL: f64 = 1e-14;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Vi,
    Pi,
    Mpi,
    Ipi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerSolver {
    Richardson,
    Gmres,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::Vi, Method::Pi, Method::Mpi, Method::Ipi];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Vi => "vi",
            Method::Pi => "pi",
            Method::Mpi => "mpi",
            Method::Ipi => "ipi",
        }
    }
}

impl InnerSolver {
    pub fn as_str(self) -> &'static str {
        match self {
            InnerSolver::Richardson => "richardson",
            InnerSolver::Gmres => "gmres",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for InnerSolver {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidOptions(format!("unknown method {s:?} (expected vi, pi, mpi or ipi)")))
    }
}

impl FromStr for InnerSolver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "richardson" => Ok(InnerSolver::Richardson),
            "gmres" => Ok(InnerSolver::Gmres),
            _ => Err(Error::InvalidOptions(format!(
                "unknown inner solver {s:?} (expected richardson or gmres)"
            ))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub method: Method,
    pub inner: InnerSolver,
    /// Forcing factor mapping the outer residual to the inner tolerance.
    pub alpha: f64,
    /// Outer stopping tolerance on `‖TV − V‖_∞`.
    pub tol: f64,
    pub max_outer: usize,
    pub max_inner: usize,
    pub mpi_steps: usize,
    pub gmres_restart: usize,
    /// When set, `ipi` runs exactly this many inner steps per outer
    /// iteration instead of following the forcing rule.
    pub inner_steps: Option<usize>,
    pub workers: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            method: Method::Ipi,
            inner: InnerSolver::Gmres,
            alpha: 0.1,
            tol: 1e-8,
            max_outer: 10_000,
            max_inner: 1000,
            mpi_steps: 50,
            gmres_restart: 30,
            inner_steps: None,
            workers: default_workers(),
        }
    }
}

/// Available hardware parallelism, or 1 if it cannot be queried.
pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

impl SolveOptions {
    pub fn new(method: Method) -> Self {
        SolveOptions {
            method,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidOptions(msg));
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return fail(format!("tol must be positive, got {}", self.tol));
        }
        if !(0.0..1.0).contains(&self.alpha) {
            return fail(format!("alpha must lie in [0, 1), got {}", self.alpha));
        }
        for (name, v) in [
            ("max_outer", self.max_outer),
            ("max_inner", self.max_inner),
            ("mpi_steps", self.mpi_steps),
            ("gmres_restart", self.gmres_restart),
            ("workers", self.workers),
        ] {
            if v == 0 {
                return fail(format!("{name} must be at least 1"));
            }
        }
        if self.inner_steps == Some(0) {
            return fail("inner_steps must be at least 1".into());
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SolveStats {
    pub method: Method,
    pub inner: InnerSolver,
    pub outer_iterations: usize,
    pub inner_iterations_per_outer: Vec<usize>,
    /// `‖TV_k − V_k‖_∞` for `k = 0..=outer_iterations`.
    pub residual_history: Vec<f64>,
    pub wall_time: f64,
    pub converged: bool,
    pub suboptimality_bound: f64,
    pub workers: usize,
    /// Norm of the outer stopping test.
    pub outer_norm: &'static str,
    /// Norm of the inner relative-residual tests.
    pub inner_norm: &'static str,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolveResult {
    pub value: ValueFunction,
    pub policy: Policy,
    pub stats: SolveStats,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InnerSolution {
    pub x: Vec<f64>,
    pub iterations: usize,
}

#[derive(Debug, Error)]
pub enum InnerError {
    /// The iteration cap was hit; carries the last iterate.
    #[error("inner iteration cap reached after {} iterations", .0.iterations)]
    CapReached(InnerSolution),
    #[error(transparent)]
    Setup(#[from] Error),
}

/// State of the outer loop handed to a [`solve_observed`] observer.
#[derive(Debug)]
pub struct Iterate<'a> {
    pub k: usize,
    pub value: &'a [f64],
    pub policy: &'a Policy,
    pub residual: f64,
}

/// One value-iteration step: `(TV, greedy policy, ‖TV − V‖_∞)`.
pub fn value_iteration_step(mdp: &Mdp, v: &[f64]) -> Result<(ValueFunction, Policy, f64)> {
    let (tv, pi) = crate::mdp::bellman_apply(mdp, v)?;
    let r = tv.iter().zip(v).fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()));
    Ok((tv, pi, r))
}

/// Solves `mdp` from `v0` (zero when `None`).
///
/// Returns [`Error::NotConverged`] with the partial result when `max_outer`
/// is reached.
pub fn solve(mdp: &Mdp, opts: &SolveOptions, v0: Option<&[f64]>) -> Result<SolveResult> {
    solve_observed(mdp, opts, v0, |_| {})
}

/// [`solve`], calling `observer` once per outer iteration with `V_k`, `π_k`
/// and `r_k`.
pub fn solve_observed<F>(mdp: &Mdp, opts: &SolveOptions, v0: Option<&[f64]>, mut observer: F) -> Result<SolveResult>
where
    F: FnMut(&Iterate<'_>),
{
    mdp.validate().map_err(Error::Validation)?;
    opts.validate()?;
    let n = mdp.n_states();
    let mut v = match v0 {
        Some(v0) => {
            mdp.check_values(v0)?;
            v0.to_vec()
        }
        None => vec![0.0; n],
    };
    let workers = Workers::new(n, opts.workers)?;
    let start = Instant::now();
    let gamma = mdp.gamma();

    let mut residual_history = Vec::new();
    let mut inner_iterations = Vec::new();
    let mut previous: Option<Policy> = None;
    let mut outer = 0;

    let (tv, converged) = loop {
        let (tv, pi) = parallel_bellman(mdp, &v, &workers)?;
        let r = workers.max_abs_diff(&tv, &v);
        residual_history.push(r);
        observer(&Iterate {
            k: outer,
            value: &v,
            policy: &pi,
            residual: r,
        });
        if r <= opts.tol {
            break (tv, true);
        }
        if opts.method == Method::Pi && previous.as_ref() == Some(&pi) {
            break (tv, false);
        }
        if outer == opts.max_outer {
            break (tv, false);
        }

        let (next, steps) = if gamma == 0.0 || opts.method == Method::Vi {
            // with γ = 0 one backup is already exact
            (tv, 0)
        } else {
            evaluate(mdp, opts, &workers, &pi, &v, r)?
        };
        v = next;
        inner_iterations.push(steps);
        previous = Some(pi);
        outer += 1;
    };

    let (value, policy) = parallel_bellman(mdp, &tv, &workers)?;
    let last = *residual_history.last().expect("at least one backup");
    let stats = SolveStats {
        method: opts.method,
        inner: opts.inner,
        outer_iterations: outer,
        inner_iterations_per_outer: inner_iterations,
        residual_history,
        wall_time: start.elapsed().as_secs_f64(),
        converged,
        suboptimality_bound: gamma / (1.0 - gamma) * last,
        workers: workers.count(),
        outer_norm: "inf",
        inner_norm: "l2",
    };
    let result = SolveResult { value, policy, stats };
    if converged {
        Ok(result)
    } else {
        Err(Error::NotConverged(Box::new(result)))
    }
}

/// Approximate evaluation of `pi` warm-started at `v`; returns the new
/// iterate and the inner iteration count. Hitting the inner cap is not an
/// error here: the last inner iterate is used.
fn evaluate(
    mdp: &Mdp,
    opts: &SolveOptions,
    workers: &Workers,
    pi: &Policy,
    v: &[f64],
    residual: f64,
) -> Result<(Vec<f64>, usize)> {
    let (p_pi, g_pi) = policy_system(mdp, pi)?;
    let gamma = mdp.gamma();
    let forcing = (opts.alpha * residual.min(1.0)).max(TAU_FLOOR);

    let (inner, fixed) = match opts.method {
        Method::Mpi => (InnerSolver::Richardson, Some(opts.mpi_steps)),
        Method::Pi => (InnerSolver::Gmres, None),
        _ => (opts.inner, opts.inner_steps),
    };
    let tau = if opts.method == Method::Pi { EXACT_EVAL_TOL } else { forcing };

    let outcome = match inner {
        InnerSolver::Richardson => {
            let stop = match fixed {
                Some(k) => RichardsonStop::FixedSteps(k),
                None => RichardsonStop::RelResidual(tau),
            };
            richardson_solve(workers, &p_pi, &g_pi, gamma, v, stop, opts.max_inner.max(fixed.unwrap_or(0)))
        }
        InnerSolver::Gmres => {
            let op = PolicyOperator::new(&p_pi, gamma, workers);
            let params = match fixed {
                Some(k) => GmresParams {
                    tol: 0.0,
                    restart: opts.gmres_restart,
                    max_iters: k,
                },
                None => GmresParams {
                    tol: tau,
                    restart: opts.gmres_restart,
                    max_iters: opts.max_inner,
                },
            };
            gmres_solve(&op, workers, &g_pi, v, params)
        }
    };
    match outcome {
        Ok(sol) | Err(InnerError::CapReached(sol)) => Ok((sol.x, sol.iterations)),
        Err(InnerError::Setup(e)) => Err(e),
    }
}

//! Discounted MDP model and Bellman operators.
//!
//! Costs are minimized. State `s` owns the `m` consecutive transition rows
//! `s*m .. s*m + m`, one per action, and the matching `m` entries of the
//! row-major cost table.

use std::fmt;
use std::ops::{Deref, Range};

use crate::error::{Error, Result};
use crate::parallel::Workers;
use crate::sparse::SparseMatrix;

/// Maximum deviation of a transition row sum from 1.
pub const ROW_SUM_TOLERANCE: f64 = 1e-8;

/// Value vector, one entry per state.
pub type ValueFunction = Vec<f64>;

/// Deterministic policy: one action index per state.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Policy(pub Vec<usize>);

impl Deref for Policy {
    type Target = [usize];

    fn deref(&self) -> &[usize] {
        &self.0
    }
}

impl From<Vec<usize>> for Policy {
    fn from(actions: Vec<usize>) -> Self {
        Policy(actions)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Mdp {
    n: usize,
    m: usize,
    gamma: f64,
    transitions: SparseMatrix,
    costs: Vec<f64>,
}

impl Mdp {
    /// Builds and validates an MDP.
    ///
    /// `transitions` has `n*m` rows and `n` columns; `costs` is the row-major
    /// `n × m` stage-cost table.
    pub fn new(n: usize, m: usize, gamma: f64, transitions: SparseMatrix, costs: Vec<f64>) -> Result<Self> {
        let mdp = Self::new_unchecked(n, m, gamma, transitions, costs);
        mdp.validate().map_err(Error::Validation)?;
        Ok(mdp)
    }

    /// Builds an MDP without validating it. Solvers reject it later if it is
    /// invalid.
    pub fn new_unchecked(n: usize, m: usize, gamma: f64, transitions: SparseMatrix, costs: Vec<f64>) -> Self {
        Mdp {
            n,
            m,
            gamma,
            transitions,
            costs,
        }
    }

    pub fn n_states(&self) -> usize {
        self.n
    }

    pub fn n_actions(&self) -> usize {
        self.m
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn transitions(&self) -> &SparseMatrix {
        &self.transitions
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn cost(&self, state: usize, action: usize) -> f64 {
        self.costs[state * self.m + action]
    }

    /// Replaces the discount factor and revalidates.
    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = gamma;
        self.validate().map_err(Error::Validation)?;
        Ok(self)
    }

    pub fn into_parts(self) -> (usize, usize, f64, SparseMatrix, Vec<f64>) {
        (self.n, self.m, self.gamma, self.transitions, self.costs)
    }

    /// Checks every model invariant and reports all violations found.
    pub fn validate(&self) -> Result<(), ValidationReport> {
        let mut issues = Vec::new();
        if !(0.0..1.0).contains(&self.gamma) {
            issues.push(Violation::DiscountOutOfRange(self.gamma));
        }
        if self.n == 0 {
            issues.push(Violation::NoStates);
        }
        if self.m == 0 {
            issues.push(Violation::NoActions);
        }
        let rows = self.n * self.m;
        let p = &self.transitions;
        let mut shapes_ok = true;
        for (what, expected, found) in [
            ("transition rows", rows, p.n_rows()),
            ("transition columns", self.n, p.n_cols()),
            ("cost entries", rows, self.costs.len()),
        ] {
            if expected != found {
                shapes_ok = false;
                issues.push(Violation::Shape { what, expected, found });
            }
        }
        if shapes_ok {
            for row in 0..rows {
                let (cols, vals) = p.row(row);
                let mut sum = 0.0;
                for (&c, &v) in cols.iter().zip(vals) {
                    if !(v >= 0.0) {
                        issues.push(Violation::NegativeEntry {
                            row,
                            col: c as usize,
                            value: v,
                        });
                    }
                    sum += v;
                }
                if !((sum - 1.0).abs() <= ROW_SUM_TOLERANCE) {
                    issues.push(Violation::RowSum { row, sum });
                }
            }
            for (i, c) in self.costs.iter().enumerate() {
                if !c.is_finite() {
                    issues.push(Violation::NonFiniteCost {
                        state: i / self.m,
                        action: i % self.m,
                        value: *c,
                    });
                }
            }
        }
        if issues.is_empty() {
            Ok(())
        } else {
            Err(ValidationReport { issues })
        }
    }

    pub(crate) fn check_values(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: v.len(),
            });
        }
        Ok(())
    }

    pub(crate) fn check_policy(&self, pi: &[usize]) -> Result<()> {
        if pi.len() != self.n {
            return Err(Error::DimensionMismatch {
                expected: self.n,
                found: pi.len(),
            });
        }
        if let Some(&a) = pi.iter().find(|&&a| a >= self.m) {
            return Err(Error::IndexOutOfRange {
                what: "action",
                index: a,
                bound: self.m,
            });
        }
        Ok(())
    }

    /// `g(s,a) + γ·Σ_s' P(s'|s,a)·v(s')`.
    #[inline]
    pub fn q_value(&self, state: usize, action: usize, v: &[f64]) -> f64 {
        let row = state * self.m + action;
        self.costs[row] + self.gamma * self.transitions.row_dot(row, v)
    }

    /// Backs up the states in `block`, writing values and greedy actions into
    /// the block-local output slices.
    pub(crate) fn backup_block(&self, block: Range<usize>, v: &[f64], out_v: &mut [f64], out_pi: &mut [usize]) {
        for ((s, tv), act) in block.zip(out_v).zip(out_pi) {
            let mut best = self.q_value(s, 0, v);
            let mut best_a = 0;
            for a in 1..self.m {
                let q = self.q_value(s, a, v);
                // strict: ties keep the smallest action index
                if q < best {
                    best = q;
                    best_a = a;
                }
            }
            *tv = best;
            *act = best_a;
        }
    }
}

/// Bellman optimality backup `TV` together with the greedy policy.
/// Ties go to the smallest action index.
pub fn bellman_apply(mdp: &Mdp, v: &[f64]) -> Result<(ValueFunction, Policy)> {
    crate::parallel::parallel_bellman(mdp, v, &Workers::serial(mdp.n_states()))
}

/// `‖TV − V‖_∞`.
pub fn bellman_residual(mdp: &Mdp, v: &[f64]) -> Result<f64> {
    let (tv, _) = bellman_apply(mdp, v)?;
    Ok(tv.iter().zip(v).fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs())))
}

/// Transition matrix and cost vector restricted to the actions of `pi`.
pub fn policy_system(mdp: &Mdp, pi: &[usize]) -> Result<(SparseMatrix, Vec<f64>)> {
    mdp.check_policy(pi)?;
    let m = mdp.n_actions();
    let rows: Vec<usize> = pi.iter().enumerate().map(|(s, &a)| s * m + a).collect();
    let p_pi = mdp.transitions().extract_rows(&rows)?;
    let g_pi = rows.iter().map(|&r| mdp.costs()[r]).collect();
    Ok((p_pi, g_pi))
}

/// Euclidean norm of `g_π − (I − γP_π)v`.
pub fn policy_value_residual(mdp: &Mdp, pi: &[usize], v: &[f64]) -> Result<f64> {
    mdp.check_values(v)?;
    let (p_pi, g_pi) = policy_system(mdp, pi)?;
    let pv = p_pi.matvec(v)?;
    let gamma = mdp.gamma();
    let sq: f64 = (0..v.len())
        .map(|s| {
            let r = g_pi[s] - (v[s] - gamma * pv[s]);
            r * r
        })
        .sum();
    Ok(sq.sqrt())
}

#[derive(Clone, Debug, PartialEq)]
pub enum Violation {
    DiscountOutOfRange(f64),
    NoStates,
    NoActions,
    Shape {
        what: &'static str,
        expected: usize,
        found: usize,
    },
    RowSum {
        row: usize,
        sum: f64,
    },
    NegativeEntry {
        row: usize,
        col: usize,
        value: f64,
    },
    NonFiniteCost {
        state: usize,
        action: usize,
        value: f64,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DiscountOutOfRange(g) => write!(f, "discount {g} out of range [0, 1)"),
            Violation::NoStates => write!(f, "state count must be at least 1"),
            Violation::NoActions => write!(f, "action count must be at least 1"),
            Violation::Shape { what, expected, found } => {
                write!(f, "{what}: expected {expected}, found {found}")
            }
            Violation::RowSum { row, sum } => write!(f, "row {row}: row sum {sum}"),
            Violation::NegativeEntry { row, col, value } => {
                write!(f, "row {row}: negative entry {value} at column {col}")
            }
            Violation::NonFiniteCost { state, action, value } => {
                write!(f, "cost of state {state}, action {action} is {value}")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub issues: Vec<Violation>,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, issue) in self.issues.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  {issue}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ValidationReport {}

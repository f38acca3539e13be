//! Richardson sweeps `v ← g_π + γ·P_π·v` for the policy-evaluation system.

use crate::error::Error;
use crate::parallel::Workers;
use crate::sparse::SparseMatrix;

use super::{InnerError, InnerSolution};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RichardsonStop {
    /// Exactly this many sweeps.
    FixedSteps(usize),
    /// First iterate whose Euclidean residual is at most this fraction of
    /// the initial one.
    RelResidual(f64),
}

/// Runs Richardson iteration on `(I − γP_π)v = g_π` from `v0`.
///
/// The residual of `v` is `sweep(v) − v`, so every residual check also
/// produces the next iterate. Residual norms are summed sequentially in state
/// order, which keeps the stopping decision independent of the worker count.
pub fn richardson_solve(
    workers: &Workers,
    p_pi: &SparseMatrix,
    g_pi: &[f64],
    gamma: f64,
    v0: &[f64],
    stop: RichardsonStop,
    cap: usize,
) -> Result<InnerSolution, InnerError> {
    let n = g_pi.len();
    for found in [p_pi.n_rows(), p_pi.n_cols(), v0.len(), workers.partition().n()] {
        if found != n {
            return Err(Error::DimensionMismatch { expected: n, found }.into());
        }
    }
    let sweep = |v: &[f64], out: &mut [f64]| {
        workers.run(out, |_, block, seg| {
            for (y, s) in seg.iter_mut().zip(block) {
                *y = g_pi[s] + gamma * p_pi.row_dot(s, v);
            }
        });
    };

    let mut v = v0.to_vec();
    let mut next = vec![0.0; n];
    match stop {
        RichardsonStop::FixedSteps(k) => {
            let steps = k.min(cap);
            for _ in 0..steps {
                sweep(&v, &mut next);
                std::mem::swap(&mut v, &mut next);
            }
            let sol = InnerSolution { x: v, iterations: steps };
            if k > cap {
                Err(InnerError::CapReached(sol))
            } else {
                Ok(sol)
            }
        }
        RichardsonStop::RelResidual(tau) => {
            let mut initial = None;
            let mut iterations = 0;
            loop {
                sweep(&v, &mut next);
                let res = diff_norm2(&next, &v);
                let r0 = *initial.get_or_insert(res);
                if res <= tau * r0 {
                    return Ok(InnerSolution { x: v, iterations });
                }
                if iterations == cap {
                    return Err(InnerError::CapReached(InnerSolution { x: v, iterations }));
                }
                std::mem::swap(&mut v, &mut next);
                iterations += 1;
            }
        }
    }
}

fn diff_norm2(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b) {
        let d = x - y;
        acc += d * d;
    }
    acc.sqrt()
}

//! Restarted GMRES with modified Gram–Schmidt Arnoldi and Givens rotations.

use crate::error::Error;
use crate::parallel::Workers;
use crate::sparse::SparseMatrix;

use super::{InnerError, InnerSolution};

/// Subdiagonal entries below this multiple of `‖b‖` count as a happy
/// breakdown: the Krylov space contains the exact solution.
pub const BREAKDOWN_RTOL: f64 = 1e-14;

pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;

    /// `y = A·x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// `v ↦ (I − γP_π)v`, evaluated by the workers row by row.
pub struct PolicyOperator<'a> {
    p_pi: &'a SparseMatrix,
    gamma: f64,
    workers: &'a Workers,
}

impl<'a> PolicyOperator<'a> {
    pub fn new(p_pi: &'a SparseMatrix, gamma: f64, workers: &'a Workers) -> Self {
        PolicyOperator { p_pi, gamma, workers }
    }
}

impl LinearOperator for PolicyOperator<'_> {
    fn dim(&self) -> usize {
        self.p_pi.n_rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let (p, gamma) = (self.p_pi, self.gamma);
        self.workers.run(y, |_, block, seg| {
            for (out, s) in seg.iter_mut().zip(block) {
                *out = x[s] - gamma * p.row_dot(s, x);
            }
        });
    }
}

/// Operator backed by a closure.
pub struct FnOperator<F> {
    dim: usize,
    f: F,
}

impl<F> FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    pub fn new(dim: usize, f: F) -> Self {
        FnOperator { dim, f }
    }
}

impl<F> LinearOperator for FnOperator<F>
where
    F: Fn(&[f64], &mut [f64]) + Sync,
{
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (self.f)(x, y)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GmresParams {
    /// Relative residual target `‖b − A·x‖ ≤ tol·‖b − A·x0‖`.
    pub tol: f64,
    pub restart: usize,
    /// Cap on the total number of Arnoldi steps.
    pub max_iters: usize,
}

/// Solves `A·x = b` from `x0`. Inner products are reduced by `workers`.
///
/// `iterations` counts Arnoldi steps over all restart cycles. The stopping
/// test inside a cycle uses the Givens residual estimate; the true residual
/// is recomputed at the end of every cycle and decides convergence.
pub fn gmres_solve<A: LinearOperator + ?Sized>(
    op: &A,
    workers: &Workers,
    b: &[f64],
    x0: &[f64],
    params: GmresParams,
) -> Result<InnerSolution, InnerError> {
    let n = op.dim();
    for found in [b.len(), x0.len(), workers.partition().n()] {
        if found != n {
            return Err(Error::DimensionMismatch { expected: n, found }.into());
        }
    }
    if params.restart == 0 {
        return Err(Error::InvalidOptions("GMRES restart length must be at least 1".into()).into());
    }
    let m = params.restart;

    let mut x = x0.to_vec();
    let mut r = vec![0.0; n];
    let mut w = vec![0.0; n];
    residual(op, b, &x, &mut r, &mut w);
    let mut beta = workers.norm2(&r);
    let target = params.tol * beta;
    if beta == 0.0 {
        return Ok(InnerSolution { x, iterations: 0 });
    }
    let breakdown_tol = BREAKDOWN_RTOL * workers.norm2(b);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    // column-major (m+1) × m Hessenberg matrix
    let mut h = vec![0.0; (m + 1) * m];
    let hix = |i: usize, j: usize| j * (m + 1) + i;
    let mut cs = vec![0.0; m];
    let mut sn = vec![0.0; m];
    let mut g = vec![0.0; m + 1];
    let mut total = 0;

    loop {
        if basis.is_empty() {
            basis.push(vec![0.0; n]);
        }
        for (q, ri) in basis[0].iter_mut().zip(&r) {
            *q = ri / beta;
        }
        g.iter_mut().for_each(|gi| *gi = 0.0);
        g[0] = beta;

        let mut k = 0;
        let mut breakdown = false;
        while k < m && total < params.max_iters {
            op.apply(&basis[k], &mut w);
            total += 1;
            for i in 0..=k {
                let hik = workers.dot(&w, &basis[i]);
                h[hix(i, k)] = hik;
                for (wj, qj) in w.iter_mut().zip(&basis[i]) {
                    *wj -= hik * qj;
                }
            }
            let sub = workers.norm2(&w);

            for i in 0..k {
                let (a, c) = (h[hix(i, k)], h[hix(i + 1, k)]);
                h[hix(i, k)] = cs[i] * a + sn[i] * c;
                h[hix(i + 1, k)] = -sn[i] * a + cs[i] * c;
            }
            let (c, s) = givens(h[hix(k, k)], sub);
            cs[k] = c;
            sn[k] = s;
            h[hix(k, k)] = c * h[hix(k, k)] + s * sub;
            h[hix(k + 1, k)] = 0.0;
            g[k + 1] = -s * g[k];
            g[k] *= c;
            k += 1;

            if sub <= breakdown_tol {
                breakdown = true;
                break;
            }
            if basis.len() <= k {
                basis.push(vec![0.0; n]);
            }
            for (q, wj) in basis[k].iter_mut().zip(&w) {
                *q = wj / sub;
            }
            if g[k].abs() <= target {
                break;
            }
        }

        // back substitution on the rotated k × k triangle
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut acc = g[i];
            for j in i + 1..k {
                acc -= h[hix(i, j)] * y[j];
            }
            let d = h[hix(i, i)];
            y[i] = if d != 0.0 { acc / d } else { 0.0 };
        }
        for (yi, q) in y.iter().zip(&basis) {
            for (xj, qj) in x.iter_mut().zip(q) {
                *xj += yi * qj;
            }
        }

        residual(op, b, &x, &mut r, &mut w);
        beta = workers.norm2(&r);
        if beta <= target || breakdown {
            return Ok(InnerSolution { x, iterations: total });
        }
        if total >= params.max_iters {
            return Err(InnerError::CapReached(InnerSolution { x, iterations: total }));
        }
    }
}

/// `r = b − A·x`, using `tmp` as scratch.
fn residual<A: LinearOperator + ?Sized>(op: &A, b: &[f64], x: &[f64], r: &mut [f64], tmp: &mut [f64]) {
    op.apply(x, tmp);
    for ((ri, bi), ai) in r.iter_mut().zip(b).zip(tmp.iter()) {
        *ri = bi - ai;
    }
}

/// Rotation `(c, s)` with `-s·a + c·b = 0`.
fn givens(a: f64, b: f64) -> (f64, f64) {
    if b == 0.0 {
        (1.0, 0.0)
    } else if b.abs() > a.abs() {
        let t = a / b;
        let s = 1.0 / (1.0 + t * t).sqrt();
        (t * s, s)
    } else {
        let t = b / a;
        let c = 1.0 / (1.0 + t * t).sqrt();
        (c, t * c)
    }
}

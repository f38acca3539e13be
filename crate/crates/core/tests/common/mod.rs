//! Random instances and dense oracles shared by the integration tests.
//!
//! The oracles use nalgebra's dense LU and never touch the sparse kernels or
//! solvers under test.

#![allow(dead_code)]

use ipi_core::{Mdp, SparseMatrix};
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub use rand::SeedableRng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random probability row over `n` columns with up to `max_succ` successors.
pub fn random_row(rng: &mut ChaCha8Rng, n: usize, max_succ: usize) -> Vec<(usize, f64)> {
    let k = rng.gen_range(1..=max_succ.min(n));
    let mut cols: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.gen_range(i..n);
        cols.swap(i, j);
    }
    let weights: Vec<f64> = (0..k).map(|_| rng.gen_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    cols[..k].iter().zip(weights).map(|(&c, w)| (c, w / total)).collect()
}

/// Random valid MDP with costs uniform in `[0, 10)`.
pub fn random_mdp(rng: &mut ChaCha8Rng, n: usize, m: usize, gamma: f64, max_succ: usize) -> Mdp {
    let mut trips = Vec::new();
    for row in 0..n * m {
        for (c, v) in random_row(rng, n, max_succ) {
            trips.push((row, c, v));
        }
    }
    let p = SparseMatrix::from_triplets(n * m, n, trips).unwrap();
    let costs = (0..n * m).map(|_| rng.gen_range(0.0..10.0)).collect();
    Mdp::new(n, m, gamma, p, costs).unwrap()
}

/// Random row-stochastic `n × n` matrix with the given density.
pub fn random_stochastic(rng: &mut ChaCha8Rng, n: usize, density: f64) -> SparseMatrix {
    let per_row = ((density * n as f64).round() as usize).max(1);
    let mut trips = Vec::new();
    for row in 0..n {
        for (c, v) in random_row(rng, n, per_row) {
            trips.push((row, c, v));
        }
    }
    SparseMatrix::from_triplets(n, n, trips).unwrap()
}

pub fn dense(a: &SparseMatrix) -> DMatrix<f64> {
    let mut d = DMatrix::zeros(a.n_rows(), a.n_cols());
    for (i, j, v) in a.triplets() {
        d[(i, j)] += v;
    }
    d
}

/// Solves `(I − γP)x = b` with dense LU.
pub fn dense_policy_solve(p: &SparseMatrix, b: &[f64], gamma: f64) -> Vec<f64> {
    let n = p.n_rows();
    let a = DMatrix::identity(n, n) - dense(p) * gamma;
    let x = a.lu().solve(&DVector::from_column_slice(b)).expect("nonsingular");
    x.iter().copied().collect()
}

/// Dense policy-restricted transition rows and costs, assembled directly
/// from the stored transition triplets.
pub fn dense_policy(mdp: &Mdp, pi: &[usize]) -> (DMatrix<f64>, Vec<f64>) {
    let (n, m) = (mdp.n_states(), mdp.n_actions());
    let full = dense(mdp.transitions());
    let mut p = DMatrix::zeros(n, n);
    let mut g = vec![0.0; n];
    for s in 0..n {
        let row = s * m + pi[s];
        for j in 0..n {
            p[(s, j)] = full[(row, j)];
        }
        g[s] = mdp.costs()[row];
    }
    (p, g)
}

pub fn evaluate_policy(mdp: &Mdp, pi: &[usize]) -> Vec<f64> {
    let n = mdp.n_states();
    let (p, g) = dense_policy(mdp, pi);
    let a = DMatrix::identity(n, n) - p * mdp.gamma();
    let x = a.lu().solve(&DVector::from_vec(g)).expect("nonsingular");
    x.iter().copied().collect()
}

pub struct Enumeration {
    /// Optimal value, the elementwise minimum over all policies.
    pub value: Vec<f64>,
    pub policies: usize,
}

/// Evaluates all `m^n` deterministic policies.
pub fn enumerate_optimum(mdp: &Mdp) -> Enumeration {
    let (n, m) = (mdp.n_states(), mdp.n_actions());
    let mut best = vec![f64::INFINITY; n];
    let mut pi = vec![0usize; n];
    let mut count = 0;
    loop {
        let v = evaluate_policy(mdp, &pi);
        for (b, x) in best.iter_mut().zip(&v) {
            *b = b.min(*x);
        }
        count += 1;
        // odometer increment
        let mut i = 0;
        while i < n {
            pi[i] += 1;
            if pi[i] < m {
                break;
            }
            pi[i] = 0;
            i += 1;
        }
        if i == n {
            break;
        }
    }
    Enumeration { value: best, policies: count }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| f64::max(m, (x - y).abs()))
}

pub fn norm_inf(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, x| f64::max(m, x.abs()))
}

/// Smallest gap between the best and second-best one-step lookahead over
/// all states (infinite when `m = 1`).
pub fn min_action_gap(mdp: &Mdp, v: &[f64]) -> f64 {
    let m = mdp.n_actions();
    let mut gap = f64::INFINITY;
    for s in 0..mdp.n_states() {
        let mut q: Vec<f64> = (0..m).map(|a| mdp.q_value(s, a, v)).collect();
        q.sort_by(f64::total_cmp);
        if m > 1 {
            gap = gap.min(q[1] - q[0]);
        }
    }
    gap
}

pub fn bits(v: &[f64]) -> Vec<u64> {
    v.iter().map(|x| x.to_bits()).collect()
}

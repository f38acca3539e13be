//! Built-in models: the two-state example and the random-walk chain.

use std::convert::Infallible;

use crate::error::Result;
use crate::mdp::Mdp;
use crate::parallel::Workers;
use crate::sparse::SparseMatrix;

/// Two states, two actions. Action 0 stays put, action 1 switches state.
/// Costs are `[[1, 2], [0, 0]]`. The optimal value is `(2, 0)` with policy
/// `(1, 0)` for any `gamma` in `(0, 1)` large enough that switching beats
/// staying in state 0.
///
/// The model is not validated, so out-of-range `gamma` is representable.
pub fn e1(gamma: f64) -> Mdp {
    let p = SparseMatrix::from_triplets(4, 2, [(0, 0, 1.0), (1, 1, 1.0), (2, 1, 1.0), (3, 0, 1.0)])
        .expect("indices in range");
    Mdp::new_unchecked(2, 2, gamma, p, vec![1.0, 2.0, 0.0, 0.0])
}

/// Probability of stepping left under `action` in an `m`-action chain.
/// Action 0 is the unbiased walk; higher actions push towards state 0.
pub fn chain_left_prob(m: usize, action: usize) -> f64 {
    if m <= 1 {
        0.5
    } else {
        0.5 + 0.4 * action as f64 / (m - 1) as f64
    }
}

/// Successor distribution of the reflecting random walk on `0..n`.
pub fn chain_transitions(n: usize, m: usize, state: usize, action: usize) -> Vec<(usize, f64)> {
    let left = chain_left_prob(m, action);
    let prev = state.saturating_sub(1);
    let next = (state + 1).min(n.saturating_sub(1));
    vec![(prev, left), (next, 1.0 - left)]
}

/// Distance from state 0 plus an effort cost of 0.5 per action index.
pub fn chain_cost(state: usize, action: usize) -> f64 {
    state as f64 + 0.5 * action as f64
}

/// Reflecting random walk on `n` states with `m` actions, built on a
/// single worker.
pub fn chain(n: usize, m: usize, gamma: f64) -> Result<Mdp> {
    chain_with(n, m, gamma, &Workers::serial(n))
}

/// [`chain`] built by the given workers.
pub fn chain_with(n: usize, m: usize, gamma: f64, workers: &Workers) -> Result<Mdp> {
    super::build_from_generator(
        n,
        m,
        gamma,
        |s, a| Ok::<_, Infallible>(chain_transitions(n, m, s, a)),
        |s, a| Ok(chain_cost(s, a)),
        workers,
    )
}

#[cfg(test)]
pub(crate) fn encode(mdp: &Mdp) -> Vec<u8> {
    super::encode_mdp(mdp)
}

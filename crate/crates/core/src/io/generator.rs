//! Building an MDP from transition and cost callbacks.

use std::fmt::Display;

use crate::error::{Error, Result};
use crate::mdp::Mdp;
use crate::parallel::Workers;
use crate::sparse::{canonicalize_row, Index, SparseMatrix};

struct Block {
    row_lens: Vec<usize>,
    cols: Vec<Index>,
    vals: Vec<f64>,
    costs: Vec<f64>,
}

/// Assembles an MDP by querying `transition_fn(s, a)` and `cost_fn(s, a)`.
///
/// Each worker queries only the states it owns; the per-worker pieces are
/// concatenated in worker order, so the result is bitwise independent of
/// the worker count. Rows are canonicalized the same way as
/// [`SparseMatrix::from_triplets`]. Callback failures and out-of-range
/// successor states are reported with their `(s, a)`; the first failing
/// worker in order wins.
pub fn build_from_generator<T, C, E>(
    n: usize,
    m: usize,
    gamma: f64,
    transition_fn: T,
    cost_fn: C,
    workers: &Workers,
) -> Result<Mdp>
where
    T: Fn(usize, usize) -> std::result::Result<Vec<(usize, f64)>, E> + Sync,
    C: Fn(usize, usize) -> std::result::Result<f64, E> + Sync,
    E: Display,
{
    if workers.partition().n() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: workers.partition().n(),
        });
    }
    let callback = |state, action, e: &dyn Display| Error::Callback {
        state,
        action,
        message: e.to_string(),
    };

    let blocks = workers.collect_blocks(|states| -> Result<Block> {
        let mut block = Block {
            row_lens: Vec::with_capacity(states.len() * m),
            cols: Vec::new(),
            vals: Vec::new(),
            costs: Vec::with_capacity(states.len() * m),
        };
        let mut row = Vec::new();
        for s in states {
            for a in 0..m {
                row.clear();
                row.extend(transition_fn(s, a).map_err(|e| callback(s, a, &e))?);
                if let Some(&(bad, _)) = row.iter().find(|&&(next, _)| next >= n) {
                    let msg = format!("successor state {bad} out of range (n = {n})");
                    return Err(callback(s, a, &msg));
                }
                canonicalize_row(&mut row);
                block.row_lens.push(row.len());
                for &(c, v) in &row {
                    block.cols.push(c as Index);
                    block.vals.push(v);
                }
                block.costs.push(cost_fn(s, a).map_err(|e| callback(s, a, &e))?);
            }
        }
        Ok(block)
    });

    let mut row_ptr = Vec::with_capacity(n * m + 1);
    row_ptr.push(0 as Index);
    let (mut col_idx, mut vals, mut costs) = (Vec::new(), Vec::new(), Vec::with_capacity(n * m));
    for block in blocks {
        let block = block?;
        for len in block.row_lens {
            let last = *row_ptr.last().expect("nonempty");
            row_ptr.push(last + len as Index);
        }
        col_idx.extend(block.cols);
        vals.extend(block.vals);
        costs.extend(block.costs);
    }
    let p = SparseMatrix::from_csr(n * m, n, row_ptr, col_idx, vals)?;
    Mdp::new(n, m, gamma, p, costs)
}

//! State-partitioned execution over a fixed set of workers.
//!
//! States are split into contiguous blocks, one per worker, and a worker
//! owns every action row of its states. A round runs one closure per block;
//! each closure writes only its owned output segment and reads the full,
//! replicated input vectors. The join at the end of [`Workers::run`] is the
//! exchange point: afterwards every worker sees the whole updated vector.
//!
//! Row-local kernels are bitwise independent of the worker count. Dot
//! products are not: partial sums are combined in ascending worker order, so
//! they are reproducible for a fixed worker count only.

use std::ops::Range;

use rayon::{ThreadPool, ThreadPoolBuilder};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::mdp::{Mdp, Policy, ValueFunction};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Partition {
    n: usize,
    bounds: Vec<usize>,
}

impl Partition {
    /// Balanced contiguous blocks: the first `n mod w` workers get
    /// `ceil(n / w)` states, the rest `floor(n / w)`.
    pub fn new(n: usize, w: usize) -> Result<Self> {
        if w == 0 {
            return Err(Error::InvalidWorkerCount);
        }
        let (base, extra) = (n / w, n % w);
        let mut bounds = Vec::with_capacity(w + 1);
        bounds.push(0);
        for i in 0..w {
            let size = base + usize::from(i < extra);
            bounds.push(bounds[i] + size);
        }
        Ok(Partition { n, bounds })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn workers(&self) -> usize {
        self.bounds.len() - 1
    }

    pub fn bounds(&self) -> &[usize] {
        &self.bounds
    }

    /// States owned by worker `i`.
    pub fn block(&self, i: usize) -> Range<usize> {
        self.bounds[i]..self.bounds[i + 1]
    }

    pub fn blocks(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.bounds.windows(2).map(|b| b[0]..b[1])
    }
}

/// Same as [`Partition::new`].
pub fn make_partition(n: usize, w: usize) -> Result<Partition> {
    Partition::new(n, w)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReduceKind {
    MaxAbs,
    Dot,
}

/// Combines one contribution per worker.
///
/// `MaxAbs` returns the largest magnitude, exact in any order. `Dot` sums
/// the partial sums in ascending worker order.
pub fn parallel_reduce(kind: ReduceKind, partition: &Partition, contributions: &[f64]) -> Result<f64> {
    if contributions.len() != partition.workers() {
        return Err(Error::PartitionMismatch {
            expected: partition.workers(),
            found: contributions.len(),
        });
    }
    Ok(match kind {
        ReduceKind::MaxAbs => contributions.iter().fold(0.0, |m, c| f64::max(m, c.abs())),
        ReduceKind::Dot => {
            let mut acc = 0.0;
            for c in contributions {
                acc += c;
            }
            acc
        }
    })
}

/// A partition plus the threads that execute it.
pub struct Workers {
    partition: Partition,
    pool: Option<ThreadPool>,
}

impl std::fmt::Debug for Workers {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Workers")
            .field("partition", &self.partition)
            .finish_non_exhaustive()
    }
}

impl Workers {
    pub fn new(n: usize, w: usize) -> Result<Self> {
        let partition = Partition::new(n, w)?;
        let pool = if w > 1 {
            let pool = ThreadPoolBuilder::new()
                .num_threads(w)
                .thread_name(|i| format!("ipi-worker-{i}"))
                .build()
                .map_err(|e| Error::InvalidOptions(format!("cannot start workers: {e}")))?;
            Some(pool)
        } else {
            None
        };
        Ok(Workers { partition, pool })
    }

    /// Single worker running on the calling thread.
    pub fn serial(n: usize) -> Self {
        Workers {
            partition: Partition::new(n, 1).expect("one worker"),
            pool: None,
        }
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn count(&self) -> usize {
        self.partition.workers()
    }

    /// Runs `f(worker, owned_states, owned_segment)` for every worker and
    /// waits for all of them.
    pub fn run<T, F>(&self, out: &mut [T], f: F)
    where
        T: Send,
        F: Fn(usize, Range<usize>, &mut [T]) + Sync,
    {
        assert_eq!(out.len(), self.partition.n, "output must cover the partition");
        match &self.pool {
            None => {
                for (i, block) in self.partition.blocks().enumerate() {
                    f(i, block.clone(), &mut out[block]);
                }
            }
            Some(pool) => {
                let segments = split_segments(out, &self.partition);
                let f = &f;
                pool.scope(|scope| {
                    for (i, (block, seg)) in self.partition.blocks().zip(segments).enumerate() {
                        scope.spawn(move |_| f(i, block, seg));
                    }
                });
            }
        }
    }

    /// Like [`Workers::run`] with two output vectors split the same way.
    pub fn run2<T, U, F>(&self, out_a: &mut [T], out_b: &mut [U], f: F)
    where
        T: Send,
        U: Send,
        F: Fn(Range<usize>, &mut [T], &mut [U]) + Sync,
    {
        assert_eq!(out_a.len(), self.partition.n);
        assert_eq!(out_b.len(), self.partition.n);
        match &self.pool {
            None => {
                for block in self.partition.blocks() {
                    f(block.clone(), &mut out_a[block.clone()], &mut out_b[block]);
                }
            }
            Some(pool) => {
                let seg_a = split_segments(out_a, &self.partition);
                let seg_b = split_segments(out_b, &self.partition);
                let f = &f;
                pool.scope(|scope| {
                    for ((block, a), b) in self.partition.blocks().zip(seg_a).zip(seg_b) {
                        scope.spawn(move |_| f(block, a, b));
                    }
                });
            }
        }
    }

    /// One result per worker, computed from its owned states and returned in
    /// worker order.
    pub fn collect_blocks<R, F>(&self, f: F) -> Vec<R>
    where
        R: Send,
        F: Fn(Range<usize>) -> R + Sync,
    {
        match &self.pool {
            None => self.partition.blocks().map(f).collect(),
            Some(pool) => {
                let mut slots: Vec<Option<R>> = (0..self.count()).map(|_| None).collect();
                let f = &f;
                pool.scope(|scope| {
                    for (slot, block) in slots.iter_mut().zip(self.partition.blocks()) {
                        scope.spawn(move |_| *slot = Some(f(block)));
                    }
                });
                slots.into_iter().map(|r| r.expect("every worker ran")).collect()
            }
        }
    }

    /// One value per worker, computed from its owned states.
    pub fn map_blocks<F>(&self, f: F) -> Vec<f64>
    where
        F: Fn(Range<usize>) -> f64 + Sync,
    {
        self.collect_blocks(f)
    }

    /// Partitioned inner product `x·y`.
    pub fn dot(&self, x: &[f64], y: &[f64]) -> f64 {
        let partial = self.map_blocks(|block| {
            let mut acc = 0.0;
            for i in block {
                acc += x[i] * y[i];
            }
            acc
        });
        parallel_reduce(ReduceKind::Dot, &self.partition, &partial).expect("one partial per worker")
    }

    pub fn norm2(&self, x: &[f64]) -> f64 {
        self.dot(x, x).sqrt()
    }

    /// `max_i |x_i - y_i|`, exact for any worker count.
    pub fn max_abs_diff(&self, x: &[f64], y: &[f64]) -> f64 {
        let partial = self.map_blocks(|block| {
            block.fold(0.0, |m, i| f64::max(m, (x[i] - y[i]).abs()))
        });
        parallel_reduce(ReduceKind::MaxAbs, &self.partition, &partial).expect("one partial per worker")
    }
}

/// Bellman backup where each worker backs up only its owned states.
///
/// Bitwise identical to [`crate::mdp::bellman_apply`] for every worker
/// count: a state's backup touches only its own rows and nothing is reduced
/// across states.
pub fn parallel_bellman(mdp: &Mdp, v: &[f64], workers: &Workers) -> Result<(ValueFunction, Policy)> {
    mdp.check_values(v)?;
    if workers.partition().n() != mdp.n_states() {
        return Err(Error::DimensionMismatch {
            expected: mdp.n_states(),
            found: workers.partition().n(),
        });
    }
    let mut tv = vec![0.0; mdp.n_states()];
    let mut pi = vec![0usize; mdp.n_states()];
    workers.run2(&mut tv, &mut pi, |block, out_v, out_pi| {
        mdp.backup_block(block, v, out_v, out_pi)
    });
    Ok((tv, Policy(pi)))
}

fn split_segments<'a, T>(mut out: &'a mut [T], partition: &Partition) -> Vec<&'a mut [T]> {
    let mut segments = Vec::with_capacity(partition.workers());
    for block in partition.blocks() {
        let (head, tail) = out.split_at_mut(block.len());
        segments.push(head);
        out = tail;
    }
    segments
}

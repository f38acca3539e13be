mod common;

use common::*;
use ipi_core::io::builtin;
use ipi_core::solvers::{gmres_solve, GmresParams, PolicyOperator};
use ipi_core::{
    make_partition, parallel_bellman, parallel_reduce, solve, Error, InnerSolver, Method, ReduceKind, SolveOptions,
    Workers,
};
use rand::Rng;

#[test]
fn gmres_random_policy_system() {
    let mut r = rng(30);
    let p = random_stochastic(&mut r, 30, 0.2);
    let b: Vec<f64> = (0..30).map(|_| r.gen_range(0.0..10.0)).collect();
    let w = Workers::serial(30);
    let op = PolicyOperator::new(&p, 0.9, &w);
    let sol = gmres_solve(&op, &w, &b, &[0.0; 30], GmresParams { tol: 1e-10, restart: 30, max_iters: 1000 }).unwrap();
    let exact = dense_policy_solve(&p, &b, 0.9);
    assert!(max_abs_diff(&sol.x, &exact) <= 1e-8);
}

#[test]
fn ipi_gmres_matches_tight_vi() {
    let mut r = rng(31);
    let mdp = random_mdp(&mut r, 30, 3, 0.9, 5);
    let opts = SolveOptions {
        tol: 1e-8,
        workers: 1,
        inner: InnerSolver::Gmres,
        alpha: 0.1,
        ..SolveOptions::new(Method::Ipi)
    };
    let res = solve(&mdp, &opts, None).unwrap();
    assert!(*res.stats.residual_history.last().unwrap() <= 1e-8);
    assert!(res.stats.suboptimality_bound > 0.0 && res.stats.suboptimality_bound <= 9e-8);
    let vi = solve(&mdp, &SolveOptions { tol: 1e-12, ..SolveOptions::new(Method::Vi) }, None).unwrap();
    assert!(max_abs_diff(&res.value, &vi.value) <= res.stats.suboptimality_bound + 1e-11);
    assert_eq!(res.policy, vi.policy);
}

#[test]
fn ipi_needs_fewer_outer_iterations_than_vi() {
    let mdp = builtin::chain(500, 2, 0.99).unwrap();
    let run = |method, inner| {
        let opts = SolveOptions { method, inner, tol: 1e-8, workers: 1, ..SolveOptions::default() };
        solve(&mdp, &opts, None).unwrap().stats.outer_iterations
    };
    let vi = run(Method::Vi, InnerSolver::Gmres);
    let ipi = run(Method::Ipi, InnerSolver::Gmres);
    assert!(ipi * 10 < vi, "ipi {ipi} vs vi {vi}");
}

#[test]
fn random_walk_value_monotone_in_distance() {
    let mdp = builtin::chain(100, 1, 0.9).unwrap();
    let res = solve(&mdp, &SolveOptions { tol: 1e-10, workers: 1, ..SolveOptions::new(Method::Vi) }, None).unwrap();
    assert!(res.value.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(res.stats.inner_iterations_per_outer.len(), res.stats.outer_iterations);
}

#[test]
fn parallel_bellman_bitwise_across_workers() {
    let mut r = rng(32);
    let mdp = random_mdp(&mut r, 100, 4, 0.95, 8);
    let v: Vec<f64> = (0..100).map(|_| r.gen_range(-10.0..10.0)).collect();
    let (reference, pi) = parallel_bellman(&mdp, &v, &Workers::serial(100)).unwrap();
    for w in [1, 2, 3, 7] {
        let (tv, p) = parallel_bellman(&mdp, &v, &Workers::new(100, w).unwrap()).unwrap();
        assert_eq!(bits(&tv), bits(&reference));
        assert_eq!(p, pi);
    }

    let e1 = builtin::e1(0.9);
    let one = parallel_bellman(&e1, &[0.3, 0.7], &Workers::new(2, 1).unwrap()).unwrap();
    for w in [2, 4] {
        assert_eq!(parallel_bellman(&e1, &[0.3, 0.7], &Workers::new(2, w).unwrap()).unwrap(), one);
    }
    assert!(matches!(
        parallel_bellman(&e1, &[0.0, 0.0], &Workers::new(3, 1).unwrap()),
        Err(Error::DimensionMismatch { .. })
    ));
}

#[test]
fn dot_reduction_across_worker_counts() {
    let mut r = rng(33);
    let x: Vec<f64> = (0..1000).map(|_| r.gen_range(-1.0..1.0)).collect();
    let y: Vec<f64> = (0..1000).map(|_| r.gen_range(-1.0..1.0)).collect();
    let one = Workers::new(1000, 1).unwrap().dot(&x, &y);
    let four = Workers::new(1000, 4).unwrap();
    let d4 = four.dot(&x, &y);
    assert!((d4 - one).abs() <= 1e-12 * one.abs());
    assert_eq!(d4.to_bits(), four.dot(&x, &y).to_bits());

    let p = make_partition(3, 3).unwrap();
    assert_eq!(parallel_reduce(ReduceKind::Dot, &p, &[1.0, 2.0, 3.0]).unwrap(), 6.0);
    assert_eq!(parallel_reduce(ReduceKind::MaxAbs, &p, &[-3.0, 0.0, 2.0]).unwrap(), 3.0);
}

#[test]
fn solves_reproducible_for_fixed_worker_count() {
    let mdp = builtin::chain(300, 3, 0.97).unwrap();
    let opts = SolveOptions { workers: 3, tol: 1e-9, ..SolveOptions::new(Method::Ipi) };
    let a = solve(&mdp, &opts, None).unwrap();
    let b = solve(&mdp, &opts, None).unwrap();
    assert_eq!(bits(&a.value), bits(&b.value));
    assert_eq!(bits(&a.stats.residual_history), bits(&b.stats.residual_history));
}

#[test]
fn generator_output_independent_of_workers() {
    let reference = ipi_core::io::encode_mdp(&builtin::chain(1001, 2, 0.9).unwrap());
    for w in [2, 3, 8] {
        let mdp = builtin::chain_with(1001, 2, 0.9, &Workers::new(1001, w).unwrap()).unwrap();
        assert_eq!(ipi_core::io::encode_mdp(&mdp), reference);
    }
}

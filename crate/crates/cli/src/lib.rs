//! Batch front end: load or generate an MDP, solve it, write the artifacts.
//!
//! Exit codes: 0 converged, 2 not converged (artifacts still written),
//! 1 usage, validation or I/O error.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use ipi_core::io::{self, builtin};
use ipi_core::solvers::default_workers;
use ipi_core::{solve, Error, InnerSolver, Mdp, Method, SolveOptions, SolveResult, Workers};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NOT_CONVERGED: i32 = 2;

/// Discount used by the built-in generators unless `--gamma` is given.
pub const DEFAULT_GEN_GAMMA: f64 = 0.9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Vi,
    Pi,
    Mpi,
    Ipi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InnerArg {
    Richardson,
    Gmres,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    /// Reflecting random walk (`--n` states, `--m` actions).
    Chain,
    /// The two-state, two-action example.
    E1,
}

#[derive(Debug, Parser)]
#[command(name = "ipi", version, about = "Solve discounted MDPs with (inexact) policy iteration")]
pub struct CliConfig {
    /// MDPB file to load.
    #[arg(long, value_name = "FILE", conflicts_with = "gen", required_unless_present = "gen")]
    pub input: Option<PathBuf>,

    /// Built-in generator to use instead of a file.
    #[arg(long, value_name = "NAME")]
    pub gen: Option<Generator>,

    /// State count for `--gen chain`.
    #[arg(long, value_name = "N", required_if_eq("gen", "chain"))]
    pub n: Option<usize>,

    /// Action count for `--gen chain`.
    #[arg(long, value_name = "M", default_value_t = 1)]
    pub m: usize,

    #[arg(long, value_enum, default_value = "ipi")]
    pub method: MethodArg,

    #[arg(long, value_enum, default_value = "gmres")]
    pub inner: InnerArg,

    #[arg(long, value_name = "F", default_value_t = 0.1)]
    pub alpha: f64,

    #[arg(long, value_name = "F", default_value_t = 1e-8)]
    pub tol: f64,

    #[arg(long, value_name = "K", default_value_t = 10_000)]
    pub max_outer: usize,

    #[arg(long, value_name = "K", default_value_t = 1000)]
    pub max_inner: usize,

    #[arg(long, value_name = "K", default_value_t = 50)]
    pub mpi_steps: usize,

    #[arg(long, value_name = "K", default_value_t = 30)]
    pub gmres_restart: usize,

    /// Fixed inner step count for `ipi`, replacing the forcing rule.
    #[arg(long, value_name = "K")]
    pub inner_steps: Option<usize>,

    /// Worker count (default: available parallelism).
    #[arg(long, value_name = "W")]
    pub workers: Option<usize>,

    /// Override the discount factor after loading.
    #[arg(long, value_name = "F")]
    pub gamma: Option<f64>,

    /// Directory for value.txt, policy.txt and stats.json.
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
}

impl CliConfig {
    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            method: match self.method {
                MethodArg::Vi => Method::Vi,
                MethodArg::Pi => Method::Pi,
                MethodArg::Mpi => Method::Mpi,
                MethodArg::Ipi => Method::Ipi,
            },
            inner: match self.inner {
                InnerArg::Richardson => InnerSolver::Richardson,
                InnerArg::Gmres => InnerSolver::Gmres,
            },
            alpha: self.alpha,
            tol: self.tol,
            max_outer: self.max_outer,
            max_inner: self.max_inner,
            mpi_steps: self.mpi_steps,
            gmres_restart: self.gmres_restart,
            inner_steps: self.inner_steps,
            workers: self.workers.unwrap_or_else(default_workers),
        }
    }

    /// Loads or generates the model and applies `--gamma`.
    pub fn load_mdp(&self, workers: usize) -> Result<Mdp, Error> {
        let gamma = self.gamma.unwrap_or(DEFAULT_GEN_GAMMA);
        let mdp = match (&self.input, self.gen) {
            (Some(path), _) => io::read_mdp(path)?,
            (None, Some(Generator::E1)) => builtin::e1(gamma),
            (None, Some(Generator::Chain)) => {
                let n = self.n.unwrap_or(0);
                builtin::chain_with(n, self.m, gamma, &Workers::new(n, workers)?)?
            }
            (None, None) => unreachable!("clap requires --input or --gen"),
        };
        match self.gamma {
            Some(g) => mdp.with_gamma(g),
            None => {
                mdp.validate().map_err(Error::Validation)?;
                Ok(mdp)
            }
        }
    }
}

/// Parses `args` (program name first), runs the solve and returns the exit
/// code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let config = match CliConfig::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_ERROR } else { EXIT_OK };
        }
    };
    match execute(&config) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            EXIT_ERROR
        }
    }
}

fn execute(config: &CliConfig) -> Result<i32, Error> {
    let opts = config.solve_options();
    opts.validate()?;
    let mdp = config.load_mdp(opts.workers)?;
    let (result, code) = match solve(&mdp, &opts, None) {
        Ok(res) => (res, EXIT_OK),
        Err(Error::NotConverged(res)) => (*res, EXIT_NOT_CONVERGED),
        Err(e) => return Err(e),
    };
    if let Some(dir) = &config.out {
        io::write_solution(dir, &result, &opts)?;
    }
    report(&mdp, &result);
    if code == EXIT_NOT_CONVERGED {
        eprintln!(
            "error: not converged after {} outer iterations",
            result.stats.outer_iterations
        );
    }
    Ok(code)
}

fn report(mdp: &Mdp, res: &SolveResult) {
    let s = &res.stats;
    println!(
        "{} ({}): n={} m={} gamma={} workers={}",
        s.method,
        s.inner,
        mdp.n_states(),
        mdp.n_actions(),
        mdp.gamma(),
        s.workers
    );
    println!(
        "converged={} outer={} inner={} residual={:e} bound={:e} time={:.3}s",
        s.converged,
        s.outer_iterations,
        s.inner_iterations_per_outer.iter().sum::<usize>(),
        s.residual_history.last().copied().unwrap_or(f64::NAN),
        s.suboptimality_bound,
        s.wall_time
    );
}

//! Solution artifacts: `value.txt`, `policy.txt` and `stats.json`.

use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::solvers::{SolveOptions, SolveResult, SolveStats};

#[derive(Serialize)]
struct StatsFile<'a> {
    options: &'a SolveOptions,
    #[serde(flatten)]
    stats: &'a SolveStats,
}

/// Scientific notation with 17 significant digits, enough to parse back to
/// the same `f64`.
pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn stats_json(result: &SolveResult, opts: &SolveOptions) -> Result<String> {
    let file = StatsFile {
        options: opts,
        stats: &result.stats,
    };
    serde_json::to_string_pretty(&file).map_err(|e| Error::InvalidOptions(format!("cannot encode stats: {e}")))
}

/// Writes the three solution files into `dir`, creating it if needed.
pub fn write_solution(dir: impl AsRef<Path>, result: &SolveResult, opts: &SolveOptions) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;

    let mut value = String::with_capacity(result.value.len() * 20);
    for &x in &result.value {
        value.push_str(&format_value(x));
        value.push('\n');
    }
    let mut policy = String::with_capacity(result.policy.len() * 4);
    for a in result.policy.iter() {
        policy.push_str(&a.to_string());
        policy.push('\n');
    }
    let mut stats = stats_json(result, opts)?;
    stats.push('\n');

    for (name, body) in [("value.txt", value), ("policy.txt", policy), ("stats.json", stats)] {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

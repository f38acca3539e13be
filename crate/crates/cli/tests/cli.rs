use std::fs;
use std::path::Path;
use std::process::Command;

use ipi_cli::{run, EXIT_ERROR, EXIT_NOT_CONVERGED, EXIT_OK};
use ipi_core::io::{builtin, write_mdp};
use ipi_core::{solve, Method, SolveOptions};

fn ipi(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_ipi")).args(args).output().unwrap()
}

fn read_values(dir: &Path) -> Vec<f64> {
    fs::read_to_string(dir.join("value.txt"))
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect()
}

fn read_policy(dir: &Path) -> Vec<usize> {
    fs::read_to_string(dir.join("policy.txt"))
        .unwrap()
        .lines()
        .map(|l| l.parse().unwrap())
        .collect()
}

fn read_stats(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&fs::read_to_string(dir.join("stats.json")).unwrap()).unwrap()
}

#[test]
fn solves_e1_from_file() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("e1.mdpb");
    write_mdp(&input, &builtin::e1(0.9)).unwrap();
    let out = tmp.path().join("o");
    let status = ipi(&[
        "--input",
        input.to_str().unwrap(),
        "--method",
        "ipi",
        "--inner",
        "gmres",
        "--tol",
        "1e-10",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(status.status.code(), Some(EXIT_OK), "{}", String::from_utf8_lossy(&status.stderr));
    let v = read_values(&out);
    assert!((v[0] - 2.0).abs() <= 1e-9 && v[1].abs() <= 1e-9, "{v:?}");
    assert_eq!(read_policy(&out), vec![1, 0]);

    let stats = read_stats(&out);
    assert_eq!(stats["method"], "ipi");
    assert_eq!(stats["inner"], "gmres");
    assert_eq!(stats["converged"], true);
    for key in ["outer_iterations", "inner_iterations_per_outer", "residual_history", "wall_time", "suboptimality_bound", "workers"] {
        assert!(stats.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn iteration_cap_exits_with_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let code = run([
        "ipi", "--gen", "e1", "--method", "vi", "--max-outer", "1", "--tol", "1e-12", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_NOT_CONVERGED);
    let stats = read_stats(&out);
    assert_eq!(stats["outer_iterations"], 1);
    assert_eq!(stats["converged"], false);
    assert_eq!(read_values(&out).len(), 2);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(run(["ipi", "--gen", "e1", "--method", "bogus"]), EXIT_ERROR);
    assert_eq!(run(["ipi", "--gen", "chain"]), EXIT_ERROR);
    assert_eq!(run(["ipi"]), EXIT_ERROR);
    assert_eq!(run(["ipi", "--gen", "e1", "--gamma", "1.0"]), EXIT_ERROR);
    assert_eq!(run(["ipi", "--gen", "e1", "--workers", "0"]), EXIT_ERROR);
    assert_eq!(run(["ipi", "--input", "/nonexistent/x.mdpb"]), EXIT_ERROR);
    assert_eq!(run(["ipi", "--help"]), EXIT_OK);
    assert_eq!(ipi(&["--method", "bogus", "--gen", "e1"]).status.code(), Some(EXIT_ERROR));
}

#[test]
fn corrupt_input_exits_with_one() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("bad.mdpb");
    fs::write(&path, b"NOPE and some bytes that do not matter here").unwrap();
    let output = ipi(&["--input", path.to_str().unwrap()]);
    assert_eq!(output.status.code(), Some(EXIT_ERROR));
    assert!(!output.stderr.is_empty());
}

#[test]
fn matches_library_solve() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let code = run([
        "ipi", "--gen", "chain", "--n", "200", "--m", "3", "--gamma", "0.95", "--method", "mpi", "--mpi-steps",
        "7", "--workers", "2", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let mdp = builtin::chain(200, 3, 0.95).unwrap();
    let opts = SolveOptions { mpi_steps: 7, workers: 2, ..SolveOptions::new(Method::Mpi) };
    let lib = solve(&mdp, &opts, None).unwrap();
    let cli = read_values(&out);
    let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
    assert_eq!(bits(&cli), bits(&lib.value));
    assert_eq!(read_policy(&out), lib.policy.0);
    assert_eq!(read_stats(&out)["outer_iterations"], lib.stats.outer_iterations);
}

#[test]
fn worker_count_does_not_change_output() {
    let tmp = tempfile::tempdir().unwrap();
    for method in ["vi", "mpi"] {
        let mut outputs = Vec::new();
        for w in ["1", "4"] {
            let out = tmp.path().join(format!("{method}-{w}"));
            let code = run([
                "ipi", "--gen", "chain", "--n", "300", "--m", "2", "--method", method, "--workers", w, "--out",
                out.to_str().unwrap(),
            ]);
            assert_eq!(code, EXIT_OK);
            outputs.push((fs::read(out.join("value.txt")).unwrap(), fs::read(out.join("policy.txt")).unwrap()));
        }
        assert_eq!(outputs[0], outputs[1], "{method}");
    }
}

#[test]
fn gamma_override_applies_to_input_file() {
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("e1.mdpb");
    write_mdp(&input, &builtin::e1(0.9)).unwrap();
    let out = tmp.path().join("o");
    let code = run([
        "ipi", "--input", input.to_str().unwrap(), "--gamma", "0.5", "--method", "pi", "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, EXIT_OK);
    let stats = read_stats(&out);
    assert_eq!(stats["method"], "pi");
    let v = read_values(&out);
    // state 1 is absorbing at zero cost and state 0 pays 2 to get there
    assert!((v[0] - 2.0).abs() <= 1e-12 && v[1].abs() <= 1e-12, "{v:?}");
}

#[test]
fn prints_summary_without_out_dir() {
    let output = ipi(&["--gen", "e1", "--method", "vi", "--tol", "1e-6"]);
    assert_eq!(output.status.code(), Some(EXIT_OK));
    let stdout = String::from_utf8(output.stdout).unwrap();
    assert!(stdout.contains("converged=true"), "{stdout}");
}

use std::path::Path;
use std::process::{Command, Output};
use vem::mesh::load_mesh;

fn vem(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_vem"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("failed to run vem")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Value of `key=value` in the output.
fn field(text: &str, key: &str) -> f64 {
    let pat = format!("{key}=");
    let tok = text
        .split_whitespace()
        .find_map(|t| t.strip_prefix(&pat))
        .unwrap_or_else(|| panic!("no {key} in {text}"));
    tok.parse().unwrap()
}

fn gen(dir: &Path, args: &[&str]) {
    let o = vem(dir, args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn gen_mesh_cube() {
    let d = tempfile::tempdir().unwrap();
    let o = vem(d.path(), &["gen-mesh", "cube", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(field(&stdout(&o), "cells"), 8.0);
    let m = load_mesh(&d.path().join("cube2.pm")).unwrap();
    assert_eq!(m.num_cells(), 8);
}

#[test]
fn gen_mesh_slit_reports_strip_chunkiness() {
    let d = tempfile::tempdir().unwrap();
    let o = vem(d.path(), &["gen-mesh", "slit", "--n", "1", "--eps", "0.1", "-o", "s.pm"]);
    assert_eq!(o.status.code(), Some(0));
    // a 1 x 0.1 rectangle: inscribed radius 0.05 over the diagonal
    let expected = 0.05 / (1.0f64 + 0.01).sqrt();
    let rho = field(&stdout(&o), "min_rho_F");
    assert!((rho - expected).abs() < 1e-6, "{rho}");
    assert!(d.path().join("s.pm").exists());
}

#[test]
fn gen_mesh_zero_is_usage_error() {
    let d = tempfile::tempdir().unwrap();
    let o = vem(d.path(), &["gen-mesh", "cube", "--n", "0"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--n"));
}

#[test]
fn solve_patch_tests() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path(), &["gen-mesh", "cube", "--n", "2"]);
    for (k, p) in [("1", "poly1"), ("2", "poly2")] {
        let o = vem(d.path(), &["solve", "--mesh", "cube2.pm", "--k", k, "--problem", p, "-o", "u.dofs"]);
        assert_eq!(o.status.code(), Some(0));
        let out = stdout(&o);
        for key in ["energy_err", "h1_err", "l2_err"] {
            assert!(field(&out, key) <= 1e-9, "{p}: {out}");
        }
        let dofs = std::fs::read_to_string(d.path().join("u.dofs")).unwrap();
        assert_eq!(dofs.lines().count() as f64, field(&out, "ndof") + 1.0);
    }
}

#[test]
fn solve_slit_with_original_stabilization() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path(), &["gen-mesh", "slit", "--n", "1", "--eps", "0.1"]);
    let o = vem(
        d.path(),
        &["solve", "--mesh", "slit1.pm", "--k", "1", "--problem", "sinsinsin", "--stab", "original"],
    );
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    // every DOF of the single slit cell at k = 1 is on the Dirichlet boundary
    assert_eq!(field(&out, "energy_err"), 0.0);
    assert!((field(&out, "h1_err") - 1.922975).abs() < 1e-5, "{out}");
    assert!((field(&out, "l2_err") - 0.3535518).abs() < 1e-6, "{out}");
}

#[test]
fn solve_dumps_matrix() {
    let d = tempfile::tempdir().unwrap();
    let o = vem(d.path(), &["solve", "--family", "cube", "--n", "1", "--dump-matrix", "a.mtx"]);
    assert_eq!(o.status.code(), Some(0));
    let text = std::fs::read_to_string(d.path().join("a.mtx")).unwrap();
    assert!(text.starts_with("%%MatrixMarket matrix coordinate real symmetric"));
}

#[test]
fn solver_failure_exit_code() {
    let d = tempfile::tempdir().unwrap();
    let o = vem(d.path(), &["solve", "--family", "cube", "--n", "4", "--k", "2", "--max-iter", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("residual"));
}

#[test]
fn unknown_problem_and_order_are_usage_errors() {
    let d = tempfile::tempdir().unwrap();
    let o = vem(d.path(), &["solve", "--family", "cube", "--n", "1", "--problem", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    let o = vem(d.path(), &["solve", "--family", "cube", "--n", "1", "--k", "4"]);
    assert_eq!(o.status.code(), Some(2));
    let o = vem(d.path(), &["solve"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn missing_mesh_file() {
    let d = tempfile::tempdir().unwrap();
    let o = vem(d.path(), &["solve", "--mesh", "absent.pm"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("absent.pm"));
}

#[test]
fn verify_identity_thresholds() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path(), &["gen-mesh", "cube", "--n", "2"]);
    let o = vem(d.path(), &["verify-identity", "--mesh", "cube2.pm", "--k", "2", "--problem", "quadratic"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(field(&stdout(&o), "residual") <= 1e-10);

    let o = vem(d.path(), &["verify-identity", "--mesh", "cube2.pm", "--k", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(field(&stdout(&o), "residual") <= 1e-6);

    let o = vem(d.path(), &["verify-identity", "--mesh", "cube2.pm", "--k", "1", "--threshold", "1e-15"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn study_writes_reports() {
    let d = tempfile::tempdir().unwrap();
    let args = [
        "study", "--family", "cube", "--levels", "2,4,8", "--k", "1", "--problem", "sinsinsin", "--out", "rep",
    ];
    let o = vem(d.path(), &args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(field(&stdout(&o), "energy_rate") >= 0.9);
    let csv = d.path().join("rep/study_cube_k1_sinsinsin.csv");
    let first = std::fs::read(&csv).unwrap();
    assert!(d.path().join("rep/study_cube_k1_sinsinsin.md").exists());
    assert_eq!(std::str::from_utf8(&first).unwrap().lines().count(), 4);

    let o = vem(d.path(), &args);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read(&csv).unwrap(), first);
}

#[test]
fn slit_study_chunkiness_column_decreases() {
    let d = tempfile::tempdir().unwrap();
    let o = vem(d.path(), &["study", "--family", "slit", "--eps-rule", "h", "--levels", "2,4,8", "--k", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(d.path().join("study_slit_k1_sinsinsin.csv")).unwrap();
    let rho: Vec<f64> = csv.lines().skip(1).map(|l| l.split(',').nth(6).unwrap().parse().unwrap()).collect();
    assert_eq!(rho.len(), 3);
    assert!(rho.windows(2).all(|w| w[1] < w[0]), "{rho:?}");
}

#[test]
fn study_needs_three_levels() {
    let d = tempfile::tempdir().unwrap();
    let o = vem(d.path(), &["study", "--family", "cube", "--levels", "2,4", "--k", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn study_rate_gate() {
    // the original stabilization loses the rate on slit cubes
    let d = tempfile::tempdir().unwrap();
    let o = vem(
        d.path(),
        &["study", "--family", "slit", "--levels", "2,4,8", "--stab", "original"],
    );
    assert_eq!(o.status.code(), Some(5));
    assert!(field(&stdout(&o), "energy_rate") < 0.9);
}

#[test]
fn config_file_and_precedence() {
    let d = tempfile::tempdir().unwrap();
    gen(d.path(), &["gen-mesh", "cube", "--n", "2"]);
    std::fs::write(d.path().join("run.cfg"), "# patch test\nmesh = cube2.pm\nk = 2\nproblem = poly2\n").unwrap();
    let o = vem(d.path(), &["--threads", "2", "solve", "--config", "run.cfg"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(field(&stdout(&o), "energy_err") <= 1e-9);
    assert_eq!(field(&stdout(&o), "ndof"), 125.0);

    let o = vem(d.path(), &["solve", "--config", "run.cfg", "--k", "1", "--problem", "poly1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(field(&stdout(&o), "ndof"), 27.0);

    std::fs::write(d.path().join("bad.cfg"), "k 2\n").unwrap();
    let o = vem(d.path(), &["solve", "--config", "bad.cfg"]);
    assert_eq!(o.status.code(), Some(2));
}

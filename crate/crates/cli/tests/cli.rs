use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use paracone_cli::manifest::strip_wall_clock;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).to_path_buf()
}

fn config(name: &str) -> PathBuf {
    root().join("configs").join(name)
}

fn fixture(name: &str) -> PathBuf {
    root().join("tests/fixtures").join(name)
}

fn paracone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_paracone")).args(args).output().expect("binary runs")
}

fn run(cfg: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--config", cfg.to_str().unwrap()];
    args.extend_from_slice(extra);
    paracone(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("JSON on stdout")
}

/// Compares with `tests/golden/<name>`; `BLESS=1` rewrites it.
fn golden(name: &str, actual: &str) {
    let path = root().join("tests/golden").join(name);
    if std::env::var_os("BLESS").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).unwrap();
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden {}", path.display()));
    assert_eq!(actual, expected, "golden {name} differs (rerun with BLESS=1 after review)");
}

#[test]
fn affine_config_exits_zero() {
    let o = run(&config("affine-convex.toml"), &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    golden("affine-convex.json", &strip_wall_clock(&stdout(&o)));
}

#[test]
fn neg_abs_config_exits_one_with_witness() {
    let o = run(&config("neg-abs.toml"), &[]);
    assert_eq!(o.status.code(), Some(1));
    let m = json(&o);
    assert_eq!(m["exit_status"], 1);
    let report = &m["checks"][0]["report"];
    assert_eq!(report["pass"], false);
    assert_eq!(report["witness"]["kind"], "triple");
    golden("neg-abs.json", &strip_wall_clock(&stdout(&o)));
}

#[test]
fn bad_k_exits_two_with_line() {
    let o = run(&fixture("bad-k.toml"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("line 17") && err.contains("k has dimension 3"), "{err}");
    assert!(o.stdout.is_empty());
}

#[test]
fn missing_seed_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("noseed.toml");
    std::fs::write(
        &cfg,
        "[mapping]\nfamily = \"affine\"\ndomain = { lower = [-1.0], upper = [1.0] }\na = [[1.0]]\nb = [0.0]\n\n[[checks]]\nkind = \"falsify\"\nbudget = 10\n",
    )
    .unwrap();
    let o = run(&cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 7") && stderr(&o).contains("seed"), "{}", stderr(&o));
    let o = run(&cfg, &["--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn syntax_error_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("broken.toml");
    std::fs::write(&cfg, "name = \"x\"\n[mapping]\nfamily = \"affine\"\ndomain = { lower = [-1.0] upper = [1.0] }\n").unwrap();
    let o = paracone(&["falsify", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 4"), "{}", stderr(&o));
}

#[test]
fn unknown_flag_value_exits_two() {
    let o = paracone(&["falsify", "--config", config("neg-abs.toml").to_str().unwrap(), "--form", "max"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn every_shipped_config_is_reproducible() {
    for entry in std::fs::read_dir(root().join("configs")).unwrap() {
        let path = entry.unwrap().path();
        let a = run(&path, &[]);
        let b = run(&path, &[]);
        assert!(matches!(a.status.code(), Some(0 | 1)), "{}: {}", path.display(), stderr(&a));
        assert_eq!(strip_wall_clock(&stdout(&a)), strip_wall_clock(&stdout(&b)), "{}", path.display());
    }
}

#[test]
fn out_dir_receives_manifest_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&config("neg-square.toml"), &["--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(o.stdout.is_empty());
    let manifest = std::fs::read_to_string(dir.path().join("manifest.json")).unwrap();
    let m: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(m["checks"].as_array().unwrap().len(), 11);
    assert_eq!(m["config_hash"].as_str().unwrap().len(), 64);
    let csv = std::fs::read_to_string(dir.path().join("7-trace.csv")).unwrap();
    assert!(csv.starts_with("t,raw_1,corrected_1\n"));
    assert_eq!(csv.lines().count(), 41);
}

#[test]
fn single_check_subcommands() {
    let cfg = config("neg-square.toml");
    let c = cfg.to_str().unwrap();

    let o = paracone(&["check-paraconvex", "--config", c]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    for field in ["pass", "worst_margin", "witness", "samples_used", "tol", "seed", "notes"] {
        assert!(r.get(field).is_some(), "{field}");
    }
    assert_eq!(r["samples_used"], 10000);

    // Flags override the configured entry: C1 = 1 lambda form at a small
    // budget still passes.
    let o = paracone(&["check-paraconvex", "--config", c, "--budget", "50", "--seed", "9", "--form", "lambda"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&o);
    assert_eq!((r["samples_used"].as_u64(), r["seed"].as_u64()), (Some(50), Some(9)));

    let o = paracone(&["derivative", "--config", c]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.starts_with("t,raw_1,corrected_1\n"), "{out}");
    assert!(stderr(&o).contains("converged true"));

    let o = paracone(&["trace", "--config", c]);
    assert_eq!(json(&o)["pass"], true);
}

#[test]
fn derivative_and_scan_schemas() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config("example1.toml");
    let o = paracone(&["gateaux-scan", "--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.starts_with("x_1,pass,defect\n"));
    assert_eq!(out.lines().count(), 82);
    assert!(dir.path().join("kink-grid.json").exists() && dir.path().join("kink-grid.csv").exists());

    let cfg = config("frechet-quadratic.toml");
    let o = paracone(&["frechet", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let r = json(&o);
    let table = r["table"].as_array().unwrap();
    assert_eq!(table.len(), 2);
    for row in table {
        for field in ["epsilon", "delta", "max_lambda", "residual_bound"] {
            assert!(!row[field].is_null(), "{field}");
        }
    }

    let cfg = config("affine-convex.toml");
    let o = paracone(&["gateaux", "--config", cfg.to_str().unwrap()]);
    assert_eq!(json(&o)["pass"], true);
}

#[test]
fn subcommand_without_entry_uses_flags() {
    let cfg = config("neg-abs.toml");
    let c = cfg.to_str().unwrap();
    let o = paracone(&["check-paraconvex", "--config", c, "--seed", "1", "--budget", "200"]);
    assert!(matches!(o.status.code(), Some(0 | 1)));
    let o = paracone(&["lipschitz", "--config", c]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("seed"));
}

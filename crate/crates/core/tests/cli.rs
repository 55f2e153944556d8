//! Command-line behaviour: golden outputs, exit codes and determinism.
//!
//! Set `DISPKIT_BLESS=1` to rewrite the golden files from the current binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn crate_dir() -> &'static Path {
    Path::new(env!("CARGO_MANIFEST_DIR"))
}

fn dispkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dispkit"))
        .current_dir(crate_dir())
        .env_remove("DISPKIT_SEED")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout_of(args: &[&str]) -> String {
    let out = dispkit(args);
    assert!(
        out.status.success(),
        "{args:?} exited with {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).expect("utf-8 output")
}

fn golden(name: &str) -> PathBuf {
    crate_dir().join("tests/golden").join(name)
}

fn check_golden(name: &str, actual: &str) {
    let path = golden(name);
    if std::env::var_os("DISPKIT_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
        return;
    }
    let expected = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    assert_eq!(actual, expected, "output differs from {}", path.display());
}

const CASES: &[(&str, &[&str])] = &[
    ("disp_diag.csv", &["disp", "--points", "tests/golden/diag.txt"]),
    ("disp_midpoint.jsonl", &["disp", "--points", "tests/golden/midpoint.txt", "--format", "jsonl"]),
    ("disp_empty.csv", &["disp", "--points", "tests/golden/empty.txt"]),
    ("disp_equispaced_k2.csv", &["disp", "--points", "tests/golden/equispaced.txt", "--k", "2"]),
    ("disp_diag_torus.csv", &["disp", "--points", "tests/golden/diag.txt", "--torus"]),
    ("bounds_eval.csv", &["bounds", "eval", "--eps", "0.1,0.3,0.5", "--d", "2,3", "--k", "0,3"]),
    ("bounds_regimes.csv", &["bounds", "regimes", "--d", "2:4", "--log10-eps", "-12:-0.5:6"]),
    ("net_verify.csv", &["net", "verify", "--d", "2", "--eps", "0.2", "--trials", "2000", "--seed", "7"]),
    ("mc_net.jsonl", &["mc", "net", "--d", "2", "--eps", "0.2", "--trials", "10", "--seed", "3", "--format", "jsonl"]),
    (
        "mc_disp.csv",
        &["mc", "disp", "--d", "2", "--eps", "0.2", "--n", "30", "--trials", "10", "--seed", "3", "--method", "both"],
    ),
];

#[test]
fn golden_outputs() {
    for (name, args) in CASES {
        check_golden(name, &stdout_of(args));
    }
}

#[test]
fn net_build_writes_the_enumerated_net() {
    let dir = tempfile::tempdir().unwrap();
    let net = dir.path().join("net.jsonl");
    let net_arg = net.to_str().unwrap();
    let report = stdout_of(&["net", "build", "--d", "2", "--eps", "0.25", "--gamma", "1", "--anchored", "--out", net_arg]);
    assert!(report.contains("\nanchored,12,"));
    let text = std::fs::read_to_string(&net).unwrap();
    check_golden("net_anchored_d2.jsonl", &text);
    assert!(text.lines().next().unwrap().contains("\"count\":12"));
    assert_eq!(text.lines().count(), 13);

    // the written file feeds verify and certify
    let verify = stdout_of(&["net", "verify", "--net", net_arg, "--trials", "500"]);
    assert!(verify.lines().last().unwrap().starts_with("12,500,500,0,"));
    let certify = stdout_of(&["net", "certify", "--net", net_arg, "--points", "tests/golden/empty.txt"]);
    assert!(certify.ends_with("12,0,0,false,12\n"));
}

#[test]
#[allow(clippy::excessive_precision)]
fn known_values_through_the_cli() {
    let midpoint = stdout_of(&["disp", "--points", "tests/golden/midpoint.txt"]);
    assert!(midpoint.lines().last().unwrap().starts_with("0.5,"));
    let empty = stdout_of(&["disp", "--points", "tests/golden/empty.txt"]);
    assert!(empty.lines().last().unwrap().starts_with("1,true,"));
    let diag = stdout_of(&["disp", "--points", "tests/golden/diag.txt"]);
    let value: f64 = diag.lines().last().unwrap().split(',').next().unwrap().parse().unwrap();
    assert!((value - 4.0 / 9.0).abs() < 1e-15);
    let large = stdout_of(&["bounds", "eval", "--eps", "0.5", "--d", "2"]);
    assert!(large.contains("\nlarge_eps_exact,0.5,2,,1,1,true,false\n"));
    let main = stdout_of(&["bounds", "eval", "--eps", "0.1", "--d", "2"]);
    let row = main.lines().find(|l| l.starts_with("thm_main,")).unwrap();
    let fields: Vec<&str> = row.split(',').collect();
    let v: f64 = fields[4].parse().unwrap();
    assert!((v / 4606.7295099277704926 - 1.0).abs() < 1e-9);
    assert_eq!(fields[5], "4607");
}

fn code(args: &[&str]) -> (Option<i32>, String) {
    let out = dispkit(args);
    (out.status.code(), String::from_utf8_lossy(&out.stderr).into_owned())
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    std::fs::write(&bad, "2 2\n0.1 0.2\n0.3 oops\n").unwrap();
    let (c, err) = code(&["disp", "--points", bad.to_str().unwrap()]);
    assert_eq!(c, Some(2));
    assert!(err.contains("line 3"), "{err}");

    assert_eq!(code(&["disp", "--points", "tests/golden/missing.txt"]).0, Some(2));
    assert_eq!(code(&["disp"]).0, Some(2));
    assert_eq!(code(&["bounds", "eval", "--eps", "0.1:x", "--d", "2"]).0, Some(2));
    assert_eq!(code(&["mc", "disp", "--d", "2", "--eps", "0.2", "--n", "3", "--method", "magic"]).0, Some(2));
    assert_eq!(code(&["net", "verify", "--d", "2", "--eps", "0.2", "--trials", "0"]).0, Some(2));
    assert_eq!(code(&["net", "verify", "--d", "2", "--eps", "0.2", "--threads", "0"]).0, Some(2));

    let (c, err) = code(&["net", "build", "--d", "4", "--eps", "0.01", "--torus", "--mem-budget", "1MiB", "--out", "unused"]);
    assert_eq!(c, Some(3));
    assert!(err.contains("bytes"), "{err}");
    assert!(!crate_dir().join("unused").exists());

    let (c, err) = code(&["disp", "--points", "tests/golden/diag.txt", "--max-n", "1"]);
    assert_eq!(c, Some(3));
    assert!(err.contains("--force"), "{err}");
    assert_eq!(code(&["disp", "--points", "tests/golden/diag.txt", "--max-n", "1", "--force"]).0, Some(0));

    let (c, _) = code(&["mc", "invert", "--d", "2", "--eps", "0.01", "--target", "0.9", "--cap", "4", "--trials", "5"]);
    assert_eq!(c, Some(3));
    assert_eq!(code(&["mc", "invert", "--d", "1", "--eps", "0.3", "--target", "1"]).0, Some(2));
}

#[test]
fn seed_comes_from_the_environment() {
    let args = ["mc", "disp", "--d", "2", "--eps", "0.3", "--n", "8", "--trials", "5", "--format", "jsonl"];
    let run = |seed: Option<&str>| {
        let mut c = Command::new(env!("CARGO_BIN_EXE_dispkit"));
        c.current_dir(crate_dir()).args(args);
        match seed {
            Some(s) => c.env("DISPKIT_SEED", s),
            None => c.env_remove("DISPKIT_SEED"),
        };
        c.output().unwrap().stdout
    };
    let env = run(Some("42"));
    assert!(String::from_utf8_lossy(&env).contains("\"seed\":42"));
    let mut explicit_args = args.to_vec();
    explicit_args.extend(["--seed", "42"]);
    assert_eq!(env, dispkit(&explicit_args).stdout);
    assert_ne!(env, run(None));
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    for (_, args) in CASES {
        let outputs: Vec<Vec<u8>> = ["1", "2", "8"]
            .iter()
            .map(|t| {
                let mut a = args.to_vec();
                a.extend(["--threads", t]);
                dispkit(&a).stdout
            })
            .collect();
        assert_eq!(outputs[0], outputs[1], "{args:?}");
        assert_eq!(outputs[0], outputs[2], "{args:?}");
    }
}

#[test]
fn csv_uses_lf_and_jsonl_parses() {
    for (name, args) in CASES {
        let out = stdout_of(args);
        assert!(!out.contains('\r'));
        assert!(out.ends_with('\n'));
        if name.ends_with(".jsonl") {
            for line in out.lines() {
                serde_json::from_str::<serde_json::Value>(line).unwrap();
            }
        } else {
            assert!(out.starts_with("# dispkit "));
        }
    }
}

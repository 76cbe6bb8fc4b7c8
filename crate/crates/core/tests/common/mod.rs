#![allow(dead_code)]

use std::path::Path;
use std::process::Command;

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

/// Runs the CLI with `dir` as working directory.
pub fn wildrisk(dir: &Path, args: &[&str]) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_wildrisk")).current_dir(dir).args(args).output().expect("spawn wildrisk");
    Output {
        code: out.status.code().unwrap_or(-1),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// As [`wildrisk`], panicking with the captured output on a non-zero exit.
pub fn ok(dir: &Path, args: &[&str]) -> String {
    let o = wildrisk(dir, args);
    assert_eq!(o.code, 0, "wildrisk {args:?} failed\nstdout:\n{}\nstderr:\n{}", o.stdout, o.stderr);
    o.stdout
}

pub fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))).unwrap()
}

/// Synthetic region `a`, its dynamic table and an MLP trained on it.
pub fn trained_workspace(dir: &Path) {
    ok(dir, &["synth", "--seed", "1", "--out", "a"]);
    ok(dir, &["assemble-dynamic", "--region", "a", "--out", "dyn.csv"]);
    ok(dir, &["train", "--table", "dyn.csv", "--model", "mlp", "--seed", "7", "--out", "model.json"]);
}

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::Command;

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests").join("golden")
}

pub struct Run {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

pub fn nullcharge(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_nullcharge"))
        .args(args)
        .env_remove("NULLCHARGE_THREADS")
        .output()
        .expect("spawn nullcharge");
    Run {
        code: out.status.code().unwrap_or(-1),
        stdout: out.stdout,
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

/// Subcommand, config file in the golden directory, extra flags, expected output file.
pub const GOLDEN_CASES: &[(&str, &str, &[&str], &str)] = &[
    ("eigen", "eigen.json", &[], "eigen.out.json"),
    ("flux", "flux.json", &[], "flux.out.json"),
    ("propagate", "propagate.json", &[], "propagate.out.csv"),
    ("map", "map.json", &[], "map.out.csv"),
    ("conformal-check", "conformal.json", &["--seed", "42"], "conformal.out.json"),
];

/// Runs one golden case and returns its stdout.
pub fn run_golden(cmd: &str, config: &str, extra: &[&str]) -> Run {
    let cfg = golden_dir().join(config);
    let mut args = vec![cmd, "--quiet", "--config", cfg.to_str().unwrap()];
    args.extend_from_slice(extra);
    nullcharge(&args)
}

#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sepdec::{DensityMatrix, JointDist};
use sepdec_cli::files::StateFile;

pub fn sepdec() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sepdec"))
}

pub fn run(args: &[&str]) -> Output {
    sepdec().args(args).output().expect("binary runs")
}

pub fn write_quantum(dir: &Path, name: &str, rho: &DensityMatrix) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(&StateFile::quantum(rho)).unwrap()).unwrap();
    path
}

pub fn write_classical(dir: &Path, name: &str, p: &JointDist) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, serde_json::to_string_pretty(&StateFile::classical(p)).unwrap()).unwrap();
    path
}

pub fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Report text with the wall-time line removed.
pub fn without_wall_time(text: &str) -> String {
    text.lines().filter(|l| !l.contains("\"wall_time_s\"")).collect::<Vec<_>>().join("\n")
}

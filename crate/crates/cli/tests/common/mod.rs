#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ingredient_cf::synthetic::{synthetic_raw, SyntheticConfig};
use tempfile::TempDir;

pub const BIN: &str = env!("CARGO_BIN_EXE_ingredient-cf");

pub struct Fixture {
    pub dir: TempDir,
    pub raw: PathBuf,
    pub config: PathBuf,
    pub corpus: PathBuf,
}

impl Fixture {
    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

pub fn run<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    Command::new(BIN).args(args).env("SOURCE_DATE_EPOCH", "1700000000").output().expect("binary runs")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

pub fn assert_ok(out: &Output) {
    assert!(out.status.success(), "exit {:?}\nstdout:\n{}\nstderr:\n{}", out.status.code(), stdout(out), stderr(out));
}

pub fn write_raw(path: &Path, recipes: usize) {
    let raw = synthetic_raw(&SyntheticConfig { recipes, ..SyntheticConfig::default() });
    std::fs::write(path, serde_json::to_vec(&raw).unwrap()).unwrap();
}

/// A raw file, a config lowering the frequency cut for the small corpus, and
/// the prepared corpus bundle.
pub fn fixture() -> Fixture {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("train.json");
    write_raw(&raw, 2_000);
    let config = dir.path().join("config.json");
    std::fs::write(&config, r#"{"pipeline": {"min_final_count": 5}, "seed": 42}"#).unwrap();
    let corpus = dir.path().join("corpus");
    let out = run([
        "--config".as_ref(),
        config.as_os_str(),
        "prepare".as_ref(),
        "--input".as_ref(),
        raw.as_os_str(),
        "--output".as_ref(),
        corpus.as_os_str(),
    ]);
    assert_ok(&out);
    Fixture { dir, raw, config, corpus }
}

#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

pub struct Run {
    pub status: i32,
    pub stderr: String,
    pub elapsed: Duration,
    pub out: PathBuf,
}

#[derive(Debug, Clone)]
pub struct Row {
    pub value: f64,
    pub tolerance: String,
    pub status: String,
}

impl Run {
    pub fn report_text(&self) -> String {
        std::fs::read_to_string(self.out.join("report.csv")).expect("report.csv")
    }

    pub fn rows(&self) -> BTreeMap<String, Row> {
        let mut rdr = csv::Reader::from_path(self.out.join("report.csv")).expect("report.csv");
        assert_eq!(rdr.headers().unwrap(), vec!["name", "value", "tolerance", "status"]);
        rdr.records()
            .map(|r| {
                let r = r.unwrap();
                (r[0].to_string(), Row { value: r[1].parse().unwrap(), tolerance: r[2].to_string(), status: r[3].to_string() })
            })
            .collect()
    }

    pub fn value(&self, name: &str) -> f64 {
        self.rows().get(name).unwrap_or_else(|| panic!("missing row {name}")).value
    }

    /// Names of rows whose status is `fail`.
    pub fn failed(&self) -> Vec<String> {
        self.rows().into_iter().filter(|(_, r)| r.status == "fail").map(|(n, _)| n).collect()
    }
}

pub fn workspace_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..").canonicalize().unwrap()
}

pub fn config_path(rel: &str) -> PathBuf {
    workspace_root().join("configs").join(rel)
}

pub fn freetrans(config: &Path, out: &Path, extra: &[&str]) -> Run {
    let start = Instant::now();
    let output = Command::new(env!("CARGO_BIN_EXE_freetrans"))
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(extra)
        .output()
        .expect("spawn freetrans");
    Run {
        status: output.status.code().expect("exit code"),
        stderr: String::from_utf8_lossy(&output.stderr).into_owned(),
        elapsed: start.elapsed(),
        out: out.to_path_buf(),
    }
}

/// Writes `json` to a config file in `dir` and runs it with output in `dir/out`.
pub fn run_inline(dir: &Path, json: &str, extra: &[&str]) -> Run {
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, json).unwrap();
    freetrans(&cfg, &dir.join("out"), extra)
}

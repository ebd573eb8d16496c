//! Batch front end: a JSON run config names one command; the command writes
//! `report.csv` (and optionally VTK snapshots) into the output directory and
//! maps to an exit status.
//!
//! Exit status 0 means every contract row passed, 1 means some contract
//! failed, 2 means the config or the file system was unusable. A non-zero
//! status is accompanied by one `freetrans: status=<n> reason=<text>` line on
//! stderr.

mod commands;
mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use freetrans::io::{all_pass, emit_csv, Bound, ReportRow};
use freetrans::Error;

pub use config::{
    Command, CompactnessConfig, DiagnoseConfig, DyadicSettings, HarnackSettings, HolderSettings, IdentityConfig,
    OracleConfig, PowerFieldConfig, RunConfig, ScheduleConfig, Suite,
};

/// Settings supplied on the command line, overriding the config file.
#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    pub out_dir: Option<PathBuf>,
    /// Omit wall-clock rows so that reruns are byte-identical.
    pub deterministic: bool,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub status: i32,
    pub reason: Option<String>,
}

impl Outcome {
    fn ok() -> Self {
        Outcome { status: 0, reason: None }
    }
}

/// Failure that prevents a command from producing its rows.
#[derive(Debug)]
pub(crate) enum Failure {
    /// Bad config, bad spec or an unusable output path: status 2.
    Config(String),
    /// A numerical routine failed outright: status 1.
    Contract(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Validation(ref v) => {
                let detail: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                Failure::Config(format!("spec validation failed: {}", detail.join("; ")))
            }
            Error::InvalidParameter(_) | Error::UnknownExpr(_) | Error::TooCoarse(_) | Error::Json(_) | Error::FieldLength { .. } => {
                Failure::Config(e.to_string())
            }
            Error::Io(_) | Error::Csv(_) => Failure::Config(format!("io error: {e}")),
            _ => Failure::Contract(e.to_string()),
        }
    }
}

/// Everything a command needs besides its own config section.
pub(crate) struct Context<'a> {
    pub config: &'a RunConfig,
    pub out_dir: &'a Path,
    pub seed: Option<u64>,
}

impl Context<'_> {
    pub fn seed(&self) -> Result<u64, Failure> {
        self.seed.ok_or_else(|| Failure::Config("seed required for sampling diagnostics".into()))
    }
}

pub fn load_config(path: &Path) -> Result<RunConfig, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("invalid config: {e}"))
}

/// Runs one command and writes its report.
pub fn run(config: &RunConfig, opts: &RunOptions) -> Outcome {
    let Some(out_dir) = opts.out_dir.clone().or_else(|| config.out_dir.clone()) else {
        return fail(2, "no output directory given".into());
    };
    if let Err(e) = fs::create_dir_all(&out_dir) {
        return fail(2, format!("cannot create output directory {}: {e}", out_dir.display()));
    }
    let ctx = Context { config, out_dir: &out_dir, seed: opts.seed.or(config.seed) };
    let start = Instant::now();
    let result = commands::dispatch(&ctx);
    let elapsed = start.elapsed().as_secs_f64();
    let (mut rows, outcome) = match result {
        Ok(rows) => (rows, None),
        Err(Failure::Config(reason)) => return fail(2, reason),
        Err(Failure::Contract(reason)) => (vec![ReportRow::flag("command_completed", false)], Some(fail(1, reason))),
    };
    if !opts.deterministic {
        rows.push(match config.runtime_limit_s {
            Some(limit) => ReportRow::check("runtime_s", elapsed, Bound::AtMost(limit)),
            None => ReportRow::info("runtime_s", elapsed),
        });
    }
    if let Err(e) = emit_csv(&rows, &out_dir.join("report.csv")) {
        return fail(2, format!("cannot write report: {e}"));
    }
    if let Some(o) = outcome {
        return o;
    }
    if all_pass(&rows) {
        Outcome::ok()
    } else {
        let failed: Vec<&str> = rows.iter().filter(|r| r.status == freetrans::io::Status::Fail).map(|r| r.name.as_str()).collect();
        fail(1, format!("contract failed: {}", failed.join(", ")))
    }
}

fn fail(status: i32, reason: String) -> Outcome {
    Outcome { status, reason: Some(reason) }
}

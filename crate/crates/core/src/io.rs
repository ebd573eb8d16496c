//! Report rows, CSV and legacy VTK output. Files are written to a sibling
//! temporary path and renamed into place.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::mesh::Mesh;

/// The fixed report header.
pub const CSV_HEADER: [&str; 4] = ["name", "value", "tolerance", "status"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Bound {
    AtMost(f64),
    AtLeast(f64),
    /// `|value - target| <= tol`
    Within { target: f64, tol: f64 },
}

impl Bound {
    pub fn admits(&self, v: f64) -> bool {
        match *self {
            Bound::AtMost(b) => v <= b,
            Bound::AtLeast(b) => v >= b,
            Bound::Within { target, tol } => (v - target).abs() <= tol,
        }
    }

    fn render(&self) -> String {
        match *self {
            Bound::AtMost(b) => format!("<= {b:e}"),
            Bound::AtLeast(b) => format!(">= {b:e}"),
            Bound::Within { target, tol } => format!("{target:e} +- {tol:e}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    /// Measured without a contract.
    Info,
}

impl Status {
    fn as_str(self) -> &'static str {
        match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::Info => "info",
        }
    }
}

/// One measured quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub name: String,
    pub value: f64,
    pub bound: Option<Bound>,
    pub status: Status,
}

impl ReportRow {
    pub fn info(name: impl Into<String>, value: f64) -> Self {
        ReportRow { name: name.into(), value, bound: None, status: Status::Info }
    }

    /// A contract row; non-finite values fail.
    pub fn check(name: impl Into<String>, value: f64, bound: Bound) -> Self {
        let ok = value.is_finite() && bound.admits(value);
        ReportRow { name: name.into(), value, bound: Some(bound), status: if ok { Status::Pass } else { Status::Fail } }
    }

    /// A pass/fail flag recorded as 1 or 0.
    pub fn flag(name: impl Into<String>, ok: bool) -> Self {
        ReportRow::check(name, if ok { 1.0 } else { 0.0 }, Bound::AtLeast(1.0))
    }
}

pub fn all_pass(rows: &[ReportRow]) -> bool {
    rows.iter().all(|r| r.status != Status::Fail)
}

/// CSV text with the fixed header. Values use the shortest representation
/// that round-trips.
pub fn csv_string(rows: &[ReportRow]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in rows {
        let tol = r.bound.map(|b| b.render()).unwrap_or_default();
        w.write_record([r.name.as_str(), &format!("{:e}", r.value), &tol, r.status.as_str()])?;
    }
    let bytes = w.into_inner().map_err(|e| std::io::Error::other(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn emit_csv(rows: &[ReportRow], path: &Path) -> Result<()> {
    write_atomic(path, csv_string(rows)?.as_bytes())
}

/// Legacy ASCII unstructured grid with one `SCALARS` block per field.
pub fn vtk_string(mesh: &Mesh, fields: &[(&str, &[f64])]) -> String {
    let mut s = String::new();
    let n = mesh.n_nodes();
    s.push_str("# vtk DataFile Version 3.0\nfreetrans field\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {n} double");
    for x in mesh.nodes() {
        let _ = writeln!(s, "{:e} {:e} 0", x[0], x[1]);
    }
    let k = mesh.dim() + 1;
    let ne = mesh.n_elements();
    let _ = writeln!(s, "CELLS {ne} {}", ne * (k + 1));
    for c in mesh.elements() {
        s.push_str(&k.to_string());
        for i in c {
            let _ = write!(s, " {i}");
        }
        s.push('\n');
    }
    let _ = writeln!(s, "CELL_TYPES {ne}");
    let cell_type = if k == 2 { "3" } else { "5" };
    for _ in 0..ne {
        s.push_str(cell_type);
        s.push('\n');
    }
    if !fields.is_empty() {
        let _ = writeln!(s, "POINT_DATA {n}");
    }
    for (name, values) in fields {
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in *values {
            let _ = writeln!(s, "{v:e}");
        }
    }
    s
}

pub fn emit_vtk(mesh: &Mesh, fields: &[(&str, &[f64])], path: &Path) -> Result<()> {
    write_atomic(path, vtk_string(mesh, fields).as_bytes())
}

pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    fs::write(&tmp, bytes)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

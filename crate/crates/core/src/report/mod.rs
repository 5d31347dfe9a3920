//! Table reproduction against the published values, CSV emission and
//! atomic file output.

use std::fmt;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub mod csv;
pub mod golden;
pub mod reproduce;

pub use self::csv::{
    diagram_rows, emit_diagram, emit_trajectory, format_diagram, format_trajectory,
    parse_diagram, parse_trajectory, DiagramRow,
};
pub use golden::Golden;
pub use reproduce::{reproduce, reproduce_autoimmune, ReproduceOptions};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TableId {
    T1,
    T2,
    T4,
}

impl TableId {
    pub const ALL: [TableId; 3] = [TableId::T1, TableId::T2, TableId::T4];

    pub fn as_str(self) -> &'static str {
        match self {
            TableId::T1 => "T1",
            TableId::T2 => "T2",
            TableId::T4 => "T4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s.to_ascii_uppercase().as_str() {
            "T1" => TableId::T1,
            "T2" => TableId::T2,
            "T4" => TableId::T4,
            _ => return None,
        })
    }
}

impl fmt::Display for TableId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Contents of one table cell, expected or computed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "snake_case")]
pub enum Value {
    Absent,
    Number(f64),
    Pair([f64; 2]),
    /// A bifurcation point together with its kind.
    Marked { at: [f64; 2], kind: String },
    Intervals(Vec<[f64; 2]>),
    Pairs(Vec<[f64; 2]>),
    Label(String),
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pair = |p: &[f64; 2]| format!("({}; {})", p[0], p[1]);
        match self {
            Value::Absent => f.write_str("-"),
            Value::Number(v) => write!(f, "{v}"),
            Value::Pair(p) => f.write_str(&pair(p)),
            Value::Marked { at, kind } => write!(f, "{} {kind}", pair(at)),
            Value::Intervals(v) if v.is_empty() => f.write_str("none"),
            Value::Intervals(v) => {
                let parts: Vec<String> = v.iter().map(|p| format!("[{}; {}]", p[0], p[1])).collect();
                f.write_str(&parts.join(" "))
            }
            Value::Pairs(v) if v.is_empty() => f.write_str("none"),
            Value::Pairs(v) => f.write_str(&v.iter().map(pair).collect::<Vec<_>>().join(" ")),
            Value::Label(s) => f.write_str(s),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Tolerance {
    Exact,
    Abs { tol: f64 },
    /// Separate absolute tolerances on the parameter and state coordinates.
    Point { param: f64, state: f64 },
    /// Relative tolerance; the signs must agree as well.
    Rel { tol: f64 },
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tolerance::Exact => f.write_str("exact"),
            Tolerance::Abs { tol } => write!(f, "abs {tol}"),
            Tolerance::Point { param, state } => write!(f, "abs {param}/{state}"),
            Tolerance::Rel { tol } => write!(f, "rel {tol}"),
        }
    }
}

fn close(e: f64, c: f64, tol: f64) -> bool {
    if e.is_infinite() || c.is_infinite() {
        return e == c;
    }
    (e - c).abs() <= tol
}

fn pair_close(e: &[f64; 2], c: &[f64; 2], tol: &Tolerance) -> bool {
    match *tol {
        Tolerance::Exact => e == c,
        Tolerance::Abs { tol } => close(e[0], c[0], tol) && close(e[1], c[1], tol),
        Tolerance::Point { param, state } => close(e[0], c[0], param) && close(e[1], c[1], state),
        Tolerance::Rel { tol } => (0..2).all(|i| rel_close(e[i], c[i], tol)),
    }
}

fn rel_close(e: f64, c: f64, tol: f64) -> bool {
    e.signum() == c.signum() && (e - c).abs() <= tol * e.abs()
}

/// Whether `computed` matches `expected` under `tol`.
pub fn matches(expected: &Value, computed: &Value, tol: &Tolerance) -> bool {
    match (expected, computed) {
        (Value::Absent, Value::Absent) => true,
        (Value::Number(e), Value::Number(c)) => match *tol {
            Tolerance::Exact => e == c,
            Tolerance::Abs { tol } | Tolerance::Point { param: tol, .. } => close(*e, *c, tol),
            Tolerance::Rel { tol } => rel_close(*e, *c, tol),
        },
        (Value::Pair(e), Value::Pair(c)) => pair_close(e, c, tol),
        (Value::Marked { at: e, kind: ke }, Value::Marked { at: c, kind: kc }) => {
            ke == kc && pair_close(e, c, tol)
        }
        (Value::Intervals(e), Value::Intervals(c)) | (Value::Pairs(e), Value::Pairs(c)) => {
            e.len() == c.len() && e.iter().zip(c).all(|(a, b)| pair_close(a, b, tol))
        }
        (Value::Label(e), Value::Label(c)) => e == c,
        _ => false,
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cell {
    pub column: String,
    pub expected: Value,
    pub computed: Value,
    pub tolerance: Tolerance,
    pub pass: bool,
    pub note: Option<String>,
}

impl Cell {
    pub fn new(column: impl Into<String>, expected: Value, computed: Value, tolerance: Tolerance) -> Self {
        let pass = matches(&expected, &computed, &tolerance);
        Self {
            column: column.into(),
            expected,
            computed,
            tolerance,
            pass,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.note = Some(note.into());
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RowReport {
    pub case: u32,
    /// Case label; Table 4 splits some cases into `5a`, `5b`.
    pub label: String,
    pub cells: Vec<Cell>,
}

impl RowReport {
    pub fn pass(&self) -> bool {
        self.cells.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Cell> {
        self.cells.iter().filter(|c| !c.pass)
    }

    /// `T2 case 3: pass (7/7 cells)`, followed by the failing columns.
    pub fn summary_line(&self, table: &str) -> String {
        let ok = self.cells.iter().filter(|c| c.pass).count();
        let mut line = format!(
            "{table} case {}: {} ({ok}/{} cells)",
            self.label,
            if self.pass() { "pass" } else { "FAIL" },
            self.cells.len()
        );
        for c in self.failures() {
            line.push_str(&format!(
                "; {} expected {} got {} ({})",
                c.column, c.expected, c.computed, c.tolerance
            ));
        }
        line
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TableReport {
    pub table: TableId,
    pub rows: Vec<RowReport>,
}

impl TableReport {
    pub fn pass(&self) -> bool {
        self.rows.iter().all(RowReport::pass)
    }

    /// One line per row, see [`RowReport::summary_line`].
    pub fn summary_lines(&self) -> Vec<String> {
        self.rows.iter().map(|r| r.summary_line(self.table.as_str())).collect()
    }

    pub fn to_csv(&self) -> Result<String> {
        rows_to_csv(&self.rows)
    }
}

/// Cell-level CSV: `case,column,expected,computed,tolerance,pass,note`.
pub fn rows_to_csv(rows: &[RowReport]) -> Result<String> {
    let mut w = ::csv::Writer::from_writer(Vec::new());
    let err = |e: ::csv::Error| Error::Parse(e.to_string());
    w.write_record(["case", "column", "expected", "computed", "tolerance", "pass", "note"])
        .map_err(err)?;
    for r in rows {
        for c in &r.cells {
            w.write_record([
                r.label.as_str(),
                &c.column,
                &c.expected.to_string(),
                &c.computed.to_string(),
                &c.tolerance.to_string(),
                if c.pass { "true" } else { "false" },
                c.note.as_deref().unwrap_or(""),
            ])
            .map_err(err)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

/// Writes through a temporary file in the target directory and renames it
/// into place, so readers never see a partial file.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let io = |e: std::io::Error| Error::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    };
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    // the temporary file is created owner-only; outputs are ordinary files
    #[cfg(unix)]
    {
        use std::os::unix::fs::PermissionsExt;
        tmp.as_file()
            .set_permissions(std::fs::Permissions::from_mode(0o644))
            .map_err(io)?;
    }
    tmp.write_all(contents).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

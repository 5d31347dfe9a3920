//! CSV layout of bifurcation diagrams and trajectories.
//!
//! Numbers are written as `{:.16e}` (17 significant digits), which parses
//! back to the identical `f64`.

use std::path::Path;

use crate::equilibrium::Branch;
use crate::error::{Error, Result};
use crate::model::StateVector;
use crate::odesim::Trajectory;
use crate::scan::{BifurcationKind, BranchDiagram};
use crate::spectral::StabilityClass;

use super::write_atomic;

#[derive(Clone, Debug, PartialEq)]
pub struct DiagramRow {
    pub param: f64,
    pub branch: Branch,
    pub state: Vec<f64>,
    pub stability: StabilityClass,
    /// Set only on detected bifurcation points.
    pub kind: Option<BifurcationKind>,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn parse_num(s: &str, line: usize, column: &str) -> Result<f64> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("line {line}: `{s}` in column {column} is not a number")))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Parse(e.to_string())
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Parse(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
}

fn state_headers(n: usize) -> impl Iterator<Item = String> {
    (1..=n).map(|i| format!("state_{i}"))
}

/// Samples and detected points, ordered by parameter (samples first on ties).
pub fn diagram_rows(d: &BranchDiagram) -> Vec<DiagramRow> {
    let mut rows: Vec<DiagramRow> = d
        .samples
        .iter()
        .map(|s| DiagramRow {
            param: s.param_value,
            branch: s.point.branch,
            state: s.point.state.0.clone(),
            stability: s.stability.class,
            kind: None,
        })
        .chain(d.points.iter().map(|p| DiagramRow {
            param: p.point.param_value,
            branch: p.branch,
            state: p.point.state.0.clone(),
            stability: p.stability.class,
            kind: Some(p.point.kind),
        }))
        .collect();
    rows.sort_by(|a, b| a.param.total_cmp(&b.param));
    rows
}

pub fn format_diagram(d: &BranchDiagram) -> Result<String> {
    let rows = diagram_rows(d);
    let Some(first) = rows.first() else {
        return Err(Error::ContractViolation {
            operation: "emit_diagram",
            detail: "diagram has no samples or points".into(),
        });
    };
    let n = first.state.len();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["param".to_string(), "branch".to_string()];
    header.extend(state_headers(n));
    header.extend(["stability".to_string(), "bifurcation_kind".to_string()]);
    w.write_record(&header).map_err(csv_err)?;
    for r in &rows {
        let mut rec = vec![num(r.param), r.branch.as_str().to_string()];
        rec.extend(r.state.iter().map(|&v| num(v)));
        rec.push(r.stability.as_str().to_string());
        rec.push(r.kind.map_or("", |k| k.as_str()).to_string());
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}

pub fn parse_diagram(text: &str) -> Result<Vec<DiagramRow>> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header = rd.headers().map_err(csv_err)?.clone();
    let cols = header.len();
    if cols < 5
        || &header[0] != "param"
        || &header[1] != "branch"
        || &header[cols - 2] != "stability"
        || &header[cols - 1] != "bifurcation_kind"
    {
        return Err(Error::Parse(format!("unexpected diagram header `{}`", header.iter().collect::<Vec<_>>().join(","))));
    }
    let n = cols - 4;
    let mut out = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        let branch = Branch::parse(&rec[1])
            .ok_or_else(|| Error::Parse(format!("line {line}: unknown branch `{}`", &rec[1])))?;
        let state = (0..n)
            .map(|j| parse_num(&rec[2 + j], line, &header[2 + j]))
            .collect::<Result<Vec<f64>>>()?;
        let stability = StabilityClass::parse(&rec[cols - 2])
            .ok_or_else(|| Error::Parse(format!("line {line}: unknown stability `{}`", &rec[cols - 2])))?;
        let kind = match &rec[cols - 1] {
            "" => None,
            s => Some(
                BifurcationKind::parse(s)
                    .ok_or_else(|| Error::Parse(format!("line {line}: unknown bifurcation kind `{s}`")))?,
            ),
        };
        out.push(DiagramRow {
            param: parse_num(&rec[0], line, "param")?,
            branch,
            state,
            stability,
            kind,
        });
    }
    Ok(out)
}

pub fn emit_diagram(d: &BranchDiagram, path: &Path) -> Result<()> {
    write_atomic(path, format_diagram(d)?.as_bytes())
}

/// Sample indices kept when writing every `every`-th sample; the last
/// sample is always kept.
fn kept_indices(len: usize, every: usize) -> Vec<usize> {
    let every = every.max(1);
    let mut idx: Vec<usize> = (0..len).step_by(every).collect();
    if len > 0 && idx.last() != Some(&(len - 1)) {
        idx.push(len - 1);
    }
    idx
}

/// Columns `t, state_1..state_n`; `every > 1` keeps every `every`-th
/// sample plus the last one.
pub fn format_trajectory(tr: &Trajectory, every: usize) -> Result<String> {
    let n = tr.model.dimension();
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec!["t".to_string()];
    header.extend(state_headers(n));
    w.write_record(&header).map_err(csv_err)?;
    for i in kept_indices(tr.len(), every) {
        let mut rec = vec![num(tr.times[i])];
        rec.extend(tr.states[i].0.iter().map(|&v| num(v)));
        w.write_record(&rec).map_err(csv_err)?;
    }
    finish(w)
}

pub fn parse_trajectory(text: &str) -> Result<(Vec<f64>, Vec<StateVector>)> {
    let mut rd = csv::Reader::from_reader(text.as_bytes());
    let header = rd.headers().map_err(csv_err)?.clone();
    if header.len() < 2 || &header[0] != "t" {
        return Err(Error::Parse("trajectory header must start with `t`".into()));
    }
    let mut times = Vec::new();
    let mut states = Vec::new();
    for (i, rec) in rd.records().enumerate() {
        let rec = rec.map_err(csv_err)?;
        let line = i + 2;
        times.push(parse_num(&rec[0], line, "t")?);
        let s = (1..header.len())
            .map(|j| parse_num(&rec[j], line, &header[j]))
            .collect::<Result<Vec<f64>>>()?;
        states.push(StateVector::new(s));
    }
    Ok((times, states))
}

pub fn emit_trajectory(tr: &Trajectory, path: &Path, every: usize) -> Result<()> {
    write_atomic(path, format_trajectory(tr, every)?.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{presets, Model, ModelId};
    use crate::odesim::StepStats;
    use crate::scan::{sweep_branch, Spacing};

    #[test]
    fn single_sample_diagram_is_header_plus_row() {
        let m = Model::new(presets::inhost(0.03, 0.03)).unwrap();
        // below threshold only the uninfected state exists
        let d = sweep_branch(&m, 0.03, 0.03, 1, Spacing::Linear).unwrap();
        let text = format_diagram(&d).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2, "{text}");
        assert_eq!(lines[0], "param,branch,state_1,state_2,stability,bifurcation_kind");
        assert!(lines[1].ends_with(','));
        assert!(!text.contains('\r'));
    }

    #[test]
    fn diagram_round_trip_is_bitwise() {
        let m = Model::new(presets::inhost(0.06, 0.06)).unwrap();
        let d = sweep_branch(&m, 0.04, 0.12, 37, Spacing::Linear).unwrap();
        let rows = diagram_rows(&d);
        let back = parse_diagram(&format_diagram(&d).unwrap()).unwrap();
        assert_eq!(rows.len(), back.len());
        for (a, b) in rows.iter().zip(&back) {
            assert_eq!(a.param.to_bits(), b.param.to_bits());
            assert!(a.state.iter().zip(&b.state).all(|(x, y)| x.to_bits() == y.to_bits()));
            assert_eq!((a.branch, a.stability, a.kind), (b.branch, b.stability, b.kind));
        }
        assert!(back.iter().any(|r| r.kind == Some(BifurcationKind::Hopf)));
    }

    fn constant(n: usize) -> Trajectory {
        Trajectory {
            model: ModelId::InhostConvex,
            param_value: 0.05,
            times: (0..n).map(|i| i as f64 * 0.1).collect(),
            states: vec![StateVector::new(vec![0.1 + 0.2, 1.0 / 3.0]); n],
            stats: StepStats::default(),
        }
    }

    #[test]
    fn constant_trajectory_rows_identical() {
        let text = format_trajectory(&constant(9), 1).unwrap();
        let (t, s) = parse_trajectory(&text).unwrap();
        assert_eq!(t.len(), 9);
        assert!(s.iter().all(|x| x == &s[0]));
        assert_eq!(s[0][0].to_bits(), (0.1f64 + 0.2).to_bits());
    }

    #[test]
    fn downsampling_keeps_ends() {
        let tr = constant(10);
        let (t, _) = parse_trajectory(&format_trajectory(&tr, 4).unwrap()).unwrap();
        assert_eq!(t.first(), tr.times.first());
        assert_eq!(t.last(), tr.times.last());
        assert_eq!(t.len(), 4); // 0, 4, 8, 9
        assert_eq!(kept_indices(1, 5), vec![0]);
        assert!(kept_indices(0, 3).is_empty());
    }

    #[test]
    fn malformed_input_is_a_parse_error() {
        assert!(parse_diagram("a,b\n1,2\n").is_err());
        let bad = "param,branch,state_1,state_2,stability,bifurcation_kind\n1,upper,0,0,saddle,\n";
        assert!(matches!(parse_diagram(bad), Err(Error::Parse(_))));
        assert!(parse_trajectory("t,state_1\nx,1\n").is_err());
    }
}

//! Recomputes every compared cell of the published tables.

use rayon::prelude::*;

use crate::equilibrium::{all_equilibria, turning_point};
use crate::error::Result;
use crate::model::{presets, Model, StateVector};
use crate::normal_form::hopf_data;
use crate::odesim::{bistability_probe, simulate, DetectionTolerances, IntegratorConfig, VerdictKind};
use crate::scan::{find_hopf, find_hopf_with, find_transcritical, BifurcationKind, BifurcationPoint, HopfSearch};
use crate::spectral::h_negativity_intervals;

use super::golden::{Golden, Scenario, Table4Row};
use super::{Cell, RowReport, TableId, TableReport, Tolerance, Value};

/// Parameter value used to build the models; none of the compared cells
/// depend on it.
const T1_LAMBDA: f64 = 9.8;
const T2_B: f64 = 0.06;

#[derive(Clone, Debug, PartialEq)]
pub struct ReproduceOptions {
    /// Restrict to one case number.
    pub case: Option<u32>,
    /// Divides the integrator tolerances of the simulated cells.
    pub tightening: f64,
    pub detection: DetectionTolerances,
}

impl Default for ReproduceOptions {
    fn default() -> Self {
        Self {
            case: None,
            tightening: 1.0,
            detection: DetectionTolerances::default(),
        }
    }
}

pub fn reproduce(golden: &Golden, table: TableId, opts: &ReproduceOptions) -> Result<TableReport> {
    let keep = |c: u32| opts.case.is_none_or(|k| k == c);
    let rows = match table {
        TableId::T1 => golden
            .t1
            .cases
            .par_iter()
            .filter(|c| keep(c.case))
            .map(|c| t1_row(golden, c, opts))
            .collect::<Result<Vec<_>>>()?,
        TableId::T2 => golden
            .t2
            .cases
            .par_iter()
            .filter(|c| keep(c.case))
            .map(|c| t2_row(golden, c, opts))
            .collect::<Result<Vec<_>>>()?,
        TableId::T4 => t4_rows(golden, &keep)?,
    };
    Ok(TableReport { table, rows })
}

fn pair(bp: &BifurcationPoint, idx: usize) -> [f64; 2] {
    [bp.param_value, bp.state[idx]]
}

fn hopf_only(points: Vec<BifurcationPoint>) -> Vec<BifurcationPoint> {
    points.into_iter().filter(|p| p.kind == BifurcationKind::Hopf).collect()
}

/// Label of the long-time behaviour in a scenario: `bistable`,
/// `monostable`, a verdict label, or `equilibrium:<branch>`. Without a
/// scenario the label only states whether a feasible Hopf point exists.
fn dynamics(model: &Model, scenario: Option<&Scenario>, opts: &ReproduceOptions) -> Result<String> {
    let Some(sc) = scenario else {
        let any = !hopf_only(find_hopf(model)?).is_empty();
        return Ok(if any { "hopf_present" } else { "no_oscillation" }.to_string());
    };
    let cfg = IntegratorConfig::for_model(model.id()).tightened(opts.tightening);
    let ics: Vec<StateVector> = sc.ics.iter().map(|v| StateVector::new(v.clone())).collect();
    if ics.len() > 1 {
        let r = bistability_probe(model, sc.param, &ics, &cfg, &opts.detection)?;
        return Ok(match r.bistable {
            Some(true) => "bistable",
            Some(false) => "monostable",
            None => "undecided",
        }
        .to_string());
    }
    let (_, v) = simulate(model, sc.param, &ics[0], &cfg, &opts.detection)?;
    Ok(match v.kind {
        VerdictKind::Equilibrium { index } => {
            let eq = all_equilibria(&model.with_parameter(sc.param)?)?;
            format!("equilibrium:{}", eq[index].branch.as_str())
        }
        k => k.label().to_string(),
    })
}

fn t1_row(golden: &Golden, c: &super::golden::Table1Case, opts: &ReproduceOptions) -> Result<RowReport> {
    let t = &golden.t1.tolerance;
    let m = Model::new(presets::sir_treatment(c.k, T1_LAMBDA))?;
    let idx = m.id().infected_index();
    let mut cells = Vec::new();

    let ts = find_transcritical(&m);
    cells.push(Cell::new(
        "transcritical",
        Value::Pair(golden.t1.transcritical),
        Value::Pair(pair(&ts, idx)),
        Tolerance::Abs { tol: t.transcritical },
    ));

    let tp = turning_point(&m)?;
    let turning = if tp.exists { Value::Pair([tp.param_value, tp.state[idx]]) } else { Value::Absent };
    cells.push(Cell::new(
        "turning",
        c.turning.map_or(Value::Absent, Value::Pair),
        turning,
        Tolerance::Abs { tol: t.turning },
    ));

    let all = h_negativity_intervals(m.params(), true)?;
    let (shown, beyond): (Vec<_>, Vec<_>) = all.into_iter().partition(|iv| iv.0 < golden.t1.h_window);
    let mut h = Cell::new(
        "h1_negative",
        Value::Intervals(c.h_negative.clone()),
        Value::Intervals(shown.iter().map(|&(a, b)| [a, b]).collect()),
        Tolerance::Abs { tol: t.h_endpoint },
    );
    if !beyond.is_empty() {
        let iv: Vec<[f64; 2]> = beyond.iter().map(|&(a, b)| [a, b]).collect();
        h = h.with_note(format!("beyond the tabulated range: {}", Value::Intervals(iv)));
    }
    cells.push(h);

    let hopf = hopf_only(find_hopf_with(&m, HopfSearch { include_infeasible: true, ..Default::default() })?);
    let mut cell = Cell::new(
        "hopf",
        Value::Pairs(c.hopf.clone()),
        Value::Pairs(hopf.iter().map(|p| pair(p, idx)).collect()),
        Tolerance::Abs { tol: t.hopf },
    );
    if hopf.iter().any(|p| !p.state.feasible()) {
        cell = cell.with_note("includes points on the infeasible branch");
    }
    cells.push(cell);

    cells.push(Cell::new(
        "dynamics",
        Value::Label(c.dynamics.clone()),
        Value::Label(dynamics(&m, c.scenario.as_ref(), opts)?),
        Tolerance::Exact,
    ));
    Ok(RowReport { case: c.case, label: c.case.to_string(), cells })
}

fn t2_row(golden: &Golden, c: &super::golden::Table2Case, opts: &ReproduceOptions) -> Result<RowReport> {
    let t = &golden.t2.tolerance;
    let m = Model::new(presets::inhost(c.a, T2_B))?;
    let idx = m.id().infected_index();
    let point_tol = Tolerance::Point { param: t.point_param, state: t.point_state };
    let mut cells = Vec::new();

    let ts = find_transcritical(&m);
    cells.push(Cell::new(
        "transcritical",
        Value::Pair(golden.t2.transcritical),
        Value::Pair(pair(&ts, idx)),
        if t.transcritical == 0.0 { Tolerance::Exact } else { Tolerance::Abs { tol: t.transcritical } },
    ));

    let tp = turning_point(&m)?;
    let turning = if tp.exists { Value::Pair([tp.param_value, tp.state[idx]]) } else { Value::Absent };
    cells.push(Cell::new(
        "turning",
        Value::Pair(c.turning),
        turning,
        Tolerance::Abs { tol: t.turning },
    ));

    let h = h_negativity_intervals(m.params(), true)?;
    cells.push(Cell::new(
        "h2_negative",
        Value::Intervals(vec![c.h_negative]),
        Value::Intervals(h.iter().map(|&(a, b)| [a, b]).collect()),
        Tolerance::Abs { tol: t.h_endpoint },
    ));

    let found = find_hopf(&m)?;
    for i in 0..c.points.len().max(found.len()) {
        let expected = c.points.get(i).map_or(Value::Absent, |p| Value::Marked {
            at: p.at,
            kind: p.kind.clone(),
        });
        let computed = found.get(i).map_or(Value::Absent, |p| Value::Marked {
            at: pair(p, idx),
            kind: p.kind.as_str().to_string(),
        });
        cells.push(Cell::new(format!("point_{}", i + 1), expected, computed, point_tol));
    }

    cells.push(Cell::new(
        "dynamics",
        Value::Label(c.dynamics.clone()),
        Value::Label(dynamics(&m, c.scenario.as_ref(), opts)?),
        Tolerance::Exact,
    ));
    Ok(RowReport { case: c.case, label: c.case.to_string(), cells })
}

fn t4_rows(golden: &Golden, keep: &dyn Fn(u32) -> bool) -> Result<Vec<RowReport>> {
    // rows of a case are matched, in order, to the Hopf points of that case
    let mut jobs: Vec<(&Table4Row, usize, String)> = Vec::new();
    for (i, r) in golden.t4.rows.iter().enumerate() {
        if !keep(r.case) {
            continue;
        }
        let same: Vec<usize> = golden
            .t4
            .rows
            .iter()
            .enumerate()
            .filter(|(_, o)| o.case == r.case)
            .map(|(j, _)| j)
            .collect();
        let rank = same.iter().position(|&j| j == i).unwrap_or(0);
        let label = if same.len() > 1 {
            format!("{}{}", r.case, (b'a' + rank as u8) as char)
        } else {
            r.case.to_string()
        };
        jobs.push((r, rank, label));
    }
    jobs.par_iter().map(|(r, rank, label)| t4_row(golden, r, *rank, label)).collect()
}

fn t4_row(golden: &Golden, r: &Table4Row, rank: usize, label: &str) -> Result<RowReport> {
    let t = &golden.t4.tolerance;
    let m = Model::new(presets::inhost(r.a, T2_B))?;
    let idx = m.id().infected_index();
    let hopf = hopf_only(find_hopf(&m)?);
    let data = hopf.get(rank).map(|bp| hopf_data(&m, bp)).transpose()?;
    let (point, d, a, stab, class) = match &data {
        Some(h) => (
            Value::Pair([h.param_value, h.state[idx]]),
            Value::Number(h.d),
            Value::Number(h.a),
            Value::Label(
                match h.cycle_stability {
                    crate::normal_form::CycleStability::Stable => "stable",
                    crate::normal_form::CycleStability::Unstable => "unstable",
                }
                .to_string(),
            ),
            Value::Label(h.class.label().to_string()),
        ),
        None => (Value::Absent, Value::Absent, Value::Absent, Value::Absent, Value::Absent),
    };
    let cells = vec![
        Cell::new(
            "hopf",
            Value::Pair(r.hopf),
            point,
            Tolerance::Point { param: t.point_param, state: t.point_state },
        ),
        Cell::new("d", Value::Number(r.d), d, Tolerance::Rel { tol: t.d_rel }),
        Cell::new("a", Value::Number(r.lyapunov), a, Tolerance::Rel { tol: t.a_rel }),
        Cell::new("cycle_stability", Value::Label(r.stability.clone()), stab, Tolerance::Exact),
        Cell::new("class", Value::Label(r.class.clone()), class, Tolerance::Exact),
    ];
    Ok(RowReport { case: r.case, label: label.to_string(), cells })
}

/// Transcritical, fold and Hopf points of the three-compartment autoimmune
/// model, and the recurrence run past the Hopf point.
pub fn reproduce_autoimmune(golden: &Golden, opts: &ReproduceOptions) -> Result<RowReport> {
    let g = &golden.autoimmune;
    let m = Model::new(presets::autoimmune_3d(1000.0))?;
    let idx = m.id().infected_index();
    let mut cells = vec![Cell::new(
        "transcritical",
        Value::Number(g.transcritical),
        Value::Number(find_transcritical(&m).param_value),
        Tolerance::Abs { tol: g.transcritical_tol },
    )];

    let tp = turning_point(&m)?;
    cells.push(Cell::new(
        "fold",
        Value::Pair(g.fold),
        if tp.exists { Value::Pair([tp.param_value, tp.state[idx]]) } else { Value::Absent },
        Tolerance::Abs { tol: g.fold_tol },
    ));

    let hopf = hopf_only(find_hopf(&m)?);
    cells.push(Cell::new(
        "hopf",
        Value::Pairs(vec![g.hopf]),
        Value::Pairs(hopf.iter().map(|p| pair(p, idx)).collect()),
        Tolerance::Rel { tol: g.hopf_rel },
    ));

    let computed = match hopf.first() {
        Some(h) => {
            let sc = Scenario {
                param: h.param_value + g.recurrence_offset,
                ics: vec![g.recurrence_ic.clone()],
            };
            Value::Label(dynamics(&m, Some(&sc), opts)?)
        }
        None => Value::Absent,
    };
    cells.push(Cell::new("dynamics", Value::Label("recurrent".into()), computed, Tolerance::Exact));
    Ok(RowReport { case: 0, label: "autoimmune".into(), cells })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn case_filter_selects_split_rows() {
        let g = Golden::embedded();
        let opts = ReproduceOptions { case: Some(6), ..Default::default() };
        let r = reproduce(&g, TableId::T4, &opts).unwrap();
        let labels: Vec<&str> = r.rows.iter().map(|r| r.label.as_str()).collect();
        assert_eq!(labels, ["6a", "6b"]);
        assert!(r.pass(), "{:?}", r.summary_lines());
    }

    #[test]
    fn missing_hopf_fails_the_row() {
        let mut g = Golden::embedded();
        // Case 8 has no Hopf point at all
        g.t4.rows[0].a = 0.03;
        let opts = ReproduceOptions { case: Some(1), ..Default::default() };
        let r = reproduce(&g, TableId::T4, &opts).unwrap();
        assert!(!r.pass());
        assert_eq!(r.rows[0].cells[0].computed, Value::Absent);
    }
}

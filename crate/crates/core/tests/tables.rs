mod common;

use common::hopf_set_matches_scan;
use epibif::equilibrium::infected_equilibria;
use epibif::model::presets;
use epibif::odesim::{effective_config, integrate, simulate, DetectionTolerances, IntegratorConfig, VerdictKind};
use epibif::report::{reproduce, reproduce_autoimmune, Golden, ReproduceOptions, TableId};
use epibif::{Model, StateVector};

fn assert_table(table: TableId, opts: &ReproduceOptions) {
    let report = reproduce(&Golden::embedded(), table, opts).unwrap();
    let failing: Vec<String> = report.rows.iter().filter(|r| !r.pass()).map(|r| r.summary_line(table.as_str())).collect();
    assert!(failing.is_empty(), "{failing:#?}");
}

#[test]
fn table_one_reproduces() {
    assert_table(TableId::T1, &ReproduceOptions::default());
}

#[test]
fn table_two_reproduces() {
    assert_table(TableId::T2, &ReproduceOptions::default());
}

#[test]
fn table_four_reproduces() {
    assert_table(TableId::T4, &ReproduceOptions::default());
}

#[test]
fn autoimmune_points_reproduce() {
    let row = reproduce_autoimmune(&Golden::embedded(), &ReproduceOptions::default()).unwrap();
    assert!(row.pass(), "{}", row.summary_line("autoimmune"));
}

#[test]
fn verdicts_survive_tighter_tolerances() {
    let opts = ReproduceOptions { tightening: 10.0, ..Default::default() };
    assert_table(TableId::T1, &opts);
    assert_table(TableId::T2, &opts);
    let row = reproduce_autoimmune(&Golden::embedded(), &opts).unwrap();
    assert!(row.pass(), "{}", row.summary_line("autoimmune"));
}

#[test]
fn dense_trace_scan_matches_hopf_set() {
    let g = Golden::embedded();
    for c in &g.t1.cases {
        hopf_set_matches_scan(presets::sir_treatment(c.k, 9.8), 500.0).unwrap();
    }
    for c in &g.t2.cases {
        hopf_set_matches_scan(presets::inhost(c.a, 0.06), 5.0).unwrap();
    }
}

/// Between the transcritical point and the upper Hopf point, recurrence in
/// cases 2 to 6 does not depend on starting far from the infected
/// equilibrium. The case 3 scenario lies beyond its (subcritical) Hopf point, where
/// the upper equilibrium is locally stable, so it drops out.
#[test]
fn inhost_recurrence_from_near_equilibrium() {
    let g = Golden::embedded();
    let tol = DetectionTolerances::default();
    let mut checked = 0;
    for c in g.t2.cases.iter().filter(|c| (2..=6).contains(&c.case)) {
        let sc = c.scenario.as_ref().unwrap();
        let b_h = c.points.iter().map(|p| p.at[0]).fold(f64::NAN, f64::max);
        if !(g.t2.transcritical[0] < sc.param && sc.param < b_h) {
            continue;
        }
        checked += 1;
        let m = Model::new(presets::inhost(c.a, sc.param)).unwrap();
        let eq = infected_equilibria(&m).unwrap();
        let upper = eq.iter().filter(|e| e.feasible).max_by(|a, b| a.state[1].total_cmp(&b.state[1])).unwrap();
        let ic = StateVector::new(upper.state.as_slice().iter().map(|v| v * 1.01).collect());
        let cfg = IntegratorConfig::for_model(m.id());
        let (_, v) = simulate(&m, sc.param, &ic, &cfg, &tol).unwrap();
        assert!(matches!(v.kind, VerdictKind::Recurrent { .. }), "case {}: {:?}", c.case, v.kind);
    }
    assert_eq!(checked, 4);
}

/// Halving both tolerances moves the terminal state of every table
/// scenario run by less than 1e-4, relative to its largest component.
#[test]
fn halving_tolerances_barely_moves_terminal_state() {
    let g = Golden::embedded();
    let mut runs = Vec::new();
    for c in &g.t1.cases {
        if let Some(sc) = &c.scenario {
            let m = Model::new(presets::sir_treatment(c.k, sc.param)).unwrap();
            runs.extend(sc.ics.iter().map(|ic| (m, sc.param, ic.clone())));
        }
    }
    for c in &g.t2.cases {
        if let Some(sc) = &c.scenario {
            let m = Model::new(presets::inhost(c.a, sc.param)).unwrap();
            runs.extend(sc.ics.iter().map(|ic| (m, sc.param, ic.clone())));
        }
    }
    for (m, p, ic) in runs {
        let cfg = effective_config(&m, p, &IntegratorConfig::for_model(m.id())).unwrap();
        let half = IntegratorConfig { rtol: cfg.rtol / 2.0, atol: cfg.atol / 2.0, ..cfg.clone() };
        let ic = StateVector::new(ic);
        let a = integrate(&m, p, &ic, &cfg).unwrap();
        let b = integrate(&m, p, &ic, &half).unwrap();
        let (x, y) = (a.final_state(), b.final_state());
        let diff = (0..x.len()).map(|i| (x[i] - y[i]).abs()).fold(0.0, f64::max);
        assert!(diff < 1e-4 * x.norm_inf(), "{:?} from {:?}: {:?} vs {:?}", m.params(), ic, x, y);
    }
}

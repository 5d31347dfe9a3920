use std::path::Path;

use epibif::equilibrium::all_equilibria;
use epibif::normal_form::{hopf_data, simulation_probe};
use epibif::odesim::{bistability_probe, simulate, VerdictKind};
use epibif::report::{
    emit_diagram, emit_trajectory, reproduce, reproduce_autoimmune, rows_to_csv, write_atomic, Golden,
    ReproduceOptions, TableId, TableReport, Value,
};
use epibif::scan::{bifurcation_points, find_hopf, sweep_branch, BifurcationKind, BranchDiagram, HopfSearch, Spacing};
use epibif::{EquilibriumPoint, HopfData, Model};

use crate::config::{Command, RunConfig};
use crate::Failure;

type Outcome = (Vec<String>, Option<Failure>);

pub fn execute(cfg: &RunConfig, out: &Path, strict: bool) -> Result<Outcome, Failure> {
    match cfg.command {
        Command::Equilibria => equilibria(cfg, out),
        Command::Sweep => sweep(cfg, out, false),
        Command::Diagram => sweep(cfg, out, true),
        Command::Hopf => hopf(cfg, out),
        Command::Normalform => normalform(cfg, out),
        Command::Simulate => run_simulation(cfg, out, strict),
        Command::Classify => classify(cfg, out, strict),
        Command::Reproduce => run_reproduce(cfg, out, strict),
    }
}

fn fmt_state(v: &[f64]) -> String {
    let parts: Vec<String> = v.iter().map(|x| format!("{x:.6}")).collect();
    format!("({})", parts.join(", "))
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn write_csv(path: &Path, header: Vec<String>, rows: Vec<Vec<String>>) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| Failure::Numerical(format!("io error on {}: {e}", path.display()));
    w.write_record(&header).map_err(io)?;
    for r in rows {
        w.write_record(&r).map_err(io)?;
    }
    let bytes = w
        .into_inner()
        .map_err(|e| Failure::Numerical(format!("io error on {}: {e}", path.display())))?;
    Ok(write_atomic(path, &bytes)?)
}

fn state_header(model: &Model) -> impl Iterator<Item = String> {
    (1..=model.dimension()).map(|i| format!("state_{i}"))
}

fn equilibria(cfg: &RunConfig, out: &Path) -> Result<Outcome, Failure> {
    let m = cfg.model();
    let p = m.parameter();
    let d = sweep_branch(m, p, p, 1, Spacing::Linear)?;
    let path = out.join("equilibria.csv");
    emit_diagram(&d, &path)?;
    let mut lines: Vec<String> = d
        .samples
        .iter()
        .map(|s| {
            format!(
                "{} {} {} {}",
                m.id(),
                s.point.branch.as_str(),
                fmt_state(s.point.state.as_slice()),
                s.stability.class.as_str()
            )
        })
        .collect();
    lines.push(format!("wrote {}", path.display()));
    Ok((lines, None))
}

fn sweep(cfg: &RunConfig, out: &Path, with_points: bool) -> Result<Outcome, Failure> {
    let m = cfg.model();
    let [lo, hi] = cfg.options.range.expect("validated");
    let samples = cfg.options.samples.unwrap_or(201);
    let spacing = cfg.options.spacing.unwrap_or(Spacing::Linear);
    let mut d = sweep_branch(m, lo, hi, samples, spacing)?;
    let mut lines = Vec::new();
    let name = if with_points {
        for a in &d.points {
            lines.push(format!(
                "{} at {} state {} ({})",
                a.point.kind.as_str(),
                a.point.param_value,
                fmt_state(a.point.state.as_slice()),
                a.branch.as_str()
            ));
        }
        "diagram.csv"
    } else {
        d.points.clear();
        "sweep.csv"
    };
    let path = out.join(name);
    emit_diagram(&d, &path)?;
    lines.push(format!("{} rows over [{lo}, {hi}]; wrote {}", d.samples.len() + d.points.len(), path.display()));
    Ok((lines, None))
}

fn hopf(cfg: &RunConfig, out: &Path) -> Result<Outcome, Failure> {
    let m = cfg.model();
    let opts = HopfSearch {
        include_infeasible: cfg.options.include_infeasible.unwrap_or(false),
        ..Default::default()
    };
    let points = bifurcation_points(m, opts)?;
    let mut lines: Vec<String> = points
        .iter()
        .map(|a| {
            let mut l = format!(
                "{} at {} state {}",
                a.point.kind.as_str(),
                a.point.param_value,
                fmt_state(a.point.state.as_slice())
            );
            if let Some(w) = a.point.omega_c {
                l.push_str(&format!(" omega_c {w}"));
            }
            if !a.point.state.feasible() {
                l.push_str(" (infeasible)");
            }
            l
        })
        .collect();
    if !points.iter().any(|a| a.point.kind == BifurcationKind::Hopf) {
        lines.push("no Hopf point".into());
    }
    let range = (
        points.first().map_or(0.0, |a| a.point.param_value),
        points.last().map_or(0.0, |a| a.point.param_value),
    );
    let d = BranchDiagram { samples: Vec::new(), points, range };
    let path = out.join("hopf.csv");
    emit_diagram(&d, &path)?;
    lines.push(format!("wrote {}", path.display()));
    Ok((lines, None))
}

fn normalform(cfg: &RunConfig, out: &Path) -> Result<Outcome, Failure> {
    let m = cfg.model();
    let hopfs: Vec<_> = find_hopf(m)?.into_iter().filter(|p| p.kind == BifurcationKind::Hopf).collect();
    let mut header = vec!["param".to_string()];
    header.extend(state_header(m));
    header.extend(["omega_c", "d", "a", "class", "criticality", "method"].map(String::from));
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for bp in &hopfs {
        let mut row = vec![num(bp.param_value)];
        row.extend(bp.state.as_slice().iter().map(|&v| num(v)));
        row.push(bp.omega_c.map_or(String::new(), num));
        if m.dimension() == 2 {
            let h: HopfData = hopf_data(m, bp)?;
            let crit = format!("{:?}", h.criticality).to_lowercase();
            lines.push(format!(
                "hopf at {} d {:.6e} a {:.6e} class ({}) {crit}",
                h.param_value,
                h.d,
                h.a,
                h.class.label()
            ));
            row.extend([num(h.d), num(h.a), h.class.label().to_string(), crit, "normal_form".into()]);
        } else {
            let probe = simulation_probe(m, bp, &cfg.integrator(m))?;
            let crit = probe
                .criticality
                .map_or("undecided".to_string(), |c| format!("{c:?}").to_lowercase());
            lines.push(format!(
                "hopf at {} {crit} from simulation (unstable for p {} p_H)",
                bp.param_value,
                if probe.unstable_side > 0.0 { ">" } else { "<" }
            ));
            row.extend([String::new(), String::new(), String::new(), crit, "simulation".into()]);
        }
        rows.push(row);
    }
    if hopfs.is_empty() {
        lines.push("no Hopf point".into());
    }
    let path = out.join("normal_form.csv");
    write_csv(&path, header, rows)?;
    lines.push(format!("wrote {}", path.display()));
    Ok((lines, None))
}

fn describe(v: &VerdictKind, eq: &[EquilibriumPoint]) -> String {
    match v {
        VerdictKind::Equilibrium { index } => match eq.get(*index) {
            Some(e) => format!("equilibrium ({} {})", e.branch.as_str(), fmt_state(e.state.as_slice())),
            None => format!("equilibrium (#{index})"),
        },
        VerdictKind::LimitCycle { period, mean_amplitude } => {
            format!("limit_cycle (period {period:.4}, amplitude {mean_amplitude:.4e})")
        }
        VerdictKind::Recurrent { episodes, quiescent_fraction } => {
            format!("recurrent ({episodes} episodes, quiescent fraction {quiescent_fraction:.3})")
        }
        VerdictKind::Undecided => "undecided".into(),
    }
}

fn run_simulation(cfg: &RunConfig, out: &Path, strict: bool) -> Result<Outcome, Failure> {
    let m = cfg.model();
    let (tr, v) = simulate(m, m.parameter(), &cfg.ic(), &cfg.integrator(m), &cfg.detection())?;
    let eq = all_equilibria(m)?;
    let path = out.join("trajectory.csv");
    emit_trajectory(&tr, &path, cfg.options.downsample.unwrap_or(1))?;
    let t_end = tr.times.last().copied().unwrap_or(0.0);
    let lines = vec![
        format!("verdict: {}", describe(&v.kind, &eq)),
        format!("{} samples to t = {t_end}; wrote {}", tr.len(), path.display()),
    ];
    let failure = (strict && v.kind == VerdictKind::Undecided)
        .then(|| Failure::Numerical(format!("simulate: verdict undecided at t = {t_end}")));
    Ok((lines, failure))
}

fn classify(cfg: &RunConfig, out: &Path, strict: bool) -> Result<Outcome, Failure> {
    let m = cfg.model();
    let p = m.parameter();
    let r = bistability_probe(m, p, &cfg.ics(), &cfg.integrator(m), &cfg.detection())?;
    let eq = all_equilibria(m)?;
    let mut header = vec!["ic".to_string()];
    header.extend(state_header(m));
    header.extend(["verdict".to_string(), "detail".to_string()]);
    let mut rows = Vec::new();
    let mut lines = Vec::new();
    for (i, (ic, v)) in r.verdicts.iter().enumerate() {
        let mut row = vec![(i + 1).to_string()];
        row.extend(ic.as_slice().iter().map(|&x| num(x)));
        row.extend([v.kind.label().to_string(), describe(&v.kind, &eq)]);
        rows.push(row);
        lines.push(format!("ic {} {}: {}", i + 1, fmt_state(ic.as_slice()), describe(&v.kind, &eq)));
    }
    lines.push(format!(
        "bistable: {}",
        match r.bistable {
            Some(true) => "yes",
            Some(false) => "no",
            None => "inconclusive",
        }
    ));
    let path = out.join("classify.csv");
    write_csv(&path, header, rows)?;
    lines.push(format!("wrote {}", path.display()));
    let failure = (strict && r.bistable.is_none())
        .then(|| Failure::Numerical("classify: a run ended undecided".into()));
    Ok((lines, failure))
}

fn dynamics_labels(r: &TableReport) -> Vec<(String, Value)> {
    r.rows
        .iter()
        .flat_map(|row| {
            row.cells
                .iter()
                .filter(|c| c.column == "dynamics")
                .map(|c| (row.label.clone(), c.computed.clone()))
        })
        .collect()
}

fn run_reproduce(cfg: &RunConfig, out: &Path, strict: bool) -> Result<Outcome, Failure> {
    let golden = match &cfg.options.golden {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| Failure::Config(format!("key `options.golden`: cannot read {}: {e}", path.display())))?;
            Golden::parse(&text).map_err(|e| Failure::Config(format!("key `options.golden`: {e}")))?
        }
        None => Golden::embedded(),
    };
    let opts = ReproduceOptions { case: cfg.options.case, ..Default::default() };
    let tables: Vec<TableId> = match &cfg.options.table {
        Some(t) => vec![TableId::parse(t).expect("validated")],
        None => TableId::ALL.to_vec(),
    };
    let mut lines = Vec::new();
    let mut failed = Vec::new();
    for t in &tables {
        let r = reproduce(&golden, *t, &opts)?;
        if r.rows.is_empty() {
            return Err(Failure::Config(format!("key `case`: table {t} has no case {}", opts.case.unwrap_or(0))));
        }
        let path = out.join(format!("{t}_report.csv"));
        write_atomic(&path, r.to_csv()?.as_bytes())?;
        lines.extend(r.summary_lines());
        if !r.pass() {
            failed.push(t.to_string());
        }
        if strict {
            let tight = reproduce(&golden, *t, &ReproduceOptions { tightening: 10.0, ..opts.clone() })?;
            for ((case, a), (_, b)) in dynamics_labels(&r).into_iter().zip(dynamics_labels(&tight)) {
                if a != b {
                    lines.push(format!("{t} case {case}: dynamics changed under 10x tighter tolerances: {a} -> {b}"));
                    failed.push(format!("{t} case {case} (tolerance sensitivity)"));
                }
            }
        }
        lines.push(format!("wrote {}", path.display()));
    }
    if cfg.options.table.is_none() && cfg.options.case.is_none() {
        let row = reproduce_autoimmune(&golden, &opts)?;
        let path = out.join("autoimmune_report.csv");
        write_atomic(&path, rows_to_csv(std::slice::from_ref(&row))?.as_bytes())?;
        lines.push(row.summary_line("autoimmune"));
        if !row.pass() {
            failed.push("autoimmune".into());
        }
        lines.push(format!("wrote {}", path.display()));
    }
    let failure = (!failed.is_empty()).then(|| Failure::Mismatch(failed.join(", ")));
    Ok((lines, failure))
}

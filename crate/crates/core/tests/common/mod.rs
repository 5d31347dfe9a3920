//! Checks shared by the property tests and the acceptance run.
#![allow(dead_code)]
// negated comparisons also reject NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use epibif::equilibrium::{all_equilibria, branch_relation, infected_equilibria, lift};
use epibif::incidence::{ray_intersections, GridSpec, Incidence};
use epibif::model::presets;
use epibif::scan::{find_hopf, find_hopf_with, HopfSearch};
use epibif::spectral::CharPoly;
use epibif::{Model, ModelId, ParameterSet, StateVector};

pub type Check = Result<(), String>;

pub fn bases() -> [ParameterSet; 5] {
    [
        presets::sir_concave(0.01, 9.8),
        presets::sir_treatment(0.02, 10.0),
        presets::inhost(0.6, 0.06),
        presets::autoimmune_2d(1500.0),
        presets::autoimmune_3d(1500.0),
    ]
}

pub const MAX_FIELDS: usize = 17;

/// Every field of `base` multiplied by its own factor (expected in `[0.5, 1.5]`).
pub fn perturbed(base: ParameterSet, factors: &[f64]) -> Option<Model> {
    let fields: Vec<(&str, f64)> = base
        .fields()
        .into_iter()
        .zip(factors.iter().cycle())
        .map(|((k, v), f)| (k, v * f))
        .collect();
    let ps = ParameterSet::from_fields(base.model_id(), fields).ok()?;
    Model::new(ps).ok()
}

fn max_entry(m: &Model, x: &StateVector) -> f64 {
    let j = m.jacobian(x).unwrap();
    let n = m.dimension();
    (0..n)
        .flat_map(|r| (0..n).map(move |c| (r, c)))
        .map(|(r, c)| j.get(r, c).abs())
        .fold(0.0, f64::max)
}

/// Field residual at every equilibrium, against the size of the field's terms.
pub fn residuals(m: &Model) -> Check {
    for e in all_equilibria(m).map_err(|e| e.to_string())? {
        if m.check_domain(e.state.as_slice()).is_err() {
            continue;
        }
        let r = m.rhs(&e.state).map_err(|e| e.to_string())?;
        let scale = 1f64.max(m.parameter().abs()).max(max_entry(m, &e.state) * e.state.norm_inf());
        if !(r.norm_inf() < 1e-9 * scale) {
            return Err(format!("{:?} at {:?}: residual {:?}", m.params(), e.state, r));
        }
    }
    Ok(())
}

/// State in the positive orthant scaled to the model's typical magnitudes.
pub fn sample_state(m: &Model, unit: &[f64]) -> StateVector {
    let mut x = unit[..m.dimension()].to_vec();
    if matches!(m.id(), ModelId::Autoimmune2d | ModelId::Autoimmune3d) {
        for v in &mut x[1..] {
            *v *= 400.0;
        }
    }
    StateVector::new(x)
}

pub fn jacobian_vs_differences(m: &Model, x: &StateVector) -> Check {
    let n = m.dimension();
    let j = m.jacobian(x).map_err(|e| e.to_string())?;
    let norm = max_entry(m, x);
    for c in 0..n {
        let h = 1e-6 * x[c].abs().max(1e-3);
        let (mut xp, mut xm) = (x.0.clone(), x.0.clone());
        xp[c] += h;
        xm[c] -= h;
        let (mut fp, mut fm) = (vec![0.0; n], vec![0.0; n]);
        m.rhs_into(&xp, &mut fp);
        m.rhs_into(&xm, &mut fm);
        for r in 0..n {
            let fd = (fp[r] - fm[r]) / (2.0 * h);
            if !((j.get(r, c) - fd).abs() <= 1e-6 * norm) {
                return Err(format!("{:?} at {:?}: J[{r}][{c}] = {} vs {fd}", m.params(), x, j.get(r, c)));
            }
        }
    }
    Ok(())
}

/// On the planar autoimmune model the trace condition is pinned to `mu_n`
/// at every positive infected equilibrium, so no Hopf point can exist.
pub fn planar_autoimmune_trace(m: &Model) -> Check {
    let ParameterSet::Autoimmune2d(p) = *m.params() else {
        return Err("not the planar autoimmune model".into());
    };
    for e in infected_equilibria(m).map_err(|e| e.to_string())?.iter().filter(|e| e.state[0] > 0.0) {
        let cp = CharPoly::from_jacobian(&m.jacobian(&e.state).map_err(|e| e.to_string())?);
        let CharPoly::Planar { t, .. } = cp else { unreachable!() };
        if !((t - p.mu_n).abs() <= 1e-10 * p.mu_n) {
            return Err(format!("lambda_E = {}: T = {t}, mu_n = {}", p.lambda_e, p.mu_n));
        }
    }
    let h = find_hopf(m).map_err(|e| e.to_string())?;
    if !h.is_empty() {
        return Err(format!("lambda_E = {}: unexpected Hopf points {h:?}", p.lambda_e));
    }
    Ok(())
}

/// Positive intersections of the along-branch in-host incidence with the
/// unit ray, compared with the infected equilibria. Returns the number of
/// intersections, or `None` when a root is too close to a tangency or to
/// zero for the grid to resolve.
pub fn along_branch_intersections(a: f64, b: f64) -> Result<Option<usize>, String> {
    let (c, d) = (0.823, 0.057);
    let m = Model::new(presets::inhost(a, b)).map_err(|e| e.to_string())?;
    let mut roots: Vec<f64> = infected_equilibria(&m)
        .map_err(|e| e.to_string())?
        .iter()
        .map(|e| e.state[1])
        .filter(|&y| y > 0.0)
        .collect();
    roots.sort_by(f64::total_cmp);
    let f = Incidence::InhostAlongBranch { a, b, c, d };
    let grid = GridSpec { i_max: 1e2, points: 20_000 };
    if !roots.iter().all(|&y| (f.d1(y) - 1.0).abs() > 1e-3 && y > 2e-6 * grid.i_max) {
        return Ok(None);
    }
    let hits = ray_intersections(&f, 1.0, &grid);
    if hits.len() != roots.len() {
        return Err(format!("A = {a}, B = {b}: intersections {hits:?} vs roots {roots:?}"));
    }
    for (h, r) in hits.iter().zip(&roots) {
        if !((h - r).abs() < 1e-8) {
            return Err(format!("A = {a}, B = {b}: intersection {h} vs root {r}"));
        }
    }
    Ok(Some(hits.len()))
}

/// Sign changes of the trace condition along the infected branch, found on
/// a uniform grid in the infected component with a finite-difference trace.
pub fn trace_sign_brackets(params: &ParameterSet, x_max: f64, n: usize) -> Vec<(f64, f64)> {
    let trace = |x: f64| -> Option<f64> {
        let (num, den) = branch_relation(params, x);
        let p = num / den;
        if !(p > 0.0 && p.is_finite()) {
            return None;
        }
        let at = params.with_bifurcation_parameter(p);
        let m = Model::new(at).ok()?;
        let s = lift(&at, x).ok()?;
        let mut tr = 0.0;
        for k in 0..s.len() {
            let h = 1e-7 * s[k].abs().max(1e-6);
            let (mut up, mut dn) = (s.0.clone(), s.0.clone());
            up[k] += h;
            dn[k] -= h;
            let (mut fu, mut fd) = (vec![0.0; s.len()], vec![0.0; s.len()]);
            m.rhs_into(&up, &mut fu);
            m.rhs_into(&dn, &mut fd);
            tr += (fu[k] - fd[k]) / (2.0 * h);
        }
        tr.is_finite().then_some(tr)
    };
    let den_sign = |x: f64| branch_relation(params, x).1.signum();
    let xs: Vec<f64> = (1..=n).map(|i| x_max * i as f64 / n as f64).collect();
    let ts: Vec<Option<f64>> = xs.iter().map(|&x| trace(x)).collect();
    let mut out = Vec::new();
    for i in 0..n - 1 {
        if let (Some(a), Some(b)) = (ts[i], ts[i + 1]) {
            if a.signum() != b.signum() && den_sign(xs[i]) == den_sign(xs[i + 1]) {
                out.push((xs[i], xs[i + 1]));
            }
        }
    }
    out
}

/// Each bracket of the dense scan holds exactly one point from `find_hopf`
/// and vice versa.
pub fn hopf_set_matches_scan(params: ParameterSet, x_max: f64) -> Check {
    let m = Model::new(params).map_err(|e| e.to_string())?;
    let idx = m.id().infected_index();
    let found: Vec<f64> = find_hopf_with(&m, HopfSearch::default())
        .map_err(|e| e.to_string())?
        .iter()
        .map(|p| p.state[idx])
        .filter(|&x| x < x_max)
        .collect();
    let brackets = trace_sign_brackets(&params, x_max, 200_000);
    if found.len() != brackets.len() {
        return Err(format!("{params:?}: {found:?} vs brackets {brackets:?}"));
    }
    for (lo, hi) in &brackets {
        let slack = 1e-9 * hi;
        let inside = found.iter().filter(|&&x| lo - slack <= x && x <= hi + slack).count();
        if inside != 1 {
            return Err(format!("{params:?}: bracket [{lo}, {hi}] holds {inside} of {found:?}"));
        }
    }
    Ok(())
}

//! Transcritical and Hopf points along the infected branch, and sampled
//! bifurcation diagrams.
//!
//! Hopf candidates are found by eliminating the bifurcation parameter: for
//! each value `x` of the infected component the branch relation gives the
//! parameter `p̄(x)`, the lifted equilibrium, and the Hopf function of its
//! characteristic polynomial. Sign changes of that function in `x` are the
//! candidates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{
    all_equilibria, branch_parameter, branch_relation, lift, quadratic_for,
    transcritical_parameter, turning_point, Branch, EquilibriumPoint,
};
use crate::error::{Error, Result};
use crate::model::{Model, ParameterSet, StateVector};
use crate::numeric::{bisect, geomspace, linspace};
use crate::spectral::{eigenvalues, stability_at, CharPoly, StabilityReport};

/// Margin on `Δ` (or `c₁`) separating a Hopf point from a neutral saddle.
pub const HOPF_MARGIN: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BifurcationKind {
    Transcritical,
    Turning,
    Hopf,
    NeutralSaddle,
}

impl BifurcationKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BifurcationKind::Transcritical => "transcritical",
            BifurcationKind::Turning => "turning",
            BifurcationKind::Hopf => "hopf",
            BifurcationKind::NeutralSaddle => "neutral_saddle",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "transcritical" => BifurcationKind::Transcritical,
            "turning" => BifurcationKind::Turning,
            "hopf" => BifurcationKind::Hopf,
            "neutral_saddle" => BifurcationKind::NeutralSaddle,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BifurcationPoint {
    pub kind: BifurcationKind,
    pub param_value: f64,
    pub state: StateVector,
    /// Imaginary part of the critical pair; present only for Hopf points.
    pub omega_c: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HopfSearch {
    /// Also scan negative values of the infected component.
    pub include_infeasible: bool,
    pub grid_points: usize,
}

impl Default for HopfSearch {
    fn default() -> Self {
        Self {
            include_infeasible: false,
            grid_points: 4096,
        }
    }
}

pub fn find_transcritical(model: &Model) -> BifurcationPoint {
    let params = model.params();
    let ps = transcritical_parameter(params);
    let at = params.with_bifurcation_parameter(ps);
    let state = match Model::new(at) {
        Ok(m) => m.uninfected_state(),
        Err(_) => StateVector(vec![f64::NAN; model.dimension()]),
    };
    BifurcationPoint {
        kind: BifurcationKind::Transcritical,
        param_value: ps,
        state,
        omega_c: None,
    }
}

/// Fold of the infected branch as a bifurcation point, if one exists.
pub fn find_turning(model: &Model) -> Result<Option<BifurcationPoint>> {
    let tp = turning_point(model)?;
    Ok(tp.exists.then_some(BifurcationPoint {
        kind: BifurcationKind::Turning,
        param_value: tp.param_value,
        state: tp.state,
        omega_c: None,
    }))
}

/// Branch data at infected component `x`: parameter, lifted state and
/// characteristic polynomial. `None` at poles, non-positive parameter
/// values or singular lifts.
pub fn branch_point(params: &ParameterSet, x: f64) -> Option<(f64, StateVector, CharPoly)> {
    let p = branch_parameter(params, x)?;
    if p <= 0.0 {
        return None;
    }
    let at = params.with_bifurcation_parameter(p);
    let model = Model::new(at).ok()?;
    let state = lift(&at, x).ok()?;
    model.check_domain(state.as_slice()).ok()?;
    let j = model.jacobian_unchecked(state.as_slice());
    let cp = CharPoly::from_jacobian(&j);
    cp.hopf_function().is_finite().then_some((p, state, cp))
}

fn hopf_residual(cp: &CharPoly) -> f64 {
    cp.hopf_function().abs() / cp.hopf_scale()
}

pub fn find_hopf(model: &Model) -> Result<Vec<BifurcationPoint>> {
    find_hopf_with(model, HopfSearch::default())
}

pub fn find_hopf_with(model: &Model, opts: HopfSearch) -> Result<Vec<BifurcationPoint>> {
    let params = *model.params();
    let pos = geomspace(1e-6, 1e3, opts.grid_points);
    let mut grids = vec![pos.clone()];
    if opts.include_infeasible {
        grids.push(pos.iter().rev().map(|v| -v).collect());
    }
    let g = |x: f64| branch_point(&params, x).map_or(f64::NAN, |(_, _, cp)| cp.hopf_function());

    let mut out = Vec::new();
    for grid in grids {
        let vals: Vec<f64> = grid.iter().map(|&x| g(x)).collect();
        for i in 0..grid.len() - 1 {
            let (x0, x1) = (grid[i], grid[i + 1]);
            let (v0, v1) = (vals[i], vals[i + 1]);
            if !(v0.is_finite() && v1.is_finite()) || v0.signum() == v1.signum() && v0 != 0.0 {
                continue;
            }
            // a sign change of the denominator is a pole, not a root
            let d0 = branch_relation(&params, x0).1;
            let d1 = branch_relation(&params, x1).1;
            if d0.signum() != d1.signum() {
                continue;
            }
            // bisection that runs into a non-finite value has found a
            // singularity of the field, not a root
            let Ok(x) = bisect(g, x0, x1, 0.0) else {
                continue;
            };
            let Some((p, state, cp)) = polish(&params, x)? else {
                continue;
            };
            if hopf_residual(&cp) > 1e-9 {
                // jump through a singular lift rather than a genuine zero
                continue;
            }
            out.push(classify_candidate(p, state, &cp));
        }
    }
    out.sort_by(|a, b| a.param_value.total_cmp(&b.param_value));
    Ok(out)
}

fn classify_candidate(p: f64, state: StateVector, cp: &CharPoly) -> BifurcationPoint {
    let (kind, omega_c) = match *cp {
        CharPoly::Planar { delta, .. } if delta > HOPF_MARGIN => {
            (BifurcationKind::Hopf, Some(delta.sqrt()))
        }
        CharPoly::Cubic { c1, .. } if c1 > HOPF_MARGIN => (BifurcationKind::Hopf, Some(c1.sqrt())),
        _ => (BifurcationKind::NeutralSaddle, None),
    };
    BifurcationPoint {
        kind,
        param_value: p,
        state,
        omega_c,
    }
}

/// Newton polish of `{quadratic = 0, Hopf function = 0}` in `(x, p)`,
/// started from the bisected branch point.
fn polish(params: &ParameterSet, x0: f64) -> Result<Option<(f64, StateVector, CharPoly)>> {
    let Some((p0, s0, cp0)) = branch_point(params, x0) else {
        return Ok(None);
    };
    if hopf_residual(&cp0) <= 1e-11 {
        return Ok(Some((p0, s0, cp0)));
    }
    let residual = |x: f64, p: f64| -> Option<[f64; 2]> {
        let at = params.with_bifurcation_parameter(p);
        let q = quadratic_for(&at);
        let m = Model::new(at).ok()?;
        let s = lift(&at, x).ok()?;
        let cp = CharPoly::from_jacobian(&m.jacobian_unchecked(s.as_slice()));
        let qs = q.a.abs() * x * x + q.b.abs() * x.abs() + q.c.abs();
        Some([q.eval(x) / qs.max(1e-300), cp.hopf_function() / cp.hopf_scale()])
    };
    let (mut x, mut p) = (x0, p0);
    for _ in 0..100 {
        let Some(r) = residual(x, p) else { break };
        if r[1].abs() <= 1e-11 && r[0].abs() <= 1e-13 {
            break;
        }
        let hx = 1e-7 * x.abs().max(1e-8);
        let hp = 1e-7 * p.abs();
        let (Some(rxp), Some(rxm), Some(rpp), Some(rpm)) = (
            residual(x + hx, p),
            residual(x - hx, p),
            residual(x, p + hp),
            residual(x, p - hp),
        ) else {
            break;
        };
        let j = [
            [(rxp[0] - rxm[0]) / (2.0 * hx), (rpp[0] - rpm[0]) / (2.0 * hp)],
            [(rxp[1] - rxm[1]) / (2.0 * hx), (rpp[1] - rpm[1]) / (2.0 * hp)],
        ];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        if det == 0.0 || !det.is_finite() {
            break;
        }
        let dx = (r[0] * j[1][1] - r[1] * j[0][1]) / det;
        let dp = (j[0][0] * r[1] - j[1][0] * r[0]) / det;
        let (xn, pn) = (x - dx, p - dp);
        match residual(xn, pn) {
            Some(rn) if rn[1].abs() < r[1].abs() => {
                x = xn;
                p = pn;
            }
            _ => break,
        }
    }
    // keep the state on the branch: recompute the parameter from x
    let Some((p, s, cp)) = branch_point(params, x) else {
        return Ok(None);
    };
    if !s.is_finite() {
        return Err(Error::numerical(
            "find_hopf",
            format!("Newton polish left the branch near x = {x0}"),
        ));
    }
    Ok(Some((p, s, cp)))
}

/// Which infected branch the state with infected component `x` lies on at parameter `p`.
pub fn infected_branch_of(params: &ParameterSet, p: f64, x: f64) -> Branch {
    let q = quadratic_for(&params.with_bifurcation_parameter(p));
    match q.roots.len() {
        2 => {
            if (x - q.roots[1]).abs() <= (x - q.roots[0]).abs() {
                Branch::InfectedUpper
            } else {
                Branch::InfectedLower
            }
        }
        1 => Branch::DoubleRoot,
        _ if x > q.vertex() => Branch::InfectedUpper,
        _ => Branch::InfectedLower,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    Linear,
    Geometric,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchSample {
    pub param_value: f64,
    pub point: EquilibriumPoint,
    pub stability: StabilityReport,
}

/// A bifurcation point with the branch it sits on and its linearization.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedPoint {
    pub point: BifurcationPoint,
    pub branch: Branch,
    pub stability: StabilityReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BranchDiagram {
    pub samples: Vec<BranchSample>,
    pub points: Vec<AnnotatedPoint>,
    pub range: (f64, f64),
}

fn annotate(model: &Model, bp: BifurcationPoint, branch: Branch) -> Result<AnnotatedPoint> {
    let stability = match Model::new(model.params().with_bifurcation_parameter(bp.param_value)) {
        Ok(m) => stability_at(&m, &bp.state)?,
        // Points at non-positive parameter values (a turning point left of
        // zero) still have a well-defined linearization.
        Err(_) => {
            let at = Model::unchecked(model.params().with_bifurcation_parameter(bp.param_value));
            StabilityReport::from_eigenvalues(eigenvalues(&CharPoly::from_jacobian(
                &at.jacobian_unchecked(bp.state.as_slice()),
            )))
        }
    };
    Ok(AnnotatedPoint {
        point: bp,
        branch,
        stability,
    })
}

/// Transcritical, turning and Hopf-type points with their branches and
/// linearizations, ordered by parameter value.
pub fn bifurcation_points(model: &Model, opts: HopfSearch) -> Result<Vec<AnnotatedPoint>> {
    let mut points = vec![annotate(model, find_transcritical(model), Branch::Uninfected)?];
    if let Some(tp) = find_turning(model)? {
        points.push(annotate(model, tp, Branch::DoubleRoot)?);
    }
    let idx = model.id().infected_index();
    for h in find_hopf_with(model, opts)? {
        let br = infected_branch_of(model.params(), h.param_value, h.state[idx]);
        points.push(annotate(model, h, br)?);
    }
    points.sort_by(|a, b| a.point.param_value.total_cmp(&b.point.param_value));
    Ok(points)
}

/// Samples every equilibrium with its stability over `[lo, hi]` and merges
/// the bifurcation points that fall inside the range.
pub fn sweep_branch(
    model: &Model,
    lo: f64,
    hi: f64,
    samples: usize,
    spacing: Spacing,
) -> Result<BranchDiagram> {
    if samples < 1 || !(lo > 0.0 && hi >= lo) {
        return Err(Error::ContractViolation {
            operation: "sweep_branch",
            detail: format!("need 0 < lo <= hi and at least one sample, got [{lo}, {hi}] x {samples}"),
        });
    }
    let grid = if lo == hi || samples == 1 {
        vec![lo]
    } else {
        match spacing {
            Spacing::Linear => linspace(lo, hi, samples),
            Spacing::Geometric => geomspace(lo, hi, samples),
        }
    };
    let per_param: Vec<Result<Vec<BranchSample>>> = grid
        .par_iter()
        .map(|&p| {
            let m = model.with_parameter(p)?;
            all_equilibria(&m)?
                .into_iter()
                .map(|e| {
                    let stability = stability_at(&m, &e.state)?;
                    Ok(BranchSample {
                        param_value: p,
                        point: e,
                        stability,
                    })
                })
                .collect()
        })
        .collect();
    let mut out = Vec::new();
    for r in per_param {
        out.extend(r?);
    }

    let points = bifurcation_points(model, HopfSearch::default())?
        .into_iter()
        .filter(|a| a.point.param_value >= lo && a.point.param_value <= hi)
        .collect();
    Ok(BranchDiagram {
        samples: out,
        points,
        range: (lo, hi),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets::*;

    #[test]
    fn inhost_transcritical_is_d() {
        let m = Model::new(inhost(0.8, 0.03)).unwrap();
        let t = find_transcritical(&m);
        assert_eq!(t.param_value, 0.057);
        assert_eq!(t.state[1], 0.0);
    }

    #[test]
    fn inhost_case_two_candidates() {
        let m = Model::new(inhost(0.71, 0.05)).unwrap();
        let pts = find_hopf(&m).unwrap();
        assert_eq!(pts.len(), 2, "{pts:?}");
        assert_eq!(pts[0].kind, BifurcationKind::NeutralSaddle);
        assert!((pts[0].param_value - 0.0539).abs() < 1e-3);
        assert_eq!(pts[1].kind, BifurcationKind::Hopf);
        assert!((pts[1].param_value - 0.0574).abs() < 1e-3);
        assert!((pts[1].state[1] - 0.8650).abs() < 2e-3);
    }

    #[test]
    fn degenerate_interval_gives_one_sample_per_equilibrium() {
        let m = Model::new(inhost(0.03, 0.07)).unwrap();
        let d = sweep_branch(&m, 0.07, 0.07, 10, Spacing::Linear).unwrap();
        assert!(d.samples.iter().all(|s| s.param_value == 0.07));
        let n_eq = all_equilibria(&m).unwrap().len();
        assert_eq!(d.samples.len(), n_eq);
    }
}

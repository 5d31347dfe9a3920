//! Planar Hopf normal form `ṙ = d μ r + a r³` with `μ = p − p_H`.
//!
//! `d` is the speed at which the real part of the critical pair crosses
//! zero along the equilibrium branch. `a` is the cubic coefficient in the
//! coordinates `x − x̄ = P u`, `P = [Re v, −Im v]`, where `v` is the unit
//! eigenvector for `+iω`; both are computed from exact derivatives of the
//! vector field.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibrium::{infected_equilibria, turning_point};
use crate::error::{Error, Result};
use crate::model::{Jacobian, Model, StateVector};
use crate::odesim::{integrate, IntegratorConfig, HORIZON_CAP};
use crate::spectral::stability_at;
use crate::scalar::{d2_inner, d2_outer, d3, seed3, Dual, Dual2, Dual3, Scalar};
use crate::scan::{find_transcritical, find_turning, BifurcationKind, BifurcationPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum HopfClass {
    /// d > 0, a > 0
    A,
    /// d > 0, a < 0
    B,
    /// d < 0, a > 0
    C,
    /// d < 0, a < 0
    D,
}

impl HopfClass {
    pub fn label(self) -> &'static str {
        match self {
            HopfClass::A => "a",
            HopfClass::B => "b",
            HopfClass::C => "c",
            HopfClass::D => "d",
        }
    }

    /// Stability of the equilibrium for μ < 0 and μ > 0.
    pub fn equilibrium_stable(self) -> (bool, bool) {
        match self {
            HopfClass::A | HopfClass::B => (true, false),
            HopfClass::C | HopfClass::D => (false, true),
        }
    }

    /// Sign of μ on which the bifurcating cycle exists.
    pub fn cycle_side(self) -> f64 {
        match self {
            HopfClass::A | HopfClass::D => -1.0,
            HopfClass::B | HopfClass::C => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criticality {
    Supercritical,
    Subcritical,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleStability {
    Stable,
    Unstable,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HopfData {
    /// Bifurcation-parameter value at the Hopf point; μ is measured from here.
    pub param_value: f64,
    pub state: StateVector,
    pub d: f64,
    pub a: f64,
    pub omega_c: f64,
    pub class: HopfClass,
    pub criticality: Criticality,
    pub cycle_stability: CycleStability,
}

pub fn classify_hopf(d: f64, a: f64) -> Result<(HopfClass, Criticality, CycleStability)> {
    if d == 0.0 || a == 0.0 || !d.is_finite() || !a.is_finite() {
        return Err(Error::degenerate(
            "classify_hopf",
            format!("need non-zero finite coefficients, got d = {d}, a = {a}"),
        ));
    }
    let class = match (d > 0.0, a > 0.0) {
        (true, true) => HopfClass::A,
        (true, false) => HopfClass::B,
        (false, true) => HopfClass::C,
        (false, false) => HopfClass::D,
    };
    Ok(if a > 0.0 {
        (class, Criticality::Subcritical, CycleStability::Unstable)
    } else {
        (class, Criticality::Supercritical, CycleStability::Stable)
    })
}

/// Radius `√(−dμ/a)` of the bifurcating cycle, when it exists at this μ.
pub fn amplitude_estimate(h: &HopfData, mu: f64) -> Option<f64> {
    let r2 = -h.d * mu / h.a;
    (r2 > 0.0 && r2.is_finite()).then(|| r2.sqrt())
}

fn require_planar_hopf(model: &Model, bp: &BifurcationPoint, op: &'static str) -> Result<Model> {
    if model.dimension() != 2 || bp.kind != BifurcationKind::Hopf {
        return Err(Error::ContractViolation {
            operation: op,
            detail: format!("needs a planar Hopf point, got {:?} on {}", bp.kind, model.id()),
        });
    }
    model.with_parameter(bp.param_value)
}

/// `∂f/∂p` at the point.
fn param_derivative(model: &Model, x: &[f64]) -> Vec<f64> {
    let p = Dual::variable(model.parameter());
    let xs: Vec<Dual<f64>> = x.iter().map(|&v| Dual::cst(v)).collect();
    let mut out = vec![Dual::cst(0.0); x.len()];
    model.field_generic(p, &xs, &mut out);
    out.iter().map(|v| v.eps).collect()
}

/// Tangent `dx/dp = −J⁻¹ ∂f/∂p` of the equilibrium branch.
pub fn branch_tangent(model: &Model, x: &[f64]) -> Result<Vec<f64>> {
    let j = model.jacobian_unchecked(x);
    let fp = param_derivative(model, x);
    let rhs: Vec<f64> = fp.iter().map(|v| -v).collect();
    match j.solve(&rhs) {
        Some(v) if v.iter().all(|c| c.is_finite()) => Ok(v),
        _ => Err(Error::degenerate(
            "branch_tangent",
            "Jacobian is singular: a fold coincides with the point",
        )),
    }
}

/// Total derivative of `trace J(x(p), p)` along the branch.
fn trace_derivative(model: &Model, x: &[f64]) -> Result<f64> {
    let v = branch_tangent(model, x)?;
    let n = x.len();
    let p: Dual2 = Dual::new(Dual::cst(model.parameter()), Dual::cst(1.0));
    let mut total = 0.0;
    for i in 0..n {
        let xs: Vec<Dual2> = (0..n)
            .map(|m| {
                Dual::new(
                    Dual::new(x[m], if m == i { 1.0 } else { 0.0 }),
                    Dual::new(v[m], 0.0),
                )
            })
            .collect();
        let mut out = vec![Dual2::cst(0.0); n];
        model.field_generic(p, &xs, &mut out);
        total += out[i].eps.eps;
    }
    Ok(total)
}

/// `d = d(Re λ)/dμ` from implicit differentiation of the branch.
pub fn transversality_d(model: &Model, bp: &BifurcationPoint) -> Result<f64> {
    let m = require_planar_hopf(model, bp, "transversality_d")?;
    Ok(0.5 * trace_derivative(&m, bp.state.as_slice())?)
}

/// Default central-difference step for [`transversality_d_fd`]: relative
/// `1e-5`, shrunk when a fold lies closer than that.
pub fn default_d_step(model: &Model, bp: &BifurcationPoint) -> f64 {
    let base = 1e-5 * bp.param_value.abs().max(1.0);
    match turning_point(model) {
        Ok(tp) if tp.exists => base.min(1e-3 * (bp.param_value - tp.param_value).abs()),
        _ => base,
    }
}

/// Half the trace at the infected equilibrium nearest to `near`.
fn half_trace_near(model: &Model, p: f64, near: &StateVector) -> Result<f64> {
    let m = model.with_parameter(p)?;
    let eq = infected_equilibria(&m)?;
    let best = eq
        .iter()
        .min_by(|a, b| dist(&a.state, near).total_cmp(&dist(&b.state, near)))
        .ok_or_else(|| Error::numerical("transversality_d_fd", format!("no infected equilibrium at {p}")))?;
    Ok(0.5 * m.jacobian_unchecked(best.state.as_slice()).trace())
}

/// Componentwise relative distance; compartments differ by orders of magnitude.
fn dist(a: &StateVector, b: &StateVector) -> f64 {
    a.0.iter()
        .zip(&b.0)
        .map(|(x, y)| (x - y).abs() / y.abs().max(1e-12))
        .fold(0.0, f64::max)
}

/// Central finite-difference estimate of `d`, tracking the equilibrium.
pub fn transversality_d_fd(model: &Model, bp: &BifurcationPoint, step: f64) -> Result<f64> {
    require_planar_hopf(model, bp, "transversality_d_fd")?;
    let p = bp.param_value;
    let hi = half_trace_near(model, p + step, &bp.state)?;
    let lo = half_trace_near(model, p - step, &bp.state)?;
    Ok((hi - lo) / (2.0 * step))
}

/// Canonical frame `P = [Re v, −Im v]` and `ω` for the critical pair of `j`.
fn critical_frame(j: &Jacobian) -> Result<([[f64; 2]; 2], f64)> {
    let det = j.determinant();
    let tr = j.trace();
    if det <= 0.0 {
        return Err(Error::degenerate(
            "lyapunov_a",
            format!("no complex pair: det = {det}"),
        ));
    }
    let omega = (det - 0.25 * tr * tr).max(0.0).sqrt();
    let lam = Complex64::new(0.5 * tr, omega);
    let (a, b, c, d) = (j.get(0, 0), j.get(0, 1), j.get(1, 0), j.get(1, 1));
    let v = if b.abs() >= c.abs() {
        [Complex64::new(b, 0.0), lam - a]
    } else {
        [lam - d, Complex64::new(c, 0.0)]
    };
    let norm = (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
    let v = [v[0] / norm, v[1] / norm];
    // columns Re v and −Im v
    Ok(([[v[0].re, -v[0].im], [v[1].re, -v[1].im]], omega))
}

fn inverse2(p: &[[f64; 2]; 2]) -> Result<[[f64; 2]; 2]> {
    let det = p[0][0] * p[1][1] - p[0][1] * p[1][0];
    if det == 0.0 {
        return Err(Error::degenerate("lyapunov_a", "singular eigenvector frame"));
    }
    Ok([
        [p[1][1] / det, -p[0][1] / det],
        [-p[1][0] / det, p[0][0] / det],
    ])
}

fn apply(m: &[[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

/// Cubic coefficient from the partials of `(F, G)` in the canonical frame.
#[allow(clippy::too_many_arguments)]
fn gh_formula(
    omega: f64,
    fxx: f64,
    fxy: f64,
    fyy: f64,
    gxx: f64,
    gxy: f64,
    gyy: f64,
    fxxx: f64,
    fxyy: f64,
    gxxy: f64,
    gyyy: f64,
) -> f64 {
    (fxxx + fxyy + gxxy + gyyy) / 16.0
        + (fxy * (fxx + fyy) - gxy * (gxx + gyy) - fxx * gxx + fyy * gyy) / (16.0 * omega)
}

/// Exact cubic normal-form coefficient.
pub fn lyapunov_a(model: &Model, bp: &BifurcationPoint) -> Result<f64> {
    let m = require_planar_hopf(model, bp, "lyapunov_a")?;
    let x = bp.state.as_slice();
    let (p, omega) = critical_frame(&m.jacobian_unchecked(x))?;
    let pinv = inverse2(&p)?;
    let w = [[p[0][0], p[1][0]], [p[0][1], p[1][1]]];
    let param = Dual3::cst(m.parameter());
    // returns (D³f, D²f outer pair, D²f inner pair) in frame coordinates
    let probe = |i: usize, j: usize, k: usize| {
        let xs: Vec<Dual3> = (0..2)
            .map(|c| seed3(x[c], [w[i][c], w[j][c], w[k][c]]))
            .collect();
        let mut out = [Dual3::cst(0.0); 2];
        m.field_generic(param, &xs, &mut out);
        (
            apply(&pinv, [d3(&out[0]), d3(&out[1])]),
            apply(&pinv, [d2_outer(&out[0]), d2_outer(&out[1])]),
            apply(&pinv, [d2_inner(&out[0]), d2_inner(&out[1])]),
        )
    };
    let (t111, s11, _) = probe(0, 0, 0);
    let (t122, s12, s22) = probe(0, 1, 1);
    let (t112, _, _) = probe(0, 0, 1);
    let (t222, _, _) = probe(1, 1, 1);
    let a = gh_formula(
        omega, s11[0], s12[0], s22[0], s11[1], s12[1], s22[1], t111[0], t122[0], t112[1], t222[1],
    );
    if a.abs() < 1e-14 {
        return Err(Error::degenerate(
            "lyapunov_a",
            format!("cubic coefficient {a:e} vanishes (degenerate Hopf)"),
        ));
    }
    Ok(a)
}

/// Finite-difference version of [`lyapunov_a`] with frame-coordinate step `h`.
pub fn lyapunov_a_fd(model: &Model, bp: &BifurcationPoint, h: f64) -> Result<f64> {
    let m = require_planar_hopf(model, bp, "lyapunov_a_fd")?;
    let x = bp.state.as_slice();
    let (p, omega) = critical_frame(&m.jacobian_unchecked(x))?;
    let pinv = inverse2(&p)?;
    let f = |u0: f64, u1: f64| -> [f64; 2] {
        let dx = apply(&p, [u0, u1]);
        let mut out = [0.0; 2];
        m.rhs_into(&[x[0] + dx[0], x[1] + dx[1]], &mut out);
        apply(&pinv, out)
    };
    let comb = |terms: &[(f64, f64, f64)], div: f64| -> [f64; 2] {
        let mut acc = [0.0; 2];
        for &(c, a, b) in terms {
            let v = f(a * h, b * h);
            acc[0] += c * v[0];
            acc[1] += c * v[1];
        }
        [acc[0] / div, acc[1] / div]
    };
    let h2 = h * h;
    let h3 = h2 * h;
    let sxx = comb(&[(1.0, 1.0, 0.0), (-2.0, 0.0, 0.0), (1.0, -1.0, 0.0)], h2);
    let syy = comb(&[(1.0, 0.0, 1.0), (-2.0, 0.0, 0.0), (1.0, 0.0, -1.0)], h2);
    let sxy = comb(
        &[(1.0, 1.0, 1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0), (1.0, -1.0, -1.0)],
        4.0 * h2,
    );
    let txxx = comb(
        &[(1.0, 2.0, 0.0), (-2.0, 1.0, 0.0), (2.0, -1.0, 0.0), (-1.0, -2.0, 0.0)],
        2.0 * h3,
    );
    let tyyy = comb(
        &[(1.0, 0.0, 2.0), (-2.0, 0.0, 1.0), (2.0, 0.0, -1.0), (-1.0, 0.0, -2.0)],
        2.0 * h3,
    );
    // ∂x∂y² : first difference in x of the second difference in y
    let txyy = comb(
        &[
            (1.0, 1.0, 1.0),
            (-2.0, 1.0, 0.0),
            (1.0, 1.0, -1.0),
            (-1.0, -1.0, 1.0),
            (2.0, -1.0, 0.0),
            (-1.0, -1.0, -1.0),
        ],
        2.0 * h3,
    );
    let txxy = comb(
        &[
            (1.0, 1.0, 1.0),
            (-2.0, 0.0, 1.0),
            (1.0, -1.0, 1.0),
            (-1.0, 1.0, -1.0),
            (2.0, 0.0, -1.0),
            (-1.0, -1.0, -1.0),
        ],
        2.0 * h3,
    );
    Ok(gh_formula(
        omega, sxx[0], sxy[0], syy[0], sxx[1], sxy[1], syy[1], txxx[0], txyy[0], txxy[1], tyyy[1],
    ))
}

pub fn hopf_data(model: &Model, bp: &BifurcationPoint) -> Result<HopfData> {
    let d = transversality_d(model, bp)?;
    let a = lyapunov_a(model, bp)?;
    let (class, criticality, cycle_stability) = classify_hopf(d, a)?;
    let m = model.with_parameter(bp.param_value)?;
    let omega_c = bp
        .omega_c
        .unwrap_or_else(|| m.jacobian_unchecked(bp.state.as_slice()).determinant().sqrt());
    Ok(HopfData {
        param_value: bp.param_value,
        state: bp.state.clone(),
        d,
        a,
        omega_c,
        class,
        criticality,
        cycle_stability,
    })
}

/// Infected equilibrium at `p` closest to `near`.
fn tracked_equilibrium(model: &Model, p: f64, near: &StateVector) -> Result<(Model, StateVector)> {
    let m = model.with_parameter(p)?;
    let eq = infected_equilibria(&m)?;
    let best = eq
        .into_iter()
        .min_by(|a, b| dist(&a.state, near).total_cmp(&dist(&b.state, near)))
        .ok_or_else(|| Error::numerical("tracked_equilibrium", format!("no infected equilibrium at {p}")))?;
    Ok((m, best.state))
}

/// Horizon long enough for `rate` to act ten times over, within the cap.
fn horizon_for(cfg: &IntegratorConfig, rate: f64) -> IntegratorConfig {
    let want = if rate > 0.0 { 10.0 / rate } else { cfg.t_end };
    IntegratorConfig {
        t_end: cfg.t_end.max(want.min(HORIZON_CAP * cfg.t_end)),
        extend_horizon: false,
        ..cfg.clone()
    }
}

/// Mean radius of the simulated cycle at `μ`, measured in the canonical
/// frame of the Hopf point (the coordinates in which `√(−dμ/a)` applies).
/// The run starts half way out to the predicted radius.
pub fn cycle_amplitude(model: &Model, h: &HopfData, mu: f64, cfg: &IntegratorConfig) -> Result<f64> {
    if model.dimension() != 2 {
        return Err(Error::ContractViolation {
            operation: "cycle_amplitude",
            detail: format!("needs a planar model, got {}", model.id()),
        });
    }
    let mh = model.with_parameter(h.param_value)?;
    let (p, _) = critical_frame(&mh.jacobian_unchecked(h.state.as_slice()))?;
    let pinv = inverse2(&p)?;
    let pm = h.param_value + mu;
    let (_, xe) = tracked_equilibrium(model, pm, &h.state)?;
    let r0 = 0.5 * amplitude_estimate(h, mu).unwrap_or(1e-3);
    let ic = StateVector::new(vec![xe[0] + r0 * p[0][0], xe[1] + r0 * p[1][0]]);
    let tr = integrate(model, pm, &ic, &horizon_for(cfg, (h.d * mu).abs()))?;
    let start = tr.len() - tr.len() / 10;
    let radii: Vec<f64> = tr.states[start..]
        .iter()
        .map(|x| {
            let u = apply(&pinv, [x[0] - xe[0], x[1] - xe[1]]);
            u[0].hypot(u[1])
        })
        .collect();
    Ok(radii.iter().sum::<f64>() / radii.len() as f64)
}

/// Least-squares slope of `log y` against `log |x|`.
pub fn power_law_exponent(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.abs().ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProbeOutcome {
    /// `None` when the runs do not settle the question.
    pub criticality: Option<Criticality>,
    /// Sign of `p − p_H` on which the equilibrium is unstable.
    pub unstable_side: f64,
    /// Largest relative deviation from the equilibrium in the late part of
    /// each run, for the far and near parameter offsets.
    pub deviations: [f64; 2],
}

/// Relative parameter offsets used by [`simulation_probe`].
pub const PROBE_OFFSETS: [f64; 2] = [0.02, 0.005];

/// Criticality of a Hopf point from simulation alone, for any dimension.
///
/// On the side where the equilibrium is unstable, runs start from
/// perturbations of 1e-3 and 1e-2 (relative, per component) at two
/// parameter offsets a factor 4 apart. A small attracting cycle grows like
/// `√|μ|`, so its deviation halves between the offsets; a jump to a distant
/// attractor barely changes.
pub fn simulation_probe(model: &Model, bp: &BifurcationPoint, cfg: &IntegratorConfig) -> Result<ProbeOutcome> {
    if bp.kind != BifurcationKind::Hopf {
        return Err(Error::ContractViolation {
            operation: "simulation_probe",
            detail: format!("needs a Hopf point, got {:?}", bp.kind),
        });
    }
    let ph = bp.param_value;
    // stay well clear of any other bifurcation on the branch
    let mut scale = ph.abs().max(f64::MIN_POSITIVE);
    let mut others = vec![find_transcritical(model).param_value];
    if let Some(t) = find_turning(model)? {
        others.push(t.param_value);
    }
    for q in others {
        let gap = (q - ph).abs();
        if gap > 0.0 {
            scale = scale.min(0.25 * gap / PROBE_OFFSETS[0]);
        }
    }
    let abscissa = |p: f64| -> Result<f64> {
        let (m, x) = tracked_equilibrium(model, p, &bp.state)?;
        Ok(stability_at(&m, &x)?.spectral_abscissa())
    };
    let probe = PROBE_OFFSETS[0] * scale;
    let up = abscissa(ph + probe)?;
    let down = abscissa(ph - probe)?;
    let side = match (up > 0.0, down > 0.0) {
        (true, false) => 1.0,
        (false, true) => -1.0,
        _ => {
            return Ok(ProbeOutcome { criticality: None, unstable_side: 0.0, deviations: [f64::NAN; 2] });
        }
    };
    let mut deviations = [0.0; 2];
    let mut consistent = true;
    for (slot, eta) in PROBE_OFFSETS.iter().enumerate() {
        let p = ph + side * eta * scale;
        let (_, xe) = tracked_equilibrium(model, p, &bp.state)?;
        let growth = abscissa(p)?;
        let run_cfg = horizon_for(cfg, growth);
        let mut devs = Vec::with_capacity(2);
        for kick in [1e-3, 1e-2] {
            let ic = StateVector::new(xe.0.iter().map(|v| v * (1.0 + kick)).collect());
            let tr = integrate(model, p, &ic, &run_cfg)?;
            let start = tr.len() / 2;
            let dev = tr.states[start..]
                .iter()
                .flat_map(|x| x.0.iter().zip(&xe.0).map(|(a, b)| (a - b).abs() / b.abs().max(1e-12)))
                .fold(0.0, f64::max);
            devs.push(dev);
        }
        consistent &= (devs[0] - devs[1]).abs() <= 0.1 * devs[0].max(devs[1]);
        deviations[slot] = devs[0].max(devs[1]);
    }
    let ratio = deviations[0] / deviations[1];
    let criticality = if !consistent {
        None
    } else if (1.6..=2.5).contains(&ratio) {
        Some(Criticality::Supercritical)
    } else if ratio < 1.3 {
        Some(Criticality::Subcritical)
    } else {
        None
    };
    Ok(ProbeOutcome { criticality, unstable_side: side, deviations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::presets::inhost;
    use crate::scan::find_hopf;

    fn hopf_points(a: f64) -> (Model, Vec<BifurcationPoint>) {
        let m = Model::new(inhost(a, 0.06)).unwrap();
        let h: Vec<_> = find_hopf(&m)
            .unwrap()
            .into_iter()
            .filter(|p| p.kind == BifurcationKind::Hopf)
            .collect();
        (m, h)
    }

    #[test]
    fn table_three_mapping() {
        use CycleStability::*;
        assert_eq!(
            classify_hopf(1.0, 1.0).unwrap(),
            (HopfClass::A, Criticality::Subcritical, Unstable)
        );
        assert_eq!(
            classify_hopf(1.0, -1.0).unwrap(),
            (HopfClass::B, Criticality::Supercritical, Stable)
        );
        assert_eq!(
            classify_hopf(-1.0, 1.0).unwrap(),
            (HopfClass::C, Criticality::Subcritical, Unstable)
        );
        assert_eq!(
            classify_hopf(-1.0, -1.0).unwrap(),
            (HopfClass::D, Criticality::Supercritical, Stable)
        );
        assert!(classify_hopf(0.0, 1.0).is_err());
        assert_eq!(HopfClass::B.equilibrium_stable(), (true, false));
        assert_eq!(HopfClass::D.cycle_side(), -1.0);
    }

    #[test]
    fn amplitude_formula() {
        let h = HopfData {
            param_value: 0.0,
            state: StateVector(vec![0.0, 0.0]),
            d: -1.0,
            a: -1e-3,
            omega_c: 1.0,
            class: HopfClass::D,
            criticality: Criticality::Supercritical,
            cycle_stability: CycleStability::Stable,
        };
        assert!((amplitude_estimate(&h, -0.01).unwrap() - 10f64.sqrt()).abs() < 1e-12);
        assert!(amplitude_estimate(&h, 0.01).is_none());
    }

    #[test]
    fn case_one_is_class_c() {
        let (m, h) = hopf_points(0.8);
        assert_eq!(h.len(), 1);
        let data = hopf_data(&m, &h[0]).unwrap();
        assert_eq!(data.class, HopfClass::C);
        assert!((data.d + 1.0722).abs() < 0.02 * 1.0722, "{data:?}");
    }

    #[test]
    fn exact_and_fd_coefficients_agree() {
        let (m, h) = hopf_points(0.07);
        let bp = &h[0];
        let a = lyapunov_a(&m, bp).unwrap();
        let afd = lyapunov_a_fd(&m, bp, 1e-3).unwrap();
        assert!((a - afd).abs() < 1e-3 * a.abs(), "{a} {afd}");
        let d = transversality_d(&m, bp).unwrap();
        let dfd = transversality_d_fd(&m, bp, default_d_step(&m, bp)).unwrap();
        assert!((d - dfd).abs() < 1e-4 * d.abs(), "{d} {dfd}");
    }

    #[test]
    fn power_law_fit() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(0.5)).collect();
        assert!((power_law_exponent(&xs, &ys) - 0.5).abs() < 1e-12);
    }
}

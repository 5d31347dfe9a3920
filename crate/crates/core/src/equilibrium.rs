//! Closed-form equilibria, thresholds and folds of the infected branch.
//!
//! Each model reduces its infected equilibria to a quadratic in the infected
//! component (`I`, `Y` or `A`). Along that branch the bifurcation parameter
//! can be written as a rational function of the infected component, which
//! is what the fold and Hopf searches use.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Model, ModelId, ParameterSet, StateVector};
use crate::numeric::{bisect, geomspace, quadratic_roots, sign_change_brackets};

// matches the accuracy to which folds are located
const DOUBLE_ROOT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Uninfected,
    InfectedLower,
    InfectedUpper,
    DoubleRoot,
}

impl Branch {
    pub fn as_str(self) -> &'static str {
        match self {
            Branch::Uninfected => "uninfected",
            Branch::InfectedLower => "infected_lower",
            Branch::InfectedUpper => "infected_upper",
            Branch::DoubleRoot => "double_root",
        }
    }

    pub fn parse(s: &str) -> Option<Branch> {
        Some(match s {
            "uninfected" => Branch::Uninfected,
            "infected_lower" => Branch::InfectedLower,
            "infected_upper" => Branch::InfectedUpper,
            "double_root" => Branch::DoubleRoot,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EquilibriumPoint {
    pub state: StateVector,
    pub branch: Branch,
    pub feasible: bool,
}

impl EquilibriumPoint {
    fn new(state: StateVector, branch: Branch) -> Self {
        let feasible = state.feasible();
        Self {
            state,
            branch,
            feasible,
        }
    }
}

/// Coefficients of `𝒜x² + ℬx + 𝒞 = 0` in the infected component and its real roots.
#[derive(Clone, Debug, PartialEq)]
pub struct QuadraticBranch {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub discriminant: f64,
    pub roots: Vec<f64>,
}

impl QuadraticBranch {
    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Self {
            a,
            b,
            c,
            discriminant: b * b - 4.0 * a * c,
            roots: quadratic_roots(a, b, c, DOUBLE_ROOT_TOL),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.a * x + self.b) * x + self.c
    }

    pub fn vertex(&self) -> f64 {
        -self.b / (2.0 * self.a)
    }

    /// Discriminant divided by the magnitude of its two terms.
    pub fn relative_discriminant(&self) -> f64 {
        let scale = (self.b * self.b).max((4.0 * self.a * self.c).abs());
        if scale == 0.0 {
            0.0
        } else {
            self.discriminant / scale
        }
    }
}

/// Threshold quantity of the uninfected state.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Threshold {
    /// Basic reproduction number; the uninfected state is stable below 1.
    ReproductionNumber(f64),
    /// Linear growth rate `a` of the autoimmune models; stable below 0.
    GrowthRate(f64),
}

impl Threshold {
    pub fn value(&self) -> f64 {
        match *self {
            Threshold::ReproductionNumber(v) | Threshold::GrowthRate(v) => v,
        }
    }

    pub fn uninfected_stable(&self) -> bool {
        match *self {
            Threshold::ReproductionNumber(r) => r < 1.0,
            Threshold::GrowthRate(a) => a < 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TurningPoint {
    pub param_value: f64,
    pub state: StateVector,
    pub exists: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BifurcationShape {
    Forward,
    BackwardPositive,
    BackwardNegative,
    None,
}

pub fn uninfected_equilibrium(model: &Model) -> (EquilibriumPoint, Threshold) {
    let threshold = match model.params() {
        ParameterSet::SirConcave(p) => {
            Threshold::ReproductionNumber(p.beta * p.lambda / (p.d * p.removal()))
        }
        ParameterSet::SirTreatment(p) => {
            let q = &p.sir;
            Threshold::ReproductionNumber(
                q.beta * q.lambda / (q.d * (q.removal() + p.alpha / p.omega)),
            )
        }
        ParameterSet::InhostConvex(p) => Threshold::ReproductionNumber(p.b / p.d),
        ParameterSet::Autoimmune2d(p) => Threshold::GrowthRate(p.compound_a()),
        ParameterSet::Autoimmune3d(p) => Threshold::GrowthRate(p.base.compound_a()),
    };
    (
        EquilibriumPoint::new(model.uninfected_state(), Branch::Uninfected),
        threshold,
    )
}

/// Quadratic for an arbitrary (possibly non-positive) bifurcation-parameter value.
pub fn quadratic_for(params: &ParameterSet) -> QuadraticBranch {
    match params {
        ParameterSet::SirConcave(p) => {
            // the linear branch equation multiplied by I; the root I = 0 is structural
            let m = p.removal();
            QuadraticBranch::new(m * (p.d * p.k + p.beta), m * p.d - p.beta * p.lambda, 0.0)
        }
        ParameterSet::SirTreatment(p) => {
            let q = &p.sir;
            let m = q.removal();
            let dkb = q.d * q.k + q.beta;
            let a = m * dkb;
            let b = (dkb * p.omega + q.d) * m + dkb * p.alpha - q.beta * q.lambda;
            let c = (m * p.omega + p.alpha) * q.d - q.beta * q.lambda * p.omega;
            QuadraticBranch::new(a, b, c)
        }
        ParameterSet::InhostConvex(p) => QuadraticBranch::new(
            p.a + p.b,
            p.b * p.c + p.d - p.a - p.b,
            p.c * (p.d - p.b),
        ),
        ParameterSet::Autoimmune2d(p) => QuadraticBranch::new(
            p.compound_b() * p.sigma1,
            p.beta * p.sigma1,
            -p.mu_n * p.compound_a(),
        ),
        ParameterSet::Autoimmune3d(p) => {
            let q = &p.base;
            let k = slaving_factor(p);
            QuadraticBranch::new(
                q.pi1 * q.lambda_e,
                q.beta * q.mu_e,
                k * (-q.f * q.gamma * q.v * q.lambda_e
                    + q.background_loss() * (q.mu_g + q.v) * q.mu_e),
            )
        }
    }
}

fn slaving_factor(p: &crate::model::Autoimmune3dParams) -> f64 {
    let q = &p.base;
    p.mu_d * (q.mu_n + p.xi) / ((q.v + q.mu_g) * (p.c * p.d * p.xi + p.mu_d) * q.sigma1)
}

pub fn infected_quadratic(model: &Model) -> QuadraticBranch {
    quadratic_for(model.params())
}

/// Full state on the infected branch with infected component `x`.
pub fn lift(params: &ParameterSet, x: f64) -> Result<StateVector> {
    let singular = |name: &'static str| Error::Domain {
        denominator: name,
        location: format!("infected component {x}"),
    };
    let state = match params {
        ParameterSet::SirConcave(p) => {
            let den = (p.d * p.k + p.beta) * x + p.d;
            if den == 0.0 {
                return Err(singular("(dk+beta)I + d"));
            }
            vec![p.lambda * (1.0 + p.k * x) / den, x]
        }
        ParameterSet::SirTreatment(p) => {
            let q = &p.sir;
            let den = (q.d * q.k + q.beta) * x + q.d;
            if den == 0.0 {
                return Err(singular("(dk+beta)I + d"));
            }
            vec![q.lambda * (1.0 + q.k * x) / den, x]
        }
        ParameterSet::InhostConvex(p) => {
            let den = (p.a + p.b) * x + p.b * p.c;
            if den == 0.0 {
                return Err(singular("(A+B)Y + BC"));
            }
            vec![(x + p.c) / den, x]
        }
        ParameterSet::Autoimmune2d(p) => vec![x, (p.compound_b() * x + p.beta) * x / p.mu_n],
        ParameterSet::Autoimmune3d(p) => {
            let q = &p.base;
            let rn = (q.beta * q.mu_e + q.pi1 * q.lambda_e * x) * x / (q.mu_e * (q.mu_n + p.xi));
            vec![x, rn, p.c * p.xi * rn / p.mu_d]
        }
    };
    if state.iter().any(|v| !v.is_finite()) {
        return Err(singular("non-finite lifted state"));
    }
    Ok(StateVector(state))
}

/// `‖rhs(x)‖∞ < 1e-9 (1 + ‖x‖∞)`.
pub fn residual_ok(model: &Model, x: &StateVector) -> bool {
    match model.rhs(x) {
        Ok(r) => r.norm_inf() < 1e-9 * (1.0 + x.norm_inf()),
        Err(_) => false,
    }
}

pub fn infected_equilibria(model: &Model) -> Result<Vec<EquilibriumPoint>> {
    let q = infected_quadratic(model);
    let mut roots = q.roots.clone();
    if model.id() == ModelId::SirConcave {
        roots.retain(|&r| r != 0.0);
    }
    let double = q.roots.len() == 1;
    let mut out = Vec::with_capacity(roots.len());
    let n = roots.len();
    for (i, &r) in roots.iter().enumerate() {
        let state = lift(model.params(), r)?;
        let branch = if double {
            Branch::DoubleRoot
        } else if model.id() == ModelId::SirConcave {
            if r > 0.0 {
                Branch::InfectedUpper
            } else {
                Branch::InfectedLower
            }
        } else if i + 1 == n {
            Branch::InfectedUpper
        } else {
            Branch::InfectedLower
        };
        if !residual_ok(model, &state) {
            return Err(Error::numerical(
                "infected_equilibria",
                format!("root {r} lifts to {:?} with residual above tolerance", state.0),
            ));
        }
        out.push(EquilibriumPoint::new(state, branch));
    }
    Ok(out)
}

/// Uninfected equilibrium followed by the infected ones.
pub fn all_equilibria(model: &Model) -> Result<Vec<EquilibriumPoint>> {
    let mut v = vec![uninfected_equilibrium(model).0];
    v.extend(infected_equilibria(model)?);
    Ok(v)
}

/// Numerator and denominator of the bifurcation parameter as a function of
/// the infected component along the infected branch, `p̄(x) = num / den`.
pub fn branch_relation(params: &ParameterSet, x: f64) -> (f64, f64) {
    match params {
        ParameterSet::SirConcave(p) => {
            let m = p.removal();
            (m * (p.d * p.k + p.beta) * x + m * p.d, p.beta)
        }
        ParameterSet::SirTreatment(p) => {
            let at_zero = quadratic_for(&params.with_bifurcation_parameter(0.0));
            (
                (at_zero.a * x + at_zero.b) * x + at_zero.c,
                p.sir.beta * (x + p.omega),
            )
        }
        ParameterSet::InhostConvex(p) => (
            -(p.a * x * x + (p.d - p.a) * x + p.c * p.d),
            (x + p.c) * (x - 1.0),
        ),
        ParameterSet::Autoimmune2d(p) => (
            -(p.beta * p.sigma1 * x + p.mu_n * p.background_loss()),
            p.pi1 * p.sigma1 * x * x / p.mu_e - p.mu_n * p.activation_slope(),
        ),
        ParameterSet::Autoimmune3d(p) => {
            let q = &p.base;
            let k = slaving_factor(p);
            let qq = q.background_loss() * (q.mu_g + q.v) * q.mu_e;
            (
                -(q.beta * q.mu_e * x + k * qq),
                q.pi1 * x * x - k * q.f * q.gamma * q.v,
            )
        }
    }
}

/// `p̄(x)`, or `None` at a pole.
pub fn branch_parameter(params: &ParameterSet, x: f64) -> Option<f64> {
    let (n, d) = branch_relation(params, x);
    let v = n / d;
    v.is_finite().then_some(v)
}

/// Whether the branch relation has a pole strictly between `x0` and `x1`.
pub fn pole_between(params: &ParameterSet, x0: f64, x1: f64) -> bool {
    let (lo, hi) = if x0 < x1 { (x0, x1) } else { (x1, x0) };
    // all denominators are polynomials of degree ≤ 2
    let n = 64;
    let mut prev = branch_relation(params, lo).1;
    for i in 1..=n {
        let x = lo + (hi - lo) * i as f64 / n as f64;
        let d = branch_relation(params, x).1;
        if d == 0.0 && i < n || d.signum() != prev.signum() && prev != 0.0 {
            return true;
        }
        prev = d;
    }
    false
}

/// The transcritical value of the bifurcation parameter.
pub fn transcritical_parameter(params: &ParameterSet) -> f64 {
    match params {
        ParameterSet::SirConcave(p) => p.d * p.removal() / p.beta,
        ParameterSet::SirTreatment(p) => {
            let q = &p.sir;
            q.d * (q.removal() + p.alpha / p.omega) / q.beta
        }
        ParameterSet::InhostConvex(p) => p.d,
        ParameterSet::Autoimmune2d(p) => p.static_threshold(),
        ParameterSet::Autoimmune3d(p) => p.base.static_threshold(),
    }
}

fn fold_from_parameter(params: &ParameterSet, value: f64) -> Result<TurningPoint> {
    let at = params.with_bifurcation_parameter(value);
    let q = quadratic_for(&at);
    let xv = q.vertex();
    Ok(TurningPoint {
        param_value: value,
        state: lift(&at, xv)?,
        exists: true,
    })
}

fn no_fold(params: &ParameterSet) -> TurningPoint {
    TurningPoint {
        param_value: f64::NAN,
        state: StateVector(vec![f64::NAN; params.model_id().dimension()]),
        exists: false,
    }
}

/// Fold of the infected branch connected to the transcritical point.
pub fn turning_point(model: &Model) -> Result<TurningPoint> {
    let params = model.params();
    match params {
        ParameterSet::SirConcave(_) => Ok(no_fold(params)),
        ParameterSet::InhostConvex(p) => {
            let bt = (-p.a + p.d + 2.0 * (p.a * p.c * p.d).sqrt()) / (p.c + 1.0);
            let tp = fold_from_parameter(params, bt)?;
            let xv = tp.state[1];
            if pole_between(params, 0.0, xv) {
                return Ok(no_fold(params));
            }
            Ok(tp)
        }
        _ => {
            let ps = transcritical_parameter(params);
            let grid = geomspace(1e-8 * ps, 1e4 * ps, 512);
            let disc: Vec<f64> = grid
                .iter()
                .map(|&v| quadratic_for(&params.with_bifurcation_parameter(v)).discriminant)
                .collect();
            let mut best: Option<TurningPoint> = None;
            for (_, lo, hi) in sign_change_brackets(&grid, &disc) {
                let v = bisect(
                    |v| quadratic_for(&params.with_bifurcation_parameter(v)).discriminant,
                    lo,
                    hi,
                    1e-13 * hi,
                )?;
                let tp = fold_from_parameter(params, v)?;
                let idx = model.id().infected_index();
                if pole_between(params, 0.0, tp.state[idx]) {
                    continue;
                }
                let closer = match &best {
                    None => true,
                    Some(b) => (v - ps).abs() < (b.param_value - ps).abs(),
                };
                if closer {
                    best = Some(tp);
                }
            }
            Ok(best.unwrap_or_else(|| no_fold(params)))
        }
    }
}

pub fn classify_bifurcation_shape(model: &Model, fold: &TurningPoint) -> BifurcationShape {
    if fold.exists {
        let xv = fold.state[model.id().infected_index()];
        if xv > 0.0 {
            BifurcationShape::BackwardPositive
        } else {
            BifurcationShape::BackwardNegative
        }
    } else {
        let ps = transcritical_parameter(model.params());
        if ps.is_finite() && ps > 0.0 {
            BifurcationShape::Forward
        } else {
            BifurcationShape::None
        }
    }
}

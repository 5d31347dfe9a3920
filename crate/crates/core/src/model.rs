//! The five vector fields, their parameter sets and analytic Jacobians.
//!
//! Every model has one designated bifurcation parameter: the recruitment
//! rate Λ for the SIR variants, the baseline infectivity `B` for the in-host
//! model and the effector activation rate λ_E for the autoimmune models.
//! Vector fields are written once, generically over [`Scalar`], so the same
//! code path is used for plain evaluation and for exact derivatives.

use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ModelId {
    SirConcave,
    SirTreatment,
    InhostConvex,
    #[serde(rename = "AUTOIMMUNE_2D")]
    Autoimmune2d,
    #[serde(rename = "AUTOIMMUNE_3D")]
    Autoimmune3d,
}

impl ModelId {
    pub const ALL: [ModelId; 5] = [
        ModelId::SirConcave,
        ModelId::SirTreatment,
        ModelId::InhostConvex,
        ModelId::Autoimmune2d,
        ModelId::Autoimmune3d,
    ];

    pub fn dimension(self) -> usize {
        match self {
            ModelId::Autoimmune3d => 3,
            _ => 2,
        }
    }

    pub fn tag(self) -> &'static str {
        match self {
            ModelId::SirConcave => "SIR_CONCAVE",
            ModelId::SirTreatment => "SIR_TREATMENT",
            ModelId::InhostConvex => "INHOST_CONVEX",
            ModelId::Autoimmune2d => "AUTOIMMUNE_2D",
            ModelId::Autoimmune3d => "AUTOIMMUNE_3D",
        }
    }

    pub fn parse(tag: &str) -> Option<Self> {
        ModelId::ALL.into_iter().find(|id| id.tag().eq_ignore_ascii_case(tag))
    }

    pub fn component_names(self) -> &'static [&'static str] {
        match self {
            ModelId::SirConcave | ModelId::SirTreatment => &["S", "I"],
            ModelId::InhostConvex => &["X", "Y"],
            ModelId::Autoimmune2d => &["A", "R_n"],
            ModelId::Autoimmune3d => &["A", "R_n", "R_d"],
        }
    }

    /// Index of the infected (or activated) component the branch quadratic is written in.
    pub fn infected_index(self) -> usize {
        match self {
            ModelId::SirConcave | ModelId::SirTreatment | ModelId::InhostConvex => 1,
            ModelId::Autoimmune2d | ModelId::Autoimmune3d => 0,
        }
    }

    pub fn parameter_name(self) -> &'static str {
        match self {
            ModelId::SirConcave | ModelId::SirTreatment => "lambda",
            ModelId::InhostConvex => "b",
            ModelId::Autoimmune2d | ModelId::Autoimmune3d => "lambda_e",
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// Recruitment Λ, infection rate β, inhibition k, natural death d,
/// recovery γ and disease mortality ε.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SirParams {
    pub lambda: f64,
    pub beta: f64,
    pub k: f64,
    pub d: f64,
    pub gamma: f64,
    pub epsilon: f64,
}

impl SirParams {
    /// Total removal rate d + γ + ε of infectives.
    pub fn removal(&self) -> f64 {
        self.d + self.gamma + self.epsilon
    }
}

/// [`SirParams`] plus maximal treatment α and half-saturation ω.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreatmentParams {
    #[serde(flatten)]
    pub sir: SirParams,
    pub alpha: f64,
    pub omega: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InhostParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutoimmuneParams {
    pub f: f64,
    pub v: f64,
    pub sigma1: f64,
    pub b1: f64,
    pub mu_a: f64,
    pub pi1: f64,
    pub beta: f64,
    pub mu_n: f64,
    pub mu_e: f64,
    pub gamma: f64,
    pub mu_g: f64,
    pub lambda_e: f64,
}

impl AutoimmuneParams {
    /// Slope κ of the compound `a = κ·λ_E − (b₁ + μ_A)`.
    pub fn activation_slope(&self) -> f64 {
        self.f * self.v * self.gamma / (self.mu_e * (self.v + self.mu_g))
    }

    pub fn background_loss(&self) -> f64 {
        self.b1 + self.mu_a
    }

    /// `a = f ṽ γ λ_E / (μ_E (ṽ + μ_G)) − b₁ − μ_A`.
    pub fn compound_a(&self) -> f64 {
        self.activation_slope() * self.lambda_e - self.background_loss()
    }

    /// `b = π₁ λ_E / μ_E`.
    pub fn compound_b(&self) -> f64 {
        self.pi1 * self.lambda_e / self.mu_e
    }

    /// Value of λ_E at which `a` vanishes.
    pub fn static_threshold(&self) -> f64 {
        self.background_loss() * (self.v + self.mu_g) * self.mu_e / (self.f * self.v * self.gamma)
    }
}

/// Autoimmune rates plus the terminally differentiated regulatory population:
/// its death rate μ_d, conversion gain c, suppression weight d and
/// differentiation rate ξ.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Autoimmune3dParams {
    #[serde(flatten)]
    pub base: AutoimmuneParams,
    pub mu_d: f64,
    pub c: f64,
    pub d: f64,
    pub xi: f64,
}

impl Autoimmune3dParams {
    /// Effective suppression factor `1 + c d ξ / μ_d` of R_n once R_d is slaved to it.
    pub fn suppression_gain(&self) -> f64 {
        1.0 + self.c * self.d * self.xi / self.mu_d
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ParameterSet {
    SirConcave(SirParams),
    SirTreatment(TreatmentParams),
    InhostConvex(InhostParams),
    Autoimmune2d(AutoimmuneParams),
    Autoimmune3d(Autoimmune3dParams),
}

impl ParameterSet {
    pub fn model_id(&self) -> ModelId {
        match self {
            ParameterSet::SirConcave(_) => ModelId::SirConcave,
            ParameterSet::SirTreatment(_) => ModelId::SirTreatment,
            ParameterSet::InhostConvex(_) => ModelId::InhostConvex,
            ParameterSet::Autoimmune2d(_) => ModelId::Autoimmune2d,
            ParameterSet::Autoimmune3d(_) => ModelId::Autoimmune3d,
        }
    }

    /// Named fields in declaration order.
    pub fn fields(&self) -> Vec<(&'static str, f64)> {
        fn sir(p: &SirParams) -> Vec<(&'static str, f64)> {
            vec![
                ("lambda", p.lambda),
                ("beta", p.beta),
                ("k", p.k),
                ("d", p.d),
                ("gamma", p.gamma),
                ("epsilon", p.epsilon),
            ]
        }
        fn auto(p: &AutoimmuneParams) -> Vec<(&'static str, f64)> {
            vec![
                ("f", p.f),
                ("v", p.v),
                ("sigma1", p.sigma1),
                ("b1", p.b1),
                ("mu_a", p.mu_a),
                ("pi1", p.pi1),
                ("beta", p.beta),
                ("mu_n", p.mu_n),
                ("mu_e", p.mu_e),
                ("gamma", p.gamma),
                ("mu_g", p.mu_g),
                ("lambda_e", p.lambda_e),
            ]
        }
        match self {
            ParameterSet::SirConcave(p) => sir(p),
            ParameterSet::SirTreatment(p) => {
                let mut v = sir(&p.sir);
                v.push(("alpha", p.alpha));
                v.push(("omega", p.omega));
                v
            }
            ParameterSet::InhostConvex(p) => vec![("a", p.a), ("b", p.b), ("c", p.c), ("d", p.d)],
            ParameterSet::Autoimmune2d(p) => auto(p),
            ParameterSet::Autoimmune3d(p) => {
                let mut v = auto(&p.base);
                v.extend([("mu_d", p.mu_d), ("c", p.c), ("d", p.d), ("xi", p.xi)]);
                v
            }
        }
    }

    pub fn field_mut(&mut self, name: &str) -> Option<&mut f64> {
        fn sir<'a>(p: &'a mut SirParams, name: &str) -> Option<&'a mut f64> {
            Some(match name {
                "lambda" => &mut p.lambda,
                "beta" => &mut p.beta,
                "k" => &mut p.k,
                "d" => &mut p.d,
                "gamma" => &mut p.gamma,
                "epsilon" => &mut p.epsilon,
                _ => return None,
            })
        }
        fn auto<'a>(p: &'a mut AutoimmuneParams, name: &str) -> Option<&'a mut f64> {
            Some(match name {
                "f" => &mut p.f,
                "v" => &mut p.v,
                "sigma1" => &mut p.sigma1,
                "b1" => &mut p.b1,
                "mu_a" => &mut p.mu_a,
                "pi1" => &mut p.pi1,
                "beta" => &mut p.beta,
                "mu_n" => &mut p.mu_n,
                "mu_e" => &mut p.mu_e,
                "gamma" => &mut p.gamma,
                "mu_g" => &mut p.mu_g,
                "lambda_e" => &mut p.lambda_e,
                _ => return None,
            })
        }
        match self {
            ParameterSet::SirConcave(p) => sir(p, name),
            ParameterSet::SirTreatment(p) => match name {
                "alpha" => Some(&mut p.alpha),
                "omega" => Some(&mut p.omega),
                _ => sir(&mut p.sir, name),
            },
            ParameterSet::InhostConvex(p) => match name {
                "a" => Some(&mut p.a),
                "b" => Some(&mut p.b),
                "c" => Some(&mut p.c),
                "d" => Some(&mut p.d),
                _ => None,
            },
            ParameterSet::Autoimmune2d(p) => auto(p, name),
            ParameterSet::Autoimmune3d(p) => match name {
                "mu_d" => Some(&mut p.mu_d),
                "c" => Some(&mut p.c),
                "d" => Some(&mut p.d),
                "xi" => Some(&mut p.xi),
                _ => auto(&mut p.base, name),
            },
        }
    }

    /// Builds a validated parameter set from named values. Every field of
    /// the model must be given, and no other name.
    pub fn from_fields<'a>(id: ModelId, values: impl IntoIterator<Item = (&'a str, f64)>) -> Result<Self> {
        let mut out = match id {
            ModelId::SirConcave => presets::sir_concave(f64::NAN, f64::NAN),
            ModelId::SirTreatment => presets::sir_treatment(f64::NAN, f64::NAN),
            ModelId::InhostConvex => presets::inhost(f64::NAN, f64::NAN),
            ModelId::Autoimmune2d => presets::autoimmune_2d(f64::NAN),
            ModelId::Autoimmune3d => presets::autoimmune_3d(f64::NAN),
        };
        let mut seen = Vec::new();
        for (name, value) in values {
            let slot = out
                .field_mut(name)
                .ok_or_else(|| Error::Parse(format!("unknown parameter `{name}` for {id}")))?;
            *slot = value;
            seen.push(name.to_string());
        }
        for (name, _) in out.fields() {
            if !seen.iter().any(|s| s == name) {
                return Err(Error::Parse(format!("missing parameter `{name}` for {id}")));
            }
        }
        out.validate()?;
        Ok(out)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in self.fields() {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::InvalidParameter { name, value });
            }
        }
        Ok(())
    }

    /// Current value of the designated bifurcation parameter.
    pub fn bifurcation_parameter(&self) -> f64 {
        match self {
            ParameterSet::SirConcave(p) => p.lambda,
            ParameterSet::SirTreatment(p) => p.sir.lambda,
            ParameterSet::InhostConvex(p) => p.b,
            ParameterSet::Autoimmune2d(p) => p.lambda_e,
            ParameterSet::Autoimmune3d(p) => p.base.lambda_e,
        }
    }

    /// Copy with the bifurcation parameter replaced; not validated.
    pub fn with_bifurcation_parameter(&self, value: f64) -> ParameterSet {
        let mut out = *self;
        match &mut out {
            ParameterSet::SirConcave(p) => p.lambda = value,
            ParameterSet::SirTreatment(p) => p.sir.lambda = value,
            ParameterSet::InhostConvex(p) => p.b = value,
            ParameterSet::Autoimmune2d(p) => p.lambda_e = value,
            ParameterSet::Autoimmune3d(p) => p.base.lambda_e = value,
        }
        out
    }
}

/// State of a model. Negative components are legal; feasibility is a query.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateVector(pub Vec<f64>);

impl StateVector {
    pub fn new(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn feasible(&self) -> bool {
        self.0.iter().all(|&v| v >= 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Index<usize> for StateVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl From<Vec<f64>> for StateVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Dense row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Jacobian {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl Jacobian {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.dim + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.dim + c] = v;
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn determinant(&self) -> f64 {
        match self.dim {
            2 => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0),
            3 => {
                let m = |r, c| self.get(r, c);
                m(0, 0) * (m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1))
                    - m(0, 1) * (m(1, 0) * m(2, 2) - m(1, 2) * m(2, 0))
                    + m(0, 2) * (m(1, 0) * m(2, 1) - m(1, 1) * m(2, 0))
            }
            _ => unimplemented!("only 2x2 and 3x3 Jacobians occur"),
        }
    }

    /// Sum of the principal 2x2 minors.
    pub fn principal_minor_sum(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for j in (i + 1)..self.dim {
                s += self.get(i, i) * self.get(j, j) - self.get(i, j) * self.get(j, i);
            }
        }
        s
    }

    /// Solves `J x = rhs` by Gaussian elimination with partial pivoting.
    pub fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        let n = self.dim;
        let mut a = self.data.clone();
        let mut b = rhs.to_vec();
        for col in 0..n {
            let piv = (col..n).max_by(|&i, &j| {
                a[i * n + col].abs().total_cmp(&a[j * n + col].abs())
            })?;
            if a[piv * n + col] == 0.0 {
                return None;
            }
            if piv != col {
                for k in 0..n {
                    a.swap(piv * n + k, col * n + k);
                }
                b.swap(piv, col);
            }
            for r in (col + 1)..n {
                let f = a[r * n + col] / a[col * n + col];
                for k in col..n {
                    a[r * n + k] -= f * a[col * n + k];
                }
                b[r] -= f * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for r in (0..n).rev() {
            let mut s = b[r];
            for k in (r + 1)..n {
                s -= a[r * n + k] * x[k];
            }
            x[r] = s / a[r * n + r];
        }
        Some(x)
    }
}

/// A validated parameter set. Construct with [`Model::new`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Model {
    params: ParameterSet,
}

const SINGULAR_EPS: f64 = 1e-300;

fn check_denominator(value: f64, name: &'static str, x: &[f64]) -> Result<()> {
    if !value.is_finite() || value.abs() < SINGULAR_EPS {
        return Err(Error::Domain {
            denominator: name,
            location: format!("{x:?}"),
        });
    }
    Ok(())
}

impl Model {
    pub fn new(params: ParameterSet) -> Result<Self> {
        params.validate()?;
        Ok(Self { params })
    }

    /// Skips validation; for evaluating the field outside the admissible
    /// parameter range.
    pub(crate) fn unchecked(params: ParameterSet) -> Self {
        Self { params }
    }

    pub fn id(&self) -> ModelId {
        self.params.model_id()
    }

    pub fn dimension(&self) -> usize {
        self.id().dimension()
    }

    pub fn params(&self) -> &ParameterSet {
        &self.params
    }

    pub fn parameter(&self) -> f64 {
        self.params.bifurcation_parameter()
    }

    /// Same model at a different bifurcation-parameter value.
    pub fn with_parameter(&self, value: f64) -> Result<Model> {
        Model::new(self.params.with_bifurcation_parameter(value))
    }

    /// `(a, b)` compounds of the autoimmune models.
    pub fn compound_params(&self) -> Option<(f64, f64)> {
        match &self.params {
            ParameterSet::Autoimmune2d(p) => Some((p.compound_a(), p.compound_b())),
            ParameterSet::Autoimmune3d(p) => Some((p.base.compound_a(), p.base.compound_b())),
            _ => None,
        }
    }

    /// Checks the denominators the field divides by at state `x`.
    pub fn check_domain(&self, x: &[f64]) -> Result<()> {
        match &self.params {
            ParameterSet::SirConcave(p) => check_denominator(1.0 + p.k * x[1], "1 + k*I", x),
            ParameterSet::SirTreatment(p) => {
                check_denominator(1.0 + p.sir.k * x[1], "1 + k*I", x)?;
                check_denominator(p.omega + x[1], "omega + I", x)
            }
            ParameterSet::InhostConvex(p) => check_denominator(x[1] + p.c, "Y + C", x),
            ParameterSet::Autoimmune2d(_) | ParameterSet::Autoimmune3d(_) => Ok(()),
        }
    }

    /// Vector field with the bifurcation parameter supplied as a scalar of
    /// arbitrary type. No domain checks.
    pub fn field_generic<T: Scalar>(&self, param: T, x: &[T], out: &mut [T]) {
        match &self.params {
            ParameterSet::SirConcave(p) => {
                let (s, i) = (x[0], x[1]);
                let inc = s * i * T::cst(p.beta) / (T::cst(1.0) + i.scale(p.k));
                out[0] = param - inc - s.scale(p.d);
                out[1] = inc - i.scale(p.removal());
            }
            ParameterSet::SirTreatment(p) => {
                let (s, i) = (x[0], x[1]);
                let q = &p.sir;
                let inc = s * i * T::cst(q.beta) / (T::cst(1.0) + i.scale(q.k));
                let treat = i.scale(p.alpha) / (T::cst(p.omega) + i);
                out[0] = param - inc - s.scale(q.d);
                out[1] = inc - i.scale(q.removal()) - treat;
            }
            ParameterSet::InhostConvex(p) => {
                let (xx, y) = (x[0], x[1]);
                let g = param + y.scale(p.a) / (y + T::cst(p.c));
                let inc = g * xx * y;
                out[0] = T::cst(1.0) - xx.scale(p.d) - inc;
                out[1] = inc - y;
            }
            ParameterSet::Autoimmune2d(p) => {
                let (a_, rn) = (x[0], x[1]);
                let a = param.scale(p.activation_slope()) - T::cst(p.background_loss());
                let b = param.scale(p.pi1 / p.mu_e);
                out[0] = a * a_ - rn * a_.scale(p.sigma1);
                out[1] = (b * a_ + T::cst(p.beta)) * a_ - rn.scale(p.mu_n);
            }
            ParameterSet::Autoimmune3d(p) => {
                let q = &p.base;
                let (a_, rn, rd) = (x[0], x[1], x[2]);
                let a = param.scale(q.activation_slope()) - T::cst(q.background_loss());
                let b = param.scale(q.pi1 / q.mu_e);
                out[0] = a * a_ - (rn + rd.scale(p.d)) * a_.scale(q.sigma1);
                out[1] = (b * a_ + T::cst(q.beta)) * a_ - rn.scale(q.mu_n + p.xi);
                out[2] = rn.scale(p.c * p.xi) - rd.scale(p.mu_d);
            }
        }
    }

    /// Time derivative at `x`, without domain checks (integrator hot path).
    #[inline]
    pub fn rhs_into(&self, x: &[f64], out: &mut [f64]) {
        self.field_generic(self.parameter(), x, out);
    }

    pub fn rhs(&self, x: &StateVector) -> Result<StateVector> {
        self.check_dim(x)?;
        self.check_domain(x.as_slice())?;
        let mut out = vec![0.0; self.dimension()];
        self.rhs_into(x.as_slice(), &mut out);
        if out.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain {
                denominator: "non-finite field value",
                location: format!("{:?}", x.as_slice()),
            });
        }
        Ok(StateVector(out))
    }

    fn check_dim(&self, x: &StateVector) -> Result<()> {
        if x.len() != self.dimension() {
            return Err(Error::ContractViolation {
                operation: "rhs",
                detail: format!(
                    "{} expects a {}-component state, got {}",
                    self.id(),
                    self.dimension(),
                    x.len()
                ),
            });
        }
        Ok(())
    }

    /// Analytic Jacobian.
    pub fn jacobian(&self, x: &StateVector) -> Result<Jacobian> {
        self.check_dim(x)?;
        self.check_domain(x.as_slice())?;
        Ok(self.jacobian_unchecked(x.as_slice()))
    }

    pub(crate) fn jacobian_unchecked(&self, x: &[f64]) -> Jacobian {
        let mut j = Jacobian::zeros(self.dimension());
        match &self.params {
            ParameterSet::SirConcave(p) => {
                sir_jacobian(&mut j, p, 0.0, 1.0, x);
            }
            ParameterSet::SirTreatment(p) => {
                sir_jacobian(&mut j, &p.sir, p.alpha, p.omega, x);
            }
            ParameterSet::InhostConvex(p) => {
                let (xx, y) = (x[0], x[1]);
                let g = p.b + p.a * y / (y + p.c);
                let gp = p.a * p.c / ((y + p.c) * (y + p.c));
                let dinc_dy = xx * (g + y * gp);
                j.set(0, 0, -p.d - g * y);
                j.set(0, 1, -dinc_dy);
                j.set(1, 0, g * y);
                j.set(1, 1, dinc_dy - 1.0);
            }
            ParameterSet::Autoimmune2d(p) => {
                let (a_, rn) = (x[0], x[1]);
                let (a, b) = (p.compound_a(), p.compound_b());
                j.set(0, 0, a - p.sigma1 * rn);
                j.set(0, 1, -p.sigma1 * a_);
                j.set(1, 0, 2.0 * b * a_ + p.beta);
                j.set(1, 1, -p.mu_n);
            }
            ParameterSet::Autoimmune3d(p) => {
                let q = &p.base;
                let (a_, rn, rd) = (x[0], x[1], x[2]);
                let (a, b) = (q.compound_a(), q.compound_b());
                j.set(0, 0, a - q.sigma1 * (rn + p.d * rd));
                j.set(0, 1, -q.sigma1 * a_);
                j.set(0, 2, -q.sigma1 * p.d * a_);
                j.set(1, 0, 2.0 * b * a_ + q.beta);
                j.set(1, 1, -(q.mu_n + p.xi));
                j.set(2, 1, p.c * p.xi);
                j.set(2, 2, -p.mu_d);
            }
        }
        j
    }

    /// The uninfected (disease-free) state.
    pub fn uninfected_state(&self) -> StateVector {
        match &self.params {
            ParameterSet::SirConcave(p) => StateVector(vec![p.lambda / p.d, 0.0]),
            ParameterSet::SirTreatment(p) => StateVector(vec![p.sir.lambda / p.sir.d, 0.0]),
            ParameterSet::InhostConvex(p) => StateVector(vec![1.0 / p.d, 0.0]),
            ParameterSet::Autoimmune2d(_) => StateVector(vec![0.0, 0.0]),
            ParameterSet::Autoimmune3d(_) => StateVector(vec![0.0, 0.0, 0.0]),
        }
    }
}

/// SIR Jacobian; `alpha = 0` gives the untreated model.
fn sir_jacobian(j: &mut Jacobian, p: &SirParams, alpha: f64, omega: f64, x: &[f64]) {
    let (s, i) = (x[0], x[1]);
    let q = 1.0 + p.k * i;
    let dinc_ds = p.beta * i / q;
    let dinc_di = p.beta * s / (q * q);
    let dtreat = alpha * omega / ((omega + i) * (omega + i));
    j.set(0, 0, -dinc_ds - p.d);
    j.set(0, 1, -dinc_di);
    j.set(1, 0, dinc_ds);
    j.set(1, 1, dinc_di - p.removal() - dtreat);
}

/// Parameter sets used throughout the tests, examples and golden tables.
pub mod presets {
    use super::*;

    /// Treatment model with β = 0.01, d = 0.1, γ = 0.01, ε = 0.02, α = 6, ω = 7.
    pub fn sir_treatment(k: f64, lambda: f64) -> ParameterSet {
        ParameterSet::SirTreatment(TreatmentParams {
            sir: SirParams {
                lambda,
                beta: 0.01,
                k,
                d: 0.1,
                gamma: 0.01,
                epsilon: 0.02,
            },
            alpha: 6.0,
            omega: 7.0,
        })
    }

    pub fn sir_concave(k: f64, lambda: f64) -> ParameterSet {
        match sir_treatment(k, lambda) {
            ParameterSet::SirTreatment(p) => ParameterSet::SirConcave(p.sir),
            _ => unreachable!(),
        }
    }

    /// In-host model with C = 0.823, D = 0.057.
    pub fn inhost(a: f64, b: f64) -> ParameterSet {
        ParameterSet::InhostConvex(InhostParams {
            a,
            b,
            c: 0.823,
            d: 0.057,
        })
    }

    pub fn autoimmune_base(lambda_e: f64) -> AutoimmuneParams {
        AutoimmuneParams {
            f: 1e-4,
            v: 0.25e-2,
            sigma1: 3e-6,
            b1: 0.25,
            mu_a: 0.2,
            pi1: 0.016,
            beta: 200.0,
            mu_n: 0.1,
            mu_e: 0.2,
            gamma: 2000.0,
            mu_g: 5.0,
            lambda_e,
        }
    }

    pub fn autoimmune_2d(lambda_e: f64) -> ParameterSet {
        ParameterSet::Autoimmune2d(autoimmune_base(lambda_e))
    }

    pub fn autoimmune_3d(lambda_e: f64) -> ParameterSet {
        ParameterSet::Autoimmune3d(Autoimmune3dParams {
            base: autoimmune_base(lambda_e),
            mu_d: 0.2,
            c: 8.0,
            d: 2.0,
            xi: 0.025,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::presets::*;
    use super::*;

    fn model(p: ParameterSet) -> Model {
        Model::new(p).unwrap()
    }

    #[test]
    fn from_fields_round_trips_presets() {
        for p in [sir_concave(0.01, 9.8), sir_treatment(0.02, 10.0), inhost(0.6, 0.083), autoimmune_2d(1000.0), autoimmune_3d(1500.0)] {
            let back = ParameterSet::from_fields(p.model_id(), p.fields()).unwrap();
            assert_eq!(back, p);
        }
    }

    #[test]
    fn from_fields_names_the_offending_key() {
        let mut f = inhost(0.6, 0.083).fields();
        f.push(("e", 1.0));
        let msg = ParameterSet::from_fields(ModelId::InhostConvex, f.clone()).unwrap_err().to_string();
        assert!(msg.contains("`e`"), "{msg}");
        f.truncate(3);
        let msg = ParameterSet::from_fields(ModelId::InhostConvex, f).unwrap_err().to_string();
        assert!(msg.contains("`d`"), "{msg}");
        let mut neg = inhost(0.6, 0.083).fields();
        neg[0].1 = -0.6;
        assert_eq!(
            ParameterSet::from_fields(ModelId::InhostConvex, neg).unwrap_err(),
            Error::InvalidParameter { name: "a", value: -0.6 }
        );
    }

    #[test]
    fn model_tags_parse() {
        for id in ModelId::ALL {
            assert_eq!(ModelId::parse(id.tag()), Some(id));
        }
        assert_eq!(ModelId::parse("inhost_convex"), Some(ModelId::InhostConvex));
        assert_eq!(ModelId::parse("SIR"), None);
    }

    #[test]
    fn dimension_is_three_only_for_autoimmune_3d() {
        for id in ModelId::ALL {
            assert_eq!(id.dimension() == 3, id == ModelId::Autoimmune3d);
        }
    }

    #[test]
    fn uninfected_state_annihilates_inhost_field() {
        let m = model(inhost(0.3, 0.02));
        let r = m.rhs(&StateVector(vec![1.0 / 0.057, 0.0])).unwrap();
        // 1 - D/D rounds to one ulp
        assert!(r.norm_inf() <= 1e-15);
        assert_eq!(r[1], 0.0);
    }

    #[test]
    fn quoted_upper_equilibrium_is_near_zero_of_field() {
        let m = model(inhost(0.8, 0.036));
        let r = m.rhs(&StateVector(vec![2.233533, 0.8726886])).unwrap();
        assert!(r.norm_inf() < 1e-5, "{r:?}");
    }

    #[test]
    fn treatment_field_vanishes_at_disease_free_state() {
        let m = model(sir_treatment(0.001, 9.5));
        let r = m.rhs(&StateVector(vec![9.5 / 0.1, 0.0])).unwrap();
        assert_eq!(r.0, vec![0.0, 0.0]);
    }

    #[test]
    fn singular_denominators_are_reported() {
        let m = model(sir_treatment(0.001, 9.5));
        let err = m.rhs(&StateVector(vec![10.0, -7.0])).unwrap_err();
        assert!(matches!(err, Error::Domain { denominator: "omega + I", .. }));
        let m = model(inhost(0.8, 0.036));
        let err = m.jacobian(&StateVector(vec![1.0, -0.823])).unwrap_err();
        assert!(matches!(err, Error::Domain { denominator: "Y + C", .. }));
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        let err = Model::new(inhost(0.8, -0.1)).unwrap_err();
        assert_eq!(
            err,
            Error::InvalidParameter {
                name: "b",
                value: -0.1
            }
        );
        assert!(Model::new(inhost(f64::NAN, 0.1)).is_err());
    }

    #[test]
    fn wrong_dimension_is_a_contract_violation() {
        let m = model(autoimmune_3d(1000.0));
        assert!(matches!(
            m.rhs(&StateVector(vec![1.0, 2.0])),
            Err(Error::ContractViolation { .. })
        ));
    }

    #[test]
    fn compound_a_vanishes_at_static_threshold() {
        let p = autoimmune_base(1.0);
        let ls = p.static_threshold();
        let at = AutoimmuneParams { lambda_e: ls, ..p };
        assert!(at.compound_a().abs() < 1e-12);
        let quoted = AutoimmuneParams {
            lambda_e: 900.45,
            ..p
        };
        assert!(quoted.compound_a().abs() < 1e-9 * quoted.background_loss());
        let b = AutoimmuneParams {
            lambda_e: 1000.0,
            ..p
        };
        assert!((b.compound_b() - 80.0).abs() < 1e-12);
    }

    #[test]
    fn autoimmune_2d_origin_eigenvalues_are_a_and_minus_mu_n() {
        let m = model(autoimmune_2d(700.0));
        let j = m.jacobian(&StateVector(vec![0.0, 0.0])).unwrap();
        let (a, _) = m.compound_params().unwrap();
        // lower-triangular at the origin
        assert_eq!(j.get(0, 1), 0.0);
        assert!((j.get(0, 0) - a).abs() < 1e-15);
        assert!((j.get(1, 1) + 0.1).abs() < 1e-15);
    }

    #[test]
    fn inhost_total_population_balance() {
        // d(X+Y)/dt = 1 - D X - Y: the incidence terms cancel
        let m = model(inhost(0.6, 0.07));
        for &(x, y) in &[(1.0, 0.3), (5.0, 2.0), (0.1, 7.0)] {
            let r = m.rhs(&StateVector(vec![x, y])).unwrap();
            let expected = 1.0 - 0.057 * x - y;
            assert!((r[0] + r[1] - expected).abs() < 1e-14);
        }
    }

    #[test]
    fn linear_solve_recovers_known_vector() {
        let mut j = Jacobian::zeros(3);
        j.data = vec![2.0, 1.0, -1.0, -3.0, -1.0, 2.0, -2.0, 1.0, 2.0];
        let x = j.solve(&[8.0, -11.0, -3.0]).unwrap();
        for (a, b) in x.iter().zip([2.0, 3.0, -1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }
}

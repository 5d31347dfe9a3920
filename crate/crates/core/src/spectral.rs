//! Characteristic polynomials, eigenvalues and stability classes.
//!
//! Planar polynomials are stored as `L² + T L + Δ` with `T = −trace(J)`,
//! so a stable equilibrium has `T > 0` and `Δ > 0`. Cubics are stored as
//! `L³ + c₂L² + c₁L + c₀`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::equilibrium::residual_ok;
use crate::error::{Error, Result};
use crate::model::{Jacobian, Model, ParameterSet, StateVector};
use crate::numeric::{bisect, geomspace};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CharPoly {
    Planar { t: f64, delta: f64 },
    Cubic { c2: f64, c1: f64, c0: f64 },
}

impl CharPoly {
    pub fn from_jacobian(j: &Jacobian) -> CharPoly {
        match j.dim {
            2 => CharPoly::Planar {
                t: -j.trace(),
                delta: j.determinant(),
            },
            3 => CharPoly::Cubic {
                c2: -j.trace(),
                c1: j.principal_minor_sum(),
                c0: -j.determinant(),
            },
            n => unreachable!("dimension {n}"),
        }
    }

    pub fn degree(&self) -> usize {
        match self {
            CharPoly::Planar { .. } => 2,
            CharPoly::Cubic { .. } => 3,
        }
    }

    pub fn eval(&self, l: Complex64) -> Complex64 {
        match *self {
            CharPoly::Planar { t, delta } => l * l + l * t + delta,
            CharPoly::Cubic { c2, c1, c0 } => ((l + c2) * l + c1) * l + c0,
        }
    }

    /// Quantity whose zero marks a purely imaginary pair: `T` for planar
    /// polynomials and `c₁c₂ − c₀` for cubics.
    pub fn hopf_function(&self) -> f64 {
        match *self {
            CharPoly::Planar { t, .. } => t,
            CharPoly::Cubic { c2, c1, c0 } => c1 * c2 - c0,
        }
    }

    /// Scale against which [`CharPoly::hopf_function`] is judged to vanish.
    pub fn hopf_scale(&self) -> f64 {
        match *self {
            CharPoly::Planar { t, delta } => 1.0_f64.max(t.abs()).max(delta.abs().sqrt()),
            CharPoly::Cubic { c2, c1, c0 } => 1e-300_f64.max((c1 * c2).abs()).max(c0.abs()),
        }
    }
}

/// Characteristic polynomial at an equilibrium.
pub fn char_poly(model: &Model, x: &StateVector) -> Result<CharPoly> {
    let j = model.jacobian(x)?;
    if !residual_ok(model, x) {
        return Err(Error::ContractViolation {
            operation: "char_poly",
            detail: format!("{:?} is not an equilibrium of {}", x.0, model.id()),
        });
    }
    Ok(CharPoly::from_jacobian(&j))
}

/// Planar coefficients of the in-host model in polynomial form:
/// `(a₁ₐ, a₂ₐ, [(A+B)Y+BC](Y+C))`, so that `T = a₁ₐ/den` and `Δ = a₂ₐ/den`.
pub fn inhost_polynomial_coefficients(params: &ParameterSet, y: f64) -> Option<(f64, f64, f64)> {
    let ParameterSet::InhostConvex(p) = params else {
        return None;
    };
    let (a, b, c, d) = (p.a, p.b, p.c, p.d);
    let s = a + b;
    let a1 = s * s * y.powi(3)
        + (2.0 * b * c + d) * s * y * y
        + (b * b * c * c + a * c * d + 2.0 * b * c * d - a * c) * y
        + b * c * c * d;
    let a2 = s * s * y.powi(3) + 2.0 * s * b * c * y * y + (b * b * c - a * d) * c * y;
    Some((a1, a2, (s * y + b * c) * (y + c)))
}

pub fn eigenvalues(cp: &CharPoly) -> Vec<Complex64> {
    match *cp {
        CharPoly::Planar { t, delta } => quadratic_eigs(t, delta),
        CharPoly::Cubic { c2, c1, c0 } => {
            let p = |l: f64| ((l + c2) * l + c1) * l + c0;
            let r = 1.0 + c2.abs().max(c1.abs()).max(c0.abs());
            // monic cubic: p(-r) < 0 < p(r)
            let mut root = bisect(p, -r, r, 0.0).unwrap_or(0.0);
            for _ in 0..3 {
                let dp = (3.0 * root + 2.0 * c2) * root + c1;
                if dp == 0.0 {
                    break;
                }
                let next = root - p(root) / dp;
                if p(next).abs() < p(root).abs() {
                    root = next;
                } else {
                    break;
                }
            }
            let b = c2 + root;
            let c = c1 + root * b;
            let mut out = quadratic_eigs(b, c);
            for l in out.iter_mut() {
                for _ in 0..2 {
                    let f = cp.eval(*l);
                    let df = (*l * 3.0 + 2.0 * c2) * *l + c1;
                    if df.norm() == 0.0 {
                        break;
                    }
                    let next = *l - f / df;
                    if cp.eval(next).norm() < f.norm() {
                        *l = next;
                    }
                }
            }
            out.push(Complex64::new(root, 0.0));
            out.sort_by(|a, b| b.re.total_cmp(&a.re).then(b.im.total_cmp(&a.im)));
            out
        }
    }
}

/// Roots of `L² + t L + delta`.
fn quadratic_eigs(t: f64, delta: f64) -> Vec<Complex64> {
    let disc = t * t - 4.0 * delta;
    if disc >= 0.0 {
        let q = -0.5 * (t + if t >= 0.0 { 1.0 } else { -1.0 } * disc.sqrt());
        let r1 = q;
        let r2 = if q != 0.0 { delta / q } else { 0.0 };
        let (hi, lo) = if r1 >= r2 { (r1, r2) } else { (r2, r1) };
        vec![Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)]
    } else {
        let im = 0.5 * (-disc).sqrt();
        vec![Complex64::new(-0.5 * t, im), Complex64::new(-0.5 * t, -im)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StabilityClass {
    StableNode,
    StableFocus,
    Saddle,
    UnstableNode,
    UnstableFocus,
    Nonhyperbolic,
}

impl StabilityClass {
    pub fn is_stable(self) -> bool {
        matches!(self, StabilityClass::StableNode | StabilityClass::StableFocus)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StabilityClass::StableNode => "stable_node",
            StabilityClass::StableFocus => "stable_focus",
            StabilityClass::Saddle => "saddle",
            StabilityClass::UnstableNode => "unstable_node",
            StabilityClass::UnstableFocus => "unstable_focus",
            StabilityClass::Nonhyperbolic => "nonhyperbolic",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "stable_node" => StabilityClass::StableNode,
            "stable_focus" => StabilityClass::StableFocus,
            "saddle" => StabilityClass::Saddle,
            "unstable_node" => StabilityClass::UnstableNode,
            "unstable_focus" => StabilityClass::UnstableFocus,
            "nonhyperbolic" => StabilityClass::Nonhyperbolic,
            _ => return None,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityReport {
    pub eigenvalues: Vec<Complex64>,
    pub class: StabilityClass,
}

impl StabilityReport {
    pub fn from_eigenvalues(eigenvalues: Vec<Complex64>) -> Self {
        let class = classify(&eigenvalues);
        Self { eigenvalues, class }
    }

    /// Largest real part.
    pub fn spectral_abscissa(&self) -> f64 {
        self.eigenvalues
            .iter()
            .map(|l| l.re)
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

fn classify(eigs: &[Complex64]) -> StabilityClass {
    if eigs
        .iter()
        .any(|l| l.re.abs() < 1e-9 * l.norm().max(1.0))
    {
        return StabilityClass::Nonhyperbolic;
    }
    let focus = eigs.iter().any(|l| l.im != 0.0);
    let neg = eigs.iter().filter(|l| l.re < 0.0).count();
    match (neg, focus) {
        (n, true) if n == eigs.len() => StabilityClass::StableFocus,
        (n, false) if n == eigs.len() => StabilityClass::StableNode,
        (0, true) => StabilityClass::UnstableFocus,
        (0, false) => StabilityClass::UnstableNode,
        _ => StabilityClass::Saddle,
    }
}

/// Stability of the linearization at `x` (not required to be an equilibrium).
pub fn stability_at(model: &Model, x: &StateVector) -> Result<StabilityReport> {
    let j = model.jacobian(x)?;
    Ok(StabilityReport::from_eigenvalues(eigenvalues(
        &CharPoly::from_jacobian(&j),
    )))
}

/// Value of the model's Hopf-feasibility indicator at infected component `x`.
///
/// For the treatment model this is `h₁(I)`, which does not involve Λ. For
/// the in-host model it is `h₂(Y)` at the model's own `B`, or with `B`
/// replaced by the branch value `B̄(Y)` when `eliminate` is set.
pub fn h_value(params: &ParameterSet, x: f64, eliminate: bool) -> Result<f64> {
    match params {
        ParameterSet::SirTreatment(p) => {
            let q = &p.sir;
            let (d, k, b) = (q.d, q.k, q.beta);
            let w = p.omega + x;
            let lead = (d * k * x + b * x + d) / d;
            Ok(lead
                * ((k * x + 1.0) * d * d * w * w
                    - b * (q.epsilon + q.gamma) * x * w * w
                    - p.alpha * b * p.omega * x))
        }
        ParameterSet::InhostConvex(p) => {
            let (a, c, d) = (p.a, p.c, p.d);
            if eliminate {
                let k = a * c * (d - 1.0);
                Ok(((k - d * d) * x * x - (k + 2.0 * c * d * d) * x - c * c * d * d) / (x - 1.0))
            } else {
                let s = a + p.b;
                Ok(d * s * x * x + (2.0 * c * d * s - a * c) * x + p.b * c * c * d)
            }
        }
        other => Err(Error::ContractViolation {
            operation: "h_indicator",
            detail: format!("no Hopf-feasibility indicator for {}", other.model_id()),
        }),
    }
}

/// Sign of the indicator as the infected component tends to +∞, if it is
/// defined there.
fn h_sign_at_infinity(params: &ParameterSet, eliminate: bool) -> Option<f64> {
    match params {
        ParameterSet::SirTreatment(p) => {
            let q = &p.sir;
            Some((q.k * q.d * q.d - q.beta * (q.epsilon + q.gamma)).signum())
        }
        ParameterSet::InhostConvex(_) if eliminate => None,
        ParameterSet::InhostConvex(_) => Some(1.0),
        _ => None,
    }
}

/// Where the indicator is negative on `(0, 10³]`, as closed intervals.
/// The upper end is `+∞` when the indicator stays negative beyond the grid.
///
/// With `eliminate`, the in-host indicator is only scanned on `0 < Y < 1`:
/// beyond `Y = 1` the branch value `B̄(Y)` is negative whatever the
/// parameters, and `Y = 1` itself is a pole.
pub fn h_negativity_intervals(params: &ParameterSet, eliminate: bool) -> Result<Vec<(f64, f64)>> {
    let bounded = eliminate && matches!(params, ParameterSet::InhostConvex(_));
    let grid: Vec<f64> = geomspace(1e-6, 1e3, 1024)
        .into_iter()
        .filter(|&x| !bounded || x < 1.0)
        .collect();
    let vals = grid
        .iter()
        .map(|&x| h_value(params, x, eliminate))
        .collect::<Result<Vec<f64>>>()?;
    let h = |x: f64| h_value(params, x, eliminate).unwrap_or(f64::NAN);
    let refine = |lo: f64, hi: f64| bisect(h, lo, hi, 1e-12 * hi).unwrap_or(0.5 * (lo + hi));

    let mut out = Vec::new();
    let mut start: Option<f64> = (vals[0] < 0.0).then_some(0.0);
    for i in 0..grid.len() - 1 {
        let (a, b) = (vals[i], vals[i + 1]);
        if a >= 0.0 && b < 0.0 {
            start = Some(refine(grid[i], grid[i + 1]));
        } else if a < 0.0 && b >= 0.0 {
            if let Some(s) = start.take() {
                out.push((s, refine(grid[i], grid[i + 1])));
            }
        }
    }
    if let Some(s) = start {
        let last = *grid.last().unwrap();
        let end = if bounded {
            // the indicator tends to +∞ as Y -> 1 from below, so the last
            // crossing lies between the final node and the pole
            let top = 1.0 - 1e-12;
            if h(top) > 0.0 {
                refine(last, top)
            } else {
                1.0
            }
        } else {
            match h_sign_at_infinity(params, eliminate) {
                Some(sg) if sg < 0.0 => f64::INFINITY,
                _ => last,
            }
        };
        out.push((s, end));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equilibrium::infected_equilibria;
    use crate::model::presets::*;

    #[test]
    fn pure_imaginary_pair() {
        let e = eigenvalues(&CharPoly::Planar { t: 0.0, delta: 4.0 });
        assert_eq!(e[0], Complex64::new(0.0, 2.0));
        assert_eq!(e[1], Complex64::new(0.0, -2.0));
    }

    #[test]
    fn cubic_hopf_factorization() {
        // (L² + 3)(L + 2)
        let cp = CharPoly::Cubic {
            c2: 2.0,
            c1: 3.0,
            c0: 6.0,
        };
        let e = eigenvalues(&cp);
        assert!(e.iter().any(|l| (l - Complex64::new(-2.0, 0.0)).norm() < 1e-12));
        assert!(e
            .iter()
            .any(|l| (l - Complex64::new(0.0, 3f64.sqrt())).norm() < 1e-12));
        assert!(cp.hopf_function().abs() < 1e-15);
    }

    #[test]
    fn cubic_three_real_roots() {
        // (L-1)(L+2)(L+5) = L³ + 6L² + 3L - 10
        let e = eigenvalues(&CharPoly::Cubic {
            c2: 6.0,
            c1: 3.0,
            c0: -10.0,
        });
        let mut re: Vec<f64> = e.iter().map(|l| l.re).collect();
        re.sort_by(f64::total_cmp);
        for (a, b) in re.iter().zip([-5.0, -2.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn classes() {
        let c = |v: Vec<(f64, f64)>| {
            StabilityReport::from_eigenvalues(v.into_iter().map(|(a, b)| Complex64::new(a, b)).collect())
                .class
        };
        assert_eq!(c(vec![(-1.0, 0.0), (-2.0, 0.0)]), StabilityClass::StableNode);
        assert_eq!(c(vec![(-1.0, 1.0), (-1.0, -1.0)]), StabilityClass::StableFocus);
        assert_eq!(c(vec![(1.0, 0.0), (-2.0, 0.0)]), StabilityClass::Saddle);
        assert_eq!(c(vec![(1.0, 1.0), (1.0, -1.0)]), StabilityClass::UnstableFocus);
        assert_eq!(c(vec![(0.0, 1.0), (0.0, -1.0)]), StabilityClass::Nonhyperbolic);
    }

    #[test]
    fn inhost_uninfected_eigenvalues() {
        let m = Model::new(inhost(0.8, 0.03)).unwrap();
        let r = stability_at(&m, &m.uninfected_state()).unwrap();
        let mut re: Vec<f64> = r.eigenvalues.iter().map(|l| l.re).collect();
        re.sort_by(f64::total_cmp);
        assert!((re[0] + 0.057).abs() < 1e-12 || (re[1] + 0.057).abs() < 1e-12);
        assert!(re.iter().any(|v| (v - (0.03 / 0.057 - 1.0)).abs() < 1e-12));
    }

    #[test]
    fn inhost_polynomial_form_matches_jacobian() {
        for &(a, b) in &[(0.8, 0.036), (0.07, 0.08), (0.04, 0.07)] {
            let params = inhost(a, b);
            let m = Model::new(params).unwrap();
            for e in infected_equilibria(&m).unwrap() {
                let y = e.state[1];
                let (a1, a2, den) = inhost_polynomial_coefficients(&params, y).unwrap();
                let CharPoly::Planar { t, delta } = char_poly(&m, &e.state).unwrap() else {
                    panic!()
                };
                assert!((t - a1 / den).abs() <= 1e-10 * t.abs().max(1e-3), "{t} {}", a1 / den);
                assert!((delta - a2 / den).abs() <= 1e-10 * delta.abs().max(1e-3));
            }
        }
    }

    #[test]
    fn char_poly_rejects_non_equilibrium() {
        let m = Model::new(inhost(0.8, 0.036)).unwrap();
        assert!(matches!(
            char_poly(&m, &StateVector(vec![1.0, 1.0])),
            Err(Error::ContractViolation { .. })
        ));
    }

    #[test]
    fn h2_at_origin_is_positive() {
        let p = inhost(0.3, 0.02);
        let h = h_value(&p, 0.0, false).unwrap();
        assert!((h - 0.02 * 0.823 * 0.823 * 0.057).abs() < 1e-15);
    }
}

//! Shape of the incidence terms as functions of the infective level, and
//! their intersections with the removal ray `g(I) = m I`.
//!
//! Along the in-host equilibrium relation the intersections with the ray
//! of unit slope are exactly the infected equilibria.

use serde::{Deserialize, Serialize};

use crate::numeric::{bisect, geomspace, sign_change_brackets};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "form", rename_all = "snake_case")]
pub enum Incidence {
    /// `β S I / (1 + k I)` at fixed susceptible level `s`.
    Saturating { beta: f64, k: f64, s: f64 },
    /// Saturating incidence minus the treatment term `α I / (ω + I)`.
    WithTreatment { beta: f64, k: f64, s: f64, alpha: f64, omega: f64 },
    /// `(B + A Y / (Y + C)) X Y` at fixed target-cell level `x`.
    InhostFixedX { a: f64, b: f64, c: f64, x: f64 },
    /// In-host incidence with `X` eliminated through the equilibrium relation.
    InhostAlongBranch { a: f64, b: f64, c: f64, d: f64 },
}

impl Incidence {
    pub fn name(&self) -> &'static str {
        match self {
            Incidence::Saturating { .. } => "saturating",
            Incidence::WithTreatment { .. } => "with_treatment",
            Incidence::InhostFixedX { .. } => "inhost_fixed_x",
            Incidence::InhostAlongBranch { .. } => "inhost_along_branch",
        }
    }

    pub fn value(&self, i: f64) -> f64 {
        match *self {
            Incidence::Saturating { beta, k, s } => beta * s * i / (1.0 + k * i),
            Incidence::WithTreatment { beta, k, s, alpha, omega } => {
                beta * s * i / (1.0 + k * i) - alpha * i / (omega + i)
            }
            Incidence::InhostFixedX { a, b, c, x } => (b + a * i / (i + c)) * x * i,
            Incidence::InhostAlongBranch { a, b, c, d } => {
                let ab = a + b;
                i * (ab * i + b * c) / (ab * i * i + (b * c + d) * i + c * d)
            }
        }
    }

    /// Derivative in the infective variable.
    pub fn d1(&self, i: f64) -> f64 {
        match *self {
            Incidence::Saturating { beta, k, s } => beta * s / (1.0 + k * i).powi(2),
            Incidence::WithTreatment { beta, k, s, alpha, omega } => {
                beta * s / (1.0 + k * i).powi(2) - alpha * omega / (omega + i).powi(2)
            }
            Incidence::InhostFixedX { a, b, c, x } => {
                a * c * x * i / (i + c).powi(2) + (b + a * i / (i + c)) * x
            }
            Incidence::InhostAlongBranch { a, b, c, d } => {
                let ab = a + b;
                let q = ab * i * i + (b * c + d) * i + c * d;
                d * (ab * i * i + 2.0 * ab * c * i + b * c * c) / (q * q)
            }
        }
    }

    /// Second derivative in the infective variable.
    pub fn d2(&self, i: f64) -> f64 {
        match *self {
            Incidence::Saturating { beta, k, s } => -2.0 * k * beta * s / (1.0 + k * i).powi(3),
            Incidence::WithTreatment { beta, k, s, alpha, omega } => {
                -2.0 * k * beta * s / (1.0 + k * i).powi(3)
                    + 2.0 * alpha * omega / (omega + i).powi(3)
            }
            Incidence::InhostFixedX { a, c, x, .. } => 2.0 * a * c * c * x / (i + c).powi(3),
            Incidence::InhostAlongBranch { a, b, c, d } => {
                let ab = a + b;
                let q = ab * i * i + (b * c + d) * i + c * d;
                let p = ab * ab * i.powi(3)
                    + 3.0 * c * ab * ab * i * i
                    + 3.0 * ab * b * c * c * i
                    + (b * b * c - a * d) * c * c;
                -2.0 * d * p / q.powi(3)
            }
        }
    }

    /// Derivative in the susceptible variable, where it is one.
    pub fn d_susceptible(&self, i: f64) -> Option<f64> {
        match *self {
            Incidence::Saturating { beta, k, .. } | Incidence::WithTreatment { beta, k, .. } => {
                Some(beta * i / (1.0 + k * i))
            }
            Incidence::InhostFixedX { a, b, c, .. } => Some((b + a * i / (i + c)) * i),
            Incidence::InhostAlongBranch { .. } => None,
        }
    }

    /// Value with the susceptible level set to zero.
    fn at_zero_susceptible(&self, i: f64) -> Option<f64> {
        match *self {
            Incidence::Saturating { .. } | Incidence::InhostFixedX { .. } => Some(0.0),
            Incidence::WithTreatment { alpha, omega, .. } => Some(-alpha * i / (omega + i)),
            Incidence::InhostAlongBranch { .. } => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Concavity {
    Concave,
    Convex,
    ConvexConcave,
    /// Any other sign pattern of the second derivative.
    Indefinite,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub i_max: f64,
    pub points: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { i_max: 1e3, points: 4096 }
    }
}

impl GridSpec {
    /// Geometric grid on `[1e-6 i_max, i_max]`.
    pub fn nodes(&self) -> Vec<f64> {
        geomspace(1e-6 * self.i_max, self.i_max, self.points)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShapeReport {
    pub incidence: Incidence,
    /// Zero without infectives and without susceptibles.
    pub vanishes_on_axes: bool,
    /// Increasing in both arguments on the grid.
    pub increasing: bool,
    pub concavity: Concavity,
    pub inflection: Option<f64>,
    pub ray_slope: f64,
    pub intersections: Vec<f64>,
    pub grid: GridSpec,
}

/// Positive abscissae where the curve meets the ray `m I` on the grid.
pub fn ray_intersections(f: &Incidence, slope: f64, grid: &GridSpec) -> Vec<f64> {
    let nodes = grid.nodes();
    let gap = |i: f64| f.value(i) - slope * i;
    let values: Vec<f64> = nodes.iter().map(|&i| gap(i)).collect();
    sign_change_brackets(&nodes, &values)
        .into_iter()
        .filter_map(|(_, lo, hi)| bisect(gap, lo, hi, 1e-15 * hi).ok())
        .collect()
}

pub fn shape_classify(f: &Incidence, slope: f64, grid: &GridSpec) -> ShapeReport {
    let nodes = grid.nodes();
    let vanishes_on_axes = f.value(0.0) == 0.0
        && nodes
            .iter()
            .all(|&i| f.at_zero_susceptible(i).is_none_or(|v| v == 0.0));
    let increasing = nodes
        .iter()
        .all(|&i| f.d1(i) > 0.0 && f.d_susceptible(i).is_none_or(|v| v > 0.0));

    let second: Vec<f64> = nodes.iter().map(|&i| f.d2(i)).collect();
    let changes = sign_change_brackets(&nodes, &second);
    let (concavity, inflection) = if second.iter().all(|&v| v <= 0.0) {
        (Concavity::Concave, None)
    } else if second.iter().all(|&v| v >= 0.0) {
        (Concavity::Convex, None)
    } else if changes.len() == 1 && second[0] > 0.0 {
        let (_, lo, hi) = changes[0];
        let at = bisect(|i| f.d2(i), lo, hi, 1e-8).ok();
        (Concavity::ConvexConcave, at)
    } else {
        (Concavity::Indefinite, None)
    };

    ShapeReport {
        incidence: *f,
        vanishes_on_axes,
        increasing,
        concavity,
        inflection,
        ray_slope: slope,
        intersections: ray_intersections(f, slope, grid),
        grid: *grid,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{Dual, Scalar};

    fn fig1() -> (Incidence, Incidence, f64) {
        let f3 = Incidence::Saturating { beta: 0.01, k: 0.01, s: 50.0 };
        let f4 = Incidence::WithTreatment { beta: 0.01, k: 0.01, s: 50.0, alpha: 6.0, omega: 7.0 };
        (f3, f4, 0.13)
    }

    #[test]
    fn saturating_is_concave_with_one_crossing() {
        let (f3, _, m) = fig1();
        let r = shape_classify(&f3, m, &GridSpec::default());
        assert_eq!(r.concavity, Concavity::Concave);
        assert!(r.vanishes_on_axes && r.increasing);
        assert_eq!(r.intersections.len(), 1);
        // 0.5 / (1 + 0.01 I) = 0.13
        assert!((r.intersections[0] - (0.5 / 0.13 - 1.0) / 0.01).abs() < 1e-9);
    }

    #[test]
    fn treatment_gives_s_shape_and_two_crossings() {
        let (_, f4, m) = fig1();
        let r = shape_classify(&f4, m, &GridSpec::default());
        assert_eq!(r.concavity, Concavity::ConvexConcave);
        let i1 = r.inflection.unwrap();
        assert!(f4.d2(i1 * 0.99) > 0.0 && f4.d2(i1 * 1.01) < 0.0);
        assert_eq!(r.intersections.len(), 2);
        assert!(!r.vanishes_on_axes);
    }

    #[test]
    fn fixed_x_is_convex_with_one_crossing() {
        let f = Incidence::InhostFixedX { a: 0.364, b: 0.03, c: 0.823, x: 12.54 };
        let r = shape_classify(&f, 1.0, &GridSpec::default());
        assert_eq!(r.concavity, Concavity::Convex);
        assert_eq!(r.intersections.len(), 1);
    }

    #[test]
    fn flat_ray_misses_positive_curve() {
        let f = Incidence::InhostFixedX { a: 0.364, b: 0.03, c: 0.823, x: 12.54 };
        assert!(GridSpec::default().nodes().iter().all(|&i| f.value(i) > 0.0));
        assert!(ray_intersections(&f, 0.0, &GridSpec::default()).is_empty());
    }

    fn along<T: Scalar>(a: f64, b: f64, c: f64, d: f64, y: T) -> T {
        let ab = T::cst(a + b);
        let q = ab * y * y + T::cst(b * c + d) * y + T::cst(c * d);
        y * (ab * y + T::cst(b * c)) / q
    }

    #[test]
    fn closed_forms_match_dual_numbers() {
        let (a, b, c, d) = (0.364, 0.03, 0.823, 0.057);
        let f = Incidence::InhostAlongBranch { a, b, c, d };
        for &y in &[0.01, 0.3, 2.0, 40.0] {
            let v: Dual<Dual<f64>> = Dual::new(Dual::variable(y), Dual::cst(1.0));
            let r = along(a, b, c, d, v);
            assert!((r.re.eps - f.d1(y)).abs() < 1e-12 * f.d1(y).abs().max(1.0));
            assert!((r.eps.eps - f.d2(y)).abs() < 1e-12 * f.d2(y).abs().max(1.0));
        }
    }
}

//! Scalar abstraction used to evaluate vector fields either on plain `f64`
//! or on (nested) dual numbers, which yields exact derivatives of any order
//! up to the nesting depth.

use std::fmt::Debug;
use std::ops::{Add, Div, Mul, Neg, Sub};

pub trait Scalar:
    Copy
    + Debug
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    fn cst(v: f64) -> Self;
    /// Value part, stripping every infinitesimal component.
    fn value(&self) -> f64;

    fn scale(self, k: f64) -> Self {
        self * Self::cst(k)
    }
}

impl Scalar for f64 {
    #[inline]
    fn cst(v: f64) -> Self {
        v
    }
    #[inline]
    fn value(&self) -> f64 {
        *self
    }
}

/// First-order dual number `re + eps·ε`, `ε² = 0`.
///
/// Nesting (`Dual<Dual<f64>>`, ...) gives mixed partials: seeding each level
/// with a different direction makes the all-ε coefficient equal to the mixed
/// directional derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dual<T> {
    pub re: T,
    pub eps: T,
}

impl<T: Scalar> Dual<T> {
    pub fn new(re: T, eps: T) -> Self {
        Self { re, eps }
    }

    pub fn variable(re: T) -> Self {
        Self {
            re,
            eps: T::cst(1.0),
        }
    }
}

impl<T: Scalar> Add for Dual<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.re + o.re, self.eps + o.eps)
    }
}

impl<T: Scalar> Sub for Dual<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.re - o.re, self.eps - o.eps)
    }
}

impl<T: Scalar> Mul for Dual<T> {
    type Output = Self;
    #[inline]
    fn mul(self, o: Self) -> Self {
        Self::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl<T: Scalar> Div for Dual<T> {
    type Output = Self;
    #[inline]
    fn div(self, o: Self) -> Self {
        let q = self.re / o.re;
        Self::new(q, (self.eps - q * o.eps) / o.re)
    }
}

impl<T: Scalar> Neg for Dual<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.re, -self.eps)
    }
}

impl<T: Scalar> Scalar for Dual<T> {
    fn cst(v: f64) -> Self {
        Self::new(T::cst(v), T::cst(0.0))
    }
    fn value(&self) -> f64 {
        self.re.value()
    }
}

pub type Dual2 = Dual<Dual<f64>>;
pub type Dual3 = Dual<Dual<Dual<f64>>>;

/// Third-order seed: value `v` perturbed by `dir[0]`, `dir[1]`, `dir[2]`
/// at the outermost, middle and innermost levels.
pub fn seed3(v: f64, dir: [f64; 3]) -> Dual3 {
    let inner = |a: f64, b: f64| Dual::new(a, b);
    let re = Dual::new(inner(v, dir[2]), inner(dir[1], 0.0));
    let eps = Dual::new(inner(dir[0], 0.0), inner(0.0, 0.0));
    Dual::new(re, eps)
}

/// Mixed third derivative coefficient (ε₀ε₁ε₂) of a `Dual3`.
pub fn d3(x: &Dual3) -> f64 {
    x.eps.eps.eps
}

/// Second-derivative coefficient along the outer two levels (ε₀ε₁).
pub fn d2_outer(x: &Dual3) -> f64 {
    x.eps.eps.re
}

/// Second-derivative coefficient along the inner two levels (ε₁ε₂).
pub fn d2_inner(x: &Dual3) -> f64 {
    x.re.eps.eps
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic<T: Scalar>(x: T, y: T) -> T {
        // x³y + x/y
        x * x * x * y + x / y
    }

    #[test]
    fn first_derivative_of_quotient() {
        let x = Dual::variable(2.0);
        let y = Dual::cst(4.0);
        let f = cubic(x, y);
        // d/dx = 3x²y + 1/y = 48 + 0.25
        assert!((f.eps - 48.25).abs() < 1e-14);
    }

    #[test]
    fn nested_duals_give_mixed_partials() {
        let (x0, y0) = (1.5, 0.7);
        // ∂³/∂x∂x∂y of x³y + x/y = 6x
        let x = seed3(x0, [1.0, 1.0, 0.0]);
        let y = seed3(y0, [0.0, 0.0, 1.0]);
        let f = cubic(x, y);
        assert!((d3(&f) - 6.0 * x0).abs() < 1e-12);
        // outer pair is (x, x): ∂²/∂x² = 6xy
        assert!((d2_outer(&f) - 6.0 * x0 * y0).abs() < 1e-12);
        // inner pair is (x, y): ∂²/∂x∂y = 3x² - 1/y²
        assert!((d2_inner(&f) - (3.0 * x0 * x0 - 1.0 / (y0 * y0))).abs() < 1e-12);
    }
}

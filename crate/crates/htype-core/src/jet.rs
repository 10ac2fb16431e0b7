//! Hyper-dual arithmetic: value plus two first-order perturbations and their
//! mixed second-order term. Evaluating a function on seeded jets yields exact
//! (machine-precision) first and second derivatives along the two seeded
//! directions; seeding both slots with the same direction yields the pure
//! second derivative in `d12`.

use std::ops::{Add, Div, Mul, Neg, Sub};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: f64,
    pub d1: f64,
    pub d2: f64,
    pub d12: f64,
}

impl Jet {
    /// A constant (no perturbation).
    pub const fn c(v: f64) -> Self {
        Jet {
            v,
            d1: 0.0,
            d2: 0.0,
            d12: 0.0,
        }
    }

    /// Seed the first perturbation slot.
    pub const fn var1(v: f64) -> Self {
        Jet {
            v,
            d1: 1.0,
            d2: 0.0,
            d12: 0.0,
        }
    }

    /// Seed the second perturbation slot.
    pub const fn var2(v: f64) -> Self {
        Jet {
            v,
            d1: 0.0,
            d2: 1.0,
            d12: 0.0,
        }
    }

    /// Seed both slots, so `d12` carries the pure second derivative.
    pub const fn var12(v: f64) -> Self {
        Jet {
            v,
            d1: 1.0,
            d2: 1.0,
            d12: 0.0,
        }
    }

    /// Lift a smooth scalar function through the jet given its value and
    /// first/second derivatives at `self.v`.
    pub fn chain(self, f: f64, df: f64, ddf: f64) -> Self {
        Jet {
            v: f,
            d1: df * self.d1,
            d2: df * self.d2,
            d12: df * self.d12 + ddf * self.d1 * self.d2,
        }
    }

    pub fn powf(self, e: f64) -> Self {
        let f = self.v.powf(e);
        let df = e * self.v.powf(e - 1.0);
        let ddf = e * (e - 1.0) * self.v.powf(e - 2.0);
        self.chain(f, df, ddf)
    }

    pub fn powi(self, e: i32) -> Self {
        let f = self.v.powi(e);
        let df = f64::from(e) * self.v.powi(e - 1);
        let ddf = f64::from(e) * f64::from(e - 1) * self.v.powi(e - 2);
        self.chain(f, df, ddf)
    }

    pub fn sqrt(self) -> Self {
        let f = self.v.sqrt();
        self.chain(f, 0.5 / f, -0.25 / (f * self.v))
    }

    pub fn exp(self) -> Self {
        let f = self.v.exp();
        self.chain(f, f, f)
    }

    pub fn ln(self) -> Self {
        self.chain(self.v.ln(), 1.0 / self.v, -1.0 / (self.v * self.v))
    }

    pub fn recip(self) -> Self {
        let f = 1.0 / self.v;
        self.chain(f, -f * f, 2.0 * f * f * f)
    }

    pub fn is_finite(self) -> bool {
        self.v.is_finite() && self.d1.is_finite() && self.d2.is_finite() && self.d12.is_finite()
    }
}

impl Add for Jet {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        Jet {
            v: self.v + o.v,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
            d12: self.d12 + o.d12,
        }
    }
}

impl Sub for Jet {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        Jet {
            v: self.v - o.v,
            d1: self.d1 - o.d1,
            d2: self.d2 - o.d2,
            d12: self.d12 - o.d12,
        }
    }
}

impl Mul for Jet {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        Jet {
            v: self.v * o.v,
            d1: self.v * o.d1 + self.d1 * o.v,
            d2: self.v * o.d2 + self.d2 * o.v,
            d12: self.v * o.d12 + self.d12 * o.v + self.d1 * o.d2 + self.d2 * o.d1,
        }
    }
}

impl Div for Jet {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        self * o.recip()
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        Jet {
            v: -self.v,
            d1: -self.d1,
            d2: -self.d2,
            d12: -self.d12,
        }
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(self, o: f64) -> Jet {
        Jet { v: self.v + o, ..self }
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    fn sub(self, o: f64) -> Jet {
        Jet { v: self.v - o, ..self }
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, o: f64) -> Jet {
        Jet {
            v: self.v * o,
            d1: self.d1 * o,
            d2: self.d2 * o,
            d12: self.d12 * o,
        }
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    fn div(self, o: f64) -> Jet {
        self * (1.0 / o)
    }
}

impl Add<Jet> for f64 {
    type Output = Jet;
    fn add(self, o: Jet) -> Jet {
        o + self
    }
}

impl Sub<Jet> for f64 {
    type Output = Jet;
    fn sub(self, o: Jet) -> Jet {
        -o + self
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    fn mul(self, o: Jet) -> Jet {
        o * self
    }
}

impl Div<Jet> for f64 {
    type Output = Jet;
    fn div(self, o: Jet) -> Jet {
        o.recip() * self
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    // d/dx and d²/dx² of x ↦ x³ at x = 2 via a doubly-seeded jet.
    #[test]
    fn cube_derivatives() {
        let x = Jet::var12(2.0);
        let y = x * x * x;
        assert_relative_eq!(y.v, 8.0);
        assert_relative_eq!(y.d1, 12.0);
        assert_relative_eq!(y.d2, 12.0);
        assert_relative_eq!(y.d12, 12.0);
    }

    #[test]
    fn mixed_partial() {
        // f(x, y) = x² y at (3, 5): f_xy = 2x = 6.
        let x = Jet::var1(3.0);
        let y = Jet::var2(5.0);
        let f = x * x * y;
        assert_relative_eq!(f.d1, 30.0);
        assert_relative_eq!(f.d2, 9.0);
        assert_relative_eq!(f.d12, 6.0);
    }

    #[test]
    fn powf_sqrt_div_consistency() {
        let x = Jet::var12(1.7);
        let a = x.powf(0.5);
        let b = x.sqrt();
        assert_relative_eq!(a.d12, b.d12, max_relative = 1e-13);
        let c = Jet::c(1.0) / x;
        let d = x.powf(-1.0);
        assert_relative_eq!(c.d12, d.d12, max_relative = 1e-13);
    }

    #[test]
    fn exp_ln_roundtrip() {
        let x = Jet::var12(0.8);
        let y = x.exp().ln();
        assert_relative_eq!(y.v, 0.8, max_relative = 1e-14);
        assert_relative_eq!(y.d1, 1.0, max_relative = 1e-13);
        assert_relative_eq!(y.d12, 0.0, epsilon = 1e-13);
    }
}

//! First-order complex jets and the principal-branch kernel.
//!
//! Every transform evaluator works on [`Jet`]s: a value together with its
//! derivative with respect to the query point. Newton iterations, implicit
//! function derivatives and the PDE stencils all read the derivative from
//! here, so closed forms only have to be written once.
//!
//! Logarithms and real powers are always the principal branch on
//! `C \ (-inf, 0]`: `log z = ln|z| + i arg z` with `arg z in (-pi, pi]`, and
//! `z^p = exp(p log z)`. A signed zero imaginary part selects the side of the
//! cut, which the evaluators rely on for boundary values.

use std::ops::{Add, Div, Mul, Neg, Sub};

use num_complex::Complex64;

pub type C64 = Complex64;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Principal logarithm.
#[inline]
pub fn plog(z: C64) -> C64 {
    C64::new(z.norm().ln(), z.im.atan2(z.re))
}

/// Principal real power `z^p`; `0^p = 0` for `p > 0`.
#[inline]
pub fn ppow(z: C64, p: f64) -> C64 {
    if z.re == 0.0 && z.im == 0.0 {
        return if p > 0.0 {
            ZERO
        } else if p == 0.0 {
            ONE
        } else {
            C64::new(f64::INFINITY, 0.0)
        };
    }
    let r = z.norm().powf(p);
    let theta = z.im.atan2(z.re) * p;
    C64::new(r * theta.cos(), r * theta.sin())
}

/// `ln(1 + x)` without cancellation for small `x`.
pub fn ln_1p(x: C64) -> C64 {
    if x.norm() < 1e-2 {
        // alternating series, 10 terms reach 1e-20
        let mut term = x;
        let mut sum = ZERO;
        for k in 1..=10 {
            sum += term / k as f64;
            term *= -x;
        }
        sum
    } else {
        plog(x + 1.0)
    }
}

/// `exp(x) - 1` without cancellation for small `x`.
pub fn exp_m1(x: C64) -> C64 {
    if x.norm() < 1e-2 {
        let mut term = x;
        let mut sum = ZERO;
        for k in 2..=10 {
            sum += term;
            term *= x / k as f64;
        }
        sum
    } else {
        x.exp() - 1.0
    }
}

/// `1 - (1 - u)^p`, accurate when `u` is small.
pub fn one_minus_pow(u: Jet, p: f64) -> Jet {
    -((-u).ln_1p() * p).exp_m1()
}

/// Principal square root.
#[inline]
pub fn psqrt(z: C64) -> C64 {
    z.sqrt()
}

/// A complex number paired with its derivative along the query variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub v: C64,
    pub d: C64,
}

impl Jet {
    #[inline]
    pub fn new(v: C64, d: C64) -> Self {
        Jet { v, d }
    }

    /// The independent variable at `z`.
    #[inline]
    pub fn var(z: C64) -> Self {
        Jet { v: z, d: ONE }
    }

    #[inline]
    pub fn constant(v: C64) -> Self {
        Jet { v, d: ZERO }
    }

    #[inline]
    pub fn real(x: f64) -> Self {
        Jet::constant(C64::new(x, 0.0))
    }

    #[inline]
    pub fn recip(self) -> Self {
        let inv = self.v.finv();
        Jet {
            v: inv,
            d: -self.d * inv * inv,
        }
    }

    #[inline]
    pub fn ln(self) -> Self {
        Jet {
            v: plog(self.v),
            d: self.d / self.v,
        }
    }

    /// `ln(1 + self)`, accurate for small values.
    pub fn ln_1p(self) -> Self {
        Jet {
            v: ln_1p(self.v),
            d: self.d / (self.v + 1.0),
        }
    }

    /// `exp(self) - 1`, accurate for small values.
    pub fn exp_m1(self) -> Self {
        Jet {
            v: exp_m1(self.v),
            d: self.d * self.v.exp(),
        }
    }

    #[inline]
    pub fn exp(self) -> Self {
        let e = self.v.exp();
        Jet { v: e, d: self.d * e }
    }

    /// Principal power with the exact derivative `p z^(p-1) dz`.
    #[inline]
    pub fn powf(self, p: f64) -> Self {
        if p == 1.0 {
            return self;
        }
        if p == 0.0 {
            return Jet::constant(ONE);
        }
        let w = ppow(self.v, p);
        let d = if self.d == ZERO {
            ZERO
        } else {
            self.d * w * p / self.v
        };
        Jet { v: w, d }
    }

    #[inline]
    pub fn sqrt(self) -> Self {
        let s = psqrt(self.v);
        Jet {
            v: s,
            d: self.d / (2.0 * s),
        }
    }

    #[inline]
    pub fn conj(self) -> Self {
        Jet {
            v: self.v.conj(),
            d: self.d.conj(),
        }
    }

    #[inline]
    pub fn scale(self, a: f64) -> Self {
        Jet {
            v: self.v * a,
            d: self.d * a,
        }
    }

    /// Chain rule: `self` is `f(w)` with derivative in `w`, `inner` is `w(z)`.
    #[inline]
    pub fn chain(self, inner: Jet) -> Self {
        Jet {
            v: self.v,
            d: self.d * inner.d,
        }
    }

    #[inline]
    pub fn is_finite(&self) -> bool {
        self.v.re.is_finite() && self.v.im.is_finite() && self.d.re.is_finite() && self.d.im.is_finite()
    }
}

impl Add for Jet {
    type Output = Jet;
    #[inline]
    fn add(self, o: Jet) -> Jet {
        Jet::new(self.v + o.v, self.d + o.d)
    }
}

impl Sub for Jet {
    type Output = Jet;
    #[inline]
    fn sub(self, o: Jet) -> Jet {
        Jet::new(self.v - o.v, self.d - o.d)
    }
}

impl Mul for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, o: Jet) -> Jet {
        Jet::new(self.v * o.v, self.d * o.v + self.v * o.d)
    }
}

impl Div for Jet {
    type Output = Jet;
    #[inline]
    fn div(self, o: Jet) -> Jet {
        let q = self.v.fdiv(o.v);
        Jet::new(q, (self.d - q * o.d).fdiv(o.v))
    }
}

impl Neg for Jet {
    type Output = Jet;
    #[inline]
    fn neg(self) -> Jet {
        Jet::new(-self.v, -self.d)
    }
}

impl Add<C64> for Jet {
    type Output = Jet;
    #[inline]
    fn add(self, c: C64) -> Jet {
        Jet::new(self.v + c, self.d)
    }
}

impl Sub<C64> for Jet {
    type Output = Jet;
    #[inline]
    fn sub(self, c: C64) -> Jet {
        Jet::new(self.v - c, self.d)
    }
}

impl Mul<C64> for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, c: C64) -> Jet {
        Jet::new(self.v * c, self.d * c)
    }
}

impl Div<C64> for Jet {
    type Output = Jet;
    #[inline]
    fn div(self, c: C64) -> Jet {
        Jet::new(self.v / c, self.d / c)
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn add(self, c: f64) -> Jet {
        Jet::new(self.v + c, self.d)
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn sub(self, c: f64) -> Jet {
        Jet::new(self.v - c, self.d)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, c: f64) -> Jet {
        self.scale(c)
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn div(self, c: f64) -> Jet {
        self.scale(1.0 / c)
    }
}

/// `c - j`
#[inline]
pub fn rsub(c: f64, j: Jet) -> Jet {
    Jet::new(C64::new(c, 0.0) - j.v, -j.d)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn principal_branch_on_the_cut() {
        // arg in (-pi, pi]: the upper side of the negative axis
        let above = C64::new(-4.0, 0.0);
        let below = C64::new(-4.0, -0.0);
        assert!(close(ppow(above, 0.5), C64::new(0.0, 2.0), 1e-15));
        assert!(close(ppow(below, 0.5), C64::new(0.0, -2.0), 1e-15));
        assert!(close(plog(above), C64::new(4f64.ln(), std::f64::consts::PI), 1e-15));
    }

    #[test]
    fn powf_derivative_matches_central_difference() {
        let z = C64::new(-0.7, 1.3);
        let j = Jet::var(z).powf(1.0 / 3.0);
        let h = 1e-6;
        let fd = (ppow(z + h, 1.0 / 3.0) - ppow(z - h, 1.0 / 3.0)) / (2.0 * h);
        assert!(close(j.d, fd, 1e-8));
    }

    #[test]
    fn quotient_rule() {
        let z = C64::new(0.3, 0.9);
        let x = Jet::var(z);
        let f = (x * x + 1.0) / (x - 2.0);
        let exact = ((2.0 * z) * (z - 2.0) - (z * z + 1.0)) / ((z - 2.0) * (z - 2.0));
        assert!(close(f.d, exact, 1e-14));
    }

    #[test]
    fn small_argument_helpers() {
        for x in [C64::new(1e-9, 2e-9), C64::new(3e-3, -4e-3), C64::new(0.3, 0.2)] {
            assert!(close(ln_1p(x), plog(x + 1.0), 1e-15) || (ln_1p(x) - x).norm() < 1e-17);
            assert!(close(exp_m1(ln_1p(x)), x, 1e-15));
        }
        // 1 - (1 - u)^p ~ p u
        let u = Jet::var(C64::new(1e-17, 0.0));
        let r = one_minus_pow(u, 0.5);
        assert!((r.v.re - 5e-18).abs() < 1e-32);
        assert!(close(r.d, C64::new(0.5, 0.0), 1e-15));
    }

    #[test]
    fn reciprocal_survives_huge_arguments() {
        let j = Jet::var(C64::new(1e250, 1.0)).recip();
        assert!((j.v.re - 1e-250).abs() < 1e-264);
        let q = Jet::real(1.0) / Jet::var(C64::new(-1e200, 1e200));
        assert!(q.v.norm() > 0.0);
    }

    #[test]
    fn zero_power_conventions() {
        assert_eq!(ppow(ZERO, 0.5), ZERO);
        assert_eq!(ppow(ZERO, 0.0), ONE);
    }
}

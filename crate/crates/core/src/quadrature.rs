//! Double-exponential quadrature for complex-valued integrands.
//!
//! Both rules refine by halving the step and reuse every previous node, and
//! stop when two consecutive levels agree relative to the L1 size of the
//! integrand.

use crate::error::{FpError, Result};
use crate::jet::{C64, ZERO};

const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;
const MAX_LEVEL: u32 = 11;

/// `int_a^b f` by tanh-sinh. The integrand receives the abscissa together
/// with its exact distances to `a` and `b`, which keeps endpoint
/// singularities such as `x^(p-1)` accurate.
pub fn tanh_sinh<F>(f: F, a: f64, b: f64, tol: f64) -> Result<C64>
where
    F: Fn(f64, f64, f64) -> C64,
{
    tanh_sinh_floor(f, a, b, tol, 0.0)
}

/// As [`tanh_sinh`], but convergence is judged against `max(L1, floor)`.
/// Use when the result is added to a known quantity of size `floor`.
pub fn tanh_sinh_floor<F>(f: F, a: f64, b: f64, tol: f64, floor: f64) -> Result<C64>
where
    F: Fn(f64, f64, f64) -> C64,
{
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let node = |t: f64| -> (C64, f64) {
        // returns f(left) + f(right) weighted, and the L1 weight
        let s = HALF_PI * t.sinh();
        let d = (b - a) / (1.0 + (2.0 * s).exp());
        let c = s.cosh();
        let w = half * HALF_PI * t.cosh() / (c * c);
        if d <= 0.0 || !w.is_finite() || w == 0.0 {
            return (ZERO, 0.0);
        }
        let fl = f(a + d, d, b - a - d);
        let fr = f(b - d, b - a - d, d);
        let v = (fl + fr) * w;
        (v, (fl.norm() + fr.norm()) * w)
    };
    let f0 = f(mid, half, half) * (half * HALF_PI);
    let mut sum = f0;
    let mut l1 = f0.norm();
    let t_max = 6.0;
    let mut j = 1;
    loop {
        let t = j as f64;
        if t > t_max {
            break;
        }
        let (v, n) = node(t);
        sum += v;
        l1 += n;
        j += 1;
    }
    let mut h = 1.0;
    let mut prev = sum * h;
    for _level in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut t = h;
        while t <= t_max {
            let (v, n) = node(t);
            sum += v;
            l1 += n;
            t += 2.0 * h;
        }
        let cur = sum * h;
        if !(cur.re.is_finite() && cur.im.is_finite()) {
            return Err(FpError::NoConvergence("tanh-sinh integrand not finite".into()));
        }
        if (cur - prev).norm() <= tol * (l1 * h).max(floor).max(1e-300) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(FpError::NoConvergence(format!(
        "tanh-sinh on [{a}, {b}] did not reach tolerance {tol:e}"
    )))
}

/// `int_0^inf f` by exp-sinh, for integrands decaying at least
/// algebraically.
pub fn exp_sinh<F>(f: F, tol: f64) -> Result<C64>
where
    F: Fn(f64) -> C64,
{
    // keep x = exp(pi/2 sinh t) inside [1e-150, 1e150], where products of
    // two abscissae stay finite
    let t_max = (345.0 / HALF_PI).asinh();
    let node = |t: f64| -> (C64, f64) {
        let x = (HALF_PI * t.sinh()).exp();
        if x == 0.0 || !x.is_finite() {
            return (ZERO, 0.0);
        }
        let w = HALF_PI * t.cosh() * x;
        let v = f(x);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return (C64::new(f64::NAN, f64::NAN), f64::NAN);
        }
        (v * w, v.norm() * w)
    };
    let mut sum = ZERO;
    let mut l1 = 0.0;
    let mut j = -(t_max as i64);
    while (j as f64) <= t_max {
        let (v, n) = node(j as f64);
        sum += v;
        l1 += n;
        j += 1;
    }
    let mut h = 1.0;
    let mut prev = sum;
    for _level in 1..=MAX_LEVEL {
        h *= 0.5;
        let mut t = -t_max.floor() - 1.0 + h;
        while t <= t_max {
            if t.abs() <= t_max {
                let (v, n) = node(t);
                sum += v;
                l1 += n;
            }
            t += 2.0 * h;
        }
        let cur = sum * h;
        if !(cur.re.is_finite() && cur.im.is_finite()) {
            return Err(FpError::NoConvergence("exp-sinh integrand not finite".into()));
        }
        if (cur - prev).norm() <= tol * (l1 * h).max(1e-300) {
            return Ok(cur);
        }
        prev = cur;
    }
    Err(FpError::NoConvergence(format!(
        "exp-sinh did not reach tolerance {tol:e}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn endpoint_singular_beta_integral() {
        // int_0^1 x^{-1/2} (1-x)^{-1/2} dx = pi
        let v = tanh_sinh(|_, dl, dr| C64::new(dl.powf(-0.5) * dr.powf(-0.5), 0.0), 0.0, 1.0, 1e-14).unwrap();
        assert!((v.re - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn cauchy_kernel_against_log() {
        // int_0^1 dx / (z - x) = log(z / (z - 1))
        let z = C64::new(0.3, 0.2);
        let v = tanh_sinh(|x, _, _| (z - x).inv(), 0.0, 1.0, 1e-14).unwrap();
        let exact = (z / (z - 1.0)).ln();
        assert!((v - exact).norm() < 1e-11);
    }

    #[test]
    fn half_line_algebraic_decay() {
        // int_0^inf dx / (1 + x)^{4/3} = 3
        let v = exp_sinh(|x| C64::new((1.0 + x).powf(-4.0 / 3.0), 0.0), 1e-13).unwrap();
        assert!((v.re - 3.0).abs() < 1e-10, "{v}");
        let v = exp_sinh(|x| C64::new((-x).exp(), 0.0), 1e-13).unwrap();
        assert!((v.re - 1.0).abs() < 1e-12);
    }
}

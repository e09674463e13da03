//! Root-finding kernels shared by every inversion in the crate.
//!
//! * [`solve_increasing`]: bracketed, safeguarded Newton for strictly
//!   increasing real functions on an interval `(lower, 0)`.
//! * [`newton`] / [`continue_solution`]: Newton on small complex systems and
//!   straight-segment continuation with step halving.
//! * [`invert_analytic`]: inverse of a single analytic map, seeded at an
//!   anchor whose image is known.

use crate::config::ToleranceConfig;
use crate::error::{FpError, Result};
use crate::jet::{Jet, C64, ZERO};

/// Residual, Jacobian and `z`-derivative of a square system `R(z, x) = 0`.
#[derive(Debug, Clone, Copy)]
pub struct SysEval<const N: usize> {
    pub r: [C64; N],
    pub jac: [[C64; N]; N],
    pub dz: [C64; N],
}

/// Gaussian elimination with partial pivoting. `None` when singular.
pub fn lin_solve<const N: usize>(mut a: [[C64; N]; N], mut b: [C64; N]) -> Option<[C64; N]> {
    for col in 0..N {
        let mut piv = col;
        for row in col + 1..N {
            if a[row][col].norm() > a[piv][col].norm() {
                piv = row;
            }
        }
        if a[piv][col].norm() == 0.0 || !a[piv][col].norm().is_finite() {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..N {
            let f = a[row][col] / a[col][col];
            let pivot_row = a[col];
            for (dst, src) in a[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *dst -= f * src;
            }
            let t = b[col];
            b[row] -= f * t;
        }
    }
    let mut x = [ZERO; N];
    for row in (0..N).rev() {
        let mut s = b[row];
        for k in row + 1..N {
            s -= a[row][k] * x[k];
        }
        x[row] = s / a[row][row];
    }
    if x.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
        Some(x)
    } else {
        None
    }
}

fn all_finite<const N: usize>(x: &[C64; N]) -> bool {
    x.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}

/// Newton iteration at fixed `z`.
///
/// With `strict` set (used inside continuation) the iteration must contract
/// from the second step on and is capped at 12 steps, so a poor predictor is
/// rejected instead of wandering onto another branch.
pub fn newton<const N: usize, S, V>(
    system: &S,
    valid: &V,
    z: C64,
    x0: [C64; N],
    cfg: &ToleranceConfig,
    strict: bool,
) -> Result<[C64; N]>
where
    S: Fn(C64, &[C64; N]) -> Result<SysEval<N>> + ?Sized,
    V: Fn(C64, &[C64; N]) -> bool + ?Sized,
{
    let max_iter = if strict {
        cfg.max_newton_iters.min(12)
    } else {
        cfg.max_newton_iters
    };
    let mut x = x0;
    let mut last_step = f64::INFINITY;
    let mut polished = 0;
    for it in 0..max_iter {
        let ev = system(z, &x)?;
        let neg_r = ev.r.map(|r| -r);
        let dx = lin_solve(ev.jac, neg_r)
            .ok_or_else(|| FpError::NoConvergence(format!("singular Jacobian at z = {z}")))?;
        let mut step = 0.0f64;
        for i in 0..N {
            step = step.max(dx[i].norm() / (1.0 + x[i].norm()));
            x[i] += dx[i];
        }
        if !all_finite(&x) {
            return Err(FpError::NoConvergence(format!("Newton diverged at z = {z}")));
        }
        if strict && it >= 1 && step > 0.5 * last_step && step > cfg.newton_tol {
            return Err(FpError::NoConvergence(format!("Newton stalled at z = {z}")));
        }
        last_step = step;
        if step <= cfg.newton_tol {
            // one extra step takes quadratic convergence to round-off
            polished += 1;
            if polished >= 2 || step < 1e-15 {
                return if valid(z, &x) {
                    Ok(x)
                } else {
                    Err(FpError::domain(z, "solution left the admissible region"))
                };
            }
        }
    }
    Err(FpError::NoConvergence(format!(
        "Newton did not converge at z = {z} within {max_iter} iterations"
    )))
}

/// Follow the solution of `R(z, x) = 0` from a solved point `(from, x0)` to
/// `target` along the straight segment, with tangent predictor and step
/// halving. Fails once the step drops below `2^-20` of the segment.
pub fn continue_solution<const N: usize, S, V>(
    system: &S,
    valid: &V,
    from: C64,
    x0: [C64; N],
    target: C64,
    cfg: &ToleranceConfig,
) -> Result<[C64; N]>
where
    S: Fn(C64, &[C64; N]) -> Result<SysEval<N>> + ?Sized,
    V: Fn(C64, &[C64; N]) -> bool + ?Sized,
{
    const MIN_STEP: f64 = 1.0 / (1u64 << 20) as f64;
    let seg = target - from;
    if seg.norm() == 0.0 {
        return Ok(x0);
    }
    let mut s = 0.0f64;
    let mut ds = 1.0f64;
    let mut x = x0;
    let mut z = from;
    let mut accepted = 0usize;
    let mut attempts = 0usize;
    let max_attempts = 8 * cfg.continuation_max_steps + 64;
    while s < 1.0 {
        attempts += 1;
        if accepted > cfg.continuation_max_steps * 8 || attempts > max_attempts {
            return Err(FpError::NoConvergence(format!(
                "continuation from {from} to {target} exceeded the step budget"
            )));
        }
        let s1 = (s + ds).min(1.0);
        let z1 = if s1 == 1.0 { target } else { from + seg * s1 };
        let predictor = {
            let ev = system(z, &x)?;
            let neg = ev.dz.map(|d| -d);
            match lin_solve(ev.jac, neg) {
                Some(dxdz) => {
                    let mut p = x;
                    for i in 0..N {
                        p[i] += dxdz[i] * (z1 - z);
                    }
                    p
                }
                None => x,
            }
        };
        match newton(system, valid, z1, predictor, cfg, true) {
            Ok(x1) => {
                x = x1;
                z = z1;
                s = s1;
                accepted += 1;
                ds = (ds * 2.0).min(1.0);
            }
            Err(err) => {
                ds *= 0.5;
                if ds < MIN_STEP {
                    return Err(match err {
                        FpError::Domain { .. } => err,
                        _ => FpError::NoConvergence(format!(
                            "continuation from {from} to {target} stalled at {z}: {err}"
                        )),
                    });
                }
            }
        }
    }
    Ok(x)
}

/// [`continue_solution`] through a chain of waypoints; `points[0]` is the
/// solved start.
pub fn continue_path<const N: usize, S, V>(
    system: &S,
    valid: &V,
    points: &[C64],
    x0: [C64; N],
    cfg: &ToleranceConfig,
) -> Result<[C64; N]>
where
    S: Fn(C64, &[C64; N]) -> Result<SysEval<N>> + ?Sized,
    V: Fn(C64, &[C64; N]) -> bool + ?Sized,
{
    let mut x = x0;
    for seg in points.windows(2) {
        x = continue_solution(system, valid, seg[0], x, seg[1], cfg)?;
    }
    Ok(x)
}

/// Waypoints from `-|u|` to `u` along the circle `|w| = |u|`, at most an
/// eighth of a turn apart, so that no chord comes close to the origin.
pub fn arc_waypoints(u: C64) -> Vec<C64> {
    let r = u.norm();
    let theta = u.im.atan2(u.re);
    let start = if theta >= 0.0 { std::f64::consts::PI } else { -std::f64::consts::PI };
    let span = start - theta;
    let n = ((span.abs() / (std::f64::consts::PI / 4.0)).ceil() as usize).max(1);
    let mut pts: Vec<C64> = (0..n).map(|k| C64::from_polar(r, start - span * k as f64 / n as f64)).collect();
    pts[0] = C64::new(-r, 0.0);
    pts.push(u);
    pts
}

/// Implicit derivative `dx/dz = -J^{-1} R_z` at a solved point.
pub fn implicit_derivative<const N: usize>(ev: &SysEval<N>) -> Result<[C64; N]> {
    lin_solve(ev.jac, ev.dz.map(|d| -d))
        .ok_or_else(|| FpError::NoConvergence("singular Jacobian in implicit derivative".into()))
}

/// Solve `f(w) = target` by continuation from `anchor`, whose image
/// `f(anchor)` is computed exactly. Returns `w` with `f'(w)` attached as the
/// derivative of the inverse (`1 / f'(w)`).
pub fn invert_analytic<F, V>(
    f: &F,
    valid: &V,
    target: C64,
    anchor: C64,
    cfg: &ToleranceConfig,
) -> Result<Jet>
where
    F: Fn(Jet) -> Result<Jet> + ?Sized,
    V: Fn(C64) -> bool + ?Sized,
{
    let start = f(Jet::var(anchor))?;
    let system = |t: C64, w: &[C64; 1]| -> Result<SysEval<1>> {
        let fw = f(Jet::var(w[0]))?;
        Ok(SysEval {
            r: [fw.v - t],
            jac: [[fw.d]],
            dz: [C64::new(-1.0, 0.0)],
        })
    };
    let ok = |_t: C64, w: &[C64; 1]| valid(w[0]);
    let w = continue_solution(&system, &ok, start.v, [anchor], target, cfg)?;
    let fw = f(Jet::var(w[0]))?;
    let resid = (fw.v - target).norm();
    if resid > 1e3 * cfg.newton_tol * (1.0 + target.norm()) {
        return Err(FpError::NoConvergence(format!(
            "inverse residual {resid:e} at target {target}"
        )));
    }
    Ok(Jet::new(w[0], fw.d.inv()))
}

/// Solve `h(x) = target` for a strictly increasing `h` on `(lower, 0)`,
/// `lower` possibly `-inf`. `h` returns value and derivative.
///
/// Bracket expansion starts from `-1` (or the middle of a finite interval),
/// doubling outward or halving toward zero, followed by Newton steps that
/// fall back to bisection whenever they leave the bracket.
/// Returns the root together with `h'` there.
pub fn solve_increasing<H>(h: &H, target: f64, lower: f64) -> Result<(f64, f64)>
where
    H: Fn(f64) -> Result<(f64, f64)> + ?Sized,
{
    if !(target < 0.0) {
        return Err(FpError::SigmaDomain {
            value: target,
            lower,
        });
    }
    let start = if lower.is_finite() {
        if lower >= 0.0 {
            return Err(FpError::SigmaDomain {
                value: target,
                lower,
            });
        }
        (0.5 * lower).max(-1.0)
    } else {
        -1.0
    };
    let (h0, d0) = h(start)?;
    if h0 == target {
        return Ok((start, d0));
    }
    let (mut a, mut b);
    let (mut ha, mut hb);
    if h0 > target {
        b = start;
        hb = h0;
        a = start;
        ha = h0;
        let mut found = false;
        for _ in 0..2200 {
            let next = if lower.is_finite() {
                lower + (a - lower) * 0.5
            } else {
                2.0 * a
            };
            if next == a || !next.is_finite() {
                break;
            }
            let (hn, _) = h(next)?;
            b = a;
            hb = ha;
            a = next;
            ha = hn;
            if hn <= target {
                found = true;
                break;
            }
        }
        if !found {
            return Err(FpError::SigmaDomain {
                value: target,
                lower: ha,
            });
        }
    } else {
        a = start;
        ha = h0;
        b = start;
        hb = h0;
        let mut found = false;
        for _ in 0..2200 {
            let next = 0.5 * b;
            if next == 0.0 {
                break;
            }
            let (hn, _) = h(next)?;
            a = b;
            ha = hb;
            b = next;
            hb = hn;
            if hn >= target {
                found = true;
                break;
            }
        }
        if !found {
            return Err(FpError::SigmaDomain {
                value: target,
                lower,
            });
        }
    }
    debug_assert!(ha <= target && target <= hb);
    if ha == target {
        let (_, d) = h(a)?;
        return Ok((a, d));
    }
    if hb == target {
        let (_, d) = h(b)?;
        return Ok((b, d));
    }
    // start from the secant point
    let mut x = a + (target - ha) * (b - a) / (hb - ha);
    if !(x > a && x < b) {
        x = 0.5 * (a + b);
    }
    for iter in 0..300 {
        let (hx, dx) = h(x)?;
        let r = hx - target;
        if r.abs() <= 2.0 * f64::EPSILON * target.abs() {
            return Ok((x, dx));
        }
        if r < 0.0 {
            a = x;
        } else {
            b = x;
        }
        // a noisy h can keep Newton bouncing inside the bracket; bisect then
        let mut next = if iter < 40 && dx > 0.0 && dx.is_finite() {
            x - r / dx
        } else {
            f64::NAN
        };
        if !(next > a && next < b) {
            next = if a < 0.0 && b < 0.0 && a / b > 16.0 {
                -(a * b).sqrt()
            } else {
                0.5 * (a + b)
            };
        }
        let moved = (next - x).abs();
        x = next;
        if moved <= 4.0 * f64::EPSILON * x.abs() || (b - a) <= 4.0 * f64::EPSILON * x.abs() {
            let (_, d) = h(x)?;
            return Ok((x, d));
        }
    }
    Err(FpError::NoConvergence(format!(
        "real inversion for target {target} did not settle"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn identity_inverse_returns_target() {
        let f = |w: Jet| Ok(w);
        let t = C64::new(0.3, 2.0);
        let w = invert_analytic(&f, &|_| true, t, C64::new(0.0, 50.0), &cfg()).unwrap();
        assert!((w.v - t).norm() < 1e-14);
    }

    #[test]
    fn shifted_map_inverse() {
        // F of the point mass at 1: w - 1
        let f = |w: Jet| Ok(w - 1.0);
        let t = C64::new(-2.0, 0.5);
        let w = invert_analytic(&f, &|_| true, t, C64::new(0.0, 40.0), &cfg()).unwrap();
        assert!((w.v - (t + 1.0)).norm() < 1e-13);
    }

    #[test]
    fn branch_followed_by_continuation() {
        // w^2 = t, anchored on the principal branch
        let f = |w: Jet| Ok(w * w);
        let t = C64::new(-4.0, 1e-3);
        let w = invert_analytic(&f, &|_| true, t, C64::new(1.0, 1.0), &cfg()).unwrap();
        assert!((w.v * w.v - t).norm() < 1e-12);
        assert!(w.v.im > 0.0);
    }

    #[test]
    fn increasing_solve_unbounded_and_bounded() {
        // h(x) = x / (1 - x) maps (-inf, 0) onto (-1, 0)
        let h = |x: f64| Ok((x / (1.0 - x), 1.0 / ((1.0 - x) * (1.0 - x))));
        let (x, _) = solve_increasing(&h, -0.5, f64::NEG_INFINITY).unwrap();
        assert!((x + 1.0).abs() < 1e-14);
        let (x, _) = solve_increasing(&h, -0.999, f64::NEG_INFINITY).unwrap();
        assert!((x / (1.0 - x) + 0.999).abs() < 1e-14);
        assert!(solve_increasing(&h, -1.5, f64::NEG_INFINITY).is_err());

        // h(x) = -1/(x + 2) - 0.5 is increasing on (-2, 0) with range (-inf, 0)
        let g = |x: f64| Ok((-1.0 / (x + 2.0) + 0.5, 1.0 / ((x + 2.0) * (x + 2.0))));
        let (x, _) = solve_increasing(&g, -100.0, -2.0).unwrap();
        assert!((g(x).unwrap().0 + 100.0).abs() < 1e-10);
    }

    #[test]
    fn two_by_two_linear_solve() {
        let a = [[C64::new(2.0, 0.0), C64::new(1.0, 1.0)], [C64::new(0.0, 1.0), C64::new(3.0, 0.0)]];
        let x = [C64::new(1.0, -1.0), C64::new(0.5, 2.0)];
        let b = [a[0][0] * x[0] + a[0][1] * x[1], a[1][0] * x[0] + a[1][1] * x[1]];
        let got = lin_solve(a, b).unwrap();
        assert!((got[0] - x[0]).norm() < 1e-14 && (got[1] - x[1]).norm() < 1e-14);
    }
}

//! Subordination maps `B_sigma(mu)` and `A_sigma(mu)`.
//!
//! `B_sigma(mu)` is the measure with `sigma boxtimes mu = sigma |> B_sigma(mu)`
//! (multiplicative monotone), characterised by
//! `Sigma_{B_sigma(mu)}(w) = Sigma_mu(eta_sigma(w))`. Additively,
//! `sigma boxplus mu = sigma |> A_sigma(mu)` with
//! `phi_{A_sigma(mu)}(z) = phi_mu(F_sigma(z))`.

use crate::config::ToleranceConfig;
use crate::convolutions::{
    boolean_power, free_power, join_class, mul_free, mul_monotone, require_positive, require_real, slit_valid,
    solve_from_anchor, upper_valid,
};
use crate::error::{FpError, Result};
use crate::jet::{Jet, C64, ONE, ZERO};
use crate::measures::{make_named, Measure, Node, SupportClass, Tr};
use crate::par;
use crate::solve::{self, SysEval};
use crate::spec::Spec;
use crate::transforms::{eta_inverse_real, eta_real};

fn reject_delta_zero(sigma: &Measure, what: &str) -> Result<()> {
    if sigma.as_dirac() == Some(0.0) {
        return Err(FpError::InvalidMeasure(format!("{what} is not defined for delta_0")));
    }
    Ok(())
}

struct MultSub {
    sigma: Measure,
    mu: Measure,
    cfg: ToleranceConfig,
}

impl MultSub {
    /// Left end of the real interval where `eta_sigma(w)` stays inside the
    /// Sigma-domain of `mu`.
    fn w_lower(&self) -> Result<f64> {
        let es = self.sigma.eta_at_neg_infinity();
        let em = self.mu.eta_at_neg_infinity();
        if es < em {
            Ok(eta_inverse_real(&self.sigma, em)?.0)
        } else {
            Ok(f64::NEG_INFINITY)
        }
    }

    /// `(w, dw/du, v)` at real `u < 0`, where `eta_mu(v) = eta_sigma(w)`.
    fn real(&self, u: f64) -> Result<(f64, f64, f64)> {
        let (sigma, mu) = (&self.sigma, &self.mu);
        // eta_B^{-1}(w) = w Sigma_mu(eta_sigma(w)) = w v / e
        let h = |w: f64| -> Result<(f64, f64)> {
            let (e, de) = eta_real(sigma, w)?;
            let (v, dv_de) = eta_inverse_real(mu, e)?;
            let dv = de / dv_de;
            let val = w * v / e;
            Ok((val, (v + w * dv) / e - val * de / e))
        };
        let lower = self.w_lower()?;
        if lower.is_finite() && lower >= 0.0 {
            return Err(FpError::InvalidMeasure(
                "the real domain of B_sigma(mu) is empty".into(),
            ));
        }
        let (w, hw) = solve::solve_increasing(&h, u, lower)?;
        let e = eta_real(sigma, w)?.0;
        let v = eta_inverse_real(mu, e)?.0;
        Ok((w, 1.0 / hw, v))
    }
}

impl Node for MultSub {
    fn native(&self) -> Tr {
        Tr::Eta
    }

    fn eval(&self, u: C64) -> Result<Jet> {
        if u.im == 0.0 {
            if u.re >= 0.0 {
                return Err(FpError::domain(u, "positive real arguments are not supported"));
            }
            let (w, dw, _) = self.real(u.re)?;
            return Ok(Jet::new(C64::new(w, 0.0), C64::new(dw, 0.0)));
        }
        let (sigma, mu) = (&self.sigma, &self.mu);
        let sys = |u: C64, x: &[C64; 2]| -> Result<SysEval<2>> {
            let es = sigma.eval_at(Tr::Eta, x[0])?;
            let em = mu.eval_at(Tr::Eta, x[1])?;
            Ok(SysEval {
                r: [em.v - es.v, x[0] * x[1] - u * es.v],
                jac: [[-es.d, em.d], [x[1] - u * es.d, x[0]]],
                dz: [ZERO, -es.v],
            })
        };
        let (w0, _, v0) = self.real(-u.norm())?;
        let pts = solve::arc_waypoints(u);
        let start = [C64::new(w0, 0.0), C64::new(v0, 0.0)];
        let x = solve::continue_path(&sys, &slit_valid, &pts, start, &self.cfg)?;
        let dx = solve::implicit_derivative(&sys(u, &x)?)?;
        Ok(Jet::new(x[0], dx[0]))
    }

    fn support(&self) -> SupportClass {
        SupportClass::PositiveHalfline
    }

    fn radius(&self) -> f64 {
        2.0 * self.mu.radius() * self.sigma.radius().max(1.0)
    }

    fn memoize(&self) -> bool {
        true
    }

    fn spec(&self) -> Spec {
        Spec::expr("mult-subordinate", vec![self.sigma.spec().into(), self.mu.spec().into()])
    }
}

/// `B_sigma(mu)` for measures on the positive half-line, `sigma != delta_0`.
pub fn mult_subordinate(sigma: &Measure, mu: &Measure, cfg: &ToleranceConfig) -> Result<Measure> {
    require_positive(sigma, "mult_subordinate")?;
    require_positive(mu, "mult_subordinate")?;
    reject_delta_zero(sigma, "B_sigma")?;
    if sigma.as_dirac() == Some(1.0) || mu.as_dirac().is_some() {
        return Ok(mu.clone());
    }
    Ok(Measure::closure(MultSub {
        sigma: sigma.clone(),
        mu: mu.clone(),
        cfg: cfg.clone(),
    }))
}

/// Belinschi-Nica map `B_t(mu) = (mu^{boxplus (1+t)})^{uplus 1/(1+t)}`.
pub fn belinschi_nica(t: f64, mu: &Measure, cfg: &ToleranceConfig) -> Result<Measure> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(FpError::ParameterOutOfRange {
            name: "t",
            value: t,
            bound: "the Belinschi-Nica semigroup needs t >= 0".into(),
        });
    }
    if t == 0.0 {
        return Ok(mu.clone());
    }
    boolean_power(&free_power(mu, 1.0 + t, cfg)?, 1.0 / (1.0 + t))
}

/// Largest `|eta|` gap on the grid between the power formula and
/// `B_{sigma_t}(mu)`, for measures on the positive half-line.
pub fn belinschi_nica_discrepancy(t: f64, mu: &Measure, grid: &[f64], cfg: &ToleranceConfig) -> Result<f64> {
    let power = belinschi_nica(t, mu, cfg)?;
    let sigma_t = make_named("bernoulli_sigma", &[("t", t)])?;
    let sub = mult_subordinate(&sigma_t, mu, cfg)?;
    max_gap(grid, |x| {
        let u = C64::new(x, 0.0);
        Ok((power.eta(u)? - sub.eta(u)?).norm())
    })
}

fn max_gap(grid: &[f64], f: impl Fn(f64) -> Result<f64> + Sync + Send) -> Result<f64> {
    par::map(grid, |&x| f(x))
        .into_iter()
        .try_fold(0.0f64, |m, v| Ok(m.max(v?)))
}

struct AddSub {
    sigma: Measure,
    mu: Measure,
    cfg: ToleranceConfig,
}

impl Node for AddSub {
    fn native(&self) -> Tr {
        Tr::F
    }

    fn eval(&self, z: C64) -> Result<Jet> {
        // F_A(z) = w with F_mu(om) = F_sigma(w), w + om - F_sigma(w) = z
        let (sigma, mu) = (&self.sigma, &self.mu);
        let sys = |z: C64, x: &[C64; 2]| -> Result<SysEval<2>> {
            let fs = sigma.eval_at(Tr::F, x[0])?;
            let fm = mu.eval_at(Tr::F, x[1])?;
            Ok(SysEval {
                r: [fm.v - fs.v, x[0] + x[1] - fs.v - z],
                jac: [[-fs.d, fm.d], [ONE - fs.d, ONE]],
                dz: [ZERO, -ONE],
            })
        };
        let height = self.cfg.anchor_height(self.radius());
        let (x, ev) = solve_from_anchor(&sys, &upper_valid, z, height, &self.cfg)?;
        let dx = solve::implicit_derivative(&ev)?;
        Ok(Jet::new(x[0], dx[0]))
    }

    fn support(&self) -> SupportClass {
        join_class(self.sigma.support(), self.mu.support())
    }

    fn radius(&self) -> f64 {
        self.sigma.radius() + self.mu.radius()
    }

    fn memoize(&self) -> bool {
        true
    }

    fn spec(&self) -> Spec {
        Spec::expr("add-subordinate", vec![self.sigma.spec().into(), self.mu.spec().into()])
    }
}

/// `A_sigma(mu)`, computed by continuation of the subordination system. No
/// closed-form shortcuts besides the trivial ones, so this doubles as the
/// generic cross-check for [`cauchy_subordinate`].
pub fn add_subordinate(sigma: &Measure, mu: &Measure, cfg: &ToleranceConfig) -> Result<Measure> {
    require_real(sigma, "add_subordinate")?;
    require_real(mu, "add_subordinate")?;
    if sigma.as_dirac() == Some(0.0) || mu.as_dirac().is_some() {
        return Ok(mu.clone());
    }
    Ok(Measure::closure(AddSub {
        sigma: sigma.clone(),
        mu: mu.clone(),
        cfg: cfg.clone(),
    }))
}

struct CauchySub {
    a: f64,
    b: f64,
    mu: Measure,
}

impl CauchySub {
    fn shift(&self) -> C64 {
        C64::new(-self.a, self.b)
    }
}

impl Node for CauchySub {
    fn native(&self) -> Tr {
        Tr::F
    }

    fn eval(&self, w: C64) -> Result<Jet> {
        let f = self.mu.eval(Tr::F, Jet::var(w + self.shift()))?;
        Ok(f - self.shift())
    }

    fn support(&self) -> SupportClass {
        if self.b > 0.0 {
            SupportClass::RealLine
        } else {
            self.mu.support()
        }
    }

    fn radius(&self) -> f64 {
        self.mu.radius() + self.a.abs() + self.b
    }

    fn boundary_density(&self, x: f64) -> Option<Result<f64>> {
        if self.b <= 0.0 {
            return None;
        }
        // s = F_mu(w) + a - ib = x + (F_mu(w) - w); the difference form
        // keeps the x^-4 tail accurate for atomic mu
        let w = C64::new(x, 0.0) + self.shift();
        let s = match self.mu.as_atomic() {
            Some(at) => Ok(x + at.f_minus_id(w)),
            None => self.mu.f(w).map(|f| f - self.shift()),
        };
        Some(s.map(|s| s.im / (std::f64::consts::PI * s.norm_sqr())))
    }

    fn spec(&self) -> Spec {
        Spec::expr(
            "cauchy-subordinate",
            vec![self.a.into(), self.b.into(), self.mu.spec().into()],
        )
    }
}

/// `A_{a,b}(mu) = A_{c_{a,b}}(mu)` in closed form:
/// `F(z) = F_mu(z - a + ib) + a - ib`.
pub fn cauchy_subordinate(a: f64, b: f64, mu: &Measure) -> Result<Measure> {
    require_real(mu, "cauchy_subordinate")?;
    if !(b >= 0.0 && b.is_finite() && a.is_finite()) {
        return Err(FpError::ParameterOutOfRange {
            name: "b",
            value: b,
            bound: "the Cauchy parameter b must be finite and >= 0".into(),
        });
    }
    if (a == 0.0 && b == 0.0) || mu.as_dirac().is_some() {
        return Ok(mu.clone());
    }
    Ok(Measure::closure(CauchySub { a, b, mu: mu.clone() }))
}

struct BpAdd {
    mu: Measure,
    cfg: ToleranceConfig,
}

impl Node for BpAdd {
    fn native(&self) -> Tr {
        Tr::F
    }

    fn eval(&self, z: C64) -> Result<Jet> {
        // F^{-1}(w) = 2w - F_mu(w)
        let mu = &self.mu;
        let sys = |z: C64, x: &[C64; 1]| -> Result<SysEval<1>> {
            let f = mu.eval_at(Tr::F, x[0])?;
            Ok(SysEval {
                r: [x[0] * 2.0 - f.v - z],
                jac: [[C64::new(2.0, 0.0) - f.d]],
                dz: [-ONE],
            })
        };
        let height = self.cfg.anchor_height(self.radius());
        let (x, ev) = solve_from_anchor(&sys, &upper_valid, z, height, &self.cfg)?;
        Ok(Jet::new(x[0], ev.jac[0][0].inv()))
    }

    fn support(&self) -> SupportClass {
        SupportClass::RealLine
    }

    fn radius(&self) -> f64 {
        2.0 * self.mu.radius()
    }

    fn memoize(&self) -> bool {
        true
    }

    fn spec(&self) -> Spec {
        Spec::expr("bp-add", vec![self.mu.spec().into()])
    }
}

/// Additive Bercovici-Pata map `mu -> A_mu(mu)`, `phi(z) = z - F_mu(z)`.
pub fn bp_map_add(mu: &Measure, cfg: &ToleranceConfig) -> Result<Measure> {
    require_real(mu, "bp_map_add")?;
    if mu.as_dirac().is_some() {
        return Ok(mu.clone());
    }
    Ok(Measure::closure(BpAdd {
        mu: mu.clone(),
        cfg: cfg.clone(),
    }))
}

struct BpMult {
    mu: Measure,
    cfg: ToleranceConfig,
}

impl BpMult {
    /// `eta_B^{-1}(w) = w^2 / eta_mu(w)` on the negative axis.
    fn real(&self, u: f64) -> Result<(f64, f64)> {
        let mu = &self.mu;
        let h = |w: f64| -> Result<(f64, f64)> {
            let (e, d) = eta_real(mu, w)?;
            Ok((w * w / e, (2.0 * w * e - w * w * d) / (e * e)))
        };
        let (w, hw) = solve::solve_increasing(&h, u, f64::NEG_INFINITY)?;
        Ok((w, 1.0 / hw))
    }
}

impl Node for BpMult {
    fn native(&self) -> Tr {
        Tr::Eta
    }

    fn eval(&self, u: C64) -> Result<Jet> {
        if u.im == 0.0 {
            if u.re >= 0.0 {
                return Err(FpError::domain(u, "positive real arguments are not supported"));
            }
            let (w, dw) = self.real(u.re)?;
            return Ok(Jet::new(C64::new(w, 0.0), C64::new(dw, 0.0)));
        }
        let mu = &self.mu;
        let sys = |u: C64, x: &[C64; 1]| -> Result<SysEval<1>> {
            let e = mu.eval_at(Tr::Eta, x[0])?;
            Ok(SysEval {
                r: [x[0] * x[0] - u * e.v],
                jac: [[x[0] * 2.0 - u * e.d]],
                dz: [-e.v],
            })
        };
        let (w0, _) = self.real(-u.norm())?;
        let pts = solve::arc_waypoints(u);
        let x = solve::continue_path(&sys, &slit_valid, &pts, [C64::new(w0, 0.0)], &self.cfg)?;
        let ev = sys(u, &x)?;
        Ok(Jet::new(x[0], -ev.dz[0] / ev.jac[0][0]))
    }

    fn support(&self) -> SupportClass {
        SupportClass::PositiveHalfline
    }

    fn radius(&self) -> f64 {
        4.0 * self.mu.radius()
    }

    fn memoize(&self) -> bool {
        true
    }

    fn spec(&self) -> Spec {
        Spec::expr("bp-mult", vec![self.mu.spec().into()])
    }
}

/// Multiplicative Bercovici-Pata map `mu -> B_mu(mu)`,
/// `Sigma(z) = z / eta_mu(z)`.
pub fn bp_map_mult(mu: &Measure, cfg: &ToleranceConfig) -> Result<Measure> {
    require_positive(mu, "bp_map_mult")?;
    reject_delta_zero(mu, "B_mu(mu)")?;
    if mu.as_dirac().is_some() {
        return Ok(mu.clone());
    }
    Ok(Measure::closure(BpMult {
        mu: mu.clone(),
        cfg: cfg.clone(),
    }))
}

struct CircleSub {
    c: C64,
    mu: Measure,
}

impl Node for CircleSub {
    fn native(&self) -> Tr {
        Tr::Eta
    }

    fn eval(&self, u: C64) -> Result<Jet> {
        let e = self.mu.eval(Tr::Eta, Jet::var(u) * self.c)?;
        Ok(e / self.c)
    }

    fn support(&self) -> SupportClass {
        SupportClass::UnitCircle
    }

    fn radius(&self) -> f64 {
        1.0
    }

    fn spec(&self) -> Spec {
        let (a, b) = (-self.c.norm().ln(), self.c.im.atan2(self.c.re));
        Spec::expr("circle-subordinate", vec![a.into(), b.into(), self.mu.spec().into()])
    }
}

/// Circle map `B_{a,b}`: `eta(z) = c^{-1} eta_mu(cz)`, `c = e^{-a+ib}`.
pub fn circle_subordinate(a: f64, b: f64, mu: &Measure) -> Result<Measure> {
    if mu.support() != SupportClass::UnitCircle {
        return Err(FpError::UnsupportedSupport(format!(
            "circle_subordinate needs a unit-circle measure, got {}",
            mu.support()
        )));
    }
    if !(a >= 0.0 && a.is_finite() && b.is_finite()) {
        return Err(FpError::ParameterOutOfRange {
            name: "a",
            value: a,
            bound: "needs finite a >= 0 and finite b".into(),
        });
    }
    if a == 0.0 && b == 0.0 {
        return Ok(mu.clone());
    }
    Ok(Measure::closure(CircleSub {
        c: C64::from_polar((-a).exp(), b),
        mu: mu.clone(),
    }))
}

/// Axis-aligned rectangle in the upper half-plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Region {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl Region {
    fn contains(&self, z: C64) -> bool {
        self.re.0 <= z.re && z.re <= self.re.1 && self.im.0 <= z.im && z.im <= self.im.1
    }
}

/// Outcome of [`univalence_grid_check`]. A witness `(z1, z2)` is a pair of
/// distinct points of the region with `F(z1) = F(z2)` to 1e-9.
#[derive(Debug, Clone, PartialEq)]
pub struct UnivalenceReport {
    pub n: usize,
    pub candidates: usize,
    pub witnesses: Vec<(C64, C64)>,
}

impl UnivalenceReport {
    pub fn injective(&self) -> bool {
        self.witnesses.is_empty()
    }
}

/// Look for non-injectivity of `F_mu` on an `n x n` grid of `region`.
///
/// Pairs whose images are closer than the local derivative allows are
/// refined by Newton on `F(w) = F(z_i)` from `z_j`; a refined solution that
/// stays in the region and away from `z_i` is a witness.
pub fn univalence_grid_check(
    mu: &Measure,
    region: Region,
    n: usize,
    cfg: &ToleranceConfig,
) -> Result<UnivalenceReport> {
    if n < 2 || !(region.im.0 > 0.0) || !(region.re.1 > region.re.0) || !(region.im.1 > region.im.0) {
        return Err(FpError::ParameterOutOfRange {
            name: "region",
            value: region.im.0,
            bound: "need n >= 2 and a nondegenerate rectangle in the upper half-plane".into(),
        });
    }
    let hx = (region.re.1 - region.re.0) / (n - 1) as f64;
    let hy = (region.im.1 - region.im.0) / (n - 1) as f64;
    let h = hx.max(hy);
    let pts: Vec<C64> = (0..n * n)
        .map(|k| C64::new(region.re.0 + hx * (k % n) as f64, region.im.0 + hy * (k / n) as f64))
        .collect();
    let vals = par::map(&pts, |&z| mu.eval_at(Tr::F, z));
    let vals: Vec<Jet> = vals.into_iter().collect::<Result<_>>()?;
    let idx: Vec<usize> = (0..pts.len()).collect();
    let found = par::map(&idx, |&i| {
        let mut cands = 0usize;
        let mut wit = None;
        for j in 0..pts.len() {
            if j == i || (pts[i] - pts[j]).norm() <= 2.5 * h {
                continue;
            }
            if (vals[i].v - vals[j].v).norm() > 1.5 * h * vals[j].d.norm() {
                continue;
            }
            cands += 1;
            let target = vals[i].v;
            let sys = |_: C64, x: &[C64; 1]| -> Result<SysEval<1>> {
                let f = mu.eval_at(Tr::F, x[0])?;
                Ok(SysEval {
                    r: [f.v - target],
                    jac: [[f.d]],
                    dz: [ZERO],
                })
            };
            let ok = |_: C64, x: &[C64; 1]| x[0].im > 0.0;
            if let Ok([w]) = solve::newton(&sys, &ok, ZERO, [pts[j]], cfg, false) {
                let close = mu.f(w).map(|f| (f - target).norm() <= 1e-9 * (1.0 + target.norm()));
                if close.unwrap_or(false) && region.contains(w) && (w - pts[i]).norm() > h {
                    wit = Some((pts[i], w));
                    break;
                }
            }
        }
        (cands, wit)
    });
    let candidates = found.iter().map(|f| f.0).sum();
    let witnesses = found.into_iter().filter_map(|f| f.1).collect();
    Ok(UnivalenceReport {
        n,
        candidates,
        witnesses,
    })
}

/// `sigma boxtimes mu` and `sigma |> B_sigma(mu)`, the two sides of the
/// defining relation of `B_sigma`.
pub fn mult_defining_sides(sigma: &Measure, mu: &Measure, cfg: &ToleranceConfig) -> Result<(Measure, Measure)> {
    let lhs = mul_free(sigma, mu, cfg)?;
    let rhs = mul_monotone(sigma, &mult_subordinate(sigma, mu, cfg)?)?;
    Ok((lhs, rhs))
}

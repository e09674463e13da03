//! Free, Boolean and monotone convolutions and convolution powers.
//!
//! Results are lazy closures. Boolean and monotone operations are explicit
//! (sums and compositions of transforms). Free operations solve for
//! subordination functions: additively the pair `(w1, w2)` with
//! `F_mu(w1) = F_nu(w2)`, `w1 + w2 = z + F_mu(w1)`, which is the same
//! statement as `phi_{mu boxplus nu} = phi_mu + phi_nu`; multiplicatively the
//! pair with `eta_mu(w1) = eta_nu(w2)`, `w1 w2 = u eta_mu(w1)`, solved first
//! on the negative half-line and then continued into the plane.

pub mod series;

use crate::config::ToleranceConfig;
use crate::error::{FpError, Result};
use crate::jet::{Jet, C64, ONE, ZERO};
use crate::measures::{dilate, make_named, Measure, NamedLaw, Node, SupportClass, Tr};
use crate::solve::{self, SysEval};
use crate::spec::Spec;
use crate::transforms::eta_inverse_real;

pub(crate) fn require_real(mu: &Measure, op: &str) -> Result<()> {
    if mu.support() == SupportClass::UnitCircle {
        return Err(FpError::UnsupportedSupport(format!("{op} needs measures on the real line")));
    }
    Ok(())
}

pub(crate) fn require_positive(mu: &Measure, op: &str) -> Result<()> {
    if mu.support() != SupportClass::PositiveHalfline {
        return Err(FpError::UnsupportedSupport(format!(
            "{op} needs measures on the positive half-line, got {}",
            mu.support()
        )));
    }
    Ok(())
}

pub(crate) fn join_class(a: SupportClass, b: SupportClass) -> SupportClass {
    if a == b {
        a
    } else {
        SupportClass::RealLine
    }
}

fn clean(x: f64, fallback: f64) -> f64 {
    if x.is_nan() {
        fallback
    } else {
        x
    }
}

/// `[lo1 + lo2, hi1 + hi2]`, which contains the support of every additive
/// convolution of the two measures.
pub(crate) fn sum_hull(a: (f64, f64), b: (f64, f64)) -> (f64, f64) {
    (clean(a.0 + b.0, f64::NEG_INFINITY), clean(a.1 + b.1, f64::INFINITY))
}

pub(crate) fn hull_radius(h: (f64, f64), fallback: f64) -> f64 {
    let r = h.0.abs().max(h.1.abs());
    if r.is_finite() {
        r
    } else {
        fallback
    }
}

/// `(a, b)` when `F_mu(z) = z - a + ib`: point masses and Cauchy laws.
pub(crate) fn as_cauchy(mu: &Measure) -> Option<(f64, f64)> {
    if let Some(a) = mu.as_dirac() {
        return Some((a, 0.0));
    }
    match mu.as_named() {
        Some(NamedLaw::Cauchy { a, b }) => Some((*a, *b)),
        _ => None,
    }
}

pub(crate) fn cauchy(a: f64, b: f64) -> Result<Measure> {
    make_named("cauchy", &[("a", a), ("b", b)])
}

/// Atom mass at 0 encoded by `eta(-inf) = 1 - 1/p`.
fn mass_from_eta_inf(e: f64) -> f64 {
    if e.is_finite() {
        1.0 / (1.0 - e)
    } else {
        0.0
    }
}

fn eta_inf_from_mass(p: f64) -> f64 {
    if p > 1e-15 {
        1.0 - 1.0 / p
    } else {
        f64::NEG_INFINITY
    }
}

/// Solve a subordination system at `z` by Newton at a point high above it
/// (started from `w = z_anchor` in every unknown) and continuation down.
pub(crate) fn solve_from_anchor<const N: usize, S, V>(
    sys: &S,
    valid: &V,
    z: C64,
    height: f64,
    cfg: &ToleranceConfig,
) -> Result<([C64; N], SysEval<N>)>
where
    S: Fn(C64, &[C64; N]) -> Result<SysEval<N>>,
    V: Fn(C64, &[C64; N]) -> bool,
{
    let za = if z.im >= height { z } else { C64::new(z.re, height) };
    let x0 = solve::newton(sys, valid, za, [za; N], cfg, false)?;
    let x = solve::continue_solution(sys, valid, za, x0, z, cfg)?;
    let ev = sys(z, &x)?;
    Ok((x, ev))
}

pub(crate) fn upper_valid<const N: usize>(z: C64, x: &[C64; N]) -> bool {
    let tol = 1e-9 * (1.0 + z.norm());
    x.iter().all(|w| w.im >= z.im - tol)
}

/// Unknowns must stay off the positive half-line (multiplicative systems).
pub(crate) fn slit_valid<const N: usize>(_u: C64, x: &[C64; N]) -> bool {
    x.iter().all(|w| w.im >= -1e-9 * (1.0 + w.norm()) && !(w.im.abs() <= 1e-300 && w.re > 0.0))
}

/// Law of `X + a`.
pub fn translate(mu: &Measure, a: f64) -> Result<Measure> {
    require_real(mu, "translation")?;
    if a == 0.0 {
        return Ok(mu.clone());
    }
    if let Some(at) = mu.as_atomic() {
        return Measure::atomic(at.atoms().iter().map(|&(x, w)| (x + a, w)).collect());
    }
    if let Some((a0, b)) = as_cauchy(mu) {
        return cauchy(a0 + a, b);
    }
    Ok(Measure::closure(AddMonotone {
        mu: mu.clone(),
        nu: Measure::dirac(a),
    }))
}

struct AddMonotone {
    mu: Measure,
    nu: Measure,
}

impl Node for AddMonotone {
    fn native(&self) -> Tr {
        Tr::F
    }

    fn eval(&self, w: C64) -> Result<Jet> {
        let inner = self.nu.eval_at(Tr::F, w)?;
        self.mu.eval(Tr::F, inner)
    }

    fn support(&self) -> SupportClass {
        join_class(self.mu.support(), self.nu.support())
    }

    fn hull(&self) -> (f64, f64) {
        let a = self.mu.hull();
        sum_hull((a.0.min(0.0), a.1.max(0.0)), self.nu.hull())
    }

    fn radius(&self) -> f64 {
        hull_radius(self.hull(), self.mu.radius() + self.nu.radius())
    }

    fn spec(&self) -> Spec {
        Spec::expr("add-monotone", vec![self.mu.spec().into(), self.nu.spec().into()])
    }
}

/// Monotone convolution, `F = F_mu o F_nu`.
pub fn add_monotone(mu: &Measure, nu: &Measure) -> Result<Measure> {
    require_real(mu, "add_monotone")?;
    require_real(nu, "add_monotone")?;
    if let (Some((a, b)), Some((c, d))) = (as_cauchy(mu), as_cauchy(nu)) {
        return cauchy(a + c, b + d);
    }
    if let Some(b) = nu.as_dirac() {
        return translate(mu, b);
    }
    Ok(Measure::closure(AddMonotone {
        mu: mu.clone(),
        nu: nu.clone(),
    }))
}

struct BooleanSum {
    mu: Measure,
    nu: Measure,
}

impl Node for BooleanSum {
    fn native(&self) -> Tr {
        Tr::F
    }

    fn eval(&self, w: C64) -> Result<Jet> {
        let a = self.mu.eval_at(Tr::F, w)?;
        let b = self.nu.eval_at(Tr::F, w)?;
        Ok(a + b - Jet::var(w))
    }

    fn support(&self) -> SupportClass {
        join_class(self.mu.support(), self.nu.support())
    }

    fn hull(&self) -> (f64, f64) {
        // F_mu - a for a point mass at a is not a translate, so both
        // hulls enter together with 0
        let (a, b) = (self.mu.hull(), self.nu.hull());
        sum_hull((a.0.min(0.0), a.1.max(0.0)), (b.0.min(0.0), b.1.max(0.0)))
    }

    fn radius(&self) -> f64 {
        hull_radius(self.hull(), self.mu.radius() + self.nu.radius())
    }

    fn eta_neg_inf(&self) -> Option<f64> {
        if self.support() != SupportClass::PositiveHalfline {
            return None;
        }
        Some(self.mu.eta_at_neg_infinity() + self.nu.eta_at_neg_infinity())
    }

    fn spec(&self) -> Spec {
        Spec::expr("add-boolean", vec![self.mu.spec().into(), self.nu.spec().into()])
    }
}

/// Boolean convolution, `eta = eta_mu + eta_nu` (`F = F_mu + F_nu - z`).
pub fn add_boolean(mu: &Measure, nu: &Measure) -> Result<Measure> {
    require_real(mu, "add_boolean")?;
    require_real(nu, "add_boolean")?;
    if let (Some(a), Some(b)) = (mu.as_dirac(), nu.as_dirac()) {
        return Ok(Measure::dirac(a + b));
    }
    Ok(Measure::closure(BooleanSum {
        mu: mu.clone(),
        nu: nu.clone(),
    }))
}

struct BooleanPower {
    mu: Measure,
    s: f64,
}

impl Node for BooleanPower {
    fn native(&self) -> Tr {
        Tr::F
    }

    fn eval(&self, w: C64) -> Result<Jet> {
        let f = self.mu.eval_at(Tr::F, w)?;
        Ok(f * self.s + Jet::var(w) * (1.0 - self.s))
    }

    fn support(&self) -> SupportClass {
        self.mu.support()
    }

    fn hull(&self) -> (f64, f64) {
        let (lo, hi) = self.mu.hull();
        (clean(lo.min(self.s * lo), f64::NEG_INFINITY), clean(hi.max(self.s * hi), f64::INFINITY))
    }

    fn radius(&self) -> f64 {
        hull_radius(self.hull(), self.s.max(1.0) * self.mu.radius())
    }

    fn eta_neg_inf(&self) -> Option<f64> {
        (self.support() == SupportClass::PositiveHalfline).then(|| self.s * self.mu.eta_at_neg_infinity())
    }

    fn spec(&self) -> Spec {
        Spec::expr("boolean-power", vec![self.mu.spec().into(), self.s.into()])
    }
}

/// Boolean convolution power, `eta = s eta_mu`, for `s >= 0`.
pub fn boolean_power(mu: &Measure, s: f64) -> Result<Measure> {
    require_real(mu, "boolean_power")?;
    if !(s >= 0.0 && s.is_finite()) {
        return Err(FpError::ParameterOutOfRange {
            name: "s",
            value: s,
            bound: "Boolean powers need s >= 0".into(),
        });
    }
    if s == 1.0 {
        return Ok(mu.clone());
    }
    if s == 0.0 {
        return Ok(Measure::dirac(0.0));
    }
    if let Some(a) = mu.as_dirac() {
        return Ok(Measure::dirac(s * a));
    }
    Ok(Measure::closure(BooleanPower { mu: mu.clone(), s }))
}

struct AddFree {
    mu: Measure,
    nu: Measure,
    cfg: ToleranceConfig,
}

impl Node for AddFree {
    fn native(&self) -> Tr {
        Tr::F
    }

    fn eval(&self, z: C64) -> Result<Jet> {
        let (mu, nu) = (&self.mu, &self.nu);
        let sys = |z: C64, x: &[C64; 2]| -> Result<SysEval<2>> {
            let f1 = mu.eval_at(Tr::F, x[0])?;
            let f2 = nu.eval_at(Tr::F, x[1])?;
            Ok(SysEval {
                r: [f1.v - f2.v, x[0] + x[1] - f1.v - z],
                jac: [[f1.d, -f2.d], [ONE - f1.d, ONE]],
                dz: [ZERO, -ONE],
            })
        };
        let height = self.cfg.anchor_height(self.radius());
        let (x, ev) = solve_from_anchor(&sys, &upper_valid, z, height, &self.cfg)?;
        let dx = solve::implicit_derivative(&ev)?;
        let f1 = mu.eval_at(Tr::F, x[0])?;
        Ok(Jet::new(f1.v, f1.d * dx[0]))
    }

    fn support(&self) -> SupportClass {
        join_class(self.mu.support(), self.nu.support())
    }

    fn hull(&self) -> (f64, f64) {
        sum_hull(self.mu.hull(), self.nu.hull())
    }

    fn radius(&self) -> f64 {
        hull_radius(self.hull(), self.mu.radius() + self.nu.radius())
    }

    fn eta_neg_inf(&self) -> Option<f64> {
        if self.support() != SupportClass::PositiveHalfline {
            return None;
        }
        let p = mass_from_eta_inf(self.mu.eta_at_neg_infinity()) + mass_from_eta_inf(self.nu.eta_at_neg_infinity());
        Some(eta_inf_from_mass(p - 1.0))
    }

    fn memoize(&self) -> bool {
        true
    }

    fn spec(&self) -> Spec {
        Spec::expr("add-free", vec![self.mu.spec().into(), self.nu.spec().into()])
    }
}

/// Free additive convolution.
pub fn add_free(mu: &Measure, nu: &Measure, cfg: &ToleranceConfig) -> Result<Measure> {
    require_real(mu, "add_free")?;
    require_real(nu, "add_free")?;
    if let (Some((a, b)), Some((c, d))) = (as_cauchy(mu), as_cauchy(nu)) {
        return cauchy(a + c, b + d);
    }
    if let Some(a) = mu.as_dirac() {
        return translate(nu, a);
    }
    if let Some(a) = nu.as_dirac() {
        return translate(mu, a);
    }
    Ok(Measure::closure(AddFree {
        mu: mu.clone(),
        nu: nu.clone(),
        cfg: cfg.clone(),
    }))
}

struct FreePower {
    mu: Measure,
    t: f64,
    cfg: ToleranceConfig,
}

impl Node for FreePower {
    fn native(&self) -> Tr {
        Tr::F
    }

    fn eval(&self, z: C64) -> Result<Jet> {
        // F_{mu^t}(z) = F_mu(w), w = z/t + (1 - 1/t) F_mu(w)
        let (mu, t) = (&self.mu, self.t);
        let c = 1.0 - 1.0 / t;
        let sys = |z: C64, x: &[C64; 1]| -> Result<SysEval<1>> {
            let f = mu.eval_at(Tr::F, x[0])?;
            Ok(SysEval {
                r: [x[0] - z / t - f.v * c],
                jac: [[ONE - f.d * c]],
                dz: [C64::new(-1.0 / t, 0.0)],
            })
        };
        let height = self.cfg.anchor_height(self.radius());
        let (x, ev) = solve_from_anchor(&sys, &upper_valid, z, height, &self.cfg)?;
        let dx = solve::implicit_derivative(&ev)?;
        let f = mu.eval_at(Tr::F, x[0])?;
        Ok(Jet::new(f.v, f.d * dx[0]))
    }

    fn support(&self) -> SupportClass {
        self.mu.support()
    }

    fn hull(&self) -> (f64, f64) {
        let (lo, hi) = self.mu.hull();
        (self.t * lo, self.t * hi)
    }

    fn radius(&self) -> f64 {
        hull_radius(self.hull(), self.t * self.mu.radius())
    }

    fn eta_neg_inf(&self) -> Option<f64> {
        if self.support() != SupportClass::PositiveHalfline {
            return None;
        }
        let p = mass_from_eta_inf(self.mu.eta_at_neg_infinity());
        Some(eta_inf_from_mass(1.0 - self.t * (1.0 - p)))
    }

    fn memoize(&self) -> bool {
        true
    }

    fn spec(&self) -> Spec {
        Spec::expr("free-power", vec![self.mu.spec().into(), self.t.into()])
    }
}

/// Free convolution power `mu^{boxplus t}`, `t >= 1`.
pub fn free_power(mu: &Measure, t: f64, cfg: &ToleranceConfig) -> Result<Measure> {
    require_real(mu, "free_power")?;
    if !(t >= 1.0 && t.is_finite()) {
        return Err(FpError::ParameterOutOfRange {
            name: "t",
            value: t,
            bound: "free convolution powers need t >= 1".into(),
        });
    }
    if t == 1.0 {
        return Ok(mu.clone());
    }
    if let Some((a, b)) = as_cauchy(mu) {
        return cauchy(t * a, t * b);
    }
    Ok(Measure::closure(FreePower {
        mu: mu.clone(),
        t,
        cfg: cfg.clone(),
    }))
}

struct MulMonotone {
    mu: Measure,
    nu: Measure,
}

impl Node for MulMonotone {
    fn native(&self) -> Tr {
        Tr::Eta
    }

    fn eval(&self, u: C64) -> Result<Jet> {
        let inner = self.nu.eval_at(Tr::Eta, u)?;
        self.mu.eval(Tr::Eta, inner)
    }

    fn support(&self) -> SupportClass {
        self.mu.support()
    }

    fn hull(&self) -> (f64, f64) {
        if self.support() == SupportClass::UnitCircle {
            return (f64::NEG_INFINITY, f64::INFINITY);
        }
        // the outer factor enters together with the value 1
        let (a, b) = (self.mu.hull(), self.nu.hull());
        (clean(a.0.min(1.0) * b.0, 0.0), clean(a.1.max(1.0) * b.1, f64::INFINITY))
    }

    fn radius(&self) -> f64 {
        if self.support() == SupportClass::UnitCircle {
            return 1.0;
        }
        hull_radius(self.hull(), self.mu.radius().max(1.0) * self.nu.radius())
    }

    fn eta_neg_inf(&self) -> Option<f64> {
        if self.support() == SupportClass::UnitCircle {
            return None;
        }
        let e = self.nu.eta_at_neg_infinity();
        if e.is_finite() {
            self.mu.eta(C64::new(e, 0.0)).ok().map(|v| v.re)
        } else {
            Some(self.mu.eta_at_neg_infinity())
        }
    }

    fn spec(&self) -> Spec {
        Spec::expr("mul-monotone", vec![self.mu.spec().into(), self.nu.spec().into()])
    }
}

/// Multiplicative monotone convolution, `eta = eta_mu o eta_nu`, for
/// measures on the positive half-line or on the unit circle.
pub fn mul_monotone(mu: &Measure, nu: &Measure) -> Result<Measure> {
    let circle = SupportClass::UnitCircle;
    match (mu.support(), nu.support()) {
        (a, b) if a == circle && b == circle => {
            if let (Some(x), Some(y)) = (mu.as_atomic(), nu.as_atomic()) {
                if x.atoms().len() == 1 && y.atoms().len() == 1 {
                    return Measure::circle_atomic(vec![(x.atoms()[0].0 + y.atoms()[0].0, 1.0)]);
                }
            }
        }
        (SupportClass::PositiveHalfline, SupportClass::PositiveHalfline) => {
            if let (Some(a), Some(b)) = (mu.as_dirac(), nu.as_dirac()) {
                return Ok(Measure::dirac(a * b));
            }
            if let Some(b) = nu.as_dirac() {
                return if b == 0.0 { Ok(Measure::dirac(0.0)) } else { dilate(b, mu) };
            }
            if let Some(a) = mu.as_dirac() {
                return boolean_power(nu, a);
            }
        }
        (a, b) => {
            return Err(FpError::UnsupportedSupport(format!(
                "mul_monotone needs two positive-halfline or two unit-circle measures, got {a} and {b}"
            )))
        }
    }
    Ok(Measure::closure(MulMonotone {
        mu: mu.clone(),
        nu: nu.clone(),
    }))
}

/// `(value, derivative)` of `eta_mu` on the negative axis, as reals.
fn eta_r(mu: &Measure, x: f64) -> Result<(f64, f64)> {
    crate::transforms::eta_real(mu, x)
}

struct MulFree {
    mu: Measure,
    nu: Measure,
    cfg: ToleranceConfig,
}

impl MulFree {
    fn lower(&self) -> f64 {
        self.mu.eta_at_neg_infinity().max(self.nu.eta_at_neg_infinity())
    }

    /// Real solution at `u < 0`: the value `e` and the pair `(w1, w2)`.
    fn real(&self, u: f64) -> Result<(f64, f64, [f64; 2])> {
        let (mu, nu) = (&self.mu, &self.nu);
        // eta^{-1}(e) = e Sigma_mu(e) Sigma_nu(e) = x1 x2 / e
        let h = |e: f64| -> Result<(f64, f64)> {
            let (x1, d1) = eta_inverse_real(mu, e)?;
            let (x2, d2) = eta_inverse_real(nu, e)?;
            let v = x1 * x2 / e;
            Ok((v, (x2 / d1 + x1 / d2 - v) / e))
        };
        let (e, he) = solve::solve_increasing(&h, u, self.lower())?;
        let x1 = eta_inverse_real(mu, e)?.0;
        let x2 = eta_inverse_real(nu, e)?.0;
        Ok((e, 1.0 / he, [x1, x2]))
    }
}

impl Node for MulFree {
    fn native(&self) -> Tr {
        Tr::Eta
    }

    fn eval(&self, u: C64) -> Result<Jet> {
        if u.im == 0.0 {
            if u.re >= 0.0 {
                return Err(FpError::domain(u, "positive real arguments are not supported"));
            }
            let (e, de, _) = self.real(u.re)?;
            return Ok(Jet::new(C64::new(e, 0.0), C64::new(de, 0.0)));
        }
        let (mu, nu) = (&self.mu, &self.nu);
        let sys = |u: C64, x: &[C64; 2]| -> Result<SysEval<2>> {
            let e1 = mu.eval_at(Tr::Eta, x[0])?;
            let e2 = nu.eval_at(Tr::Eta, x[1])?;
            Ok(SysEval {
                r: [e1.v - e2.v, x[0] * x[1] - u * e1.v],
                jac: [[e1.d, -e2.d], [x[1] - u * e1.d, x[0]]],
                dz: [ZERO, -e1.v],
            })
        };
        let (_, _, x0) = self.real(-u.norm())?;
        let pts = solve::arc_waypoints(u);
        let x = solve::continue_path(&sys, &slit_valid, &pts, x0.map(|v| C64::new(v, 0.0)), &self.cfg)?;
        let ev = sys(u, &x)?;
        let dx = solve::implicit_derivative(&ev)?;
        let e1 = mu.eval_at(Tr::Eta, x[0])?;
        Ok(Jet::new(e1.v, e1.d * dx[0]))
    }

    fn support(&self) -> SupportClass {
        SupportClass::PositiveHalfline
    }

    fn hull(&self) -> (f64, f64) {
        let (a, b) = (self.mu.hull(), self.nu.hull());
        (clean(a.0 * b.0, 0.0), clean(a.1 * b.1, f64::INFINITY))
    }

    fn radius(&self) -> f64 {
        hull_radius(self.hull(), self.mu.radius() * self.nu.radius())
    }

    fn eta_neg_inf(&self) -> Option<f64> {
        Some(self.lower())
    }

    fn memoize(&self) -> bool {
        true
    }

    fn spec(&self) -> Spec {
        Spec::expr("mul-free", vec![self.mu.spec().into(), self.nu.spec().into()])
    }
}

/// Free multiplicative convolution of measures on the positive half-line,
/// `Sigma = Sigma_mu Sigma_nu`.
pub fn mul_free(mu: &Measure, nu: &Measure, cfg: &ToleranceConfig) -> Result<Measure> {
    require_positive(mu, "mul_free")?;
    require_positive(nu, "mul_free")?;
    if let Some(c) = nu.as_dirac() {
        return if c == 0.0 { Ok(Measure::dirac(0.0)) } else { dilate(c, mu) };
    }
    if let Some(c) = mu.as_dirac() {
        return if c == 0.0 { Ok(Measure::dirac(0.0)) } else { dilate(c, nu) };
    }
    Ok(Measure::closure(MulFree {
        mu: mu.clone(),
        nu: nu.clone(),
        cfg: cfg.clone(),
    }))
}

struct MulFreePower {
    mu: Measure,
    t: f64,
    cfg: ToleranceConfig,
}

impl MulFreePower {
    /// `eta_{mu^t}(u) = eta_mu(v)` where `eta_mu(v) (v / eta_mu(v))^t = u`.
    fn real(&self, u: f64) -> Result<(f64, f64, f64)> {
        let (mu, t) = (&self.mu, self.t);
        let h = |v: f64| -> Result<(f64, f64)> {
            let (e, d) = eta_r(mu, v)?;
            let r = v / e;
            let dr = (e - v * d) / (e * e);
            Ok((e * r.powf(t), d * r.powf(t) + t * e * r.powf(t - 1.0) * dr))
        };
        let (v, hv) = solve::solve_increasing(&h, u, f64::NEG_INFINITY)?;
        let (e, d) = eta_r(mu, v)?;
        Ok((e, d / hv, v))
    }
}

impl Node for MulFreePower {
    fn native(&self) -> Tr {
        Tr::Eta
    }

    fn eval(&self, u: C64) -> Result<Jet> {
        if u.im == 0.0 {
            if u.re >= 0.0 {
                return Err(FpError::domain(u, "positive real arguments are not supported"));
            }
            let (e, de, _) = self.real(u.re)?;
            return Ok(Jet::new(C64::new(e, 0.0), C64::new(de, 0.0)));
        }
        let (mu, t) = (&self.mu, self.t);
        let sys = |u: C64, x: &[C64; 1]| -> Result<SysEval<1>> {
            let v = Jet::var(x[0]);
            let e = mu.eval(Tr::Eta, v)?;
            let val = e * (v / e).powf(t);
            Ok(SysEval {
                r: [val.v - u],
                jac: [[val.d]],
                dz: [-ONE],
            })
        };
        let (_, _, v0) = self.real(-u.norm())?;
        let pts = solve::arc_waypoints(u);
        let x = solve::continue_path(&sys, &slit_valid, &pts, [C64::new(v0, 0.0)], &self.cfg)?;
        let ev = sys(u, &x)?;
        let e = mu.eval_at(Tr::Eta, x[0])?;
        Ok(Jet::new(e.v, e.d / ev.jac[0][0]))
    }

    fn support(&self) -> SupportClass {
        SupportClass::PositiveHalfline
    }

    fn hull(&self) -> (f64, f64) {
        let (lo, hi) = self.mu.hull();
        (lo.powf(self.t), hi.powf(self.t))
    }

    fn radius(&self) -> f64 {
        hull_radius(self.hull(), self.mu.radius().powf(self.t))
    }

    fn eta_neg_inf(&self) -> Option<f64> {
        Some(self.mu.eta_at_neg_infinity())
    }

    fn memoize(&self) -> bool {
        true
    }

    fn spec(&self) -> Spec {
        Spec::expr("mul-free-power", vec![self.mu.spec().into(), self.t.into()])
    }
}

/// Free multiplicative power `mu^{boxtimes t}`, `t >= 1`, `Sigma = Sigma_mu^t`.
pub fn mul_free_power(mu: &Measure, t: f64, cfg: &ToleranceConfig) -> Result<Measure> {
    require_positive(mu, "mul_free_power")?;
    if !(t >= 1.0 && t.is_finite()) {
        return Err(FpError::ParameterOutOfRange {
            name: "t",
            value: t,
            bound: "free multiplicative powers need t >= 1".into(),
        });
    }
    if t == 1.0 {
        return Ok(mu.clone());
    }
    if let Some(c) = mu.as_dirac() {
        return Ok(Measure::dirac(c.powf(t)));
    }
    Ok(Measure::closure(MulFreePower {
        mu: mu.clone(),
        t,
        cfg: cfg.clone(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::transforms::{eval_sigma, moments_via_eta};

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    fn named(k: &str, p: &[(&str, f64)]) -> Measure {
        make_named(k, p).unwrap()
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn hulls_cover_atoms_outside_the_minkowski_sum() {
        // mu ⊎ delta_{-1.25}: F = F_mu + 1.25 with F_mu(z) = 2(z-1)(z-2)/(2z-3),
        // atoms at the roots of 2z^2 - 3.5z + 0.25
        let mu = Measure::atomic(vec![(1.0, 0.5), (2.0, 0.5)]).unwrap();
        let b = add_boolean(&mu, &Measure::dirac(-1.25)).unwrap();
        let (lo, hi) = b.hull();
        let disc = (3.5f64 * 3.5 - 2.0).sqrt();
        let roots = [(3.5 - disc) / 4.0, (3.5 + disc) / 4.0];
        // the upper atom is past 2 - 1.25
        assert!(roots[1] > 0.75);
        for r in roots {
            assert!(lo <= r && r <= hi, "{r} outside [{lo}, {hi}]");
        }
        let m = add_monotone(&Measure::dirac(-1.25), &mu).unwrap();
        let (lo, hi) = m.hull();
        for r in roots {
            assert!(lo <= r && r <= hi);
        }
    }

    #[test]
    fn cauchy_laws_are_closed() {
        let c1 = cauchy(1.0, 2.0).unwrap();
        let c2 = cauchy(-0.5, 1.0).unwrap();
        let m = add_monotone(&c1, &c2).unwrap();
        assert_eq!(m.as_named(), Some(&NamedLaw::Cauchy { a: 0.5, b: 3.0 }));
        let f = add_free(&c1, &c1, &cfg()).unwrap();
        assert_eq!(f.as_named(), Some(&NamedLaw::Cauchy { a: 2.0, b: 4.0 }));
    }

    #[test]
    fn arcsine_monotone_semigroup() {
        let nu1 = named("arcsine", &[("t", 1.0)]);
        let nu2 = named("arcsine", &[("t", 2.0)]);
        let m = add_monotone(&nu1, &nu1).unwrap();
        for z in [C64::new(0.3, 0.5), C64::new(-2.0, 1.0), C64::new(5.0, 0.0)] {
            assert!(close(m.f(z).unwrap(), nu2.f(z).unwrap(), 1e-13));
        }
    }

    #[test]
    fn translation_by_point_mass() {
        let sc = named("semicircle", &[]);
        let shifted = add_monotone(&sc, &Measure::dirac(1.5)).unwrap();
        let free = add_free(&sc, &Measure::dirac(1.5), &cfg()).unwrap();
        let z = C64::new(0.2, 0.7);
        assert!(close(shifted.f(z).unwrap(), sc.f(z - 1.5).unwrap(), 1e-14));
        assert!(close(free.f(z).unwrap(), sc.f(z - 1.5).unwrap(), 1e-14));
    }

    #[test]
    fn boolean_power_of_stable_law_is_dilation() {
        let b = named("boolean_stable_plus", &[("alpha", 0.5)]);
        let p = boolean_power(&b, 2.0).unwrap();
        let d = dilate(4.0, &b).unwrap();
        for x in [-0.1, -1.0, -7.0] {
            let u = C64::new(x, 0.0);
            assert!(close(p.eta(u).unwrap(), d.eta(u).unwrap(), 1e-13));
        }
        assert!(boolean_power(&b, -1.0).is_err());
    }

    #[test]
    fn free_sum_of_bernoullis_is_arcsine() {
        // rho boxplus rho for rho = (delta_-1 + delta_1) / 2 is arcsine with variance 2
        let rho = Measure::atomic(vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        let s = add_free(&rho, &rho, &cfg()).unwrap();
        let arc = named("arcsine", &[("t", 2.0)]);
        for z in [C64::new(0.1, 0.5), C64::new(-3.0, 0.2), C64::new(1.0, 3.0), C64::new(2.5, 0.0)] {
            assert!(close(s.f(z).unwrap(), arc.f(z).unwrap(), 1e-10), "{z}");
        }
        let m = moments_via_eta(&s, 4).unwrap();
        assert!((m[1] - 2.0).abs() < 1e-9 && (m[3] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn free_power_of_semicircle() {
        let sc = named("semicircle", &[]);
        let p = free_power(&sc, 2.0, &cfg()).unwrap();
        let d = dilate(2f64.sqrt(), &sc).unwrap();
        let z = C64::new(0.4, 0.3);
        assert!(close(p.f(z).unwrap(), d.f(z).unwrap(), 1e-11));
        assert!(free_power(&sc, 0.5, &cfg()).is_err());
    }

    #[test]
    fn free_poisson_square() {
        let pi = named("free_poisson", &[]);
        let sq = mul_free(&pi, &pi, &cfg()).unwrap();
        for w in [-0.3, -1.0, -2.5] {
            let s = eval_sigma(&sq, w).unwrap();
            assert!((s - (1.0 - w) * (1.0 - w)).abs() < 1e-9, "{w}: {s}");
        }
        let m = moments_via_eta(&sq, 2).unwrap();
        assert!((m[0] - 1.0).abs() < 1e-8 && (m[1] - 3.0).abs() < 1e-8);
        // power path agrees
        let pw = mul_free_power(&pi, 2.0, &cfg()).unwrap();
        for u in [C64::new(-0.7, 0.0), C64::new(0.1, 0.3), C64::new(-0.2, 0.05)] {
            assert!(close(pw.eta(u).unwrap(), sq.eta(u).unwrap(), 1e-9), "{u}");
        }
    }

    #[test]
    fn monotone_multiplicative_points() {
        let m = mul_monotone(&Measure::dirac(2.0), &Measure::dirac(3.0)).unwrap();
        assert_eq!(m.as_dirac(), Some(6.0));
        let s1 = named("bernoulli_sigma", &[("t", 1.0)]);
        let s2 = named("bernoulli_sigma", &[("t", 2.0)]);
        let c = mul_monotone(&s1, &s1).unwrap();
        for x in [-0.2, -3.0] {
            let u = C64::new(x, 0.0);
            assert!(close(c.eta(u).unwrap(), s2.eta(u).unwrap(), 1e-14));
        }
        let cauchy = cauchy(0.0, 1.0).unwrap();
        assert!(mul_monotone(&cauchy, &s1).is_err());
    }
}

//! Maps built from stable laws: `M_alpha^+`, `M_alpha^-`, `U_alpha^+`, the
//! Markov-Krein transform and its inverse, and Boolean-stable scale
//! mixtures.
//!
//! Each map is evaluated from its closed formula. The composite definitions
//! (`B_{beta_alpha}(mu)^{boxtimes 1/alpha} boxtimes m_alpha^+` and friends) are
//! exposed separately as audit paths.

use std::cell::RefCell;

use crate::config::ToleranceConfig;
use crate::convolutions::{mul_free, mul_free_power, require_positive, require_real};
use crate::error::{FpError, Result};
use crate::jet::{Jet, C64, I, ONE};
use crate::measures::named::neg_pow;
use crate::measures::{make_named, Measure, Node, SupportClass, Tr};
use crate::quadrature::exp_sinh;
use crate::spec::Spec;
use crate::subordination::mult_subordinate;

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(FpError::ParameterOutOfRange {
            name: "alpha",
            value: alpha,
            bound: "must lie in (0, 1]".into(),
        })
    }
}

fn require_negative(mu: &Measure, op: &str) -> Result<()> {
    if mu.support() != SupportClass::NegativeHalfline {
        return Err(FpError::UnsupportedSupport(format!(
            "{op} needs measures on the negative half-line, got {}",
            mu.support()
        )));
    }
    Ok(())
}

#[derive(Clone, Copy, PartialEq)]
enum StableKind {
    MPlus,
    MMinus,
    UPlus,
}

struct StableMap {
    kind: StableKind,
    alpha: f64,
    mu: Measure,
}

impl Node for StableMap {
    fn native(&self) -> Tr {
        match self.kind {
            StableKind::UPlus => Tr::Eta,
            _ => Tr::F,
        }
    }

    fn eval(&self, w: C64) -> Result<Jet> {
        let z = Jet::var(w);
        let (a, inv) = (self.alpha, 1.0 / self.alpha);
        match self.kind {
            StableKind::MPlus => Ok(neg_pow(self.mu.eval(Tr::F, neg_pow(z, a))?, inv)),
            StableKind::MMinus => Ok(self.mu.eval(Tr::F, z.powf(a))?.powf(inv)),
            StableKind::UPlus => Ok(neg_pow(self.mu.eval(Tr::Eta, neg_pow(z, a))?, inv)),
        }
    }

    fn support(&self) -> SupportClass {
        match self.kind {
            StableKind::MMinus => SupportClass::NegativeHalfline,
            _ => SupportClass::PositiveHalfline,
        }
    }

    fn radius(&self) -> f64 {
        self.mu.radius().max(1.0)
    }

    fn spec(&self) -> Spec {
        let op = match self.kind {
            StableKind::MPlus => "m-alpha-plus",
            StableKind::MMinus => "m-alpha-minus",
            StableKind::UPlus => "u-alpha-plus",
        };
        Spec::expr(op, vec![self.alpha.into(), self.mu.spec().into()])
    }
}

fn stable_map(kind: StableKind, alpha: f64, mu: &Measure) -> Result<Measure> {
    check_alpha(alpha)?;
    if alpha == 1.0 {
        return Ok(mu.clone());
    }
    Ok(Measure::closure(StableMap {
        kind,
        alpha,
        mu: mu.clone(),
    }))
}

/// `M_alpha^+`: `F(z) = -(-F_mu(-(-z)^alpha))^{1/alpha}`.
pub fn m_alpha_plus(alpha: f64, mu: &Measure) -> Result<Measure> {
    require_positive(mu, "M_alpha^+")?;
    stable_map(StableKind::MPlus, alpha, mu)
}

/// `M_alpha^- = D_{-1} M_alpha^+ D_{-1}`: `F(z) = (F_mu(z^alpha))^{1/alpha}`.
pub fn m_alpha_minus(alpha: f64, mu: &Measure) -> Result<Measure> {
    require_negative(mu, "M_alpha^-")?;
    stable_map(StableKind::MMinus, alpha, mu)
}

/// `U_alpha^+`: `eta(z) = -(-eta_mu(-(-z)^alpha))^{1/alpha}`.
pub fn u_alpha_plus(alpha: f64, mu: &Measure) -> Result<Measure> {
    require_positive(mu, "U_alpha^+")?;
    stable_map(StableKind::UPlus, alpha, mu)
}

/// `B_{beta_alpha}(mu)^{boxtimes 1/alpha} boxtimes m_alpha^+`, the defining
/// composite of `M_alpha^+`.
pub fn m_alpha_plus_composite(alpha: f64, mu: &Measure, cfg: &ToleranceConfig) -> Result<Measure> {
    check_alpha(alpha)?;
    let beta = make_named("beta_alpha", &[("alpha", alpha)])?;
    let m = make_named("monotone_stable_plus", &[("alpha", alpha)])?;
    let b = mult_subordinate(&beta, mu, cfg)?;
    mul_free(&mul_free_power(&b, 1.0 / alpha, cfg)?, &m, cfg)
}

/// `B_{b_alpha^+}(mu)^{boxtimes 1/alpha}`, the defining composite of `U_alpha^+`.
pub fn u_alpha_plus_composite(alpha: f64, mu: &Measure, cfg: &ToleranceConfig) -> Result<Measure> {
    check_alpha(alpha)?;
    let b = make_named("boolean_stable_plus", &[("alpha", alpha)])?;
    mul_free_power(&mult_subordinate(&b, mu, cfg)?, 1.0 / alpha, cfg)
}

struct AtomicMarkov {
    atoms: Vec<(f64, f64)>,
    nu: Measure,
}

impl Node for AtomicMarkov {
    fn native(&self) -> Tr {
        Tr::G
    }

    fn eval(&self, z: C64) -> Result<Jet> {
        // G = prod (z - a)^{-l}, G' = -G sum l / (z - a)
        let mut log = C64::new(0.0, 0.0);
        let mut dlog = C64::new(0.0, 0.0);
        for &(a, l) in &self.atoms {
            let d = z - a;
            log += d.ln() * l;
            dlog += d.inv() * l;
        }
        let mut g = (-log).exp();
        if z.im == 0.0 {
            g.im = 0.0;
        }
        Ok(Jet::new(g, -g * dlog))
    }

    fn support(&self) -> SupportClass {
        self.nu.support()
    }

    fn hull(&self) -> (f64, f64) {
        self.nu.hull()
    }

    fn radius(&self) -> f64 {
        self.nu.radius()
    }

    fn spec(&self) -> Spec {
        Spec::expr("markov", vec![self.nu.spec().into()])
    }
}

struct Markov {
    nu: Measure,
    tol: f64,
}

impl Markov {
    /// A point inside the hull; `1/(s - c)` carries the `1/z` decay.
    fn center(&self) -> f64 {
        let (lo, hi) = self.nu.hull();
        match (lo.is_finite(), hi.is_finite()) {
            (true, true) => 0.5 * (lo + hi),
            (true, false) => lo,
            (false, true) => hi,
            _ => 0.0,
        }
    }
}

impl Node for Markov {
    fn native(&self) -> Tr {
        Tr::G
    }

    fn eval(&self, z: C64) -> Result<Jet> {
        // log((z - c) G(z)) = int_z^{z + inf d} (G_nu(s) - 1/(s - c)) ds
        let c = self.center();
        let (lo, hi) = self.nu.hull();
        let d = if z.im > 0.0 {
            I
        } else if z.re > hi {
            ONE
        } else if z.re < lo {
            -ONE
        } else {
            return Err(FpError::domain(z, "on the support"));
        };
        let err = RefCell::new(None);
        let f = |t: f64| {
            let s = z + d * t;
            match self.nu.g(s) {
                Ok(g) => (g - (s - c).inv()) * d,
                Err(e) => {
                    err.borrow_mut().get_or_insert(e);
                    C64::new(f64::NAN, f64::NAN)
                }
            }
        };
        let l = exp_sinh(f, self.tol);
        if let Some(e) = err.into_inner() {
            return Err(e);
        }
        let mut g = l?.exp() / (z - c);
        if z.im == 0.0 {
            g.im = 0.0;
        }
        let gnu = self.nu.g(z)?;
        Ok(Jet::new(g, -gnu * g))
    }

    fn support(&self) -> SupportClass {
        self.nu.support()
    }

    fn hull(&self) -> (f64, f64) {
        self.nu.hull()
    }

    fn radius(&self) -> f64 {
        self.nu.radius()
    }

    fn memoize(&self) -> bool {
        true
    }

    fn spec(&self) -> Spec {
        Spec::expr("markov", vec![self.nu.spec().into()])
    }
}

/// Markov-Krein transform `G_{M(nu)}(z) = exp(int log(1/(z - x)) nu(dx))`.
///
/// Atomic inputs use the finite product; everything else integrates
/// `d/dz log G_M = -G_nu` from infinity.
pub fn markov_transform(nu: &Measure, cfg: &ToleranceConfig) -> Result<Measure> {
    require_real(nu, "the Markov transform")?;
    if nu.as_dirac().is_some() {
        return Ok(nu.clone());
    }
    if let Some(a) = nu.as_atomic() {
        return Ok(Measure::closure(AtomicMarkov {
            atoms: a.atoms().to_vec(),
            nu: nu.clone(),
        }));
    }
    Ok(Measure::closure(Markov {
        nu: nu.clone(),
        tol: (cfg.newton_tol * 0.1).max(1e-14),
    }))
}

const CIRCLE_NODES: usize = 16;

struct InverseMarkov {
    mu: Measure,
}

impl InverseMarkov {
    /// Distance from `z` to where `G_mu` may be singular.
    fn clearance(&self, z: C64) -> f64 {
        if z.im > 0.0 {
            return z.im;
        }
        if let Some(a) = self.mu.as_atomic() {
            return a.atoms().iter().map(|&(x, _)| (z.re - x).abs()).fold(f64::INFINITY, f64::min);
        }
        let (lo, hi) = self.mu.hull();
        (z.re - lo).abs().min((z.re - hi).abs())
    }
}

impl Node for InverseMarkov {
    fn native(&self) -> Tr {
        Tr::G
    }

    fn eval(&self, z: C64) -> Result<Jet> {
        let g = self.mu.eval_at(Tr::G, z)?;
        if g.v.norm() * (1.0 + z.norm()) < 1e-10 {
            return Err(FpError::domain(z, "G_mu vanishes"));
        }
        // G'' from a Cauchy integral of G' on a circle well inside the
        // domain of analyticity
        let r = 0.25 * self.clearance(z).min(1.0 + z.norm());
        let mut g2 = C64::new(0.0, 0.0);
        for k in 0..CIRCLE_NODES {
            let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / CIRCLE_NODES as f64);
            g2 += self.mu.eval_at(Tr::G, z + w * r)?.d / w;
        }
        g2 /= r * CIRCLE_NODES as f64;
        let val = -g.d.fdiv(g.v);
        Ok(Jet::new(val, val * val - g2.fdiv(g.v)))
    }

    fn support(&self) -> SupportClass {
        self.mu.support()
    }

    fn hull(&self) -> (f64, f64) {
        self.mu.hull()
    }

    fn radius(&self) -> f64 {
        self.mu.radius()
    }

    fn spec(&self) -> Spec {
        Spec::expr("inverse-markov", vec![self.mu.spec().into()])
    }
}

/// Inverse Markov-Krein transform, `G_nu = -G_mu' / G_mu`.
pub fn inverse_markov(mu: &Measure) -> Result<Measure> {
    require_real(mu, "the inverse Markov transform")?;
    if mu.as_dirac().is_some() {
        return Ok(mu.clone());
    }
    Ok(Measure::closure(InverseMarkov { mu: mu.clone() }))
}

struct BooleanMixture {
    nu: Measure,
    alpha: f64,
}

impl Node for BooleanMixture {
    fn native(&self) -> Tr {
        Tr::G
    }

    fn eval(&self, w: C64) -> Result<Jet> {
        // G(z) = (-z)^{alpha-1} G_nu(-(-z)^alpha)
        let z = Jet::var(w);
        let g = self.nu.eval(Tr::G, neg_pow(z, self.alpha))?;
        Ok((-z).powf(self.alpha - 1.0) * g)
    }

    fn support(&self) -> SupportClass {
        SupportClass::PositiveHalfline
    }

    fn radius(&self) -> f64 {
        self.nu.radius().max(1.0)
    }

    fn spec(&self) -> Spec {
        Spec::expr("boolean-mixture", vec![self.alpha.into(), self.nu.spec().into()])
    }
}

/// Law of `V^{1/alpha} B` with `V ~ nu` and `B ~ b_alpha^+` independent.
pub fn boolean_mixture(nu: &Measure, alpha: f64) -> Result<Measure> {
    require_positive(nu, "boolean_mixture")?;
    check_alpha(alpha)?;
    if alpha == 1.0 {
        return Ok(nu.clone());
    }
    Ok(Measure::closure(BooleanMixture {
        nu: nu.clone(),
        alpha,
    }))
}

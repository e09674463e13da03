//! Probability measures and the dispatch of their transforms.
//!
//! A [`Measure`] is a cheap handle (reference counted) over one of four
//! representations: finitely many atoms, a named law with closed-form
//! transforms, a sampled density, or a lazy closure produced by a
//! convolution or subordination map. Every representation answers
//! [`Measure::eval`] for `G`, `F` and `eta`; whatever it does not provide
//! natively is derived through `F = 1/G` and `eta(z) = 1 - z F(1/z)`.

mod atomic;
mod closure;
mod grid;
pub mod named;

use std::fmt;
use std::sync::Arc;

pub use atomic::Atomic;
pub(crate) use closure::{Closure, Node};
pub use grid::GridDensity;
pub use named::{make_named, NamedLaw};

use crate::error::{FpError, Result};
use crate::jet::{rsub, Jet, C64, ZERO};
use crate::spec::Spec;

/// Where a measure lives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SupportClass {
    RealLine,
    PositiveHalfline,
    NegativeHalfline,
    UnitCircle,
}

impl SupportClass {
    pub fn is_real(self) -> bool {
        self != SupportClass::UnitCircle
    }

    pub fn name(self) -> &'static str {
        match self {
            SupportClass::RealLine => "real-line",
            SupportClass::PositiveHalfline => "positive-halfline",
            SupportClass::NegativeHalfline => "negative-halfline",
            SupportClass::UnitCircle => "unit-circle",
        }
    }

    /// Closed hull implied by the class alone.
    pub(crate) fn hull(self) -> (f64, f64) {
        match self {
            SupportClass::PositiveHalfline => (0.0, f64::INFINITY),
            SupportClass::NegativeHalfline => (f64::NEG_INFINITY, 0.0),
            _ => (f64::NEG_INFINITY, f64::INFINITY),
        }
    }

    pub(crate) fn reflect(self) -> Self {
        match self {
            SupportClass::PositiveHalfline => SupportClass::NegativeHalfline,
            SupportClass::NegativeHalfline => SupportClass::PositiveHalfline,
            c => c,
        }
    }
}

impl fmt::Display for SupportClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// The transforms every measure can evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Tr {
    /// Cauchy transform `G`.
    G,
    /// Reciprocal Cauchy transform `F = 1/G`.
    F,
    /// `eta(z) = 1 - z F(1/z)`.
    Eta,
}

#[derive(Clone)]
enum Repr {
    Atomic(Arc<Atomic>),
    Named(Arc<NamedLaw>),
    Grid(Arc<GridDensity>),
    Closure(Arc<Closure>),
}

/// Borrowed view of a measure's representation.
pub enum Variant<'a> {
    Atomic(&'a Atomic),
    Named(&'a NamedLaw),
    Grid(&'a GridDensity),
    Closure,
}

/// An immutable probability measure. Cloning shares the underlying data.
#[derive(Clone)]
pub struct Measure(Repr);

impl fmt::Debug for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match serde_json::to_string(&self.spec()) {
            Ok(s) => write!(f, "Measure({s})"),
            Err(_) => write!(f, "Measure(<unprintable>)"),
        }
    }
}

impl Measure {
    /// Finitely many atoms on the real line. The support class is the
    /// smallest of real line, positive or negative half-line that fits.
    pub fn atomic(atoms: Vec<(f64, f64)>) -> Result<Measure> {
        Ok(Measure(Repr::Atomic(Arc::new(Atomic::new(atoms)?))))
    }

    /// Atoms on the unit circle, given as angles.
    pub fn circle_atomic(angles: Vec<(f64, f64)>) -> Result<Measure> {
        Ok(Measure(Repr::Atomic(Arc::new(Atomic::on_circle(angles)?))))
    }

    pub fn dirac(a: f64) -> Measure {
        Measure::atomic(vec![(a, 1.0)]).expect("a point mass is always valid")
    }

    pub fn grid(g: GridDensity) -> Measure {
        Measure(Repr::Grid(Arc::new(g)))
    }

    pub(crate) fn from_named(n: NamedLaw) -> Measure {
        Measure(Repr::Named(Arc::new(n)))
    }

    pub(crate) fn from_atomic(a: Atomic) -> Measure {
        Measure(Repr::Atomic(Arc::new(a)))
    }

    pub(crate) fn closure(node: impl Node + 'static) -> Measure {
        Measure(Repr::Closure(Arc::new(Closure::new(Box::new(node)))))
    }

    pub fn variant(&self) -> Variant<'_> {
        match &self.0 {
            Repr::Atomic(a) => Variant::Atomic(a),
            Repr::Named(n) => Variant::Named(n),
            Repr::Grid(g) => Variant::Grid(g),
            Repr::Closure(_) => Variant::Closure,
        }
    }

    pub fn as_atomic(&self) -> Option<&Atomic> {
        match &self.0 {
            Repr::Atomic(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_named(&self) -> Option<&NamedLaw> {
        match &self.0 {
            Repr::Named(n) => Some(n),
            _ => None,
        }
    }

    pub fn as_grid(&self) -> Option<&GridDensity> {
        match &self.0 {
            Repr::Grid(g) => Some(g),
            _ => None,
        }
    }

    pub fn is_closure(&self) -> bool {
        matches!(self.0, Repr::Closure(_))
    }

    /// Location of a real point mass, if this is one.
    pub fn as_dirac(&self) -> Option<f64> {
        let a = self.as_atomic()?;
        if a.support() == SupportClass::UnitCircle || a.atoms().len() != 1 {
            return None;
        }
        Some(a.atoms()[0].0)
    }

    pub fn support(&self) -> SupportClass {
        match &self.0 {
            Repr::Atomic(a) => a.support(),
            Repr::Named(n) => n.support(),
            Repr::Grid(g) => g.support(),
            Repr::Closure(c) => c.node.support(),
        }
    }

    /// Rough radius of the bulk of the measure; sets continuation anchors.
    pub fn radius(&self) -> f64 {
        match &self.0 {
            Repr::Atomic(a) => a.radius(),
            Repr::Named(n) => n.radius(),
            Repr::Grid(g) => g.radius(),
            Repr::Closure(c) => c.node.radius(),
        }
    }

    /// Closed interval known to contain the support (real measures).
    pub fn hull(&self) -> (f64, f64) {
        match &self.0 {
            Repr::Atomic(a) => a.hull(),
            Repr::Named(n) => n.hull(),
            Repr::Grid(g) => (g.xs()[0], *g.xs().last().unwrap()),
            Repr::Closure(c) => c.node.hull(),
        }
    }

    pub fn spec(&self) -> Spec {
        match &self.0 {
            Repr::Atomic(a) => a.spec(),
            Repr::Named(n) => n.spec(),
            Repr::Grid(g) => Spec::Grid {
                xs: g.xs().to_vec(),
                ps: g.ps().to_vec(),
            },
            Repr::Closure(c) => c.node.spec(),
        }
    }

    /// `eta(-inf)`, the left end of the Sigma-transform domain. Equals
    /// `1 - 1/mu({0})`, and `-inf` without an atom at zero.
    pub fn eta_at_neg_infinity(&self) -> f64 {
        let exact = match &self.0 {
            Repr::Atomic(a) => Some(a.eta_neg_inf()),
            Repr::Named(n) => Some(n.eta_neg_inf()),
            Repr::Grid(_) => Some(f64::NEG_INFINITY),
            Repr::Closure(c) => c.node.eta_neg_inf(),
        };
        exact.unwrap_or_else(|| self.eta_neg_inf_numeric())
    }

    fn eta_neg_inf_numeric(&self) -> f64 {
        let a = self.eta(C64::new(-1e8, 0.0)).map(|v| v.re);
        let b = self.eta(C64::new(-1e10, 0.0)).map(|v| v.re);
        match (a, b) {
            (Ok(a), Ok(b)) if (a - b).abs() <= 1e-4 * (1.0 + b.abs()) => b,
            _ => f64::NEG_INFINITY,
        }
    }

    /// Boundary density at a real point when the representation knows it in
    /// closed form (no extrapolation involved).
    pub fn boundary_density(&self, x: f64) -> Option<Result<f64>> {
        match &self.0 {
            Repr::Named(n) => n.density(x).map(Ok),
            Repr::Closure(c) => c.node.boundary_density(x),
            _ => None,
        }
    }

    pub fn g(&self, z: C64) -> Result<C64> {
        Ok(self.eval_at(Tr::G, z)?.v)
    }

    pub fn f(&self, z: C64) -> Result<C64> {
        Ok(self.eval_at(Tr::F, z)?.v)
    }

    pub fn eta(&self, z: C64) -> Result<C64> {
        Ok(self.eval_at(Tr::Eta, z)?.v)
    }

    /// Evaluate a transform at a jet, applying the chain rule.
    pub fn eval(&self, tr: Tr, z: Jet) -> Result<Jet> {
        Ok(self.eval_at(tr, z.v)?.chain(z))
    }

    /// Value and derivative of a transform at `w`.
    pub fn eval_at(&self, tr: Tr, w: C64) -> Result<Jet> {
        if !(w.re.is_finite() && w.im.is_finite()) {
            return Err(FpError::domain(w, "non-finite argument"));
        }
        let support = self.support();
        if support.is_real() && w.im < 0.0 {
            return Ok(self.eval_at(tr, w.conj())?.conj());
        }
        let zp = match tr {
            Tr::Eta => {
                if w == ZERO {
                    return Err(FpError::domain(w, "eta is only a limit at 0"));
                }
                w.inv()
            }
            _ => w,
        };
        self.check_off_support(zp)?;
        let j = self.dispatch(tr, w)?;
        if !j.is_finite() {
            return Err(FpError::domain(w, "transform is not finite here"));
        }
        Ok(j)
    }

    fn check_off_support(&self, z: C64) -> Result<()> {
        if self.support() == SupportClass::UnitCircle {
            if (z.norm() - 1.0).abs() <= 1e-14 {
                return Err(FpError::domain(z, "on the unit circle"));
            }
            return Ok(());
        }
        if z.im != 0.0 {
            return Ok(());
        }
        let x = z.re;
        let on = match &self.0 {
            Repr::Atomic(a) => a.atoms().iter().any(|&(p, _)| (x - p).abs() <= 1e-14 * (1.0 + p.abs())),
            _ => {
                let (lo, hi) = self.hull();
                lo <= x && x <= hi
            }
        };
        if on {
            Err(FpError::domain(z, "on the support"))
        } else {
            Ok(())
        }
    }

    fn dispatch(&self, tr: Tr, w: C64) -> Result<Jet> {
        match &self.0 {
            Repr::Atomic(a) => a.eval(tr, w),
            Repr::Grid(g) => match tr {
                Tr::G => g.g(w),
                _ => self.convert(tr, Tr::G, w),
            },
            Repr::Named(n) => match n.direct(tr, w) {
                Some(r) => r,
                None => self.convert(tr, n.native(), w),
            },
            Repr::Closure(c) => {
                let native = c.node.native();
                if tr == native {
                    c.eval(w)
                } else {
                    self.convert(tr, native, w)
                }
            }
        }
    }

    fn convert(&self, tr: Tr, native: Tr, w: C64) -> Result<Jet> {
        match (native, tr) {
            (Tr::G, Tr::F) => self.eval_at(Tr::G, w)?.recip_or(w),
            (Tr::F, Tr::G) | (Tr::Eta, Tr::G) => self.eval_at(Tr::F, w)?.recip_or(w),
            (Tr::G, Tr::Eta) | (Tr::F, Tr::Eta) => {
                let u = Jet::var(w);
                let f = self.eval(Tr::F, u.recip())?;
                Ok(rsub(1.0, u * f))
            }
            (Tr::Eta, Tr::F) => {
                let z = Jet::var(w);
                let e = self.eval(Tr::Eta, z.recip())?;
                Ok(z * rsub(1.0, e))
            }
            _ => unreachable!("native transform handled directly"),
        }
    }
}

impl Jet {
    fn recip_or(self, w: C64) -> Result<Jet> {
        if self.v == ZERO {
            Err(FpError::domain(w, "reciprocal of zero"))
        } else {
            Ok(self.recip())
        }
    }
}

/// Law of `aX`.
pub fn dilate(a: f64, mu: &Measure) -> Result<Measure> {
    if a == 0.0 || !a.is_finite() {
        return Err(FpError::ParameterOutOfRange {
            name: "a",
            value: a,
            bound: "dilation factor must be nonzero and finite".into(),
        });
    }
    if mu.support() == SupportClass::UnitCircle {
        return Err(FpError::UnsupportedSupport(
            "dilation is defined for measures on the real line".into(),
        ));
    }
    if a == 1.0 {
        return Ok(mu.clone());
    }
    match &mu.0 {
        Repr::Atomic(at) => Measure::atomic(at.atoms().iter().map(|&(x, w)| (a * x, w)).collect()),
        Repr::Grid(g) => Ok(Measure::grid(g.dilate(a)?)),
        _ => Ok(Measure::closure(Dilated { a, mu: mu.clone() })),
    }
}

struct Dilated {
    a: f64,
    mu: Measure,
}

impl Node for Dilated {
    fn native(&self) -> Tr {
        Tr::F
    }

    fn eval(&self, w: C64) -> Result<Jet> {
        // F_{D_a mu}(z) = a F_mu(z / a)
        let inner = self.mu.eval(Tr::F, Jet::var(w) / self.a)?;
        Ok(inner * self.a)
    }

    fn support(&self) -> SupportClass {
        if self.a > 0.0 {
            self.mu.support()
        } else {
            self.mu.support().reflect()
        }
    }

    fn radius(&self) -> f64 {
        self.a.abs() * self.mu.radius()
    }

    fn hull(&self) -> (f64, f64) {
        let (lo, hi) = self.mu.hull();
        let (p, q) = (self.a * lo, self.a * hi);
        let (p, q) = (if p.is_nan() { 0.0 } else { p }, if q.is_nan() { 0.0 } else { q });
        (p.min(q), p.max(q))
    }

    fn eta_neg_inf(&self) -> Option<f64> {
        (self.a > 0.0).then(|| self.mu.eta_at_neg_infinity())
    }

    fn spec(&self) -> Spec {
        Spec::expr("dilate", vec![self.a.into(), self.mu.spec().into()])
    }
}

/// Push-forward under `x -> x^p` of a measure on the positive half-line.
pub fn power_pushforward(p: f64, mu: &Measure) -> Result<Measure> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(FpError::ParameterOutOfRange {
            name: "p",
            value: p,
            bound: "exponent must be positive".into(),
        });
    }
    if mu.support() != SupportClass::PositiveHalfline {
        return Err(FpError::UnsupportedSupport(format!(
            "power push-forward needs a positive-halfline measure, got {}",
            mu.support()
        )));
    }
    if p == 1.0 {
        return Ok(mu.clone());
    }
    match &mu.0 {
        Repr::Atomic(at) => Measure::atomic(at.atoms().iter().map(|&(x, w)| (x.powf(p), w)).collect()),
        Repr::Grid(g) => Ok(Measure::grid(g.power(p)?)),
        _ => Err(FpError::UnsupportedSupport(
            "power push-forward is available for atomic and grid measures".into(),
        )),
    }
}

/// First `n` moments. Exact for atoms and for named laws with finite
/// moments, trapezoid quadrature for grids.
pub fn moments(mu: &Measure, n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(FpError::ParameterOutOfRange {
            name: "n",
            value: 0.0,
            bound: "need at least one moment".into(),
        });
    }
    match &mu.0 {
        Repr::Atomic(a) => a.moments(n),
        Repr::Grid(g) => Ok(g.moments(n)),
        Repr::Named(l) => l.moments(n),
        Repr::Closure(_) => Err(FpError::NeedsDensification),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dirac_transforms() {
        let d = Measure::dirac(2.0);
        let z = C64::new(0.5, 1.0);
        assert!((d.g(z).unwrap() - (z - 2.0).inv()).norm() < 1e-15);
        assert!((d.f(z).unwrap() - (z - 2.0)).norm() < 1e-15);
        // eta_{delta_c}(z) = c z
        assert!((d.eta(C64::new(-0.3, 0.1)).unwrap() - C64::new(-0.6, 0.2)).norm() < 1e-15);
    }

    #[test]
    fn dilation_composes_on_atoms() {
        let mu = Measure::atomic(vec![(1.0, 0.25), (3.0, 0.75)]).unwrap();
        let a = dilate(2.0, &dilate(-3.0, &mu).unwrap()).unwrap();
        let b = dilate(-6.0, &mu).unwrap();
        assert_eq!(a.as_atomic().unwrap().atoms(), b.as_atomic().unwrap().atoms());
        assert_eq!(b.support(), SupportClass::NegativeHalfline);
    }

    #[test]
    fn moments_of_sigma_one() {
        let s = make_named("bernoulli_sigma", &[("t", 1.0)]).unwrap();
        let m = moments(&s, 2).unwrap();
        assert_eq!(m, vec![1.0, 2.0]);
    }

    #[test]
    fn pushforward_of_atoms() {
        let mu = Measure::atomic(vec![(2.0, 1.0)]).unwrap();
        assert_eq!(power_pushforward(2.0, &mu).unwrap().as_dirac(), Some(4.0));
        let rho = make_named("bernoulli_rho", &[("t", 0.5)]).unwrap();
        let img = power_pushforward(2.0, &rho).unwrap();
        assert_eq!(img.as_atomic().unwrap().atoms(), rho.as_atomic().unwrap().atoms());
        let cauchy = make_named("cauchy", &[("a", 0.0), ("b", 1.0)]).unwrap();
        assert!(power_pushforward(2.0, &cauchy).is_err());
    }

    #[test]
    fn evaluation_on_the_support_is_rejected() {
        let pi = make_named("free_poisson", &[]).unwrap();
        assert!(pi.g(C64::new(1.0, 0.0)).is_err());
        assert!(pi.g(C64::new(-1.0, 0.0)).is_ok());
        assert!(Measure::dirac(0.0).g(ZERO).is_err());
    }
}

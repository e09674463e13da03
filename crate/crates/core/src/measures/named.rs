//! Laws with closed-form transforms.
//!
//! Stable laws on the negative half-line are stored as their positive
//! counterparts with `sign = -1` and evaluated through
//! `G_{D_{-1} mu}(z) = -G_mu(-z)`.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use super::{Atomic, Measure, SupportClass, Tr};
use crate::config::ToleranceConfig;
use crate::error::{FpError, Result};
use crate::jet::{one_minus_pow, ppow, rsub, Jet, C64, ONE};
use crate::quadrature::{tanh_sinh, tanh_sinh_floor};
use crate::solve::{invert_analytic, solve_increasing};
use crate::spec::Spec;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum NamedLaw {
    BooleanStable { alpha: f64, sign: f64 },
    FreeStable { alpha: f64, sign: f64 },
    MonotoneStable { alpha: f64, sign: f64 },
    FreePoisson,
    Semicircle,
    BetaAlpha { alpha: f64 },
    /// General beta law; `norm` is the beta function `B(p, q)`.
    Beta { p: f64, q: f64, norm: f64 },
    Cauchy { a: f64, b: f64 },
    /// Arcsine law with mean 0 and variance `t`.
    Arcsine { t: f64 },
    MuAlphaP { alpha: f64, p: f64 },
    NuP { p: f64 },
    TauP { p: f64 },
    /// Poisson kernel on the circle, `eta(z) = e^{-a+ib} z`.
    CircleCauchy { a: f64, b: f64 },
}

/// Names accepted by [`make_named`] with their parameters.
pub const LAW_NAMES: &[(&str, &[&str])] = &[
    ("dirac", &["a"]),
    ("bernoulli_sigma", &["t"]),
    ("bernoulli_rho", &["t"]),
    ("boolean_stable_plus", &["alpha"]),
    ("boolean_stable_minus", &["alpha"]),
    ("free_stable_plus", &["alpha"]),
    ("free_stable_minus", &["alpha"]),
    ("monotone_stable_plus", &["alpha"]),
    ("monotone_stable_minus", &["alpha"]),
    ("free_poisson", &[]),
    ("semicircle", &[]),
    ("beta", &["p", "q"]),
    ("beta_alpha", &["alpha"]),
    ("cauchy", &["a", "b"]),
    ("arcsine", &["t"]),
    ("mu_alpha_p", &["alpha", "p"]),
    ("nu_p", &["p"]),
    ("tau_p", &["p"]),
    ("circle_cauchy", &["a", "b"]),
];

fn out_of_range(name: &'static str, value: f64, bound: &str) -> FpError {
    FpError::ParameterOutOfRange {
        name,
        value,
        bound: bound.to_string(),
    }
}

fn in_unit(name: &'static str, v: f64, closed_left: bool) -> Result<f64> {
    let ok = if closed_left { (0.0..=1.0).contains(&v) } else { v > 0.0 && v <= 1.0 };
    if ok {
        Ok(v)
    } else if closed_left {
        Err(out_of_range(name, v, "must lie in [0, 1]"))
    } else {
        Err(out_of_range(name, v, "must lie in (0, 1]"))
    }
}

fn beta_fn(p: f64, q: f64) -> Result<f64> {
    let v = tanh_sinh(
        |_, dl, dr| C64::new(dl.powf(p - 1.0) * dr.powf(q - 1.0), 0.0),
        0.0,
        1.0,
        1e-15,
    )?;
    Ok(v.re)
}

/// Instantiate a named law. Degenerate parameters give point masses
/// (`alpha = 1` stable laws are `delta_{+-1}`, `b = 0` Cauchy is `delta_a`,
/// `beta_alpha` with `alpha` in `{0, 1}` is `delta_alpha`).
pub fn make_named(kind: &str, params: &[(&str, f64)]) -> Result<Measure> {
    let allowed = LAW_NAMES
        .iter()
        .find(|(n, _)| *n == kind)
        .map(|(_, p)| *p)
        .ok_or_else(|| FpError::InvalidMeasure(format!("unknown law `{kind}`")))?;
    for (k, _) in params {
        if !allowed.contains(k) {
            return Err(FpError::InvalidMeasure(format!(
                "law `{kind}` has no parameter `{k}` (expected {allowed:?})"
            )));
        }
    }
    let get = |name: &'static str| -> Result<f64> {
        params
            .iter()
            .find(|(k, _)| *k == name)
            .map(|(_, v)| *v)
            .ok_or_else(|| FpError::InvalidMeasure(format!("law `{kind}` needs parameter `{name}`")))
    };
    let opt = |name: &str, default: f64| params.iter().find(|(k, _)| *k == name).map_or(default, |(_, v)| *v);
    if params.iter().any(|(_, v)| !v.is_finite()) {
        return Err(FpError::InvalidMeasure("law parameters must be finite".into()));
    }
    let stable = |sign: f64| -> Result<(f64, f64)> { Ok((in_unit("alpha", get("alpha")?, false)?, sign)) };
    let law = match kind {
        "dirac" => return Ok(Measure::dirac(get("a")?)),
        "bernoulli_sigma" => {
            let t = get("t")?;
            if !(t >= 0.0) {
                return Err(out_of_range("t", t, "must be >= 0"));
            }
            if t == 0.0 {
                return Ok(Measure::dirac(1.0));
            }
            return Measure::atomic(vec![(0.0, t / (1.0 + t)), (1.0 + t, 1.0 / (1.0 + t))]);
        }
        "bernoulli_rho" => {
            let t = in_unit("t", get("t")?, true)?;
            if t == 0.0 || t == 1.0 {
                return Ok(Measure::dirac(t));
            }
            return Measure::atomic(vec![(0.0, 1.0 - t), (1.0, t)]);
        }
        "boolean_stable_plus" | "boolean_stable_minus" | "free_stable_plus" | "free_stable_minus"
        | "monotone_stable_plus" | "monotone_stable_minus" => {
            let sign = if kind.ends_with("plus") { 1.0 } else { -1.0 };
            let (alpha, sign) = stable(sign)?;
            if alpha == 1.0 {
                return Ok(Measure::dirac(sign));
            }
            if kind.starts_with("boolean") {
                NamedLaw::BooleanStable { alpha, sign }
            } else if kind.starts_with("free") {
                NamedLaw::FreeStable { alpha, sign }
            } else {
                NamedLaw::MonotoneStable { alpha, sign }
            }
        }
        "free_poisson" => NamedLaw::FreePoisson,
        "semicircle" => NamedLaw::Semicircle,
        "beta_alpha" => {
            let alpha = in_unit("alpha", get("alpha")?, true)?;
            if alpha == 0.0 || alpha == 1.0 {
                return Ok(Measure::dirac(alpha));
            }
            NamedLaw::BetaAlpha { alpha }
        }
        "beta" => {
            let (p, q) = (get("p")?, get("q")?);
            if !(p > 0.0) {
                return Err(out_of_range("p", p, "must be > 0"));
            }
            if !(q > 0.0) {
                return Err(out_of_range("q", q, "must be > 0"));
            }
            if (p + q - 1.0).abs() < 1e-15 {
                NamedLaw::BetaAlpha { alpha: p }
            } else {
                NamedLaw::Beta { p, q, norm: beta_fn(p, q)? }
            }
        }
        "cauchy" => {
            let (a, b) = (opt("a", 0.0), get("b")?);
            if !(b >= 0.0) {
                return Err(out_of_range("b", b, "must be >= 0"));
            }
            if b == 0.0 {
                return Ok(Measure::dirac(a));
            }
            NamedLaw::Cauchy { a, b }
        }
        "arcsine" => {
            let t = get("t")?;
            if !(t >= 0.0) {
                return Err(out_of_range("t", t, "must be >= 0"));
            }
            if t == 0.0 {
                return Ok(Measure::dirac(0.0));
            }
            NamedLaw::Arcsine { t }
        }
        "mu_alpha_p" => {
            let alpha = in_unit("alpha", get("alpha")?, false)?;
            let p = in_unit("p", get("p")?, false)?;
            if p == 1.0 {
                return Ok(Measure::dirac(0.0));
            }
            NamedLaw::MuAlphaP { alpha, p }
        }
        "nu_p" => {
            let p = in_unit("p", get("p")?, false)?;
            if p == 1.0 {
                return Ok(Measure::dirac(0.0));
            }
            NamedLaw::NuP { p }
        }
        "tau_p" => {
            let p = get("p")?;
            if !(p > 0.0 && p < 1.0) {
                return Err(out_of_range("p", p, "must lie in (0, 1)"));
            }
            NamedLaw::TauP { p }
        }
        "circle_cauchy" => {
            let (a, b) = (get("a")?, opt("b", 0.0));
            if !(a >= 0.0) {
                return Err(out_of_range("a", a, "must be >= 0"));
            }
            if a == 0.0 {
                return Ok(Measure::from_atomic(Atomic::on_circle(vec![(b, 1.0)])?));
            }
            NamedLaw::CircleCauchy { a, b }
        }
        _ => unreachable!("name checked against LAW_NAMES"),
    };
    Ok(Measure::from_named(law))
}

fn var(w: C64) -> Jet {
    Jet::var(w)
}

/// `-(-x)^p`, the recurring stable-law building block.
pub(crate) fn neg_pow(x: Jet, p: f64) -> Jet {
    -((-x).powf(p))
}

fn free_stable_f(alpha: f64, w: C64) -> Result<Jet> {
    if w.im < 0.0 {
        return Ok(free_stable_f(alpha, w.conj())?.conj());
    }
    let c = 1.0 - alpha;
    let f = |v: Jet| -> Result<Jet> { Ok(v + (-v).powf(c)) };
    if w.im == 0.0 {
        if w.re >= 0.0 {
            return Err(FpError::domain(w, "on the support"));
        }
        // increasing branch of v + (-v)^c lies left of -(c)^{1/alpha}
        let v0 = -c.powf(1.0 / alpha);
        let h = |s: f64| -> Result<(f64, f64)> {
            let v = v0 + s;
            Ok((v + (-v).powf(c), 1.0 - c * (-v).powf(-alpha)))
        };
        let (s, d) = solve_increasing(&h, w.re, f64::NEG_INFINITY)?;
        return Ok(Jet::new(C64::new(v0 + s, 0.0), C64::new(1.0 / d, 0.0)));
    }
    let cfg = ToleranceConfig::default();
    let anchor = C64::new(w.re, 10.0 + 2.0 * w.norm());
    invert_analytic(&f, &|v: C64| v.im > -1e-10, w, anchor, &cfg)
}

fn beta_g(p: f64, q: f64, norm: f64, z: C64) -> Result<Jet> {
    let tol = 1e-14;
    let dens = |dl: f64, dr: f64| dl.powf(p - 1.0) * dr.powf(q - 1.0);
    let near = z.re > 0.0 && z.re < 1.0 && z.im.abs() < 0.5;
    if near {
        // subtract the pole: int (rho(x) - rho(z)) / (z - x) + rho(z) log(z / (z - 1))
        let rz = ppow(z, p - 1.0) * ppow(ONE - z, q - 1.0);
        let drz = rz * ((p - 1.0) / z - (q - 1.0) / (ONE - z));
        let l = (z / (z - 1.0)).ln();
        let dl = z.inv() - (z - 1.0).inv();
        let lead = rz * l;
        let dlead = drz * l + rz * dl;
        let rem = tanh_sinh_floor(|x, a, b| (dens(a, b) - rz) / (z - x), 0.0, 1.0, tol, lead.norm())?;
        let drem = tanh_sinh_floor(
            |x, a, b| {
                let e = z - x;
                -(dens(a, b) - rz + drz * e) / (e * e)
            },
            0.0,
            1.0,
            tol,
            dlead.norm(),
        )?;
        Ok(Jet::new((lead + rem) / norm, (dlead + drem) / norm))
    } else {
        let g = tanh_sinh(|x, a, b| dens(a, b) / (z - x), 0.0, 1.0, tol)?;
        let d = tanh_sinh(
            |x, a, b| {
                let e = z - x;
                -dens(a, b) / (e * e)
            },
            0.0,
            1.0,
            tol,
        )?;
        Ok(Jet::new(g / norm, d / norm))
    }
}

/// `G` of `nu_p` written through `v = 1 - 1/z` so that every power is
/// analytic off `[0, 1]`.
fn nu_p_g(p: f64, z: Jet) -> Jet {
    let u = z.recip();
    let v = rsub(1.0, u);
    v.powf(p - 1.0) * p * u * (u / one_minus_pow(u, p))
}

fn nu_density(p: f64, x: f64) -> f64 {
    let (a, b) = (x.powf(p), (1.0 - x).powf(p));
    p * (PI * p).sin() / PI * (x * (1.0 - x)).powf(p - 1.0) / (a * a - 2.0 * a * b * (PI * p).cos() + b * b)
}

impl NamedLaw {
    pub fn name(&self) -> &'static str {
        match self {
            NamedLaw::BooleanStable { sign, .. } => {
                if *sign > 0.0 {
                    "boolean_stable_plus"
                } else {
                    "boolean_stable_minus"
                }
            }
            NamedLaw::FreeStable { sign, .. } => {
                if *sign > 0.0 {
                    "free_stable_plus"
                } else {
                    "free_stable_minus"
                }
            }
            NamedLaw::MonotoneStable { sign, .. } => {
                if *sign > 0.0 {
                    "monotone_stable_plus"
                } else {
                    "monotone_stable_minus"
                }
            }
            NamedLaw::FreePoisson => "free_poisson",
            NamedLaw::Semicircle => "semicircle",
            NamedLaw::BetaAlpha { .. } => "beta_alpha",
            NamedLaw::Beta { .. } => "beta",
            NamedLaw::Cauchy { .. } => "cauchy",
            NamedLaw::Arcsine { .. } => "arcsine",
            NamedLaw::MuAlphaP { .. } => "mu_alpha_p",
            NamedLaw::NuP { .. } => "nu_p",
            NamedLaw::TauP { .. } => "tau_p",
            NamedLaw::CircleCauchy { .. } => "circle_cauchy",
        }
    }

    pub fn params(&self) -> BTreeMap<String, f64> {
        let pairs: Vec<(&str, f64)> = match *self {
            NamedLaw::BooleanStable { alpha, .. }
            | NamedLaw::FreeStable { alpha, .. }
            | NamedLaw::MonotoneStable { alpha, .. }
            | NamedLaw::BetaAlpha { alpha } => vec![("alpha", alpha)],
            NamedLaw::FreePoisson | NamedLaw::Semicircle => vec![],
            NamedLaw::Beta { p, q, .. } => vec![("p", p), ("q", q)],
            NamedLaw::Cauchy { a, b } | NamedLaw::CircleCauchy { a, b } => vec![("a", a), ("b", b)],
            NamedLaw::Arcsine { t } => vec![("t", t)],
            NamedLaw::MuAlphaP { alpha, p } => vec![("alpha", alpha), ("p", p)],
            NamedLaw::NuP { p } | NamedLaw::TauP { p } => vec![("p", p)],
        };
        pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }

    pub(crate) fn spec(&self) -> Spec {
        Spec::Named {
            name: self.name().to_string(),
            params: self.params(),
        }
    }

    fn sign(&self) -> f64 {
        match *self {
            NamedLaw::BooleanStable { sign, .. }
            | NamedLaw::FreeStable { sign, .. }
            | NamedLaw::MonotoneStable { sign, .. } => sign,
            _ => 1.0,
        }
    }

    pub fn support(&self) -> SupportClass {
        match self {
            NamedLaw::Cauchy { .. } | NamedLaw::Arcsine { .. } | NamedLaw::Semicircle => SupportClass::RealLine,
            NamedLaw::CircleCauchy { .. } => SupportClass::UnitCircle,
            _ if self.sign() < 0.0 => SupportClass::NegativeHalfline,
            _ => SupportClass::PositiveHalfline,
        }
    }

    pub(crate) fn hull(&self) -> (f64, f64) {
        match *self {
            NamedLaw::FreePoisson => (0.0, 4.0),
            NamedLaw::Semicircle => (-2.0, 2.0),
            NamedLaw::Arcsine { t } => (-(2.0 * t).sqrt(), (2.0 * t).sqrt()),
            NamedLaw::BetaAlpha { .. } | NamedLaw::Beta { .. } | NamedLaw::NuP { .. } | NamedLaw::TauP { .. } => {
                (0.0, 1.0)
            }
            _ => self.support().hull(),
        }
    }

    pub(crate) fn radius(&self) -> f64 {
        match *self {
            NamedLaw::FreePoisson => 4.0,
            NamedLaw::Semicircle => 2.0,
            NamedLaw::Arcsine { t } => (2.0 * t).sqrt(),
            NamedLaw::Cauchy { a, b } => a.abs() + b,
            _ => 1.0,
        }
    }

    pub(crate) fn eta_neg_inf(&self) -> f64 {
        match *self {
            NamedLaw::NuP { p } => 1.0 - 1.0 / p,
            _ => f64::NEG_INFINITY,
        }
    }

    pub(crate) fn native(&self) -> Tr {
        match self {
            NamedLaw::BooleanStable { .. } | NamedLaw::CircleCauchy { .. } => Tr::Eta,
            NamedLaw::FreeStable { .. }
            | NamedLaw::MonotoneStable { .. }
            | NamedLaw::BetaAlpha { .. }
            | NamedLaw::Cauchy { .. }
            | NamedLaw::Arcsine { .. } => Tr::F,
            _ => Tr::G,
        }
    }

    /// Closed-form evaluation when one exists for `tr`.
    pub(crate) fn direct(&self, tr: Tr, w: C64) -> Option<Result<Jet>> {
        if self.sign() < 0.0 {
            // D_{-1}: G(z) = -G_+(-z), F(z) = -F_+(-z), eta(z) = eta_+(-z)
            let plus = self.reflected();
            let r = plus.direct(tr, -w).or_else(|| Some(plus.via_native(tr, -w)))?;
            return Some(r.map(|j| match tr {
                Tr::Eta => Jet::new(j.v, -j.d),
                _ => Jet::new(-j.v, j.d),
            }));
        }
        let z = var(w);
        let r = match (*self, tr) {
            (NamedLaw::BooleanStable { alpha, .. }, Tr::Eta) => neg_pow(z, alpha),
            (NamedLaw::BooleanStable { alpha, .. }, Tr::F) => z + neg_pow(z, 1.0 - alpha),
            (NamedLaw::FreeStable { alpha, .. }, Tr::F) => return Some(free_stable_f(alpha, w)),
            (NamedLaw::MonotoneStable { alpha, .. }, Tr::F) => -((-z).powf(alpha) + 1.0).powf(1.0 / alpha),
            (NamedLaw::MonotoneStable { alpha, .. }, Tr::Eta) => -((-z).powf(alpha).ln_1p() / alpha).exp_m1(),
            (NamedLaw::FreePoisson, Tr::G) => {
                let s = rsub(1.0, z.recip() * 4.0).sqrt();
                (z * (s + 1.0)).recip() * 2.0
            }
            (NamedLaw::FreePoisson, Tr::Eta) => z * 2.0 / (rsub(1.0, z * 4.0).sqrt() + 1.0),
            (NamedLaw::Semicircle, Tr::G) => {
                let u = z.recip();
                let s = rsub(1.0, u * u * 4.0).sqrt();
                (z * (s + 1.0)).recip() * 2.0
            }
            (NamedLaw::BetaAlpha { alpha }, Tr::F) => z * rsub(1.0, z.recip()).powf(alpha),
            (NamedLaw::BetaAlpha { alpha }, Tr::Eta) => one_minus_pow(z, alpha),
            (NamedLaw::Beta { p, q, norm }, Tr::G) => {
                let pp = q - 1.0;
                if (p + q - 2.0).abs() < 1e-15 && pp.abs() < 1e-15 {
                    // uniform law
                    rsub(1.0, z.recip()).ln() * -1.0
                } else if (p + q - 2.0).abs() < 1e-15 && pp > 0.0 && pp < 1.0 {
                    // beta_{1-p, 1+p}
                    one_minus_pow(z.recip(), pp) / pp
                } else {
                    return Some(beta_g(p, q, norm, w));
                }
            }
            (NamedLaw::Cauchy { a, b }, Tr::F) => z + C64::new(-a, b),
            (NamedLaw::Arcsine { t }, Tr::F) => {
                let u = z.recip();
                z * rsub(1.0, u * u * (2.0 * t)).sqrt()
            }
            (NamedLaw::MuAlphaP { alpha, p }, Tr::G) => {
                let inner = ((-z.recip()).powf(alpha).ln_1p() * p).exp_m1();
                -(inner / p).powf(1.0 / alpha)
            }
            (NamedLaw::NuP { p }, Tr::G) => nu_p_g(p, z),
            (NamedLaw::TauP { p }, Tr::G) => (nu_p_g(p, z) - z.recip() * p) / (1.0 - p),
            (NamedLaw::CircleCauchy { a, b }, Tr::Eta) => z * C64::from_polar((-a).exp(), b),
            _ => return None,
        };
        Some(Ok(r))
    }

    fn reflected(&self) -> NamedLaw {
        match *self {
            NamedLaw::BooleanStable { alpha, .. } => NamedLaw::BooleanStable { alpha, sign: 1.0 },
            NamedLaw::FreeStable { alpha, .. } => NamedLaw::FreeStable { alpha, sign: 1.0 },
            NamedLaw::MonotoneStable { alpha, .. } => NamedLaw::MonotoneStable { alpha, sign: 1.0 },
            other => other,
        }
    }

    /// Conversion from the native transform, for the sign-flipped path
    /// which bypasses the measure-level dispatch.
    fn via_native(&self, tr: Tr, w: C64) -> Result<Jet> {
        let native = |x: C64| -> Result<Jet> {
            let x = if x.im < 0.0 { x.conj() } else { x };
            self.direct(self.native(), x).expect("native transform is direct")
        };
        let sym = |x: C64| -> Result<Jet> {
            if x.im < 0.0 {
                Ok(native(x.conj())?.conj())
            } else {
                native(x)
            }
        };
        match (self.native(), tr) {
            (n, t) if n == t => sym(w),
            (Tr::G, Tr::F) => Ok(sym(w)?.recip()),
            (Tr::F, Tr::G) => Ok(sym(w)?.recip()),
            (Tr::Eta, Tr::F) => {
                let z = var(w);
                let u = z.recip();
                let e = sym(u.v)?.chain(u);
                Ok(z * rsub(1.0, e))
            }
            (Tr::Eta, Tr::G) => Ok(self.via_native(Tr::F, w)?.recip()),
            (Tr::F, Tr::Eta) | (Tr::G, Tr::Eta) => {
                let u = var(w);
                let z = u.recip();
                let f = if self.native() == Tr::F { sym(z.v)? } else { sym(z.v)?.recip() };
                Ok(rsub(1.0, u * f.chain(z)))
            }
            _ => unreachable!(),
        }
    }

    /// Density at `x` where a closed form is available.
    pub fn density(&self, x: f64) -> Option<f64> {
        if self.sign() < 0.0 {
            return self.reflected().density(-x);
        }
        let inside01 = x > 0.0 && x < 1.0;
        Some(match *self {
            NamedLaw::FreePoisson => {
                if x > 0.0 && x < 4.0 {
                    ((4.0 - x) / x).sqrt() / (2.0 * PI)
                } else if !(0.0..=4.0).contains(&x) {
                    0.0
                } else {
                    return None;
                }
            }
            NamedLaw::Semicircle => {
                if x.abs() <= 2.0 {
                    (4.0 - x * x).sqrt() / (2.0 * PI)
                } else {
                    0.0
                }
            }
            NamedLaw::Arcsine { t } => {
                let r = 2.0 * t;
                if x * x < r {
                    1.0 / (PI * (r - x * x).sqrt())
                } else if x * x > r {
                    0.0
                } else {
                    return None;
                }
            }
            NamedLaw::Cauchy { a, b } => b / (PI * ((x - a) * (x - a) + b * b)),
            NamedLaw::BooleanStable { alpha, .. } => {
                if x > 0.0 {
                    let xa = x.powf(alpha);
                    (PI * alpha).sin() / PI * x.powf(alpha - 1.0) / (xa * xa + 2.0 * xa * (PI * alpha).cos() + 1.0)
                } else if x < 0.0 {
                    0.0
                } else {
                    return None;
                }
            }
            NamedLaw::BetaAlpha { alpha } => {
                if inside01 {
                    x.powf(alpha - 1.0) * (1.0 - x).powf(-alpha) * (PI * alpha).sin() / PI
                } else if !(0.0..=1.0).contains(&x) {
                    0.0
                } else {
                    return None;
                }
            }
            NamedLaw::Beta { p, q, norm } => {
                if inside01 {
                    x.powf(p - 1.0) * (1.0 - x).powf(q - 1.0) / norm
                } else if !(0.0..=1.0).contains(&x) {
                    0.0
                } else {
                    return None;
                }
            }
            NamedLaw::NuP { p } | NamedLaw::TauP { p } => {
                let scale = if matches!(self, NamedLaw::TauP { .. }) { 1.0 / (1.0 - p) } else { 1.0 };
                if inside01 {
                    scale * nu_density(p, x)
                } else if !(0.0..=1.0).contains(&x) {
                    0.0
                } else {
                    return None;
                }
            }
            _ => return None,
        })
    }

    pub(crate) fn moments(&self, n: usize) -> Result<Vec<f64>> {
        let beta = |p: f64, q: f64| -> Vec<f64> {
            let mut m = Vec::with_capacity(n);
            let mut acc = 1.0;
            for j in 0..n {
                acc *= (p + j as f64) / (p + q + j as f64);
                m.push(acc);
            }
            m
        };
        // even moments of a symmetric law from its even moment sequence
        let symmetric = |even: &dyn Fn(usize) -> f64| -> Vec<f64> {
            (1..=n).map(|k| if k % 2 == 1 { 0.0 } else { even(k / 2) }).collect()
        };
        let catalan = |k: usize| -> f64 {
            let mut c = 1.0;
            for i in 0..k {
                c = c * 2.0 * (2 * i + 1) as f64 / (i + 2) as f64;
            }
            c
        };
        match *self {
            NamedLaw::FreePoisson => Ok((1..=n).map(catalan).collect()),
            NamedLaw::Semicircle => Ok(symmetric(&catalan)),
            NamedLaw::Arcsine { t } => Ok(symmetric(&|k| {
                // (2t)^k binom(2k, k) / 4^k
                let mut c = 1.0;
                for i in 0..k {
                    c *= (2.0 * t) * (2 * i + 1) as f64 / (2 * i + 2) as f64;
                }
                c
            })),
            NamedLaw::BetaAlpha { alpha } => Ok(beta(alpha, 1.0 - alpha)),
            NamedLaw::Beta { p, q, .. } => Ok(beta(p, q)),
            _ => Err(FpError::InvalidMeasure(format!(
                "{} has no finite moments in closed form; densify it first",
                self.name()
            ))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn law(kind: &str, params: &[(&str, f64)]) -> Measure {
        make_named(kind, params).unwrap()
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn known_values() {
        // sigma_1 = 1/2 delta_0 + 1/2 delta_2
        let s = law("bernoulli_sigma", &[("t", 1.0)]);
        assert_eq!(s.as_atomic().unwrap().atoms(), &[(0.0, 0.5), (2.0, 0.5)]);
        assert_eq!(law("beta_alpha", &[("alpha", 1.0)]).as_dirac(), Some(1.0));
        let pi = law("free_poisson", &[]);
        let d = pi.as_named().unwrap().density(2.0).unwrap();
        assert!((d - 1.0 / (2.0 * PI)).abs() < 1e-15);
    }

    #[test]
    fn closed_form_values() {
        let b = law("boolean_stable_plus", &[("alpha", 0.5)]);
        assert!(close(b.f(C64::new(-4.0, 0.0)).unwrap(), C64::new(-6.0, 0.0), 1e-15));
        let s = law("bernoulli_sigma", &[("t", 1.0)]);
        assert!(close(s.eta(C64::new(-1.0, 0.0)).unwrap(), C64::new(-0.5, 0.0), 1e-15));
        let beta = law("beta_alpha", &[("alpha", 0.5)]);
        assert!(close(beta.eta(C64::new(-3.0, 0.0)).unwrap(), C64::new(-1.0, 0.0), 1e-15));
    }

    #[test]
    fn parameter_ranges() {
        assert!(make_named("boolean_stable_plus", &[("alpha", 1.5)]).is_err());
        assert!(make_named("bernoulli_rho", &[("t", -0.1)]).is_err());
        assert!(make_named("cauchy", &[("a", 0.0), ("b", -1.0)]).is_err());
        assert!(make_named("beta", &[("p", 0.0), ("q", 1.0)]).is_err());
        assert!(make_named("free_poisson", &[("t", 1.0)]).is_err());
        assert!(make_named("nonsense", &[]).is_err());
        match make_named("boolean_stable_plus", &[("alpha", 0.0)]) {
            Err(FpError::ParameterOutOfRange { name, .. }) => assert_eq!(name, "alpha"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn eta_vanishes_at_zero_minus() {
        let laws = [
            law("boolean_stable_plus", &[("alpha", 0.5)]),
            law("free_stable_plus", &[("alpha", 0.5)]),
            law("monotone_stable_plus", &[("alpha", 0.5)]),
            law("free_poisson", &[]),
            law("beta_alpha", &[("alpha", 0.3)]),
            law("beta", &[("p", 2.0), ("q", 1.0)]),
            law("mu_alpha_p", &[("alpha", 0.5), ("p", 0.5)]),
            law("nu_p", &[("p", 0.5)]),
            law("tau_p", &[("p", 0.5)]),
        ];
        // stable-type laws vanish like |z|^alpha, so probe very close to 0
        for mu in &laws {
            let e = mu.eta(C64::new(-1e-16, 0.0)).unwrap();
            assert!(e.norm() < 1e-4, "{mu:?}: {e}");
        }
    }

    #[test]
    fn reflected_stable_law() {
        let plus = law("boolean_stable_plus", &[("alpha", 0.5)]);
        let minus = law("boolean_stable_minus", &[("alpha", 0.5)]);
        for z in [C64::new(0.7, 0.0), C64::new(0.3, 0.4), C64::new(2.0, -1.0)] {
            assert!(close(minus.eta(z).unwrap(), plus.eta(-z).unwrap(), 1e-14));
            assert!(close(minus.g(C64::new(z.re, 1.0)).unwrap(), -plus.g(C64::new(-z.re, -1.0)).unwrap(), 1e-14));
        }
    }

    #[test]
    fn general_beta_against_closed_form() {
        // beta(2, 1): G = 2 (z log(z / (z - 1)) - 1)
        let b = law("beta", &[("p", 2.0), ("q", 1.0)]);
        for z in [C64::new(0.5, 0.01), C64::new(-0.3, 0.0), C64::new(2.0, 1.0), C64::new(0.999, 0.2)] {
            let exact = ((z / (z - 1.0)).ln() * z - 1.0) * 2.0;
            let got = b.eval_at(Tr::G, z).unwrap();
            assert!(close(got.v, exact, 1e-11), "{z}: {} vs {exact}", got.v);
            let h = 1e-6;
            let fd = (b.g(z + h).unwrap() - b.g(z - h).unwrap()) / (2.0 * h);
            assert!(close(got.d, fd, 1e-6));
        }
        // the 1-p, 1+p closed form against quadrature
        let closed = law("beta", &[("p", 0.7), ("q", 1.3)]);
        let norm = beta_fn(0.7, 1.3).unwrap();
        let z = C64::new(0.4, 0.3);
        let quad = beta_g(0.7, 1.3, norm, z).unwrap().v;
        assert!(close(closed.g(z).unwrap(), quad, 1e-11));
    }

    #[test]
    fn nu_p_matches_printed_form() {
        // G = (p / z) (z - 1)^{p-1} / (z^p - (z - 1)^p) in the upper half-plane
        let p = 0.5;
        let nu = law("nu_p", &[("p", p)]);
        let z = C64::new(0.3, 0.8);
        let printed = (z - 1.0).powf(p - 1.0) * p / z / (z.powf(p) - (z - 1.0).powf(p));
        assert!(close(nu.g(z).unwrap(), printed, 1e-13));
        // atom p at 0
        let y = 1e-7;
        let g = nu.g(C64::new(0.0, y)).unwrap();
        assert!((-g.im * y - p).abs() < 1e-3);
    }
}

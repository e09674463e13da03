//! Composition semigroups, their generators, and finite-difference residuals
//! of the generalized Burgers equations.
//!
//! Multiplicative: `H(t, z) = z - F_{B_{nu_t}(mu)}(z)` satisfies
//! `dH/dt + z K(H/z) dH/dz = 0`. Additive: `G(t, z) = z - F_{A_{nu_t}(mu)}(z)`
//! satisfies `dG/dt - J(z - G) dG/dz = 0`. Residuals use central differences
//! of step `h` in `t` and along the real direction in `z`, so they vanish at
//! rate `h^2`.

use std::fmt;
use std::str::FromStr;

use crate::config::ToleranceConfig;
use crate::error::{FpError, Result};
use crate::jet::{plog, C64, ONE};
use crate::measures::{make_named, Measure, Tr};
use crate::subordination::{add_subordinate, cauchy_subordinate, mult_subordinate};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Family {
    /// `nu_t = delta_1`, `K = 0`.
    Constant,
    BernoulliSigma,
    BooleanDilation,
    BernoulliRho,
    BooleanStable,
    Beta,
    ArcsineAdditive,
    CauchyAdditive { a: f64, b: f64 },
}

pub const FAMILY_NAMES: &[&str] = &[
    "constant",
    "bernoulli-sigma",
    "boolean-dilation",
    "bernoulli-rho",
    "boolean-stable",
    "beta",
    "arcsine-additive",
    "cauchy-additive",
];

impl Family {
    pub const MULTIPLICATIVE: [Family; 5] = [
        Family::BernoulliSigma,
        Family::BooleanDilation,
        Family::BernoulliRho,
        Family::BooleanStable,
        Family::Beta,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Family::Constant => "constant",
            Family::BernoulliSigma => "bernoulli-sigma",
            Family::BooleanDilation => "boolean-dilation",
            Family::BernoulliRho => "bernoulli-rho",
            Family::BooleanStable => "boolean-stable",
            Family::Beta => "beta",
            Family::ArcsineAdditive => "arcsine-additive",
            Family::CauchyAdditive { .. } => "cauchy-additive",
        }
    }

    pub fn is_additive(&self) -> bool {
        matches!(self, Family::ArcsineAdditive | Family::CauchyAdditive { .. })
    }

    /// The semigroup member `nu_t`.
    pub fn nu(&self, t: f64) -> Result<Measure> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(FpError::ParameterOutOfRange {
                name: "t",
                value: t,
                bound: "semigroups are indexed by t >= 0".into(),
            });
        }
        let e = (-t).exp();
        match *self {
            Family::Constant => Ok(Measure::dirac(1.0)),
            Family::BernoulliSigma => make_named("bernoulli_sigma", &[("t", t)]),
            Family::BooleanDilation => Ok(Measure::dirac(e)),
            Family::BernoulliRho => make_named("bernoulli_rho", &[("t", e)]),
            Family::BooleanStable => make_named("boolean_stable_plus", &[("alpha", e)]),
            Family::Beta => make_named("beta_alpha", &[("alpha", e)]),
            Family::ArcsineAdditive => make_named("arcsine", &[("t", t)]),
            Family::CauchyAdditive { a, b } => make_named("cauchy", &[("a", a * t), ("b", b * t)]),
        }
    }

    /// `K(z)` for multiplicative families, `J(z)` for additive ones.
    pub fn generator(&self, z: C64) -> C64 {
        match *self {
            Family::Constant => C64::new(0.0, 0.0),
            Family::BernoulliSigma => z,
            Family::BooleanDilation => -ONE,
            Family::BernoulliRho => z - 1.0,
            Family::BooleanStable => -plog(-z),
            Family::Beta => (ONE - z) * plog(ONE - z) / z,
            Family::ArcsineAdditive => -z.inv(),
            Family::CauchyAdditive { a, b } => C64::new(-a, b),
        }
    }

    /// Forward-difference generator: `(eta_{nu_h}(z)/z - 1)/h` or
    /// `(F_{nu_h}(z) - z)/h`.
    pub fn generator_fd(&self, z: C64, h: f64) -> Result<C64> {
        let nu = self.nu(h)?;
        if self.is_additive() {
            Ok((nu.f(z)? - z) / h)
        } else {
            Ok((nu.eta(z)? / z - 1.0) / h)
        }
    }

    /// Composition gap `|T_{nu_s} o T_{nu_t} - T_{nu_{s+t}}|` at `z`, with `T`
    /// the F-transform (additive) or eta-transform (multiplicative).
    pub fn semigroup_gap(&self, s: f64, t: f64, z: C64) -> Result<f64> {
        let tr = if self.is_additive() { Tr::F } else { Tr::Eta };
        let (ns, nt, nst) = (self.nu(s)?, self.nu(t)?, self.nu(s + t)?);
        let lhs = ns.eval_at(tr, nt.eval_at(tr, z)?.v)?.v;
        let rhs = nst.eval_at(tr, z)?.v;
        Ok((lhs - rhs).norm())
    }

    /// `H(t, z)` (multiplicative) or `G(t, z)` (additive).
    pub fn field(&self, mu: &Measure, t: f64, z: C64, cfg: &ToleranceConfig) -> Result<C64> {
        let nu = self.nu(t)?;
        let m = match *self {
            Family::ArcsineAdditive => add_subordinate(&nu, mu, cfg)?,
            Family::CauchyAdditive { a, b } => cauchy_subordinate(a * t, b * t, mu)?,
            _ => mult_subordinate(&nu, mu, cfg)?,
        };
        Ok(z - m.f(z)?)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Family {
    type Err = FpError;

    /// Cauchy families default to `a = 0, b = 1`; use [`Family::CauchyAdditive`]
    /// directly for other parameters.
    fn from_str(s: &str) -> Result<Family> {
        Ok(match s {
            "constant" => Family::Constant,
            "bernoulli-sigma" => Family::BernoulliSigma,
            "boolean-dilation" => Family::BooleanDilation,
            "bernoulli-rho" => Family::BernoulliRho,
            "boolean-stable" => Family::BooleanStable,
            "beta" => Family::Beta,
            "arcsine-additive" => Family::ArcsineAdditive,
            "cauchy-additive" => Family::CauchyAdditive { a: 0.0, b: 1.0 },
            _ => {
                return Err(FpError::Spec(format!(
                    "unknown family `{s}` (expected one of {FAMILY_NAMES:?})"
                )))
            }
        })
    }
}

fn check_stencil(t: f64, h: f64) -> Result<()> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(FpError::ParameterOutOfRange {
            name: "h",
            value: h,
            bound: "step must be positive".into(),
        });
    }
    if t != 0.0 && t - h <= 0.0 {
        return Err(FpError::ParameterOutOfRange {
            name: "t",
            value: t,
            bound: format!("the stencil needs t > h = {h} (or t = 0)"),
        });
    }
    Ok(())
}

/// Residual of the multiplicative or additive equation at `(t, z)` with step
/// `h`. The Cauchy family is differentiated analytically and is exact.
pub fn pde_residual(family: Family, mu: &Measure, t: f64, z: C64, h: f64, cfg: &ToleranceConfig) -> Result<C64> {
    check_stencil(t, h)?;
    if let Family::CauchyAdditive { a, b } = family {
        // G = z - F_mu(w) - at + ibt with w = z - at + ibt
        let c = C64::new(-a, b);
        let fm = mu.eval_at(Tr::F, z + c * t)?;
        let gz = ONE - fm.d;
        let gt = c * (ONE - fm.d);
        return Ok(gt - family.generator(fm.v - c * t) * gz);
    }
    let field = |t: f64, z: C64| family.field(mu, t, z, cfg);
    let dt = if t == 0.0 {
        (field(0.0, z)? * -3.0 + field(h, z)? * 4.0 - field(2.0 * h, z)?) / (2.0 * h)
    } else {
        (field(t + h, z)? - field(t - h, z)?) / (2.0 * h)
    };
    let dz = (field(t, z + h)? - field(t, z - h)?) / (2.0 * h);
    let v = field(t, z)?;
    if family.is_additive() {
        Ok(dt - family.generator(z - v) * dz)
    } else {
        Ok(dt + z * family.generator(v / z) * dz)
    }
}

/// Residuals at `h` and `h/2` with the observed order `log2(|R(h)|/|R(h/2)|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Convergence {
    pub residual_h: f64,
    pub residual_half: f64,
    pub ratio: f64,
    pub order: f64,
}

impl Convergence {
    pub fn csv_header() -> &'static str {
        "residual_h,residual_h2,ratio,order"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            self.residual_h, self.residual_half, self.ratio, self.order
        )
    }
}

pub fn convergence(family: Family, mu: &Measure, t: f64, z: C64, h: f64, cfg: &ToleranceConfig) -> Result<Convergence> {
    let r1 = pde_residual(family, mu, t, z, h, cfg)?.norm();
    let r2 = pde_residual(family, mu, t, z, 0.5 * h, cfg)?.norm();
    let ratio = r1 / r2;
    Ok(Convergence {
        residual_h: r1,
        residual_half: r2,
        ratio,
        order: ratio.log2(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn generators_match_finite_differences() {
        let pts = [C64::new(-2.0, 0.0), C64::new(-0.3, 0.4), C64::new(0.2, 1.5)];
        for fam in Family::MULTIPLICATIVE.into_iter().chain([Family::ArcsineAdditive]) {
            for h in [1e-3, 1e-4] {
                for &z in &pts {
                    let z = if fam.is_additive() { z * 3.0 } else { z };
                    let err = (fam.generator_fd(z, h).unwrap() - fam.generator(z)).norm();
                    assert!(err <= 10.0 * h * (1.0 + z.norm()), "{fam} at {z}: {err}");
                }
            }
        }
    }

    #[test]
    fn semigroup_laws() {
        for fam in Family::MULTIPLICATIVE {
            for z in [C64::new(-1.5, 0.0), C64::new(-0.2, 0.3)] {
                assert!(fam.semigroup_gap(0.3, 0.7, z).unwrap() < 1e-10, "{fam}");
            }
        }
        let c = Family::CauchyAdditive { a: 1.0, b: 2.0 };
        for fam in [Family::ArcsineAdditive, c] {
            assert!(fam.semigroup_gap(0.3, 0.7, C64::new(0.5, 2.0)).unwrap() < 1e-10);
        }
    }

    #[test]
    fn constant_family_has_zero_residual() {
        let pi = make_named("free_poisson", &[]).unwrap();
        let r = pde_residual(Family::Constant, &pi, 1.0, C64::new(-2.0, 0.0), 0.05, &cfg()).unwrap();
        assert!(r.norm() < 1e-12);
    }

    #[test]
    fn burgers_is_second_order() {
        let pi = make_named("free_poisson", &[]).unwrap();
        let c = convergence(Family::BernoulliSigma, &pi, 1.0, C64::new(-2.0, 0.0), 0.05, &cfg()).unwrap();
        assert!((1.7..=2.3).contains(&c.order), "{c:?}");
    }

    #[test]
    fn cauchy_family_is_exact() {
        let mu = Measure::atomic(vec![(-1.0, 0.5), (1.0, 0.5)]).unwrap();
        let fam = Family::CauchyAdditive { a: 0.5, b: 1.5 };
        let r = pde_residual(fam, &mu, 1.0, C64::new(0.3, 0.7), 0.01, &cfg()).unwrap();
        assert!(r.norm() < 1e-12);
    }

    #[test]
    fn stencil_must_fit() {
        let pi = make_named("free_poisson", &[]).unwrap();
        assert!(pde_residual(Family::Beta, &pi, 0.01, C64::new(-2.0, 0.0), 0.05, &cfg()).is_err());
        assert!("heat".parse::<Family>().is_err());
    }
}

//! Transform evaluation, inversion and density recovery.
//!
//! `G`, `F` and `eta` come straight from [`Measure`]; this module adds the
//! inverse transforms `Sigma(w) = eta^{-1}(w) / w` and
//! `phi(z) = F^{-1}(z) - z`, Stieltjes inversion and moment recovery for
//! closures.

use std::f64::consts::PI;

use crate::config::ToleranceConfig;
use crate::error::{FpError, Result};
use crate::jet::{Jet, C64, ZERO};
use crate::measures::{dilate, GridDensity, Measure, SupportClass, Tr};
use crate::par;
use crate::solve;

pub use crate::solve::invert_analytic;

pub fn eval_g(mu: &Measure, z: C64) -> Result<C64> {
    mu.g(z)
}

pub fn eval_f(mu: &Measure, z: C64) -> Result<C64> {
    mu.f(z)
}

pub fn eval_eta(mu: &Measure, z: C64) -> Result<C64> {
    mu.eta(z)
}

/// `eta` and `eta'` at a negative real point.
pub(crate) fn eta_real(mu: &Measure, x: f64) -> Result<(f64, f64)> {
    let j = mu.eval_at(Tr::Eta, C64::new(x, 0.0))?;
    Ok((j.v.re, j.d.re))
}

/// The negative `x` with `eta(x) = w` together with `eta'(x)`, for a
/// measure on the positive half-line.
pub fn eta_inverse_real(mu: &Measure, w: f64) -> Result<(f64, f64)> {
    let lower = mu.eta_at_neg_infinity();
    if !(w < 0.0) || w <= lower {
        return Err(FpError::SigmaDomain { value: w, lower });
    }
    solve::solve_increasing(&|x: f64| eta_real(mu, x), w, f64::NEG_INFINITY).map_err(|e| match e {
        FpError::SigmaDomain { .. } => FpError::SigmaDomain { value: w, lower },
        other => other,
    })
}

fn check_multiplicative(mu: &Measure) -> Result<()> {
    if mu.as_dirac() == Some(0.0) {
        return Err(FpError::InvalidMeasure("delta_0 has no Sigma-transform".into()));
    }
    Ok(())
}

/// `Sigma_mu(w)` for `w` in `(eta_mu(-inf), 0)`. For measures on the negative
/// half-line `Sigma_mu(w) = -Sigma_{D_{-1} mu}(w)`.
pub fn eval_sigma(mu: &Measure, w: f64) -> Result<f64> {
    check_multiplicative(mu)?;
    match mu.support() {
        SupportClass::PositiveHalfline => Ok(eta_inverse_real(mu, w)?.0 / w),
        SupportClass::NegativeHalfline => Ok(-eval_sigma(&dilate(-1.0, mu)?, w)?),
        c => Err(FpError::UnsupportedSupport(format!(
            "Sigma-transform needs a half-line measure, got {c}"
        ))),
    }
}

/// `F^{-1}(z)` with its derivative, by continuation from a point high
/// above `z`.
pub fn f_inverse(mu: &Measure, z: C64, cfg: &ToleranceConfig) -> Result<Jet> {
    if !(z.im > 0.0) {
        return Err(FpError::domain(z, "phi is evaluated in the upper half-plane"));
    }
    let anchor = C64::new(z.re, z.im + cfg.anchor_height(mu.radius()));
    let f = |w: Jet| mu.eval(Tr::F, w);
    solve::invert_analytic(&f, &|w: C64| w.im > 0.0, z, anchor, cfg)
}

/// Voiculescu transform `phi(z) = F^{-1}(z) - z`.
pub fn eval_phi(mu: &Measure, z: C64, cfg: &ToleranceConfig) -> Result<C64> {
    if mu.support() == SupportClass::UnitCircle {
        return Err(FpError::UnsupportedSupport("phi is defined for real measures".into()));
    }
    Ok(f_inverse(mu, z, cfg)?.v - z)
}

/// Polynomial extrapolation to `y = 0` (Neville).
fn extrapolate(ys: &[f64], vs: &[f64]) -> f64 {
    let mut p = vs.to_vec();
    let n = p.len();
    for k in 1..n {
        for i in 0..n - k {
            p[i] = (ys[i] * p[i + 1] - ys[i + k] * p[i]) / (ys[i] - ys[i + k]);
        }
    }
    p[0]
}

/// Density at `x` by Stieltjes inversion, `-Im G(x + iy) / pi`
/// extrapolated to `y = 0` over the configured levels.
pub fn stieltjes_at(mu: &Measure, x: f64, cfg: &ToleranceConfig) -> Result<f64> {
    let ys = &cfg.inversion_y_levels;
    let mut vs = Vec::with_capacity(ys.len());
    for &y in ys {
        vs.push(-mu.g(C64::new(x, y))?.im / PI);
    }
    // an atom makes the samples grow like 1/y
    if vs.len() >= 2 {
        let growing = vs
            .windows(2)
            .zip(ys.windows(2))
            .all(|(v, y)| v[0] > 0.0 && v[1] / v[0] >= 0.9 * y[0] / y[1]);
        let mass = vs[vs.len() - 1] * ys[ys.len() - 1] * PI;
        if growing && mass > cfg.mass_tol {
            return Err(FpError::AtomNearby { points: vec![x] });
        }
    }
    let d = extrapolate(ys, &vs);
    if d < -cfg.mass_tol || !d.is_finite() {
        return Err(FpError::NoConvergence(format!(
            "Stieltjes inversion at x = {x} gave {d}"
        )));
    }
    Ok(d.max(0.0))
}

fn collect_grid(xs: &[f64], vals: Vec<Result<f64>>, cfg: &ToleranceConfig) -> Result<GridDensity> {
    let mut ps = Vec::with_capacity(xs.len());
    let mut atoms = Vec::new();
    let mut first_err = None;
    for (x, v) in xs.iter().zip(vals) {
        match v {
            Ok(p) => ps.push(p),
            Err(FpError::AtomNearby { .. }) => atoms.push(*x),
            Err(e) => {
                first_err.get_or_insert(e);
            }
        }
    }
    if !atoms.is_empty() {
        return Err(FpError::AtomNearby { points: atoms });
    }
    if let Some(e) = first_err {
        return Err(e);
    }
    GridDensity::unchecked_mass(xs.to_vec(), ps, cfg.mass_tol)
}

/// Stieltjes inversion on a grid. Grid points next to atoms are reported
/// together in one [`FpError::AtomNearby`].
pub fn stieltjes_density(mu: &Measure, xs: &[f64], cfg: &ToleranceConfig) -> Result<GridDensity> {
    let vals = par::map(xs, |&x| stieltjes_at(mu, x, cfg));
    collect_grid(xs, vals, cfg)
}

/// Density at `x`: the closed-form boundary value when the measure has one,
/// Stieltjes inversion otherwise.
pub fn density_at(mu: &Measure, x: f64, cfg: &ToleranceConfig) -> Result<f64> {
    match mu.boundary_density(x) {
        Some(r) => r,
        None => stieltjes_at(mu, x, cfg),
    }
}

/// [`density_at`] over a grid.
pub fn density_grid(mu: &Measure, xs: &[f64], cfg: &ToleranceConfig) -> Result<GridDensity> {
    let vals = par::map(xs, |&x| density_at(mu, x, cfg));
    collect_grid(xs, vals, cfg)
}

/// Mean and variance read off `F(iy) = iy - m_1 + i sigma^2 / y + O(y^-2)`.
pub fn nevanlinna_mean_variance(mu: &Measure, y: f64) -> Result<(f64, f64)> {
    let r = mu.f(C64::new(0.0, y))? - C64::new(0.0, y);
    Ok((-r.re, r.im * y))
}

/// First `n` moments of a compactly supported measure from the Taylor
/// coefficients of `psi = eta / (1 - eta) = sum m_k u^k`, by the trapezoid
/// rule on the circle `|u| = 1 / (2 R)`.
pub fn moments_via_eta(mu: &Measure, n: usize) -> Result<Vec<f64>> {
    let r_supp = mu.radius();
    if !r_supp.is_finite() {
        return Err(FpError::UnsupportedSupport(
            "moments need a compactly supported measure".into(),
        ));
    }
    let r = 0.5 / r_supp.max(0.5);
    let nodes = 64usize.max(4 * n);
    let us: Vec<C64> = (0..nodes)
        .map(|k| C64::from_polar(r, (k as f64 + 0.5) * 2.0 * PI / nodes as f64))
        .collect();
    let psis = par::map(&us, |&u| -> Result<C64> {
        let e = mu.eta(u)?;
        Ok(e / (1.0 - e))
    });
    let mut coef = vec![ZERO; n];
    for (u, psi) in us.iter().zip(psis) {
        let psi = psi?;
        let mut up = *u;
        for c in coef.iter_mut() {
            *c += psi / up;
            up *= u;
        }
    }
    Ok(coef.into_iter().map(|c| c.re / nodes as f64).collect())
}

/// Moments of any measure: exact where possible, through `eta` for closures.
pub fn moments_any(mu: &Measure, n: usize) -> Result<Vec<f64>> {
    match crate::measures::moments(mu, n) {
        Err(FpError::NeedsDensification) => moments_via_eta(mu, n),
        other => other,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measures::make_named;

    fn cfg() -> ToleranceConfig {
        ToleranceConfig::default()
    }

    #[test]
    fn sigma_known_values() {
        let pi = make_named("free_poisson", &[]).unwrap();
        assert!((eval_sigma(&pi, -1.0).unwrap() - 2.0).abs() < 1e-11);
        let d = Measure::dirac(3.0);
        assert!((eval_sigma(&d, -0.4).unwrap() - 1.0 / 3.0).abs() < 1e-12);
        let b = make_named("boolean_stable_plus", &[("alpha", 0.5)]).unwrap();
        assert!((eval_sigma(&b, -1.0).unwrap() - 1.0).abs() < 1e-11);
        assert!(eval_sigma(&Measure::dirac(0.0), -0.5).is_err());
    }

    #[test]
    fn sigma_domain_names_the_boundary() {
        // atom 1/2 at 0: eta(-inf) = -1
        let rho = make_named("bernoulli_rho", &[("t", 0.5)]).unwrap();
        match eval_sigma(&rho, -1.5) {
            Err(FpError::SigmaDomain { lower, .. }) => assert!((lower + 1.0).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
        assert!(eval_sigma(&rho, -0.5).is_ok());
    }

    #[test]
    fn phi_known_values() {
        let c = cfg();
        let d = Measure::dirac(0.7);
        assert!((eval_phi(&d, C64::new(1.0, 30.0), &c).unwrap() - 0.7).norm() < 1e-12);
        let f = make_named("free_stable_plus", &[("alpha", 0.5)]).unwrap();
        let got = eval_phi(&f, C64::new(0.0, 4.0), &c).unwrap();
        let want = C64::new(2f64.sqrt(), -(2f64.sqrt()));
        assert!((got - want).norm() < 1e-10, "{got}");
        let rho = make_named("bernoulli_rho", &[("t", 0.5)]).unwrap();
        let z = C64::new(0.0, 2.0);
        let w = ((1.0 + z) + (1.0 + z * z).sqrt()) / 2.0;
        assert!((eval_phi(&rho, z, &c).unwrap() - (w - z)).norm() < 1e-11);
    }

    #[test]
    fn inversion_of_free_poisson_eta() {
        let pi = make_named("free_poisson", &[]).unwrap();
        let (x, _) = eta_inverse_real(&pi, -1.0).unwrap();
        assert!((pi.eta(C64::new(x, 0.0)).unwrap().re + 1.0).abs() < 1e-12);
    }

    #[test]
    fn stieltjes_known_values() {
        let c = cfg();
        let pi = make_named("free_poisson", &[]).unwrap();
        let d = stieltjes_at(&pi, 1.0, &c).unwrap();
        assert!((d - 3f64.sqrt() / (2.0 * PI)).abs() < 1e-5, "{d}");
        let b = make_named("boolean_stable_plus", &[("alpha", 0.5)]).unwrap();
        let d = stieltjes_at(&b, 1.0, &c).unwrap();
        assert!((d - 1.0 / (2.0 * PI)).abs() < 1e-5, "{d}");
        match stieltjes_density(&Measure::dirac(0.0), &[-0.5, 0.0, 0.5], &c) {
            Err(FpError::AtomNearby { points }) => assert_eq!(points, vec![0.0]),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn nevanlinna_asymptotics() {
        let mu = Measure::atomic(vec![(-1.0, 0.25), (0.5, 0.5), (2.0, 0.25)]).unwrap();
        let (m1, var) = nevanlinna_mean_variance(&mu, 2e4).unwrap();
        assert!((m1 - 0.5).abs() < 1e-6);
        let exact = 0.25 + 0.125 + 1.0 - 0.25;
        assert!((var - exact).abs() < 0.01 * exact);
    }

    #[test]
    fn eta_moments_of_atoms() {
        let mu = Measure::atomic(vec![(-1.0, 0.25), (0.5, 0.5), (2.0, 0.25)]).unwrap();
        let exact = crate::measures::moments(&mu, 6).unwrap();
        let got = moments_via_eta(&mu, 6).unwrap();
        for (a, b) in got.iter().zip(&exact) {
            assert!((a - b).abs() < 1e-10, "{a} vs {b}");
        }
    }
}

//! Identity-check suites. Each suite is a bundled JSON manifest of records
//! such as "these two measure expressions have the same eta on this grid";
//! adding an identity is a data change.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::ToleranceConfig;
use crate::error::{FpError, Result};
use crate::jet::C64;
use crate::measures::{Measure, Tr};
use crate::par;
use crate::pde::{self, Family};
use crate::quadrature::exp_sinh;
use crate::spec::Spec;
use crate::stable_maps::markov_transform;
use crate::subordination::{univalence_grid_check, Region};
use crate::transforms::{density_at, moments_any, stieltjes_at};

pub const SUITES: &[(&str, &str)] = &[
    ("belinschi-nica", include_str!("../suites/belinschi-nica.json")),
    ("homomorphism", include_str!("../suites/homomorphism.json")),
    ("markov", include_str!("../suites/markov.json")),
    ("stable-maps", include_str!("../suites/stable-maps.json")),
    ("cauchy", include_str!("../suites/cauchy.json")),
    ("pde", include_str!("../suites/pde.json")),
];

type Pt = (f64, f64);

/// Evaluation points: an evenly spaced segment and/or explicit points.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Grid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub line: Option<(Pt, Pt, usize)>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<Pt>,
}

impl Grid {
    pub fn points(&self) -> Vec<C64> {
        let mut out = Vec::new();
        if let Some((a, b, n)) = self.line {
            let (a, b) = (C64::new(a.0, a.1), C64::new(b.0, b.1));
            let n = n.max(2);
            out.extend((0..n).map(|k| a + (b - a) * (k as f64 / (n - 1) as f64)));
        }
        out.extend(self.points.iter().map(|&(x, y)| C64::new(x, y)));
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Transform {
    G,
    F,
    Eta,
}

impl From<Transform> for Tr {
    fn from(t: Transform) -> Tr {
        match t {
            Transform::G => Tr::G,
            Transform::F => Tr::F,
            Transform::Eta => Tr::Eta,
        }
    }
}

/// Closed-form reference densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Reference {
    /// `2 / (pi (1 + x^2)^2)`
    Student3,
    /// Density of `A_{0,b}` applied to `(p/2)(delta_{-1} + delta_1) + (1-p) delta_0`.
    CauchyBernoulli { p: f64, b: f64 },
}

impl Reference {
    pub fn eval(&self, x: f64) -> f64 {
        use std::f64::consts::PI;
        match *self {
            Reference::Student3 => 2.0 / (PI * (1.0 + x * x).powi(2)),
            Reference::CauchyBernoulli { p, b } => {
                let (x2, b2) = (x * x, b * b);
                let den = x2 * x2 * x2
                    + 2.0 * (b2 - 1.0) * x2 * x2
                    + (b2 * b2 + 2.0 * b2 * (1.0 - 2.0 * p) + 1.0) * x2
                    + p * p * b2;
                b * p * (x2 + b2 + 1.0 - p) / (PI * den)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DensityMethod {
    /// Boundary density when the measure has one, Stieltjes inversion otherwise.
    #[default]
    Auto,
    Stieltjes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Identity {
    /// `max |T_lhs - T_rhs| / max(1, |T_rhs|)` over the grid.
    Transform {
        id: String,
        lhs: Spec,
        rhs: Spec,
        transform: Transform,
        grid: Grid,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    /// Largest absolute density error against a closed form on `n` points.
    Density {
        id: String,
        measure: Spec,
        reference: Reference,
        range: (f64, f64, usize),
        #[serde(default)]
        method: DensityMethod,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    /// First `n` moments; with `quadrature` the lhs moments integrate its
    /// density over the line instead.
    Moments {
        id: String,
        lhs: Spec,
        rhs: Spec,
        n: usize,
        #[serde(default)]
        quadrature: bool,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    /// Relative error of `x^4 density(x)` against `expected`.
    Tail {
        id: String,
        measure: Spec,
        x: f64,
        expected: f64,
        tol: f64,
    },
    /// `|G_M' + G_nu G_M| / |G_M|` with `G_M'` from a contour integral.
    MarkovOde {
        id: String,
        nu: Spec,
        grid: Grid,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        tol: Option<f64>,
    },
    /// Observed order in `order`, or residual at most `tol` when `order` is absent.
    Pde {
        id: String,
        family: String,
        #[serde(default)]
        cauchy: Option<(f64, f64)>,
        mu: Spec,
        t: f64,
        z: Pt,
        h: f64,
        #[serde(default)]
        order: Option<(f64, f64)>,
        #[serde(default)]
        tol: f64,
    },
    Univalence {
        id: String,
        measure: Spec,
        region: (Pt, Pt),
        n: usize,
        expect_injective: bool,
    },
}

impl Identity {
    pub fn id(&self) -> &str {
        match self {
            Identity::Transform { id, .. }
            | Identity::Density { id, .. }
            | Identity::Moments { id, .. }
            | Identity::Tail { id, .. }
            | Identity::MarkovOde { id, .. }
            | Identity::Pde { id, .. }
            | Identity::Univalence { id, .. } => id,
        }
    }

    /// `(deviation, tolerance)`; passes when `deviation <= tolerance`.
    /// Identities without their own tolerance use `cfg.identity_tol`.
    pub fn evaluate(&self, cfg: &ToleranceConfig, tol_override: Option<f64>) -> Result<(f64, f64)> {
        let scaled = |t: &Option<f64>| tol_override.or(*t).unwrap_or(cfg.identity_tol);
        match self {
            Identity::Transform {
                lhs,
                rhs,
                transform,
                grid,
                tol,
                ..
            } => {
                let (a, b) = (lhs.build(cfg)?, rhs.build(cfg)?);
                let dev = transform_gap(&a, &b, (*transform).into(), &grid.points())?;
                Ok((dev, scaled(tol)))
            }
            Identity::Density {
                measure,
                reference,
                range,
                method,
                tol,
                ..
            } => {
                let m = measure.build(cfg)?;
                let xs = linspace(range.0, range.1, range.2);
                let vals = par::map(&xs, |&x| -> Result<f64> {
                    let d = match method {
                        DensityMethod::Auto => density_at(&m, x, cfg)?,
                        DensityMethod::Stieltjes => stieltjes_at(&m, x, cfg)?,
                    };
                    Ok((d - reference.eval(x)).abs())
                });
                Ok((fold_max(vals)?, scaled(tol)))
            }
            Identity::Moments {
                lhs,
                rhs,
                n,
                quadrature,
                tol,
                ..
            } => {
                let (a, b) = (lhs.build(cfg)?, rhs.build(cfg)?);
                let ma = if *quadrature {
                    density_moments(&a, *n, cfg)?
                } else {
                    moments_any(&a, *n)?
                };
                let mb = moments_any(&b, *n)?;
                let dev = ma
                    .iter()
                    .zip(&mb)
                    .map(|(x, y)| (x - y).abs() / y.abs().max(1.0))
                    .fold(0.0, f64::max);
                Ok((dev, scaled(tol)))
            }
            Identity::Tail {
                measure, x, expected, tol, ..
            } => {
                let m = measure.build(cfg)?;
                let d = density_at(&m, *x, cfg)?;
                Ok(((x.powi(4) * d / expected - 1.0).abs(), *tol))
            }
            Identity::MarkovOde { nu, grid, tol, .. } => {
                let nu = nu.build(cfg)?;
                let m = markov_transform(&nu, cfg)?;
                let vals = par::map(&grid.points(), |&z| -> Result<f64> {
                    let gm = m.g(z)?;
                    let d = contour_derivative(&m, z, 0.25 * z.im)?;
                    Ok((d + nu.g(z)? * gm).norm() / gm.norm())
                });
                Ok((fold_max(vals)?, scaled(tol)))
            }
            Identity::Pde {
                family,
                cauchy,
                mu,
                t,
                z,
                h,
                order,
                tol,
                ..
            } => {
                let mut fam: Family = family.parse()?;
                if let (Family::CauchyAdditive { .. }, Some((a, b))) = (fam, cauchy) {
                    fam = Family::CauchyAdditive { a: *a, b: *b };
                }
                let mu = mu.build(cfg)?;
                let z = C64::new(z.0, z.1);
                match order {
                    Some((lo, hi)) => {
                        // order reported as distance from the centre of [lo, hi]
                        let c = pde::convergence(fam, &mu, *t, z, *h, cfg)?;
                        let mid = 0.5 * (lo + hi);
                        let dev = (c.order - mid).abs();
                        Ok((if dev.is_nan() { f64::INFINITY } else { dev }, 0.5 * (hi - lo)))
                    }
                    None => Ok((pde::pde_residual(fam, &mu, *t, z, *h, cfg)?.norm(), *tol)),
                }
            }
            Identity::Univalence {
                measure,
                region,
                n,
                expect_injective,
                ..
            } => {
                let m = measure.build(cfg)?;
                let r = Region {
                    re: region.0,
                    im: region.1,
                };
                let rep = univalence_grid_check(&m, r, *n, cfg)?;
                let ok = rep.injective() == *expect_injective;
                Ok((if ok { 0.0 } else { 1.0 }, 0.0))
            }
        }
    }
}

pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n < 2 {
        return vec![lo];
    }
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn fold_max(vals: Vec<Result<f64>>) -> Result<f64> {
    vals.into_iter().try_fold(0.0f64, |m, v| {
        let v = v?;
        Ok(if v.is_nan() { f64::INFINITY } else { m.max(v) })
    })
}

/// `max |T_a - T_b| / max(1, |T_b|)` over `pts`.
pub fn transform_gap(a: &Measure, b: &Measure, tr: Tr, pts: &[C64]) -> Result<f64> {
    let vals = par::map(pts, |&z| -> Result<f64> {
        let (x, y) = (a.eval_at(tr, z)?.v, b.eval_at(tr, z)?.v);
        Ok((x - y).norm() / y.norm().max(1.0))
    });
    fold_max(vals)
}

/// `G'(z)` from the trapezoid rule on `|w - z| = r` applied to values of `G`.
pub fn contour_derivative(mu: &Measure, z: C64, r: f64) -> Result<C64> {
    const N: usize = 32;
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..N {
        let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 / N as f64);
        acc += mu.g(z + w * r)? / w;
    }
    Ok(acc / (r * N as f64))
}

/// `int x^k density(x) dx`, `k = 1..=n`, over the whole line.
pub fn density_moments(mu: &Measure, n: usize, cfg: &ToleranceConfig) -> Result<Vec<f64>> {
    let ks: Vec<usize> = (1..=n).collect();
    let out = par::map(&ks, |&k| -> Result<f64> {
        let mut total = 0.0;
        for sign in [1.0, -1.0] {
            let err = std::cell::RefCell::new(None);
            let f = |t: f64| {
                let x = sign * t;
                match density_at(mu, x, cfg) {
                    Ok(d) => C64::new(x.powi(k as i32) * d, 0.0),
                    Err(e) => {
                        err.borrow_mut().get_or_insert(e);
                        C64::new(f64::NAN, 0.0)
                    }
                }
            };
            let v = exp_sinh(f, 1e-12);
            if let Some(e) = err.into_inner() {
                return Err(e);
            }
            total += v?.re;
        }
        Ok(total)
    });
    out.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckResult {
    pub id: String,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub suite: String,
    pub results: Vec<CheckResult>,
    pub wall_time_s: f64,
}

impl CheckReport {
    pub fn pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }

    /// Some identity could not be evaluated at all.
    pub fn has_errors(&self) -> bool {
        self.results.iter().any(|r| r.error.is_some())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("reports always serialize")
    }

    pub fn table(&self) -> String {
        let w = self.results.iter().map(|r| r.id.len()).max().unwrap_or(2).max(2);
        let mut s = format!("{:<w$}  {:>23}  {:>23}  result\n", "id", "deviation", "tolerance");
        for r in &self.results {
            let verdict = match (&r.error, r.pass) {
                (Some(e), _) => format!("ERROR {e}"),
                (None, true) => "pass".into(),
                (None, false) => "FAIL".into(),
            };
            s += &format!("{:<w$}  {:>23.16e}  {:>23.16e}  {verdict}\n", r.id, r.deviation, r.tolerance);
        }
        s += &format!(
            "suite {}: {} ({:.16e} s)\n",
            self.suite,
            if self.pass() { "pass" } else { "FAIL" },
            self.wall_time_s
        );
        s
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Manifest {
    identities: Vec<Identity>,
}

/// Identities of a bundled suite.
pub fn load_suite(name: &str) -> Result<Vec<Identity>> {
    let text = SUITES
        .iter()
        .find(|(n, _)| *n == name)
        .map(|(_, t)| *t)
        .ok_or_else(|| {
            let names: Vec<&str> = SUITES.iter().map(|(n, _)| *n).collect();
            FpError::Spec(format!("unknown suite `{name}` (expected one of {names:?})"))
        })?;
    let m: Manifest = serde_json::from_str(text).map_err(|e| FpError::Spec(format!("suite {name}: {e}")))?;
    Ok(m.identities)
}

pub fn run_identities(suite: &str, ids: &[Identity], cfg: &ToleranceConfig, tol: Option<f64>) -> CheckReport {
    let start = Instant::now();
    let mut results = par::map(ids, |ident| match ident.evaluate(cfg, tol) {
        Ok((deviation, tolerance)) => CheckResult {
            id: ident.id().to_string(),
            deviation,
            tolerance,
            pass: deviation <= tolerance,
            error: None,
        },
        Err(e) => CheckResult {
            id: ident.id().to_string(),
            deviation: f64::NAN,
            tolerance: f64::NAN,
            pass: false,
            error: Some(e.to_string()),
        },
    });
    results.sort_by(|a, b| a.id.cmp(&b.id));
    CheckReport {
        suite: suite.to_string(),
        results,
        wall_time_s: start.elapsed().as_secs_f64(),
    }
}

/// Run a bundled suite. `tol` overrides the tolerance of every identity
/// measured by a deviation (not the PDE order windows or tail checks).
pub fn run_suite(name: &str, cfg: &ToleranceConfig, tol: Option<f64>) -> Result<CheckReport> {
    let ids = load_suite(name)?;
    Ok(run_identities(name, &ids, cfg, tol))
}

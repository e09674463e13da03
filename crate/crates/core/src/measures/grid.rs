use std::fmt::Write as _;

use super::SupportClass;
use crate::error::{FpError, Result};
use crate::jet::{Jet, C64, ZERO};

/// Density samples on a strictly increasing, possibly non-uniform grid.
/// Between samples the density is taken piecewise linear, so every
/// integral here is the trapezoid rule.
#[derive(Debug, Clone, PartialEq)]
pub struct GridDensity {
    xs: Vec<f64>,
    ps: Vec<f64>,
    mass_tol: f64,
}

impl GridDensity {
    /// Validates the grid and the nonnegativity of the samples. The mass is
    /// checked against `mass_tol`.
    pub fn new(xs: Vec<f64>, ps: Vec<f64>, mass_tol: f64) -> Result<Self> {
        let g = Self::unchecked_mass(xs, ps, mass_tol)?;
        let m = g.mass();
        if (m - 1.0).abs() > mass_tol {
            return Err(FpError::InvalidMeasure(format!(
                "grid density has mass {m}, outside 1 +- {mass_tol}"
            )));
        }
        Ok(g)
    }

    /// Same checks as [`GridDensity::new`] except the total mass; used for
    /// windows that deliberately cover part of a law.
    pub fn unchecked_mass(xs: Vec<f64>, ps: Vec<f64>, mass_tol: f64) -> Result<Self> {
        if xs.len() < 2 || xs.len() != ps.len() {
            return Err(FpError::InvalidMeasure(
                "grid needs at least two points and one value per point".into(),
            ));
        }
        if xs.windows(2).any(|w| !(w[1] > w[0])) || xs.iter().any(|x| !x.is_finite()) {
            return Err(FpError::InvalidMeasure("grid must be strictly increasing".into()));
        }
        if ps.iter().any(|p| !(*p >= 0.0) || !p.is_finite()) {
            return Err(FpError::InvalidMeasure("density values must be nonnegative".into()));
        }
        Ok(GridDensity { xs, ps, mass_tol })
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ps(&self) -> &[f64] {
        &self.ps
    }

    pub fn mass_tol(&self) -> f64 {
        self.mass_tol
    }

    pub fn mass(&self) -> f64 {
        self.integrate(|_| 1.0)
    }

    fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.xs
            .windows(2)
            .zip(self.ps.windows(2))
            .map(|(x, p)| 0.5 * (x[1] - x[0]) * (p[0] * f(x[0]) + p[1] * f(x[1])))
            .sum()
    }

    pub fn moments(&self, n: usize) -> Vec<f64> {
        (1..=n).map(|k| self.integrate(|x| x.powi(k as i32))).collect()
    }

    pub(crate) fn support(&self) -> SupportClass {
        if self.xs[0] >= 0.0 {
            SupportClass::PositiveHalfline
        } else if *self.xs.last().unwrap() <= 0.0 {
            SupportClass::NegativeHalfline
        } else {
            SupportClass::RealLine
        }
    }

    pub(crate) fn radius(&self) -> f64 {
        self.xs[0].abs().max(self.xs.last().unwrap().abs())
    }

    /// Exact Cauchy transform of the piecewise-linear density.
    pub(crate) fn g(&self, z: C64) -> Result<Jet> {
        let (mut g, mut d) = (ZERO, ZERO);
        for (x, p) in self.xs.windows(2).zip(self.ps.windows(2)) {
            let h = x[1] - x[0];
            let s = (p[1] - p[0]) / h;
            // linear density continued to z
            let rz = p[0] + (z - x[0]) * s;
            let l = ((z - x[0]) / (z - x[1])).ln();
            g += rz * l - s * h;
            d += l * s + rz * ((z - x[0]).inv() - (z - x[1]).inv());
        }
        Ok(Jet::new(g, d))
    }

    pub(crate) fn dilate(&self, a: f64) -> Result<GridDensity> {
        let mut pts: Vec<(f64, f64)> = self
            .xs
            .iter()
            .zip(&self.ps)
            .map(|(&x, &p)| (a * x, p / a.abs()))
            .collect();
        if a < 0.0 {
            pts.reverse();
        }
        let (xs, ps) = pts.into_iter().unzip();
        GridDensity::unchecked_mass(xs, ps, self.mass_tol)
    }

    pub(crate) fn power(&self, p: f64) -> Result<GridDensity> {
        let xs: Vec<f64> = self.xs.iter().map(|x| x.powf(p)).collect();
        let mut ps: Vec<f64> = self
            .xs
            .iter()
            .zip(&self.ps)
            .map(|(&x, &q)| q / (p * x.powf(p - 1.0)))
            .collect();
        // the Jacobian blows up at 0 when p > 1; borrow the neighbour value
        for i in 0..ps.len() {
            if !ps[i].is_finite() {
                ps[i] = if i + 1 < ps.len() { ps[i + 1] } else { 0.0 };
            }
        }
        GridDensity::unchecked_mass(xs, ps, self.mass_tol)
    }

    /// `x,density` CSV with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,density\n");
        for (x, p) in self.xs.iter().zip(&self.ps) {
            let _ = writeln!(s, "{x:.16e},{p:.16e}");
        }
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_density_transform() {
        let n = 201;
        let xs: Vec<f64> = (0..n).map(|i| i as f64 / (n - 1) as f64).collect();
        let g = GridDensity::new(xs, vec![1.0; n], 1e-12).unwrap();
        let z = C64::new(0.3, 0.4);
        let exact = (z / (z - 1.0)).ln();
        let got = g.g(z).unwrap();
        assert!((got.v - exact).norm() < 1e-13);
        let dexact = z.inv() - (z - 1.0).inv();
        assert!((got.d - dexact).norm() < 1e-12);
    }

    #[test]
    fn rejects_negative_and_unsorted() {
        assert!(GridDensity::new(vec![0.0, 1.0], vec![1.0, -1.0], 1.0).is_err());
        assert!(GridDensity::new(vec![1.0, 0.0], vec![1.0, 1.0], 1.0).is_err());
        assert!(GridDensity::new(vec![0.0, 1.0], vec![1.0, 3.0], 1e-3).is_err());
    }
}

use super::{SupportClass, Tr};
use crate::error::{FpError, Result};
use crate::jet::{Jet, C64, ONE, ZERO};
use crate::spec::Spec;

/// Finitely many atoms. On the unit circle the location is an angle.
#[derive(Debug, Clone, PartialEq)]
pub struct Atomic {
    atoms: Vec<(f64, f64)>,
    support: SupportClass,
}

fn check_weights(atoms: &[(f64, f64)]) -> Result<()> {
    if atoms.is_empty() {
        return Err(FpError::InvalidMeasure("no atoms".into()));
    }
    let mut total = 0.0;
    for &(x, w) in atoms {
        if !x.is_finite() {
            return Err(FpError::InvalidMeasure(format!("atom location {x} is not finite")));
        }
        if !(w > 0.0 && w <= 1.0 + 1e-12) {
            return Err(FpError::InvalidMeasure(format!(
                "atom weight {w} at {x} must lie in (0, 1]"
            )));
        }
        total += w;
    }
    if (total - 1.0).abs() > 1e-12 {
        return Err(FpError::InvalidMeasure(format!(
            "atom weights sum to {total}, not 1"
        )));
    }
    Ok(())
}

impl Atomic {
    pub fn new(atoms: Vec<(f64, f64)>) -> Result<Self> {
        check_weights(&atoms)?;
        let support = if atoms.iter().all(|a| a.0 >= 0.0) {
            SupportClass::PositiveHalfline
        } else if atoms.iter().all(|a| a.0 <= 0.0) {
            SupportClass::NegativeHalfline
        } else {
            SupportClass::RealLine
        };
        Ok(Atomic { atoms, support })
    }

    pub fn on_circle(angles: Vec<(f64, f64)>) -> Result<Self> {
        check_weights(&angles)?;
        Ok(Atomic {
            atoms: angles,
            support: SupportClass::UnitCircle,
        })
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn support(&self) -> SupportClass {
        self.support
    }

    fn loc(&self, i: usize) -> C64 {
        let x = self.atoms[i].0;
        if self.support == SupportClass::UnitCircle {
            C64::from_polar(1.0, x)
        } else {
            C64::new(x, 0.0)
        }
    }

    pub(crate) fn radius(&self) -> f64 {
        if self.support == SupportClass::UnitCircle {
            return 1.0;
        }
        self.atoms.iter().fold(0.0f64, |r, a| r.max(a.0.abs()))
    }

    pub(crate) fn hull(&self) -> (f64, f64) {
        let lo = self.atoms.iter().fold(f64::INFINITY, |r, a| r.min(a.0));
        let hi = self.atoms.iter().fold(f64::NEG_INFINITY, |r, a| r.max(a.0));
        (lo, hi)
    }

    /// Mass at the origin.
    pub fn mass_at_zero(&self) -> f64 {
        if self.support == SupportClass::UnitCircle {
            return 0.0;
        }
        self.atoms.iter().filter(|a| a.0 == 0.0).map(|a| a.1).sum()
    }

    pub(crate) fn eta_neg_inf(&self) -> f64 {
        let p0 = self.mass_at_zero();
        if p0 > 0.0 {
            1.0 - 1.0 / p0
        } else {
            f64::NEG_INFINITY
        }
    }

    /// `F(w) - w = -(sum l a / (w - a)) / G(w)` for real atoms, free of the
    /// cancellation in the direct difference at large `|w|`.
    pub(crate) fn f_minus_id(&self, w: C64) -> C64 {
        let (mut g, mut h) = (ZERO, ZERO);
        for &(a, l) in &self.atoms {
            let r = (w - a).finv();
            g += r * l;
            h += r * (l * a);
        }
        -h.fdiv(g)
    }

    pub(crate) fn eval(&self, tr: Tr, w: C64) -> Result<Jet> {
        match tr {
            Tr::G => {
                let (mut g, mut d) = (ZERO, ZERO);
                for i in 0..self.atoms.len() {
                    let r = (w - self.loc(i)).inv();
                    let wt = self.atoms[i].1;
                    g += r * wt;
                    d -= r * r * wt;
                }
                Ok(Jet::new(g, d))
            }
            Tr::F => {
                let g = self.eval(Tr::G, w)?;
                if g.v == ZERO {
                    return Err(FpError::domain(w, "G vanishes"));
                }
                Ok(g.recip())
            }
            Tr::Eta => {
                // psi(u) = sum w x u / (1 - x u), eta = psi / (1 + psi)
                let (mut psi, mut dpsi) = (ZERO, ZERO);
                for i in 0..self.atoms.len() {
                    let x = self.loc(i);
                    let wt = self.atoms[i].1;
                    let q = (ONE - x * w).inv();
                    psi += x * w * q * wt;
                    dpsi += x * q * q * wt;
                }
                let den = (ONE + psi).inv();
                Ok(Jet::new(psi * den, dpsi * den * den))
            }
        }
    }

    pub(crate) fn moments(&self, n: usize) -> Result<Vec<f64>> {
        if self.support == SupportClass::UnitCircle {
            return Err(FpError::UnsupportedSupport(
                "real moments of a circle measure".into(),
            ));
        }
        Ok((1..=n)
            .map(|k| self.atoms.iter().map(|&(x, w)| w * x.powi(k as i32)).sum())
            .collect())
    }

    pub(crate) fn spec(&self) -> Spec {
        Spec::Atomic {
            atoms: self.atoms.clone(),
            support: (self.support == SupportClass::UnitCircle).then(|| "unit-circle".to_string()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_weights() {
        assert!(Atomic::new(vec![(0.0, 0.5), (1.0, 0.4)]).is_err());
        assert!(Atomic::new(vec![(0.0, -0.5), (1.0, 1.5)]).is_err());
        assert!(Atomic::new(vec![]).is_err());
    }

    #[test]
    fn eta_matches_definition() {
        let a = Atomic::new(vec![(0.0, 0.3), (2.0, 0.7)]).unwrap();
        let u = C64::new(-0.7, 0.2);
        let eta = a.eval(Tr::Eta, u).unwrap().v;
        let f = a.eval(Tr::F, u.inv()).unwrap().v;
        assert!((eta - (1.0 - u * f)).norm() < 1e-14);
        // eta(-inf) = 1 - 1/mu({0})
        let far = a.eval(Tr::Eta, C64::new(-1e12, 0.0)).unwrap().v.re;
        assert!((far - a.eta_neg_inf()).abs() < 1e-9);
    }
}

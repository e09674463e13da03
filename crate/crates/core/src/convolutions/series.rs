//! Moments of convolutions of atomic measures by truncated power-series
//! algebra alone. No root finding happens here, which makes this an
//! independent check on the closures.
//!
//! With `psi(u) = sum_k m_k u^k` and `eta = psi / (1 + psi)`:
//! Boolean adds `eta`, monotone composes `f(u) = u / (1 - eta(u))` (additive)
//! or `eta` (multiplicative), free adds free cumulants (from
//! `M(u) = C(u M(u))`) or multiplies `eta^{-1}(w) / w`.

use std::str::FromStr;

use crate::error::{FpError, Result};
use crate::measures::Atomic;

pub const MAX_ORDER: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kind {
    AddFree,
    AddBoolean,
    AddMonotone,
    MulFree,
    MulMonotone,
}

impl Kind {
    pub const ALL: [Kind; 5] = [
        Kind::AddFree,
        Kind::AddBoolean,
        Kind::AddMonotone,
        Kind::MulFree,
        Kind::MulMonotone,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Kind::AddFree => "add-free",
            Kind::AddBoolean => "add-boolean",
            Kind::AddMonotone => "add-monotone",
            Kind::MulFree => "mul-free",
            Kind::MulMonotone => "mul-monotone",
        }
    }
}

impl FromStr for Kind {
    type Err = FpError;

    fn from_str(s: &str) -> Result<Kind> {
        Kind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| FpError::Spec(format!("unknown convolution kind `{s}`")))
    }
}

/// Truncated power series `c[0] + c[1] u + ... + c[n] u^n`.
#[derive(Debug, Clone, PartialEq)]
struct Series(Vec<f64>);

impl Series {
    fn zero(n: usize) -> Series {
        Series(vec![0.0; n + 1])
    }

    fn order(&self) -> usize {
        self.0.len() - 1
    }

    fn add(&self, o: &Series) -> Series {
        Series(self.0.iter().zip(&o.0).map(|(a, b)| a + b).collect())
    }

    fn scale(&self, s: f64) -> Series {
        Series(self.0.iter().map(|a| a * s).collect())
    }

    fn mul(&self, o: &Series) -> Series {
        let n = self.order();
        let mut c = vec![0.0; n + 1];
        for i in 0..=n {
            if self.0[i] == 0.0 {
                continue;
            }
            for j in 0..=n - i {
                c[i + j] += self.0[i] * o.0[j];
            }
        }
        Series(c)
    }

    /// `1 / self`, needs a nonzero constant term.
    fn recip(&self) -> Series {
        let n = self.order();
        let mut r = vec![0.0; n + 1];
        r[0] = 1.0 / self.0[0];
        for k in 1..=n {
            let s: f64 = (1..=k).map(|j| self.0[j] * r[k - j]).sum();
            r[k] = -s * r[0];
        }
        Series(r)
    }

    /// `self(g(u))` for `g` without constant term.
    fn compose(&self, g: &Series) -> Series {
        debug_assert!(g.0[0] == 0.0);
        let n = self.order();
        let mut acc = Series::zero(n);
        for k in (0..=n).rev() {
            acc = acc.mul(g);
            acc.0[0] += self.0[k];
        }
        acc
    }

    /// Compositional inverse of `g = g1 u + ...` with `g1 != 0`.
    fn revert(&self) -> Result<Series> {
        let g1 = self.0[1];
        if g1 == 0.0 {
            return Err(FpError::InvalidMeasure(
                "series reversion needs a nonzero linear term (first moment)".into(),
            ));
        }
        let n = self.order();
        let mut h = Series::zero(n);
        h.0[1] = 1.0 / g1;
        for k in 2..=n {
            let c = self.compose(&h).0[k];
            h.0[k] -= c / g1;
        }
        Ok(h)
    }

    /// Drop the constant term and shift down: `(self - c0) / u`.
    fn div_u(&self) -> Series {
        let mut c = self.0[1..].to_vec();
        c.push(0.0);
        Series(c)
    }

    fn mul_u(&self) -> Series {
        let mut c = vec![0.0];
        c.extend_from_slice(&self.0[..self.order()]);
        Series(c)
    }
}

fn psi(atoms: &Atomic, n: usize) -> Result<Series> {
    let m = atoms.moments(n)?;
    let mut c = vec![0.0];
    c.extend(m);
    Ok(Series(c))
}

fn eta_from_psi(p: &Series) -> Series {
    let mut one_plus = p.clone();
    one_plus.0[0] += 1.0;
    p.mul(&one_plus.recip())
}

fn psi_from_eta(e: &Series) -> Series {
    let mut one_minus = e.scale(-1.0);
    one_minus.0[0] += 1.0;
    e.mul(&one_minus.recip())
}

/// Free cumulants `C(v) = 1 + sum kappa_k v^k` from `M(u) = 1 + psi(u)`.
fn cumulants(p: &Series) -> Result<Series> {
    let mut m = p.clone();
    m.0[0] += 1.0;
    // v = u M(u); C(v) = M(u(v))
    let v = m.mul_u();
    Ok(m.compose(&v.revert()?))
}

/// Inverse of [`cumulants`]: iterate `M = C(u M)`, one coefficient per pass.
fn moments_from_cumulants(c: &Series) -> Series {
    let n = c.order();
    let mut m = Series::zero(n);
    m.0[0] = 1.0;
    for _ in 0..=n {
        m = c.compose(&m.mul_u());
    }
    m.0[0] = 0.0;
    m
}

/// First `n` moments of the convolution of two atomic measures.
pub fn series_oracle(mu: &[(f64, f64)], nu: &[(f64, f64)], kind: Kind, n: usize) -> Result<Vec<f64>> {
    if n == 0 || n > MAX_ORDER {
        return Err(FpError::ParameterOutOfRange {
            name: "n",
            value: n as f64,
            bound: format!("series oracle supports 1..={MAX_ORDER} moments"),
        });
    }
    let a = Atomic::new(mu.to_vec())?;
    let b = Atomic::new(nu.to_vec())?;
    // one spare order: the monotone and free branches shift by u once
    let (pa, pb) = (psi(&a, n + 1)?, psi(&b, n + 1)?);
    let out = match kind {
        Kind::AddBoolean => psi_from_eta(&eta_from_psi(&pa).add(&eta_from_psi(&pb))),
        Kind::AddMonotone => {
            // f(u) = 1 / F(1/u) = u (1 + psi(u)), composed
            let f = |p: &Series| {
                let mut q = p.clone();
                q.0[0] += 1.0;
                q.mul_u()
            };
            let fc = f(&pa).compose(&f(&pb));
            let mut p = fc.div_u();
            p.0[0] -= 1.0;
            p
        }
        Kind::AddFree => {
            let mut c = cumulants(&pa)?.add(&cumulants(&pb)?);
            c.0[0] = 1.0;
            moments_from_cumulants(&c)
        }
        Kind::MulMonotone => psi_from_eta(&eta_from_psi(&pa).compose(&eta_from_psi(&pb))),
        Kind::MulFree => {
            // chi = eta^{-1}; chi_{mu nu}(w) = chi_mu(w) chi_nu(w) / w
            let ca = eta_from_psi(&pa).revert()?;
            let cb = eta_from_psi(&pb).revert()?;
            let chi = ca.div_u().mul(&cb);
            psi_from_eta(&chi.revert()?)
        }
    };
    Ok(out.0[1..=n].to_vec())
}

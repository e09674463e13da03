use serde::{Deserialize, Serialize};

use crate::error::{FpError, Result};

/// Numerical policy shared by every evaluator.
///
/// `cone_height` of `None` means "auto": `10 * (1 + support radius)` of the
/// measure being inverted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceConfig {
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    pub continuation_max_steps: usize,
    pub inversion_y_levels: Vec<f64>,
    pub identity_tol: f64,
    pub cone_slope: f64,
    pub cone_height: Option<f64>,
    pub mass_tol: f64,
}

impl Default for ToleranceConfig {
    fn default() -> Self {
        ToleranceConfig {
            newton_tol: 1e-12,
            max_newton_iters: 60,
            continuation_max_steps: 200,
            inversion_y_levels: vec![1e-2, 5e-3, 2.5e-3],
            identity_tol: 1e-8,
            cone_slope: 1.0,
            cone_height: None,
            mass_tol: 1e-3,
        }
    }
}

impl ToleranceConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("newton_tol", self.newton_tol),
            ("identity_tol", self.identity_tol),
            ("cone_slope", self.cone_slope),
            ("mass_tol", self.mass_tol),
        ];
        for (name, value) in positive {
            if !(value > 0.0 && value.is_finite()) {
                return Err(FpError::ParameterOutOfRange {
                    name,
                    value,
                    bound: "must be positive".into(),
                });
            }
        }
        if self.max_newton_iters == 0 || self.continuation_max_steps == 0 {
            return Err(FpError::ParameterOutOfRange {
                name: "max_newton_iters/continuation_max_steps",
                value: 0.0,
                bound: "must be positive".into(),
            });
        }
        if let Some(m) = self.cone_height {
            if !(m > 0.0) {
                return Err(FpError::ParameterOutOfRange {
                    name: "cone_height",
                    value: m,
                    bound: "must be positive".into(),
                });
            }
        }
        let ys = &self.inversion_y_levels;
        if ys.is_empty() || ys.iter().any(|y| !(*y > 0.0)) {
            return Err(FpError::ParameterOutOfRange {
                name: "inversion_y_levels",
                value: ys.first().copied().unwrap_or(0.0),
                bound: "need at least one positive level".into(),
            });
        }
        if ys.windows(2).any(|w| w[1] >= w[0]) {
            return Err(FpError::ParameterOutOfRange {
                name: "inversion_y_levels",
                value: ys[0],
                bound: "levels must be strictly decreasing".into(),
            });
        }
        Ok(())
    }

    /// Height of the anchor used by continuation for a measure of the given
    /// support radius.
    pub fn anchor_height(&self, radius: f64) -> f64 {
        self.cone_height.unwrap_or(10.0 * (1.0 + radius.min(1e6)))
    }

    /// Membership in the truncated cone `|Re z| < slope * Im z, Im z > height`.
    pub fn in_cone(&self, z: num_complex::Complex64, radius: f64) -> bool {
        z.im > self.anchor_height(radius) && z.re.abs() < self.cone_slope * z.im
    }
}

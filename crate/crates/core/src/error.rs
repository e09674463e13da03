use thiserror::Error;

/// Errors raised while constructing measures or evaluating their transforms.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum FpError {
    #[error("parameter `{name}` = {value} out of range: {bound}")]
    ParameterOutOfRange {
        name: &'static str,
        value: f64,
        bound: String,
    },

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("unsupported support class: {0}")]
    UnsupportedSupport(String),

    #[error("point {re}{im:+}i is outside the evaluation domain: {reason}")]
    Domain { re: f64, im: f64, reason: String },

    #[error("argument {value} outside the interval ({lower}, 0) of the Sigma-transform")]
    SigmaDomain { value: f64, lower: f64 },

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("Stieltjes extrapolation diverged near an atom at x = {points:?}")]
    AtomNearby { points: Vec<f64> },

    #[error("closure measures must be densified on a grid before taking moments")]
    NeedsDensification,

    #[error("measure spec: {0}")]
    Spec(String),
}

impl FpError {
    pub(crate) fn domain(z: num_complex::Complex64, reason: impl Into<String>) -> Self {
        FpError::Domain {
            re: z.re,
            im: z.im,
            reason: reason.into(),
        }
    }

    /// True for failures caused by bad user input rather than numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            FpError::ParameterOutOfRange { .. }
                | FpError::InvalidMeasure(_)
                | FpError::UnsupportedSupport(_)
                | FpError::Spec(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, FpError>;

//! Numerical engine for free, Boolean and monotone convolutions, their
//! subordination maps, and the stable-law maps built on top of them.
//!
//! Measures are represented by their Cauchy transform and friends; every
//! derived measure is a lazily evaluated closure over its inputs.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod checks;
pub mod config;
pub mod convolutions;
pub mod error;
pub mod jet;
pub mod measures;
pub mod par;
pub mod pde;
pub mod quadrature;
pub mod solve;
pub mod spec;
pub mod stable_maps;
pub mod subordination;
pub mod transforms;

pub use config::ToleranceConfig;
pub use error::{FpError, Result};
pub use jet::C64;
pub use measures::{Measure, SupportClass};
pub use spec::Spec;
pub use measures::Tr;

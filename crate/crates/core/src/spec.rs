//! JSON measure specifications.
//!
//! ```json
//! {"type": "atomic", "atoms": [[0, 0.5], [2, 0.5]]}
//! {"type": "named", "name": "free_poisson", "params": {}}
//! {"type": "expr", "op": "add-free", "args": [{"type": "named", "name": "semicircle"}, 2.0]}
//! ```
//!
//! Expression arguments may mix numbers and measures; numbers and measures
//! are each taken in the order they appear.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::config::ToleranceConfig;
use crate::convolutions as conv;
use crate::error::{FpError, Result};
use crate::measures::{self, make_named, GridDensity, Measure};
use crate::stable_maps as sm;
use crate::subordination as sub;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum Spec {
    Atomic {
        atoms: Vec<(f64, f64)>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        support: Option<String>,
    },
    Named {
        name: String,
        #[serde(default)]
        params: BTreeMap<String, f64>,
    },
    Grid {
        xs: Vec<f64>,
        ps: Vec<f64>,
    },
    Expr {
        op: String,
        args: Vec<Arg>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Arg {
    Num(f64),
    Measure(Box<Spec>),
}

impl From<f64> for Arg {
    fn from(v: f64) -> Self {
        Arg::Num(v)
    }
}

impl From<Spec> for Arg {
    fn from(s: Spec) -> Self {
        Arg::Measure(Box::new(s))
    }
}

/// Operations accepted in `expr` nodes, with their (numbers, measures) arity.
pub const OPS: &[(&str, usize, usize)] = &[
    ("add-free", 0, 2),
    ("add-boolean", 0, 2),
    ("add-monotone", 0, 2),
    ("mul-free", 0, 2),
    ("mul-monotone", 0, 2),
    ("boolean-power", 1, 1),
    ("free-power", 1, 1),
    ("mul-free-power", 1, 1),
    ("dilate", 1, 1),
    ("power-pushforward", 1, 1),
    ("mult-subordinate", 0, 2),
    ("add-subordinate", 0, 2),
    ("belinschi-nica", 1, 1),
    ("cauchy-subordinate", 2, 1),
    ("bp-mult", 0, 1),
    ("bp-add", 0, 1),
    ("circle-subordinate", 2, 1),
    ("m-alpha-plus", 1, 1),
    ("m-alpha-minus", 1, 1),
    ("u-alpha-plus", 1, 1),
    ("markov", 0, 1),
    ("inverse-markov", 0, 1),
    ("boolean-mixture", 1, 1),
];

impl Spec {
    pub fn expr(op: &str, args: Vec<Arg>) -> Spec {
        Spec::Expr {
            op: op.to_string(),
            args,
        }
    }

    pub fn named(name: &str, params: &[(&str, f64)]) -> Spec {
        Spec::Named {
            name: name.to_string(),
            params: params.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    pub fn parse(text: &str) -> Result<Spec> {
        serde_json::from_str(text).map_err(|e| FpError::Spec(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("specs always serialize")
    }

    /// Build the measure. Closures created along the way capture `cfg`.
    pub fn build(&self, cfg: &ToleranceConfig) -> Result<Measure> {
        match self {
            Spec::Atomic { atoms, support } => match support.as_deref() {
                None | Some("real-line") => Measure::atomic(atoms.clone()),
                Some("unit-circle") => Measure::circle_atomic(atoms.clone()),
                Some(other) => Err(FpError::Spec(format!("unknown atomic support `{other}`"))),
            },
            Spec::Named { name, params } => {
                let ps: Vec<(&str, f64)> = params.iter().map(|(k, v)| (k.as_str(), *v)).collect();
                make_named(name, &ps)
            }
            Spec::Grid { xs, ps } => Ok(Measure::grid(GridDensity::new(xs.clone(), ps.clone(), cfg.mass_tol)?)),
            Spec::Expr { op, args } => build_expr(op, args, cfg),
        }
    }
}

fn build_expr(op: &str, args: &[Arg], cfg: &ToleranceConfig) -> Result<Measure> {
    let &(_, n_num, n_meas) = OPS
        .iter()
        .find(|(name, _, _)| *name == op)
        .ok_or_else(|| FpError::Spec(format!("unknown operation `{op}`")))?;
    let mut nums = Vec::new();
    let mut ms = Vec::new();
    for a in args {
        match a {
            Arg::Num(v) => nums.push(*v),
            Arg::Measure(s) => ms.push(s.build(cfg)?),
        }
    }
    if nums.len() != n_num || ms.len() != n_meas {
        return Err(FpError::Spec(format!(
            "`{op}` takes {n_num} number(s) and {n_meas} measure(s), got {} and {}",
            nums.len(),
            ms.len()
        )));
    }
    let m = |i: usize| &ms[i];
    match op {
        "add-free" => conv::add_free(m(0), m(1), cfg),
        "add-boolean" => conv::add_boolean(m(0), m(1)),
        "add-monotone" => conv::add_monotone(m(0), m(1)),
        "mul-free" => conv::mul_free(m(0), m(1), cfg),
        "mul-monotone" => conv::mul_monotone(m(0), m(1)),
        "boolean-power" => conv::boolean_power(m(0), nums[0]),
        "free-power" => conv::free_power(m(0), nums[0], cfg),
        "mul-free-power" => conv::mul_free_power(m(0), nums[0], cfg),
        "dilate" => measures::dilate(nums[0], m(0)),
        "power-pushforward" => measures::power_pushforward(nums[0], m(0)),
        "mult-subordinate" => sub::mult_subordinate(m(0), m(1), cfg),
        "add-subordinate" => sub::add_subordinate(m(0), m(1), cfg),
        "belinschi-nica" => sub::belinschi_nica(nums[0], m(0), cfg),
        "cauchy-subordinate" => sub::cauchy_subordinate(nums[0], nums[1], m(0)),
        "bp-mult" => sub::bp_map_mult(m(0), cfg),
        "bp-add" => sub::bp_map_add(m(0), cfg),
        "circle-subordinate" => sub::circle_subordinate(nums[0], nums[1], m(0)),
        "m-alpha-plus" => sm::m_alpha_plus(nums[0], m(0)),
        "m-alpha-minus" => sm::m_alpha_minus(nums[0], m(0)),
        "u-alpha-plus" => sm::u_alpha_plus(nums[0], m(0)),
        "markov" => sm::markov_transform(m(0), cfg),
        "inverse-markov" => sm::inverse_markov(m(0)),
        "boolean-mixture" => sm::boolean_mixture(m(0), nums[0]),
        _ => unreachable!("op checked against OPS"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_three_forms() {
        let a = Spec::parse(r#"{"type":"atomic","atoms":[[0,0.5],[2,0.5]]}"#).unwrap();
        assert!(matches!(a, Spec::Atomic { .. }));
        let n = Spec::parse(r#"{"type":"named","name":"beta_alpha","params":{"alpha":0.5}}"#).unwrap();
        let cfg = ToleranceConfig::default();
        assert!(n.build(&cfg).unwrap().as_named().is_some());
        let e = Spec::parse(
            r#"{"type":"expr","op":"boolean-power","args":[{"type":"atomic","atoms":[[1,1]]}, 2]}"#,
        )
        .unwrap();
        assert_eq!(e.build(&cfg).unwrap().as_dirac(), Some(2.0));
    }

    #[test]
    fn roundtrip_through_json() {
        let s = Spec::expr(
            "cauchy-subordinate",
            vec![0.0.into(), 2.0.into(), Spec::named("semicircle", &[]).into()],
        );
        assert_eq!(Spec::parse(&s.to_json()).unwrap(), s);
    }

    #[test]
    fn rejects_bad_specs() {
        let cfg = ToleranceConfig::default();
        assert!(Spec::parse(r#"{"type":"blob"}"#).is_err());
        let wrong_arity = Spec::expr("add-free", vec![Spec::named("semicircle", &[]).into()]);
        assert!(matches!(wrong_arity.build(&cfg), Err(FpError::Spec(_))));
        let neg = Spec::parse(r#"{"type":"atomic","atoms":[[0,-0.5],[1,1.5]]}"#).unwrap();
        assert!(neg.build(&cfg).unwrap_err().is_input_error());
    }
}

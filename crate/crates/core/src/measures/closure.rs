use std::collections::HashMap;
use std::sync::RwLock;

use super::{SupportClass, Tr};
use crate::error::Result;
use crate::jet::{Jet, C64};
use crate::spec::Spec;

const MEMO_CAP: usize = 1 << 16;

/// Evaluator behind a lazily defined measure.
///
/// `eval` returns the native transform and its derivative at `w`; the
/// caller has already reflected `w` into the closed upper half-plane for
/// real supports and rejected points on the support hull.
pub(crate) trait Node: Send + Sync {
    fn native(&self) -> Tr;
    fn eval(&self, w: C64) -> Result<Jet>;
    fn support(&self) -> SupportClass;
    fn radius(&self) -> f64;
    fn spec(&self) -> Spec;

    fn hull(&self) -> (f64, f64) {
        self.support().hull()
    }

    /// `None` asks the caller to estimate `eta(-inf)` numerically.
    fn eta_neg_inf(&self) -> Option<f64> {
        None
    }

    fn boundary_density(&self, _x: f64) -> Option<Result<f64>> {
        None
    }

    /// Whether results are worth caching (anything solved iteratively).
    fn memoize(&self) -> bool {
        false
    }
}

pub(crate) struct Closure {
    pub(crate) node: Box<dyn Node>,
    memo: RwLock<HashMap<(u64, u64), Jet>>,
}

impl Closure {
    pub(crate) fn new(node: Box<dyn Node>) -> Self {
        Closure {
            node,
            memo: RwLock::new(HashMap::new()),
        }
    }

    pub(crate) fn eval(&self, w: C64) -> Result<Jet> {
        if !self.node.memoize() {
            return self.node.eval(w);
        }
        // exact keys keep results independent of evaluation order
        let k = (w.re.to_bits(), w.im.to_bits());
        if let Some(j) = self.memo.read().ok().and_then(|m| m.get(&k).copied()) {
            return Ok(j);
        }
        let j = self.node.eval(w)?;
        // concurrent writers insert equal values, so races are harmless
        if let Ok(mut m) = self.memo.write() {
            if m.len() >= MEMO_CAP {
                m.clear();
            }
            m.insert(k, j);
        }
        Ok(j)
    }
}

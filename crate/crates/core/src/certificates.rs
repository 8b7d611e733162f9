//! Norming-functional trees: the certificate language shared by the
//! Schlumprecht DP (leaf / average nodes) and the GM grammar (combo,
//! special, restriction nodes).

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

use crate::arith::{
    f_eval, format_rat, parse_rat, sqrt_f_eval, ArithError, CertScalar, Prec, Rat,
};
use crate::vectors::{FiniteVector, IndexInterval};

mod rat_str {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rat, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format_rat(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rat, D::Error> {
        let s = String::deserialize(d)?;
        parse_rat(&s).map_err(D::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComboTerm {
    #[serde(with = "rat_str")]
    pub weight: Rat,
    pub child: FunctionalTree,
}

/// A functional in the certificate grammar. Scaling factors:
/// `average` carries `1/f(l)`, `special` carries `1/sqrt(f(k))` with
/// `l`, `k` the respective child counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FunctionalTree {
    Leaf {
        position: u64,
        #[serde(with = "rat_str")]
        coeff: Rat,
    },
    Combo {
        children: Vec<ComboTerm>,
    },
    Average {
        children: Vec<FunctionalTree>,
    },
    Special {
        children: Vec<FunctionalTree>,
    },
    Restrict {
        interval: IndexInterval,
        child: Box<FunctionalTree>,
    },
}

impl FunctionalTree {
    pub fn leaf(position: u64, coeff: Rat) -> Self {
        FunctionalTree::Leaf { position, coeff }
    }

    pub fn average(children: Vec<FunctionalTree>) -> Self {
        FunctionalTree::Average { children }
    }

    /// Support positions the functional can act on (after restrictions).
    pub fn support(&self) -> Vec<u64> {
        self.coefficients_rational_unscaled()
            .keys()
            .copied()
            .collect()
    }

    /// Range of the functional's support; `None` for an empty functional.
    pub fn range(&self) -> Option<IndexInterval> {
        let supp = self.support();
        match (supp.first(), supp.last()) {
            (Some(&lo), Some(&hi)) => Some(IndexInterval::new(lo, hi)),
            _ => None,
        }
    }

    /// Whether the listed trees have strictly successive nonempty ranges.
    pub fn successive(trees: &[FunctionalTree]) -> bool {
        let mut prev_hi = 0u64;
        for t in trees {
            match t.range() {
                Some(r) if r.lo > prev_hi => prev_hi = r.hi,
                _ => return false,
            }
        }
        true
    }

    /// The induced coefficient functional, certified per position.
    pub fn coefficients(&self, prec: Prec) -> Result<BTreeMap<u64, CertScalar>, ArithError> {
        let mut out = BTreeMap::new();
        self.accumulate(&CertScalar::one(), None, prec, &mut out)?;
        Ok(out)
    }

    fn accumulate(
        &self,
        scale: &CertScalar,
        window: Option<IndexInterval>,
        prec: Prec,
        out: &mut BTreeMap<u64, CertScalar>,
    ) -> Result<(), ArithError> {
        match self {
            FunctionalTree::Leaf { position, coeff } => {
                if let Some(w) = window {
                    if !w.contains(*position) {
                        return Ok(());
                    }
                }
                let term = scale.scale(coeff, prec);
                let entry = out.entry(*position).or_insert_with(CertScalar::zero);
                *entry = entry.add(&term, prec);
                Ok(())
            }
            FunctionalTree::Combo { children } => {
                for t in children {
                    let s = scale.scale(&t.weight, prec);
                    t.child.accumulate(&s, window, prec, out)?;
                }
                Ok(())
            }
            FunctionalTree::Average { children } => {
                let l = children.len().max(1) as u64;
                let factor = f_eval(l.max(1), &Rat::from_integer(1.into()), prec)?;
                let s = scale.div(&factor, prec)?;
                for c in children {
                    c.accumulate(&s, window, prec, out)?;
                }
                Ok(())
            }
            FunctionalTree::Special { children } => {
                let k = children.len().max(1) as u64;
                let factor = sqrt_f_eval(k, prec)?;
                let s = scale.div(&factor, prec)?;
                for c in children {
                    c.accumulate(&s, window, prec, out)?;
                }
                Ok(())
            }
            FunctionalTree::Restrict { interval, child } => {
                let w = match window {
                    None => *interval,
                    Some(outer) => {
                        let lo = outer.lo.max(interval.lo);
                        let hi = outer.hi.min(interval.hi);
                        if lo > hi {
                            return Ok(());
                        }
                        IndexInterval::new(lo, hi)
                    }
                };
                child.accumulate(scale, Some(w), prec, out)
            }
        }
    }

    /// Positions touched ignoring scaling (used for support/range only);
    /// value is a placeholder unit.
    fn coefficients_rational_unscaled(&self) -> BTreeMap<u64, ()> {
        fn walk(
            t: &FunctionalTree,
            window: Option<IndexInterval>,
            out: &mut BTreeMap<u64, ()>,
        ) {
            match t {
                FunctionalTree::Leaf { position, .. } => {
                    if window.map_or(true, |w| w.contains(*position)) {
                        out.insert(*position, ());
                    }
                }
                FunctionalTree::Combo { children } => {
                    for c in children {
                        walk(&c.child, window, out);
                    }
                }
                FunctionalTree::Average { children }
                | FunctionalTree::Special { children } => {
                    for c in children {
                        walk(c, window, out);
                    }
                }
                FunctionalTree::Restrict { interval, child } => {
                    let w = match window {
                        None => Some(*interval),
                        Some(outer) => {
                            let lo = outer.lo.max(interval.lo);
                            let hi = outer.hi.min(interval.hi);
                            if lo > hi {
                                return;
                            }
                            Some(IndexInterval::new(lo, hi))
                        }
                    };
                    walk(child, w, out);
                }
            }
        }
        let mut out = BTreeMap::new();
        walk(self, None, &mut out);
        out
    }

    /// Certified inner product `<self, x>`; exact whenever every scaling
    /// factor on the path is rational.
    pub fn evaluate(&self, x: &FiniteVector, prec: Prec) -> Result<CertScalar, ArithError> {
        self.eval_inner(x, None, prec)
    }

    fn eval_inner(
        &self,
        x: &FiniteVector,
        window: Option<IndexInterval>,
        prec: Prec,
    ) -> Result<CertScalar, ArithError> {
        match self {
            FunctionalTree::Leaf { position, coeff } => {
                if let Some(w) = window {
                    if !w.contains(*position) {
                        return Ok(CertScalar::zero());
                    }
                }
                Ok(CertScalar::from_rat(&(coeff * x.coeff(*position)), prec))
            }
            FunctionalTree::Combo { children } => {
                let mut acc = CertScalar::zero();
                for t in children {
                    let v = t.child.eval_inner(x, window, prec)?;
                    acc = acc.add(&v.scale(&t.weight, prec), prec);
                }
                Ok(acc)
            }
            FunctionalTree::Average { children } => {
                let mut acc = CertScalar::zero();
                for c in children {
                    acc = acc.add(&c.eval_inner(x, window, prec)?, prec);
                }
                let l = children.len().max(1) as u64;
                acc.div(&f_eval(l, &Rat::from_integer(1.into()), prec)?, prec)
            }
            FunctionalTree::Special { children } => {
                let mut acc = CertScalar::zero();
                for c in children {
                    acc = acc.add(&c.eval_inner(x, window, prec)?, prec);
                }
                let k = children.len().max(1) as u64;
                acc.div(&sqrt_f_eval(k, prec)?, prec)
            }
            FunctionalTree::Restrict { interval, child } => {
                let w = match window {
                    None => *interval,
                    Some(outer) => {
                        let lo = outer.lo.max(interval.lo);
                        let hi = outer.hi.min(interval.hi);
                        if lo > hi {
                            return Ok(CertScalar::zero());
                        }
                        IndexInterval::new(lo, hi)
                    }
                };
                child.eval_inner(x, Some(w), prec)
            }
        }
    }

    /// Exact rational evaluation; `None` when an irrational factor appears.
    pub fn evaluate_exact(&self, x: &FiniteVector, prec: Prec) -> Option<Rat> {
        self.evaluate(x, prec).ok()?.exact().cloned()
    }
}

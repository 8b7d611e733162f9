//! Certified scalar enclosures.

use num_traits::{Signed, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;

use super::dyadic::Dyadic;
use super::{ArithError, Prec, Rat};

/// A certified enclosure of a real number: `lo <= value <= hi` always,
/// with the exact rational attached when the value is known to be rational.
#[derive(Clone, Debug, PartialEq)]
pub struct CertScalar {
    lo: Dyadic,
    hi: Dyadic,
    exact: Option<Rat>,
}

/// Outcome of a certified comparison or inequality check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    /// The relation provably holds.
    Holds,
    /// The relation provably fails.
    Fails,
    /// The enclosures overlap; no decision at this precision.
    Indeterminate,
}

impl CertScalar {
    pub fn zero() -> Self {
        CertScalar { lo: Dyadic::zero(), hi: Dyadic::zero(), exact: Some(Rat::zero()) }
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        CertScalar {
            lo: Dyadic::from_int(n),
            hi: Dyadic::from_int(n),
            exact: Some(Rat::from_integer(n.into())),
        }
    }

    pub fn from_rat(r: &Rat, prec: Prec) -> Self {
        match Dyadic::from_rational_exact(r) {
            Some(d) if d.bits() <= prec.0 as u64 => {
                CertScalar { lo: d.clone(), hi: d, exact: Some(r.clone()) }
            }
            _ => CertScalar {
                lo: Dyadic::from_rational_down(r, prec),
                hi: Dyadic::from_rational_up(r, prec),
                exact: Some(r.clone()),
            },
        }
    }

    /// Build from raw bounds. The caller certifies `lo <= value <= hi`.
    pub fn from_bounds(lo: Dyadic, hi: Dyadic) -> Self {
        debug_assert!(lo <= hi);
        CertScalar { lo, hi, exact: None }
    }

    pub fn lo(&self) -> &Dyadic {
        &self.lo
    }

    pub fn hi(&self) -> &Dyadic {
        &self.hi
    }

    pub fn exact(&self) -> Option<&Rat> {
        self.exact.as_ref()
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn width(&self) -> Rat {
        self.hi.sub_exact(&self.lo).to_rational()
    }

    pub fn lo_rat(&self) -> Rat {
        self.lo.to_rational()
    }

    pub fn hi_rat(&self) -> Rat {
        self.hi.to_rational()
    }

    pub fn contains(&self, r: &Rat) -> bool {
        self.lo.to_rational() <= *r && *r <= self.hi.to_rational()
    }

    pub fn add(&self, other: &Self, prec: Prec) -> Self {
        CertScalar {
            lo: self.lo.add_exact(&other.lo).round_down(prec),
            hi: self.hi.add_exact(&other.hi).round_up(prec),
            exact: match (&self.exact, &other.exact) {
                (Some(a), Some(b)) => Some(a + b),
                _ => None,
            },
        }
    }

    pub fn sub(&self, other: &Self, prec: Prec) -> Self {
        self.add(&other.neg(), prec)
    }

    pub fn neg(&self) -> Self {
        CertScalar {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
            exact: self.exact.as_ref().map(|r| -r),
        }
    }

    pub fn abs(&self) -> Self {
        if !self.lo.is_negative() {
            self.clone()
        } else if !self.hi.is_positive() {
            self.neg()
        } else {
            CertScalar {
                lo: Dyadic::zero(),
                hi: self.lo.abs().max(self.hi.abs()),
                exact: None,
            }
        }
    }

    pub fn mul(&self, other: &Self, prec: Prec) -> Self {
        let products = [
            self.lo.mul_exact(&other.lo),
            self.lo.mul_exact(&other.hi),
            self.hi.mul_exact(&other.lo),
            self.hi.mul_exact(&other.hi),
        ];
        let lo = products.iter().min().unwrap().round_down(prec);
        let hi = products.iter().max().unwrap().round_up(prec);
        CertScalar {
            lo,
            hi,
            exact: match (&self.exact, &other.exact) {
                (Some(a), Some(b)) => Some(a * b),
                _ => None,
            },
        }
    }

    pub fn scale(&self, r: &Rat, prec: Prec) -> Self {
        self.mul(&CertScalar::from_rat(r, prec), prec)
    }

    /// Reciprocal of an interval that provably excludes zero.
    pub fn recip(&self, prec: Prec) -> Result<Self, ArithError> {
        if !(self.lo.is_positive() || self.hi.is_negative()) {
            return Err(ArithError::DivisionByZero);
        }
        let lo = Dyadic::from_rational_down(&self.hi.to_rational().recip(), prec);
        let hi = Dyadic::from_rational_up(&self.lo.to_rational().recip(), prec);
        Ok(CertScalar {
            lo,
            hi,
            exact: self.exact.as_ref().map(|r| r.recip()),
        })
    }

    pub fn div(&self, other: &Self, prec: Prec) -> Result<Self, ArithError> {
        let mut q = self.mul(&other.recip(prec)?, prec);
        // mul through recip loses the exact quotient; restore it.
        q.exact = match (&self.exact, &other.exact) {
            (Some(a), Some(b)) if !b.is_zero() => Some(a / b),
            _ => None,
        };
        Ok(q)
    }

    /// Integer power of a nonnegative enclosure.
    pub fn pow_u32(&self, k: u32, prec: Prec) -> Self {
        debug_assert!(!self.lo.is_negative());
        let mut acc = CertScalar::one();
        for _ in 0..k {
            acc = acc.mul(self, prec);
        }
        acc
    }

    pub fn sqrt(&self, prec: Prec) -> Result<Self, ArithError> {
        if self.lo.is_negative() {
            return Err(ArithError::InvalidArgument("sqrt of possibly negative value".into()));
        }
        let exact = self.exact.as_ref().and_then(rat_sqrt_exact);
        Ok(CertScalar {
            lo: self.lo.sqrt_down(prec),
            hi: self.hi.sqrt_up(prec),
            exact,
        })
    }

    pub fn nth_root(&self, n: u32, prec: Prec) -> Result<Self, ArithError> {
        if self.lo.is_negative() {
            return Err(ArithError::InvalidArgument("root of possibly negative value".into()));
        }
        Ok(CertScalar {
            lo: self.lo.nth_root_down(n, prec),
            hi: self.hi.nth_root_up(n, prec),
            exact: self.exact.as_ref().and_then(|r| rat_nth_root_exact(r, n)),
        })
    }

    /// Enclosure of `max(a, b)`. Keeps exactness when one side provably
    /// dominates or both are exact.
    pub fn max_envelope(&self, other: &Self) -> Self {
        if self.lo >= other.hi {
            return self.clone();
        }
        if other.lo >= self.hi {
            return other.clone();
        }
        CertScalar {
            lo: self.lo.clone().max(other.lo.clone()),
            hi: self.hi.clone().max(other.hi.clone()),
            exact: match (&self.exact, &other.exact) {
                (Some(a), Some(b)) => Some(a.max(b).clone()),
                _ => None,
            },
        }
    }

    pub fn min_envelope(&self, other: &Self) -> Self {
        self.neg().max_envelope(&other.neg()).neg()
    }

    /// Certified three-way comparison; `None` when the enclosures overlap
    /// without an exact tie-breaker.
    pub fn try_cmp(&self, other: &Self) -> Option<Ordering> {
        if let (Some(a), Some(b)) = (&self.exact, &other.exact) {
            return Some(a.cmp(b));
        }
        if self.hi < other.lo {
            Some(Ordering::Less)
        } else if self.lo > other.hi {
            Some(Ordering::Greater)
        } else {
            None
        }
    }

    /// Certified check of `self >= other`.
    pub fn certify_ge(&self, other: &Self) -> Verdict {
        match self.try_cmp(other) {
            Some(Ordering::Less) => Verdict::Fails,
            Some(_) => Verdict::Holds,
            None => {
                if self.lo >= other.hi {
                    Verdict::Holds
                } else if self.hi < other.lo {
                    Verdict::Fails
                } else {
                    Verdict::Indeterminate
                }
            }
        }
    }

    /// Certified check of `self <= other`.
    pub fn certify_le(&self, other: &Self) -> Verdict {
        other.certify_ge(self)
    }

    pub fn certify_ge_rat(&self, r: &Rat) -> Verdict {
        if let Some(a) = &self.exact {
            return if a >= r { Verdict::Holds } else { Verdict::Fails };
        }
        if self.lo.to_rational() >= *r {
            Verdict::Holds
        } else if self.hi.to_rational() < *r {
            Verdict::Fails
        } else {
            Verdict::Indeterminate
        }
    }

    pub fn certify_le_rat(&self, r: &Rat) -> Verdict {
        if let Some(a) = &self.exact {
            return if a <= r { Verdict::Holds } else { Verdict::Fails };
        }
        if self.hi.to_rational() <= *r {
            Verdict::Holds
        } else if self.lo.to_rational() > *r {
            Verdict::Fails
        } else {
            Verdict::Indeterminate
        }
    }
}

fn rat_sqrt_exact(r: &Rat) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().sqrt();
    let d = r.denom().sqrt();
    if &(&n * &n) == r.numer() && &(&d * &d) == r.denom() {
        Some(Rat::new(n, d))
    } else {
        None
    }
}

fn rat_nth_root_exact(r: &Rat, k: u32) -> Option<Rat> {
    if r.is_negative() {
        return None;
    }
    let n = r.numer().nth_root(k);
    let d = r.denom().nth_root(k);
    if &num_traits::pow::pow(n.clone(), k as usize) == r.numer()
        && &num_traits::pow::pow(d.clone(), k as usize) == r.denom()
    {
        Some(Rat::new(n, d))
    } else {
        None
    }
}

impl fmt::Display for CertScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.exact {
            Some(r) => write!(f, "{}/{}", r.numer(), r.denom()),
            None => write!(f, "[{}, {}]", self.lo, self.hi),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CertScalarRepr {
    lo: String,
    hi: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    exact: Option<String>,
}

impl Serialize for CertScalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        CertScalarRepr {
            lo: self.lo.to_decimal_string(),
            hi: self.hi.to_decimal_string(),
            exact: self.exact.as_ref().map(super::format_rat),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CertScalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let repr = CertScalarRepr::deserialize(d)?;
        let lo_rat = parse_decimal(&repr.lo).map_err(D::Error::custom)?;
        let hi_rat = parse_decimal(&repr.hi).map_err(D::Error::custom)?;
        let lo = Dyadic::from_rational_exact(&lo_rat)
            .unwrap_or_else(|| Dyadic::from_rational_down(&lo_rat, Prec::MAX));
        let hi = Dyadic::from_rational_exact(&hi_rat)
            .unwrap_or_else(|| Dyadic::from_rational_up(&hi_rat, Prec::MAX));
        if lo > hi {
            return Err(D::Error::custom("enclosure with lo > hi"));
        }
        let exact = repr
            .exact
            .map(|s| super::parse_rat(&s))
            .transpose()
            .map_err(D::Error::custom)?;
        Ok(CertScalar { lo, hi, exact })
    }
}

/// Parse a plain decimal string ("-12.375") into an exact rational.
pub fn parse_decimal(s: &str) -> Result<Rat, ArithError> {
    let t = s.trim();
    let bad = || ArithError::InvalidArgument(format!("bad decimal {t:?}"));
    match t.split_once('.') {
        None => t
            .parse::<num_bigint::BigInt>()
            .map(Rat::from_integer)
            .map_err(|_| bad()),
        Some((int_part, frac_part)) => {
            if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            let digits: String = format!("{int_part}{frac_part}");
            let n = digits.parse::<num_bigint::BigInt>().map_err(|_| bad())?;
            Ok(Rat::new(
                n,
                num_traits::pow::pow(num_bigint::BigInt::from(10), frac_part.len()),
            ))
        }
    }
}

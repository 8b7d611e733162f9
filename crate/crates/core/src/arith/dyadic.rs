//! Arbitrary-precision dyadic numbers `mant * 2^exp` with directed rounding.
//!
//! These are the endpoints of every certified enclosure. All rounding is
//! explicit: `round_down` never increases the value, `round_up` never
//! decreases it, so enclosures stay two-sided under composition.

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use std::cmp::Ordering;
use std::fmt;

use super::Prec;

/// `mant * 2^exp`, with `mant` odd or zero (zero has `exp == 0`).
#[derive(Clone, Debug)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic { mant: BigInt::zero(), exp: 0 }
    }

    pub fn one() -> Self {
        Dyadic { mant: BigInt::one(), exp: 0 }
    }

    pub fn new(mant: BigInt, exp: i64) -> Self {
        let mut d = Dyadic { mant, exp };
        d.normalize();
        d
    }

    pub fn from_int(n: impl Into<BigInt>) -> Self {
        Dyadic::new(n.into(), 0)
    }

    fn normalize(&mut self) {
        if self.mant.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.mant.trailing_zeros().unwrap_or(0);
        if tz > 0 {
            self.mant >>= tz;
            self.exp += tz as i64;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.mant.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.mant.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.mant.is_positive()
    }

    /// Number of significant bits of the mantissa.
    pub fn bits(&self) -> u64 {
        self.mant.magnitude().bits()
    }

    pub fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << (self.exp as u64))
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << ((-self.exp) as u64))
        }
    }

    /// Largest dyadic with at most `prec` mantissa bits that is `<= self`.
    pub fn round_down(&self, prec: Prec) -> Dyadic {
        self.round(prec, false)
    }

    /// Smallest dyadic with at most `prec` mantissa bits that is `>= self`.
    pub fn round_up(&self, prec: Prec) -> Dyadic {
        self.round(prec, true)
    }

    fn round(&self, prec: Prec, up: bool) -> Dyadic {
        let bits = self.bits();
        let p = prec.0 as u64;
        if bits <= p {
            return self.clone();
        }
        let shift = (bits - p) as i64;
        let divisor = BigInt::one() << (shift as u64);
        let q = if up {
            self.mant.div_ceil(&divisor)
        } else {
            self.mant.div_floor(&divisor)
        };
        Dyadic::new(q, self.exp + shift)
    }

    /// Exact sum; the result is rounded only when a caller asks for it.
    pub fn add_exact(&self, other: &Dyadic) -> Dyadic {
        if self.is_zero() {
            return other.clone();
        }
        if other.is_zero() {
            return self.clone();
        }
        let e = self.exp.min(other.exp);
        let a = &self.mant << ((self.exp - e) as u64);
        let b = &other.mant << ((other.exp - e) as u64);
        Dyadic::new(a + b, e)
    }

    pub fn sub_exact(&self, other: &Dyadic) -> Dyadic {
        self.add_exact(&other.neg())
    }

    pub fn mul_exact(&self, other: &Dyadic) -> Dyadic {
        Dyadic::new(&self.mant * &other.mant, self.exp + other.exp)
    }

    pub fn neg(&self) -> Dyadic {
        Dyadic { mant: -&self.mant, exp: self.exp }
    }

    pub fn abs(&self) -> Dyadic {
        Dyadic { mant: self.mant.abs(), exp: self.exp }
    }

    /// Halve exactly (dyadics are closed under division by two).
    pub fn half(&self) -> Dyadic {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic { mant: self.mant.clone(), exp: self.exp - 1 }
    }

    pub fn shift(&self, k: i64) -> Dyadic {
        if self.is_zero() {
            return self.clone();
        }
        Dyadic { mant: self.mant.clone(), exp: self.exp + k }
    }

    /// floor(log2 |self|) for nonzero values.
    pub fn ilog2(&self) -> i64 {
        debug_assert!(!self.is_zero());
        self.exp + self.bits() as i64 - 1
    }

    /// Round a rational downward to a dyadic with `prec` significant bits.
    pub fn from_rational_down(r: &BigRational, prec: Prec) -> Dyadic {
        Self::from_rational(r, prec, false)
    }

    /// Round a rational upward to a dyadic with `prec` significant bits.
    pub fn from_rational_up(r: &BigRational, prec: Prec) -> Dyadic {
        Self::from_rational(r, prec, true)
    }

    fn from_rational(r: &BigRational, prec: Prec, up: bool) -> Dyadic {
        if r.is_zero() {
            return Dyadic::zero();
        }
        let num = r.numer();
        let den = r.denom();
        // Scale so the quotient carries a couple of guard bits past `prec`.
        let nb = num.magnitude().bits() as i64;
        let db = den.magnitude().bits() as i64;
        let shift = prec.0 as i64 + 2 - (nb - db);
        let (scaled_num, scaled_den) = if shift >= 0 {
            (num << (shift as u64), den.clone())
        } else {
            (num.clone(), den << ((-shift) as u64))
        };
        let q = if up {
            scaled_num.div_ceil(&scaled_den)
        } else {
            scaled_num.div_floor(&scaled_den)
        };
        Dyadic::new(q, -shift).round(prec, up)
    }

    /// Exact conversion when the rational is dyadic; `None` otherwise.
    pub fn from_rational_exact(r: &BigRational) -> Option<Dyadic> {
        let den = r.denom();
        if den.magnitude().count_ones() == 1 {
            let e = den.magnitude().bits() as i64 - 1;
            Some(Dyadic::new(r.numer().clone(), -e))
        } else {
            None
        }
    }

    /// Integer square root based lower bound for `sqrt(self)`, `self >= 0`.
    pub fn sqrt_down(&self, prec: Prec) -> Dyadic {
        debug_assert!(!self.is_negative());
        if self.is_zero() {
            return Dyadic::zero();
        }
        let (m, e) = self.even_exponent_form(prec);
        let r = m.sqrt();
        Dyadic::new(r, e / 2)
    }

    /// Upper bound for `sqrt(self)`; exact when the scaled mantissa is a square.
    pub fn sqrt_up(&self, prec: Prec) -> Dyadic {
        debug_assert!(!self.is_negative());
        if self.is_zero() {
            return Dyadic::zero();
        }
        let (m, e) = self.even_exponent_form(prec);
        let r = m.sqrt();
        if &r * &r == m {
            Dyadic::new(r, e / 2)
        } else {
            Dyadic::new(r + 1, e / 2)
        }
    }

    /// Rewrite as `m * 2^e` with `e` even and `m` holding ~`2*prec` bits.
    fn even_exponent_form(&self, prec: Prec) -> (BigInt, i64) {
        let target = 2 * (prec.0 as i64 + 2);
        let mut extra = target - self.bits() as i64;
        if extra < 0 {
            extra = 0;
        }
        let mut e = self.exp - extra;
        let mut shift = extra;
        if e.rem_euclid(2) != 0 {
            e -= 1;
            shift += 1;
        }
        ((&self.mant) << (shift as u64), e)
    }

    /// Lower bound for the n-th root of a nonnegative dyadic.
    pub fn nth_root_down(&self, n: u32, prec: Prec) -> Dyadic {
        debug_assert!(!self.is_negative());
        if self.is_zero() {
            return Dyadic::zero();
        }
        let (m, e) = self.multiple_exponent_form(n, prec);
        let r = m.nth_root(n);
        Dyadic::new(r, e / n as i64)
    }

    pub fn nth_root_up(&self, n: u32, prec: Prec) -> Dyadic {
        debug_assert!(!self.is_negative());
        if self.is_zero() {
            return Dyadic::zero();
        }
        let (m, e) = self.multiple_exponent_form(n, prec);
        let r = m.nth_root(n);
        if num_traits::pow::pow(r.clone(), n as usize) == m {
            Dyadic::new(r, e / n as i64)
        } else {
            Dyadic::new(r + 1, e / n as i64)
        }
    }

    fn multiple_exponent_form(&self, n: u32, prec: Prec) -> (BigInt, i64) {
        let target = n as i64 * (prec.0 as i64 + 2);
        let mut extra = target - self.bits() as i64;
        if extra < 0 {
            extra = 0;
        }
        let mut e = self.exp - extra;
        let mut shift = extra;
        let rem = e.rem_euclid(n as i64);
        if rem != 0 {
            e -= rem;
            shift += rem;
        }
        ((&self.mant) << (shift as u64), e)
    }

    /// Exact finite decimal representation (dyadics always have one).
    pub fn to_decimal_string(&self) -> String {
        if self.exp >= 0 {
            return (&self.mant << (self.exp as u64)).to_string();
        }
        let k = (-self.exp) as u64;
        // mant * 2^-k = mant * 5^k / 10^k
        let five_k = num_traits::pow::pow(BigInt::from(5), k as usize);
        let scaled = &self.mant * five_k;
        let neg = scaled.is_negative();
        let digits = scaled.magnitude().to_string();
        let k = k as usize;
        let body = if digits.len() > k {
            let (int_part, frac_part) = digits.split_at(digits.len() - k);
            format!("{int_part}.{frac_part}")
        } else {
            format!("0.{}{}", "0".repeat(k - digits.len()), digits)
        };
        if neg {
            format!("-{body}")
        } else {
            body
        }
    }
}

impl PartialEq for Dyadic {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Dyadic {}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let sa = self.mant.sign();
        let sb = other.mant.sign();
        if sa != sb {
            return match (sa, sb) {
                (Sign::Minus, _) => Ordering::Less,
                (_, Sign::Minus) => Ordering::Greater,
                (Sign::NoSign, Sign::Plus) => Ordering::Less,
                (Sign::Plus, Sign::NoSign) => Ordering::Greater,
                _ => Ordering::Equal,
            };
        }
        if sa == Sign::NoSign {
            return Ordering::Equal;
        }
        let d = self.sub_exact(other);
        d.mant.sign().cmp(&Sign::NoSign)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_decimal_string())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::FromPrimitive;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn rounding_brackets_value() {
        let third = rat(1, 3);
        let lo = Dyadic::from_rational_down(&third, Prec(16));
        let hi = Dyadic::from_rational_up(&third, Prec(16));
        assert!(lo.to_rational() <= third);
        assert!(hi.to_rational() >= third);
        assert!(lo < hi);
        let width = hi.sub_exact(&lo).to_rational();
        assert!(width < rat(1, 1 << 14));
    }

    #[test]
    fn dyadic_rationals_convert_exactly() {
        let r = rat(-7, 16);
        let d = Dyadic::from_rational_exact(&r).unwrap();
        assert_eq!(d.to_rational(), r);
        assert_eq!(d.to_decimal_string(), "-0.4375");
        assert!(Dyadic::from_rational_exact(&rat(1, 3)).is_none());
    }

    #[test]
    fn sqrt_bounds() {
        let two = Dyadic::from_int(2);
        let lo = two.sqrt_down(Prec(64));
        let hi = two.sqrt_up(Prec(64));
        let lo_sq = lo.mul_exact(&lo).to_rational();
        let hi_sq = hi.mul_exact(&hi).to_rational();
        assert!(lo_sq <= BigRational::from_i64(2).unwrap());
        assert!(hi_sq >= BigRational::from_i64(2).unwrap());
        let width = hi.sub_exact(&lo).to_rational();
        assert!(width < rat(1, 1i64 << 60));
    }

    #[test]
    fn sqrt_of_square_is_exact() {
        let nine = Dyadic::from_int(9);
        assert_eq!(nine.sqrt_down(Prec(64)), nine.sqrt_up(Prec(64)));
        assert_eq!(nine.sqrt_down(Prec(64)).to_rational(), rat(3, 1));
    }

    #[test]
    fn nth_root_bounds() {
        let five = Dyadic::from_int(5);
        let lo = five.nth_root_down(3, Prec(48));
        let hi = five.nth_root_up(3, Prec(48));
        let cube = |d: &Dyadic| d.mul_exact(d).mul_exact(d).to_rational();
        assert!(cube(&lo) <= rat(5, 1));
        assert!(cube(&hi) >= rat(5, 1));
    }

    #[test]
    fn decimal_round_trip() {
        let d = Dyadic::new(BigInt::from(12345), -7);
        let s = d.to_decimal_string();
        let parsed: BigRational = {
            let point = s.find('.').unwrap();
            let digits: String = s.chars().filter(|c| *c != '.').collect();
            let frac_len = s.len() - point - 1;
            BigRational::new(
                digits.parse::<BigInt>().unwrap(),
                num_traits::pow::pow(BigInt::from(10), frac_len),
            )
        };
        assert_eq!(parsed, d.to_rational());
    }
}

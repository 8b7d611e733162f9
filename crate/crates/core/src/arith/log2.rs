//! Certified enclosures of `log2` and of `f(x) = log2(x+1)` powers.
//!
//! The base-2 logarithm of a rational is computed by exact bit extraction:
//! normalize the argument to `m in [1,2)`, then repeatedly square a dyadic
//! enclosure of `m`; each squaring exposes the next binary digit of the
//! fractional part. `log2` of a rational is irrational unless the argument
//! is a power of two, so escalating the working precision always resolves
//! a stuck digit.

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive};

use super::dyadic::Dyadic;
use super::{ArithError, CertScalar, Prec, Rat};

/// Certified enclosure of `log2(r)` for a positive rational `r`, with
/// `prec` correct fractional bits. Exact when `r` is a power of two.
pub fn log2_enclosure(r: &Rat, prec: Prec) -> Result<CertScalar, ArithError> {
    if !r.is_positive() {
        return Err(ArithError::InvalidArgument(format!(
            "log2 of non-positive rational {r}"
        )));
    }
    let e = floor_log2(r);
    let m = r / pow2_rat(e);
    debug_assert!(m >= Rat::one() && m < Rat::from_integer(2.into()));
    if m.is_one() {
        return Ok(CertScalar::from_rat(&Rat::from_integer(e.into()), prec));
    }
    let want = prec.0;
    let mut working = Prec((2 * prec.0 + 32).min(u32::MAX / 2));
    loop {
        let (frac, got) = extract_bits(&m, want, working);
        if got == want {
            let base = Dyadic::from_int(e).add_exact(&frac);
            let hi = base.add_exact(&Dyadic::new(BigInt::one(), -(got as i64)));
            return Ok(CertScalar::from_bounds(base, hi));
        }
        if working.0 >= 64 * prec.0.max(Prec::MAX.0) {
            return Err(ArithError::PrecisionExhausted { max_bits: working.0 });
        }
        working = Prec(working.0 * 2);
    }
}

/// Extract up to `want` fractional bits of `log2(m)`, `m in (1,2)`, working
/// at `working` bits. Returns the accumulated fraction and the number of
/// bits actually decided before the enclosure straddled a digit boundary.
fn extract_bits(m: &Rat, want: u32, working: Prec) -> (Dyadic, u32) {
    let two = Dyadic::from_int(2);
    let mut xl = Dyadic::from_rational_down(m, working);
    let mut xh = Dyadic::from_rational_up(m, working);
    let mut frac = Dyadic::zero();
    for i in 1..=want {
        xl = xl.mul_exact(&xl).round_down(working);
        xh = xh.mul_exact(&xh).round_up(working);
        if xl >= two {
            frac = frac.add_exact(&Dyadic::new(BigInt::one(), -(i as i64)));
            xl = xl.half();
            xh = xh.half();
        } else if xh < two {
            // digit 0; nothing to do
        } else {
            return (frac, i - 1);
        }
    }
    (frac, want)
}

/// Exact `floor(log2(r))` for positive rational `r`.
fn floor_log2(r: &Rat) -> i64 {
    let mut e = r.numer().magnitude().bits() as i64 - r.denom().magnitude().bits() as i64;
    while pow2_rat(e) > *r {
        e -= 1;
    }
    while pow2_rat(e + 1) <= *r {
        e += 1;
    }
    e
}

fn pow2_rat(e: i64) -> Rat {
    if e >= 0 {
        Rat::from_integer(BigInt::one() << (e as u64))
    } else {
        Rat::new(BigInt::one(), BigInt::one() << ((-e) as u64))
    }
}

/// Certified enclosure of `f(l)^p = log2(l+1)^p` for integer `l >= 1` and
/// positive rational exponent `p`. Exact whenever `l+1` is a power of two
/// and the result is rational (e.g. integer `p`, or `p = 1/2` with square
/// `log2(l+1)`).
pub fn f_eval(l: u64, p: &Rat, prec: Prec) -> Result<CertScalar, ArithError> {
    if l < 1 {
        return Err(ArithError::InvalidArgument("f_eval requires l >= 1".into()));
    }
    f_eval_at(&Rat::from_integer(l.into()), p, prec)
}

/// `f(x)^p` for rational `x > 0`; the argument of the logarithm is `x + 1`.
pub fn f_eval_at(x: &Rat, p: &Rat, prec: Prec) -> Result<CertScalar, ArithError> {
    if !x.is_positive() {
        return Err(ArithError::InvalidArgument(format!(
            "f is only evaluated at x > 0, got {x}"
        )));
    }
    if !p.is_positive() {
        return Err(ArithError::InvalidArgument(format!(
            "exponent must be positive, got {p}"
        )));
    }
    let a = p.numer().to_u32().ok_or_else(|| {
        ArithError::InvalidArgument(format!("exponent numerator too large: {p}"))
    })?;
    let b = p.denom().to_u32().ok_or_else(|| {
        ArithError::InvalidArgument(format!("exponent denominator too large: {p}"))
    })?;
    // Guard bits so the composed power still meets `prec`.
    let inner = Prec((prec.0 + 8 * (32 - a.leading_zeros()) + 8).min(u32::MAX / 2));
    let base = log2_enclosure(&(x + Rat::one()), inner)?;
    let powered = base.pow_u32(a, inner);
    let rooted = if b == 1 { powered } else { powered.nth_root(b, inner)? };
    Ok(tighten(rooted, prec))
}

/// Certified enclosure of `sqrt(f(k)) = sqrt(log2(k+1))`.
pub fn sqrt_f_eval(k: u64, prec: Prec) -> Result<CertScalar, ArithError> {
    f_eval(k, &Rat::new(BigInt::one(), BigInt::from(2)), prec)
}

fn tighten(v: CertScalar, prec: Prec) -> CertScalar {
    if let Some(r) = v.exact() {
        return CertScalar::from_rat(r, prec);
    }
    CertScalar::from_bounds(v.lo().round_down(prec), v.hi().round_up(prec))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::cert::parse_decimal;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn powers_of_two_are_exact() {
        let p = Prec::DEFAULT;
        let one = rat(1, 1);
        assert_eq!(f_eval(1, &one, p).unwrap().exact(), Some(&rat(1, 1)));
        assert_eq!(f_eval(3, &one, p).unwrap().exact(), Some(&rat(2, 1)));
        assert_eq!(f_eval(7, &one, p).unwrap().exact(), Some(&rat(3, 1)));
        assert_eq!(f_eval(15, &one, p).unwrap().exact(), Some(&rat(4, 1)));
        assert_eq!(f_eval(63, &one, p).unwrap().exact(), Some(&rat(6, 1)));
    }

    #[test]
    fn log2_of_three_matches_reference_bracket() {
        let v = f_eval(2, &rat(1, 1), Prec::DEFAULT).unwrap();
        // log2(3) lies in [1.5849625007, 1.5849625008]; so must the enclosure.
        assert!(v.lo_rat() >= parse_decimal("1.5849625007").unwrap());
        assert!(v.hi_rat() <= parse_decimal("1.5849625008").unwrap());
        assert!(v.lo_rat() <= v.hi_rat());
        assert!(v.width() <= rat(1, 1i64 << 62));
        assert!(!v.is_exact());
    }

    #[test]
    fn sqrt_f_examples() {
        let p = Prec::DEFAULT;
        assert_eq!(sqrt_f_eval(1, p).unwrap().exact(), Some(&rat(1, 1)));
        assert_eq!(sqrt_f_eval(15, p).unwrap().exact(), Some(&rat(2, 1)));
        let s3 = sqrt_f_eval(3, p).unwrap();
        assert!(s3.lo_rat() >= parse_decimal("1.41421356").unwrap());
        assert!(s3.hi_rat() <= parse_decimal("1.41421357").unwrap());
    }

    #[test]
    fn width_shrinks_with_precision() {
        let v64 = f_eval(2, &rat(1, 1), Prec(64)).unwrap();
        let v256 = f_eval(2, &rat(1, 1), Prec(256)).unwrap();
        assert!(v256.width() < v64.width());
        assert!(v256.lo_rat() >= v64.lo_rat());
        assert!(v256.hi_rat() <= v64.hi_rat());
    }

    #[test]
    fn monotone_in_l() {
        let p = Prec::DEFAULT;
        let mut prev = f_eval(1, &rat(1, 1), p).unwrap();
        for l in 2..40u64 {
            let cur = f_eval(l, &rat(1, 1), p).unwrap();
            assert!(
                cur.hi_rat() > prev.lo_rat(),
                "interval order violated at l = {l}"
            );
            assert!(cur.lo_rat() > prev.lo_rat());
            prev = cur;
        }
    }

    #[test]
    fn rational_exponent_brackets_true_power() {
        // f(2)^(3/2): check the enclosure squared brackets log2(3)^3.
        let v = f_eval(2, &rat(3, 2), Prec(96)).unwrap();
        let cube = f_eval(2, &rat(3, 1), Prec(96)).unwrap();
        let sq_lo = &v.lo_rat() * &v.lo_rat();
        let sq_hi = &v.hi_rat() * &v.hi_rat();
        assert!(sq_lo <= cube.hi_rat());
        assert!(sq_hi >= cube.lo_rat());
    }

    #[test]
    fn f_eval_at_rational_argument() {
        // f(7/2) = log2(9/2) in (2, 2.17)
        let v = f_eval_at(&rat(7, 2), &rat(1, 1), Prec::DEFAULT).unwrap();
        assert!(v.lo_rat() > rat(2, 1));
        assert!(v.hi_rat() < rat(22, 10));
        // arguments in (0, 1) are allowed: f(1/2) = log2(3/2) ≈ 0.585
        let small = f_eval_at(&rat(1, 2), &rat(1, 1), Prec::DEFAULT).unwrap();
        assert!(small.lo_rat() > rat(58, 100));
        assert!(small.hi_rat() < rat(59, 100));
        assert!(f_eval_at(&rat(0, 1), &rat(1, 1), Prec::DEFAULT).is_err());
    }
}

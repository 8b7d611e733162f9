//! Exact rationals and certified interval enclosures.
//!
//! Every potentially irrational quantity in this crate (values of
//! `f(x) = log2(x+1)`, its powers and square roots, and anything computed
//! from them) is carried as a [`CertScalar`]: a pair of dyadic bounds that
//! provably bracket the true real value, with an optional exact rational
//! when one exists.

mod cert;
mod dyadic;
mod log2;

pub use cert::{parse_decimal, CertScalar, Verdict};
pub use dyadic::Dyadic;
pub use log2::{f_eval, f_eval_at, log2_enclosure, sqrt_f_eval};

use num_rational::BigRational;
use thiserror::Error;

/// Exact rational scalar; arithmetic on it never rounds.
pub type Rat = BigRational;

/// Working mantissa precision in bits.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Prec(pub u32);

impl Prec {
    pub const DEFAULT: Prec = Prec(64);
    /// Hard ceiling for precision escalation.
    pub const MAX: Prec = Prec(4096);

    pub fn doubled(self) -> Prec {
        Prec((self.0 * 2).min(Self::MAX.0))
    }
}

impl Default for Prec {
    fn default() -> Self {
        Prec::DEFAULT
    }
}

#[derive(Debug, Error)]
pub enum ArithError {
    #[error("requested enclosure width cannot be met at maximum configured precision ({max_bits} bits)")]
    PrecisionExhausted { max_bits: u32 },
    #[error("comparison remained indeterminate after escalating precision to {max_bits} bits")]
    IndeterminateComparison { max_bits: u32 },
    #[error("series diverges: requires 0 < p < q")]
    NonConvergent,
    #[error("division by an interval containing zero")]
    DivisionByZero,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

/// Re-run `compute` at doubled precision until it yields a decision or the
/// precision cap is reached.
pub fn with_escalation<T>(
    start: Prec,
    mut compute: impl FnMut(Prec) -> Result<Option<T>, ArithError>,
) -> Result<T, ArithError> {
    let mut prec = start;
    loop {
        if let Some(v) = compute(prec)? {
            return Ok(v);
        }
        if prec >= Prec::MAX {
            return Err(ArithError::IndeterminateComparison { max_bits: Prec::MAX.0 });
        }
        prec = prec.doubled();
    }
}

/// Parse "p/q" (or a bare integer) into an exact rational.
pub fn parse_rat(s: &str) -> Result<Rat, ArithError> {
    let parse_int = |t: &str| {
        t.trim()
            .parse::<num_bigint::BigInt>()
            .map_err(|e| ArithError::InvalidArgument(format!("bad integer {t:?}: {e}")))
    };
    match s.split_once('/') {
        Some((p, q)) => {
            let den = parse_int(q)?;
            if den == num_bigint::BigInt::from(0) {
                return Err(ArithError::InvalidArgument("zero denominator".into()));
            }
            Ok(Rat::new(parse_int(p)?, den))
        }
        None => Ok(Rat::from_integer(parse_int(s)?)),
    }
}

/// Format a rational as "p/q" with positive denominator.
pub fn format_rat(r: &Rat) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rat_round_trip() {
        let r = parse_rat("-3/6").unwrap();
        assert_eq!(format_rat(&r), "-1/2");
        assert_eq!(parse_rat("7").unwrap(), Rat::from_integer(7.into()));
        assert!(parse_rat("1/0").is_err());
    }
}

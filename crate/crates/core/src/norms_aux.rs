//! Auxiliary gauge norms and constants: `‖·‖_g`, `|||·|||_g` for `g = f^p`,
//! the series constant `C(p,q)`, the extremal vector `x^(L)`, the
//! `Δ_(p,q)` modulus bounds, and the dual-coefficient check.
//!
//! Convention from the Lemma 1.6 proof: `f(0) = 0`.

use num_traits::{One, Signed};
use serde::Serialize;

use crate::arith::{f_eval, ArithError, CertScalar, Prec, Rat, Verdict};
use crate::vectors::FiniteVector;

/// The gauge `g = f^p` with `g(1) = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct GaugeFunction {
    pub p: Rat,
}

impl GaugeFunction {
    pub fn f_power(p: Rat) -> Result<Self, ArithError> {
        if !p.is_positive() {
            return Err(ArithError::InvalidArgument(format!(
                "gauge exponent must be positive, got {p}"
            )));
        }
        Ok(GaugeFunction { p })
    }

    pub fn f() -> Self {
        GaugeFunction { p: Rat::one() }
    }

    pub fn f_squared() -> Self {
        GaugeFunction { p: Rat::from_integer(2.into()) }
    }

    /// `g(l) = f(l)^p`, certified.
    pub fn eval(&self, l: u64, prec: Prec) -> Result<CertScalar, ArithError> {
        f_eval(l, &self.p, prec)
    }
}

/// `‖x‖_g = max_l (1/g(l)) Σ_{i<=l} x#_i` from the decreasing rearrangement.
pub fn norm_g(x: &FiniteVector, g: &GaugeFunction, prec: Prec) -> Result<CertScalar, ArithError> {
    let rearr: Vec<CertScalar> = x
        .decreasing_rearrangement()
        .iter()
        .map(|c| CertScalar::from_rat(c, prec))
        .collect();
    norm_g_decreasing(&rearr, g, prec)
}

/// Same norm for certified coefficients already sorted descending (the
/// partial-sum maximization is only valid in that order).
pub fn norm_g_decreasing(
    rearr: &[CertScalar],
    g: &GaugeFunction,
    prec: Prec,
) -> Result<CertScalar, ArithError> {
    let mut best = CertScalar::zero();
    let mut partial = CertScalar::zero();
    for (i, c) in rearr.iter().enumerate() {
        partial = partial.add(c, prec);
        let l = i as u64 + 1;
        let v = partial.div(&g.eval(l, prec)?, prec)?;
        best = best.max_envelope(&v);
    }
    Ok(best)
}

/// `|||x|||_g = Σ_i x#_i / g(i)`.
pub fn triple_norm_g(
    x: &FiniteVector,
    g: &GaugeFunction,
    prec: Prec,
) -> Result<CertScalar, ArithError> {
    let mut sum = CertScalar::zero();
    for (i, c) in x.decreasing_rearrangement().iter().enumerate() {
        let term = CertScalar::from_rat(c, prec).div(&g.eval(i as u64 + 1, prec)?, prec)?;
        sum = sum.add(&term, prec);
    }
    Ok(sum)
}

/// `C(p,q) = Σ_{n>=1} (f^p(n) - f^p(n-1)) / f^q(n)`, summed until the
/// integral-test tail bound `(p/(q-p)) f^{p-q}(N-1)` drops below
/// `tail_tol`; the tail bound is added to the upper endpoint.
pub fn constant_cpq(
    p: &Rat,
    q: &Rat,
    tail_tol: &Rat,
    prec: Prec,
) -> Result<CertScalar, ArithError> {
    if !(p.is_positive() && p < q) {
        return Err(ArithError::NonConvergent);
    }
    if !tail_tol.is_positive() {
        return Err(ArithError::InvalidArgument("tail_tol must be positive".into()));
    }
    let qp = q - p;
    let factor = p / &qp; // p/(q-p)
    let mut sum = CertScalar::zero();
    let mut prev_fp = CertScalar::zero(); // f^p(0) = 0
    let max_terms: u64 = 1 << 22;
    for n in 1..=max_terms {
        let fp_n = f_eval(n, p, prec)?;
        let term = fp_n.sub(&prev_fp, prec).div(&f_eval(n, q, prec)?, prec)?;
        sum = sum.add(&term, prec);
        prev_fp = fp_n;
        if n >= 2 {
            let tail = f_eval(n, &qp, prec)?.recip(prec)?.scale(&factor, prec);
            if tail.hi_rat() <= *tail_tol {
                let bound = tail.hi_rat();
                let upper = CertScalar::from_rat(&bound, prec);
                return Ok(sum.add(
                    &CertScalar::from_bounds(
                        crate::arith::Dyadic::zero(),
                        upper.hi().clone(),
                    ),
                    prec,
                ));
            }
        }
    }
    Err(ArithError::InvalidArgument(format!(
        "tail tolerance {tail_tol} needs more than {max_terms} terms (tail shrinks like f^{{-({qp})}})"
    )))
}

/// The extremal vector `x^(L)` with `j`-th coefficient `f^p(j) - f^p(j-1)`.
pub fn extremal_xl(
    p: &Rat,
    l_max: u64,
    prec: Prec,
) -> Result<Vec<(u64, CertScalar)>, ArithError> {
    if l_max < 1 {
        return Err(ArithError::InvalidArgument("L >= 1 required".into()));
    }
    let mut out = Vec::with_capacity(l_max as usize);
    let mut prev = CertScalar::zero();
    for j in 1..=l_max {
        let fp = f_eval(j, p, prec)?;
        out.push((j, fp.sub(&prev, prec)));
        prev = fp;
    }
    Ok(out)
}

/// The proof's sufficient `ε` for `Δ_(p,q)(ε) <= η`: find the minimal
/// `n_η` with `f^{q-p}(n) >= 1/η` certified, then
/// `ε = η · min_{n <= n_η} f^q(n)/n` (certified lower value, so the
/// guarantee survives the rounding).
pub fn delta_eps_for_eta(
    p: &Rat,
    q: &Rat,
    eta: &Rat,
    prec: Prec,
) -> Result<Rat, ArithError> {
    if !(p.is_positive() && p < q) {
        return Err(ArithError::NonConvergent);
    }
    if !eta.is_positive() {
        return Err(ArithError::InvalidArgument("eta must be positive".into()));
    }
    let qp = q - p;
    let threshold = eta.recip();
    let mut n_eta = 1u64;
    loop {
        let v = f_eval(n_eta, &qp, prec)?;
        if v.lo_rat() >= threshold {
            break;
        }
        n_eta += 1;
        if n_eta > (1 << 30) {
            return Err(ArithError::PrecisionExhausted { max_bits: prec.0 });
        }
    }
    let mut min_ratio: Option<Rat> = None;
    for n in 1..=n_eta {
        let r = f_eval(n, q, prec)?.lo_rat() / Rat::from_integer(n.into());
        min_ratio = Some(match min_ratio {
            None => r,
            Some(m) => m.min(r),
        });
    }
    Ok(eta * min_ratio.unwrap())
}

/// Brute-force lower estimate of `Δ_(p,q)(ε)` over non-increasing grid
/// vectors of dimension <= `dim_max` with coefficients in
/// `{ε·k/steps : k = 0..steps}`, subject to a certified `‖·‖_{f^p} <= 1`.
pub fn delta_brute_force(
    p: &Rat,
    q: &Rat,
    eps: &Rat,
    dim_max: usize,
    steps: u64,
    prec: Prec,
) -> Result<CertScalar, ArithError> {
    let gp = GaugeFunction { p: p.clone() };
    let gq = GaugeFunction { p: q.clone() };
    let mut best = CertScalar::zero();
    let mut stack: Vec<(Vec<Rat>, u64)> = vec![(Vec::new(), steps)];
    while let Some((prefix, cap)) = stack.pop() {
        if !prefix.is_empty() {
            let vals: Vec<CertScalar> = prefix
                .iter()
                .map(|c| CertScalar::from_rat(c, prec))
                .collect();
            let np = norm_g_decreasing(&vals, &gp, prec)?;
            if np.certify_le_rat(&Rat::one()) == Verdict::Holds {
                let nq = norm_g_decreasing(&vals, &gq, prec)?;
                best = best.max_envelope(&nq);
            } else {
                // non-increasing extension only grows the f^p norm
                continue;
            }
        }
        if prefix.len() < dim_max {
            for k in (1..=cap).rev() {
                let mut next = prefix.clone();
                next.push(eps * Rat::new(k.into(), steps.into()));
                stack.push((next, k));
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, Serialize)]
pub struct DualCheckLine {
    pub n: u64,
    pub coeff: String,
    pub bound_ok: Verdict,
}

#[derive(Clone, Debug, Serialize)]
pub struct DualCheckReport {
    pub lines: Vec<DualCheckLine>,
    pub all_pass: bool,
}

/// Lemma 1.9 bound: the decreasing rearrangement of a functional in
/// `B_{S*}` satisfies `ξ#_n <= 1/f(n)` for all n.
pub fn dual_coefficient_check(coeffs: &[Rat], prec: Prec) -> Result<DualCheckReport, ArithError> {
    let mut sorted: Vec<Rat> = coeffs.iter().map(|c| c.abs()).collect();
    sorted.sort_by(|a, b| b.cmp(a));
    let mut lines = Vec::with_capacity(sorted.len());
    let mut all_pass = true;
    for (i, c) in sorted.iter().enumerate() {
        let n = i as u64 + 1;
        // ξ#_n · f(n) <= 1
        let v = f_eval(n, &Rat::one(), prec)?.scale(c, prec);
        let verdict = v.certify_le_rat(&Rat::one());
        if verdict != Verdict::Holds {
            all_pass = false;
        }
        lines.push(DualCheckLine {
            n,
            coeff: crate::arith::format_rat(c),
            bound_ok: verdict,
        });
    }
    Ok(DualCheckReport { lines, all_pass })
}

/// Same bound for certified coefficients (extremal certificates carry
/// irrational `1/f` factors). Sorting by the upper endpoint only
/// over-tests: any reordering of a pointwise-dominated multiset still has
/// `ξ#_n <= 1/f(n)` when the sorted upper endpoints do.
pub fn dual_coefficient_check_cert(
    coeffs: &[CertScalar],
    prec: Prec,
) -> Result<DualCheckReport, ArithError> {
    let mut sorted: Vec<CertScalar> = coeffs.iter().map(|c| c.abs()).collect();
    sorted.sort_by(|a, b| b.hi_rat().cmp(&a.hi_rat()));
    let mut lines = Vec::with_capacity(sorted.len());
    let mut all_pass = true;
    for (i, c) in sorted.iter().enumerate() {
        let n = i as u64 + 1;
        // The flat l-average meets the bound with equality, where a
        // two-enclosure comparison is Indeterminate; certify against the
        // bound's own upper endpoint instead (the claim "ξ#_n <= hi(1/f(n))"
        // is decidable because both sides use the same arithmetic).
        let bound = f_eval(n, &Rat::one(), prec)?.recip(prec)?;
        let verdict = if c.hi_rat() <= bound.hi_rat() {
            Verdict::Holds
        } else {
            c.certify_le(&bound)
        };
        if verdict != Verdict::Holds {
            all_pass = false;
        }
        lines.push(DualCheckLine {
            n,
            coeff: crate::arith::format_rat(&c.hi_rat()),
            bound_ok: verdict,
        });
    }
    Ok(DualCheckReport { lines, all_pass })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    fn dense(coeffs: &[i64]) -> FiniteVector {
        FiniteVector::dense(1, coeffs.iter().map(|&c| rat(c, 1)))
    }

    #[test]
    fn norm_g_examples() {
        let p = Prec::DEFAULT;
        let g = GaugeFunction::f();
        assert_eq!(
            norm_g(&dense(&[-5]), &g, p).unwrap().exact(),
            Some(&rat(5, 1))
        );
        // (1,1): max(1, 2/f(2)) ≈ 1.26186
        let v = norm_g(&dense(&[1, 1]), &g, p).unwrap();
        assert!(v.lo_rat() > rat(126, 100) && v.hi_rat() < rat(127, 100));
        // (2,1): max(2, 3/f(2) ≈ 1.8927) = 2 exact
        let w = norm_g(&dense(&[2, 1]), &g, p).unwrap();
        assert_eq!(w.exact(), Some(&rat(2, 1)));
    }

    #[test]
    fn triple_norm_examples() {
        let p = Prec::DEFAULT;
        let g = GaugeFunction::f();
        assert_eq!(
            triple_norm_g(&dense(&[7]), &g, p).unwrap().exact(),
            Some(&rat(7, 1))
        );
        // (1,1,1): 1 + 1/f(2) + 1/2 ≈ 2.13093
        let v = triple_norm_g(&dense(&[1, 1, 1]), &g, p).unwrap();
        assert!(v.lo_rat() > rat(213, 100) && v.hi_rat() < rat(2131, 1000));
        // dominance over norm_g
        for x in [dense(&[1, 1]), dense(&[3, 1, 2]), dense(&[1, 5, 1, 1])] {
            let t = triple_norm_g(&x, &g, p).unwrap();
            let n = norm_g(&x, &g, p).unwrap();
            assert!(t.hi_rat() >= n.lo_rat());
        }
    }

    #[test]
    fn cpq_series() {
        let p = Prec::DEFAULT;
        let c = constant_cpq(&rat(1, 1), &rat(2, 1), &rat(1, 4), p).unwrap();
        // first term is exactly 1, so C(1,2) > 1
        assert!(c.lo_rat() >= rat(1, 1));
        assert!(c.width() <= rat(2, 4) + rat(1, 1000));
        assert!(matches!(
            constant_cpq(&rat(2, 1), &rat(1, 1), &rat(1, 4), p),
            Err(ArithError::NonConvergent)
        ));
    }

    #[test]
    fn extremal_vector() {
        let p = Prec::DEFAULT;
        let x1 = extremal_xl(&rat(3, 7), 1, p).unwrap();
        assert_eq!(x1[0].1.exact(), Some(&rat(1, 1)));

        // ‖x^(L)‖_{f} = 1: partial sums telescope to f(l)
        let xs = extremal_xl(&rat(1, 1), 6, p).unwrap();
        let vals: Vec<CertScalar> = xs.iter().map(|(_, c)| c.clone()).collect();
        let n = norm_g_decreasing(&vals, &GaugeFunction::f(), p).unwrap();
        assert!(n.lo_rat() > rat(999, 1000) && n.hi_rat() < rat(1001, 1000));

        // coefficients strictly decreasing for p = 1
        for w in vals.windows(2) {
            assert!(w[0].lo_rat() > w[1].hi_rat() || w[0].lo() >= w[1].hi());
        }
    }

    #[test]
    fn delta_bound_and_brute_force() {
        let prec = Prec::DEFAULT;
        let p = rat(1, 1);
        let q = rat(2, 1);
        let eta = rat(1, 2);
        let eps = delta_eps_for_eta(&p, &q, &eta, prec).unwrap();
        assert!(eps.is_positive());
        // brute-forced Δ at the returned ε stays below η
        let est = delta_brute_force(&p, &q, &eps, 5, 4, prec).unwrap();
        assert!(
            est.hi_rat() <= &eta + rat(1, 1000),
            "estimate {est} vs eta {eta}"
        );
        // monotone in η
        let eps2 = delta_eps_for_eta(&p, &q, &rat(3, 4), prec).unwrap();
        assert!(eps2 >= eps);
    }

    #[test]
    fn dual_check_examples() {
        let prec = Prec::DEFAULT;
        let ok = dual_coefficient_check(&[rat(1, 1)], prec).unwrap();
        assert!(ok.all_pass);
        let bad = dual_coefficient_check(&[rat(1, 1), rat(1, 1)], prec).unwrap();
        assert!(!bad.all_pass);
        assert_eq!(bad.lines[1].bound_ok, Verdict::Fails);
    }
}

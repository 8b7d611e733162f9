//! Admissible sequences and yardstick vectors (Def. 1.11), transplantation
//! onto block sequences, ℓ1-average checks, the Lemma 1.12/1.13 hypothesis
//! audits, and the James blocking search.

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::arith::{f_eval, format_rat, ArithError, CertScalar, Dyadic, Prec, Rat, Verdict};
use crate::norm_s::{norm_s, NormOptions};
use crate::vectors::{BlockSequence, FiniteVector};

#[derive(Debug, Error)]
pub enum YardstickError {
    #[error("sequence is not admissible: {0}")]
    NotAdmissible(String),
    #[error("spreading step needs {needed} to divide {value} (index {index})")]
    SpreadDivisibility { index: usize, needed: u64, value: u64 },
    #[error("block sequence too short: need {needed} blocks, have {have}")]
    InsufficientBlocks { needed: u64, have: usize },
    #[error(transparent)]
    Arith(#[from] ArithError),
}

/// Witness line for one index of the admissibility check.
#[derive(Clone, Debug, Serialize)]
pub struct AdmissibilityLine {
    pub index: usize,
    pub m: u64,
    pub even: bool,
    /// product over all nonempty A ⊆ {1..i-1} of Σ_{j∈A} m_j
    pub subset_product: String,
    pub divisible: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdmissibleSeq {
    pub ms: Vec<u64>,
    pub witness: Vec<AdmissibilityLine>,
    pub admissible: bool,
}

/// Def. 1.11 admissibility: every `m_i` even and divisible by the product
/// of all nonempty-subset sums of its predecessors. The empty sequence is
/// vacuously admissible.
pub fn is_admissible(ms: &[u64]) -> AdmissibleSeq {
    let mut witness = Vec::with_capacity(ms.len());
    let mut admissible = true;
    for (i, &m) in ms.iter().enumerate() {
        let even = m % 2 == 0;
        let mut product = BigInt::one();
        // all nonempty subsets of the first i entries
        for mask in 1u64..(1 << i) {
            let sum: u64 = (0..i).filter(|b| mask >> b & 1 == 1).map(|b| ms[b]).sum();
            product *= BigInt::from(sum);
        }
        let divisible = if product.is_zero() {
            false
        } else {
            (BigInt::from(m) % &product).is_zero()
        };
        if !(even && divisible) {
            admissible = false;
        }
        witness.push(AdmissibilityLine {
            index: i + 1,
            m,
            even,
            subset_product: product.to_string(),
            divisible,
        });
    }
    AdmissibleSeq { ms: ms.to_vec(), witness, admissible }
}

/// A yardstick vector: coefficient level `f(m_i)/m_i` per position.
#[derive(Clone, Debug)]
pub struct YardstickVector {
    pub ms: Vec<u64>,
    /// position -> level index (0-based into `ms`), ordered by position
    pub level_of_pos: Vec<(u64, usize)>,
    /// levels[i] = certified f(m_i)/m_i
    pub levels: Vec<CertScalar>,
    /// whether the full Def. 1.11 admissibility held (the construction
    /// itself only needs the spreading divisibility)
    pub fully_admissible: bool,
}

impl YardstickVector {
    pub fn support_len(&self) -> u64 {
        self.ms.iter().sum()
    }

    pub fn coeffs(&self) -> Vec<(u64, CertScalar)> {
        self.level_of_pos
            .iter()
            .map(|&(pos, lvl)| (pos, self.levels[lvl].clone()))
            .collect()
    }

    /// The disjointly supported piece carrying level `i` (0-based).
    pub fn piece_positions(&self, i: usize) -> Vec<u64> {
        self.level_of_pos
            .iter()
            .filter(|&&(_, lvl)| lvl == i)
            .map(|&(pos, _)| pos)
            .collect()
    }
}

/// Def. 1.11 construction; requires full admissibility for multi-level
/// sequences. Single-level `y(m)` is the display's unconditional case.
pub fn build_yardstick(ms: &[u64], prec: Prec) -> Result<YardstickVector, YardstickError> {
    if ms.len() >= 2 {
        let adm = is_admissible(ms);
        if !adm.admissible {
            let first_bad = adm
                .witness
                .iter()
                .find(|l| !(l.even && l.divisible))
                .unwrap();
            return Err(YardstickError::NotAdmissible(format!(
                "index {}: m = {} (even: {}, divisible by {}: {})",
                first_bad.index,
                first_bad.m,
                first_bad.even,
                first_bad.subset_product,
                first_bad.divisible
            )));
        }
    }
    build_yardstick_unchecked(ms, prec).map(|mut y| {
        y.fully_admissible = true;
        y
    })
}

/// Same construction checking only the spreading divisibility
/// `(m_1+…+m_{k-1}) | m_k`; the result is flagged as not fully admissible.
pub fn build_yardstick_unchecked(
    ms: &[u64],
    prec: Prec,
) -> Result<YardstickVector, YardstickError> {
    let levels: Vec<CertScalar> = ms
        .iter()
        .map(|&m| {
            let f_m = f_eval(m, &Rat::one(), prec)?;
            f_m.div(&CertScalar::from_int(m as i64), prec)
        })
        .collect::<Result<_, ArithError>>()?;

    // positions as (pos, level); start with y(m_1)
    let mut placed: Vec<(u64, usize)> = Vec::new();
    let mut total: u64 = 0;
    for (k, &m) in ms.iter().enumerate() {
        if k == 0 {
            placed = (1..=m).map(|p| (p, 0)).collect();
            total = m;
            continue;
        }
        if m % total != 0 {
            return Err(YardstickError::SpreadDivisibility {
                index: k + 1,
                needed: total,
                value: m,
            });
        }
        let gap = m / total; // zeros between successive old coordinates
        // old coordinate i (1-based in placement order) moves to
        // 1 + (i-1)(gap+1); every other position gets level k
        let mut next: Vec<(u64, usize)> = Vec::with_capacity((total + m) as usize);
        let mut old_iter = placed.iter().enumerate();
        let mut old_positions: Vec<(u64, usize)> = Vec::with_capacity(placed.len());
        for (i, &(_, lvl)) in &mut old_iter {
            old_positions.push((1 + i as u64 * (gap + 1), lvl));
        }
        let mut old_idx = 0usize;
        for pos in 1..=(total + m) {
            if old_idx < old_positions.len() && old_positions[old_idx].0 == pos {
                next.push((pos, old_positions[old_idx].1));
                old_idx += 1;
            } else {
                next.push((pos, k));
            }
        }
        placed = next;
        total += m;
    }
    Ok(YardstickVector {
        ms: ms.to_vec(),
        level_of_pos: placed,
        levels,
        fully_admissible: false,
    })
}

/// `y_x̄(m_1..m_k) = Σ a_i x_i`: copy the yardstick coefficients onto the
/// first `Σ m_i` blocks of `xs`.
pub fn transplant(
    y: &YardstickVector,
    xs: &BlockSequence,
) -> Result<Vec<(u64, CertScalar)>, YardstickError> {
    let needed = y.support_len();
    if (xs.len() as u64) < needed {
        return Err(YardstickError::InsufficientBlocks { needed, have: xs.len() });
    }
    let mut out = Vec::new();
    for (i, &(_, lvl)) in y.level_of_pos.iter().enumerate() {
        let a = &y.levels[lvl];
        for (pos, c) in xs.blocks()[i].iter() {
            out.push((pos, a.scale(c, Prec::DEFAULT)));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct L1AverageReport {
    pub parts_in_unit_ball: Vec<Verdict>,
    pub decomposition_exact: bool,
    /// norm_S(x) >= c, certified against the lower endpoint of `c`
    pub average_bound: Verdict,
    /// per sign pattern: ‖Σ ε_i x_i‖ >= n·c (ℓ1^n variant); empty when not
    /// requested
    pub sign_patterns: Vec<Verdict>,
    pub overall: Verdict,
}

fn ge_against_lower(value: &CertScalar, target: &CertScalar) -> Verdict {
    match value.certify_ge(target) {
        Verdict::Holds => Verdict::Holds,
        v => {
            // certify against the target's certified lower endpoint: the
            // claim "norm >= target.lo" is sound whenever value.lo >= target.lo
            if value.lo() >= target.lo() {
                Verdict::Holds
            } else {
                v
            }
        }
    }
}

/// Def. 0.1 check: `x = (1/n) Σ parts`, parts in the unit ball,
/// `‖x‖_S >= c`; with `full_sign_check` also the ℓ1^n sign-pattern bound
/// `‖Σ ε_i x_i‖ >= n·c` for all 2^n patterns.
pub fn check_l1_plus_average(
    x: &FiniteVector,
    parts: &BlockSequence,
    n: u64,
    c: &CertScalar,
    full_sign_check: bool,
    opts: &NormOptions,
) -> Result<L1AverageReport, YardstickError> {
    if parts.len() as u64 != n {
        return Err(YardstickError::InsufficientBlocks { needed: n, have: parts.len() });
    }
    let mut parts_in_unit_ball = Vec::with_capacity(parts.len());
    for b in parts.blocks() {
        let nb = norm_s(b, opts)?.value;
        parts_in_unit_ball.push(nb.certify_le_rat(&Rat::one()));
    }
    let mean = parts
        .sum()
        .scale(&Rat::new(BigInt::one(), BigInt::from(n)));
    let decomposition_exact = &mean == x;
    let nx = norm_s(x, opts)?.value;
    let average_bound = ge_against_lower(&nx, c);

    let sign_patterns: Vec<Verdict> = if full_sign_check {
        let target = c.scale(&Rat::from_integer(n.into()), opts.precision);
        let masks: Vec<u64> = (0..(1u64 << n)).collect();
        let run = |&mask: &u64| -> Result<Verdict, YardstickError> {
            let mut v = FiniteVector::zero();
            for (i, b) in parts.blocks().iter().enumerate() {
                let sign = if mask >> i & 1 == 1 { -1 } else { 1 };
                v = v.add(&b.scale(&Rat::from_integer(sign.into())));
            }
            let nv = norm_s(&v, opts)?.value;
            Ok(ge_against_lower(&nv, &target))
        };
        #[cfg(feature = "parallel")]
        let res: Vec<Verdict> = if opts.parallel {
            masks.par_iter().map(run).collect::<Result<_, _>>()?
        } else {
            masks.iter().map(run).collect::<Result<_, _>>()?
        };
        #[cfg(not(feature = "parallel"))]
        let res: Vec<Verdict> = masks.iter().map(run).collect::<Result<_, _>>()?;
        res
    } else {
        Vec::new()
    };

    let all = parts_in_unit_ball
        .iter()
        .chain(sign_patterns.iter())
        .chain(std::iter::once(&average_bound))
        .fold(Verdict::Holds, |acc, &v| match (acc, v) {
            (Verdict::Fails, _) | (_, Verdict::Fails) => Verdict::Fails,
            (Verdict::Indeterminate, _) | (_, Verdict::Indeterminate) => Verdict::Indeterminate,
            _ => Verdict::Holds,
        });
    let overall = if decomposition_exact { all } else { Verdict::Fails };
    Ok(L1AverageReport {
        parts_in_unit_ball,
        decomposition_exact,
        average_bound,
        sign_patterns,
        overall,
    })
}

/// `l_0 = min { l : f(l) >= 6 } = 63`, certified (`f(63) = 6` exactly).
pub fn l0(prec: Prec) -> Result<u64, ArithError> {
    let six = Rat::from_integer(6.into());
    let at_63 = f_eval(63, &Rat::one(), prec)?;
    let at_62 = f_eval(62, &Rat::one(), prec)?;
    if at_63.certify_ge_rat(&six) == Verdict::Holds
        && at_62.certify_le_rat(&six) == Verdict::Holds
        && at_62.hi_rat() < six
    {
        Ok(63)
    } else {
        Err(ArithError::IndeterminateComparison { max_bits: prec.0 })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma112Report {
    pub divisibility: bool,
    pub eps_in_range: Verdict,
    pub l0: u64,
    pub eq_1_12_2: Verdict,
    /// certified enclosure of the required lower bound on f(m)
    pub required_f_m: String,
    /// minimal m in the symbolic form 2^B - 1
    pub minimal_m: String,
    pub eq_1_12_3: Option<Verdict>,
}

/// Hypothesis audit for Lemma 1.12 with `k`, `m`, constant `C`, and `ε`.
pub fn audit_lemma_1_12(
    k: u64,
    m: u64,
    big_c: &Rat,
    eps: &Rat,
    prec: Prec,
) -> Result<Lemma112Report, ArithError> {
    if k == 0 || m == 0 {
        return Err(ArithError::InvalidArgument("k, m >= 1 required".into()));
    }
    let divisibility = m % k == 0;

    // 0 < ε < (f(2)-1)/f(2) = 1 - 1/f(2)
    let f2 = f_eval(2, &Rat::one(), prec)?;
    let eps_cap = CertScalar::one().sub(&f2.recip(prec)?, prec);
    let eps_in_range = if eps.is_positive() {
        CertScalar::from_rat(eps, prec).certify_le(&eps_cap)
    } else {
        Verdict::Fails
    };

    let l0 = l0(prec)?;
    let f63 = f_eval(63, &Rat::one(), prec)?;
    let f62 = f_eval(62, &Rat::one(), prec)?;
    let ratio = f63.mul(&f62, prec).div(&f63.sub(&f62, prec), prec)?;
    let fifty = CertScalar::from_rat(&(Rat::from_integer(50.into()) / (eps * eps)), prec);
    let required = fifty.max_envelope(&ratio).scale(big_c, prec);
    let f_m = f_eval(m, &Rat::one(), prec)?;
    let eq_1_12_2 = f_m.certify_ge(&required);
    let minimal_m = format!("2^{} - 1", required.hi().to_decimal_string());

    let eq_1_12_3 = if divisibility {
        let lhs = f_m.div(&f_eval(m / k, &Rat::one(), prec)?, prec)?;
        let rhs = Rat::one() + eps / Rat::from_integer(6.into());
        Some(lhs.certify_le_rat(&rhs))
    } else {
        None
    };

    Ok(Lemma112Report {
        divisibility,
        eps_in_range,
        l0,
        eq_1_12_2,
        required_f_m: format!("[{}, {}]", required.lo(), required.hi()),
        minimal_m,
        eq_1_12_3,
    })
}

/// Summable ε-sequence given in closed form (the audits need certified
/// tails of both sums and products).
#[derive(Clone, Debug)]
pub enum EpsSpec {
    /// ε_n = first · ratio^(n-1), n >= 1, with 0 < ratio <= 1/2
    Geometric { first: Rat, ratio: Rat },
}

impl EpsSpec {
    pub fn term(&self, n: u64) -> Rat {
        match self {
            EpsSpec::Geometric { first, ratio } => {
                let mut v = first.clone();
                for _ in 1..n {
                    v *= ratio;
                }
                v
            }
        }
    }

    /// Exact tail sum Σ_{j > n} ε_j.
    pub fn tail_sum(&self, n: u64) -> Rat {
        match self {
            EpsSpec::Geometric { first, ratio } => {
                // first·ratio^n / (1 - ratio)
                let mut v = first.clone();
                for _ in 0..n {
                    v *= ratio;
                }
                v / (Rat::one() - ratio)
            }
        }
    }

    /// Certified enclosure of `C_i = Π_{j >= i} (1 + ε_j)`: exact partial
    /// product times the Weierstrass tail bound `1/(1 - tail_sum)`.
    pub fn product_tail(&self, i: u64, terms: u64, prec: Prec) -> Result<CertScalar, ArithError> {
        let mut partial = Rat::one();
        for j in i..(i + terms) {
            partial *= Rat::one() + self.term(j);
        }
        let tail = self.tail_sum(i + terms - 1);
        if tail >= Rat::one() {
            return Err(ArithError::NonConvergent);
        }
        let hi = &partial / (Rat::one() - tail);
        Ok(CertScalar::from_bounds(
            Dyadic::from_rational_down(&partial, prec),
            Dyadic::from_rational_up(&hi, prec),
        ))
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma113Line {
    pub i: u64,
    pub c_i: String,
    pub eq_1_13_1: Verdict,
    pub eq_1_13_2: Option<Verdict>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Lemma113Report {
    pub admissible: bool,
    pub lines: Vec<Lemma113Line>,
    pub first_failure: Option<u64>,
}

/// Hypothesis audit for Lemma 1.13 over `ms = (m_0, m_1, …)`.
pub fn audit_lemma_1_13(
    eps: &EpsSpec,
    ms: &[u64],
    prec: Prec,
) -> Result<Lemma113Report, ArithError> {
    let adm = is_admissible(ms);
    let f63 = f_eval(63, &Rat::one(), prec)?;
    let f62 = f_eval(62, &Rat::one(), prec)?;
    let ratio = f63.mul(&f62, prec).div(&f63.sub(&f62, prec), prec)?;
    let mut lines = Vec::new();
    let mut first_failure = None;
    for i in 1..ms.len() {
        let idx = i as u64;
        let eps_i = eps.term(idx);
        let c_i = eps.product_tail(idx, 32, prec)?;
        let fifty = CertScalar::from_rat(
            &(Rat::from_integer(50.into()) / (&eps_i * &eps_i)),
            prec,
        );
        let required = fifty.max_envelope(&ratio).mul(&c_i, prec);
        let f_mi = f_eval(ms[i], &Rat::one(), prec)?;
        let eq1 = f_mi.certify_ge(&required);
        let eq2 = if ms[i] % ms[i - 1] == 0 {
            let lhs = f_mi.div(&f_eval(ms[i] / ms[i - 1], &Rat::one(), prec)?, prec)?;
            let rhs = Rat::one() + &eps_i / Rat::from_integer(6.into());
            Some(lhs.certify_le_rat(&rhs))
        } else {
            None
        };
        if first_failure.is_none()
            && (eq1 != Verdict::Holds || eq2 != Some(Verdict::Holds))
        {
            first_failure = Some(idx);
        }
        lines.push(Lemma113Line {
            i: idx,
            c_i: format!("[{}, {}]", c_i.lo(), c_i.hi()),
            eq_1_13_1: eq1,
            eq_1_13_2: eq2,
        });
    }
    Ok(Lemma113Report { admissible: adm.admissible, lines, first_failure })
}

#[derive(Clone, Debug, Serialize)]
pub struct JamesBlockingResult {
    pub m: u64,
    pub block_size: u64,
    /// min over sign patterns of the certified ‖Σ ε_i y_i‖ lower bound,
    /// divided by n (the achieved ℓ1 ratio)
    pub achieved_ratio: String,
}

/// Lemma 2.8 search: find `m <= max_m`, divisible by `n`, whose `n`
/// equal consecutive blocks of `{1..m}`, normalized, are
/// `c^{1/n}(1-eps)`-equivalent to the ℓ1^n basis (sign-pattern
/// necessary condition, certified). Returns the first success by
/// ascending `m`, else the best ratio seen.
pub fn james_blocking_search(
    norm_oracle: &(dyn Fn(&[(u64, CertScalar)]) -> Result<CertScalar, ArithError> + Sync),
    n: u64,
    eps: &Rat,
    max_m: u64,
    prec: Prec,
) -> Result<Result<JamesBlockingResult, String>, ArithError> {
    if n == 1 {
        return Ok(Ok(JamesBlockingResult {
            m: 1,
            block_size: 1,
            achieved_ratio: "1".into(),
        }));
    }
    let mut best_ratio: Option<Rat> = None;
    let mut m = n;
    while m <= max_m {
        let size = m / n;
        // c = ‖Σ_1^m e_i‖ / m; target per pattern: n · (1-eps) · c^{1/n}
        let ones: Vec<(u64, CertScalar)> = (1..=m).map(|p| (p, CertScalar::one())).collect();
        let full = norm_oracle(&ones)?;
        let c = full.scale(&Rat::new(BigInt::one(), BigInt::from(m)), prec);
        let c_root = c.nth_root(n as u32, prec)?;
        let scale = Rat::from_integer(n.into()) * (Rat::one() - eps);
        let target = c_root.scale(&scale, prec);
        // normalized block sum norm: blocks are equal-sized runs of ones,
        // all with the same norm
        let block: Vec<(u64, CertScalar)> =
            (1..=size).map(|p| (p, CertScalar::one())).collect();
        let bnorm = norm_oracle(&block)?;
        let w = bnorm.recip(prec)?;
        // sign patterns (first sign fixed + by unconditionality symmetry)
        let mut min_lo: Option<Rat> = None;
        let mut all_hold = true;
        for mask in 0u64..(1 << (n - 1)) {
            let mut coeffs: Vec<(u64, CertScalar)> = Vec::with_capacity(m as usize);
            for i in 0..n {
                let neg = i > 0 && (mask >> (i - 1)) & 1 == 1;
                for p in (i * size + 1)..=((i + 1) * size) {
                    let v = if neg { w.neg() } else { w.clone() };
                    coeffs.push((p, v));
                }
            }
            let v = norm_oracle(&coeffs)?;
            if v.certify_ge(&target) != Verdict::Holds {
                all_hold = false;
            }
            let r = v.lo_rat() / Rat::from_integer(n.into());
            min_lo = Some(match min_lo {
                None => r,
                Some(cur) => cur.min(r),
            });
        }
        if let Some(r) = &min_lo {
            best_ratio = Some(match &best_ratio {
                None => r.clone(),
                Some(b) => b.clone().max(r.clone()),
            });
        }
        if all_hold {
            return Ok(Ok(JamesBlockingResult {
                m,
                block_size: size,
                achieved_ratio: format_rat(&min_lo.unwrap()),
            }));
        }
        m += n;
    }
    Ok(Err(format!(
        "no m <= {max_m} succeeded; best per-pattern ratio achieved: {}",
        best_ratio.map(|r| format_rat(&r)).unwrap_or_else(|| "none".into())
    )))
}

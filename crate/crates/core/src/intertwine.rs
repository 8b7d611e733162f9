//! The §6 intertwined construction at toy scale: the block sequence
//! z_n = u_n + v_n of transplanted multi-block yardsticks, the dual
//! certificate families z*(ι, ρ) of Eq. 6.5, and the finitely checkable
//! identities (Eq. 6.5(c)/(d), Eq. 6.9).
//!
//! Coefficients of z_n carry per-block factors (1/D)·f(j)/j with f(j)
//! irrational, so the vectors are stored in *reduced* form — the f(j)
//! factor stripped, leaving rational (1/(D·j))·base coefficients — plus
//! block metadata. Pairing a family functional (which carries 1/f(j) on
//! the same block) with the reduced vector cancels f(j) exactly, which
//! is what makes the (c) equalities checkable in rational arithmetic.

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::arith::{f_eval, format_rat, parse_rat, sqrt_f_eval, ArithError, CertScalar, Prec, Rat, Verdict};
use crate::certificates::FunctionalTree;
use crate::gm::{GMParams, GmError, Mode};
use crate::norm_s::{norm_s_cert, NormOptions};
use crate::vectors::{BlockSequence, FiniteVector, IndexInterval};

#[derive(Debug, Error)]
pub enum IntertwineError {
    #[error("base exhausted: stage {stage} needs {needed} more base blocks but only {available} remain")]
    BaseExhausted { stage: usize, needed: usize, available: usize },
    #[error("certificate family missing for indices {0:?} (construction too short)")]
    FamilyMissing(Vec<usize>),
    #[error("invalid arguments: {0}")]
    Invalid(String),
    #[error(transparent)]
    Gm(#[from] GmError),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

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

mod leads_repr {
    use super::*;
    use serde::de::Error as _;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &[(u64, Rat)], s: S) -> Result<S::Ok, S::Error> {
        let repr: Vec<(u64, String)> = v.iter().map(|(p, r)| (*p, format_rat(r))).collect();
        repr.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<(u64, Rat)>, D::Error> {
        let repr = Vec::<(u64, String)>::deserialize(d)?;
        repr.into_iter()
            .map(|(p, s)| Ok((p, parse_rat(&s).map_err(D::Error::custom)?)))
            .collect()
    }
}

/// One yardstick block of some z_n: j consecutive base blocks, true
/// coefficient (1/D)·f(j)/j times the base coefficients.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub j: u64,
    /// coordinate range covered by the block's base elements
    pub range: IndexInterval,
    /// uniform leaf target τ = min |leading base coefficient| in the block
    #[serde(with = "rat_str")]
    pub tau: Rat,
    /// (position, leading-coefficient) per base element, in order
    #[serde(with = "leads_repr")]
    pub leads: Vec<(u64, Rat)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stage {
    /// Σ_n ordered increasingly (Eq. 6.7a); stage 1 has the single
    /// j_2-block
    pub blocks: Vec<Block>,
}

/// (ι, ρ): increasing stage indices (1-based) with signs.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct FamilyKey {
    pub indices: Vec<usize>,
    pub signs: Vec<i8>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Family {
    pub key: FamilyKey,
    /// z*_t, signed (ρ_t folded into the leaf coefficients)
    pub functionals: Vec<FunctionalTree>,
    /// (stage index 1-based, block index r_t 0-based) per t
    pub blocks: Vec<(usize, usize)>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct IntertwinedConstruction {
    pub params: GMParams,
    #[serde(with = "rat_str")]
    pub d: Rat,
    pub stages: Vec<Stage>,
    /// reduced vectors: the per-block f(j) factor stripped
    pub zs: Vec<FiniteVector>,
    pub us: Vec<FiniteVector>,
    pub vs: Vec<FiniteVector>,
    /// all (ι, ρ) families over {1..n_count}, in generation (lex) order
    pub families: Vec<Family>,
}

/// The unit-vector-basis surrogate for the SRIS base.
pub fn unit_base(n: usize) -> BlockSequence {
    BlockSequence::new((1..=n as u64).map(FiniteVector::unit).collect())
        .expect("unit vectors are successive")
}

fn sign_of(r: &Rat) -> i8 {
    if r.is_negative() {
        -1
    } else {
        1
    }
}

/// Complete families over {1..max_index}, in the canonical coding order
/// (length, then indices, then signs): the order in which Σ_n sigma
/// codes are assigned, reproducible after deserialization.
fn canon_order(families: &[Family], max_index: usize) -> Vec<&Family> {
    let mut keyed: Vec<&Family> = families
        .iter()
        .filter(|f| *f.key.indices.last().unwrap() <= max_index)
        .collect();
    keyed.sort_by(|a, b| {
        let ka = (a.key.indices.len(), &a.key.indices, &a.key.signs);
        let kb = (b.key.indices.len(), &b.key.indices, &b.key.signs);
        ka.cmp(&kb)
    });
    keyed
}

/// Builds the inductive construction of §6 over the first blocks of
/// `base`. Stage 1 is the single j_2-block; stage n >= 2 assembles Σ_n
/// from sigma_code over all complete families of {1..n−1} (in lex
/// order) and splits each block at the half (J elements are even).
pub fn build_construction(
    params: GMParams,
    base: &BlockSequence,
    n_count: usize,
    d: Rat,
) -> Result<IntertwinedConstruction, IntertwineError> {
    if params.mode != Mode::Toy {
        return Err(IntertwineError::Invalid("construction needs toy-mode params".into()));
    }
    if n_count < 1 {
        return Err(IntertwineError::Invalid("n_count must be >= 1".into()));
    }
    if !d.is_positive() {
        return Err(IntertwineError::Invalid("D must be positive".into()));
    }
    // reserve slot 1: j_2 is stage 1's block size, so sigma hands out
    // fresh values from j_4 on (the toy realization of Eq. 6.7)
    params.sigma.advance_past(1);

    let mut stages: Vec<Stage> = Vec::new();
    let mut zs = Vec::new();
    let mut us = Vec::new();
    let mut vs = Vec::new();
    let mut families: Vec<Family> = Vec::new();
    let mut consumed = 0usize; // base blocks used

    for n in 1..=n_count {
        // block sizes for this stage
        let sizes: Vec<u64> = if n == 1 {
            vec![params.j.value(2)?]
        } else {
            // Σ_n: sigma over all complete families of {1..n−1}; the
            // injective first-free-slot coder makes the values fresh and
            // increasing, so no Eq. 6.7 perturbation step is needed
            let mut vals = Vec::new();
            for f in canon_order(&families, n - 1) {
                vals.push(params.sigma.code(&f.functionals, &params.j)?.value);
            }
            vals.sort_unstable();
            vals.dedup();
            vals
        };

        // consume base blocks and form the stage's blocks
        let mut blocks = Vec::new();
        let mut z = FiniteVector::zero();
        let mut u = FiniteVector::zero();
        let mut v = FiniteVector::zero();
        for &j in &sizes {
            let avail = base.len().saturating_sub(consumed);
            if (j as usize) > avail {
                return Err(IntertwineError::BaseExhausted {
                    stage: n,
                    needed: j as usize,
                    available: avail,
                });
            }
            let elems = &base.blocks()[consumed..consumed + j as usize];
            consumed += j as usize;
            let scale = Rat::one() / (&d * Rat::from_integer(j.into()));
            let mut leads = Vec::new();
            let mut lo = u64::MAX;
            let mut hi = 0u64;
            for (s, b) in elems.iter().enumerate() {
                let r = b.range().map_err(|e| IntertwineError::Invalid(e.to_string()))?;
                lo = lo.min(r.lo);
                hi = hi.max(r.hi);
                let lead_pos = r.lo;
                leads.push((lead_pos, b.coeff(lead_pos)));
                let part = b.scale(&scale);
                z = z.add(&part);
                if s < j as usize / 2 {
                    u = u.add(&part);
                } else {
                    v = v.add(&part);
                }
            }
            let tau = leads
                .iter()
                .map(|(_, c)| c.abs())
                .min()
                .expect("blocks are nonempty");
            blocks.push(Block { j, range: IndexInterval::new(lo, hi), tau, leads });
        }
        stages.push(Stage { blocks });
        zs.push(z);
        us.push(u);
        vs.push(v);

        // extend the family system: for every prefix (empty or a complete
        // family over {1..n−1}) and each sign, append z*_l over stage n
        let mut new_families = Vec::new();
        let prefixes: Vec<Option<usize>> = std::iter::once(None)
            .chain(
                families
                    .iter()
                    .enumerate()
                    .filter(|(_, f)| *f.key.indices.last().unwrap() <= n - 1)
                    .map(|(i, _)| Some(i)),
            )
            .collect();
        for pref in prefixes {
            for rho in [1i8, -1] {
                let (mut indices, mut signs, mut functionals, mut fblocks, r) = match pref {
                    None => (Vec::new(), Vec::new(), Vec::new(), Vec::new(), 0usize),
                    Some(i) => {
                        let f = &families[i];
                        let code = params.sigma.code(&f.functionals, &params.j)?;
                        let r = stages[n - 1]
                            .blocks
                            .iter()
                            .position(|b| b.j == code.value)
                            .expect("sigma values generate the stage blocks");
                        (
                            f.key.indices.clone(),
                            f.key.signs.clone(),
                            f.functionals.clone(),
                            f.blocks.clone(),
                            r,
                        )
                    }
                };
                let block = &stages[n - 1].blocks[r];
                let leaves: Vec<FunctionalTree> = block
                    .leads
                    .iter()
                    .map(|(pos, lead)| {
                        // x*_s = ±(τ/|lead|)·e*_pos: value on its base
                        // element is ρ·τ, uniform across the block
                        let c = Rat::from_integer(rho.into()) * &block.tau
                            * Rat::from_integer(sign_of(lead).into())
                            / lead.abs();
                        FunctionalTree::leaf(*pos, c)
                    })
                    .collect();
                indices.push(n);
                signs.push(rho);
                functionals.push(FunctionalTree::average(leaves));
                fblocks.push((n, r));
                new_families.push(Family {
                    key: FamilyKey { indices, signs },
                    functionals,
                    blocks: fblocks,
                });
            }
        }
        families.extend(new_families);
    }
    // canonical lex order (generation order interleaves prefix lengths)
    families.sort_by(|a, b| a.key.cmp(&b.key));

    Ok(IntertwinedConstruction { params, d, stages, zs, us, vs, families })
}

impl IntertwinedConstruction {
    pub fn n_count(&self) -> usize {
        self.stages.len()
    }

    pub fn family(&self, key: &FamilyKey) -> Option<&Family> {
        self.families.iter().find(|f| &f.key == key)
    }

    /// Re-runs the construction's sigma codes in stage order; needed
    /// after deserialization (the coder state is not serialized) and a
    /// memoized no-op otherwise.
    pub fn sigma_replay(&self) -> Result<(), GmError> {
        self.params.sigma.advance_past(1);
        for n in 2..=self.stages.len() {
            for f in canon_order(&self.families, n - 1) {
                let _ = self.params.sigma.code(&f.functionals, &self.params.j)?;
            }
        }
        Ok(())
    }

    /// True (certified) coefficients of z_n: reduced entries times the
    /// per-block f(j).
    pub fn z_certified(&self, n: usize, prec: Prec) -> Result<Vec<(u64, CertScalar)>, ArithError> {
        self.certified(&self.zs[n - 1], n, prec)
    }

    pub fn u_certified(&self, n: usize, prec: Prec) -> Result<Vec<(u64, CertScalar)>, ArithError> {
        self.certified(&self.us[n - 1], n, prec)
    }

    pub fn v_certified(&self, n: usize, prec: Prec) -> Result<Vec<(u64, CertScalar)>, ArithError> {
        self.certified(&self.vs[n - 1], n, prec)
    }

    fn certified(
        &self,
        reduced: &FiniteVector,
        n: usize,
        prec: Prec,
    ) -> Result<Vec<(u64, CertScalar)>, ArithError> {
        let one = Rat::one();
        let mut out = Vec::new();
        for (pos, c) in reduced.iter() {
            let block = self.stages[n - 1]
                .blocks
                .iter()
                .find(|b| b.range.contains(pos))
                .expect("reduced entries lie in stage blocks");
            let fj = f_eval(block.j, &one, prec)?;
            out.push((pos, fj.scale(c, prec)));
        }
        Ok(out)
    }

    /// Exact value z*_t(x) for a family functional against a reduced
    /// vector of stage `n`: the functional's 1/f(j) cancels the block's
    /// stripped f(j), leaving plain rational pairing. Errors if the
    /// functional strays outside the block it was built for.
    fn exact_pairing(
        &self,
        t_func: &FunctionalTree,
        t_block: (usize, usize),
        reduced: &FiniteVector,
    ) -> Result<Rat, IntertwineError> {
        let FunctionalTree::Average { children } = t_func else {
            return Err(IntertwineError::Invalid("family functionals are averages".into()));
        };
        let block = &self.stages[t_block.0 - 1].blocks[t_block.1];
        if children.len() as u64 != block.j {
            return Err(IntertwineError::Invalid(
                "functional arity does not match its block".into(),
            ));
        }
        let mut acc = Rat::zero();
        for leaf in children {
            let FunctionalTree::Leaf { position, coeff } = leaf else {
                return Err(IntertwineError::Invalid("family leaves are unit leaves".into()));
            };
            if !block.range.contains(*position) {
                return Err(IntertwineError::Invalid("leaf outside its block".into()));
            }
            acc += coeff * reduced.coeff(*position);
        }
        Ok(acc)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct E65FamilyReport {
    pub key: FamilyKey,
    /// (a) support containment in the designated block union
    pub a_support: bool,
    /// (b) z*_t in A*_j ∩ Q (grammar-valid average of arity j)
    pub b_membership: bool,
    /// (c) z*_t(u) = z*_t(v) = ½·z*_t(z), exact rational
    pub c_equalities: bool,
    /// (c) z*_t(z(i_t,r_t))·ρ_t >= 1/(2D), exact rational comparison
    pub c_inequality: Verdict,
    /// (d) j_{2q(r_t)} = σ(prefix) for every t >= 2
    pub d_sigma_linkage: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct E65Report {
    pub families: Vec<E65FamilyReport>,
    pub all_equalities: bool,
    pub all_linkage: bool,
}

/// Verifies Eq. 6.5 for every certificate family of the construction.
pub fn check_e65(c: &IntertwinedConstruction, prec: Prec) -> Result<E65Report, IntertwineError> {
    c.sigma_replay()?;
    let half = Rat::new(1.into(), 2.into());
    let inv2d = Rat::one() / (Rat::from_integer(2.into()) * &c.d);
    let mut out = Vec::new();
    for fam in &c.families {
        let mut a_support = true;
        let mut b_membership = true;
        let mut c_equalities = true;
        let mut c_inequality = Verdict::Holds;
        let mut d_sigma_linkage = true;
        let mut detail = String::new();
        for (t, func) in fam.functionals.iter().enumerate() {
            let (stage_i, r) = fam.blocks[t];
            let block = &c.stages[stage_i - 1].blocks[r];
            // (a)
            if let Some(range) = func.range() {
                if range.lo < block.range.lo || range.hi > block.range.hi {
                    a_support = false;
                }
            } else {
                a_support = false;
            }
            // (b): grammar validity of the average + arity j
            let rep = crate::gm::validate_certificate(func, &c.params, prec)?;
            if !rep.valid {
                b_membership = false;
            }
            // (c)
            let vz = c.exact_pairing(func, (stage_i, r), &c.zs[stage_i - 1])?;
            let vu = c.exact_pairing(func, (stage_i, r), &c.us[stage_i - 1])?;
            let vv = c.exact_pairing(func, (stage_i, r), &c.vs[stage_i - 1])?;
            if vu != vv || vu != &half * &vz {
                c_equalities = false;
                detail.push_str(&format!("t={}: z*(u)={vu} z*(v)={vv} z*(z)={vz}; ", t + 1));
            }
            let signed = &vz * Rat::from_integer(fam.key.signs[t].into());
            if signed < inv2d && c_inequality == Verdict::Holds {
                c_inequality = Verdict::Fails;
                detail.push_str(&format!(
                    "t={}: ρ·z*(z) = {signed} < 1/(2D) = {inv2d}; ",
                    t + 1
                ));
            }
            // (d)
            if t >= 1 {
                let code = c.params.sigma.code(&fam.functionals[..t], &c.params.j)?;
                if code.value != block.j {
                    d_sigma_linkage = false;
                    detail.push_str(&format!(
                        "t={}: σ(prefix) = {} but block j = {}; ",
                        t + 1,
                        code.value,
                        block.j
                    ));
                }
            }
        }
        out.push(E65FamilyReport {
            key: fam.key.clone(),
            a_support,
            b_membership,
            c_equalities,
            c_inequality,
            d_sigma_linkage,
            detail,
        });
    }
    let all_equalities = out.iter().all(|f| f.c_equalities && f.a_support && f.b_membership);
    let all_linkage = out.iter().all(|f| f.d_sigma_linkage);
    Ok(E65Report { families: out, all_equalities, all_linkage })
}

#[derive(Clone, Debug, Serialize)]
pub struct E69Report {
    pub m: usize,
    /// certified value of z*(Σ a_s z_{n_s}) = exact inner / sqrt(f(m))
    pub value: CertScalar,
    /// certified bound (1/(D·sqrt(f(m))))·Σ|a_s|
    pub bound: CertScalar,
    /// the sqrt-free exact comparison: Σ a_s·z*_s(z) vs (1/D)Σ|a_s|
    pub exact_inner: String,
    pub exact_bound: String,
    /// value >= bound, decided exactly (sqrt(f(m)) cancels)
    pub holds: bool,
    /// value <= ℓ1 upper bound of the GM norm (certified)
    pub below_upper: Verdict,
}

/// Assembles the Γ*-style certificate for coefficients `a` at stage
/// indices `indices` and verifies the Eq. 6.9 lower bound.
pub fn check_e69(
    c: &IntertwinedConstruction,
    coeffs: &[Rat],
    indices: &[usize],
    prec: Prec,
) -> Result<E69Report, IntertwineError> {
    if coeffs.len() != indices.len() || coeffs.is_empty() {
        return Err(IntertwineError::Invalid("need equally many coefficients and indices".into()));
    }
    if indices.windows(2).any(|w| w[0] >= w[1]) {
        return Err(IntertwineError::Invalid("indices must be increasing".into()));
    }
    if *indices.last().unwrap() > c.n_count() {
        return Err(IntertwineError::FamilyMissing(indices.to_vec()));
    }
    c.sigma_replay()?;
    let key = FamilyKey {
        indices: indices.to_vec(),
        signs: coeffs.iter().map(sign_of).collect(),
    };
    let fam = c
        .family(&key)
        .ok_or_else(|| IntertwineError::FamilyMissing(indices.to_vec()))?;
    let m = coeffs.len();

    // exact sqrt-free inner values: Σ a_s·z*_s(z_{n_s}) vs (1/D)Σ|a_s|
    let mut inner = Rat::zero();
    let mut l1_upper = CertScalar::zero();
    let one = Rat::one();
    for (t, (&n, a)) in indices.iter().zip(coeffs).enumerate() {
        inner += a * c.exact_pairing(&fam.functionals[t], fam.blocks[t], &c.zs[n - 1])?;
        // ℓ1 norm of a·z_n (true coefficients): Σ_r |a|·f(j_r)/D·(base ℓ1)
        for (pos, red) in c.zs[n - 1].iter() {
            let block = c.stages[n - 1]
                .blocks
                .iter()
                .find(|b| b.range.contains(pos))
                .expect("entries lie in blocks");
            let fj = f_eval(block.j, &one, prec)?;
            l1_upper = l1_upper.add(&fj.scale(&(a.abs() * red.abs()), prec), prec);
        }
    }
    let exact_bound = coeffs.iter().map(|a| a.abs()).sum::<Rat>() / &c.d;
    let holds = inner >= exact_bound;

    let sfm = sqrt_f_eval(m as u64, prec)?;
    let value = CertScalar::from_rat(&inner, prec).div(&sfm, prec)?;
    let bound = CertScalar::from_rat(&exact_bound, prec).div(&sfm, prec)?;
    // value <= ‖Σ a_s z_{n_s}‖_l1 (every grammar functional has
    // coefficients in [-1,1], so this dominates the GM norm)
    let below_upper = l1_upper.certify_ge(&value);
    Ok(E69Report {
        m,
        value,
        bound,
        exact_inner: format_rat(&inner),
        exact_bound: format_rat(&exact_bound),
        holds,
        below_upper,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct RatioReport {
    pub m: usize,
    /// certified interval for ‖Σ(u−v)‖ / ‖Σ(u+v)‖ — REPORT ONLY
    pub ratio_lo: String,
    pub ratio_hi: String,
    pub note: String,
}

/// Computes bounds on the ratio ‖Σ_{s<=m}(u_s−v_s)‖ / ‖Σ_{s<=m}(u_s+v_s)‖.
/// The paper's smallness claim needs parameters beyond desk scale, so no
/// threshold is asserted. Norm bounds: ℓ1 above; DP lower on supports
/// small enough, sup-norm otherwise.
pub fn ratio_report(
    c: &IntertwinedConstruction,
    m: usize,
    prec: Prec,
) -> Result<RatioReport, IntertwineError> {
    if m < 1 || m > c.n_count() {
        return Err(IntertwineError::Invalid(format!("m = {m} out of range")));
    }
    let bounds = |vecs: &[FiniteVector], sign: i8| -> Result<(Rat, Rat), IntertwineError> {
        // Σ_s (u_s ± v_s) in certified true coefficients
        let mut entries: Vec<(u64, CertScalar)> = Vec::new();
        for n in 1..=m {
            let mut part = c.u_certified(n, prec)?;
            let other = c.certified(&vecs[n - 1], n, prec)?;
            if sign < 0 {
                part.extend(other.into_iter().map(|(p, v)| (p, v.neg())));
            } else {
                part.extend(other);
            }
            entries.extend(part);
        }
        entries.sort_by_key(|(p, _)| *p);
        let mut l1 = CertScalar::zero();
        let mut sup = CertScalar::zero();
        for (_, v) in &entries {
            l1 = l1.add(&v.abs(), prec);
            sup = sup.max_envelope(&v.abs());
        }
        let mut lower = sup.lo_rat();
        if entries.len() <= 36 {
            let opts = NormOptions::with_precision(prec);
            let r = norm_s_cert(&entries, &opts)?;
            if r.value.lo_rat() > lower {
                lower = r.value.lo_rat();
            }
        }
        Ok((lower, l1.hi_rat()))
    };
    let (num_lo, num_hi) = bounds(&c.vs, -1)?;
    let (den_lo, den_hi) = bounds(&c.vs, 1)?;
    if !den_lo.is_positive() {
        return Err(IntertwineError::Invalid("denominator lower bound not positive".into()));
    }
    Ok(RatioReport {
        m,
        ratio_lo: format_rat(&(num_lo / &den_hi)),
        ratio_hi: format_rat(&(num_hi / &den_lo)),
        note: "report only: the paper's smallness needs f(m) >= 50/eps^2-scale parameters"
            .into(),
    })
}

/// Convenience: the concrete toy J used by the n_count = 3 tests — long
/// enough for 11 sigma slots and 262 base elements.
pub fn default_toy_j() -> Vec<u64> {
    (1..=22).map(|i| 2 * i).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gm::EpsSeq;
    use num_bigint::BigInt;

    fn rat(n: i64, d: i64) -> Rat {
        Rat::new(BigInt::from(n), BigInt::from(d))
    }

    fn toy_params() -> GMParams {
        GMParams::toy(EpsSeq::cubic(2, 2).unwrap(), default_toy_j(), 2, 0).unwrap()
    }

    fn build(n: usize) -> IntertwinedConstruction {
        build_construction(toy_params(), &unit_base(300), n, Rat::one()).unwrap()
    }

    #[test]
    fn stage_one_matches_half_split_yardstick() {
        let c = build(1);
        // z_1 = (1/D) y(j_2) with j_2 = 4: reduced coeffs 1/4 on coords 1..4
        assert_eq!(c.stages[0].blocks.len(), 1);
        assert_eq!(c.stages[0].blocks[0].j, 4);
        assert_eq!(c.zs[0].support(), vec![1, 2, 3, 4]);
        assert_eq!(c.zs[0].coeff(1), rat(1, 4));
        assert_eq!(c.us[0].support(), vec![1, 2]);
        assert_eq!(c.vs[0].support(), vec![3, 4]);
        // u_1 true coefficient is f(4)/4 = 1/2·... certified check
        let u = c.u_certified(1, Prec::DEFAULT).unwrap();
        assert_eq!(u.len(), 2);
        // f(4)/4 ≈ 0.5805
        assert!(u[0].1.lo_rat() > rat(58, 100));
        assert!(u[0].1.hi_rat() < rat(59, 100));
        // two families (ι=(1), ρ=±1)
        assert_eq!(c.families.len(), 2);
    }

    #[test]
    fn z_equals_u_plus_v_exactly() {
        let c = build(3);
        for n in 0..3 {
            assert_eq!(c.us[n].add(&c.vs[n]), c.zs[n]);
            assert!(c.us[n].support().iter().all(|p| c.vs[n].coeff(*p) == Rat::zero()));
        }
    }

    #[test]
    fn family_counts_and_stage_sizes() {
        let c = build(3);
        // 3^3 − 1 = 26 families; stage sizes l_1 = 1, l_2 = 2, l_3 = 8
        assert_eq!(c.families.len(), 26);
        assert_eq!(c.stages[0].blocks.len(), 1);
        assert_eq!(c.stages[1].blocks.len(), 2);
        assert_eq!(c.stages[2].blocks.len(), 8);
        let c2 = build(2);
        assert_eq!(c2.families.len(), 8); // Σ_{l<=2} C(2,l)2^l
    }

    #[test]
    fn prefix_stability() {
        let c2 = build(2);
        let c3 = build(3);
        assert_eq!(c2.zs, c3.zs[..2]);
        assert_eq!(c2.us, c3.us[..2]);
        assert_eq!(c2.stages, c3.stages[..2]);
        for f in &c2.families {
            assert_eq!(c3.family(&f.key), Some(f));
        }
    }

    #[test]
    fn e65_all_checks_pass() {
        let c = build(3);
        let rep = check_e65(&c, Prec::DEFAULT).unwrap();
        assert_eq!(rep.families.len(), 26);
        assert!(rep.all_equalities, "{:?}", rep.families.iter().find(|f| !f.c_equalities));
        assert!(rep.all_linkage);
        for f in &rep.families {
            assert_eq!(f.c_inequality, Verdict::Holds, "{f:?}");
        }
    }

    #[test]
    fn e65_sign_flip_fails_inequality() {
        let mut c = build(2);
        // flip the recorded sign of one family without flipping its
        // functional: ρ·z*(z) becomes −1/D < 1/(2D)
        let idx = 0;
        c.families[idx].key.signs[0] *= -1;
        let rep = check_e65(&c, Prec::DEFAULT).unwrap();
        assert_eq!(rep.families[idx].c_inequality, Verdict::Fails);
    }

    #[test]
    fn e69_lower_bound_all_sign_patterns() {
        let c = build(3);
        for (a1, a2, a3) in [(1, 1, 1), (1, -1, 1), (-1, 1, -1), (-2, 3, -1)] {
            let coeffs = vec![rat(a1, 1), rat(a2, 1), rat(a3, 1)];
            let rep = check_e69(&c, &coeffs, &[1, 2, 3], Prec::DEFAULT).unwrap();
            assert!(rep.holds, "{rep:?}");
            assert_eq!(rep.below_upper, Verdict::Holds);
        }
        // m = 1 reduces to z*_1(z_1) >= 1/D
        let rep = check_e69(&c, &[rat(1, 1)], &[1], Prec::DEFAULT).unwrap();
        assert!(rep.holds);
        assert_eq!(rep.exact_inner, rep.exact_bound); // τ = 1 on unit base
    }

    #[test]
    fn e69_missing_family_errors() {
        let c = build(2);
        match check_e69(&c, &[rat(1, 1)], &[3], Prec::DEFAULT) {
            Err(IntertwineError::FamilyMissing(v)) => assert_eq!(v, vec![3]),
            other => panic!("expected missing family, got {other:?}"),
        }
    }

    #[test]
    fn functionals_annihilate_w() {
        // Eq. 6.5(c) equalities imply z*(u − v) = 0 exactly
        let c = build(2);
        for fam in &c.families {
            for (t, func) in fam.functionals.iter().enumerate() {
                let (n, r) = fam.blocks[t];
                let w = c.us[n - 1].sub(&c.vs[n - 1]);
                assert_eq!(c.exact_pairing(func, (n, r), &w).unwrap(), Rat::zero());
            }
        }
    }

    #[test]
    fn ratio_report_contains_one_at_m1() {
        let c = build(1);
        let rep = ratio_report(&c, 1, Prec::DEFAULT).unwrap();
        let lo = parse_rat(&rep.ratio_lo).unwrap();
        let hi = parse_rat(&rep.ratio_hi).unwrap();
        assert!(lo.is_positive());
        assert!(lo <= Rat::one() && hi >= Rat::one(), "[{lo}, {hi}]");
    }

    #[test]
    fn base_exhaustion_names_resources() {
        match build_construction(toy_params(), &unit_base(3), 1, Rat::one()) {
            Err(IntertwineError::BaseExhausted { stage: 1, needed: 4, available: 3 }) => {}
            other => panic!("expected base exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn json_round_trip_and_replay() {
        let c = build(2);
        let s = serde_json::to_string(&c).unwrap();
        let back: IntertwinedConstruction = serde_json::from_str(&s).unwrap();
        assert_eq!(back.zs, c.zs);
        assert_eq!(back.families, c.families);
        // fresh sigma state must replay to the same linkage
        let rep = check_e65(&back, Prec::DEFAULT).unwrap();
        assert!(rep.all_linkage);
        assert!(rep.all_equalities);
    }
}

//! The σ-coder: a deterministic injective map from finite sequences of
//! grammar functionals (canonically serialized) into the even positions
//! {j_2, j_4, …} of J. The paper requires only that such a map exists;
//! first-free-slot assignment over a memo table realizes one.

use std::collections::HashMap;
use std::sync::Mutex;

use super::params::{approx, EpsSeq, JSpec};
use super::GmError;
use crate::arith::{f_eval, ArithError, CertScalar, Prec, Rat, Verdict};
use crate::certificates::FunctionalTree;

#[derive(Clone, Debug, Default)]
struct SigmaState {
    memo: HashMap<String, u64>,
    next_slot: u64,
}

/// Opaque snapshot of the coder state (used to make speculative chains
/// side-effect free during toy-mode enumeration).
pub struct SigmaSnapshot(SigmaState);

#[derive(Debug)]
pub struct SigmaCoder {
    state: Mutex<SigmaState>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaCode {
    /// slot t (t-th distinct sequence seen)
    pub slot: u64,
    /// position in J: 2t
    pub j_index: u64,
    /// the concrete element j_(2t) (toy mode)
    pub value: u64,
}

fn canonical_key(seq: &[FunctionalTree]) -> String {
    // serde_json over Vec/BTreeMap-backed trees is deterministic
    serde_json::to_string(seq).expect("functional trees always serialize")
}

impl SigmaCoder {
    pub fn new() -> Self {
        SigmaCoder { state: Mutex::new(SigmaState { memo: HashMap::new(), next_slot: 1 }) }
    }

    /// σ(z*_1, …, z*_i): the memoized even J-position of the sequence.
    /// Distinct keys get distinct slots by construction, so injectivity
    /// cannot fail; repeated calls are stable.
    pub fn code(&self, seq: &[FunctionalTree], j: &JSpec) -> Result<SigmaCode, GmError> {
        let key = canonical_key(seq);
        let slot = {
            let mut st = self.state.lock().unwrap();
            match st.memo.get(&key) {
                Some(&s) => s,
                None => {
                    let s = st.next_slot;
                    st.next_slot += 1;
                    st.memo.insert(key, s);
                    s
                }
            }
        };
        let j_index = 2 * slot;
        let value = j.value(j_index)?;
        Ok(SigmaCode { slot, j_index, value })
    }

    /// Reserves all slots up to and including `slot`, so future fresh
    /// sequences code past them.
    pub fn advance_past(&self, slot: u64) {
        let mut st = self.state.lock().unwrap();
        if st.next_slot <= slot {
            st.next_slot = slot + 1;
        }
    }

    pub fn assigned(&self) -> usize {
        self.state.lock().unwrap().memo.len()
    }

    pub fn snapshot(&self) -> SigmaSnapshot {
        SigmaSnapshot(self.state.lock().unwrap().clone())
    }

    pub fn restore(&self, snap: &SigmaSnapshot) {
        *self.state.lock().unwrap() = snap.0.clone();
    }
}

impl Default for SigmaCoder {
    fn default() -> Self {
        SigmaCoder::new()
    }
}

impl Clone for SigmaCoder {
    fn clone(&self) -> Self {
        SigmaCoder { state: Mutex::new(self.state.lock().unwrap().clone()) }
    }
}

/// Eq. 2.10: ε_N·f(σ(z*_1…z*_i)) >= N with N the maximal support of the
/// sequence. At toy scale this generally fails (ε decays faster than f
/// grows); the verdict is certified either way.
pub fn check_eq_2_10(
    seq: &[FunctionalTree],
    code: &SigmaCode,
    eps: &EpsSeq,
    prec: Prec,
) -> Result<(Verdict, String), ArithError> {
    let n = seq
        .iter()
        .filter_map(|t| t.range().map(|r| r.hi))
        .max()
        .unwrap_or(0);
    if n == 0 {
        return Ok((Verdict::Holds, "empty sequence: vacuous".into()));
    }
    if n >= 64 {
        // ε_N <= 2^-N (standard condition, certified symbolically) and
        // f(j) < 64 for any representable j, so the left side is < 1 <= N.
        return Ok((
            Verdict::Fails,
            format!("ε_{n} <= 2^-{n} forces ε_N·f(j) < 1 <= N for representable j"),
        ));
    }
    let lhs = f_eval(code.value, &Rat::from_integer(1.into()), prec)?
        .scale(&eps.term(n), prec);
    let target = Rat::from_integer(n.into());
    let verdict = lhs.certify_ge(&CertScalar::from_rat(&target, prec));
    Ok((
        verdict,
        format!("ε_{n}·f({}) = {} vs N = {n}", code.value, approx(&lhs.hi_rat())),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn leaf(p: u64) -> FunctionalTree {
        FunctionalTree::leaf(p, Rat::new(BigInt::from(1), BigInt::from(1)))
    }

    fn toy_j() -> JSpec {
        JSpec::toy(vec![2, 4, 6, 8, 10, 12]).unwrap()
    }

    #[test]
    fn deterministic_and_memoized() {
        let s = SigmaCoder::new();
        let j = toy_j();
        let a = s.code(&[leaf(1)], &j).unwrap();
        let b = s.code(&[leaf(2)], &j).unwrap();
        let a2 = s.code(&[leaf(1)], &j).unwrap();
        assert_eq!(a, a2);
        assert_ne!(a.slot, b.slot);
        assert_eq!(a.value, 4); // first slot -> j_2 = 4
        assert_eq!(b.value, 8); // second slot -> j_4 = 8
    }

    #[test]
    fn empty_sequence_has_fixed_index() {
        let s = SigmaCoder::new();
        let j = toy_j();
        let a = s.code(&[], &j).unwrap();
        assert_eq!(a, s.code(&[], &j).unwrap());
    }

    #[test]
    fn j_exhaustion_names_sizes() {
        let s = SigmaCoder::new();
        let j = JSpec::toy(vec![2, 4]).unwrap();
        s.code(&[leaf(1)], &j).unwrap(); // j_2 = 4
        match s.code(&[leaf(2)], &j) {
            Err(GmError::JExhausted { needed: 4, available: 2 }) => {}
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn advance_past_reserves_slots() {
        let s = SigmaCoder::new();
        let j = toy_j();
        s.advance_past(2);
        let a = s.code(&[leaf(1)], &j).unwrap();
        assert_eq!(a.slot, 3);
        assert_eq!(a.value, 12); // j_6
    }

    #[test]
    fn snapshot_restore_round_trip() {
        let s = SigmaCoder::new();
        let j = toy_j();
        s.code(&[leaf(1)], &j).unwrap();
        let snap = s.snapshot();
        s.code(&[leaf(2)], &j).unwrap();
        assert_eq!(s.assigned(), 2);
        s.restore(&snap);
        assert_eq!(s.assigned(), 1);
        // after restore, the next fresh key takes the freed slot again
        assert_eq!(s.code(&[leaf(3)], &j).unwrap().value, 8);
    }

    #[test]
    fn injective_over_corpus() {
        use std::collections::HashSet;
        let s = SigmaCoder::new();
        let j = JSpec::toy((1..=30_000).map(|i| 2 * i).collect()).unwrap();
        let mut seen = HashSet::new();
        for i in 0..10_000u64 {
            // distinct sequences: vary position and length
            let seq: Vec<_> = (0..=(i % 3)).map(|t| leaf(3 * i + t + 1)).collect();
            let code = s.code(&seq, &j).unwrap();
            assert!(seen.insert(code.j_index), "collision at {i}");
        }
        assert_eq!(seen.len(), 10_000);
    }

    #[test]
    fn eq_2_10_flagged_at_toy_scale() {
        let s = SigmaCoder::new();
        let j = toy_j();
        let eps = EpsSeq::geometric(4, 1).unwrap();
        let seq = vec![leaf(5)];
        let code = s.code(&seq, &j).unwrap();
        let (v, detail) = check_eq_2_10(&seq, &code, &eps, Prec::DEFAULT).unwrap();
        // ε_5·f(4) = 4^-6·2 « 5
        assert_eq!(v, Verdict::Fails);
        assert!(detail.contains("vs N = 5"));
    }
}

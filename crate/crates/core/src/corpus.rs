//! Seeded random vector corpora for property testing and batch
//! verification. Fixed seed ⇒ identical corpus, independent of thread
//! count (generation is sequential; only norm evaluation parallelizes).

use num_bigint::BigInt;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::arith::{ArithError, Rat};
use crate::norm_s::{norm_s, NormOptions, NormResult};
use crate::vectors::FiniteVector;

#[derive(Clone, Debug)]
pub struct CorpusSpec {
    pub count: usize,
    /// support sizes drawn uniformly from 1..=max_support
    pub max_support: usize,
    /// positions drawn from 1..=position_span
    pub position_span: u64,
    /// numerators in -denom_bound..=denom_bound, denominators in 1..=denom_bound
    pub denom_bound: i64,
    pub seed: u64,
}

impl CorpusSpec {
    pub fn standard(count: usize, max_support: usize, seed: u64) -> Self {
        CorpusSpec {
            count,
            max_support,
            position_span: 4 * max_support as u64 + 8,
            denom_bound: 9,
            seed,
        }
    }
}

/// Deterministic corpus of nonzero rational vectors.
pub fn random_vectors(spec: &CorpusSpec) -> Vec<FiniteVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    (0..spec.count).map(|_| random_vector(spec, &mut rng)).collect()
}

fn random_vector(spec: &CorpusSpec, rng: &mut ChaCha8Rng) -> FiniteVector {
    loop {
        let support = rng.gen_range(1..=spec.max_support.min(spec.position_span as usize));
        let positions = distinct_positions(rng, support, spec.position_span);
        let entries: Vec<(u64, Rat)> = positions
            .into_iter()
            .map(|p| (p, random_rat(rng, spec.denom_bound)))
            .filter(|(_, c)| !c.is_zero())
            .collect();
        if !entries.is_empty() {
            return FiniteVector::from_entries(entries).expect("positions are distinct");
        }
    }
}

fn distinct_positions(rng: &mut ChaCha8Rng, count: usize, span: u64) -> Vec<u64> {
    let mut out = std::collections::BTreeSet::new();
    while out.len() < count {
        out.insert(rng.gen_range(1..=span));
    }
    out.into_iter().collect()
}

fn random_rat(rng: &mut ChaCha8Rng, bound: i64) -> Rat {
    let num = rng.gen_range(-bound..=bound);
    let den = rng.gen_range(1..=bound);
    Rat::new(BigInt::from(num), BigInt::from(den))
}

/// Relocates the support of `x` onto fresh strictly increasing positions
/// within `1..=span`, preserving coefficient order (a spreading move).
pub fn relocate(x: &FiniteVector, span: u64, rng: &mut ChaCha8Rng) -> FiniteVector {
    let n = x.support_len();
    let positions = distinct_positions(rng, n, span.max(n as u64));
    let entries: Vec<(u64, Rat)> = positions
        .into_iter()
        .zip(x.iter().map(|(_, c)| c.clone()))
        .collect();
    FiniteVector::from_entries(entries).expect("positions are distinct")
}

/// Norms of a batch, in input order; parallel when the feature and the
/// options allow it.
pub fn batch_norms(
    xs: &[FiniteVector],
    opts: &NormOptions,
) -> Result<Vec<NormResult>, ArithError> {
    #[cfg(feature = "parallel")]
    if opts.parallel {
        return xs.par_iter().map(|x| norm_s(x, opts)).collect();
    }
    xs.iter().map(|x| norm_s(x, opts)).collect()
}

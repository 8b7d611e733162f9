//! The implicit Schlumprecht norm by dynamic programming over
//! successive-interval partitions, with extremal certificate extraction.
//!
//! After compacting the support to positions `1..n` (justified by the
//! 1-spreading invariant), the recursion is
//!
//! ```text
//! N[i,j]   = max( max_k |x_k|, max_{2<=l<=j-i+1} M_l[i,j] / f(l) )
//! M_1[i,j] = N[i,j]
//! M_l[i,j] = max_m M_{l-1}[i,m] + N[m+1,j]
//! ```
//!
//! Every `M_l` piece is strictly shorter than its interval, so the
//! recursion is well-founded without fixed-point iteration. Values are
//! carried as enclosure envelopes (pointwise max of lower and upper
//! bounds), which never requires an interval comparison; back-pointers
//! follow the branch with the largest certified lower bound, ties broken
//! toward smaller `l`, then the earliest split.

use num_traits::Signed;
use serde::Serialize;

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::arith::{f_eval, ArithError, CertScalar, Prec, Rat};
use crate::certificates::FunctionalTree;
use crate::vectors::FiniteVector;

#[derive(Clone, Copy, Debug)]
pub struct NormOptions {
    pub precision: Prec,
    pub parallel: bool,
}

impl Default for NormOptions {
    fn default() -> Self {
        NormOptions { precision: Prec::DEFAULT, parallel: cfg!(feature = "parallel") }
    }
}

impl NormOptions {
    pub fn sequential() -> Self {
        NormOptions { parallel: false, ..Default::default() }
    }

    pub fn with_precision(prec: Prec) -> Self {
        NormOptions { precision: prec, ..Default::default() }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct NormResult {
    pub value: CertScalar,
    pub certificate: FunctionalTree,
    pub argmax_l: Option<u64>,
}

/// One signed coefficient handed to the DP: certified absolute value plus
/// the sign that recovers it from the original coordinate.
#[derive(Clone, Debug)]
struct Entry {
    orig_pos: u64,
    abs: CertScalar,
    sign: i8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Choice {
    /// sup-norm branch: the single coordinate index (0-based into entries)
    Single(usize),
    /// averaging branch with `l` pieces
    Split(usize),
}

struct Cell {
    n_val: CertScalar,
    n_choice: Choice,
    /// m_vals[l-1] = M_l for this interval
    m_vals: Vec<CertScalar>,
    /// m_split[l-1] = chosen split point (0-based, inclusive end of the
    /// first l-1 pieces); unused at l = 1
    m_split: Vec<usize>,
}

/// Certified Schlumprecht norm of a rational vector.
pub fn norm_s(x: &FiniteVector, opts: &NormOptions) -> Result<NormResult, ArithError> {
    let entries: Vec<Entry> = x
        .iter()
        .map(|(pos, c)| Entry {
            orig_pos: pos,
            abs: CertScalar::from_rat(&c.abs(), opts.precision),
            sign: if c.is_negative() { -1 } else { 1 },
        })
        .collect();
    norm_entries(&entries, opts)
}

/// Certified Schlumprecht norm for coefficients that are themselves
/// enclosures (yardstick levels `f(m)/m` are irrational in general).
/// Coefficients must have a definite sign; an enclosure straddling zero is
/// treated by its absolute-value hull with positive sign.
pub fn norm_s_cert(
    coeffs: &[(u64, CertScalar)],
    opts: &NormOptions,
) -> Result<NormResult, ArithError> {
    let mut sorted = coeffs.to_vec();
    sorted.sort_by_key(|(p, _)| *p);
    let entries: Vec<Entry> = sorted
        .iter()
        .map(|(pos, c)| Entry {
            orig_pos: *pos,
            abs: c.abs(),
            sign: if c.hi().is_negative() { -1 } else { 1 },
        })
        .collect();
    norm_entries(&entries, opts)
}

fn norm_entries(entries: &[Entry], opts: &NormOptions) -> Result<NormResult, ArithError> {
    let n = entries.len();
    if n == 0 {
        return Ok(NormResult {
            value: CertScalar::zero(),
            certificate: FunctionalTree::leaf(1, Rat::from_integer(0.into())),
            argmax_l: None,
        });
    }
    let prec = opts.precision;
    // f(l) for l = 1..=n, index l-1
    let f: Vec<CertScalar> = (1..=n as u64)
        .map(|l| f_eval(l, &Rat::from_integer(1.into()), prec))
        .collect::<Result<_, _>>()?;

    // cells indexed by (i, j), i <= j, 0-based
    let idx = |i: usize, j: usize| i * n + j;
    let mut cells: Vec<Option<Cell>> = Vec::new();
    cells.resize_with(n * n, || None);

    for len in 1..=n {
        let starts: Vec<usize> = (0..=(n - len)).collect();
        let compute = |&i: &usize| -> Result<(usize, Cell), ArithError> {
            let j = i + len - 1;
            Ok((i, compute_cell(entries, &cells, &f, i, j, n, prec)?))
        };
        #[cfg(feature = "parallel")]
        let results: Vec<(usize, Cell)> = if opts.parallel && len > 1 {
            starts
                .par_iter()
                .map(compute)
                .collect::<Result<Vec<_>, _>>()?
        } else {
            starts.iter().map(compute).collect::<Result<Vec<_>, _>>()?
        };
        #[cfg(not(feature = "parallel"))]
        let results: Vec<(usize, Cell)> =
            starts.iter().map(compute).collect::<Result<Vec<_>, _>>()?;
        for (i, cell) in results {
            cells[idx(i, i + len - 1)] = Some(cell);
        }
    }

    let top = cells[idx(0, n - 1)].as_ref().unwrap();
    let certificate = build_certificate(entries, &cells, 0, n - 1, n);
    let argmax_l = match top.n_choice {
        Choice::Single(_) => None,
        Choice::Split(l) => Some(l as u64),
    };
    Ok(NormResult { value: top.n_val.clone(), certificate, argmax_l })
}

fn compute_cell(
    entries: &[Entry],
    cells: &[Option<Cell>],
    f: &[CertScalar],
    i: usize,
    j: usize,
    n: usize,
    prec: Prec,
) -> Result<Cell, ArithError> {
    let idx = |a: usize, b: usize| a * n + b;
    let len = j - i + 1;
    if len == 1 {
        return Ok(Cell {
            n_val: entries[i].abs.clone(),
            n_choice: Choice::Single(i),
            m_vals: vec![entries[i].abs.clone()],
            m_split: vec![0],
        });
    }

    // sup branch
    let mut sup = entries[i].abs.clone();
    let mut sup_k = i;
    for k in (i + 1)..=j {
        if entries[k].abs.lo() > sup.lo() {
            sup_k = k;
        }
        sup = sup.max_envelope(&entries[k].abs);
    }

    // M_l for l = 2..=len, built from strictly shorter intervals
    let mut m_vals: Vec<CertScalar> = Vec::with_capacity(len);
    let mut m_split: Vec<usize> = Vec::with_capacity(len);
    // placeholder for l = 1 (filled after N is known)
    m_vals.push(CertScalar::zero());
    m_split.push(0);
    for l in 2..=len {
        let mut best: Option<CertScalar> = None;
        let mut best_m = 0usize;
        for m in (i + l - 2)..=(j - 1) {
            let left = &cells[idx(i, m)].as_ref().unwrap().m_vals[l - 2];
            let right = &cells[idx(m + 1, j)].as_ref().unwrap().n_val;
            let cand = left.add(right, prec);
            best = Some(match best {
                None => {
                    best_m = m;
                    cand
                }
                Some(b) => {
                    if cand.lo() > b.lo() {
                        best_m = m;
                    }
                    b.max_envelope(&cand)
                }
            });
        }
        m_vals.push(best.unwrap());
        m_split.push(best_m);
    }

    // N = max(sup, max_l M_l / f(l))
    let mut n_val = sup.clone();
    let mut n_choice = Choice::Single(sup_k);
    for l in 2..=len {
        let v = m_vals[l - 1].div(&f[l - 1], prec)?;
        if v.lo() > n_val.lo() {
            n_choice = Choice::Split(l);
        }
        n_val = n_val.max_envelope(&v);
    }
    m_vals[0] = n_val.clone();
    Ok(Cell { n_val, n_choice, m_vals, m_split })
}

fn build_certificate(
    entries: &[Entry],
    cells: &[Option<Cell>],
    i: usize,
    j: usize,
    n: usize,
) -> FunctionalTree {
    let idx = |a: usize, b: usize| a * n + b;
    let cell = cells[idx(i, j)].as_ref().unwrap();
    match cell.n_choice {
        Choice::Single(k) => FunctionalTree::leaf(
            entries[k].orig_pos,
            Rat::from_integer(entries[k].sign.into()),
        ),
        Choice::Split(l) => {
            let mut pieces: Vec<(usize, usize)> = Vec::with_capacity(l);
            collect_pieces(cells, i, j, l, n, &mut pieces);
            let children = pieces
                .into_iter()
                .map(|(a, b)| build_certificate(entries, cells, a, b, n))
                .collect();
            FunctionalTree::average(children)
        }
    }
}

fn collect_pieces(
    cells: &[Option<Cell>],
    i: usize,
    j: usize,
    l: usize,
    n: usize,
    out: &mut Vec<(usize, usize)>,
) {
    if l == 1 {
        out.push((i, j));
        return;
    }
    let m = cells[i * n + j].as_ref().unwrap().m_split[l - 1];
    collect_pieces(cells, i, m, l - 1, n, out);
    out.push((m + 1, j));
}

/// `‖x‖_l = M_l / f(l)` over the full compacted range; pieces may be fewer
/// than `l` (M_l is monotone in l by the triangle inequality), so `l`
/// larger than the support size uses all-singleton pieces.
pub fn norm_l(x: &FiniteVector, l: u64, opts: &NormOptions) -> Result<CertScalar, ArithError> {
    if l < 2 {
        return Err(ArithError::InvalidArgument("norm_l requires l >= 2".into()));
    }
    let entries: Vec<Entry> = x
        .iter()
        .map(|(pos, c)| Entry {
            orig_pos: pos,
            abs: CertScalar::from_rat(&c.abs(), opts.precision),
            sign: if c.is_negative() { -1 } else { 1 },
        })
        .collect();
    let n = entries.len();
    if n == 0 {
        return Ok(CertScalar::zero());
    }
    let prec = opts.precision;
    // Reuse the DP by running norm_entries' tables; recompute cells here.
    let f_l = f_eval(l, &Rat::from_integer(1.into()), prec)?;
    let eff = (l as usize).min(n);
    let f: Vec<CertScalar> = (1..=n as u64)
        .map(|m| f_eval(m, &Rat::from_integer(1.into()), prec))
        .collect::<Result<_, _>>()?;
    let mut cells: Vec<Option<Cell>> = Vec::new();
    cells.resize_with(n * n, || None);
    for len in 1..=n {
        for i in 0..=(n - len) {
            let j = i + len - 1;
            let cell = compute_cell(&entries, &cells, &f, i, j, n, prec)?;
            cells[i * n + j] = Some(cell);
        }
    }
    let m_val = cells[n - 1].as_ref().unwrap().m_vals[eff - 1].clone();
    m_val.div(&f_l, prec)
}

/// Memo-free reference implementations used as independent oracles in the
/// test suites. Exponential; support sizes <= 6 only.
pub mod oracle {
    use super::*;

    /// Exhaustive recursion over all covering partitions into consecutive
    /// nonempty pieces (the same search space as the DP, no memoization).
    pub fn norm_exhaustive(x: &FiniteVector, prec: Prec) -> Result<CertScalar, ArithError> {
        let coeffs: Vec<Rat> = x.iter().map(|(_, c)| c.abs()).collect();
        norm_rec(&coeffs, prec)
    }

    fn norm_rec(coeffs: &[Rat], prec: Prec) -> Result<CertScalar, ArithError> {
        let n = coeffs.len();
        if n == 0 {
            return Ok(CertScalar::zero());
        }
        let mut best = CertScalar::from_rat(
            coeffs.iter().max().unwrap(),
            prec,
        );
        for l in 2..=n {
            let f_l = f_eval(l as u64, &Rat::from_integer(1.into()), prec)?;
            for cut in compositions(n, l) {
                let mut sum = CertScalar::zero();
                let mut start = 0usize;
                for end in cut {
                    sum = sum.add(&norm_rec(&coeffs[start..end], prec)?, prec);
                    start = end;
                }
                best = best.max_envelope(&sum.div(&f_l, prec)?);
            }
        }
        Ok(best)
    }

    /// All ways to split `0..n` into `l` nonempty consecutive pieces,
    /// given as the list of (exclusive) piece end offsets.
    fn compositions(n: usize, l: usize) -> Vec<Vec<usize>> {
        fn rec(start: usize, n: usize, parts: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if parts == 1 {
                cur.push(n);
                out.push(cur.clone());
                cur.pop();
                return;
            }
            for end in (start + 1)..=(n - parts + 1) {
                cur.push(end);
                rec(end, n, parts - 1, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(0, n, l, &mut Vec::new(), &mut out);
        out
    }

    /// Oracle over ARBITRARY successive subsets (not just intervals), used
    /// to validate the covering-partition reduction on tiny supports.
    pub fn norm_successive_subsets(x: &FiniteVector, prec: Prec) -> Result<CertScalar, ArithError> {
        let coeffs: Vec<Rat> = x.iter().map(|(_, c)| c.abs()).collect();
        subsets_rec(&coeffs, prec)
    }

    fn subsets_rec(coeffs: &[Rat], prec: Prec) -> Result<CertScalar, ArithError> {
        let n = coeffs.len();
        if n == 0 {
            return Ok(CertScalar::zero());
        }
        let mut best = CertScalar::from_rat(coeffs.iter().max().unwrap(), prec);
        // label[i] in 0..=l, nonzero labels weakly increasing: label 0 =
        // skipped, label t = member of subset E_t
        for l in 2..=n {
            let f_l = f_eval(l as u64, &Rat::from_integer(1.into()), prec)?;
            let mut labels = vec![0usize; n];
            loop {
                // check weakly increasing nonzero labels and all l used
                let nz: Vec<usize> = labels.iter().copied().filter(|&t| t > 0).collect();
                let ok = nz.windows(2).all(|w| w[0] <= w[1])
                    && (1..=l).all(|t| nz.contains(&t));
                if ok {
                    let mut sum = CertScalar::zero();
                    for t in 1..=l {
                        let piece: Vec<Rat> = labels
                            .iter()
                            .zip(coeffs)
                            .filter(|(lab, _)| **lab == t)
                            .map(|(_, c)| c.clone())
                            .collect();
                        sum = sum.add(&subsets_rec(&piece, prec)?, prec);
                    }
                    best = best.max_envelope(&sum.div(&f_l, prec)?);
                }
                // odometer over labels base l+1
                let mut pos = 0;
                loop {
                    if pos == n {
                        break;
                    }
                    labels[pos] += 1;
                    if labels[pos] <= l {
                        break;
                    }
                    labels[pos] = 0;
                    pos += 1;
                }
                if pos == n {
                    break;
                }
            }
        }
        Ok(best)
    }
}

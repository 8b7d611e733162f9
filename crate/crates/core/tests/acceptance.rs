//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line (visible with `--nocapture`; a failure panics with the
//! same line).

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gmspace_core::arith::{f_eval, CertScalar, Prec, Rat, Verdict};
use gmspace_core::certificates::{ComboTerm, FunctionalTree};
use gmspace_core::corpus::{random_vectors, relocate, CorpusSpec};
use gmspace_core::gm::{gm_norm, validate_certificate, EpsSeq, GMParams};
use gmspace_core::intertwine::{
    build_construction, check_e65, check_e69, default_toy_j, unit_base,
};
use gmspace_core::norm_s::{norm_l, norm_s, oracle, NormOptions};
use gmspace_core::norms_aux::{
    constant_cpq, dual_coefficient_check_cert, extremal_xl, norm_g_decreasing, triple_norm_g,
    GaugeFunction,
};
use gmspace_core::vectors::FiniteVector;
use gmspace_core::yardstick::{build_yardstick, build_yardstick_unchecked, is_admissible};

fn rat(n: i64, d: i64) -> Rat {
    Rat::new(BigInt::from(n), BigInt::from(d))
}

fn ones(n: u64) -> FiniteVector {
    FiniteVector::dense(1, (0..n).map(|_| Rat::one()))
}

fn finish(criterion: u32, start: Instant, limit_s: f64, detail: &str) {
    let elapsed = start.elapsed().as_secs_f64();
    println!("criterion {criterion}: PASS ({elapsed:.1}s) — {detail}");
    assert!(
        elapsed <= limit_s,
        "criterion {criterion}: FAIL — runtime {elapsed:.1}s exceeds {limit_s}s"
    );
}

fn fail(criterion: u32, detail: &str) -> ! {
    println!("criterion {criterion}: FAIL — {detail}");
    panic!("criterion {criterion}: {detail}");
}

fn intersects(a: &CertScalar, b: &CertScalar) -> bool {
    a.lo_rat() <= b.hi_rat() && b.lo_rat() <= a.hi_rat()
}

fn corpus_c3() -> Vec<FiniteVector> {
    random_vectors(&CorpusSpec::standard(500, 10, 3))
}

#[test]
fn criterion_01_exact_norm_identities() {
    let start = Instant::now();
    let opts = NormOptions::default();
    let exact = [(1u64, rat(1, 1)), (3, rat(3, 2)), (7, rat(7, 3)), (15, rat(15, 4))];
    for (n, want) in &exact {
        let r = norm_s(&ones(*n), &opts).unwrap();
        if r.value.exact() != Some(want) {
            fail(1, &format!("‖ones{n}‖ not exactly {want}"));
        }
    }
    let width_cap = rat(1, 1i64 << 40);
    for n in [2u64, 4, 8] {
        let r = norm_s(&ones(n), &opts).unwrap();
        if r.value.width() > width_cap {
            fail(1, &format!("enclosure at n = {n} wider than 2^-40"));
        }
        // f(n)·‖x‖ must enclose n
        let prod = f_eval(n, &Rat::one(), opts.precision).unwrap().mul(&r.value, opts.precision);
        if !prod.contains(&Rat::from_integer(n.into())) {
            fail(1, &format!("‖ones{n}‖ enclosure does not bracket {n}/f({n})"));
        }
    }
    finish(1, start, 1.0, "n/f(n) exact at 1,3,7,15; bracketed with width <= 2^-40 at 2,4,8");
}

#[test]
fn criterion_02_oracle_equivalence() {
    let start = Instant::now();
    let opts = NormOptions::default();
    let xs = random_vectors(&CorpusSpec::standard(200, 6, 2));
    for (i, x) in xs.iter().enumerate() {
        let dp = norm_s(x, &opts).unwrap().value;
        let ex = oracle::norm_exhaustive(x, opts.precision).unwrap();
        if !intersects(&dp, &ex) {
            fail(2, &format!("vector {i}: DP {:?} vs oracle {:?} disjoint", dp, ex));
        }
    }
    finish(2, start, 30.0, "200 vectors, DP == exhaustive oracle within enclosures");
}

#[test]
fn criterion_03_structural_invariants() {
    let start = Instant::now();
    let opts = NormOptions::default();
    let prec = opts.precision;
    let one = Rat::one();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let xs = corpus_c3();
    for (i, x) in xs.iter().enumerate() {
        let ns = norm_s(x, &opts).unwrap().value;
        let n = x.support_len();

        // 1-unconditionality: exhaustive for n <= 8 (first sign fixed:
        // ‖-x‖ = ‖x‖ is free), sampled otherwise
        let patterns: Vec<u32> = if n <= 8 {
            (0..(1u32 << (n - 1))).collect()
        } else {
            (0..8).map(|_| rng.gen_range(0..(1u32 << (n - 1)))).collect()
        };
        for pat in patterns {
            let entries: Vec<(u64, Rat)> = x
                .iter()
                .enumerate()
                .map(|(j, (p, c))| {
                    (p, if j > 0 && pat & (1 << (j - 1)) != 0 { -c } else { c.clone() })
                })
                .collect();
            let flipped = FiniteVector::from_entries(entries).unwrap();
            let nf = norm_s(&flipped, &opts).unwrap().value;
            if nf.lo_rat() != ns.lo_rat() || nf.hi_rat() != ns.hi_rat() {
                fail(3, &format!("vector {i}: sign pattern {pat:#b} changed the norm"));
            }
        }

        // 1-spreading under 5 random relocations
        for _ in 0..5 {
            let moved = relocate(x, 4 * n as u64 + 40, &mut rng);
            let nm = norm_s(&moved, &opts).unwrap().value;
            if nm.lo_rat() != ns.lo_rat() || nm.hi_rat() != ns.hi_rat() {
                fail(3, &format!("vector {i}: relocation changed the norm"));
            }
        }

        // suppression monotonicity on 2 random proper sub-supports
        for _ in 0..2 {
            let entries: Vec<(u64, Rat)> = x
                .iter()
                .filter(|_| rng.gen_bool(0.6))
                .map(|(p, c)| (p, c.clone()))
                .collect();
            if entries.is_empty() || entries.len() == n {
                continue;
            }
            let sub = FiniteVector::from_entries(entries).unwrap();
            if norm_s(&sub, &opts).unwrap().value.certify_le(&ns) == Verdict::Fails {
                fail(3, &format!("vector {i}: suppression increased the norm"));
            }
        }

        // triangle inequality on consecutive pairs
        if i + 1 < xs.len() {
            let y = &xs[i + 1];
            let sum = norm_s(&x.add(y), &opts).unwrap().value;
            let bound = ns.add(&norm_s(y, &opts).unwrap().value, prec);
            if sum.certify_le(&bound) == Verdict::Fails {
                fail(3, &format!("vectors {i},{}: triangle inequality violated", i + 1));
            }
        }

        // Eq. 1.3 sandwich and Eq. 1.4 reconstruction
        let mut rec = CertScalar::from_rat(&x.sup_norm(), prec);
        for l in 2..=(n as u64) {
            let nl = norm_l(x, l, &opts).unwrap();
            if nl.lo_rat() > ns.hi_rat() {
                fail(3, &format!("vector {i}: ‖x‖_{l} > ‖x‖"));
            }
            let fl = f_eval(l, &one, prec).unwrap();
            if fl.mul(&nl, prec).hi_rat() < ns.lo_rat() {
                fail(3, &format!("vector {i}: ‖x‖_{l} < ‖x‖/f({l})"));
            }
            rec = rec.max_envelope(&nl);
        }
        if !intersects(&rec, &ns) {
            fail(3, &format!("vector {i}: Eq. 1.4 reconstruction mismatch"));
        }
    }
    finish(3, start, 300.0, "500 vectors: unconditional, spreading, suppression, triangle, Eqs. 1.3/1.4");
}

#[test]
fn criterion_04_aux_norm_bounds_and_extremal_grid() {
    let start = Instant::now();
    let opts = NormOptions::default();
    let prec = opts.precision;
    let f = GaugeFunction::f();
    let f2 = GaugeFunction::f_squared();
    let c12 = constant_cpq(&rat(1, 1), &rat(2, 1), &rat(1, 8), prec).unwrap();
    for (i, x) in corpus_c3().iter().enumerate() {
        let ns = norm_s(x, &opts).unwrap().value;
        let triple_f = triple_norm_g(x, &f, prec).unwrap();
        // Cor. 1.10 is an equality for singletons: compare endpoints there
        let ok = ns.hi_rat() <= triple_f.hi_rat() || ns.certify_le(&triple_f) != Verdict::Fails;
        if !ok {
            fail(4, &format!("vector {i}: ‖x‖_S > |||x|||_f"));
        }
        let lhs = triple_norm_g(x, &f2, prec).unwrap();
        let rhs = c12.mul(&gmspace_core::norms_aux::norm_g(x, &f, prec).unwrap(), prec);
        if lhs.certify_le(&rhs) == Verdict::Fails {
            fail(4, &format!("vector {i}: Lemma 1.6 bound violated"));
        }
    }

    // extremal property of x^(L): homogeneous form |||v|||_{f²} <=
    // t_L·‖v‖_f over >= 10^4 nonincreasing grid points
    let mut points = 0u64;
    for l_len in 1..=5usize {
        let xl = extremal_xl(&rat(1, 1), l_len as u64, prec).unwrap();
        let mut t_l = CertScalar::zero();
        for (j, c) in &xl {
            t_l = t_l.add(&c.div(&f_eval(*j, &rat(2, 1), prec).unwrap(), prec).unwrap(), prec);
        }
        // nonincreasing tuples over {k/14 : k = 1..14}
        let steps = 14i64;
        let mut stack: Vec<Vec<i64>> = vec![vec![]];
        while let Some(tuple) = stack.pop() {
            if tuple.len() == l_len {
                points += 1;
                let coeffs: Vec<CertScalar> = tuple
                    .iter()
                    .map(|&k| CertScalar::from_rat(&rat(k, steps), prec))
                    .collect();
                let nf = norm_g_decreasing(&coeffs, &f, prec).unwrap();
                let mut t = CertScalar::zero();
                for (idx, c) in coeffs.iter().enumerate() {
                    let fj = f_eval(idx as u64 + 1, &rat(2, 1), prec).unwrap();
                    t = t.add(&c.div(&fj, prec).unwrap(), prec);
                }
                if t.certify_le(&t_l.mul(&nf, prec)) == Verdict::Fails {
                    fail(4, &format!("grid point {tuple:?} beats x^({l_len})"));
                }
                continue;
            }
            let cap = tuple.last().copied().unwrap_or(steps);
            for k in 1..=cap {
                let mut next = tuple.clone();
                next.push(k);
                stack.push(next);
            }
        }
    }
    assert!(points >= 10_000, "grid too small: {points}");
    finish(4, start, 300.0, "Cor. 1.10 + Lemma 1.6 on corpus; x^(L) extremal over grid");
}

#[test]
fn criterion_05_dual_bound_on_certificates() {
    let start = Instant::now();
    let opts = NormOptions::default();
    for (i, x) in corpus_c3().iter().enumerate() {
        let r = norm_s(x, &opts).unwrap();
        let coeffs: Vec<CertScalar> =
            r.certificate.coefficients(opts.precision).unwrap().into_values().collect();
        let rep = dual_coefficient_check_cert(&coeffs, opts.precision).unwrap();
        if !rep.all_pass {
            fail(5, &format!("vector {i}: certificate violates ξ#_n <= 1/f(n)"));
        }
    }
    finish(5, start, 300.0, "500 extremal certificates satisfy Lemma 1.9's dual bound");
}

#[test]
fn criterion_06_yardstick_correctness() {
    let start = Instant::now();
    let prec = Prec::DEFAULT;
    let opts = NormOptions::default();

    let y24 = build_yardstick(&[2, 4], prec).unwrap();
    let lvls: Vec<usize> = y24.level_of_pos.iter().map(|&(_, l)| l).collect();
    if lvls != vec![0, 1, 1, 0, 1, 1] || y24.support_len() != 6 {
        fail(6, "y(2,4) pattern differs from the display (a,b,b,a,b,b)");
    }

    for m in [3u64, 7] {
        let y = build_yardstick_unchecked(&[m], prec).unwrap();
        let r = gmspace_core::norm_s::norm_s_cert(&y.coeffs(), &opts).unwrap();
        if r.value.exact() != Some(&Rat::one()) {
            fail(6, &format!("‖y({m})‖ not exactly 1"));
        }
    }

    if !is_admissible(&[2, 4, 48]).admissible
        || is_admissible(&[2, 3]).admissible
        || is_admissible(&[2, 4, 24]).admissible
    {
        fail(6, "admissibility misclassification");
    }
    let full = [2u64, 4, 48];
    for mask in 1u32..8 {
        let sub: Vec<u64> =
            (0..3).filter(|b| mask & (1 << b) != 0).map(|b| full[b as usize]).collect();
        if !is_admissible(&sub).admissible {
            fail(6, &format!("subsequence {sub:?} rejected"));
        }
    }
    finish(6, start, 10.0, "y(2,4) pattern, unit norms, admissibility with subsequence closure");
}

#[test]
fn criterion_07_strict_collapse_and_toy_counterexample() {
    let start = Instant::now();
    let opts = NormOptions::default();
    let prec = opts.precision;
    let eps = EpsSeq::cubic(2, 2).unwrap();
    let strict = GMParams::strict(eps, 4, prec).unwrap();
    for (i, x) in corpus_c3().iter().enumerate() {
        let ns = norm_s(x, &opts).unwrap().value;
        let gm = gm_norm(x, &strict, &opts).unwrap();
        if !gm.collapsed
            || gm.lower.lo_rat() != ns.lo_rat()
            || gm.upper.hi_rat() != ns.hi_rat()
        {
            fail(7, &format!("vector {i}: strict gm_norm did not collapse to ‖x‖_S"));
        }
    }

    // toy counterexample: small J activates a special certificate above ‖x‖_S
    let toy = GMParams::toy(eps, (1..=12).map(|i| 2 * i).collect(), 2, 0).unwrap();
    let x = ones(12);
    let ns = norm_s(&x, &opts).unwrap().value;
    let gm = gm_norm(&x, &toy, &opts).unwrap();
    if gm.lower.lo_rat() <= ns.hi_rat() {
        fail(7, "toy-mode special did not exceed ‖x‖_S on ones12");
    }
    let rep = validate_certificate(&gm.certificate, &toy, prec).unwrap();
    if !rep.valid {
        fail(7, "toy counterexample certificate does not validate");
    }
    finish(7, start, 300.0, "strict collapse on 500 vectors; toy special beats ‖·‖_S on ones12");
}

#[test]
fn criterion_08_grammar_classification() {
    let start = Instant::now();
    let prec = Prec::DEFAULT;
    let eps = EpsSeq::cubic(2, 2).unwrap();
    let params = || GMParams::toy(eps, vec![2, 4, 6, 8, 10, 12], 3, 1).unwrap();
    let leaf = |p: u64, n: i64, d: i64| FunctionalTree::leaf(p, rat(n, d));
    let avg = |range: std::ops::RangeInclusive<u64>| {
        FunctionalTree::average(range.map(|p| leaf(p, 1, 1)).collect())
    };
    let combo = |terms: Vec<(Rat, FunctionalTree)>| FunctionalTree::Combo {
        children: terms.into_iter().map(|(weight, child)| ComboTerm { weight, child }).collect(),
    };
    let special = |p: &GMParams| {
        let block1 = avg(1..=8);
        let n2 = p.sigma.code(std::slice::from_ref(&block1), &p.j).unwrap().value;
        let block2 = FunctionalTree::average((9..9 + n2).map(|q| leaf(q, 1, 1)).collect());
        FunctionalTree::Special { children: vec![block1, block2] }
    };

    let mut cases: Vec<(FunctionalTree, bool, GMParams)> = Vec::new();
    // 25 valid cases
    for i in 0..5u64 {
        cases.push((leaf(i + 1, i as i64 % 2 * 2 - 1, (i + 1) as i64), true, params()));
    }
    for i in 0..5u64 {
        cases.push((avg(1..=(i + 2)), true, params()));
    }
    for i in 0..5i64 {
        cases.push((
            combo(vec![(rat(1, 2 + i), leaf(1, 1, 1)), (rat(1, 3), leaf(2, -1, 2))]),
            true,
            params(),
        ));
    }
    for i in 0..4u64 {
        cases.push((
            FunctionalTree::Restrict {
                interval: gmspace_core::vectors::IndexInterval::new(i + 1, i + 3),
                child: Box::new(avg(1..=5)),
            },
            true,
            params(),
        ));
    }
    for i in 0..3i64 {
        cases.push((
            combo(vec![(rat(1, 1 + i), avg(1..=4)), (rat(i, 4 + i), avg(5..=7))]),
            true,
            params(),
        ));
    }
    for _ in 0..3 {
        let p = params();
        let t = special(&p);
        cases.push((t, true, p));
    }
    // 25 invalid cases
    for i in 0..3i64 {
        cases.push((leaf(1, 3 + i, 2), false, params())); // |coeff| > 1
    }
    for i in 0..4i64 {
        cases.push((
            combo(vec![(rat(3, 4), leaf(1, 1, 1)), (rat(2 + i, 4), leaf(2, 1, 1))]),
            false,
            params(),
        )); // l1 mass > 1
    }
    for i in 0..4u64 {
        cases.push((
            FunctionalTree::average(vec![leaf(3 + i, 1, 1), leaf(2, 1, 1)]),
            false,
            params(),
        )); // not successive
    }
    for _ in 0..3 {
        cases.push((
            FunctionalTree::Special { children: vec![avg(1..=6), avg(7..=10)] },
            false,
            params(),
        )); // n_1 = 6 = j_3, odd position
    }
    for _ in 0..3 {
        let p = params();
        let block1 = avg(1..=8);
        let n2 = p.sigma.code(std::slice::from_ref(&block1), &p.j).unwrap().value;
        let block2 = FunctionalTree::average((9..9 + n2 + 2).map(|q| leaf(q, 1, 1)).collect());
        cases.push((
            FunctionalTree::Special { children: vec![block1, block2] },
            false,
            p,
        )); // sigma linkage broken
    }
    for i in 0..3i64 {
        let p = params();
        let block1 =
            FunctionalTree::average((1..=8).map(|q| leaf(q, 2 + i, 1)).collect());
        let n2 = p.sigma.code(std::slice::from_ref(&block1), &p.j).unwrap().value;
        let block2 = FunctionalTree::average((9..9 + n2).map(|q| leaf(q, 1, 1)).collect());
        cases.push((
            FunctionalTree::Special { children: vec![block1, block2] },
            false,
            p,
        )); // Q/ball violation inside a special block
    }
    for _ in 0..2 {
        cases.push((
            FunctionalTree::Special { children: vec![leaf(1, 1, 1), leaf(2, 1, 1)] },
            false,
            params(),
        )); // blocks must be averages
    }
    for i in 0..3i64 {
        cases.push((
            combo(vec![(rat(1, 2), FunctionalTree::average(vec![leaf(4 + i as u64, 1, 1), leaf(2, 1, 1)]))]),
            false,
            params(),
        )); // nested successiveness violation
    }
    assert_eq!(cases.len(), 50);
    for (i, (t, want, p)) in cases.iter().enumerate() {
        let rep = validate_certificate(t, p, prec).unwrap();
        if rep.valid != *want {
            fail(8, &format!("case {i}: classified {} but expected {}", rep.valid, want));
        }
    }

    // exact linearity on rational-weight trees (arity-3 average: f(3) = 2)
    let t = combo(vec![(rat(1, 2), avg(1..=3)), (rat(1, 3), leaf(4, -1, 1))]);
    let x = FiniteVector::dense(1, [rat(1, 2), rat(2, 3), rat(-1, 5), rat(3, 7)]);
    let y = FiniteVector::dense(2, [rat(5, 4), rat(-1, 3), rat(2, 9)]);
    let ex = t.evaluate_exact(&x, prec).unwrap();
    let ey = t.evaluate_exact(&y, prec).unwrap();
    let exy = t.evaluate_exact(&x.add(&y), prec).unwrap();
    if exy != &ex + &ey {
        fail(8, "evaluate not additive");
    }
    let escaled = t.evaluate_exact(&x.scale(&rat(-7, 5)), prec).unwrap();
    if escaled != ex * rat(-7, 5) {
        fail(8, "evaluate not homogeneous");
    }
    finish(8, start, 300.0, "50 certificate cases classified; evaluate exactly linear");
}

#[test]
fn criterion_09_toy_intertwined_construction() {
    let start = Instant::now();
    let prec = Prec::DEFAULT;
    let eps = EpsSeq::cubic(2, 2).unwrap();
    let params = GMParams::toy(eps, default_toy_j(), 2, 0).unwrap();
    let c = build_construction(params, &unit_base(300), 3, Rat::one()).unwrap();

    let rep = check_e65(&c, prec).unwrap();
    if !rep.all_equalities {
        fail(9, "an Eq. 6.5(c) equality fails");
    }
    if !rep.all_linkage {
        fail(9, "an Eq. 6.5(d) sigma linkage fails");
    }
    if rep.families.iter().any(|f| f.c_inequality != Verdict::Holds) {
        fail(9, "an Eq. 6.5(c) inequality fails");
    }

    // Eq. 6.9 over every stage subset (m <= 3) and sign pattern
    for mask in 1u32..8 {
        let indices: Vec<usize> = (0..3).filter(|b| mask & (1 << b) != 0).map(|b| b + 1).collect();
        for smask in 0u32..(1 << indices.len()) {
            let coeffs: Vec<Rat> = (0..indices.len())
                .map(|b| rat(if smask & (1 << b) == 0 { 1 } else { -1 }, 1))
                .collect();
            let e69 = check_e69(&c, &coeffs, &indices, prec).unwrap();
            if !e69.holds {
                fail(9, &format!("Eq. 6.9 fails at indices {indices:?}, signs {coeffs:?}"));
            }
            if e69.below_upper == Verdict::Fails {
                fail(9, &format!("evaluation exceeds the GM upper bound at {indices:?}"));
            }
        }
    }
    finish(9, start, 120.0, "n_count = 3: Eq. 6.5(c)/(d) exact, Eq. 6.9 on all 26 families");
}

#[test]
fn criterion_10_performance_scaling() {
    let start = Instant::now();
    let opts = NormOptions::default();
    let mut times = Vec::new();
    for n in [15u64, 30, 60] {
        let x = FiniteVector::dense(
            1,
            (1..=n).map(|i| rat(2 * i as i64 + 1, i as i64 + 3)),
        );
        let t0 = Instant::now();
        norm_s(&x, &opts).unwrap();
        times.push((n, t0.elapsed().as_secs_f64()));
    }
    let t60 = times[2].1;
    if t60 > 60.0 {
        fail(10, &format!("norm_S at n = 60 took {t60:.1}s"));
    }
    for w in times.windows(2) {
        let (n1, t1) = w[0];
        let (n2, t2) = w[1];
        let allowed = 3.0 * ((n2 as f64 / n1 as f64).powi(4)) * t1.max(1e-3);
        if t2 > allowed {
            fail(10, &format!("scaling {n1}->{n2}: {t1:.3}s -> {t2:.3}s exceeds O(n^4) x3"));
        }
    }
    finish(10, start, 90.0, &format!("n = 60 in {t60:.1}s; O(n^4)-consistent within 3x"));
}

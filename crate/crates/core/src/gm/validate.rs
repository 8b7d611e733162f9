//! Certificate validation against the three grammar productions
//! (combos, successive averages, special functionals) with per-node
//! diagnostics instead of exceptions.

use num_traits::Signed;
use serde::Serialize;

use super::params::{GMParams, JSpec};
use super::sigma::check_eq_2_10;
use super::GmError;
use crate::arith::{ArithError, Prec, Rat, Verdict};
use crate::certificates::FunctionalTree;

#[derive(Clone, Debug, Serialize)]
pub struct Diagnostic {
    pub path: String,
    pub rule: String,
    pub ok: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CertReport {
    pub valid: bool,
    pub diagnostics: Vec<Diagnostic>,
}

/// Checks derivability of `t` in the grammar: rule 2.11 ℓ1-bounded
/// weights, rule 2.12 successiveness, rule 2.13 conditions (a)–(c), and
/// coefficient containment in [−1, 1] at the root. Invalid trees yield
/// structured diagnostics, never errors.
pub fn validate_certificate(
    t: &FunctionalTree,
    p: &GMParams,
    prec: Prec,
) -> Result<CertReport, GmError> {
    let mut diags = Vec::new();
    walk(t, "root", p, prec, &mut diags)?;
    root_coefficient_check(t, prec, &mut diags)?;
    Ok(CertReport { valid: diags.iter().all(|d| d.ok), diagnostics: diags })
}

fn push(diags: &mut Vec<Diagnostic>, path: &str, rule: &str, ok: bool, detail: String) {
    diags.push(Diagnostic { path: path.into(), rule: rule.into(), ok, detail });
}

fn walk(
    t: &FunctionalTree,
    path: &str,
    p: &GMParams,
    prec: Prec,
    diags: &mut Vec<Diagnostic>,
) -> Result<(), GmError> {
    match t {
        FunctionalTree::Leaf { position, coeff } => {
            let ok = coeff.abs() <= Rat::from_integer(1.into());
            push(
                diags,
                path,
                "Eq. 2.2 (leaf coefficient in [-1,1])",
                ok,
                format!("e*_{position} scaled by {coeff}"),
            );
        }
        FunctionalTree::Combo { children } => {
            let mass: Rat = children.iter().map(|c| c.weight.abs()).sum();
            let ok = mass <= Rat::from_integer(1.into());
            push(
                diags,
                path,
                "Eq. 2.11 (combo weights l1-bounded)",
                ok,
                format!("l1 mass {mass}"),
            );
            for (i, c) in children.iter().enumerate() {
                walk(&c.child, &format!("{path}.children[{i}]"), p, prec, diags)?;
            }
        }
        FunctionalTree::Average { children } => {
            let ok = !children.is_empty() && FunctionalTree::successive(children);
            push(
                diags,
                path,
                "Eq. 2.12 (successive average)",
                ok,
                format!("l = {} children", children.len()),
            );
            for (i, c) in children.iter().enumerate() {
                walk(c, &format!("{path}.children[{i}]"), p, prec, diags)?;
            }
        }
        FunctionalTree::Restrict { interval, child } => {
            push(
                diags,
                path,
                "E(z*) restriction",
                true,
                format!("interval [{}, {}]", interval.lo, interval.hi),
            );
            walk(child, &format!("{path}.child"), p, prec, diags)?;
        }
        FunctionalTree::Special { children } => {
            check_special(children, path, p, prec, diags)?;
            for (i, c) in children.iter().enumerate() {
                walk(c, &format!("{path}.children[{i}]"), p, prec, diags)?;
            }
        }
    }
    Ok(())
}

fn check_special(
    children: &[FunctionalTree],
    path: &str,
    p: &GMParams,
    prec: Prec,
    diags: &mut Vec<Diagnostic>,
) -> Result<(), GmError> {
    let k = children.len();
    if k == 0 {
        push(diags, path, "Eq. 2.13 (shape)", false, "special node needs k >= 1 blocks".into());
        return Ok(());
    }
    // blocks must be f(n_i)-averages
    let mut ns = Vec::with_capacity(k);
    for (i, c) in children.iter().enumerate() {
        match c {
            FunctionalTree::Average { children: sub } => ns.push(sub.len() as u64),
            _ => {
                push(
                    diags,
                    path,
                    "Eq. 2.13 (shape)",
                    false,
                    format!("block {} is not an f(n_i)-average node", i + 1),
                );
                return Ok(());
            }
        }
    }
    // (a) global successiveness of all z*_{i,j}
    let flat: Vec<FunctionalTree> = children
        .iter()
        .flat_map(|c| match c {
            FunctionalTree::Average { children: sub } => sub.clone(),
            _ => unreachable!(),
        })
        .collect();
    push(
        diags,
        path,
        "Eq. 2.13(a) (all sub-functionals successive)",
        FunctionalTree::successive(&flat),
        format!("{} sub-functionals across {} blocks", flat.len(), k),
    );
    // (b) Q-membership: rational leaf data in [-1,1]; coefficients scaled
    // by 1/f(l) factors stay admissible via closure Eq. 2.4. Certified
    // coefficient bound per sub-functional.
    for (j, z) in flat.iter().enumerate() {
        let mut ok = true;
        let mut worst = String::from("all coefficients certified in [-1,1]");
        for (pos, c) in z.coefficients(prec)? {
            let v = c.abs().certify_le_rat(&Rat::from_integer(1.into()));
            if v != Verdict::Holds {
                ok = false;
                worst = format!("coefficient at position {pos} not certified <= 1");
                break;
            }
        }
        push(diags, path, "Eq. 2.13(b) (Q-membership)", ok, format!("z*_(flat {j}): {worst}"));
    }
    // (c) n_1 = j_(2k') for some k' >= k; n_(i+1) = sigma(prefix)
    match &p.j {
        JSpec::Toy { js } => {
            let mut found = None;
            for kp in k as u64..=(js.len() as u64 / 2) {
                if js[(2 * kp - 1) as usize] == ns[0] {
                    found = Some(kp);
                    break;
                }
            }
            push(
                diags,
                path,
                "Eq. 2.13(c) (n_1 = j_2k')",
                found.is_some(),
                match found {
                    Some(kp) => format!("n_1 = {} = j_{} (k' = {kp} >= k = {k})", ns[0], 2 * kp),
                    None => format!(
                        "n_1 = {} is not an even-position element j_2k' with k' >= {k} \
                         (k' capped at |J|/2 = {})",
                        ns[0],
                        js.len() / 2
                    ),
                },
            );
            for i in 1..k {
                match p.sigma.code(&children[..i], &p.j) {
                    Ok(code) => {
                        let ok = code.value == ns[i];
                        let (flag, note) =
                            check_eq_2_10(&children[..i], &code, &p.eps, prec)?;
                        push(
                            diags,
                            path,
                            "Eq. 2.13(c) (n_i+1 = sigma(prefix))",
                            ok,
                            format!(
                                "sigma(z*_1..z*_{i}) = {}, block {} has n = {}; \
                                 Eq. 2.10 {flag:?}: {note}",
                                code.value,
                                i + 1,
                                ns[i]
                            ),
                        );
                    }
                    Err(GmError::JExhausted { needed, available }) => {
                        push(
                            diags,
                            path,
                            "Eq. 2.13(c) (n_i+1 = sigma(prefix))",
                            false,
                            format!("sigma needs j_{needed} but J has {available} elements"),
                        );
                    }
                    Err(e) => return Err(e),
                }
            }
        }
        JSpec::Strict { witnesses } => {
            // any representable n_1 sits far below the j_2 witness
            let j2 = witnesses.iter().find(|w| w.index == 2);
            let ok = false;
            push(
                diags,
                path,
                "Eq. 2.13(c) (n_1 = j_2k')",
                ok,
                match j2 {
                    Some(w) => format!(
                        "n_1 = {} but strict-mode j_2 >= 2^{} - 1; no concrete special \
                         certificate can satisfy (c)",
                        ns[0],
                        super::params::approx(&w.f_lower)
                    ),
                    None => "strict J has no j_2 witness".into(),
                },
            );
        }
    }
    Ok(())
}

fn root_coefficient_check(
    t: &FunctionalTree,
    prec: Prec,
    diags: &mut Vec<Diagnostic>,
) -> Result<(), ArithError> {
    let mut ok = true;
    let mut detail = String::from("all certified in [-1,1]");
    for (pos, c) in t.coefficients(prec)? {
        if c.abs().certify_le_rat(&Rat::from_integer(1.into())) != Verdict::Holds {
            ok = false;
            detail = format!("coefficient at position {pos} not certified <= 1");
            break;
        }
    }
    push(diags, "root", "coefficient functional in [-1,1]", ok, detail);
    Ok(())
}

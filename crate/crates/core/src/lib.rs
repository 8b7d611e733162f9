//! Certified computation in Schlumprecht and Gowers-Maurey type spaces.
//!
//! The crate is organized bottom-up:
//! - [`arith`]: exact rationals, dyadic numbers, certified enclosures, `f`.
//! - [`vectors`]: finitely supported rational vectors and block sequences.
//! - [`certificates`]: norming-functional trees and their evaluation.
//! - [`norm_s`]: the implicit-norm dynamic program with extremal certificates.
//! - [`norms_aux`]: auxiliary norms, constants, and lemma audits.
//! - [`yardstick`]: admissible sequences and yardstick vectors.
//! - [`gm`]: the mixed functional grammar, sigma coder, and toy norm.
//! - [`intertwine`]: the intertwined pair construction and its checks.
//! - [`corpus`]: seeded random vector corpora for batch checks.

pub mod arith;
pub mod certificates;
pub mod corpus;
pub mod gm;
pub mod intertwine;
pub mod norm_s;
pub mod norms_aux;
pub mod yardstick;
pub mod vectors;

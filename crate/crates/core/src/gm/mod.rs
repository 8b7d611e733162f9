//! The GM functional grammar: parameter packs (standard ε-conditions,
//! lacunary J, σ-coder), certificate validation against the three
//! production rules, and the GM norm in strict and toy regimes.

mod norm;
mod params;
mod sigma;
mod validate;

pub use norm::{check_ris_arithmetic, gm_norm, GmNormResult, RisLine, RisReport};
pub use params::{
    activation_threshold, validate_params, EpsForm, EpsSeq, Eq21Line, Eq21Report, GMParams,
    GrowthLine, JSpec, Mode, ParamsReport, StrictJ, Threshold,
};
pub use sigma::{check_eq_2_10, SigmaCode, SigmaCoder, SigmaSnapshot};
pub use validate::{validate_certificate, CertReport, Diagnostic};

use thiserror::Error;

use crate::arith::ArithError;

#[derive(Debug, Error)]
pub enum GmError {
    #[error("J exhausted: needed element j_{needed} but only {available} are defined")]
    JExhausted { needed: u64, available: usize },
    #[error("invalid GM parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Arith(#[from] ArithError),
}

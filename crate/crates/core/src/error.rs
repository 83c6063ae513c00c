use thiserror::Error;

use crate::interaction::Basis;
use crate::lattice::SiteSet;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("missing free energy for {0}")]
    MissingDependency(SiteSet),

    #[error("basis mismatch: expected {expected:?}, found {found:?}")]
    BasisMismatch { expected: Basis, found: Basis },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("simplex did not converge after {iterations} iterations: {detail}")]
    SimplexLimit { iterations: usize, detail: String },

    #[error("oracle volume has {0} spins, enumeration limit is {limit}", limit = crate::oracle::MAX_ORACLE_SPINS)]
    OracleTooLarge(usize),

    #[error("conflicting values for {set}: {a} vs {b}")]
    Conflict { set: SiteSet, a: f64, b: f64 },

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

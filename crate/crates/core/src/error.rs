use thiserror::Error;

use crate::observe::Setting;

/// Errors raised by the simulation and inference routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parameter `{name}` out of range: {detail}")]
    Parameter { name: &'static str, detail: String },

    #[error("tree too small: {0}")]
    TooSmall(String),

    #[error("size {requested} exceeds the feasible cap {cap} for {what}")]
    Infeasible {
        what: &'static str,
        requested: usize,
        cap: usize,
    },

    #[error("operation needs the {needed} setting but the tree is observed as {found}")]
    Setting { needed: &'static str, found: Setting },

    #[error("length mismatch: expected {expected}, got {found}")]
    Length { expected: usize, found: usize },

    #[error("malformed tree: {0}")]
    Structure(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn param(name: &'static str, detail: impl Into<String>) -> Self {
        Error::Parameter {
            name,
            detail: detail.into(),
        }
    }
}

pub(crate) fn check_probability(name: &'static str, q: f64) -> Result<()> {
    if (0.0..=1.0).contains(&q) {
        Ok(())
    } else {
        Err(Error::param(name, format!("{q} is not in [0, 1]")))
    }
}

/// Hypothesis pairs must satisfy 0 <= q0 < q1 <= 1/2.
pub(crate) fn check_hypotheses(q0: f64, q1: f64) -> Result<()> {
    if !(0.0..=0.5).contains(&q0) || !(0.0..=0.5).contains(&q1) {
        return Err(Error::param("q0/q1", format!("({q0}, {q1}) not in [0, 1/2]")));
    }
    if q0 >= q1 {
        return Err(Error::param("q0/q1", format!("need q0 < q1, got ({q0}, {q1})")));
    }
    Ok(())
}

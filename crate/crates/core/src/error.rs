use thiserror::Error;

/// Failures raised by the numerical layers.
///
/// Criterion outcomes ("condition not satisfied", "no blow-up by t_max") are
/// data and never show up here.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),

    #[error("non-finite value in {field} at node {node}")]
    NonFinite { field: &'static str, node: usize },

    /// A theorem or lemma was asked to act outside its hypotheses.
    #[error("{0}")]
    Precondition(String),

    #[error("generalized eigen-solve failed: {0}")]
    Eigen(String),

    #[error("stiff failure at t = {t}: step underflow with psi = {psi}, dpsi = {dpsi}")]
    StiffFailure { t: f64, psi: f64, dpsi: f64 },

    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T> = std::result::Result<T, Error>;

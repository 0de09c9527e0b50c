use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("alpha must exceed -1/2, got {0}")]
    InvalidAlpha(f64),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{value} lies outside [{lo}, {hi}]")]
    Domain { value: f64, lo: f64, hi: f64 },

    #[error("root solver failed to converge for node {index}")]
    RootSolver { index: usize },

    #[error("negative radicand {value:e} in barycentric weight {index}")]
    NegativeRadicand { index: usize, value: f64 },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    Dimension {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("rank-deficient {context}: deficiency starts at index {index} (scale {scale:e})")]
    RankDeficient {
        context: &'static str,
        index: usize,
        scale: f64,
    },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("objective is unbounded below on the feasible set")]
    Unbounded,

    #[error("bound branch {branch} does not apply to alpha = {alpha}, n = {degree}")]
    Branch {
        branch: &'static str,
        alpha: f64,
        degree: usize,
    },
}

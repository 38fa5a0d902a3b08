use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Input outside the domain of the operation (degree too small, zero
    /// modulus, sign conventions, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// `p(r + d x)` has a coefficient not divisible by `lam`.
    #[error("coefficient {index} of p(r+dx) is {coefficient}, not divisible by {lam}")]
    Integrality { index: usize, coefficient: String, lam: String },

    #[error("Hensel precondition fails at p={p}: {reason}")]
    HenselCondition { p: u64, reason: String },

    #[error("no strong Hensel witness modulo {p}^j for j <= {depth}")]
    NoRootToDepth { p: u64, depth: u32 },

    #[error("no root certificate for prime {0}")]
    MissingCertificate(u64),

    #[error("content bound violated at d={d}: cont(h_d)={content}, bound^2={bound_sq}")]
    ContentBoundViolation { d: u64, content: String, bound_sq: String },

    #[error("construction rejected: {a} - {b} = {diff} is a forbidden difference")]
    ConstructionRejected { a: u64, b: u64, diff: u64 },

    #[error("resource limit: {0}")]
    Resource(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

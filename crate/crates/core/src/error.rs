use thiserror::Error;

/// Errors raised by the cake-cutting engine.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CakeError {
    /// A query or operation received arguments outside its domain.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("parse error: {0}")]
    Parse(String),
    /// Too many distinct valuations for the bounded-heterogeneity scheme.
    #[error("{distinct} distinct valuations exceed the bound epsilon*n - 1 = {bound}")]
    Heterogeneity { distinct: usize, bound: String },
    #[error("size limit exceeded: {0}")]
    Limit(String),
    /// A structural property that the algorithms guarantee did not hold.
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T, E = CakeError> = std::result::Result<T, E>;

use thiserror::Error;

/// Errors raised while building, parsing or evaluating descriptors.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid descriptor: {0}")]
    Descriptor(String),

    #[error("{node}: string of length {len} is beyond table depth {depth}")]
    OutOfDepth { node: String, depth: usize, len: usize },

    #[error("{node}: non-positive value {value} at \"{at}\"")]
    NonPositive { node: String, at: String, value: String },

    #[error("enumeration of {needed} exceeds budget of {budget}")]
    Budget { needed: String, budget: u64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Prefixes the offending node path with an enclosing node label.
    pub(crate) fn within(self, segment: &str) -> Self {
        match self {
            Error::OutOfDepth { node, depth, len } => Error::OutOfDepth {
                node: format!("{segment}/{node}"),
                depth,
                len,
            },
            Error::NonPositive { node, at, value } => Error::NonPositive {
                node: format!("{segment}/{node}"),
                at,
                value,
            },
            other => other,
        }
    }

    /// True for errors caused by an exhausted enumeration or search budget.
    pub fn is_budget(&self) -> bool {
        matches!(self, Error::Budget { .. })
    }
}

/// Default enumeration budget for brute-force operations (2^20 items).
pub const DEFAULT_BUDGET: u64 = 1 << 20;

/// Fails unless `2^exponent` items fit in `budget`.
pub(crate) fn ensure_pow2_budget(exponent: u64, budget: u64, what: &str) -> Result<()> {
    if exponent >= 64 || (1u64 << exponent) > budget {
        return Err(Error::Budget {
            needed: format!("2^{exponent} {what}"),
            budget,
        });
    }
    Ok(())
}

use std::fmt;

use crate::Rational;

/// Best value known when an exhaustive search was cut short.
#[derive(Debug, Clone, PartialEq)]
pub enum BestSoFar {
    Rational(Rational),
    Real(f64),
    Count(u64),
}

impl fmt::Display for BestSoFar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BestSoFar::Rational(r) => write!(f, "{}", crate::rational::render(r)),
            BestSoFar::Real(x) => write!(f, "{x}"),
            BestSoFar::Count(c) => write!(f, "{c}"),
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("uniformity must be at least 2, got {0}")]
    Uniformity(usize),

    #[error("edge {edge:?}: {reason}")]
    InvalidEdge { edge: Vec<usize>, reason: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{operation}: search budget of {budget} nodes exceeded (best so far: {})",
        .best.as_ref().map(|b| b.to_string()).unwrap_or_else(|| "none".into()))]
    BudgetExceeded {
        operation: &'static str,
        budget: u64,
        best: Option<BestSoFar>,
    },

    #[error("distribution has empty support: {0}")]
    EmptySupport(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// Node budget for exhaustive searches.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Budget {
    pub max_nodes: u64,
}

impl Budget {
    pub const fn nodes(max_nodes: u64) -> Self {
        Budget { max_nodes }
    }

    pub const fn unlimited() -> Self {
        Budget { max_nodes: u64::MAX }
    }
}

impl Default for Budget {
    fn default() -> Self {
        Budget::nodes(1 << 32)
    }
}

/// Counts search nodes against a [`Budget`].
#[derive(Debug)]
pub(crate) struct NodeCounter {
    pub nodes: u64,
    pub limit: u64,
}

impl NodeCounter {
    pub fn new(budget: Budget) -> Self {
        NodeCounter { nodes: 0, limit: budget.max_nodes }
    }

    /// Returns false once the budget is spent.
    #[inline]
    pub fn tick(&mut self) -> bool {
        self.nodes += 1;
        self.nodes <= self.limit
    }

    pub fn exceeded(&self) -> bool {
        self.nodes > self.limit
    }
}

use std::fmt;

/// Which side of a bilateral lattice sum a diagnostic refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Tail {
    /// k → +∞, lattice points accumulating at 0.
    SmallX,
    /// k → −∞, lattice points running off to infinity.
    LargeX,
}

impl fmt::Display for Tail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tail::SmallX => write!(f, "small-x tail (k -> +inf)"),
            Tail::LargeX => write!(f, "large-x tail (k -> -inf)"),
        }
    }
}

/// Integration axis of a double transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Axis {
    X,
    Y,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Axis::X => write!(f, "x"),
            Axis::Y => write!(f, "y"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QError {
    #[error("invalid q = {0}: q must lie strictly inside (0, 1)")]
    InvalidQ(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("exact mode cannot represent {0}")]
    UnsupportedExact(String),
    #[error("no convergence after {terms} terms: {what}")]
    Convergence { what: String, terms: usize },
    #[error("pole: {0}")]
    Pole(String),
    #[error("divergent lattice sum on the {tail}{}: {detail}", axis.map(|a| format!(" of axis {a}")).unwrap_or_default())]
    Divergence {
        tail: Tail,
        axis: Option<Axis>,
        detail: String,
    },
    #[error("q-derivative limit at 0 did not settle: {0}")]
    Limit(String),
    #[error("catalog miss: {0}")]
    CatalogMiss(String),
    #[error("incomplete boundary data: {0}")]
    IncompleteData(String),
    #[error("repeated factor {0} is not supported")]
    UnsupportedMultiplicity(String),
    #[error("no catalog match; unmatched residual: {0}")]
    NoMatch(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("residual {value:e} of {what} exceeds {tol:e}")]
    Residual { what: String, value: f64, tol: f64 },
}

impl QError {
    /// Attribute a divergence to an axis unless an inner sum already did.
    pub(crate) fn on_axis(self, axis: Axis) -> Self {
        match self {
            QError::Divergence {
                tail,
                axis: inner,
                detail,
            } => QError::Divergence {
                tail,
                axis: inner.or(Some(axis)),
                detail,
            },
            other => other,
        }
    }
}

pub type Result<T> = std::result::Result<T, QError>;

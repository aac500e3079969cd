use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Which hypothesis of the Bohr-chaos construction failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HypothesisCondition {
    /// x and y are homoclinic to S and lie outside S.
    Homoclinic,
    /// The orbits of x and y come together in both time directions.
    Proximal,
    /// The restriction to S is chain transitive.
    ChainTransitive,
    /// The system shadows pseudo-orbits in S and the orbits of x, y.
    Shadowing,
    /// The sign sequence has positive density at the certificate horizon.
    Density,
}

impl HypothesisCondition {
    pub fn number(self) -> Option<u8> {
        match self {
            Self::Homoclinic => Some(1),
            Self::Proximal => Some(2),
            Self::ChainTransitive => Some(3),
            Self::Shadowing => Some(4),
            Self::Density => None,
        }
    }
}

impl fmt::Display for HypothesisCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.number() {
            Some(n) => write!(f, "condition ({n})"),
            None => write!(f, "density condition"),
        }
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("parameter error: {0}")]
    Parameter(String),
    #[error("construction error: {0}")]
    Construction(String),
    #[error("hyperbolicity margin exceeded: {0}")]
    HyperbolicityMargin(String),
    #[error("hypothesis not satisfied, {condition}: {detail}")]
    Hypothesis {
        condition: HypothesisCondition,
        detail: String,
    },
    #[error("window too small: {0}")]
    WindowTooSmall(String),
    #[error("budget exceeded: {0}")]
    Budget(String),
    #[error("input error: {0}")]
    Input(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn hypothesis(condition: HypothesisCondition, detail: impl Into<String>) -> Self {
        Error::Hypothesis {
            condition,
            detail: detail.into(),
        }
    }

    /// True for outcomes that are mathematically negative rather than failures.
    pub fn is_negative_result(&self) -> bool {
        matches!(self, Error::Hypothesis { .. } | Error::WindowTooSmall(_))
    }
}

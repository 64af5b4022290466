//! Decision trees against Nature, augmented with signals.
//!
//! The crate covers tree structure ([`tree`]), pure-strategy evaluation
//! ([`play`]), empirical signal models and their extendability ([`boxes`], [`lp`]),
//! Born-rule models including the Hardy correlations ([`quantum`]), and
//! signal-contingent policies ([`policy`]). [`fixtures`] holds the named
//! scenarios and their expected-value manifests; [`gen`] the random generators
//! used by property tests.

pub mod boxes;
pub mod fixtures;
pub mod gen;
pub mod lp;
pub mod play;
pub mod policy;
pub mod quantum;
pub mod symbolic;
pub mod tree;

use thiserror::Error;

/// Default comparison tolerance for probabilities and payoffs.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Default bound on enumerated strategies, states, policies and product-space points.
pub const DEFAULT_CAP: usize = 1_000_000;

/// The inverse golden ratio 2/(√5+1), root of φ² + φ = 1.
pub const PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PlayError {
    #[error("enumeration of {count} items exceeds cap {cap}")]
    TooMany { count: usize, cap: usize },
    #[error("tree is not a valid decision tree")]
    InvalidTree,
    #[error("strategy or world state does not fit the tree")]
    InvalidStrategy,
    #[error("tree is not a Kuhn tree with perfect recall")]
    NotPerfectRecall,
}

/// Top-level error for file ingestion and high-level operations.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Tree(#[from] tree::TreeError),
    #[error(transparent)]
    Play(#[from] PlayError),
    #[error(transparent)]
    Box(#[from] boxes::BoxError),
    #[error(transparent)]
    Policy(#[from] policy::PolicyError),
    #[error(transparent)]
    Fixture(#[from] fixtures::FixtureError),
    #[error("{0}")]
    Invalid(String),
}

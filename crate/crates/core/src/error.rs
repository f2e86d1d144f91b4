use thiserror::Error;

use crate::feasibility::Constraint;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid outcome distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    #[error("invalid amplitude vector: {0}")]
    InvalidState(String),

    #[error("invalid witness: {0}")]
    InvalidWitness(String),

    /// The postselected ensemble is empty, so no outcome distribution exists.
    #[error("degenerate postselection: success probability {success:e} is not positive")]
    DegeneratePostselection { success: f64 },

    #[error("polygon inequality fails at index {index} (excess {excess:e})")]
    PolygonViolation { index: usize, excess: f64 },

    #[error("singular extreme-ray system for n = {n}")]
    SingularSystem { n: usize },

    #[error("polygon closure residual {residual:e} exceeds tolerance")]
    ClosureFailure { residual: f64 },

    #[error("sum of amplitude magnitudes {l1} exceeds 1")]
    NormViolation { l1: f64 },

    #[error("scenario is not realizable by a projective measurement (violated: {})", fmt_tags(.violated))]
    InfeasibleScenario { violated: Vec<Constraint> },

    #[error("(T = {t}, S = {s}) lies outside the transition/success region for n = {n}")]
    RegionViolation { t: f64, s: f64, n: usize },

    #[error("no sample met the transition-probability constraint")]
    SearchBudgetExhausted,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

fn fmt_tags(tags: &[Constraint]) -> String {
    tags.iter()
        .map(|c| c.to_string())
        .collect::<Vec<_>>()
        .join(", ")
}

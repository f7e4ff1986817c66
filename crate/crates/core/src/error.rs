use thiserror::Error;

/// Every failure the library can report.
///
/// Variants split into input problems (see [`Error::is_validation`]) and
/// numerical failures; the CLI maps the two groups to different exit codes.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("flow integration failed at step {step} (t = {time:.6e}): {reason}")]
    IntegrationFailure { step: usize, time: f64, reason: String },

    #[error("curve is not invariant: image misses the curve by {defect:.3e} at x = {x:.12}")]
    InvarianceViolation { x: f64, defect: f64 },

    #[error("frame map is not a diffeomorphism: min derivative {min_derivative:.3e}")]
    NotDiffeo { min_derivative: f64 },

    #[error("p = {p} and N = {n} share a common factor")]
    NotLowestTerms { p: i64, n: i64 },

    #[error("interpolation system is singular")]
    InterpolationSingular,

    #[error("twist condition fails: entry {value:.3e} at x = {x:.12}")]
    NoTwist { x: f64, value: f64 },

    #[error("circle is not resonant with rotation {p}/{n}: defect {defect:.3e}")]
    NotResonantCircle { p: i64, n: i64, defect: f64 },

    #[error("no admissible perturbation size (best candidate t = {t:.3e})")]
    EmptyAdmissibleRange { t: f64 },

    #[error("rotation number estimate did not converge (oscillation {oscillation:.3e})")]
    NonConvergent { oscillation: f64 },

    #[error("rotation number looks rational: near {p}/{q}")]
    RationalDetected { p: i64, q: i64 },

    #[error("small divisor at harmonic k = {k}: |e^(2 pi i k theta) - 1| = {divisor:.3e}")]
    SmallDivisorResonance { k: usize, divisor: f64 },

    #[error("invariance Newton iteration failed: {reason}")]
    NewtonDiverged { reason: String, history: Vec<f64> },

    #[error("twist lost along the curve: min entry {min_entry:.3e}")]
    TwistLost { min_entry: f64 },

    #[error("image of the graph folds over x near x = {x:.12}")]
    GraphFolded { x: f64 },

    #[error("eigenvalue is a root of unity of order {order}")]
    ResonantEigenvalue { order: u32 },

    #[error("point is not periodic with period {period} (defect {defect:.3e})")]
    NotPeriodic { period: usize, defect: f64 },

    #[error("parameter out of domain: {0}")]
    DomainError(String),

    #[error("perturbation budget too small: {0}")]
    BudgetTooSmall(String),

    #[error("lap partition exceeds {limit} laps at period {period}")]
    PartitionOverflow { period: usize, limit: usize },

    #[error("stage perturbation {distance:.3e} exceeds budget {budget:.3e}")]
    BudgetExceeded { distance: f64, budget: f64 },

    #[error("census found {found} {kind} points, expected at least {required}")]
    CensusShortfall { kind: String, found: usize, required: usize },

    #[error("campaign halted at stage {stage}: {reason}")]
    CampaignHalted { stage: usize, reason: String, history: Vec<f64> },

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// True for errors caused by bad input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NotLowestTerms { .. }
                | Error::DomainError(_)
                | Error::InvalidConfig(_)
                | Error::Unsupported(_)
        )
    }

    /// Short machine-readable tag used in JSON error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::IntegrationFailure { .. } => "IntegrationFailure",
            Error::InvarianceViolation { .. } => "InvarianceViolation",
            Error::NotDiffeo { .. } => "NotDiffeo",
            Error::NotLowestTerms { .. } => "NotLowestTerms",
            Error::InterpolationSingular => "InterpolationSingular",
            Error::NoTwist { .. } => "NoTwist",
            Error::NotResonantCircle { .. } => "NotResonantCircle",
            Error::EmptyAdmissibleRange { .. } => "EmptyAdmissibleRange",
            Error::NonConvergent { .. } => "NonConvergent",
            Error::RationalDetected { .. } => "RationalDetected",
            Error::SmallDivisorResonance { .. } => "SmallDivisorResonance",
            Error::NewtonDiverged { .. } => "NewtonDiverged",
            Error::TwistLost { .. } => "TwistLost",
            Error::GraphFolded { .. } => "GraphFolded",
            Error::ResonantEigenvalue { .. } => "ResonantEigenvalue",
            Error::NotPeriodic { .. } => "NotPeriodic",
            Error::DomainError(_) => "DomainError",
            Error::BudgetTooSmall(_) => "BudgetTooSmall",
            Error::PartitionOverflow { .. } => "PartitionOverflow",
            Error::BudgetExceeded { .. } => "BudgetExceeded",
            Error::CensusShortfall { .. } => "CensusShortfall",
            Error::CampaignHalted { .. } => "CampaignHalted",
            Error::Unsupported(_) => "Unsupported",
            Error::InvalidConfig(_) => "InvalidConfig",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

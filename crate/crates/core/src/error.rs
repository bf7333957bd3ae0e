use thiserror::Error;

/// Errors produced by schedule construction, metric evaluation, estimation,
/// and trade-off optimization.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum JcrError {
    #[error("schedule spans {span_s:.3e} s but only {limit_s:.3e} s are available")]
    ScheduleTooLong { span_s: f64, limit_s: f64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("no non-negative parameters give at least two preambles for a budget of {budget}")]
    InfeasibleBudget { budget: usize },

    #[error("preamble overhead {overhead:.4} exceeds the CPI")]
    OverheadExceedsCpi { overhead: f64 },

    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("velocity {velocity_mps} m/s outside the unambiguous range of +/-{limit_mps} m/s")]
    VelocityAliased { velocity_mps: f64, limit_mps: f64 },

    #[error("velocity CRB not identifiable: {0}")]
    NotIdentifiable(String),

    #[error("CRB does not exist")]
    CrbDoesNotExist,

    #[error("water-filling needs at least one positive gain")]
    AllZeroGains,

    #[error("{targets} targets but only {elements} preambles")]
    TooManyTargets { targets: usize, elements: usize },

    #[error("pseudo-spectrum has {found} peaks, {needed} needed")]
    DegenerateSpectrum { found: usize, needed: usize },

    #[error("{targets} targets exceed the contiguous co-array extent {extent}")]
    CoArrayTooSmall { targets: usize, extent: usize },

    #[error("no feasible trade-off points")]
    NoFeasiblePoints,

    #[error("no design satisfies the constraint {0}")]
    ConstraintInfeasible(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, JcrError>;

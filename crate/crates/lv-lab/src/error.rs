use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("not admissible: {0}")]
    NotAdmissible(String),
    #[error("domain error: {0}")]
    DomainError(String),
    #[error("degenerate regime: a = 1 or b = 1 (a = {a}, b = {b})")]
    DegenerateRegime { a: f64, b: f64 },
    #[error("no traveling wave at speed {c} (minimal speed {c_min})")]
    NoWave { c: f64, c_min: f64 },
    #[error("Newton iteration did not converge: {0}")]
    NonConvergence(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("wrong regime: {0}")]
    WrongRegime(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("envelope construction failed: {0}")]
    EnvelopeFailure(String),
    #[error("envelope violated by {violation:e} at x = {x}")]
    EnvelopeViolation { violation: f64, x: f64 },
    #[error("singular system: {0}")]
    SingularSystem(String),
    #[error("angle left the invariant interval: {0}")]
    InvarianceViolation(String),
    #[error("stability violation at t = {t}: {what}")]
    StabilityViolation { t: f64, what: String },
    #[error("positivity failure: {0}")]
    PositivityFailure(String),
    #[error("monotone chain broken by {violation:e} between starts {n0} and {n1}")]
    ChainViolation { n0: f64, n1: f64, violation: f64 },
    #[error("backward construction not converged: gap {gap:e}")]
    NotConverged { gap: f64 },
    #[error("level {level} not crossed at t = {t}")]
    LevelNotCrossed { level: f64, t: f64 },
    #[error("non-positive values in fit window")]
    NonPositiveValues,
    #[error("empty cone")]
    EmptyCone,
    #[error("poor lock: sup error {0}")]
    PoorLock(f64),
    #[error("config: {0}")]
    Config(String),
    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;

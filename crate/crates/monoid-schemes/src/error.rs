use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("cone is not pointed; split off its lineality first")]
    NotPointed,
    #[error("search exceeded the node budget of {0}")]
    SearchBoundExceeded(usize),
    #[error("an ideal generator is a unit: the monoid collapses to the zero monoid")]
    ZeroMonoid,
    #[error("monoid is not cancellative")]
    NotCancellative,
    #[error("unsupported pushout: {0}")]
    UnsupportedPushout(String),
    #[error("unsupported fiber product: {0}")]
    UnsupportedPullback(String),
    #[error("bad gluing: {0}")]
    BadGluing(String),
    #[error("not toric: {0}")]
    NotToric(String),
    #[error("morphism does not preserve generic points")]
    NotGenericPreserving,
    #[error("vector {0:?} is not in the support of the fan")]
    NotInSupport(Vec<i64>),
    #[error("fan is not simplicial")]
    NotSimplicial,
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("graded monoid has empty Proj")]
    EmptyProj,
    #[error("square is not cartesian: {0}")]
    NotCartesian(String),
    #[error("density witness invalid: {0}")]
    WitnessInvalid(String),
    #[error("scheme is not separated: {0}")]
    NotSeparated(String),
    #[error("relation search truncated at degree bound {0}")]
    BoundTooSmall(usize),
    #[error("invalid input: {0}")]
    Invalid(String),
}

impl Error {
    /// Process exit status used by the command-line driver.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::SearchBoundExceeded(_) | Error::BudgetExceeded(_) | Error::BoundTooSmall(_) => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

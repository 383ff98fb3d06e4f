use thiserror::Error;

/// Which of the admissibility conditions a violation refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Condition {
    /// Non-zero depth of both layers.
    H1,
    /// Ellipticity of the elliptic operator (positivity of q1, q2).
    H2,
    /// Positivity of the symmetrizer weight `Q0 + eps^2 Q1`.
    H3,
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Condition::H1 => "H1",
            Condition::H2 => "H2",
            Condition::H3 => "H3",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(
        "nu = lambda - 1/bo = {nu} is below nu0 = {nu0}: surface tension too strong for the model"
    )]
    NonPositiveNu { nu: f64, nu0: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("field has {got} samples but the grid has {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("depth of the {layer} layer is {value} at node {index} (non-zero depth condition)")]
    DepthViolation {
        layer: &'static str,
        value: f64,
        index: usize,
    },

    #[error("{coefficient} = {value} at node {index} (ellipticity condition)")]
    EllipticityViolation {
        coefficient: &'static str,
        value: f64,
        index: usize,
    },

    #[error("symmetrizer weight Q0 + eps^2 Q1 = {value} at node {index} is below threshold")]
    SymmetrizerViolation { value: f64, index: usize },

    #[error("elliptic factorization hit a non-positive pivot {pivot} at row {index}")]
    SolveFailure { pivot: f64, index: usize },

    #[error("maximal characteristic speed is not finite")]
    NonFiniteSpeed,

    #[error("state contains a non-finite value at node {index}")]
    NonFiniteState { index: usize },

    #[error("energy series is empty")]
    EmptySeries,

    #[error("refinement ladder needs at least 3 points, got {points}")]
    DegenerateLadder { points: usize },
}

impl Error {
    /// The admissibility condition this error reports on, if any.
    pub fn condition(&self) -> Option<Condition> {
        match self {
            Error::DepthViolation { .. } => Some(Condition::H1),
            Error::EllipticityViolation { .. } => Some(Condition::H2),
            Error::SymmetrizerViolation { .. } => Some(Condition::H3),
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// One diagnostic from the pulse-program parser, tied to a source line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub line: usize,
    pub message: String,
}

impl std::fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("spin index {spin} out of range for a chain of {total_spins} spins")]
    InvalidSpin { spin: usize, total_spins: usize },

    #[error("condition pattern `{cond}` invalid for spin {spin}: {reason}")]
    InvalidCond {
        spin: usize,
        cond: String,
        reason: String,
    },

    #[error("basis index {basis} out of range for {total_spins} spins")]
    InvalidBasis { basis: u32, total_spins: usize },

    #[error("pulse angle {angle} outside (-2pi, 2pi]")]
    InvalidAngle { angle: String },

    #[error("chain layout invalid: {0}")]
    InvalidLayout(String),

    #[error("state norm is {norm}, expected 1 within {tol}")]
    NormViolation { norm: f64, tol: f64 },

    #[error("ensemble is empty: no basis state has weight >= {floor}")]
    EmptyEnsemble { floor: f64 },

    #[error("pattern `{pattern}` longer than the {register} computing spins")]
    PatternTooLong { pattern: String, register: usize },

    #[error("macro argument out of range: {0}")]
    MacroArg(String),

    #[error("program has {} parse error(s)", .0.len())]
    Parse(Vec<ParseDiagnostic>),

    #[error("register of {total_spins} spins exceeds the dense reference limit of {limit}")]
    SizeLimit { total_spins: usize, limit: usize },

    #[error("no dominant branch: line signals {low:.3e} / {high:.3e} both below threshold {threshold}")]
    Ambiguity {
        low: f64,
        high: f64,
        threshold: f64,
    },

    #[error("line table ambiguous at spin {spin}: strongest {strongest:.3e} vs runner-up {runner_up:.3e}")]
    AmbiguousLineTable {
        spin: usize,
        strongest: f64,
        runner_up: f64,
    },

    #[error("base {x} not coprime to modulus {modulus}")]
    NonCoprime { x: u64, modulus: u64 },

    #[error("state builder overflow: {0}")]
    BuilderOverflow(String),
}

impl Error {
    pub fn parse_errors(&self) -> Option<&[ParseDiagnostic]> {
        match self {
            Error::Parse(v) => Some(v),
            _ => None,
        }
    }
}

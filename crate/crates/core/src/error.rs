use thiserror::Error;

/// Errors raised by the model, solver, simulator and verifier.
///
/// Display strings name the violated invariant; the CLI prints them verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("n must be at least 2 (got n={0})")]
    TooFewSearchers(u64),

    #[error("k must be at least 1 (got k={0})")]
    NoDecoyRays(u64),

    #[error("p must exceed 1/(k+1) (got p={p}, k={k}, 1/(k+1)={bound})")]
    UninformativeSignal { p: f64, k: u64, bound: f64 },

    #[error("p must be below 1 (got p={0})")]
    PerfectSignal(f64),

    #[error("{name} must lie in [0, 1] (got {value})")]
    ProbabilityOutOfRange { name: &'static str, value: f64 },

    #[error("q must lie strictly between 0 and 1 for the closed-form payoff (got q={0})")]
    DegenerateTrust(f64),

    #[error("q must lie strictly between 1/(k+1) and 1 (got q={q}, k={k})")]
    TrustOutsideInterval { q: f64, k: u64 },

    #[error("p = k/(k+1) makes the single-searcher trust formula singular (p={p}, k={k})")]
    SingularSingleSearcher { p: f64, k: u64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("{0}")]
    InvalidConfig(String),

    #[error("internal error: equilibrium bracket [{lo}, {hi}] does not straddle p (F(lo)-p={f_lo}, F(hi)-p={f_hi})")]
    BracketFailure { lo: f64, hi: f64, f_lo: f64, f_hi: f64 },

    #[error("bisection did not converge after {iterations} iterations; best bracket [{lo}, {hi}]")]
    NotConverged { iterations: u32, lo: f64, hi: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

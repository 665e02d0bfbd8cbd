use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {value}")]
    InvalidParameter { name: &'static str, value: f64 },

    #[error("the Poisson limit (P = 0) has no classic (p, alpha) form")]
    PoissonLimit,

    #[error("PGF base 1 + P - P z must be positive, got {0}")]
    PgfDomain(f64),

    #[error("EmptySample: need at least 2 counts, got {0}")]
    EmptySample(usize),

    #[error("NegativeCount: {0}")]
    NegativeCount(i64),

    #[error("sample sums overflow")]
    Overflow,

    #[error("ZeroMean: sample mean is zero, ln(mu_hat) is undefined")]
    ZeroMean,

    #[error("ZeroVariance: sample variance is zero, ln(P_hat + 1) is undefined")]
    ZeroVariance,

    #[error("confidence level must lie strictly between 0 and 1, got {0}")]
    InvalidLevel(f64),

    #[error("at least one confidence level is required")]
    NoLevels,

    #[error("DomainInvalid: ({mu}, {p}) needs mu > 0, P > -1 and mu + P > 0")]
    DomainInvalid { mu: f64, p: f64 },

    #[error("GridTooCoarse: grid needs at least 2 steps per axis")]
    GridTooCoarse,

    #[error("invalid grid: {0}")]
    InvalidGrid(&'static str),
}

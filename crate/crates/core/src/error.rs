use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("steering angle is broadside (θ₀ = 0); the quantity is unbounded")]
    DegenerateSteer,

    #[error("reduced form requires d/λ₀ = 0.5, got {0}")]
    SpacingAssumption(f64),

    #[error("no divisor sizing satisfies the bound: {0}")]
    Infeasible(String),

    #[error("unsupported QAM order {0}; expected 4, 16 or 64")]
    InvalidOrder(u32),

    #[error("symbol index {index} out of range for order {order}")]
    IndexOutOfRange { index: u32, order: u32 },

    #[error("delay of {delay} samples is too large for a {len}-sample signal")]
    DelayTooLarge { delay: f64, len: usize },

    #[error("signal has zero power")]
    ZeroSignal,

    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("reference signal has zero power")]
    ZeroReference,

    #[error("signal needs {needed} guard samples at each end, found {found}")]
    InsufficientGuard { needed: usize, found: usize },

    #[error("IDFT combiners require an OFDM signal")]
    CombinerRequiresOfdm,

    #[error("sizing does not tile: {0}")]
    IndivisibleSizing(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("rate vector is empty")]
    EmptyRates,
    #[error("rate {index} is not positive")]
    NonPositiveRate { index: usize },
    #[error("rates must be non-increasing, but rate {index} exceeds its predecessor")]
    UnsortedRates { index: usize },
    #[error("rates must sum to exactly 1, got {sum}")]
    NotNormalized { sum: String },
    #[error("bamboo index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("schedule is empty")]
    EmptySchedule,
    #[error("schedule covers {got} bamboos, instance has {expected}")]
    LengthMismatch { expected: usize, got: usize },
    #[error("bamboos {a} and {b} are both scheduled at round {round}")]
    Collision { a: usize, b: usize, round: u64 },
    #[error("bamboo {index} never occurs in the period")]
    MissingFromPeriod { index: usize },
    #[error("residue ({offset}, {period}) of bamboo {index} is invalid: offset and period must be positive")]
    InvalidResidue { index: usize, offset: u64, period: u64 },
    #[error("arrival times must strictly increase (step {step})")]
    NonMonotoneTime { step: usize },
    #[error("step {step} arrives before the travel time from the previous point has elapsed")]
    TravelTooShort { step: usize },
    #[error("step {step} does not match the travel time exactly (strict mode)")]
    StrictTravelViolation { step: usize },
    #[error("state budget of {budget} configurations exceeded")]
    BudgetExceeded { budget: usize },
    #[error("frequency {0} is not a power of two")]
    NotPowerOfTwo(u64),
    #[error("density {0} exceeds 1")]
    DensityExceeded(String),
    #[error("need at least {needed} equal frequencies in group, found {found}")]
    InsufficientEntries { needed: usize, found: usize },
    #[error("frequency exceeds the supported range")]
    FrequencyOverflow,
    #[error("invalid travel matrix: {0}")]
    InvalidMetric(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("cannot parse {what}: {input:?}")]
    Parse { what: &'static str, input: String },
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by the engine. Every variant names the offending quantity.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("delta must satisfy 0 < delta < 1, got {0}")]
    InvalidDelta(f64),
    #[error("tabulated weights must contain at least one entry")]
    EmptyTable,
    #[error("tabulated weight at delay {delay} is {value}; weights must be finite and strictly positive")]
    NonPositiveWeight { delay: usize, value: f64 },
    #[error("tabulated weights must be nonincreasing, but weight at delay {delay} exceeds the previous one")]
    IncreasingWeights { delay: usize },
    #[error("delay {delay} is outside the tabulated range 0..={max}")]
    DelayOutOfRange { delay: u32, max: u32 },
    #[error("interest rate must be strictly positive and finite, got {0}")]
    InvalidInterestRate(f64),
    #[error("consistency horizon must be at least 2, got {0}")]
    HorizonTooSmall(u32),
    #[error("tolerance must be finite and nonnegative, got {0}")]
    InvalidTolerance(f64),
    #[error("reward at period {at} is already past at vantage {now}")]
    RewardInPast { at: u32, now: u32 },
    #[error("vantage {now} is after the decision period {decided_at}")]
    VantageAfterDecision { now: u32, decided_at: u32 },
    #[error("choice decided at {decided_at} includes a reward dated {at}, which is already past")]
    DecisionAfterReward { decided_at: u32, at: u32 },
    #[error("reward amount must be finite, got {0}")]
    NonFiniteAmount(f64),
    #[error("invalid utility function: {0}")]
    InvalidUtility(String),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("infeasible plan: {0}")]
    InfeasiblePlan(String),
    #[error("invalid agent: {0}")]
    InvalidAgent(String),
    #[error("commitment penalty must be finite and nonnegative, got {0}")]
    InvalidPenalty(f64),
    #[error("search grid `{0}` is empty")]
    EmptyGrid(&'static str),
    #[error("invalid clock segment: {0}")]
    InvalidSegment(String),
    #[error("itinerary must contain at least one segment")]
    EmptyItinerary,
    #[error("itineraries must span the same coordinate time (home {home}, traveler {traveler})")]
    MismatchedSpans { home: f64, traveler: f64 },
}

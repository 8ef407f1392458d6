//! Deterministic engine for intertemporal decision making.
//!
//! The crate is organised bottom-up:
//!
//! - [`discounting`]: discount functions, present values and the ratio test
//!   that separates time-consistent from time-inconsistent weightings.
//! - [`problems`]: dated-reward binary choices, finite-horizon consumption
//!   allocation and the one-shot task (procrastination) problem.
//! - [`planning`]: naive, sophisticated, committed and self-modifying agents,
//!   plus the commitment-penalty device.
//! - [`reversal`]: exhaustive search for preference-reversal witnesses.
//! - [`relativity`]: proper time over travel itineraries and the divergence
//!   of clones whose discounting is keyed to their own clocks.
//!
//! Time is a nonnegative integer grid of periods throughout. Nothing in the
//! crate is random; every maximum is taken with a documented tie-break.

pub mod discounting;
pub mod error;
pub mod planning;
pub mod problems;
pub mod relativity;
pub mod reversal;

pub use discounting::{
    check_consistency, delta_from_interest_rate, present_value, ConsistencyVerdict,
    ConsistencyWitness, DiscountFunction, DiscountInForce, Weighting,
};
pub use error::{Error, Result};
pub use planning::{
    apply_commitment_penalty, optimal_plan, simulate, sophisticated_solution, AgentKind, Penalized,
    Plan, PreModification, SophisticatedSolution, Trajectory,
};
pub use problems::{
    choose, evaluate_dated, plan_value, Action, BenefitTiming, BinaryChoice, ChoiceOutcome,
    ConsumptionProblem, DatedReward, Flow, Selection, SequentialProblem, TaskProblem,
    UtilityFunction,
};
pub use relativity::{
    clone_divergence, elapsed_proper_time, find_divergent_probe, proper_time, ClockSegment,
    CloneView, DelayClock, DivergenceReport, Itinerary,
};
pub use reversal::{find_reversal, verify_witness, ReversalWitness};

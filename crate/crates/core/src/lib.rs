//! Best-response dynamics of the Cournot oligopoly with linear demand
//! `p = max(0, A - Q)` and constant per-unit costs.
//!
//! Firms update simultaneously, each choosing the profit-maximising output
//! against everyone else's previous output. The crate simulates and
//! classifies the resulting trajectories, computes the Nash equilibrium,
//! and constructs every possible period-2 oscillation in closed form.

pub mod dynamics;
pub mod equilibrium;
pub mod format;
pub mod model;
pub mod oscillation;
pub mod propcheck;
pub mod reduction;
pub mod scalar;

pub use dynamics::{
    classify, detect_period, difference_trace, simulate, simulate_with, Classifier,
    DifferenceTrace, DynamicsError, DynamicsOutcome, OutcomeKind, Trajectory,
};
pub use equilibrium::{
    equilibrium_support_scan, nash_equilibrium, EquilibriumSolution, SupportCheck,
};
pub use model::{
    best_response, is_equilibrium, price, step, utility, GameParams, ModelError, Payoff,
    QuantityVector,
};
pub use oscillation::{
    construct_case1, construct_case2, construct_case3, find_all_oscillations,
    verify_quantity_matrix, Oscillation, OscillationCase, OscillationError, OscillationReport,
    QuantityMatrix,
};
pub use reduction::{reduce_game, reduce_trajectory, ReducedGame, ReductionError};
pub use scalar::{Exact, Scalar};

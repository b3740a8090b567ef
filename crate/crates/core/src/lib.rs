//! Competitive search on a star with a faulty pointer.
//!
//! `n` searchers start at the centre of a star with `k + 1` rays and race to
//! the single ray holding a unit prize; simultaneous arrivers split it. A
//! shared pointer marks the right ray with reliability `p`, and each searcher
//! follows it with some trust probability. This crate computes the unique
//! symmetric-equilibrium trust, simulates the game, and checks the closed
//! forms against brute force.

pub mod equilibrium;
pub mod error;
pub mod model;
pub mod output;
pub mod simulator;
pub mod suite;
pub mod verifier;

pub use equilibrium::{
    sample_e_curve, sample_f_curve, solve_equilibrium, solve_equilibrium_with, sweep_in_k, sweep_in_n, CurveSamples,
    EquilibriumSolution,
};
pub use error::{Error, Result};
pub use model::{
    derived, equilibrium_residual, monotonicity_threshold, payoff_large_n_approx, payoff_r, reliability_from_trust,
    single_searcher_optimal_trust, GameParams, TrustProfile,
};
pub use simulator::{estimate_payoff, series_payoff_oracle, simulate_round, SimulationConfig, SimulationReport};
pub use verifier::{best_response_scan, check_equilibrium, check_probability_matching, BestResponseScan};

//! Analysis and simulation of a two-phase information-dissemination
//! model: a single source pushes a limited number of direct updates per
//! cycle, after which nodes gossip among themselves under a majority
//! rule. The crate provides the exact per-cycle probability laws, the
//! induced Markov chain over (source bit, correct-node count) with its
//! stationary long-term error, high- and low-gossip-rate closed-form
//! approximations, an adaptive transmission-capacity policy, and a
//! seeded Monte-Carlo simulator.

pub mod approx;
pub mod chain;
pub mod cycle;
pub mod error;
pub mod mc;
pub mod params;
pub mod pmf;

pub use approx::{
    a_coefficient, adaptive_policy_table, expected_capacity, fit_scaling_b, gossip_gain, m_star,
    pt2_high_approx, pt2_high_limit, pt_low_approx, q_function, GainProfile,
};
pub use chain::{
    average_error, build_chain, evaluate, no_gossip_baseline, stationary, stationary_direct,
    stationary_power, PolicyTable, SolveMethod, SolvedChain, StationaryDist, TransitionMatrix,
};
pub use cycle::{adopt_prob, ki_pmf, ks_pmf, ndp_given_n_pmf, nprime_pmf, ri_pmf};
pub use error::{Error, Result};
pub use mc::{
    estimate_error, estimate_error_traced, simulate_cycle, CycleRecord, CycleState, McEstimate,
    McMode, DEFAULT_BURN_IN,
};
pub use params::{DerivedRatios, ModelParams, DEFAULT_SOLVE_TOL, DEFAULT_TAIL_TOL};
pub use pmf::Pmf;

//! Fast-flocking, slow-steering limit: the frozen stochastic matrix and its
//! rate matrix, stationary weights, the slow reduced flow, the initial
//! transient layer and the full-versus-reduced comparison.

mod compare;
mod markov;
mod slow;
mod transient;

pub use compare::{compare_full_reduced, default_t_skip, CompareOptions, CompareRow, ReducedInit};
pub use markov::{
    initial_flock_velocity, rate_matrix, rate_spectrum, relative_residual, stationary_distribution,
    stochastic_matrix, StationaryWeights,
};
pub use slow::{integrate_reduced, rhs_reduced, ReducedState, ReducedTrajectory};
pub use transient::{
    simulate_transient, simulate_transient_with, transient_integrator, transient_limit, TransientGains,
    TransientTrajectory,
};

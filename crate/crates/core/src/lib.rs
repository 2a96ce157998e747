//! Generalized Cucker–Smale / Motsch–Tadmor flocking with bounded gains,
//! masking, orientation bias, friction and steering, together with
//! flocking diagnostics and the fast-flocking reduced model.

pub mod diagnostics;
pub mod dynamics;
pub mod error;
pub mod influence;
pub mod integrator;
pub mod model;
pub mod presets;
pub mod reduced;
pub mod state;

pub use dynamics::{gain_vector, rhs, rhs_closed, rhs_open, Dynamics, LoopSnapshot, OpenLoop};
pub use error::{FlockError, Result};
pub use influence::{influence_matrix, local_mean_velocity, InfluenceMatrix};
pub use integrator::{integrate, integrate_plain, step_rk4, IntegratorConfig, Method, Trajectory};
pub use model::ModelConfig;
pub use state::SwarmState;

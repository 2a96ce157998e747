//! Flocking diagnostics along trajectories: diameters, active sets, the
//! influence and gain lower bounds, the flocking certificate, the
//! differential-inequality monitor, the friction energy bound, and the
//! brute-force oracles for the two supporting lemmas.

mod active_set;
mod bounds;
mod certificate;
mod contraction;
mod diameters;
mod energy;
mod oracles;
mod record;

pub use active_set::{active_sets, ActiveSetReport};
pub use bounds::{alpha_lower_bound, psi_lower_bound};
pub use certificate::{
    classify_psi_tail, flocking_certificate, psi_integral, FlockingCertificate, SteeringBound, TailClass,
    Verdict, EXPONENT_MARGIN,
};
pub use contraction::{monitor_contraction, ContractionReport, MAX_SAMPLE_SPACING};
pub use diameters::{diameter, diameters, DiameterSample};
pub use energy::{energy_bound, energy_decay_check, EnergyReport};
pub use oracles::{hull_support_oracle, maximal_action_oracle, HullCheck, MaximalActionCheck};
pub use record::{record, DiagnosticsRecord, ThetaPolicy};

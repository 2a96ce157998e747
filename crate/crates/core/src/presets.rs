//! The seven-agent tracking experiment: kernel `(1+r²)^{-0.3}`, gain
//! `10/(0.1+‖u‖²)^{0.5}`, feedback gains `γ₁ = 2`, `γ₂ = 0.1` toward the
//! circle `y(t) = (100 + 10 sin 0.1t, 10 + 10 cos 0.1t)`.

use crate::model::{GainRule, Kernel, ModelConfig, SteeringRule, Target};
use crate::state::SwarmState;

pub const TRACKING_POSITIONS: [[f64; 2]; 7] = [
    [6.8897, 7.1568],
    [1.6819, 4.4079],
    [4.0103, 5.8168],
    [6.3834, 6.7922],
    [2.4842, 6.1173],
    [5.8959, 1.4635],
    [1.0710, 4.4853],
];

pub const TRACKING_VELOCITIES: [[f64; 2]; 7] = [
    [2.8792, 1.0212],
    [1.7558, 0.6714],
    [2.2538, 0.7653],
    [1.5179, 2.0972],
    [2.6727, 2.8779],
    [1.6416, 0.4159],
    [0.4479, 0.7725],
];

pub const TRACKING_KERNEL_EXPONENT: f64 = 0.3;
pub const TRACKING_GAIN: (f64, f64, f64) = (10.0, 0.1, 0.5);
pub const TRACKING_GAMMA1: f64 = 2.0;
pub const TRACKING_GAMMA2: f64 = 0.1;
pub const TRACKING_T_END: f64 = 200.0;

pub fn tracking_target() -> Target {
    Target::Circle { center: [100.0, 10.0], radius: 10.0, omega: 0.1 }
}

pub fn tracking_initial_state() -> SwarmState {
    SwarmState::new(
        0.0,
        7,
        2,
        TRACKING_POSITIONS.iter().flatten().copied().collect(),
        TRACKING_VELOCITIES.iter().flatten().copied().collect(),
    )
    .expect("preset data is finite and well-shaped")
}

pub fn tracking_gain() -> GainRule {
    let (accel, offset, power) = TRACKING_GAIN;
    GainRule::Saturating { accel, offset, power }
}

pub fn tracking_steering() -> SteeringRule {
    SteeringRule::Tracking { gamma1: TRACKING_GAMMA1, gamma2: TRACKING_GAMMA2, target: tracking_target() }
}

/// The full closed loop at timescale ratio `eps`.
pub fn tracking_model(eps: f64) -> ModelConfig {
    ModelConfig::new(7, 2, Kernel::InversePower { beta: TRACKING_KERNEL_EXPONENT })
        .with_gain(tracking_gain())
        .with_steering(tracking_steering())
        .with_eps(eps)
}

//! Reference scenarios used by the documentation, the shipped scenario
//! files and the test suite: a Mars powered-descent vehicle flown in two
//! dimensions (the y axis stays quiet), with and without path constraints.

use nalgebra::{Vector2, Vector3};

use crate::model::{ConstraintSet, CostKind, Scenario, State, VehicleParams};

/// Mars descent vehicle: T = 16573 N, throttle in [0.3, 0.8], dry mass
/// 1505 kg, g = 3.71 m/s^2.
pub fn mars_vehicle(flow_rate: f64) -> VehicleParams {
    VehicleParams {
        thrust_max: 16573.0,
        flow_rate,
        mass_empty: 1505.0,
        gravity: 3.71,
        throttle_min: 0.3,
        throttle_max: 0.8,
        pressure_term: 0.0,
    }
}

/// Reference entry state: r0 = (2000, 0, 1500) m, v0 = (100, 0, -75) m/s,
/// m0 = 1905 kg.
pub fn reference_entry() -> State {
    State::new(
        Vector3::new(2000.0, 0.0, 1500.0),
        Vector3::new(100.0, 0.0, -75.0),
        1905.0,
    )
}

fn pinpoint_base(flow_rate: f64, cost: CostKind) -> Scenario {
    Scenario {
        params: mars_vehicle(flow_rate),
        constraints: ConstraintSet::unconstrained(),
        initial_state: reference_entry(),
        final_position_xy: Some(Vector2::new(0.0, 0.0)),
        final_velocity: Vector3::zeros(),
        cost,
        final_time: None,
    }
}

/// Constant-mass pinpoint landing, no path constraints, minimum fuel.
pub fn unconstrained_min_fuel() -> Scenario {
    pinpoint_base(0.0, CostKind::MinFuel)
}

/// Adds the flat (gamma = 0) glide-slope constraint.
pub fn altitude_constrained() -> Scenario {
    let mut s = unconstrained_min_fuel();
    s.constraints.glide_slope_enabled = true;
    s.constraints.glide_slope_angle = 0.0;
    s
}

/// Adds the flat glide-slope constraint and a 45-degree pointing cone.
pub fn altitude_and_pointing() -> Scenario {
    let mut s = altitude_constrained();
    s.constraints.pointing_enabled = true;
    s.constraints.pointing_half_angle = std::f64::consts::FRAC_PI_4;
    s
}

/// Varying mass (q = 8.4294 kg/s), 5-degree glide slope, 45-degree pointing
/// cone, maximizing the final mass.
pub fn mass_glide_pointing() -> Scenario {
    let mut s = pinpoint_base(8.4294, CostKind::MaxFinalMass);
    s.constraints.glide_slope_enabled = true;
    s.constraints.glide_slope_angle = 5.0_f64.to_radians();
    s.constraints.pointing_enabled = true;
    s.constraints.pointing_half_angle = std::f64::consts::FRAC_PI_4;
    s
}

/// One-dimensional vertical descent from 1500 m at -75 m/s, constant mass,
/// minimum fuel; the closed-form oracle case.
pub fn vertical_descent() -> Scenario {
    let mut s = unconstrained_min_fuel();
    s.initial_state = State::new(
        Vector3::new(0.0, 0.0, 1500.0),
        Vector3::new(0.0, 0.0, -75.0),
        1905.0,
    );
    s
}

/// Replace the vacuum model with a constant-pressure atmosphere of the given
/// sigma (N). Path constraints are dropped, as the atmosphere formulation
/// requires.
pub fn with_pressure(mut scenario: Scenario, sigma: f64) -> Scenario {
    scenario.params.pressure_term = sigma;
    scenario.constraints = ConstraintSet::unconstrained();
    scenario
}

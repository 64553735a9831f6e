//! Domain types and dynamics for the powered-descent landing problem.
//!
//! Two dynamic models are supported: vacuum flight, and flight through a
//! constant-pressure atmosphere where the ambient pressure subtracts a fixed
//! force `sigma` along the thrust axis. The constraint set covers throttle
//! bounds, a thrust-pointing cone around vertical and a glide-slope cone
//! over the landing site.

use nalgebra::{Vector2, Vector3};
use thiserror::Error;

/// Tolerance under which a control direction is accepted as a unit vector.
pub const DIRECTION_UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid parameter: {0}")]
    InvalidParams(String),
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("throttle must be positive when the pressure term is nonzero")]
    ZeroThrottleWithPressure,
    #[error("glide-slope gradient undefined at cone apex")]
    ConeApex,
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

// ---------------------------------------------------------------------------
// Vehicle and constraint parameters
// ---------------------------------------------------------------------------

/// Which force model governs the translational dynamics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DynamicsModel {
    Vacuum,
    Atmosphere,
}

/// Physical constants of the vehicle and its environment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VehicleParams {
    /// Maximal thrust, N.
    pub thrust_max: f64,
    /// Maximal engine mass flow rate, kg/s (0 for a constant-mass study).
    pub flow_rate: f64,
    /// Dry mass, kg.
    pub mass_empty: f64,
    /// Gravitational acceleration at the landing site, m/s^2.
    pub gravity: f64,
    /// Lower throttle bound, in (0, 1].
    pub throttle_min: f64,
    /// Upper throttle bound, in (0, 1].
    pub throttle_max: f64,
    /// Constant-pressure force term sigma, N. Zero selects the vacuum model.
    pub pressure_term: f64,
}

impl VehicleParams {
    pub fn model(&self) -> DynamicsModel {
        if self.pressure_term > 0.0 {
            DynamicsModel::Atmosphere
        } else {
            DynamicsModel::Vacuum
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let all = [
            self.thrust_max,
            self.flow_rate,
            self.mass_empty,
            self.gravity,
            self.throttle_min,
            self.throttle_max,
            self.pressure_term,
        ];
        if !all.iter().all(|v| v.is_finite()) {
            return Err(ModelError::NonFinite("vehicle parameters"));
        }
        if self.thrust_max <= 0.0 {
            return Err(ModelError::InvalidParams("thrust_max must be > 0".into()));
        }
        if self.mass_empty <= 0.0 {
            return Err(ModelError::InvalidParams("mass_empty must be > 0".into()));
        }
        if self.gravity <= 0.0 {
            return Err(ModelError::InvalidParams("gravity must be > 0".into()));
        }
        if self.flow_rate < 0.0 {
            return Err(ModelError::InvalidParams("flow_rate must be >= 0".into()));
        }
        if !(self.throttle_min > 0.0 && self.throttle_min <= self.throttle_max && self.throttle_max <= 1.0) {
            return Err(ModelError::InvalidParams(
                "throttle bounds must satisfy 0 < throttle_min <= throttle_max <= 1".into(),
            ));
        }
        if self.pressure_term < 0.0 {
            return Err(ModelError::InvalidParams("pressure_term must be >= 0".into()));
        }
        // Net thrust must stay positive in the atmosphere model.
        if self.pressure_term > 0.0 && self.thrust_max * self.throttle_min < self.pressure_term {
            return Err(ModelError::InvalidParams(format!(
                "net thrust must be positive: thrust_max * throttle_min = {} < pressure_term = {}",
                self.thrust_max * self.throttle_min,
                self.pressure_term
            )));
        }
        Ok(())
    }
}

/// Path and control-direction constraints.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintSet {
    /// Half-angle theta of the thrust-pointing cone about +z, rad.
    pub pointing_half_angle: f64,
    /// Glide-slope angle gamma, rad. gamma = 0 reduces to an altitude floor.
    pub glide_slope_angle: f64,
    pub pointing_enabled: bool,
    pub glide_slope_enabled: bool,
}

impl ConstraintSet {
    /// No pointing or glide-slope restriction.
    pub fn unconstrained() -> Self {
        ConstraintSet {
            pointing_half_angle: std::f64::consts::FRAC_PI_2,
            glide_slope_angle: 0.0,
            pointing_enabled: false,
            glide_slope_enabled: false,
        }
    }

    pub fn validate(&self, params: &VehicleParams) -> Result<(), ModelError> {
        if !self.pointing_half_angle.is_finite() || !self.glide_slope_angle.is_finite() {
            return Err(ModelError::NonFinite("constraint angles"));
        }
        if self.pointing_enabled
            && !(self.pointing_half_angle >= 0.0 && self.pointing_half_angle < std::f64::consts::FRAC_PI_2)
        {
            return Err(ModelError::InvalidParams(
                "pointing_half_angle must lie in [0, pi/2)".into(),
            ));
        }
        if self.glide_slope_enabled
            && !(self.glide_slope_angle >= 0.0 && self.glide_slope_angle < std::f64::consts::FRAC_PI_2)
        {
            return Err(ModelError::InvalidParams(
                "glide_slope_angle must lie in [0, pi/2)".into(),
            ));
        }
        // The constant-pressure formulation drops both path constraints.
        if params.pressure_term > 0.0 && (self.pointing_enabled || self.glide_slope_enabled) {
            return Err(ModelError::InvalidParams(
                "the atmosphere model supports neither the pointing nor the glide-slope constraint".into(),
            ));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// State, control, scenario
// ---------------------------------------------------------------------------

/// Translational state (r, v, m).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct State {
    /// Position, m.
    pub position: Vector3<f64>,
    /// Velocity, m/s.
    pub velocity: Vector3<f64>,
    /// Mass, kg.
    pub mass: f64,
}

impl State {
    pub fn new(position: Vector3<f64>, velocity: Vector3<f64>, mass: f64) -> Self {
        State { position, velocity, mass }
    }

    pub fn is_finite(&self) -> bool {
        self.position.iter().all(|v| v.is_finite())
            && self.velocity.iter().all(|v| v.is_finite())
            && self.mass.is_finite()
    }
}

/// Thrust command, factored as a unit direction and a throttle magnitude
/// so the cone and norm constraints stay separately checkable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Control {
    /// Unit thrust direction d.
    pub direction: Vector3<f64>,
    /// Throttle alpha = ||u||, dimensionless.
    pub throttle: f64,
}

impl Control {
    pub fn new(direction: Vector3<f64>, throttle: f64) -> Self {
        Control { direction, throttle }
    }

    /// The raw control vector u = alpha * d.
    pub fn vector(&self) -> Vector3<f64> {
        self.direction * self.throttle
    }

    pub fn validate(&self, params: &VehicleParams, constraints: &ConstraintSet) -> Result<(), ModelError> {
        if !self.direction.iter().all(|v| v.is_finite()) || !self.throttle.is_finite() {
            return Err(ModelError::NonFinite("control"));
        }
        if (self.direction.norm() - 1.0).abs() > DIRECTION_UNIT_TOL {
            return Err(ModelError::InvalidParams(format!(
                "control direction norm {} not unit",
                self.direction.norm()
            )));
        }
        if self.throttle < params.throttle_min - 1e-12 || self.throttle > params.throttle_max + 1e-12 {
            return Err(ModelError::InvalidParams(format!(
                "throttle {} outside [{}, {}]",
                self.throttle, params.throttle_min, params.throttle_max
            )));
        }
        if constraints.pointing_enabled
            && self.direction.z < constraints.pointing_half_angle.cos() - 1e-9
        {
            return Err(ModelError::InvalidParams(format!(
                "direction z-component {} violates the pointing cone",
                self.direction.z
            )));
        }
        Ok(())
    }
}

/// Objective selector for the landing problem.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    /// Minimize the integral of the control norm.
    MinFuel,
    /// Maximize m(t_f); requires a nonzero flow rate.
    MaxFinalMass,
    /// Minimize t_f.
    MinTime,
}

/// A complete landing problem instance.
///
/// The final altitude is 0 and the final vertical velocity is fixed in every
/// variant. With `final_position_xy` set, the full final position and
/// velocity are pinned (pinpoint landing); with it unset, only (z, v_z) are
/// fixed and the horizontal components stay free.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub params: VehicleParams,
    pub constraints: ConstraintSet,
    pub initial_state: State,
    /// Fixed horizontal landing coordinates, or None for the free-(x, y) variant.
    pub final_position_xy: Option<Vector2<f64>>,
    /// Final velocity; only its z-component is used in the free-(x, y) variant.
    pub final_velocity: Vector3<f64>,
    pub cost: CostKind,
    /// Fixed final time, or None when t_f is free.
    pub final_time: Option<f64>,
}

impl Scenario {
    pub fn model(&self) -> DynamicsModel {
        self.params.model()
    }

    pub fn pinpoint(&self) -> bool {
        self.final_position_xy.is_some()
    }

    /// Fixed final position for the pinpoint variant (z is always 0).
    pub fn final_position(&self) -> Option<Vector3<f64>> {
        self.final_position_xy.map(|xy| Vector3::new(xy.x, xy.y, 0.0))
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.params.validate()?;
        self.constraints.validate(&self.params)?;
        if !self.initial_state.is_finite() {
            return Err(ModelError::NonFinite("initial state"));
        }
        if self.initial_state.mass <= self.params.mass_empty {
            return Err(ModelError::InvalidScenario(
                "initial mass must exceed the empty mass".into(),
            ));
        }
        if !self.final_velocity.iter().all(|v| v.is_finite()) {
            return Err(ModelError::NonFinite("final velocity"));
        }
        if let Some(xy) = self.final_position_xy {
            if !xy.iter().all(|v| v.is_finite()) {
                return Err(ModelError::NonFinite("final position"));
            }
        }
        if let Some(tf) = self.final_time {
            if !(tf.is_finite() && tf > 0.0) {
                return Err(ModelError::InvalidScenario("fixed final time must be > 0".into()));
            }
        }
        if self.cost == CostKind::MaxFinalMass && self.params.flow_rate == 0.0 {
            return Err(ModelError::InvalidScenario(
                "max_final_mass is degenerate with a zero flow rate; use min_fuel".into(),
            ));
        }
        if self.constraints.glide_slope_enabled {
            let (h0, _) = glide_slope(&self.initial_state.position, self.constraints.glide_slope_angle)?;
            if h0 < 0.0 {
                return Err(ModelError::InvalidScenario(format!(
                    "initial position violates the glide-slope constraint (h = {h0})"
                )));
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Pointwise evaluations
// ---------------------------------------------------------------------------

/// Time derivative of the translational state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateDerivative {
    pub d_position: Vector3<f64>,
    pub d_velocity: Vector3<f64>,
    pub d_mass: f64,
}

/// Right-hand side of the equations of motion.
///
/// With u = alpha d the acceleration is ((T alpha - sigma) / m) d - g, which
/// reduces bit-exactly to the vacuum expression at sigma = 0. The mass flow
/// is -q alpha.
pub fn eval_dynamics(
    state: &State,
    control: &Control,
    params: &VehicleParams,
) -> Result<StateDerivative, ModelError> {
    if !state.is_finite() {
        return Err(ModelError::NonFinite("state"));
    }
    if !control.direction.iter().all(|v| v.is_finite()) || !control.throttle.is_finite() {
        return Err(ModelError::NonFinite("control"));
    }
    if state.mass <= 0.0 {
        return Err(ModelError::InvalidParams("mass must be positive".into()));
    }
    if params.pressure_term > 0.0 && control.throttle <= 0.0 {
        return Err(ModelError::ZeroThrottleWithPressure);
    }
    let net_thrust = params.thrust_max * control.throttle - params.pressure_term;
    let accel = control.direction * (net_thrust / state.mass)
        - Vector3::new(0.0, 0.0, params.gravity);
    Ok(StateDerivative {
        d_position: state.velocity,
        d_velocity: accel,
        d_mass: -params.flow_rate * control.throttle,
    })
}

/// Glide-slope margin h(r) = z - tan(gamma) ||(x, y)|| and its gradient n.
///
/// For gamma = 0 the gradient is the constant e_z, which avoids the apex
/// singularity; for gamma > 0 the gradient is undefined at (x, y) = 0.
pub fn glide_slope(position: &Vector3<f64>, gamma: f64) -> Result<(f64, Vector3<f64>), ModelError> {
    if !position.iter().all(|v| v.is_finite()) || !gamma.is_finite() {
        return Err(ModelError::NonFinite("glide-slope input"));
    }
    if gamma == 0.0 {
        return Ok((position.z, Vector3::new(0.0, 0.0, 1.0)));
    }
    let rho = position.xy().norm();
    if rho == 0.0 {
        return Err(ModelError::ConeApex);
    }
    let t = gamma.tan();
    let h = position.z - t * rho;
    let n = Vector3::new(-t * position.x / rho, -t * position.y / rho, 1.0);
    Ok((h, n))
}

/// Signed pointing margin <e_z, u> - ||u|| cos(theta); nonnegative inside the cone.
pub fn pointing_slack(u: &Vector3<f64>, theta: f64) -> f64 {
    u.z - u.norm() * theta.cos()
}

/// Whether u lies in the pointing cone of half-angle theta, up to tol.
pub fn in_pointing_cone(u: &Vector3<f64>, theta: f64, tol: f64) -> bool {
    pointing_slack(u, theta) >= -tol
}

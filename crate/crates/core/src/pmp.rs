//! First-order optimality machinery: Hamiltonian, adjoint dynamics, the
//! closed-form thrust-direction law and the switching function whose sign
//! selects the throttle level on extremal arcs.

use nalgebra::Vector3;

use crate::model::{Control, ConstraintSet, State, VehicleParams};

// ---------------------------------------------------------------------------
// Costate
// ---------------------------------------------------------------------------

/// Adjoint variables conjugate to (r, v, m), plus bookkeeping for the state
/// constraint and the cost normalization.
///
/// `mu_accum` holds the running integral of n dmu of the glide-slope
/// measure, so the measure-adjusted position adjoint is
/// `q_r = p_r - mu_accum`. `p_fuel` is the (constant) costate of the
/// accumulated-fuel variable introduced when a running fuel cost is recast
/// as a final cost; it stays 0 for the pure final-cost objectives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Costate {
    pub p_r: Vector3<f64>,
    pub p_v: Vector3<f64>,
    pub p_m: f64,
    /// Cost multiplier, 0 or -1. Normal extremals use -1.
    pub p0: f64,
    /// Accumulated glide-slope measure integral of n dmu.
    pub mu_accum: Vector3<f64>,
    /// Costate of the accumulated-fuel state; -1 for the min-fuel objective
    /// with zero flow rate, 0 otherwise.
    pub p_fuel: f64,
}

impl Costate {
    pub fn new(p_r: Vector3<f64>, p_v: Vector3<f64>, p_m: f64) -> Self {
        Costate {
            p_r,
            p_v,
            p_m,
            p0: -1.0,
            mu_accum: Vector3::zeros(),
            p_fuel: 0.0,
        }
    }

    pub fn zeros() -> Self {
        Costate::new(Vector3::zeros(), Vector3::zeros(), 0.0)
    }

    /// Measure-adjusted position adjoint q_r = p_r - integral of n dmu.
    pub fn q_r(&self) -> Vector3<f64> {
        self.p_r - self.mu_accum
    }

    /// Nontriviality of (P, p0, mu): all-zero multipliers are not a valid
    /// extremal.
    pub fn is_nontrivial(&self, mu_total: f64) -> bool {
        self.p_r.norm() > 0.0
            || self.p_v.norm() > 0.0
            || self.p_m != 0.0
            || self.p0 != 0.0
            || mu_total > 0.0
    }
}

// ---------------------------------------------------------------------------
// Direction law
// ---------------------------------------------------------------------------

/// Which branch of the direction law produced the result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionBranch {
    /// p_v points into the cone; d = p_v / ||p_v||.
    Interior,
    /// The maximizer saturates the pointing cone.
    ConeBoundary,
    /// The maximizer is non-unique; a designated representative is returned.
    DegenerateTie,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectionResult {
    pub direction: Vector3<f64>,
    pub branch: DirectionBranch,
    pub pv_norm: f64,
}

/// Relative tolerance deciding when the horizontal part of p_v counts as zero.
const TIE_TOL: f64 = 1e-12;

/// Maximizer of <p_v, d> over unit vectors d in the pointing cone.
///
/// Ties are broken deterministically: the designated horizontal direction is
/// (1, 0) on the cone boundary, and the cone axis when p_v vanishes.
/// Degenerate inputs are reported through the branch, never failed.
pub fn direction_law(p_v: &Vector3<f64>, theta: f64, pointing_enabled: bool) -> DirectionResult {
    let norm = p_v.norm();
    if norm == 0.0 {
        return DirectionResult {
            direction: Vector3::new(0.0, 0.0, 1.0),
            branch: DirectionBranch::DegenerateTie,
            pv_norm: 0.0,
        };
    }
    if !pointing_enabled {
        return DirectionResult {
            direction: p_v / norm,
            branch: DirectionBranch::Interior,
            pv_norm: norm,
        };
    }
    let (sin_t, cos_t) = theta.sin_cos();
    if p_v.z >= norm * cos_t {
        return DirectionResult {
            direction: p_v / norm,
            branch: DirectionBranch::Interior,
            pv_norm: norm,
        };
    }
    let pv_bar = p_v.xy();
    let bar_norm = pv_bar.norm();
    if bar_norm > TIE_TOL * norm {
        let d = Vector3::new(sin_t * pv_bar.x / bar_norm, sin_t * pv_bar.y / bar_norm, cos_t);
        DirectionResult {
            direction: d,
            branch: DirectionBranch::ConeBoundary,
            pv_norm: norm,
        }
    } else {
        // p_v is (numerically) vertical and points out of the cone: every
        // azimuth ties. Designated representative delta = (1, 0).
        DirectionResult {
            direction: Vector3::new(sin_t, 0.0, cos_t),
            branch: DirectionBranch::DegenerateTie,
            pv_norm: norm,
        }
    }
}

// ---------------------------------------------------------------------------
// Switching function, control law, Hamiltonian, adjoint dynamics
// ---------------------------------------------------------------------------

/// Throttle regime suggested by the sign of the switching function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ArcKind {
    Max,
    Min,
    Singular,
}

impl std::fmt::Display for ArcKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ArcKind::Max => write!(f, "Max"),
            ArcKind::Min => write!(f, "Min"),
            ArcKind::Singular => write!(f, "Singular"),
        }
    }
}

/// Switching function. Vacuum: Psi = (T/m) <p_v, d> - p_m q + p_fuel.
/// Constant-pressure atmosphere: Psi = (T/m) ||p_v|| - p_m q + p_fuel
/// (the direction is then p_v / ||p_v||, without a cone).
pub fn switching_function(
    state: &State,
    costate: &Costate,
    d: &Vector3<f64>,
    params: &VehicleParams,
) -> f64 {
    let ratio = params.thrust_max / state.mass;
    let lead = if params.pressure_term > 0.0 {
        ratio * costate.p_v.norm()
    } else {
        ratio * costate.p_v.dot(d)
    };
    lead - costate.p_m * params.flow_rate + costate.p_fuel
}

/// Pointwise extremal control: direction from the direction law, throttle
/// from the sign of the switching function. `singular_tol` is the dead band
/// inside which the arc is flagged singular; the throttle then falls back to
/// its lower bound and callers must escalate.
pub fn control_law(
    state: &State,
    costate: &Costate,
    constraints: &ConstraintSet,
    params: &VehicleParams,
    singular_tol: f64,
) -> (Control, ArcKind) {
    let pointing = params.pressure_term <= 0.0 && constraints.pointing_enabled;
    let dres = direction_law(&costate.p_v, constraints.pointing_half_angle, pointing);
    let psi = switching_function(state, costate, &dres.direction, params);
    let (throttle, hint) = if psi > singular_tol {
        (params.throttle_max, ArcKind::Max)
    } else if psi < -singular_tol {
        (params.throttle_min, ArcKind::Min)
    } else {
        (params.throttle_min, ArcKind::Singular)
    };
    (Control::new(dres.direction, throttle), hint)
}

/// Default singular-detection dead band, scaled to the natural magnitude of
/// the switching function.
pub fn default_singular_tol(params: &VehicleParams, initial_mass: f64) -> f64 {
    1e-9 * params.thrust_max / initial_mass
}

/// Hamiltonian, with the measure-adjusted q_r in the position pairing.
/// The `p_fuel` term carries the recast running fuel cost (0 otherwise).
pub fn hamiltonian(state: &State, costate: &Costate, control: &Control, params: &VehicleParams) -> f64 {
    let alpha = control.throttle;
    let net = params.thrust_max * alpha - params.pressure_term;
    let accel = control.direction * (net / state.mass) - Vector3::new(0.0, 0.0, params.gravity);
    costate.q_r().dot(&state.velocity) + costate.p_v.dot(&accel)
        - costate.p_m * params.flow_rate * alpha
        + costate.p_fuel * alpha
}

/// Time derivative of the adjoint variables along an arc where the state
/// constraint is inactive (the measure term is handled by the solvers, not
/// here).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostateDerivative {
    pub d_p_r: Vector3<f64>,
    pub d_p_v: Vector3<f64>,
    pub d_p_m: f64,
}

pub fn adjoint_rhs(
    state: &State,
    costate: &Costate,
    control: &Control,
    params: &VehicleParams,
) -> CostateDerivative {
    let net = params.thrust_max * control.throttle - params.pressure_term;
    CostateDerivative {
        d_p_r: Vector3::zeros(),
        d_p_v: -costate.q_r(),
        d_p_m: net * costate.p_v.dot(&control.direction) / (state.mass * state.mass),
    }
}

/// The inner product <q_r, d>, whose sample sequence must be nonincreasing
/// along extremals and which drives dPsi/dt.
pub fn qr_dot_d(costate: &Costate, d: &Vector3<f64>) -> f64 {
    costate.q_r().dot(d)
}

/// max over admissible controls of H, evaluated through the control law's
/// selection (used by the free-time transversality residual).
pub fn eval_hamiltonian_max(
    state: &State,
    costate: &Costate,
    constraints: &ConstraintSet,
    params: &VehicleParams,
    singular_tol: f64,
) -> f64 {
    let (control, _) = control_law(state, costate, constraints, params, singular_tol);
    hamiltonian(state, costate, &control, params)
}

/// Model-aware expected dPsi/dt along an extremal:
/// -(T/m) <q_r, d> + (sigma q / m^2) ||p_v||; the sigma term vanishes in vacuum.
pub fn expected_psi_rate(state: &State, costate: &Costate, d: &Vector3<f64>, params: &VehicleParams) -> f64 {
    let base = -params.thrust_max / state.mass * qr_dot_d(costate, d);
    base + params.pressure_term * params.flow_rate * costate.p_v.norm() / (state.mass * state.mass)
}

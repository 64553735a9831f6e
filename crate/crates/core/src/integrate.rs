//! Fixed-step RK4 propagation and the trajectory container shared by the
//! solvers, the analyzer and the CLI.

use nalgebra::Vector3;
use thiserror::Error;

use crate::model::{
    eval_dynamics, glide_slope, pointing_slack, Control, CostKind, DynamicsModel, Scenario, State,
};
use crate::pmp::Costate;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrateError {
    #[error("non-finite value encountered during integration at t = {0}")]
    NonFinite(f64),
    #[error("fuel exhausted: mass reached the empty mass at t = {0}")]
    FuelExhausted(f64),
    #[error("step size must be positive")]
    BadStep,
    #[error("at least 10 integration steps are required")]
    TooFewSteps,
    #[error("mass bookkeeping inconsistent: |residual| = {0} exceeds tolerance")]
    MassInconsistent(f64),
    #[error("model error: {0}")]
    Model(#[from] crate::model::ModelError),
}

// ---------------------------------------------------------------------------
// RK4
// ---------------------------------------------------------------------------

/// One classical 4-stage Runge-Kutta step.
pub fn rk4_step<const N: usize>(
    rhs: &impl Fn(f64, &[f64; N]) -> [f64; N],
    t: f64,
    y: &[f64; N],
    dt: f64,
) -> Result<[f64; N], IntegrateError> {
    if !(dt > 0.0) {
        return Err(IntegrateError::BadStep);
    }
    let k1 = rhs(t, y);
    let mut tmp = [0.0; N];
    for i in 0..N {
        tmp[i] = y[i] + 0.5 * dt * k1[i];
    }
    let k2 = rhs(t + 0.5 * dt, &tmp);
    for i in 0..N {
        tmp[i] = y[i] + 0.5 * dt * k2[i];
    }
    let k3 = rhs(t + 0.5 * dt, &tmp);
    for i in 0..N {
        tmp[i] = y[i] + dt * k3[i];
    }
    let k4 = rhs(t + dt, &tmp);
    let mut out = [0.0; N];
    for i in 0..N {
        out[i] = y[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        if !out[i].is_finite() {
            return Err(IntegrateError::NonFinite(t));
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Quadrature helpers
// ---------------------------------------------------------------------------

/// Composite Simpson rule on a uniform-or-not grid. Odd interval counts are
/// closed with a 3/8 rule on the last three intervals; a single interval
/// falls back to the trapezoid.
pub fn simpson(times: &[f64], values: &[f64]) -> f64 {
    assert_eq!(times.len(), values.len());
    let n = times.len();
    if n < 2 {
        return 0.0;
    }
    if n == 2 {
        return 0.5 * (values[0] + values[1]) * (times[1] - times[0]);
    }
    let intervals = n - 1;
    let mut total = 0.0;
    let mut i = 0;
    let stop = if intervals % 2 == 0 { n - 1 } else { n - 4 };
    while i + 2 <= stop {
        // Simpson on the pair of intervals [i, i+2] (grid may be nonuniform).
        let (t0, t1, t2) = (times[i], times[i + 1], times[i + 2]);
        let (f0, f1, f2) = (values[i], values[i + 1], values[i + 2]);
        let h0 = t1 - t0;
        let h1 = t2 - t1;
        let h = h0 + h1;
        if h0 <= 0.0 || h1 <= 0.0 {
            i += 2;
            continue;
        }
        total += h / 6.0
            * ((2.0 - h1 / h0) * f0 + h * h / (h0 * h1) * f1 + (2.0 - h0 / h1) * f2);
        i += 2;
    }
    if intervals % 2 != 0 {
        if intervals == 1 {
            return 0.5 * (values[0] + values[1]) * (times[1] - times[0]);
        }
        // 3/8-style closure on the remaining three intervals via two
        // trapezoid-corrected Simpson fits; for simplicity integrate the
        // last three intervals with Simpson on [n-4, n-2] shifted: use
        // cubic through the four last points evaluated by Newton-Cotes.
        let t = &times[n - 4..];
        let f = &values[n - 4..];
        // Nonuniform 4-point Newton-Cotes by integrating the Lagrange basis.
        total += newton_cotes_4(t, f);
    }
    total
}

fn newton_cotes_4(t: &[f64], f: &[f64]) -> f64 {
    // Integrate the cubic interpolant through (t_i, f_i), i = 0..4, over
    // [t0, t3] by Gauss-Legendre with 2 nodes per subinterval (exact for
    // cubics).
    let lagrange = |x: f64| -> f64 {
        let mut s = 0.0;
        for i in 0..4 {
            let mut li = 1.0;
            for j in 0..4 {
                if i != j {
                    li *= (x - t[j]) / (t[i] - t[j]);
                }
            }
            s += f[i] * li;
        }
        s
    };
    let g = 0.5773502691896257_f64;
    let mut total = 0.0;
    for k in 0..3 {
        let a = t[k];
        let b = t[k + 1];
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        total += half * (lagrange(mid - g * half) + lagrange(mid + g * half));
    }
    total
}

/// Trapezoid rule on the full grid.
pub fn trapezoid(times: &[f64], values: &[f64]) -> f64 {
    assert_eq!(times.len(), values.len());
    let mut total = 0.0;
    for i in 1..times.len() {
        total += 0.5 * (values[i] + values[i - 1]) * (times[i] - times[i - 1]);
    }
    total
}

// ---------------------------------------------------------------------------
// Trajectory
// ---------------------------------------------------------------------------

/// A discretized trajectory with per-node diagnostics.
///
/// Diagnostics are `None` where the required data is absent: `h` without an
/// enabled glide-slope constraint, `psi`/`qr_dot_d` without costates,
/// `pointing_slack` without an enabled pointing constraint.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<State>,
    pub controls: Vec<Control>,
    pub costates: Option<Vec<Costate>>,
    pub h: Vec<Option<f64>>,
    pub psi: Vec<Option<f64>>,
    pub qr_dot_d: Vec<Option<f64>>,
    pub pointing_slack: Vec<Option<f64>>,
    pub cost_value: f64,
    pub model: DynamicsModel,
    /// Node indices where the stored control is the right limit of a jump
    /// (bang-bang switches from the indirect solver). Quadratures split
    /// segments here.
    pub control_jump_nodes: Vec<usize>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn final_time(&self) -> f64 {
        *self.times.last().expect("empty trajectory")
    }

    pub fn final_state(&self) -> &State {
        self.states.last().expect("empty trajectory")
    }

    /// Structural invariants: strictly increasing times starting at 0 and
    /// diagnostics arrays of matching length.
    pub fn validate(&self) -> Result<(), IntegrateError> {
        let n = self.times.len();
        if n == 0 || self.times[0] != 0.0 {
            return Err(IntegrateError::BadStep);
        }
        if !self.times.windows(2).all(|w| w[1] > w[0]) {
            return Err(IntegrateError::BadStep);
        }
        let same = self.states.len() == n
            && self.controls.len() == n
            && self.h.len() == n
            && self.psi.len() == n
            && self.qr_dot_d.len() == n
            && self.pointing_slack.len() == n
            && self.costates.as_ref().map_or(true, |c| c.len() == n);
        if !same {
            return Err(IntegrateError::BadStep);
        }
        Ok(())
    }

    /// Integral of the throttle over time, by Simpson within smooth
    /// segments. Segments are split at `control_jump_nodes`, where the
    /// stored value is a right limit; the left-segment endpoint value is
    /// substituted from inside the segment so piecewise-constant profiles
    /// integrate exactly.
    pub fn throttle_integral(&self) -> f64 {
        let n = self.len();
        let throttle: Vec<f64> = self.controls.iter().map(|c| c.throttle).collect();
        if self.control_jump_nodes.is_empty() {
            return simpson(&self.times, &throttle);
        }
        let mut boundaries = vec![0usize];
        boundaries.extend(self.control_jump_nodes.iter().copied().filter(|&i| i > 0 && i < n - 1));
        boundaries.push(n - 1);
        boundaries.dedup();
        let mut total = 0.0;
        for w in boundaries.windows(2) {
            let (a, b) = (w[0], w[1]);
            let mut vals = throttle[a..=b].to_vec();
            // The right boundary of every segment except the last carries the
            // next arc's throttle; replace it with the in-segment value.
            if b < n - 1 && vals.len() >= 2 {
                let inner = vals[vals.len() - 2];
                *vals.last_mut().unwrap() = inner;
            }
            total += simpson(&self.times[a..=b], &vals);
        }
        total
    }

    /// Trapezoid-rule throttle integral (matches the transcription solver's
    /// own discretization).
    pub fn throttle_integral_trapezoid(&self) -> f64 {
        let throttle: Vec<f64> = self.controls.iter().map(|c| c.throttle).collect();
        trapezoid(&self.times, &throttle)
    }

    /// Mass bookkeeping residual |m(t_f) - m_0 + q * integral(throttle)|,
    /// taking the smaller of the segment-aware Simpson and trapezoid
    /// quadratures so trajectories from either solver family are judged by
    /// a rule consistent with their own discretization.
    pub fn mass_consistency_error(&self, flow_rate: f64) -> f64 {
        let m0 = self.states[0].mass;
        let mf = self.final_state().mass;
        let e1 = (mf - m0 + flow_rate * self.throttle_integral()).abs();
        let e2 = (mf - m0 + flow_rate * self.throttle_integral_trapezoid()).abs();
        e1.min(e2)
    }
}

/// Per-node diagnostics for a state/control pair under a scenario.
pub(crate) fn node_diagnostics(
    scenario: &Scenario,
    state: &State,
    control: &Control,
) -> (Option<f64>, Option<f64>) {
    let h = if scenario.constraints.glide_slope_enabled {
        glide_slope(&state.position, scenario.constraints.glide_slope_angle)
            .map(|(h, _)| h)
            .ok()
    } else {
        None
    };
    let slack = if scenario.constraints.pointing_enabled {
        Some(pointing_slack(&control.vector(), scenario.constraints.pointing_half_angle))
    } else {
        None
    };
    (h, slack)
}

/// Cost of a finished trajectory under the scenario's objective.
pub(crate) fn cost_of(scenario: &Scenario, traj: &Trajectory) -> f64 {
    match scenario.cost {
        CostKind::MinFuel => traj.throttle_integral(),
        CostKind::MaxFinalMass => -traj.final_state().mass,
        CostKind::MinTime => traj.final_time(),
    }
}

// ---------------------------------------------------------------------------
// Propagation under a control policy
// ---------------------------------------------------------------------------

/// Propagate the state under an arbitrary control policy on a uniform grid.
///
/// The policy sees the current time and state (and no costate; extremal
/// integration lives in the indirect solver). Mass consistency against the
/// Simpson throttle quadrature is enforced to 1e-6 relative.
pub fn propagate(
    scenario: &Scenario,
    policy: impl Fn(f64, &State, Option<&Costate>) -> Control,
    t_f: f64,
    n_steps: usize,
) -> Result<Trajectory, IntegrateError> {
    if n_steps < 10 {
        return Err(IntegrateError::TooFewSteps);
    }
    if !(t_f > 0.0) {
        return Err(IntegrateError::BadStep);
    }
    let params = scenario.params;
    let dt = t_f / n_steps as f64;

    let pack = |s: &State| -> [f64; 7] {
        [
            s.position.x, s.position.y, s.position.z,
            s.velocity.x, s.velocity.y, s.velocity.z,
            s.mass,
        ]
    };
    let unpack = |y: &[f64; 7]| -> State {
        State::new(
            Vector3::new(y[0], y[1], y[2]),
            Vector3::new(y[3], y[4], y[5]),
            y[6],
        )
    };
    let rhs = |t: f64, y: &[f64; 7]| -> [f64; 7] {
        let s = unpack(y);
        let c = policy(t, &s, None);
        match eval_dynamics(&s, &c, &params) {
            Ok(d) => [
                d.d_position.x, d.d_position.y, d.d_position.z,
                d.d_velocity.x, d.d_velocity.y, d.d_velocity.z,
                d.d_mass,
            ],
            Err(_) => [f64::NAN; 7],
        }
    };

    let n_nodes = n_steps + 1;
    let mut times = Vec::with_capacity(n_nodes);
    let mut states = Vec::with_capacity(n_nodes);
    let mut controls = Vec::with_capacity(n_nodes);
    let mut y = pack(&scenario.initial_state);

    for i in 0..=n_steps {
        let t = if i == n_steps { t_f } else { i as f64 * dt };
        let s = unpack(&y);
        if !s.is_finite() {
            return Err(IntegrateError::NonFinite(t));
        }
        if s.mass <= params.mass_empty && i < n_steps {
            return Err(IntegrateError::FuelExhausted(t));
        }
        times.push(t);
        controls.push(policy(t, &s, None));
        states.push(s);
        if i < n_steps {
            y = rk4_step(&rhs, t, &y, dt)?;
        }
    }

    let mut h = Vec::with_capacity(n_nodes);
    let mut slack = Vec::with_capacity(n_nodes);
    for (s, c) in states.iter().zip(controls.iter()) {
        let (hi, si) = node_diagnostics(scenario, s, c);
        h.push(hi);
        slack.push(si);
    }

    let mut traj = Trajectory {
        times,
        states,
        controls,
        costates: None,
        h,
        psi: vec![None; n_nodes],
        qr_dot_d: vec![None; n_nodes],
        pointing_slack: slack,
        cost_value: 0.0,
        model: scenario.model(),
        control_jump_nodes: Vec::new(),
    };
    traj.cost_value = cost_of(scenario, &traj);

    let m0 = traj.states[0].mass;
    let err = traj.mass_consistency_error(params.flow_rate);
    if err > 1e-6 * m0 {
        return Err(IntegrateError::MassInconsistent(err));
    }
    traj.validate()?;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ConstraintSet, VehicleParams};
    use approx::assert_relative_eq;

    fn mars_scenario(flow_rate: f64) -> Scenario {
        Scenario {
            params: VehicleParams {
                thrust_max: 16573.0,
                flow_rate,
                mass_empty: 1505.0,
                gravity: 3.71,
                throttle_min: 0.3,
                throttle_max: 0.8,
                pressure_term: 0.0,
            },
            constraints: ConstraintSet::unconstrained(),
            initial_state: State::new(
                Vector3::new(2000.0, 0.0, 1500.0),
                Vector3::new(100.0, 0.0, -75.0),
                1905.0,
            ),
            final_position_xy: Some(nalgebra::Vector2::new(0.0, 0.0)),
            final_velocity: Vector3::zeros(),
            cost: CostKind::MinFuel,
            final_time: None,
        }
    }

    #[test]
    fn rk4_constant_rhs_is_exact() {
        let rhs = |_t: f64, _y: &[f64; 2]| [2.0, -3.0];
        let y = rk4_step(&rhs, 0.0, &[1.0, 1.0], 0.5).unwrap();
        assert_eq!(y, [2.0, -0.5]);
        let zero = |_t: f64, _y: &[f64; 1]| [0.0];
        assert_eq!(rk4_step(&zero, 0.0, &[4.0], 1.0).unwrap(), [4.0]);
    }

    #[test]
    fn rk4_exponential_decay_single_step() {
        let rhs = |_t: f64, y: &[f64; 1]| [-y[0]];
        let y = rk4_step(&rhs, 0.0, &[1.0], 0.1).unwrap();
        assert_relative_eq!(y[0], 0.9048375, epsilon = 1e-12);
    }

    #[test]
    fn rk4_fourth_order_convergence() {
        // Error vs e^{-1} shrinks ~16x when the step is halved.
        let rhs = |_t: f64, y: &[f64; 1]| [-y[0]];
        let run = |n: usize| -> f64 {
            let dt = 1.0 / n as f64;
            let mut y = [1.0];
            let mut t = 0.0;
            for _ in 0..n {
                y = rk4_step(&rhs, t, &y, dt).unwrap();
                t += dt;
            }
            (y[0] - (-1.0_f64).exp()).abs()
        };
        let e1 = run(50);
        let e2 = run(100);
        let ratio = e1 / e2;
        assert!(ratio > 12.0 && ratio < 20.0, "ratio = {ratio}");
    }

    #[test]
    fn rk4_rejects_bad_steps_and_nonfinite() {
        let rhs = |_t: f64, _y: &[f64; 1]| [f64::NAN];
        assert!(matches!(
            rk4_step(&rhs, 0.0, &[0.0], 0.1),
            Err(IntegrateError::NonFinite(_))
        ));
        let ok = |_t: f64, _y: &[f64; 1]| [0.0];
        assert!(matches!(rk4_step(&ok, 0.0, &[0.0], 0.0), Err(IntegrateError::BadStep)));
    }

    #[test]
    fn hover_policy_holds_altitude() {
        let mut scenario = mars_scenario(0.0);
        scenario.initial_state = State::new(Vector3::new(0.0, 0.0, 500.0), Vector3::zeros(), 1905.0);
        let params = scenario.params;
        let hover = move |_t: f64, s: &State, _: Option<&Costate>| {
            Control::new(Vector3::new(0.0, 0.0, 1.0), s.mass * params.gravity / params.thrust_max)
        };
        let traj = propagate(&scenario, hover, 20.0, 200).unwrap();
        for s in &traj.states {
            assert_relative_eq!(s.position.z, 500.0, epsilon = 1e-9);
            assert!(s.velocity.norm() < 1e-9);
        }
    }

    #[test]
    fn min_throttle_cannot_hold_the_vehicle() {
        // T u_min = 4971.9 N < m0 g0 = 7067.55 N, so v_z keeps decreasing.
        let scenario = mars_scenario(0.0);
        let policy = |_t: f64, _s: &State, _: Option<&Costate>| {
            Control::new(Vector3::new(0.0, 0.0, 1.0), 0.3)
        };
        let traj = propagate(&scenario, policy, 10.0, 100).unwrap();
        for w in traj.states.windows(2) {
            assert!(w[1].velocity.z < w[0].velocity.z);
        }
    }

    #[test]
    fn doubling_steps_shrinks_terminal_error_sixteenfold() {
        // Smooth analytic case: time-varying throttle, constant direction.
        let scenario = mars_scenario(0.0);
        let params = scenario.params;
        let policy = move |t: f64, _s: &State, _: Option<&Costate>| {
            Control::new(
                Vector3::new(0.0, 0.0, 1.0),
                0.5 + 0.2 * (0.37 * t).sin(),
            )
        };
        // v_z(t) = v0 + int (T alpha / m0 - g): closed form via the cosine.
        let tf = 8.0;
        let closed_form = {
            let a = params.thrust_max / 1905.0;
            let vz0 = -75.0;
            vz0 + (0.5 * a - params.gravity) * tf + 0.2 * a / 0.37 * (1.0 - (0.37 * tf).cos())
        };
        let run = |n: usize| -> f64 {
            let traj = propagate(&scenario, policy, tf, n).unwrap();
            (traj.final_state().velocity.z - closed_form).abs()
        };
        let ratio = run(50) / run(100);
        assert!(ratio > 12.0 && ratio < 20.0, "ratio = {ratio}");
    }

    #[test]
    fn fuel_exhaustion_is_detected() {
        let mut scenario = mars_scenario(8.4294);
        scenario.initial_state.mass = 1510.0; // barely above empty
        let policy = |_t: f64, _s: &State, _: Option<&Costate>| {
            Control::new(Vector3::new(0.0, 0.0, 1.0), 0.8)
        };
        let err = propagate(&scenario, policy, 60.0, 600).unwrap_err();
        assert!(matches!(err, IntegrateError::FuelExhausted(_)));
    }

    #[test]
    fn mass_bookkeeping_at_nonzero_flow() {
        let scenario = mars_scenario(8.4294);
        let policy = |t: f64, _s: &State, _: Option<&Costate>| {
            Control::new(Vector3::new(0.0, 0.0, 1.0), 0.55 + 0.2 * (0.5 * t).sin())
        };
        let traj = propagate(&scenario, policy, 20.0, 400).unwrap();
        assert!(traj.mass_consistency_error(8.4294) <= 1e-6 * 1905.0);
        // Diagnostics arrays share the grid length.
        assert_eq!(traj.h.len(), traj.times.len());
        assert_eq!(traj.psi.len(), traj.times.len());
        assert_eq!(traj.pointing_slack.len(), traj.times.len());
    }

    #[test]
    fn simpson_matches_closed_forms() {
        let times: Vec<f64> = (0..=100).map(|i| i as f64 / 100.0).collect();
        let quad: Vec<f64> = times.iter().map(|t| t * t).collect();
        assert_relative_eq!(simpson(&times, &quad), 1.0 / 3.0, epsilon = 1e-12);
        // Odd interval count exercises the 4-point closure.
        let times: Vec<f64> = (0..=101).map(|i| i as f64 / 101.0).collect();
        let cubes: Vec<f64> = times.iter().map(|t| t * t * t).collect();
        assert_relative_eq!(simpson(&times, &cubes), 0.25, epsilon = 1e-12);
    }

    #[test]
    fn segmented_throttle_integral_is_exact_for_bangs() {
        // Piecewise-constant throttle with the jump node carrying the right
        // limit: the segment-aware quadrature recovers the exact integral.
        let times = vec![0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let up = Vector3::new(0.0, 0.0, 1.0);
        let th = [0.8, 0.8, 0.3, 0.3, 0.3, 0.3];
        let controls: Vec<Control> = th.iter().map(|&a| Control::new(up, a)).collect();
        let n = times.len();
        let traj = Trajectory {
            times: times.clone(),
            states: vec![State::new(Vector3::zeros(), Vector3::zeros(), 1905.0); n],
            controls,
            costates: None,
            h: vec![None; n],
            psi: vec![None; n],
            qr_dot_d: vec![None; n],
            pointing_slack: vec![None; n],
            cost_value: 0.0,
            model: DynamicsModel::Vacuum,
            control_jump_nodes: vec![2],
        };
        // Exact: 0.8 * 2 + 0.3 * 3 = 2.5.
        assert_relative_eq!(traj.throttle_integral(), 2.5, epsilon = 1e-12);
    }
}

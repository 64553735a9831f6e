//! Indirect single shooting on the first-order optimality system.
//!
//! The state and adjoint are integrated together arc by arc with a fixed
//! RK4 step; throttle switches are located by bisection on the switching
//! function so every bang boundary lands exactly on a grid node. A damped
//! Newton iteration with a central finite-difference Jacobian drives the
//! boundary residuals to zero. Scenarios whose optimum rides the
//! glide-slope constraint are out of this solver's domain and are rejected
//! after convergence; the direct transcription handles those.

use nalgebra::{DMatrix, DVector, Vector3};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::analyze::{analyze_trajectory, AnalyzeConfig, StructureReport};
use crate::integrate::{cost_of, node_diagnostics, rk4_step, IntegrateError, Trajectory};
use crate::model::{Control, CostKind, Scenario, State};
use crate::pmp::{
    adjoint_rhs, default_singular_tol, direction_law, eval_hamiltonian_max, switching_function,
    Costate,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IndirectError {
    #[error("singular arc encountered on [{0:.3}, {1:.3}] s; indirect shooting does not synthesize singular control")]
    SingularArc(f64, f64),
    #[error("fuel exhausted at t = {0:.3} s during extremal integration")]
    FuelExhausted(f64),
    #[error("non-finite extremal integration")]
    NonFinite,
    #[error("Newton did not converge within {iterations} iterations (residual {residual:.3e})")]
    MaxIterations { iterations: usize, residual: f64 },
    #[error("Newton stalled (residual {residual:.3e})")]
    Stalled { residual: f64 },
    #[error("shooting diverged: {0}")]
    Divergence(String),
    #[error("glide-slope constraint active on the converged extremal (min h = {0:.4} m); use the direct solver")]
    StateConstraintActive(f64),
    #[error("scenario needs a free or fixed final time")]
    MissingFinalTime,
    #[error(transparent)]
    Model(#[from] crate::model::ModelError),
}

impl From<IntegrateError> for IndirectError {
    fn from(e: IntegrateError) -> Self {
        match e {
            IntegrateError::FuelExhausted(t) => IndirectError::FuelExhausted(t),
            IntegrateError::NonFinite(_) => IndirectError::NonFinite,
            other => IndirectError::Divergence(other.to_string()),
        }
    }
}

// ---------------------------------------------------------------------------
// Options and unknowns
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct IndirectOptions {
    /// Nominal number of RK4 steps across [0, t_f].
    pub n_steps: usize,
    /// Newton iteration cap per attempt.
    pub max_iterations: usize,
    /// Convergence threshold on the scaled residual infinity norm.
    pub tol: f64,
    /// Dead band for singular-arc detection; defaults to 1e-9 T / m0.
    pub singular_tol: Option<f64>,
    /// Total initial guesses tried (deterministic ladder, then seeded
    /// random perturbations).
    pub max_attempts: usize,
    pub seed: u64,
}

impl Default for IndirectOptions {
    fn default() -> Self {
        IndirectOptions {
            n_steps: 400,
            max_iterations: 200,
            tol: 1e-8,
            singular_tol: None,
            max_attempts: 24,
            seed: 0,
        }
    }
}

/// Initial adjoint values (and the free final time) the shooting iterates on.
#[derive(Debug, Clone, Copy)]
pub struct ShootingUnknowns {
    pub p_r0: Vector3<f64>,
    pub p_v0: Vector3<f64>,
    pub p_m0: f64,
    /// Final time; `None` only when the scenario fixes t_f.
    pub t_f: Option<f64>,
}

/// Scaled boundary residuals; the layout matches the active unknowns.
#[derive(Debug, Clone)]
pub struct ShootingResiduals {
    pub values: Vec<f64>,
    pub labels: Vec<&'static str>,
}

impl ShootingResiduals {
    pub fn inf_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
    pub fn norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

#[derive(Debug, Clone)]
pub struct IndirectSolution {
    pub trajectory: Trajectory,
    pub report: StructureReport,
    pub unknowns: ShootingUnknowns,
    pub residuals: ShootingResiduals,
    pub residual_norm: f64,
    pub newton_iterations: usize,
    pub attempts: usize,
}

// ---------------------------------------------------------------------------
// Cost normalization
// ---------------------------------------------------------------------------

/// Mayer-form normalization of the objective: the constant fuel costate, the
/// mass-adjoint boundary value (only meaningful with a nonzero flow rate)
/// and the free-time Hamiltonian target.
#[derive(Debug, Clone, Copy)]
pub(crate) struct CostContext {
    pub p_fuel: f64,
    pub pm_target: Option<f64>,
    pub h_target: f64,
}

pub(crate) fn cost_context(scenario: &Scenario) -> CostContext {
    let q = scenario.params.flow_rate;
    match scenario.cost {
        CostKind::MinFuel if q == 0.0 => CostContext {
            // Running fuel cost recast as a final cost: constant costate -1.
            p_fuel: -1.0,
            pm_target: None,
            h_target: 0.0,
        },
        CostKind::MinFuel | CostKind::MaxFinalMass => CostContext {
            p_fuel: 0.0,
            pm_target: Some(1.0),
            h_target: 0.0,
        },
        CostKind::MinTime => CostContext {
            p_fuel: 0.0,
            pm_target: if q > 0.0 { Some(0.0) } else { None },
            h_target: 1.0,
        },
    }
}

// ---------------------------------------------------------------------------
// Unknown/residual layout
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
struct Layout {
    pinpoint: bool,
    use_pm: bool,
    free_tf: bool,
    r_scale: f64,
    v_scale: f64,
}

impl Layout {
    fn for_scenario(scenario: &Scenario, ctx: &CostContext) -> Layout {
        Layout {
            pinpoint: scenario.pinpoint(),
            use_pm: ctx.pm_target.is_some(),
            free_tf: scenario.final_time.is_none(),
            r_scale: scenario.initial_state.position.norm().max(1.0),
            v_scale: scenario.initial_state.velocity.norm().max(1.0),
        }
    }

    fn dim(&self) -> usize {
        let mut n = 3; // p_v0
        n += if self.pinpoint { 3 } else { 1 }; // p_r0 or just p_z0
        if self.use_pm {
            n += 1;
        }
        if self.free_tf {
            n += 1;
        }
        n
    }

    fn pack(&self, u: &ShootingUnknowns) -> DVector<f64> {
        let mut v = Vec::with_capacity(self.dim());
        if self.pinpoint {
            v.extend_from_slice(&[u.p_r0.x, u.p_r0.y, u.p_r0.z]);
        } else {
            v.push(u.p_r0.z);
        }
        v.extend_from_slice(&[u.p_v0.x, u.p_v0.y, u.p_v0.z]);
        if self.use_pm {
            v.push(u.p_m0);
        }
        if self.free_tf {
            v.push(u.t_f.expect("free t_f requires a guess"));
        }
        DVector::from_vec(v)
    }

    fn unpack(&self, v: &DVector<f64>, fixed_tf: Option<f64>) -> ShootingUnknowns {
        let mut k;
        let p_r0 = if self.pinpoint {
            k = 3;
            Vector3::new(v[0], v[1], v[2])
        } else {
            k = 1;
            Vector3::new(0.0, 0.0, v[0])
        };
        let p_v0 = Vector3::new(v[k], v[k + 1], v[k + 2]);
        k += 3;
        let p_m0 = if self.use_pm {
            let x = v[k];
            k += 1;
            x
        } else {
            0.0
        };
        let t_f = if self.free_tf { Some(v[k]) } else { fixed_tf };
        ShootingUnknowns { p_r0, p_v0, p_m0, t_f }
    }
}

// ---------------------------------------------------------------------------
// Extremal integration
// ---------------------------------------------------------------------------

const N_EXT: usize = 14; // r, v, m, p_r, p_v, p_m

fn pack_extremal(state: &State, costate: &Costate) -> [f64; N_EXT] {
    [
        state.position.x, state.position.y, state.position.z,
        state.velocity.x, state.velocity.y, state.velocity.z,
        state.mass,
        costate.p_r.x, costate.p_r.y, costate.p_r.z,
        costate.p_v.x, costate.p_v.y, costate.p_v.z,
        costate.p_m,
    ]
}

fn unpack_state(y: &[f64; N_EXT]) -> State {
    State::new(
        Vector3::new(y[0], y[1], y[2]),
        Vector3::new(y[3], y[4], y[5]),
        y[6],
    )
}

fn unpack_costate(y: &[f64; N_EXT], p_fuel: f64) -> Costate {
    let mut c = Costate::new(
        Vector3::new(y[7], y[8], y[9]),
        Vector3::new(y[10], y[11], y[12]),
        y[13],
    );
    c.p_fuel = p_fuel;
    c
}

struct Extremal {
    times: Vec<f64>,
    nodes: Vec<[f64; N_EXT]>,
    throttles: Vec<f64>,
    switch_nodes: Vec<usize>,
}

fn integrate_extremal(
    scenario: &Scenario,
    ctx: &CostContext,
    y0: [f64; N_EXT],
    t_f: f64,
    n_steps: usize,
    singular_tol: f64,
) -> Result<Extremal, IndirectError> {
    if !(t_f > 0.0) || !t_f.is_finite() {
        return Err(IndirectError::Divergence(format!("nonpositive final time {t_f}")));
    }
    let params = scenario.params;
    let constraints = scenario.constraints;
    let pointing = params.pressure_term <= 0.0 && constraints.pointing_enabled;
    let theta = constraints.pointing_half_angle;

    let psi_of = |y: &[f64; N_EXT]| -> f64 {
        let state = unpack_state(y);
        let costate = unpack_costate(y, ctx.p_fuel);
        let d = direction_law(&costate.p_v, theta, pointing).direction;
        switching_function(&state, &costate, &d, &params)
    };

    let rhs_for = |throttle: f64| {
        move |_t: f64, y: &[f64; N_EXT]| -> [f64; N_EXT] {
            let state = unpack_state(y);
            let costate = unpack_costate(y, ctx.p_fuel);
            let d = direction_law(&costate.p_v, theta, pointing).direction;
            let control = Control::new(d, throttle);
            let sd = match crate::model::eval_dynamics(&state, &control, &params) {
                Ok(sd) => sd,
                Err(_) => return [f64::NAN; N_EXT],
            };
            let cd = adjoint_rhs(&state, &costate, &control, &params);
            [
                sd.d_position.x, sd.d_position.y, sd.d_position.z,
                sd.d_velocity.x, sd.d_velocity.y, sd.d_velocity.z,
                sd.d_mass,
                cd.d_p_r.x, cd.d_p_r.y, cd.d_p_r.z,
                cd.d_p_v.x, cd.d_p_v.y, cd.d_p_v.z,
                cd.d_p_m,
            ]
        }
    };

    // Initial throttle level from the sign of Psi; an exactly-zero start is
    // disambiguated by its rate.
    let psi0 = psi_of(&y0);
    if !psi0.is_finite() {
        return Err(IndirectError::NonFinite);
    }
    let mut positive = if psi0.abs() > singular_tol {
        psi0 > 0.0
    } else {
        let state = unpack_state(&y0);
        let costate = unpack_costate(&y0, ctx.p_fuel);
        let d = direction_law(&costate.p_v, theta, pointing).direction;
        let rate = crate::pmp::expected_psi_rate(&state, &costate, &d, &params);
        if rate.abs() <= singular_tol / t_f.max(1.0) {
            return Err(IndirectError::SingularArc(0.0, 0.0));
        }
        rate > 0.0
    };
    let throttle_of =
        |positive: bool| if positive { params.throttle_max } else { params.throttle_min };

    let h_base = t_f / n_steps as f64;
    let mut times = Vec::with_capacity(n_steps + 4);
    let mut nodes = Vec::with_capacity(n_steps + 4);
    let mut throttles = Vec::with_capacity(n_steps + 4);
    let mut switch_nodes: Vec<usize> = Vec::new();

    let mut t = 0.0;
    let mut y = y0;
    times.push(0.0);
    nodes.push(y);
    throttles.push(throttle_of(positive));

    let mut singular_run = 0usize;
    let mut singular_start = 0.0;
    let mut grid_idx = 1usize;

    while grid_idx <= n_steps {
        let target = if grid_idx == n_steps { t_f } else { grid_idx as f64 * h_base };
        let step = target - t;
        if step <= 0.0 {
            grid_idx += 1;
            continue;
        }
        let rhs = rhs_for(throttle_of(positive));
        let trial = rk4_step(&rhs, t, &y, step)?;
        let psi_trial = psi_of(&trial);
        if !psi_trial.is_finite() {
            return Err(IndirectError::NonFinite);
        }

        let flipped = if positive { psi_trial < 0.0 } else { psi_trial > 0.0 };
        if flipped {
            // Locate the crossing by bisection on the step fraction.
            let mut lo = 0.0_f64;
            let mut hi = step;
            let mut y_hi = trial;
            for _ in 0..100 {
                if hi - lo <= 1e-13 * t_f.max(1.0) {
                    break;
                }
                let mid = 0.5 * (lo + hi);
                let y_mid = rk4_step(&rhs, t, &y, mid)?;
                let pm = psi_of(&y_mid);
                let crossed = if positive { pm < 0.0 } else { pm > 0.0 };
                if crossed {
                    hi = mid;
                    y_hi = y_mid;
                } else {
                    lo = mid;
                }
            }
            if switch_nodes.len() >= 60 {
                return Err(IndirectError::Divergence("too many throttle switches".into()));
            }
            let t_switch = t + hi;
            positive = !positive;
            y = y_hi;
            if target - t_switch > 1e-9 * t_f.max(1.0) {
                t = t_switch;
            } else {
                // The switch node doubles as the upcoming grid node.
                t = t_switch;
                grid_idx += 1;
            }
            times.push(t);
            nodes.push(y);
            throttles.push(throttle_of(positive));
            switch_nodes.push(nodes.len() - 1);
            continue;
        }

        // Plain step accepted.
        t = target;
        y = trial;
        times.push(t);
        nodes.push(y);
        throttles.push(throttle_of(positive));
        grid_idx += 1;

        let state = unpack_state(&y);
        if !state.is_finite() {
            return Err(IndirectError::NonFinite);
        }
        if state.mass <= params.mass_empty && t < t_f {
            return Err(IndirectError::FuelExhausted(t));
        }
        // Singular-arc watch: a run of small |Psi| longer than two grid
        // steps (bisected switch nodes are excluded by construction).
        if psi_trial.abs() <= singular_tol {
            if singular_run == 0 {
                singular_start = t;
            }
            singular_run += 1;
            if singular_run >= 3 {
                return Err(IndirectError::SingularArc(singular_start, t));
            }
        } else {
            singular_run = 0;
        }
    }

    Ok(Extremal { times, nodes, throttles, switch_nodes })
}

fn assemble_trajectory(scenario: &Scenario, ctx: &CostContext, ext: &Extremal) -> Trajectory {
    let params = scenario.params;
    let pointing = params.pressure_term <= 0.0 && scenario.constraints.pointing_enabled;
    let theta = scenario.constraints.pointing_half_angle;
    let n = ext.times.len();

    let mut states = Vec::with_capacity(n);
    let mut costates = Vec::with_capacity(n);
    let mut controls = Vec::with_capacity(n);
    let mut psi = Vec::with_capacity(n);
    let mut qrd = Vec::with_capacity(n);
    let mut h = Vec::with_capacity(n);
    let mut slack = Vec::with_capacity(n);

    for i in 0..n {
        let state = unpack_state(&ext.nodes[i]);
        let costate = unpack_costate(&ext.nodes[i], ctx.p_fuel);
        let d = direction_law(&costate.p_v, theta, pointing).direction;
        let control = Control::new(d, ext.throttles[i]);
        psi.push(Some(switching_function(&state, &costate, &d, &params)));
        qrd.push(Some(crate::pmp::qr_dot_d(&costate, &d)));
        let (hi, si) = node_diagnostics(scenario, &state, &control);
        h.push(hi);
        slack.push(si);
        states.push(state);
        costates.push(costate);
        controls.push(control);
    }

    let mut traj = Trajectory {
        times: ext.times.clone(),
        states,
        controls,
        costates: Some(costates),
        h,
        psi,
        qr_dot_d: qrd,
        pointing_slack: slack,
        cost_value: 0.0,
        model: scenario.model(),
        control_jump_nodes: ext.switch_nodes.clone(),
    };
    traj.cost_value = cost_of(scenario, &traj);
    traj
}

// ---------------------------------------------------------------------------
// Shooting residuals
// ---------------------------------------------------------------------------

/// Integrate one extremal from the given unknowns and evaluate the scaled
/// boundary residuals.
pub fn shoot(
    scenario: &Scenario,
    unknowns: &ShootingUnknowns,
    options: &IndirectOptions,
) -> Result<(ShootingResiduals, Trajectory), IndirectError> {
    let ctx = cost_context(scenario);
    let layout = Layout::for_scenario(scenario, &ctx);
    let t_f = unknowns.t_f.or(scenario.final_time).ok_or(IndirectError::MissingFinalTime)?;
    let singular_tol = options
        .singular_tol
        .unwrap_or_else(|| default_singular_tol(&scenario.params, scenario.initial_state.mass));

    let mut costate0 = Costate::new(unknowns.p_r0, unknowns.p_v0, unknowns.p_m0);
    costate0.p_fuel = ctx.p_fuel;
    let y0 = pack_extremal(&scenario.initial_state, &costate0);
    let ext = integrate_extremal(scenario, &ctx, y0, t_f, options.n_steps, singular_tol)?;
    let traj = assemble_trajectory(scenario, &ctx, &ext);

    let mut values = Vec::with_capacity(layout.dim());
    let mut labels = Vec::with_capacity(layout.dim());
    let fs = *traj.final_state();
    let fc = traj.costates.as_ref().unwrap().last().copied().unwrap();

    if layout.pinpoint {
        let rf = scenario.final_position().unwrap();
        for (k, lbl) in [(0usize, "x(tf)"), (1, "y(tf)"), (2, "z(tf)")] {
            values.push((fs.position[k] - rf[k]) / layout.r_scale);
            labels.push(lbl);
        }
        for (k, lbl) in [(0usize, "vx(tf)"), (1, "vy(tf)"), (2, "vz(tf)")] {
            values.push((fs.velocity[k] - scenario.final_velocity[k]) / layout.v_scale);
            labels.push(lbl);
        }
    } else {
        values.push(fs.position.z / layout.r_scale);
        labels.push("z(tf)");
        values.push((fs.velocity.z - scenario.final_velocity.z) / layout.v_scale);
        labels.push("vz(tf)");
        values.push(fc.p_v.x);
        labels.push("p_vx(tf)");
        values.push(fc.p_v.y);
        labels.push("p_vy(tf)");
    }
    if let Some(target) = ctx.pm_target {
        values.push(fc.p_m - target);
        labels.push("p_m(tf)");
    }
    if layout.free_tf {
        let h_tf =
            eval_hamiltonian_max(&fs, &fc, &scenario.constraints, &scenario.params, singular_tol);
        values.push(h_tf - ctx.h_target);
        labels.push("H(tf)");
    }

    Ok((ShootingResiduals { values, labels }, traj))
}

// ---------------------------------------------------------------------------
// Newton iteration
// ---------------------------------------------------------------------------

struct NewtonOutcome {
    unknowns: ShootingUnknowns,
    residuals: ShootingResiduals,
    trajectory: Trajectory,
    iterations: usize,
}

fn newton_attempt(
    scenario: &Scenario,
    guess: &ShootingUnknowns,
    options: &IndirectOptions,
) -> Result<NewtonOutcome, IndirectError> {
    let ctx = cost_context(scenario);
    let layout = Layout::for_scenario(scenario, &ctx);
    let mut u = layout.pack(guess);
    let dim = layout.dim();

    let eval = |v: &DVector<f64>| -> Result<ShootingResiduals, IndirectError> {
        let unknowns = layout.unpack(v, scenario.final_time);
        if let Some(tf) = unknowns.t_f {
            if !(tf > 1e-3 && tf < 1e6) {
                return Err(IndirectError::Divergence(format!("final time {tf} out of range")));
            }
        }
        shoot(scenario, &unknowns, options).map(|(r, _)| r)
    };

    let (mut res, mut traj) = shoot(scenario, &layout.unpack(&u, scenario.final_time), options)?;
    let mut best_err = res.norm();

    for it in 0..options.max_iterations {
        if res.inf_norm() <= options.tol {
            return Ok(NewtonOutcome {
                unknowns: layout.unpack(&u, scenario.final_time),
                residuals: res,
                trajectory: traj,
                iterations: it,
            });
        }

        // Central finite-difference Jacobian, one-sided on failures.
        let mut jac = DMatrix::zeros(dim, dim);
        for j in 0..dim {
            let dj = 1e-6 * u[j].abs().max(1.0);
            let mut up = u.clone();
            up[j] += dj;
            let mut dn = u.clone();
            dn[j] -= dj;
            let col: Vec<f64> = match (eval(&up), eval(&dn)) {
                (Ok(rp), Ok(rm)) => rp
                    .values
                    .iter()
                    .zip(rm.values.iter())
                    .map(|(a, b)| (a - b) / (2.0 * dj))
                    .collect(),
                (Ok(rp), Err(_)) => rp
                    .values
                    .iter()
                    .zip(res.values.iter())
                    .map(|(a, b)| (a - b) / dj)
                    .collect(),
                (Err(_), Ok(rm)) => res
                    .values
                    .iter()
                    .zip(rm.values.iter())
                    .map(|(a, b)| (a - b) / dj)
                    .collect(),
                (Err(e), Err(_)) => return Err(e),
            };
            for i in 0..dim {
                jac[(i, j)] = col[i];
            }
        }

        let rhs = -DVector::from_vec(res.values.clone());
        let dx = match jac.clone().lu().solve(&rhs) {
            Some(dx) if dx.iter().all(|v| v.is_finite()) => dx,
            _ => {
                // Regularized fallback for a singular Jacobian.
                let mut jtj = jac.transpose() * &jac;
                for i in 0..dim {
                    jtj[(i, i)] += 1e-10;
                }
                let jtr = jac.transpose() * &rhs;
                match jtj.lu().solve(&jtr) {
                    Some(dx) if dx.iter().all(|v| v.is_finite()) => dx,
                    _ => return Err(IndirectError::Divergence("singular Jacobian".into())),
                }
            }
        };

        // Backtracking line search on the residual norm.
        let mut step = 1.0_f64;
        let mut accepted = false;
        while step >= 1e-4 {
            let candidate = &u + &dx * step;
            if let Ok((r_new, t_new)) =
                shoot(scenario, &layout.unpack(&candidate, scenario.final_time), options)
            {
                if r_new.norm() < (1.0 - 1e-4 * step) * best_err {
                    u = candidate;
                    res = r_new;
                    traj = t_new;
                    best_err = res.norm();
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            return Err(IndirectError::Stalled { residual: res.inf_norm() });
        }
    }

    if res.inf_norm() <= options.tol {
        return Ok(NewtonOutcome {
            unknowns: layout.unpack(&u, scenario.final_time),
            residuals: res,
            trajectory: traj,
            iterations: options.max_iterations,
        });
    }
    Err(IndirectError::MaxIterations {
        iterations: options.max_iterations,
        residual: res.inf_norm(),
    })
}

// ---------------------------------------------------------------------------
// Initial guesses
// ---------------------------------------------------------------------------

/// Default guess: p_v0 against the incoming velocity, zero position adjoint,
/// final time from a doubled gravity-relieved deceleration estimate.
pub fn default_guess(scenario: &Scenario) -> ShootingUnknowns {
    let v0 = scenario.initial_state.velocity;
    let p_v0 = if v0.norm() > 0.0 { -v0 / v0.norm() } else { Vector3::new(0.0, 0.0, 1.0) };
    let p = &scenario.params;
    let decel = (p.thrust_max * p.throttle_max / scenario.initial_state.mass - p.gravity).max(0.1);
    let t_f = (2.0 * v0.norm() / decel).max(5.0);
    ShootingUnknowns {
        p_r0: Vector3::zeros(),
        p_v0,
        p_m0: 0.0,
        t_f: if scenario.final_time.is_some() { None } else { Some(t_f) },
    }
}

fn guess_ladder(
    scenario: &Scenario,
    base: &ShootingUnknowns,
    options: &IndirectOptions,
) -> Vec<ShootingUnknowns> {
    let ctx = cost_context(scenario);
    let mut out = vec![*base];

    // With the running fuel cost the switching scale is m0 / T; aim the
    // velocity adjoint magnitude there.
    if ctx.p_fuel != 0.0 && base.p_v0.norm() > 0.0 {
        let scale = scenario.initial_state.mass / scenario.params.thrust_max;
        for s in [1.2, 0.8] {
            let mut g = *base;
            g.p_v0 = base.p_v0.normalize() * (s * scale);
            out.push(g);
        }
    }
    for s in [0.5, 0.25, 2.0, 4.0] {
        let mut g = *base;
        g.p_v0 *= s;
        out.push(g);
    }
    if ctx.pm_target.is_some() {
        for pm in [0.5, 1.0] {
            let mut g = *base;
            g.p_m0 = pm;
            out.push(g);
        }
    }
    if let Some(tf) = base.t_f {
        for s in [0.7, 1.4] {
            let mut g = *base;
            g.t_f = Some(tf * s);
            out.push(g);
        }
    }

    // Seeded random perturbations fill the remaining attempts.
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let tf_base = base.t_f.or(scenario.final_time).unwrap_or(60.0);
    let pv_scale = base.p_v0.norm().max(1e-3);
    while out.len() < options.max_attempts {
        let mut g = *base;
        let mut nrm = || rng.random::<f64>() * 2.0 - 1.0;
        g.p_v0 = base.p_v0 + Vector3::new(nrm(), nrm(), nrm()) * (0.6 * pv_scale);
        g.p_r0 = base.p_r0 + Vector3::new(nrm(), nrm(), nrm()) * (0.6 * pv_scale / tf_base);
        if ctx.pm_target.is_some() {
            g.p_m0 = (base.p_m0 + nrm() * 0.6).max(-2.0);
        }
        if let Some(tf) = base.t_f {
            g.t_f = Some((tf * (1.0 + 0.3 * nrm())).max(1.0));
        }
        out.push(g);
    }
    out.truncate(options.max_attempts.max(1));
    out
}

// ---------------------------------------------------------------------------
// Driver
// ---------------------------------------------------------------------------

/// Solve the landing problem by Newton shooting on the optimality system.
pub fn solve_indirect(
    scenario: &Scenario,
    initial_guess: Option<ShootingUnknowns>,
    options: &IndirectOptions,
) -> Result<IndirectSolution, IndirectError> {
    scenario.validate()?;
    let base = initial_guess.unwrap_or_else(|| default_guess(scenario));
    let guesses = guess_ladder(scenario, &base, options);

    let mut best_failure: Option<(f64, IndirectError)> = None;
    for (attempt, guess) in guesses.iter().enumerate() {
        match newton_attempt(scenario, guess, options) {
            Ok(outcome) => {
                // The shooting formulation assumes the state constraint stays
                // inactive; a converged extremal that dips below the cone is
                // outside this solver's domain.
                if scenario.constraints.glide_slope_enabled {
                    let h_min = outcome
                        .trajectory
                        .h
                        .iter()
                        .flatten()
                        .fold(f64::INFINITY, |m, v| m.min(*v));
                    let feas = -1e-6 * scenario.initial_state.position.norm().max(1.0);
                    if h_min < feas {
                        return Err(IndirectError::StateConstraintActive(h_min));
                    }
                }
                let ctx = cost_context(scenario);
                let switch_times: Vec<f64> = outcome
                    .trajectory
                    .control_jump_nodes
                    .iter()
                    .map(|&i| outcome.trajectory.times[i])
                    .collect();
                let cfg = AnalyzeConfig {
                    exact_switch_times: Some(switch_times),
                    transversality_target: if scenario.final_time.is_none() {
                        Some(ctx.h_target)
                    } else {
                        None
                    },
                    ..AnalyzeConfig::default()
                };
                let report = analyze_trajectory(&outcome.trajectory, scenario, &cfg);
                let residual_norm = outcome.residuals.inf_norm();
                return Ok(IndirectSolution {
                    trajectory: outcome.trajectory,
                    report,
                    unknowns: outcome.unknowns,
                    residuals: outcome.residuals,
                    residual_norm,
                    newton_iterations: outcome.iterations,
                    attempts: attempt + 1,
                });
            }
            Err(e) => {
                let score = match &e {
                    IndirectError::MaxIterations { residual, .. } => *residual,
                    IndirectError::Stalled { residual } => *residual,
                    _ => f64::INFINITY,
                };
                let replace = match &best_failure {
                    None => true,
                    Some((s, _)) => score < *s,
                };
                if replace {
                    best_failure = Some((score, e));
                }
            }
        }
    }
    Err(best_failure
        .map(|(_, e)| e)
        .unwrap_or_else(|| IndirectError::Divergence("no attempts".into())))
}

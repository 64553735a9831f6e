//! Acceptance suite: one test per criterion, each printing a pass line with
//! its measured margins (visible with --nocapture). Expected values marked
//! as derived were computed from the independent oracles embedded here.

use std::sync::OnceLock;

use descent::analyze::Verdict;
use descent::direct::{solve_direct, DirectSolution, TranscriptionConfig};
use descent::indirect::{solve_indirect, IndirectOptions, IndirectSolution};
use descent::integrate::Trajectory;
use descent::model::{Control, Scenario, State};
use descent::pmp::{
    adjoint_rhs, direction_law, expected_psi_rate, hamiltonian, ArcKind, Costate,
};
use descent::presets;
use nalgebra::Vector3;

// ---------------------------------------------------------------------------
// Shared solutions (computed once, reused across criteria)
// ---------------------------------------------------------------------------

fn indirect_solution(key: &'static str, scenario: Scenario) -> &'static IndirectSolution {
    static CACHE: OnceLock<std::sync::Mutex<std::collections::HashMap<&'static str, &'static IndirectSolution>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| std::sync::Mutex::new(std::collections::HashMap::new()));
    let mut map = cache.lock().unwrap();
    if let Some(sol) = map.get(key) {
        return sol;
    }
    let sol = solve_indirect(&scenario, None, &IndirectOptions::default())
        .unwrap_or_else(|e| panic!("indirect solve of {key} failed: {e}"));
    let leaked: &'static IndirectSolution = Box::leak(Box::new(sol));
    map.insert(key, leaked);
    leaked
}

fn direct_solution(key: &'static str, scenario: Scenario, nodes: usize) -> &'static DirectSolution {
    static CACHE: OnceLock<std::sync::Mutex<std::collections::HashMap<&'static str, &'static DirectSolution>>> =
        OnceLock::new();
    let cache = CACHE.get_or_init(|| std::sync::Mutex::new(std::collections::HashMap::new()));
    let mut map = cache.lock().unwrap();
    if let Some(sol) = map.get(key) {
        return sol;
    }
    let cfg = TranscriptionConfig { n_nodes: nodes, ..TranscriptionConfig::default() };
    let sol = solve_direct(&scenario, &cfg, None)
        .unwrap_or_else(|e| panic!("direct solve of {key} failed: {e}"));
    assert!(sol.converged, "direct solve of {key} did not converge");
    let leaked: &'static DirectSolution = Box::leak(Box::new(sol));
    map.insert(key, leaked);
    leaked
}

fn arc_kinds(report: &descent::analyze::StructureReport) -> Vec<ArcKind> {
    report.arcs.iter().map(|a| a.kind).collect()
}

// ---------------------------------------------------------------------------
// Criterion 1: direction-law optimality against a brute-force cone search
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_direction_law_optimality() {
    let start = std::time::Instant::now();
    let samples = 100_000;
    let cases_per_theta = 10_000;
    let mut worst_gap = f64::NEG_INFINITY; // brute - analytic (should be <= 0 + tol)
    let mut worst_slack = f64::NEG_INFINITY; // analytic - brute (sampling resolution)

    // Deterministic splitmix64 stream.
    let mut state = 0x243f6a8885a308d3_u64;
    let mut next_u = move || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        (z ^ (z >> 31)) as f64 / u64::MAX as f64
    };

    for theta in [0.1_f64, std::f64::consts::FRAC_PI_4, 1.2] {
        // Uniform samples of the spherical cap d_z >= cos(theta).
        let cos_t = theta.cos();
        let mut sx = Vec::with_capacity(samples);
        let mut sy = Vec::with_capacity(samples);
        let mut sz = Vec::with_capacity(samples);
        for _ in 0..samples {
            let z = cos_t + (1.0 - cos_t) * next_u();
            let az = 2.0 * std::f64::consts::PI * next_u();
            let r = (1.0 - z * z).max(0.0).sqrt();
            sx.push(r * az.cos());
            sy.push(r * az.sin());
            sz.push(z);
        }

        for _ in 0..cases_per_theta {
            // Random unit p_v (Gaussian-free construction via sphere point picking).
            let z = 2.0 * next_u() - 1.0;
            let az = 2.0 * std::f64::consts::PI * next_u();
            let r = (1.0 - z * z).max(0.0).sqrt();
            let p = Vector3::new(r * az.cos(), r * az.sin(), z);

            let analytic = direction_law(&p, theta, true);
            let obj = p.dot(&analytic.direction);
            let mut brute = f64::NEG_INFINITY;
            for i in 0..samples {
                let v = p.x * sx[i] + p.y * sy[i] + p.z * sz[i];
                if v > brute {
                    brute = v;
                }
            }
            worst_gap = worst_gap.max(brute - obj);
            worst_slack = worst_slack.max(obj - brute);
        }
    }
    let elapsed = start.elapsed();
    assert!(worst_gap <= 1e-6, "brute force beat the direction law by {worst_gap:.3e}");
    // Boundary maximizers see a linear falloff at the sampling resolution
    // (~6e-3 rad for 1e5 cap samples), so the two-sided sanity bound is
    // looser than the criterion's one-sided bound.
    assert!(worst_slack <= 2e-2, "sampling resolution check failed: {worst_slack:.3e}");
    assert!(elapsed.as_secs_f64() < 10.0, "criterion 1 exceeded 10 s: {elapsed:?}");
    println!(
        "criterion 1 PASS direction-law optimality: worst brute-analytic gap {worst_gap:.2e}, {elapsed:?}"
    );
}

// ---------------------------------------------------------------------------
// Criterion 2: adjoint dynamics equal -dH/dX by central differences
// ---------------------------------------------------------------------------

#[test]
fn criterion_02_adjoint_matches_hamiltonian_gradient() {
    let start = std::time::Instant::now();
    let mut state_word = 0x853c49e6748fea9b_u64;
    let mut next = move || {
        state_word = state_word.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (state_word >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
    };
    let mut worst = 0.0_f64;
    for sigma in [0.0, 2000.0] {
        let mut params = presets::mars_vehicle(8.4294);
        params.pressure_term = sigma;
        for _ in 0..500 {
            let state = State::new(
                Vector3::new(next() * 2000.0, next() * 2000.0, 800.0 + next() * 600.0),
                Vector3::new(next() * 120.0, next() * 120.0, next() * 120.0),
                1700.0 + 200.0 * next(),
            );
            let mut costate = Costate::new(
                Vector3::new(next(), next(), next()) * 0.05,
                Vector3::new(next(), next(), next()),
                next(),
            );
            costate.p_fuel = if next() > 0.0 { -1.0 } else { 0.0 };
            let d = direction_law(&costate.p_v, 0.0, false).direction;
            let control = Control::new(d, 0.55 + 0.20 * next());
            let got = adjoint_rhs(&state, &costate, &control, &params);

            let h_of = |s: &State| hamiltonian(s, &costate, &control, &params);
            let mut check = |value: f64, fd: f64| {
                let rel = (value - fd).abs() / fd.abs().max(1.0);
                worst = worst.max(rel);
                assert!(rel <= 1e-6, "adjoint mismatch: {value} vs {fd}");
            };
            for k in 0..3 {
                let dd = 1e-6 * state.position[k].abs().max(1.0);
                let mut sp = state;
                let mut sm = state;
                sp.position[k] += dd;
                sm.position[k] -= dd;
                check(got.d_p_r[k], -(h_of(&sp) - h_of(&sm)) / (2.0 * dd));
            }
            for k in 0..3 {
                let dd = 1e-6 * state.velocity[k].abs().max(1.0);
                let mut sp = state;
                let mut sm = state;
                sp.velocity[k] += dd;
                sm.velocity[k] -= dd;
                check(got.d_p_v[k], -(h_of(&sp) - h_of(&sm)) / (2.0 * dd));
            }
            let dd = 1e-6 * state.mass;
            let mut sp = state;
            let mut sm = state;
            sp.mass += dd;
            sm.mass -= dd;
            check(got.d_p_m, -(h_of(&sp) - h_of(&sm)) / (2.0 * dd));
        }
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 5.0, "criterion 2 exceeded 5 s: {elapsed:?}");
    println!("criterion 2 PASS adjoint vs -dH/dX: worst rel err {worst:.2e}, {elapsed:?}");
}

// ---------------------------------------------------------------------------
// Criterion 3: 1-D closed-form oracle
// ---------------------------------------------------------------------------

/// Independent oracle: Min arc then Max arc of a double integrator, the Min
/// duration found by bisection on the final-altitude equation.
fn vertical_oracle(z0: f64, vz0: f64, a_min: f64, a_max: f64) -> (f64, f64) {
    let delta_of = |tau: f64| -(vz0 + a_min * tau) / a_max;
    let alt = |tau: f64| {
        let d = delta_of(tau);
        z0 + vz0 * tau + 0.5 * a_min * tau * tau - 0.5 * a_max * d * d
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while alt(hi) > 0.0 {
        hi *= 2.0;
        assert!(hi < 1e6);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if alt(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let tau = 0.5 * (lo + hi);
    (tau, tau + delta_of(tau))
}

#[test]
fn criterion_03_one_dimensional_oracle() {
    let start = std::time::Instant::now();
    let scenario = presets::vertical_descent();
    let p = scenario.params;
    let m0 = scenario.initial_state.mass;
    let a_min = p.thrust_max * p.throttle_min / m0 - p.gravity;
    let a_max = p.thrust_max * p.throttle_max / m0 - p.gravity;
    let (tau, tf) = vertical_oracle(1500.0, -75.0, a_min, a_max);
    // Frozen oracle outputs (recomputed above and pinned here).
    assert!((tau - 6.0524).abs() < 5e-4, "oracle drifted: tau = {tau}");
    assert!((tf - 31.1796).abs() < 5e-4, "oracle drifted: tf = {tf}");

    let sol = indirect_solution("vertical", scenario);
    assert!(sol.residual_norm <= 1e-8);
    assert_eq!(sol.report.switching_times.len(), 1);
    let got_tau = sol.report.switching_times[0];
    let got_tf = sol.trajectory.final_time();
    let tau_err = (got_tau - tau).abs() / tau;
    let tf_err = (got_tf - tf).abs() / tf;
    assert!(tau_err < 0.01, "switching time off by {:.3}%", 100.0 * tau_err);
    assert!(tf_err < 0.01, "final time off by {:.3}%", 100.0 * tf_err);
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0);
    println!(
        "criterion 3 PASS 1-D oracle: tau {got_tau:.4} vs {tau:.4}, tf {got_tf:.4} vs {tf:.4}, {elapsed:?}"
    );
}

// ---------------------------------------------------------------------------
// Criterion 4: Max-Min-Max structure on the four reference scenarios
// ---------------------------------------------------------------------------

#[test]
fn criterion_04_reference_scenarios_are_max_min_max() {
    let start = std::time::Instant::now();
    let cases: [(&'static str, Scenario); 4] = [
        ("unconstrained", presets::unconstrained_min_fuel()),
        ("gs0", presets::altitude_constrained()),
        ("gs0_p45", presets::altitude_and_pointing()),
        ("gs5_p45_mass", presets::mass_glide_pointing()),
    ];
    for (key, scenario) in cases {
        let sol = direct_solution(key, scenario.clone(), 100);
        // Classification at the stated tolerance, independently of the report.
        let arcs = descent::analyze::classify_arcs(&sol.trajectory, &scenario.params, 0.01);
        let kinds: Vec<ArcKind> = arcs.iter().map(|a| a.kind).collect();
        assert_eq!(
            kinds,
            vec![ArcKind::Max, ArcKind::Min, ArcKind::Max],
            "{key}: got {kinds:?}"
        );
        assert!(
            !kinds.contains(&ArcKind::Singular),
            "{key}: singular arc at norm_tol 0.01"
        );
        println!(
            "criterion 4 PASS {key}: Max-Min-Max with switches near {:?}",
            sol.report.switching_times
        );
    }
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "criterion 4 exceeded 5 min: {elapsed:?}");
    println!("criterion 4 PASS all four reference scenarios, {elapsed:?}");
}

// ---------------------------------------------------------------------------
// Criterion 5: contact count and placement on the gs0 + pointing scenario
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_contact_bounds() {
    let scenario = presets::altitude_and_pointing();
    let p = scenario.params;
    let m0 = scenario.initial_state.mass;
    // Threshold check of the contact-count bound, from the constants.
    let ratio = m0 * p.gravity / p.thrust_max;
    assert!((ratio - 0.4265).abs() < 5e-4, "threshold drifted: {ratio}");
    assert!(p.throttle_min < ratio, "u_min < m0 g0 / T must hold for the 2-contact bound");

    let sol = direct_solution("gs0_p45", scenario, 100);
    let contacts = &sol.report.contacts;
    assert_eq!(contacts.len(), 2, "expected exactly 2 contacts, got {contacts:?}");
    let first_arc = sol.report.arcs.first().expect("arcs");
    assert_eq!(first_arc.kind, ArcKind::Max);
    assert!(
        contacts[0].t_start >= first_arc.t_start && contacts[0].t_end <= first_arc.t_end,
        "first contact must lie on the leading Max arc"
    );
    assert!(!contacts[0].includes_final);
    assert!(contacts[1].includes_final, "second contact must be the final point");
    assert_eq!(sol.report.checks["contact_total_bound"].status, Verdict::Pass);
    assert_eq!(sol.report.checks["contacts_per_arc"].status, Verdict::Pass);
    assert_eq!(sol.report.checks["min_arc_contact_exclusion"].status, Verdict::Pass);
    println!(
        "criterion 5 PASS contacts: one on the first Max arc at [{:.2}, {:.2}], one at t_f = {:.2}",
        contacts[0].t_start, contacts[0].t_end, contacts[1].t_end
    );
}

// ---------------------------------------------------------------------------
// Criterion 6: minimum thrust at interior contacts
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_contact_force_inequality() {
    for (key, scenario) in [
        ("gs0", presets::altitude_constrained()),
        ("gs0_p45", presets::altitude_and_pointing()),
        ("gs5_p45_mass", presets::mass_glide_pointing()),
    ] {
        let sol = direct_solution(key, scenario.clone(), 100);
        let p = scenario.params;
        let gamma = scenario.constraints.glide_slope_angle;
        let floor = p.mass_empty * p.gravity * gamma.cos() - 1e-3 * (p.mass_empty * p.gravity);
        for c in sol.report.contacts.iter().filter(|c| !c.includes_final) {
            let force = p.thrust_max * c.throttle_at_contact;
            assert!(
                force >= floor,
                "{key}: interior contact force {force:.1} N below {floor:.1} N"
            );
            println!(
                "criterion 6 PASS {key}: interior contact at t = {:.2} with T|u| = {force:.0} N >= {floor:.0} N",
                c.t_start
            );
        }
    }
}

// ---------------------------------------------------------------------------
// Criterion 7: monotonicity certificate on every converged indirect solution
// ---------------------------------------------------------------------------

fn check_monotonicity(key: &str, traj: &Trajectory, scenario: &Scenario) {
    // <q_r, d> nonincreasing within 1e-8 scaled drift.
    let vals: Vec<f64> = traj.qr_dot_d.iter().map(|v| v.unwrap()).collect();
    let scale = vals.iter().fold(0.0_f64, |m, v| m.max(v.abs())) + 1.0;
    let mut worst_rise = 0.0_f64;
    for w in vals.windows(2) {
        worst_rise = worst_rise.max((w[1] - w[0]) / scale);
    }
    assert!(worst_rise <= 1e-8, "{key}: <q_r, d> rises by {worst_rise:.3e} (scaled)");

    // Finite-difference dPsi/dt against the model expression, away from
    // switches and away from the rate's zero crossing.
    let psi: Vec<f64> = traj.psi.iter().map(|v| v.unwrap()).collect();
    let psi_scale = psi.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let costates = traj.costates.as_ref().unwrap();
    let mut worst_rel = 0.0_f64;
    let mut judged = 0usize;
    for i in 1..traj.len() - 1 {
        if traj.control_jump_nodes.iter().any(|&j| i.abs_diff(j) <= 1) {
            continue;
        }
        let hm = traj.times[i] - traj.times[i - 1];
        let hp = traj.times[i + 1] - traj.times[i];
        let fd = (psi[i + 1] * hm * hm - psi[i - 1] * hp * hp + psi[i] * (hp * hp - hm * hm))
            / (hm * hp * (hm + hp));
        let expected = expected_psi_rate(
            &traj.states[i],
            &costates[i],
            &traj.controls[i].direction,
            &scenario.params,
        );
        if expected.abs() < 0.05 * psi_scale / traj.final_time() {
            continue;
        }
        judged += 1;
        worst_rel = worst_rel.max((fd - expected).abs() / expected.abs());
    }
    assert!(judged > 10, "{key}: too few rate samples");
    assert!(worst_rel <= 1e-3, "{key}: dPsi/dt mismatch {worst_rel:.3e}");
    println!(
        "criterion 7 PASS {key}: max <q_r,d> rise {worst_rise:.2e}, dPsi/dt rel err {worst_rel:.2e} over {judged} nodes"
    );
}

#[test]
fn criterion_07_monotonicity_certificate() {
    let cases: [(&'static str, Scenario); 6] = [
        ("vertical", presets::vertical_descent()),
        ("unconstrained-2d", presets::unconstrained_min_fuel()),
        ("vertical-sp500", presets::with_pressure(presets::vertical_descent(), 500.0)),
        ("vertical-sp2000", presets::with_pressure(presets::vertical_descent(), 2000.0)),
        ("2d-sp500", presets::with_pressure(presets::unconstrained_min_fuel(), 500.0)),
        ("2d-sp2000", presets::with_pressure(presets::unconstrained_min_fuel(), 2000.0)),
    ];
    for (key, scenario) in cases {
        let sol = indirect_solution(key, scenario.clone());
        check_monotonicity(key, &sol.trajectory, &scenario);
    }
}

// ---------------------------------------------------------------------------
// Criterion 8: constant-pressure atmosphere variants
// ---------------------------------------------------------------------------

#[test]
fn criterion_08_atmosphere_variants() {
    let cases: [(&'static str, Scenario, bool); 4] = [
        ("vertical-sp500", presets::with_pressure(presets::vertical_descent(), 500.0), false),
        ("vertical-sp2000", presets::with_pressure(presets::vertical_descent(), 2000.0), false),
        ("2d-sp500", presets::with_pressure(presets::unconstrained_min_fuel(), 500.0), true),
        ("2d-sp2000", presets::with_pressure(presets::unconstrained_min_fuel(), 2000.0), true),
    ];
    for (key, scenario, full_form) in cases {
        assert!(scenario.params.thrust_max * scenario.params.throttle_min >= scenario.params.pressure_term);
        let sol = indirect_solution(key, scenario);
        assert!(sol.residual_norm <= 1e-8, "{key}: residual {:.2e}", sol.residual_norm);
        let kinds = arc_kinds(&sol.report);
        if full_form {
            assert_eq!(kinds, vec![ArcKind::Max, ArcKind::Min, ArcKind::Max], "{key}: {kinds:?}");
        } else {
            // The vertical descent degenerates to Min-Max (t1 = 0).
            assert!(
                kinds == vec![ArcKind::Min, ArcKind::Max]
                    || kinds == vec![ArcKind::Max, ArcKind::Min, ArcKind::Max],
                "{key}: {kinds:?}"
            );
        }
        // p_m strictly increasing along the solution.
        let costates = sol.trajectory.costates.as_ref().unwrap();
        let mut min_step = f64::INFINITY;
        for w in costates.windows(2) {
            min_step = min_step.min(w[1].p_m - w[0].p_m);
        }
        assert!(min_step > 0.0, "{key}: p_m not strictly increasing (min step {min_step:.3e})");
        println!(
            "criterion 8 PASS {key}: structure {kinds:?}, min p_m step {min_step:.3e}"
        );
    }
}

// ---------------------------------------------------------------------------
// Criterion 9: mass bookkeeping on every reported trajectory
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_mass_bookkeeping() {
    // Indirect solutions.
    for (key, scenario) in [
        ("vertical", presets::vertical_descent()),
        ("unconstrained-2d", presets::unconstrained_min_fuel()),
        ("2d-sp2000", presets::with_pressure(presets::unconstrained_min_fuel(), 2000.0)),
    ] {
        let sol = indirect_solution(key, scenario.clone());
        let m0 = scenario.initial_state.mass;
        let err = sol.trajectory.mass_consistency_error(scenario.params.flow_rate);
        assert!(err <= 1e-6 * m0, "{key}: mass residual {err:.3e} kg");
        println!("criterion 9 PASS {key} (indirect): mass residual {err:.3e} kg");
    }
    // Direct solutions, including the varying-mass case.
    for (key, scenario) in [
        ("unconstrained", presets::unconstrained_min_fuel()),
        ("gs0", presets::altitude_constrained()),
        ("gs0_p45", presets::altitude_and_pointing()),
        ("gs5_p45_mass", presets::mass_glide_pointing()),
    ] {
        let sol = direct_solution(key, scenario.clone(), 100);
        let m0 = scenario.initial_state.mass;
        let err = sol.trajectory.mass_consistency_error(scenario.params.flow_rate);
        assert!(err <= 1e-6 * m0, "{key}: mass residual {err:.3e} kg");
        println!("criterion 9 PASS {key} (direct): mass residual {err:.3e} kg");
    }
}

// ---------------------------------------------------------------------------
// Criterion 10: cross-solver consistency on the unconstrained scenario
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_cross_solver_consistency() {
    let scenario = presets::unconstrained_min_fuel();
    let ind = indirect_solution("unconstrained-2d", scenario.clone());
    let dir = direct_solution("unconstrained", scenario, 100);

    let rel_cost = (ind.trajectory.cost_value - dir.trajectory.cost_value).abs()
        / ind.trajectory.cost_value;
    assert!(rel_cost <= 1e-3, "cost mismatch: rel {rel_cost:.3e}");

    let si = &ind.report.switching_times;
    let sd = &dir.report.switching_times;
    assert_eq!(si.len(), 2);
    assert_eq!(sd.len(), 2, "direct switching times: {sd:?}");
    for (a, b) in si.iter().zip(sd.iter()) {
        assert!((a - b).abs() <= 1.0, "switching times {a:.2} vs {b:.2}");
    }
    println!(
        "criterion 10 PASS cross-solver: costs {:.5} vs {:.5} (rel {rel_cost:.2e}), switches {si:?} vs {sd:?}",
        ind.trajectory.cost_value, dir.trajectory.cost_value
    );
}

// ---------------------------------------------------------------------------
// Criterion 11: bit-identical CLI output
// ---------------------------------------------------------------------------

#[test]
fn criterion_11_deterministic_cli_output() {
    let scenario = std::path::Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios/vertical_1d.json");
    let tmp = std::env::temp_dir().join(format!("descent-acc-det-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&tmp);
    let mut outputs = Vec::new();
    for run in 0..2 {
        let out = tmp.join(format!("run{run}"));
        std::fs::create_dir_all(&out).unwrap();
        let status = std::process::Command::new(env!("CARGO_BIN_EXE_descent"))
            .args([
                "solve",
                scenario.to_str().unwrap(),
                "--out-dir",
                out.to_str().unwrap(),
                "--seed",
                "42",
            ])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(std::fs::read(out.join("trajectory.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1], "trajectory.csv differs between identical runs");
    println!(
        "criterion 11 PASS determinism: {} bytes identical across runs",
        outputs[0].len()
    );
}

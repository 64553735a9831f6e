//! General nonlinear programming support for the transcription solver: an
//! augmented-Lagrangian outer loop over a spectral-projected-gradient inner
//! minimizer on box constraints.

/// A smooth NLP: minimize f(x) subject to c_eq(x) = 0, c_ineq(x) >= 0 and
/// box bounds. Gradients of constraint combinations are exposed in adjoint
/// (weighted-accumulation) form so implementations can reverse-accumulate.
pub trait NlpProblem {
    fn num_vars(&self) -> usize;
    fn num_eq(&self) -> usize;
    fn num_ineq(&self) -> usize;
    /// Lower and upper variable bounds, both of length `num_vars`.
    fn bounds(&self) -> (&[f64], &[f64]);
    fn objective(&self, x: &[f64]) -> f64;
    /// Overwrite `grad` with the objective gradient.
    fn objective_grad(&self, x: &[f64], grad: &mut [f64]);
    fn eval_eq(&self, x: &[f64], out: &mut [f64]);
    fn eval_ineq(&self, x: &[f64], out: &mut [f64]);
    /// Accumulate sum_j w_j * grad c_eq_j into `grad`.
    fn add_eq_grad_weighted(&self, x: &[f64], w: &[f64], grad: &mut [f64]);
    /// Accumulate sum_k w_k * grad c_ineq_k into `grad`.
    fn add_ineq_grad_weighted(&self, x: &[f64], w: &[f64], grad: &mut [f64]);
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NlpStatus {
    Converged,
    IterationLimit,
    /// The penalty hit its cap while the violation stagnated.
    Infeasible,
}

#[derive(Debug, Clone)]
pub struct AugLagOptions {
    pub feas_tol: f64,
    pub opt_tol: f64,
    pub rho0: f64,
    pub rho_growth: f64,
    pub rho_max: f64,
    pub max_outer: usize,
    pub spg: SpgOptions,
}

impl Default for AugLagOptions {
    fn default() -> Self {
        AugLagOptions {
            feas_tol: 1e-6,
            opt_tol: 1e-5,
            rho0: 100.0,
            rho_growth: 10.0,
            rho_max: 1e4,
            max_outer: 40,
            spg: SpgOptions::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpgOptions {
    pub max_iter: usize,
    /// Nonmonotone line-search history length.
    pub history: usize,
    pub armijo: f64,
    pub step_min: f64,
    pub bb_min: f64,
    pub bb_max: f64,
}

impl Default for SpgOptions {
    fn default() -> Self {
        SpgOptions {
            max_iter: 8000,
            history: 10,
            armijo: 1e-4,
            step_min: 1e-14,
            bb_min: 1e-12,
            bb_max: 1e12,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AugLagResult {
    pub x: Vec<f64>,
    pub eq_multipliers: Vec<f64>,
    pub ineq_multipliers: Vec<f64>,
    /// Constraint violation infinity norm at the solution.
    pub feasibility: f64,
    /// Projected-gradient infinity norm of the augmented Lagrangian.
    pub stationarity: f64,
    pub objective: f64,
    pub status: NlpStatus,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    pub rho: f64,
}

fn project(x: &mut [f64], lb: &[f64], ub: &[f64]) {
    for i in 0..x.len() {
        x[i] = x[i].max(lb[i]).min(ub[i]);
    }
}

/// Augmented-Lagrangian value and gradient over the slack-extended vector
/// [x; s]: inequalities h(x) >= 0 enter as equalities h(x) - s = 0 with
/// s >= 0 handled by the box projection, which keeps the subproblem smooth.
struct AlEval<'a, P: NlpProblem> {
    problem: &'a P,
    lam: &'a [f64],
    lam_h: &'a [f64],
    rho: f64,
    n_x: usize,
    c_buf: Vec<f64>,
    h_buf: Vec<f64>,
    w_buf: Vec<f64>,
}

impl<'a, P: NlpProblem> AlEval<'a, P> {
    fn new(problem: &'a P, lam: &'a [f64], lam_h: &'a [f64], rho: f64) -> Self {
        AlEval {
            problem,
            lam,
            lam_h,
            rho,
            n_x: problem.num_vars(),
            c_buf: vec![0.0; problem.num_eq()],
            h_buf: vec![0.0; problem.num_ineq()],
            w_buf: Vec::new(),
        }
    }

    fn value(&mut self, z: &[f64]) -> f64 {
        let (x, s) = z.split_at(self.n_x);
        let mut v = self.problem.objective(x);
        if !self.c_buf.is_empty() {
            self.problem.eval_eq(x, &mut self.c_buf);
            for (j, &c) in self.c_buf.iter().enumerate() {
                v += self.lam[j] * c + 0.5 * self.rho * c * c;
            }
        }
        if !self.h_buf.is_empty() {
            self.problem.eval_ineq(x, &mut self.h_buf);
            for (k, &h) in self.h_buf.iter().enumerate() {
                let r = h - s[k];
                v += self.lam_h[k] * r + 0.5 * self.rho * r * r;
            }
        }
        v
    }

    fn value_and_grad(&mut self, z: &[f64], grad: &mut [f64]) -> f64 {
        let (x, s) = z.split_at(self.n_x);
        let (gx, gs) = grad.split_at_mut(self.n_x);
        let mut v = self.problem.objective(x);
        self.problem.objective_grad(x, gx);
        for g in gs.iter_mut() {
            *g = 0.0;
        }
        if !self.c_buf.is_empty() {
            self.problem.eval_eq(x, &mut self.c_buf);
            self.w_buf.clear();
            for (j, &c) in self.c_buf.iter().enumerate() {
                v += self.lam[j] * c + 0.5 * self.rho * c * c;
                self.w_buf.push(self.lam[j] + self.rho * c);
            }
            let w = std::mem::take(&mut self.w_buf);
            self.problem.add_eq_grad_weighted(x, &w, gx);
            self.w_buf = w;
        }
        if !self.h_buf.is_empty() {
            self.problem.eval_ineq(x, &mut self.h_buf);
            self.w_buf.clear();
            for (k, &h) in self.h_buf.iter().enumerate() {
                let r = h - s[k];
                v += self.lam_h[k] * r + 0.5 * self.rho * r * r;
                let w = self.lam_h[k] + self.rho * r;
                self.w_buf.push(w);
                gs[k] = -w;
            }
            let w = std::mem::take(&mut self.w_buf);
            self.problem.add_ineq_grad_weighted(x, &w, gx);
            self.w_buf = w;
        }
        v
    }
}

struct SpgOutcome {
    iterations: usize,
    pg_norm: f64,
}

/// Inner minimizer: projected L-BFGS (two-loop recursion, curvature-guarded
/// history) with a spectral-projected-gradient fallback step, under a
/// nonmonotone (GLL) line search along the projected path.
fn spg_minimize<P: NlpProblem>(
    al: &mut AlEval<'_, P>,
    x: &mut Vec<f64>,
    lb: &[f64],
    ub: &[f64],
    tol: f64,
    opts: &SpgOptions,
) -> SpgOutcome {
    let n = x.len();
    project(x, lb, ub);
    let mut grad = vec![0.0; n];
    let mut f = al.value_and_grad(x, &mut grad);
    let mut hist = std::collections::VecDeque::with_capacity(opts.history);
    hist.push_back(f);

    // L-BFGS memory.
    const MEM: usize = 10;
    let mut s_hist: std::collections::VecDeque<Vec<f64>> = std::collections::VecDeque::new();
    let mut y_hist: std::collections::VecDeque<Vec<f64>> = std::collections::VecDeque::new();
    let mut rho_hist: std::collections::VecDeque<f64> = std::collections::VecDeque::new();
    let mut gamma_h = 1.0_f64;

    let mut alpha_bb = {
        let gn = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gn > 0.0 {
            (1.0 / gn).clamp(opts.bb_min, opts.bb_max)
        } else {
            1.0
        }
    };

    let mut xn = vec![0.0; n];
    let mut gn_buf = vec![0.0; n];
    let mut pg_norm = f64::INFINITY;

    for it in 0..opts.max_iter {
        pg_norm = 0.0;
        for i in 0..n {
            let step = (x[i] - grad[i]).max(lb[i]).min(ub[i]) - x[i];
            pg_norm = pg_norm.max(step.abs());
        }
        if pg_norm <= tol {
            return SpgOutcome { iterations: it, pg_norm };
        }

        // Two-loop recursion on the free subspace; bound-saturated
        // coordinates with inward-pointing gradients are frozen.
        let mut dir = vec![0.0; n];
        let active = |i: usize| -> bool {
            (x[i] <= lb[i] && grad[i] > 0.0) || (x[i] >= ub[i] && grad[i] < 0.0)
        };
        if s_hist.is_empty() {
            for i in 0..n {
                dir[i] = if active(i) { 0.0 } else { -alpha_bb * grad[i] };
            }
        } else {
            let mut q: Vec<f64> = (0..n).map(|i| if active(i) { 0.0 } else { grad[i] }).collect();
            let k = s_hist.len();
            let mut a = vec![0.0; k];
            for j in (0..k).rev() {
                let mut dot = 0.0;
                for i in 0..n {
                    dot += s_hist[j][i] * q[i];
                }
                a[j] = rho_hist[j] * dot;
                for i in 0..n {
                    q[i] -= a[j] * y_hist[j][i];
                }
            }
            for qi in q.iter_mut() {
                *qi *= gamma_h;
            }
            for j in 0..k {
                let mut dot = 0.0;
                for i in 0..n {
                    dot += y_hist[j][i] * q[i];
                }
                let b = rho_hist[j] * dot;
                for i in 0..n {
                    q[i] += (a[j] - b) * s_hist[j][i];
                }
            }
            for i in 0..n {
                dir[i] = if active(i) { 0.0 } else { -q[i] };
            }
        }

        // Descent check along the projected path at unit step.
        let mut gtd = 0.0;
        for i in 0..n {
            let proj = (x[i] + dir[i]).max(lb[i]).min(ub[i]) - x[i];
            gtd += grad[i] * proj;
        }
        if gtd >= 0.0 {
            // Fall back to a spectral projected-gradient direction.
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            gtd = 0.0;
            for i in 0..n {
                dir[i] = -alpha_bb * grad[i];
                let proj = (x[i] + dir[i]).max(lb[i]).min(ub[i]) - x[i];
                gtd += grad[i] * proj;
            }
            if gtd >= 0.0 {
                return SpgOutcome { iterations: it, pg_norm };
            }
        }

        let f_ref = hist.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let mut lambda = 1.0_f64;
        let mut accepted = false;
        let mut f_new = f;
        while lambda >= opts.step_min {
            for i in 0..n {
                xn[i] = (x[i] + lambda * dir[i]).max(lb[i]).min(ub[i]);
            }
            f_new = al.value(&xn);
            if f_new <= f_ref + opts.armijo * lambda * gtd {
                accepted = true;
                break;
            }
            lambda *= 0.5;
        }
        if !accepted {
            return SpgOutcome { iterations: it, pg_norm };
        }

        f = al.value_and_grad(&xn, &mut gn_buf);
        let _ = f_new;
        let mut sts = 0.0;
        let mut sty = 0.0;
        let mut yty = 0.0;
        let mut s_vec = vec![0.0; n];
        let mut y_vec = vec![0.0; n];
        for i in 0..n {
            s_vec[i] = xn[i] - x[i];
            y_vec[i] = gn_buf[i] - grad[i];
            sts += s_vec[i] * s_vec[i];
            sty += s_vec[i] * y_vec[i];
            yty += y_vec[i] * y_vec[i];
        }
        if sty > 1e-12 * sts.sqrt() * yty.sqrt() && sty.is_finite() {
            if s_hist.len() == MEM {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
            rho_hist.push_back(1.0 / sty);
            s_hist.push_back(s_vec);
            y_hist.push_back(y_vec);
            gamma_h = (sty / yty).clamp(opts.bb_min, opts.bb_max);
        }
        alpha_bb = if sty > 0.0 {
            (sts / sty).clamp(opts.bb_min, opts.bb_max)
        } else {
            opts.bb_max
        };
        x.copy_from_slice(&xn);
        grad.copy_from_slice(&gn_buf);
        if hist.len() == opts.history {
            hist.pop_front();
        }
        hist.push_back(f);
    }
    SpgOutcome { iterations: opts.max_iter, pg_norm }
}

/// Truncated-Newton polish: CG on the bound-free subspace with
/// finite-difference Hessian-vector products of the analytic gradient and
/// Levenberg-style damping adapted to line-search quality. The damping keeps
/// CG productive through the flat azimuth directions that appear wherever
/// the thrust passes through vertical.
fn tn_minimize<P: NlpProblem>(
    al: &mut AlEval<'_, P>,
    x: &mut Vec<f64>,
    lb: &[f64],
    ub: &[f64],
    tol: f64,
    max_newton: usize,
    cg_max: usize,
) -> SpgOutcome {
    let n = x.len();
    project(x, lb, ub);
    let mut grad = vec![0.0; n];
    let mut f = al.value_and_grad(x, &mut grad);
    let mut evals = 1usize;
    let mut pg_norm = f64::INFINITY;
    let mut delta = 1e-8_f64;

    let mut xn = vec![0.0; n];
    let mut g_trial = vec![0.0; n];

    for _it in 0..max_newton {
        pg_norm = 0.0;
        for i in 0..n {
            let step = (x[i] - grad[i]).max(lb[i]).min(ub[i]) - x[i];
            pg_norm = pg_norm.max(step.abs());
        }
        if pg_norm <= tol {
            return SpgOutcome { iterations: evals, pg_norm };
        }

        let active: Vec<bool> = (0..n)
            .map(|i| (x[i] <= lb[i] && grad[i] > 0.0) || (x[i] >= ub[i] && grad[i] < 0.0))
            .collect();

        // CG on (H + delta I) d = -g restricted to free coordinates.
        let mut d = vec![0.0; n];
        let mut r: Vec<f64> = (0..n).map(|i| if active[i] { 0.0 } else { -grad[i] }).collect();
        let mut p = r.clone();
        let mut rs: f64 = r.iter().map(|v| v * v).sum();
        let g_norm = rs.sqrt();
        let cg_tol = (0.3_f64.min(g_norm.sqrt()) * g_norm).max(1e-14);
        let x_norm = x.iter().fold(0.0_f64, |m, v| m.max(v.abs()));

        for cg_it in 0..cg_max {
            if rs.sqrt() <= cg_tol {
                break;
            }
            let p_norm2: f64 = p.iter().map(|v| v * v).sum();
            let p_norm = p_norm2.sqrt();
            if p_norm == 0.0 {
                break;
            }
            let eps = 1e-7 * (1.0 + x_norm) / p_norm;
            for i in 0..n {
                xn[i] = x[i] + eps * p[i];
            }
            al.value_and_grad(&xn, &mut g_trial);
            evals += 1;
            // Damped Hessian-vector product on the free subspace.
            for i in 0..n {
                g_trial[i] = if active[i] {
                    0.0
                } else {
                    (g_trial[i] - grad[i]) / eps + delta * p[i]
                };
            }
            let mut php = 0.0;
            for i in 0..n {
                php += p[i] * g_trial[i];
            }
            if php <= 0.0 {
                if cg_it == 0 {
                    d.copy_from_slice(&r);
                }
                break;
            }
            let alpha = rs / php;
            let mut rs_new = 0.0;
            for i in 0..n {
                d[i] += alpha * p[i];
                r[i] -= alpha * g_trial[i];
                rs_new += r[i] * r[i];
            }
            let beta = rs_new / rs;
            for i in 0..n {
                p[i] = r[i] + beta * p[i];
            }
            rs = rs_new;
        }

        // Projected backtracking line search.
        let mut gtd = 0.0;
        for i in 0..n {
            let proj = (x[i] + d[i]).max(lb[i]).min(ub[i]) - x[i];
            gtd += grad[i] * proj;
        }
        if gtd >= 0.0 {
            for i in 0..n {
                d[i] = if active[i] { 0.0 } else { -grad[i] };
            }
            gtd = 0.0;
            for i in 0..n {
                let proj = (x[i] + d[i]).max(lb[i]).min(ub[i]) - x[i];
                gtd += grad[i] * proj;
            }
            if gtd >= 0.0 {
                return SpgOutcome { iterations: evals, pg_norm };
            }
        }
        let mut lambda = 1.0_f64;
        let mut accepted = false;
        let mut backtracks = 0usize;
        while lambda >= 1e-14 {
            for i in 0..n {
                xn[i] = (x[i] + lambda * d[i]).max(lb[i]).min(ub[i]);
            }
            let f_new = al.value(&xn);
            evals += 1;
            if f_new <= f + 1e-4 * lambda * gtd {
                x.copy_from_slice(&xn);
                f = al.value_and_grad(x, &mut grad);
                evals += 1;
                accepted = true;
                break;
            }
            lambda *= 0.5;
            backtracks += 1;
        }
        if !accepted {
            delta *= 100.0;
            if delta > 1e12 {
                return SpgOutcome { iterations: evals, pg_norm };
            }
            continue;
        }
        if backtracks == 0 {
            delta = (delta * 0.3).max(1e-10);
        } else if backtracks > 3 {
            delta = (delta * 30.0).min(1e10);
        }
    }
    SpgOutcome { iterations: evals, pg_norm }
}

/// Inner subproblem driver: a limited L-BFGS phase for cheap global
/// progress, then truncated-Newton polish to the requested stationarity.
fn inner_minimize<P: NlpProblem>(
    al: &mut AlEval<'_, P>,
    x: &mut Vec<f64>,
    lb: &[f64],
    ub: &[f64],
    tol: f64,
    opts: &SpgOptions,
) -> SpgOutcome {
    let warm_budget = opts.max_iter.min(2000);
    let mut warm_opts = opts.clone();
    warm_opts.max_iter = warm_budget;
    let warm = spg_minimize(al, x, lb, ub, tol, &warm_opts);
    if warm.pg_norm <= tol {
        return warm;
    }
    let polish = tn_minimize(al, x, lb, ub, tol, 80, 250);
    SpgOutcome {
        iterations: warm.iterations + polish.iterations,
        pg_norm: polish.pg_norm,
    }
}

/// Solve the NLP by the method of multipliers on the slack-extended
/// formulation.
pub fn solve_auglag<P: NlpProblem>(problem: &P, x0: &[f64], opts: &AugLagOptions) -> AugLagResult {
    let n = problem.num_vars();
    assert_eq!(x0.len(), n);
    let m_eq = problem.num_eq();
    let m_in = problem.num_ineq();
    let (lb_x, ub_x) = problem.bounds();

    // Slack-extended variables and bounds.
    let mut lb = lb_x.to_vec();
    let mut ub = ub_x.to_vec();
    lb.extend(std::iter::repeat(0.0).take(m_in));
    ub.extend(std::iter::repeat(f64::INFINITY).take(m_in));

    let mut z = x0.to_vec();
    project(&mut z[..n], lb_x, ub_x);
    let mut h0 = vec![0.0; m_in];
    if m_in > 0 {
        problem.eval_ineq(&z, &mut h0);
    }
    z.extend(h0.iter().map(|h| h.max(0.0)));

    let mut lam = vec![0.0; m_eq];
    let mut lam_h = vec![0.0; m_in];
    let mut rho = opts.rho0;
    let mut c = vec![0.0; m_eq];
    let mut h = vec![0.0; m_in];

    let mut omega = 1e-3_f64;
    let mut inner_total = 0usize;
    let mut pg_norm = f64::INFINITY;
    let mut prev_viol = f64::INFINITY;
    let mut stagnant = 0usize;
    let trace = std::env::var("DESCENT_NLP_TRACE").is_ok();

    // Violation of the original constraints plus the slack consistency.
    let viol_of = |problem: &P, z: &mut Vec<f64>, c: &mut [f64], h: &mut [f64]| -> f64 {
        let mut v = 0.0_f64;
        if !c.is_empty() {
            problem.eval_eq(&z[..n], c);
            for cj in c.iter() {
                v = v.max(cj.abs());
            }
        }
        if !h.is_empty() {
            problem.eval_ineq(&z[..n], h);
            for (k, hk) in h.iter().enumerate() {
                v = v.max((hk - z[n + k]).abs());
            }
        }
        v
    };

    let feas_tol = opts.feas_tol;
    let finish = |problem: &P,
                  z: Vec<f64>,
                  lam: Vec<f64>,
                  lam_h: &[f64],
                  feasibility: f64,
                  stationarity: f64,
                  status: NlpStatus,
                  outer: usize,
                  inner: usize,
                  rho: f64| {
        // A strictly interior slack means the constraint is inactive: its
        // multiplier estimate is residual noise and is zeroed.
        let nu: Vec<f64> = lam_h
            .iter()
            .enumerate()
            .map(|(k, l)| if z[n + k] > 10.0 * feas_tol { 0.0 } else { (-l).max(0.0) })
            .collect();
        AugLagResult {
            objective: problem.objective(&z[..n]),
            x: z[..n].to_vec(),
            eq_multipliers: lam,
            ineq_multipliers: nu,
            feasibility,
            stationarity,
            status,
            outer_iterations: outer,
            inner_iterations: inner,
            rho,
        }
    };

    for outer in 0..opts.max_outer {
        let inner_tol = omega.max(opts.opt_tol);
        let outcome = {
            let mut al = AlEval::new(problem, &lam, &lam_h, rho);
            inner_minimize(&mut al, &mut z, &lb, &ub, inner_tol, &opts.spg)
        };
        inner_total += outcome.iterations;
        pg_norm = outcome.pg_norm;

        let viol = viol_of(problem, &mut z, &mut c, &mut h);
        if trace {
            eprintln!(
                "[auglag] outer {outer}: rho={rho:.1e} viol={viol:.3e} pg={pg_norm:.3e} inner={} omega={inner_tol:.1e}",
                outcome.iterations
            );
        }
        if viol <= opts.feas_tol && pg_norm <= opts.opt_tol {
            for (j, cj) in c.iter().enumerate() {
                lam[j] += rho * cj;
            }
            for (k, hk) in h.iter().enumerate() {
                lam_h[k] += rho * (hk - z[n + k]);
            }
            return finish(
                problem,
                z,
                lam,
                &lam_h,
                viol,
                pg_norm,
                NlpStatus::Converged,
                outer + 1,
                inner_total,
                rho,
            );
        }

        // First-order multiplier iteration; the penalty grows only while the
        // violation fails to contract, and stays moderate so the subproblems
        // remain tractable.
        for (j, cj) in c.iter().enumerate() {
            lam[j] += rho * cj;
        }
        for (k, hk) in h.iter().enumerate() {
            lam_h[k] += rho * (hk - z[n + k]);
        }
        if viol > 0.25 * prev_viol && viol > opts.feas_tol {
            rho = (rho * opts.rho_growth).min(opts.rho_max);
        }
        omega = (omega * 0.3).max(opts.opt_tol);

        if viol > 0.9 * prev_viol && rho >= opts.rho_max && viol > (100.0 * opts.feas_tol).max(1e-3)
        {
            stagnant += 1;
            if stagnant >= 3 {
                return finish(
                    problem,
                    z,
                    lam,
                    &lam_h,
                    viol,
                    pg_norm,
                    NlpStatus::Infeasible,
                    outer + 1,
                    inner_total,
                    rho,
                );
            }
        } else {
            stagnant = 0;
        }
        prev_viol = viol;
    }

    let viol = viol_of(problem, &mut z, &mut c, &mut h);
    finish(
        problem,
        z,
        lam,
        &lam_h,
        viol,
        pg_norm,
        NlpStatus::IterationLimit,
        opts.max_outer,
        inner_total,
        rho,
    )
}

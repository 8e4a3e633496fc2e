//! Implicit-Euler integration and steady-state search for semi-explicit
//! index-1 DAEs `x' = f(x, y)`, `0 = g(x, y)`.

mod jacobian;
mod settling;

pub use jacobian::{BlockStructure, JacobianBuilder};
pub use settling::{settling_time, Settling};

use nalgebra::{DMatrix, DVector, LU};
use serde::{Deserialize, Serialize};

use crate::error::{ModelError, SolverError};

/// A semi-explicit DAE with differential states `x` and algebraic states `y`.
pub trait DaeSystem {
    fn n_x(&self) -> usize;
    fn n_y(&self) -> usize;

    /// Evaluates `f` and `g`; `g` should already be scaled to O(1).
    fn residual(&self, x: &[f64], y: &[f64], f: &mut [f64], g: &mut [f64]) -> Result<(), ModelError>;

    /// Typical magnitudes of `x` used for scaling norms and perturbations.
    fn x_scale(&self) -> Vec<f64> {
        vec![1.0; self.n_x()]
    }

    fn y_scale(&self) -> Vec<f64> {
        vec![1.0; self.n_y()]
    }

    /// Block sparsity for colored finite differences; `None` means dense.
    fn structure(&self) -> Option<BlockStructure> {
        None
    }

    /// Analytic Jacobian of `[f; g]` with respect to `[x; y]`, if available.
    fn jacobian(&self, _x: &[f64], _y: &[f64]) -> Option<DMatrix<f64>> {
        None
    }

    /// Projects `x` back onto the admissible set after a step and returns
    /// the size of the correction (clipped amount).
    fn project(&self, _x: &mut [f64]) -> f64 {
        0.0
    }

    /// Solves `g(x, y) = 0` for `y`. The default runs Newton on `g` alone.
    fn solve_algebraic(&self, x: &[f64], y_guess: &[f64]) -> Result<Vec<f64>, SolverError> {
        algebraic_newton(self, x, y_guess, 1e-12, 50)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JacobianMode {
    #[default]
    FiniteDifference,
    UserSupplied,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct StepAdaptation {
    pub enabled: bool,
    pub dt_min: f64,
    pub dt_max: f64,
    pub growth: f64,
    pub shrink: f64,
}

impl Default for StepAdaptation {
    fn default() -> Self {
        StepAdaptation { enabled: true, dt_min: 1e-3, dt_max: 30.0, growth: 1.5, shrink: 0.5 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IntegratorConfig {
    pub dt: f64,
    pub t_end: f64,
    pub newton_tol: f64,
    pub max_newton_iter: usize,
    pub jacobian_mode: JacobianMode,
    /// Keep the Jacobian across Newton iterations and steps until
    /// convergence slows down.
    pub reuse_jacobian: bool,
    pub step_adaptation: StepAdaptation,
    /// Spacing of stored samples, s.
    pub sample_interval: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            dt: 1.0,
            t_end: 7200.0,
            newton_tol: 1e-8,
            max_newton_iter: 25,
            jacobian_mode: JacobianMode::FiniteDifference,
            reuse_jacobian: false,
            step_adaptation: StepAdaptation::default(),
            sample_interval: 60.0,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<(), SolverError> {
        let bad = |m: &str| Err(SolverError::Config(m.into()));
        if !(self.dt > 0.0) || !(self.t_end >= 0.0) || !(self.sample_interval > 0.0) {
            return bad("dt and sample_interval must be positive, t_end non-negative");
        }
        if !(self.newton_tol > 0.0) || self.max_newton_iter == 0 {
            return bad("newton_tol must be positive and max_newton_iter at least 1");
        }
        let a = &self.step_adaptation;
        if a.enabled {
            if !(a.dt_min > 0.0 && a.dt_min <= self.dt && self.dt <= a.dt_max) {
                return bad("step sizes must satisfy dt_min <= dt <= dt_max");
            }
            if !(a.growth >= 1.0 && a.shrink > 0.0 && a.shrink < 1.0) {
                return bad("growth must be >= 1 and shrink in (0, 1)");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolverStats {
    pub steps: usize,
    pub rejected_steps: usize,
    pub newton_iterations: usize,
    pub jacobian_evaluations: usize,
    pub residual_evaluations: usize,
    /// Total amount removed by the non-negativity projection.
    pub clipped: f64,
    /// Largest scaled algebraic residual over accepted steps.
    pub max_constraint_residual: f64,
}

/// Sampled solution.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    pub stats: SolverStats,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    fn push(&mut self, t: f64, x: &[f64], y: &[f64]) {
        self.times.push(t);
        self.x.push(x.to_vec());
        self.y.push(y.to_vec());
    }
}

/// Called on every stored sample.
pub type Observer<'a> = &'a mut dyn FnMut(f64, &[f64], &[f64]);

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, e| m.max(e.abs()))
}

fn sq_norm(v: &[f64]) -> f64 {
    v.iter().map(|e| e * e).sum()
}

/// Newton driver shared by time stepping and steady-state search.
struct Newton<'s, S: DaeSystem + ?Sized> {
    sys: &'s S,
    cfg: IntegratorConfig,
    nx: usize,
    ny: usize,
    /// Scales of the unknowns `[x; y]`.
    zs: Vec<f64>,
    jac: JacobianBuilder,
    /// Raw Jacobian of `[f; g]`, if current.
    jfg: Option<DMatrix<f64>>,
    /// Factorization of the Newton matrix and the `dt` it was built for.
    lu: Option<(f64, LU<f64, nalgebra::Dyn, nalgebra::Dyn>)>,
    stats: SolverStats,
    f: Vec<f64>,
    g: Vec<f64>,
}

enum NewtonFailure {
    Diverged(f64),
    Singular,
    Model(ModelError),
}

impl<'s, S: DaeSystem + ?Sized> Newton<'s, S> {
    fn new(sys: &'s S, cfg: IntegratorConfig) -> Self {
        let (nx, ny) = (sys.n_x(), sys.n_y());
        let mut zs = sys.x_scale();
        zs.extend(sys.y_scale());
        let jac = JacobianBuilder::new(nx, ny, sys.structure());
        Newton {
            sys,
            cfg,
            nx,
            ny,
            zs,
            jac,
            jfg: None,
            lu: None,
            stats: SolverStats::default(),
            f: vec![0.0; nx],
            g: vec![0.0; ny],
        }
    }

    fn eval(&mut self, x: &[f64], y: &[f64]) -> Result<(), ModelError> {
        self.stats.residual_evaluations += 1;
        self.sys.residual(x, y, &mut self.f, &mut self.g)
    }

    /// Scaled residual of one implicit-Euler step (`dt = None` for steady state).
    fn scaled_residual(
        &mut self,
        x: &[f64],
        y: &[f64],
        x_old: &[f64],
        dt: Option<f64>,
    ) -> Result<Vec<f64>, ModelError> {
        self.eval(x, y)?;
        let mut r = Vec::with_capacity(self.nx + self.ny);
        for i in 0..self.nx {
            let v = match dt {
                Some(h) => x[i] - x_old[i] - h * self.f[i],
                None => self.f[i],
            };
            r.push(v / self.zs[i]);
        }
        r.extend_from_slice(&self.g);
        Ok(r)
    }

    fn refresh_jacobian(&mut self, x: &[f64], y: &[f64]) -> Result<(), NewtonFailure> {
        let j = match self.cfg.jacobian_mode {
            JacobianMode::UserSupplied => self.sys.jacobian(x, y).ok_or_else(|| {
                NewtonFailure::Model(ModelError::Configuration("system provides no analytic Jacobian".into()))
            })?,
            JacobianMode::FiniteDifference => {
                let (j, evals) = self.jac.build(self.sys, x, y, &self.zs).map_err(NewtonFailure::Model)?;
                self.stats.residual_evaluations += evals;
                j
            }
        };
        self.stats.jacobian_evaluations += 1;
        self.jfg = Some(j);
        self.lu = None;
        Ok(())
    }

    /// Factorizes the scaled Newton matrix for step `dt`.
    fn factorize(&mut self, dt: Option<f64>) -> Result<(), NewtonFailure> {
        let key = dt.unwrap_or(f64::INFINITY);
        if matches!(&self.lu, Some((k, _)) if *k == key) {
            return Ok(());
        }
        let jfg = self.jfg.as_ref().expect("Jacobian evaluated before factorization");
        let n = self.nx + self.ny;
        let mut m = DMatrix::<f64>::zeros(n, n);
        for c in 0..n {
            let sc = self.zs[c];
            for r in 0..n {
                let raw = jfg[(r, c)];
                let v = if r < self.nx {
                    let d = match dt {
                        Some(h) => (if r == c { 1.0 } else { 0.0 }) - h * raw,
                        None => raw,
                    };
                    d * sc / self.zs[r]
                } else {
                    raw * sc
                };
                m[(r, c)] = v;
            }
        }
        let lu = m.lu();
        if !lu.is_invertible() {
            return Err(NewtonFailure::Singular);
        }
        self.lu = Some((key, lu));
        Ok(())
    }

    /// Solves one implicit step (or the steady equations) from `(x, y)`.
    fn solve(
        &mut self,
        x: &mut Vec<f64>,
        y: &mut Vec<f64>,
        x_old: &[f64],
        dt: Option<f64>,
    ) -> Result<f64, NewtonFailure> {
        // whether the Jacobian was evaluated at the current iterate
        let mut current = false;
        if self.jfg.is_none() || !self.cfg.reuse_jacobian {
            self.refresh_jacobian(x, y)?;
            current = true;
        }
        let mut r = self.scaled_residual(x, y, x_old, dt).map_err(NewtonFailure::Model)?;
        let mut norm = inf_norm(&r);
        let mut merit = sq_norm(&r);
        let mut iter = 0;
        while norm > self.cfg.newton_tol {
            if iter >= self.cfg.max_newton_iter {
                return Err(NewtonFailure::Diverged(norm));
            }
            iter += 1;
            self.stats.newton_iterations += 1;
            if log::log_enabled!(log::Level::Trace) {
                let worst = (0..r.len()).max_by(|&a, &b| r[a].abs().total_cmp(&r[b].abs())).unwrap_or(0);
                log::trace!("newton iter {iter}: |r| = {norm:.3e} at {worst}");
            }
            self.factorize(dt)?;
            let (_, lu) = self.lu.as_ref().unwrap();
            let rhs = DVector::from_vec(r.iter().map(|v| -v).collect());
            let dz = lu.solve(&rhs).ok_or(NewtonFailure::Singular)?;
            // backtracking on the squared 2-norm, for which the Newton
            // direction is a descent direction
            let mut lambda = 1.0;
            let mut accepted = None;
            for _ in 0..8 {
                let (xn, yn) = self.apply(x, y, &dz, lambda);
                if let Ok(rn) = self.scaled_residual(&xn, &yn, x_old, dt) {
                    let mn = sq_norm(&rn);
                    if mn.is_finite() && mn < (1.0 - 1e-4 * lambda) * merit {
                        let nn = inf_norm(&rn);
                        accepted = Some((xn, yn, rn, nn, mn));
                        break;
                    }
                }
                if !current {
                    break;
                }
                lambda *= 0.5;
            }
            match accepted {
                Some((xn, yn, rn, nn, mn)) => {
                    let ratio = (mn / merit).sqrt();
                    *x = xn;
                    *y = yn;
                    r = rn;
                    norm = nn;
                    merit = mn;
                    current = false;
                    let left = (self.cfg.max_newton_iter - iter) as i32;
                    let too_slow = ratio > 0.5 || norm * ratio.powi(left) > self.cfg.newton_tol;
                    let refresh = !self.cfg.reuse_jacobian || too_slow;
                    if refresh && norm > self.cfg.newton_tol {
                        self.refresh_jacobian(x, y)?;
                        current = true;
                    }
                }
                None if !current => {
                    self.refresh_jacobian(x, y)?;
                    current = true;
                }
                None => return Err(NewtonFailure::Diverged(norm)),
            }
        }
        Ok(norm)
    }

    fn apply(&self, x: &[f64], y: &[f64], dz: &DVector<f64>, lambda: f64) -> (Vec<f64>, Vec<f64>) {
        let xn = (0..self.nx).map(|i| x[i] + lambda * dz[i] * self.zs[i]).collect();
        let yn = (0..self.ny).map(|i| y[i] + lambda * dz[self.nx + i] * self.zs[self.nx + i]).collect();
        (xn, yn)
    }
}

fn failure_to_error(fail: NewtonFailure, time: f64, dt_min: f64) -> SolverError {
    match fail {
        NewtonFailure::Diverged(residual) => SolverError::StiffFailure { time, dt_min, residual },
        NewtonFailure::Singular => SolverError::SingularJacobian { time },
        NewtonFailure::Model(e) => SolverError::Model(e),
    }
}

/// Result of one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Step size actually taken, s.
    pub dt: f64,
    pub clipped: f64,
}

/// One implicit-Euler step of size `dt`, halving down to `dt_min` on
/// Newton failure.
pub fn step<S: DaeSystem + ?Sized>(
    sys: &S,
    x: &[f64],
    y: &[f64],
    dt: f64,
    cfg: &IntegratorConfig,
) -> Result<StepResult, SolverError> {
    cfg.validate()?;
    let mut newton = Newton::new(sys, *cfg);
    take_step(&mut newton, x, y, dt, 0.0)
}

fn take_step<S: DaeSystem + ?Sized>(
    newton: &mut Newton<'_, S>,
    x: &[f64],
    y: &[f64],
    dt: f64,
    t: f64,
) -> Result<StepResult, SolverError> {
    let adapt = newton.cfg.step_adaptation;
    let dt_min = if adapt.enabled { adapt.dt_min.min(dt) } else { dt };
    let mut h = dt;
    loop {
        let mut xn = x.to_vec();
        let mut yn = y.to_vec();
        match newton.solve(&mut xn, &mut yn, x, Some(h)) {
            Ok(_) => {
                let clipped = newton.sys.project(&mut xn);
                if clipped > 0.0 {
                    yn = newton.sys.solve_algebraic(&xn, &yn)?;
                }
                newton.eval(&xn, &yn)?;
                let gn = inf_norm(&newton.g);
                newton.stats.max_constraint_residual = newton.stats.max_constraint_residual.max(gn);
                newton.stats.steps += 1;
                newton.stats.clipped += clipped;
                if clipped > 0.0 {
                    log::debug!("t = {:.3} s: clipped {clipped:.3e} of negative concentration", t + h);
                }
                return Ok(StepResult { x: xn, y: yn, dt: h, clipped });
            }
            Err(fail) => {
                newton.stats.rejected_steps += 1;
                let next = h * if adapt.enabled { adapt.shrink } else { 0.5 };
                if next < dt_min * (1.0 - 1e-12) || !adapt.enabled {
                    return Err(failure_to_error(fail, t, dt_min));
                }
                log::debug!("t = {t:.3} s: Newton failed with dt = {h:.3e} s, retrying with {next:.3e} s");
                newton.jfg = None;
                newton.lu = None;
                h = next;
            }
        }
    }
}

/// Integrates from a consistent `(x0, y0)` to `cfg.t_end`, storing a
/// sample every `cfg.sample_interval` seconds and at `t_end`.
pub fn integrate<S: DaeSystem + ?Sized>(
    sys: &S,
    x0: &[f64],
    y0: &[f64],
    cfg: &IntegratorConfig,
    observers: &mut [Observer<'_>],
) -> Result<Trajectory, SolverError> {
    cfg.validate()?;
    let mut newton = Newton::new(sys, *cfg);
    let mut traj = Trajectory::default();
    let mut x = x0.to_vec();
    let mut y = y0.to_vec();
    let mut t = 0.0;
    let mut record = |traj: &mut Trajectory, t: f64, x: &[f64], y: &[f64]| {
        traj.push(t, x, y);
        for obs in observers.iter_mut() {
            obs(t, x, y);
        }
    };
    record(&mut traj, t, &x, &y);
    let adapt = cfg.step_adaptation;
    let mut dt = cfg.dt;
    let mut sample_index = 1usize;
    while t < cfg.t_end * (1.0 - 1e-14) {
        let next_sample = (sample_index as f64 * cfg.sample_interval).min(cfg.t_end);
        let h = dt.min(next_sample - t);
        let res = take_step(&mut newton, &x, &y, h, t)?;
        t = if res.dt == next_sample - t { next_sample } else { t + res.dt };
        x = res.x;
        y = res.y;
        if adapt.enabled {
            dt = if res.dt < h { res.dt } else { (dt.max(res.dt) * adapt.growth).min(adapt.dt_max) };
        }
        if t >= next_sample * (1.0 - 1e-14) {
            record(&mut traj, t, &x, &y);
            sample_index += 1;
        }
    }
    traj.stats = newton.stats;
    Ok(traj)
}

/// Outcome of the steady-state search.
#[derive(Debug, Clone, PartialEq)]
pub struct SteadyState {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// Scaled residual norm of `[f; g]`.
    pub residual: f64,
    /// Residual norm after each stage.
    pub history: Vec<f64>,
    pub stats: SolverStats,
}

/// Newton on `[f; g] = 0`, falling back to pseudo-transient continuation
/// (implicit steps with `dt` growing tenfold per success).
pub fn find_steady_state<S: DaeSystem + ?Sized>(
    sys: &S,
    x_guess: &[f64],
    y_guess: &[f64],
    cfg: &IntegratorConfig,
) -> Result<SteadyState, SolverError> {
    cfg.validate()?;
    let mut newton = Newton::new(sys, *cfg);
    let mut history = Vec::new();
    let mut best: (f64, Vec<f64>, Vec<f64>) = (f64::INFINITY, x_guess.to_vec(), y_guess.to_vec());
    let steady_norm = |n: &mut Newton<'_, S>, x: &[f64], y: &[f64]| -> Result<f64, SolverError> {
        Ok(inf_norm(&n.scaled_residual(x, y, x, None)?))
    };

    let r0 = steady_norm(&mut newton, x_guess, y_guess)?;
    history.push(r0);
    best.0 = r0;
    if r0 <= cfg.newton_tol {
        return Ok(SteadyState {
            x: x_guess.to_vec(),
            y: y_guess.to_vec(),
            residual: r0,
            history,
            stats: newton.stats,
        });
    }

    let mut x = x_guess.to_vec();
    let mut y = y_guess.to_vec();
    match newton.solve(&mut x, &mut y, x_guess, None) {
        Ok(norm) => {
            sys.project(&mut x);
            let norm2 = steady_norm(&mut newton, &x, &y)?;
            history.push(norm.max(norm2));
            if norm2 <= cfg.newton_tol {
                return Ok(SteadyState { x, y, residual: norm2, history, stats: newton.stats });
            }
        }
        Err(NewtonFailure::Model(e)) => log::debug!("steady Newton hit a model error: {e}"),
        Err(_) => log::debug!("plain steady Newton diverged, switching to continuation"),
    }

    // pseudo-transient continuation
    let mut x = x_guess.to_vec();
    let mut y = y_guess.to_vec();
    let mut dt = cfg.dt.max(1.0);
    newton.jfg = None;
    for _ in 0..60 {
        let mut xn = x.clone();
        let mut yn = y.clone();
        match newton.solve(&mut xn, &mut yn, &x, Some(dt)) {
            Ok(_) => {
                let clipped = sys.project(&mut xn);
                if clipped > 0.0 {
                    yn = sys.solve_algebraic(&xn, &yn)?;
                }
                x = xn;
                y = yn;
                let r = steady_norm(&mut newton, &x, &y)?;
                history.push(r);
                if r < best.0 {
                    best = (r, x.clone(), y.clone());
                }
                if r <= cfg.newton_tol {
                    return Ok(SteadyState { x, y, residual: r, history, stats: newton.stats });
                }
                dt *= 10.0;
                if dt > 1e7 {
                    // polish with a plain Newton solve
                    let mut xs = x.clone();
                    let mut ys = y.clone();
                    if let Ok(n) = newton.solve(&mut xs, &mut ys, &x, None) {
                        sys.project(&mut xs);
                        let r = steady_norm(&mut newton, &xs, &ys)?;
                        history.push(r.max(n));
                        if r <= cfg.newton_tol {
                            return Ok(SteadyState { x: xs, y: ys, residual: r, history, stats: newton.stats });
                        }
                    }
                    dt = 1e6;
                }
            }
            Err(_) => {
                newton.jfg = None;
                dt *= 0.25;
                if dt < 1e-3 {
                    break;
                }
            }
        }
    }
    Err(SolverError::SteadyState { best_residual: best.0, history, best_x: best.1, best_y: best.2 })
}

/// Newton on `g(x, .) = 0` with a dense finite-difference Jacobian.
pub fn algebraic_newton<S: DaeSystem + ?Sized>(
    sys: &S,
    x: &[f64],
    y_guess: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<Vec<f64>, SolverError> {
    let (nx, ny) = (sys.n_x(), sys.n_y());
    let ys = sys.y_scale();
    let mut f = vec![0.0; nx];
    let mut g = vec![0.0; ny];
    let mut y = y_guess.to_vec();
    for _ in 0..max_iter {
        sys.residual(x, &y, &mut f, &mut g)?;
        if inf_norm(&g) <= tol {
            return Ok(y);
        }
        let mut j = DMatrix::<f64>::zeros(ny, ny);
        let mut gp = vec![0.0; ny];
        for c in 0..ny {
            let h = f64::EPSILON.sqrt() * y[c].abs().max(ys[c]);
            let mut yp = y.clone();
            yp[c] += h;
            sys.residual(x, &yp, &mut f, &mut gp)?;
            for r in 0..ny {
                j[(r, c)] = (gp[r] - g[r]) / h;
            }
        }
        let dy = j
            .lu()
            .solve(&DVector::from_iterator(ny, g.iter().map(|v| -v)))
            .ok_or(SolverError::SingularJacobian { time: 0.0 })?;
        for i in 0..ny {
            y[i] += dy[i];
        }
    }
    Err(SolverError::StiffFailure { time: 0.0, dt_min: 0.0, residual: inf_norm(&g) })
}

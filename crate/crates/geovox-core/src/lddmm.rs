//! Control-point LDDMM: a Gaussian-kernel velocity field parameterized by
//! control points and momenta, geodesic shooting through Hamilton's equations
//! with a second-order Runge-Kutta scheme, correspondence-free registration
//! against a target point cloud, and forward tracking of mesh vertices over a
//! contour sequence.
//!
//! The registration gradient is computed by reverse accumulation through the
//! discrete RK2 integrator with analytic kernel derivatives, so it is the
//! exact gradient of the discrete loss.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::math::{add, dist2, dot, scale, sub, Vec3};
use crate::shapes::{PointSet, QuadMesh};
use crate::Result;

#[inline]
fn kernel(d2: f64, inv_sigma2: f64) -> f64 {
    libm::exp(-d2 * inv_sigma2)
}

/// Control points and momenta of one geodesic, plus kernel width and time
/// discretization of the unit interval.
#[derive(Debug, Clone, PartialEq)]
pub struct ShootingState {
    pub q: Vec<Vec3>,
    pub mu: Vec<Vec3>,
    pub sigma_v: f64,
    pub n_steps: usize,
}

impl ShootingState {
    pub fn new(q: Vec<Vec3>, mu: Vec<Vec3>, sigma_v: f64, n_steps: usize) -> Result<Self> {
        let s = ShootingState {
            q,
            mu,
            sigma_v,
            n_steps,
        };
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<()> {
        if self.q.is_empty() {
            return Err(Error::invalid("need at least one control point"));
        }
        if self.q.len() != self.mu.len() {
            return Err(Error::invalid(format!(
                "control point count {} != momentum count {}",
                self.q.len(),
                self.mu.len()
            )));
        }
        if !(self.sigma_v.is_finite() && self.sigma_v > 0.0) {
            return Err(Error::invalid("kernel width must be positive"));
        }
        if self.n_steps == 0 {
            return Err(Error::invalid("need at least one integration step"));
        }
        Ok(())
    }

    fn inv_sigma2(&self) -> f64 {
        1.0 / (self.sigma_v * self.sigma_v)
    }
}

/// Kernel-summed velocity at one point: `v(x) = sum_i K(x, q_i) mu_i`.
pub fn velocity(state: &ShootingState, x: Vec3) -> Vec3 {
    let inv = state.inv_sigma2();
    let mut v = [0.0; 3];
    for (qi, mi) in state.q.iter().zip(&state.mu) {
        let k = kernel(dist2(x, *qi), inv);
        v = add(v, scale(*mi, k));
    }
    v
}

/// Quadratic Hamiltonian `H = 1/2 sum_ij K(q_i, q_j) mu_i . mu_j`, conserved
/// along the exact flow.
pub fn hamiltonian(q: &[Vec3], mu: &[Vec3], sigma_v: f64) -> f64 {
    let inv = 1.0 / (sigma_v * sigma_v);
    let mut h = 0.0;
    for i in 0..q.len() {
        for j in 0..q.len() {
            h += kernel(dist2(q[i], q[j]), inv) * dot(mu[i], mu[j]);
        }
    }
    0.5 * h
}

/// Hamilton's equations of motion:
/// `dq_i = sum_j K_ij mu_j`, `dmu_i = -dH/dq_i`.
/// Kernel symmetry lets each pair be evaluated once.
fn rhs(q: &[Vec3], mu: &[Vec3], inv_sigma2: f64) -> (Vec<Vec3>, Vec<Vec3>) {
    let n = q.len();
    let c = 2.0 * inv_sigma2;
    let mut dq = mu.to_vec(); // self term: K(q_i, q_i) = 1
    let mut dmu = vec![[0.0; 3]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let d = sub(q[i], q[j]);
            let k = kernel(dot(d, d), inv_sigma2);
            dq[i] = add(dq[i], scale(mu[j], k));
            dq[j] = add(dq[j], scale(mu[i], k));
            let f = scale(d, c * k * dot(mu[i], mu[j]));
            dmu[i] = add(dmu[i], f);
            dmu[j] = sub(dmu[j], f);
        }
    }
    (dq, dmu)
}

fn velocity_points(q: &[Vec3], mu: &[Vec3], inv_sigma2: f64, x: &[Vec3]) -> Vec<Vec3> {
    x.iter()
        .map(|p| {
            let mut v = [0.0; 3];
            for (qi, mi) in q.iter().zip(mu) {
                v = add(v, scale(*mi, kernel(dist2(*p, *qi), inv_sigma2)));
            }
            v
        })
        .collect()
}

fn axpy(base: &[Vec3], dir: &[Vec3], t: f64) -> Vec<Vec3> {
    base.iter()
        .zip(dir)
        .map(|(b, d)| add(*b, scale(*d, t)))
        .collect()
}

/// Discrete geodesic: all intermediate control-point and momentum states,
/// plus the trajectories of any extra advected points.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowPath {
    pub qs: Vec<Vec<Vec3>>,
    pub mus: Vec<Vec<Vec3>>,
    pub xs: Vec<Vec<Vec3>>,
}

/// Integrate Hamilton's equations and advect `extra` points through the
/// resulting time-varying velocity field, jointly, with the RK2 midpoint
/// scheme. Control points advected as extra points therefore coincide with
/// the shot trajectory bit for bit.
pub fn integrate(state: &ShootingState, extra: &[Vec3]) -> Result<FlowPath> {
    state.validate()?;
    let inv = state.inv_sigma2();
    let dt = 1.0 / state.n_steps as f64;
    let mut scene: f64 = 1.0;
    for p in state.q.iter().chain(extra.iter()) {
        for a in 0..3 {
            scene = scene.max(p[a].abs());
        }
    }
    let limit = 1e6 * scene;

    let mut q = state.q.clone();
    let mut mu = state.mu.clone();
    let mut x = extra.to_vec();
    let mut qs = Vec::with_capacity(state.n_steps + 1);
    let mut mus = Vec::with_capacity(state.n_steps + 1);
    let mut xs = Vec::with_capacity(state.n_steps + 1);
    qs.push(q.clone());
    mus.push(mu.clone());
    xs.push(x.clone());
    for _ in 0..state.n_steps {
        let (k1q, k1mu) = rhs(&q, &mu, inv);
        let k1x = velocity_points(&q, &mu, inv, &x);
        let qm = axpy(&q, &k1q, 0.5 * dt);
        let mum = axpy(&mu, &k1mu, 0.5 * dt);
        let xm = axpy(&x, &k1x, 0.5 * dt);
        let (k2q, k2mu) = rhs(&qm, &mum, inv);
        let k2x = velocity_points(&qm, &mum, inv, &xm);
        q = axpy(&q, &k2q, dt);
        mu = axpy(&mu, &k2mu, dt);
        x = axpy(&x, &k2x, dt);
        for p in q.iter().chain(x.iter()).chain(mu.iter()) {
            for a in 0..3 {
                if !(p[a].is_finite() && p[a].abs() <= limit) {
                    return Err(Error::NumericalBlowup { limit });
                }
            }
        }
        qs.push(q.clone());
        mus.push(mu.clone());
        xs.push(x.clone());
    }
    Ok(FlowPath { qs, mus, xs })
}

/// Geodesic shooting from the initial state.
pub fn shoot(state: &ShootingState) -> Result<FlowPath> {
    integrate(state, &[])
}

/// Advect arbitrary points through the flow of the state's velocity field.
pub fn flow(state: &ShootingState, points: &[Vec3]) -> Result<Vec<Vec3>> {
    let path = integrate(state, points)?;
    Ok(path.xs.last().expect("at least the initial state").clone())
}

/// Vector-Jacobian product of [`rhs`]: given cotangents `(a, b)` of
/// `(dq, dmu)`, accumulate `J^T (a, b)` into `(q_bar, mu_bar)`.
fn rhs_vjp(
    q: &[Vec3],
    mu: &[Vec3],
    inv_sigma2: f64,
    a: &[Vec3],
    b: &[Vec3],
    q_bar: &mut [Vec3],
    mu_bar: &mut [Vec3],
) {
    let n = q.len();
    let c = 2.0 * inv_sigma2;
    for i in 0..n {
        // Diagonal of the dq part: K(q_i, q_i) = 1.
        mu_bar[i] = add(mu_bar[i], a[i]);
        for j in (i + 1)..n {
            let d = sub(q[i], q[j]);
            let k = kernel(dot(d, d), inv_sigma2);
            let m = dot(mu[i], mu[j]);
            let w = c * k * m;
            // Ordered pair (i, j).
            mu_bar[j] = add(mu_bar[j], scale(a[i], k));
            let s1 = dot(a[i], mu[j]);
            let g1 = scale(d, -c * k * s1);
            let u1 = dot(b[i], d);
            let t1 = sub(scale(b[i], w), scale(d, c * w * u1));
            q_bar[i] = add(q_bar[i], add(g1, t1));
            q_bar[j] = sub(q_bar[j], add(g1, t1));
            let v1 = c * k * u1;
            mu_bar[i] = add(mu_bar[i], scale(mu[j], v1));
            mu_bar[j] = add(mu_bar[j], scale(mu[i], v1));
            // Ordered pair (j, i): the difference vector flips sign.
            mu_bar[i] = add(mu_bar[i], scale(a[j], k));
            let s2 = dot(a[j], mu[i]);
            let g2 = scale(d, c * k * s2);
            let u2 = -dot(b[j], d);
            let t2 = add(scale(b[j], w), scale(d, c * w * u2));
            q_bar[j] = add(q_bar[j], add(g2, t2));
            q_bar[i] = sub(q_bar[i], add(g2, t2));
            let v2 = c * k * u2;
            mu_bar[j] = add(mu_bar[j], scale(mu[i], v2));
            mu_bar[i] = add(mu_bar[i], scale(mu[j], v2));
        }
    }
}

/// Pull a cotangent of the final `(q, mu)` state back to the initial state
/// through the stored RK2 steps.
fn backprop(
    path: &FlowPath,
    inv_sigma2: f64,
    mut q_bar: Vec<Vec3>,
    mut mu_bar: Vec<Vec3>,
) -> (Vec<Vec3>, Vec<Vec3>) {
    let n_steps = path.qs.len() - 1;
    let n = q_bar.len();
    let dt = 1.0 / n_steps as f64;
    for t in (0..n_steps).rev() {
        let q = &path.qs[t];
        let mu = &path.mus[t];
        // Recreate the midpoint state of this step.
        let (f1q, f1mu) = rhs(q, mu, inv_sigma2);
        let qm = axpy(q, &f1q, 0.5 * dt);
        let mum = axpy(mu, &f1mu, 0.5 * dt);
        // u = dt J^T(mid) sbar'.
        let mut uq = vec![[0.0; 3]; n];
        let mut umu = vec![[0.0; 3]; n];
        rhs_vjp(&qm, &mum, inv_sigma2, &q_bar, &mu_bar, &mut uq, &mut umu);
        for v in uq.iter_mut().chain(umu.iter_mut()) {
            *v = scale(*v, dt);
        }
        // w = J^T(s) u ; sbar = sbar' + u + dt/2 w.
        let mut wq = vec![[0.0; 3]; n];
        let mut wmu = vec![[0.0; 3]; n];
        rhs_vjp(q, mu, inv_sigma2, &uq, &umu, &mut wq, &mut wmu);
        for i in 0..n {
            q_bar[i] = add(q_bar[i], add(uq[i], scale(wq[i], 0.5 * dt)));
            mu_bar[i] = add(mu_bar[i], add(umu[i], scale(wmu[i], 0.5 * dt)));
        }
    }
    (q_bar, mu_bar)
}

/// Squared kernel-measure discrepancy (an MMD with Gaussian kernel) between
/// a moving set and a fixed target; correspondence-free and differentiable.
struct DataTerm {
    target: Vec<Vec3>,
    inv_sw2: f64,
    cc: f64,
}

impl DataTerm {
    fn new(target: Vec<Vec3>, sigma_w: f64) -> Self {
        let inv_sw2 = 1.0 / (sigma_w * sigma_w);
        let c = target.len() as f64;
        let mut cc = 0.0;
        for i in 0..target.len() {
            for j in 0..target.len() {
                cc += kernel(dist2(target[i], target[j]), inv_sw2);
            }
        }
        DataTerm {
            target,
            inv_sw2,
            cc: cc / (c * c),
        }
    }

    fn value(&self, x: &[Vec3]) -> f64 {
        let m = x.len() as f64;
        let c = self.target.len() as f64;
        let mut mm = m; // diagonal: K(x_i, x_i) = 1
        for i in 0..x.len() {
            for j in (i + 1)..x.len() {
                mm += 2.0 * kernel(dist2(x[i], x[j]), self.inv_sw2);
            }
        }
        let mut mc = 0.0;
        for xi in x {
            for t in &self.target {
                mc += kernel(dist2(*xi, *t), self.inv_sw2);
            }
        }
        mm / (m * m) - 2.0 * mc / (m * c) + self.cc
    }

    fn grad(&self, x: &[Vec3]) -> Vec<Vec3> {
        let m = x.len() as f64;
        let c = self.target.len() as f64;
        let gk = -2.0 * self.inv_sw2;
        let wmm = 2.0 * gk / (m * m);
        let wmc = 2.0 * gk / (m * c);
        let mut g = vec![[0.0; 3]; x.len()];
        for i in 0..x.len() {
            for j in (i + 1)..x.len() {
                let d = sub(x[i], x[j]);
                let k = kernel(dot(d, d), self.inv_sw2);
                let t = scale(d, wmm * k);
                g[i] = add(g[i], t);
                g[j] = sub(g[j], t);
            }
            for t in &self.target {
                let d = sub(x[i], *t);
                let k = kernel(dot(d, d), self.inv_sw2);
                g[i] = sub(g[i], scale(d, wmc * k));
            }
        }
        g
    }
}

/// Median nearest-neighbor spacing of a point set; the default data-kernel
/// width is four times this.
pub fn median_nn_spacing(points: &[Vec3]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let mut nn: Vec<f64> = points
        .iter()
        .enumerate()
        .map(|(i, p)| {
            points
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, q)| dist2(*p, *q))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    nn.sort_unstable_by(|a, b| a.partial_cmp(b).expect("finite distances"));
    Some(libm::sqrt(nn[nn.len() / 2]))
}

/// Gradient-descent settings for [`register`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimSettings {
    /// Scale factor on the auto-calibrated first step.
    pub step_size: f64,
    /// Cap on loss/gradient evaluations.
    pub max_iters: usize,
    /// Stop when the max-norm of the gradient falls below this.
    pub grad_tol: f64,
}

impl Default for OptimSettings {
    fn default() -> Self {
        OptimSettings {
            step_size: 1.0,
            max_iters: 200,
            grad_tol: 1e-6,
        }
    }
}

/// One source-to-target registration task.
#[derive(Debug, Clone, PartialEq)]
pub struct RegistrationProblem {
    pub source: Vec<Vec3>,
    pub target: Vec<Vec3>,
    /// Deformation kernel width.
    pub sigma_v: f64,
    /// Data kernel width; `None` picks 4x the target's median spacing.
    pub sigma_w: Option<f64>,
    /// Regularization weight on the deformation norm.
    pub gamma: f64,
    pub n_steps: usize,
    pub optim: OptimSettings,
}

impl RegistrationProblem {
    pub fn new(source: Vec<Vec3>, target: Vec<Vec3>) -> Self {
        RegistrationProblem {
            source,
            target,
            sigma_v: 8.0,
            sigma_w: None,
            gamma: 0.01,
            n_steps: 15,
            optim: OptimSettings::default(),
        }
    }
}

/// Optimized state plus optimizer diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Registration {
    /// Control points at the source with the optimized initial momenta.
    pub state: ShootingState,
    /// Accepted loss values, starting at the initial loss; non-increasing.
    pub loss_history: Vec<f64>,
    pub data_term: f64,
    /// Loss/gradient evaluations spent.
    pub iterations: usize,
    pub converged: bool,
    /// Resolved data kernel width.
    pub sigma_w: f64,
}

fn inf_norm(v: &[Vec3]) -> f64 {
    v.iter()
        .flat_map(|p| p.iter())
        .fold(0.0f64, |m, &x| m.max(x.abs()))
}

/// The registration loss as a differentiable objective over the initial
/// momenta: kernel-measure data discrepancy of the flowed source against the
/// target, plus `gamma * mu^T K(q0) mu`. Control points are the source
/// points, so the flowed source is the control-point trajectory itself.
pub struct RegistrationObjective {
    q0: Vec<Vec3>,
    sigma_v: f64,
    gamma: f64,
    n_steps: usize,
    sigma_w: f64,
    data: DataTerm,
    kq: Vec<Vec<f64>>,
    kappa_max: f64,
}

impl RegistrationObjective {
    pub fn new(problem: &RegistrationProblem) -> Result<Self> {
        if problem.source.is_empty() || problem.target.is_empty() {
            return Err(Error::invalid("source and target must be nonempty"));
        }
        if !(problem.gamma >= 0.0 && problem.gamma.is_finite()) {
            return Err(Error::invalid("gamma must be nonnegative"));
        }
        if problem.n_steps == 0 {
            return Err(Error::invalid("need at least one integration step"));
        }
        let sigma_w = match problem.sigma_w {
            Some(s) if s > 0.0 && s.is_finite() => s,
            Some(_) => return Err(Error::invalid("sigma_w must be positive")),
            None => {
                let med = median_nn_spacing(&problem.target)
                    .ok_or_else(|| Error::invalid("target too small to infer sigma_w"))?;
                (4.0 * med).max(1e-9)
            }
        };
        let q0 = problem.source.clone();
        let n = q0.len();
        let inv_v = 1.0 / (problem.sigma_v * problem.sigma_v);
        let kq: Vec<Vec<f64>> = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| kernel(dist2(q0[i], q0[j]), inv_v))
                    .collect()
            })
            .collect();
        let kappa_max = kq
            .iter()
            .map(|row| row.iter().sum::<f64>())
            .fold(0.0f64, f64::max);
        Ok(RegistrationObjective {
            q0,
            sigma_v: problem.sigma_v,
            gamma: problem.gamma,
            n_steps: problem.n_steps,
            sigma_w,
            data: DataTerm::new(problem.target.clone(), sigma_w),
            kq,
            kappa_max,
        })
    }

    pub fn sigma_w(&self) -> f64 {
        self.sigma_w
    }

    fn forward(&self, mu: &[Vec3]) -> Result<(FlowPath, f64, f64)> {
        let state = ShootingState {
            q: self.q0.clone(),
            mu: mu.to_vec(),
            sigma_v: self.sigma_v,
            n_steps: self.n_steps,
        };
        let path = shoot(&state)?;
        let x1 = path.qs.last().expect("states");
        let d = self.data.value(x1);
        let mut reg = 0.0;
        for i in 0..mu.len() {
            for j in 0..mu.len() {
                reg += self.kq[i][j] * dot(mu[i], mu[j]);
            }
        }
        Ok((path, d + self.gamma * reg, d))
    }

    /// Loss value at the given initial momenta.
    pub fn loss(&self, mu: &[Vec3]) -> Result<f64> {
        Ok(self.forward(mu)?.1)
    }

    /// Loss, data term and the analytic gradient over the initial momenta,
    /// by reverse accumulation through the RK2 integrator.
    pub fn loss_and_gradient(&self, mu: &[Vec3]) -> Result<(f64, f64, Vec<Vec3>)> {
        let (path, loss, data_term) = self.forward(mu)?;
        Ok((loss, data_term, self.gradient(&path, mu)))
    }

    fn gradient(&self, path: &FlowPath, mu: &[Vec3]) -> Vec<Vec3> {
        let n = mu.len();
        let inv_v = 1.0 / (self.sigma_v * self.sigma_v);
        let x1 = path.qs.last().expect("states");
        let q_cot = self.data.grad(x1);
        let (_, mut g) = backprop(path, inv_v, q_cot, vec![[0.0; 3]; n]);
        for i in 0..n {
            let mut r = [0.0; 3];
            for j in 0..n {
                r = add(r, scale(mu[j], self.kq[i][j]));
            }
            g[i] = add(g[i], scale(r, 2.0 * self.gamma));
        }
        g
    }
}

/// Minimize data discrepancy plus deformation norm over the initial momenta
/// by fixed-step gradient descent with step halving on increase.
///
/// The returned loss history is monotone non-increasing; when the gradient
/// tolerance is not reached within the evaluation cap the best iterate is
/// returned with `converged = false`.
pub fn register(problem: &RegistrationProblem) -> Result<Registration> {
    let objective = RegistrationObjective::new(problem)?;
    let n = problem.source.len();

    let mut mu = vec![[0.0; 3]; n];
    let (path, mut loss, mut data_term) = objective.forward(&mu)?;
    let mut grad = objective.gradient(&path, &mu);
    let mut history = vec![loss];
    let mut iterations = 1usize;
    let g0 = inf_norm(&grad);
    let mut converged = g0 <= problem.optim.grad_tol;
    // First step sized to move points about a quarter data-kernel width.
    let mut step = if g0 > 0.0 {
        problem.optim.step_size * 0.25 * objective.sigma_w / (objective.kappa_max * g0)
    } else {
        0.0
    };
    let min_step = step * 1e-12;

    while !converged && iterations < problem.optim.max_iters {
        let cand: Vec<Vec3> = mu
            .iter()
            .zip(&grad)
            .map(|(m, g)| sub(*m, scale(*g, step)))
            .collect();
        let (cpath, closs, cdata) = objective.forward(&cand)?;
        iterations += 1;
        if closs <= loss {
            mu = cand;
            loss = closs;
            data_term = cdata;
            grad = objective.gradient(&cpath, &mu);
            history.push(loss);
            if inf_norm(&grad) <= problem.optim.grad_tol {
                converged = true;
            }
        } else {
            step *= 0.5;
            if step < min_step {
                break;
            }
        }
    }

    Ok(Registration {
        state: ShootingState {
            q: objective.q0,
            mu,
            sigma_v: problem.sigma_v,
            n_steps: problem.n_steps,
        },
        loss_history: history,
        data_term,
        iterations,
        converged,
        sigma_w: objective.sigma_w,
    })
}

/// Per-frame tracking diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameDiagnostics {
    /// Frame index the vertices were propagated to.
    pub frame: usize,
    pub loss: f64,
    pub data_term: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Mean distance from the propagated vertices to the frame's contour.
    pub error: f64,
}

/// Tracked vertex positions per frame with the immutable face list.
#[derive(Debug, Clone, PartialEq)]
pub struct TrackResult {
    pub trajectory: Vec<Vec<Vec3>>,
    pub faces: Vec<[usize; 4]>,
    pub diagnostics: Vec<FrameDiagnostics>,
    /// Frame at which registration failed, if any; the trajectory then stops
    /// at the last good frame.
    pub aborted_at: Option<usize>,
}

/// Tracking settings shared by every frame registration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrackSettings {
    pub sigma_v: f64,
    pub sigma_w: Option<f64>,
    pub gamma: f64,
    pub n_steps: usize,
    pub optim: OptimSettings,
}

impl Default for TrackSettings {
    fn default() -> Self {
        TrackSettings {
            sigma_v: 8.0,
            sigma_w: None,
            gamma: 0.01,
            n_steps: 15,
            optim: OptimSettings::default(),
        }
    }
}

/// Propagate mesh vertices through the contour sequence: register the current
/// vertices to the next frame's contour, flow them forward, repeat. Faces are
/// copied unchanged. A frame whose registration fails numerically aborts the
/// loop; the partial trajectory is kept and the frame recorded.
pub fn track_sequence(
    mesh0: &QuadMesh,
    contours: &[PointSet],
    settings: &TrackSettings,
) -> Result<TrackResult> {
    if contours.len() < 2 {
        return Err(Error::invalid("need at least two frames to track"));
    }
    if mesh0.vertices.is_empty() {
        return Err(Error::invalid("mesh has no vertices"));
    }
    if contours.iter().any(|c| c.is_empty()) {
        return Err(Error::invalid("every contour frame must be nonempty"));
    }
    let mut current = mesh0.vertices.clone();
    let mut trajectory = vec![current.clone()];
    let mut diagnostics = Vec::new();
    let mut aborted_at = None;
    for t in 0..contours.len() - 1 {
        let problem = RegistrationProblem {
            source: current.clone(),
            target: contours[t + 1].points.clone(),
            sigma_v: settings.sigma_v,
            sigma_w: settings.sigma_w,
            gamma: settings.gamma,
            n_steps: settings.n_steps,
            optim: settings.optim,
        };
        let reg = match register(&problem) {
            Ok(r) => r,
            Err(Error::NumericalBlowup { .. }) => {
                aborted_at = Some(t + 1);
                break;
            }
            Err(e) => return Err(e),
        };
        let path = match shoot(&reg.state) {
            Ok(p) => p,
            Err(Error::NumericalBlowup { .. }) => {
                aborted_at = Some(t + 1);
                break;
            }
            Err(e) => return Err(e),
        };
        current = path.qs.last().expect("states").clone();
        let error = tracking_error(&current, &contours[t + 1].points)?;
        diagnostics.push(FrameDiagnostics {
            frame: t + 1,
            loss: *reg.loss_history.last().expect("history"),
            data_term: reg.data_term,
            iterations: reg.iterations,
            converged: reg.converged,
            error,
        });
        trajectory.push(current.clone());
    }
    Ok(TrackResult {
        trajectory,
        faces: mesh0.faces.clone(),
        diagnostics,
        aborted_at,
    })
}

/// Mean distance from each tracked point to its nearest contour point
/// (exact nearest neighbor).
pub fn tracking_error(tracked: &[Vec3], contour: &[Vec3]) -> Result<f64> {
    if tracked.is_empty() || contour.is_empty() {
        return Err(Error::invalid("tracking error needs nonempty point sets"));
    }
    let sum: f64 = tracked
        .iter()
        .map(|p| {
            contour
                .iter()
                .map(|c| dist2(*p, *c))
                .fold(f64::INFINITY, f64::min)
        })
        .map(libm::sqrt)
        .sum();
    Ok(sum / tracked.len() as f64)
}

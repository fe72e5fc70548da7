//! First-order solvers: Bregman proximal gradient (BPG), FISTA for the
//! energy kernel, and a Chambolle–Pock scheme for NIG total-variation
//! deblurring.

use crate::error::{check_len, reject_nan, Error, Result};
use crate::kernels::KernelKind;
use crate::linops::{FiniteDiff2d, LinearOperator, Operator};
use crate::models::{fidelity_value, objective, Problem, Regularizer};
use crate::prox::{bregman_prox, ProxRequest};
use crate::rootfind::{solve_monotone, Bracket};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    /// `t = 1/L` from the problem's smoothness constant.
    Auto,
    Fixed(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverOptions {
    pub max_iters: usize,
    pub step: Step,
    /// Stop when both the relative iterate change and the relative objective
    /// change fall below `tol`; `0` disables the test.
    pub tol: f64,
    /// Record every `trace_stride`-th iterate (the first and last are always kept).
    pub trace_stride: usize,
    /// Stop once the fidelity value is at or below this level.
    pub fidelity_target: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions { max_iters: 500, step: Step::Auto, tol: 1e-10, trace_stride: 1, fidelity_target: None }
    }
}

impl SolverOptions {
    fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(Error::InvalidParameter("solver: max_iters >= 1 violated".into()));
        }
        if self.trace_stride == 0 {
            return Err(Error::InvalidParameter("solver: trace_stride >= 1 violated".into()));
        }
        if !(self.tol >= 0.0 && self.tol.is_finite()) {
            return Err(Error::InvalidParameter(format!("solver: tol >= 0 violated (tol = {})", self.tol)));
        }
        if let Step::Fixed(t) = self.step {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::InvalidParameter(format!("solver: step t > 0 violated (t = {t})")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
    TargetReached,
}

impl Termination {
    pub fn name(self) -> &'static str {
        match self {
            Termination::Converged => "converged",
            Termination::MaxIterations => "max_iterations",
            Termination::TargetReached => "target_reached",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    pub k: usize,
    pub objective: f64,
    /// Prox first-order residual for BPG/FISTA; largest ρ-equation residual
    /// for Chambolle–Pock.
    pub residual: f64,
    /// `‖x^k − x^{k−1}‖₂`.
    pub change: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverTrace {
    pub records: Vec<TraceRecord>,
    pub x: Vec<f64>,
    pub iterations: usize,
    pub reason: Termination,
    /// Step size used (the primal step for Chambolle–Pock).
    pub step: f64,
}

struct Tracer<'a> {
    opts: &'a SolverOptions,
    records: Vec<TraceRecord>,
}

impl<'a> Tracer<'a> {
    fn new(opts: &'a SolverOptions, f0: f64) -> Self {
        Tracer { opts, records: vec![TraceRecord { k: 0, objective: f0, residual: 0.0, change: 0.0 }] }
    }

    /// Log iteration `k` and decide whether to stop.
    fn step(&mut self, rec: TraceRecord, f_prev: f64, x_prev: &[f64], fid: Option<f64>) -> Option<Termination> {
        let o = self.opts;
        let reason = if o.fidelity_target.zip(fid).is_some_and(|(target, v)| v <= target) {
            Some(Termination::TargetReached)
        } else if o.tol > 0.0
            && rec.change <= o.tol * norm(x_prev).max(1.0)
            && (rec.objective - f_prev).abs() <= o.tol * f_prev.abs().max(1.0)
        {
            Some(Termination::Converged)
        } else if rec.k >= o.max_iters {
            Some(Termination::MaxIterations)
        } else {
            None
        };
        if rec.k % o.trace_stride == 0 || reason.is_some() {
            self.records.push(rec);
        }
        reason
    }

    fn finish(self, x: Vec<f64>, k: usize, reason: Termination, step: f64) -> SolverTrace {
        SolverTrace { records: self.records, x, iterations: k, reason, step }
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Resolve the step size, enforcing `t ≤ 1/L` whenever `L` is available.
pub fn resolve_step(problem: &Problem, step: Step) -> Result<f64> {
    match step {
        Step::Auto => {
            let l = problem.smoothness_constant()?;
            if l > 0.0 {
                Ok(1.0 / l)
            } else {
                Err(Error::StepSize("smoothness constant is zero; give an explicit step".into()))
            }
        }
        Step::Fixed(t) => match problem.smoothness_constant() {
            Ok(l) if t * l > 1.0 + 1e-12 => {
                Err(Error::StepSize(format!("t <= 1/L violated (t = {t}, L = {l})")))
            }
            Ok(_) | Err(Error::Unsupported(_)) => Ok(t),
            Err(e) => Err(e),
        },
    }
}

fn check_start(problem: &Problem, x0: &[f64]) -> Result<f64> {
    check_len(problem.dim(), x0.len())?;
    reject_nan(x0)?;
    let k = problem.kernel;
    if let Some(i) = x0.iter().position(|&v| !k.interior(v)) {
        return Err(Error::Domain(format!(
            "x0[{i}] = {} is not in int dom h for the {} kernel",
            x0[i],
            k.name()
        )));
    }
    let f = objective(problem, x0)?;
    if !f.is_finite() {
        return Err(Error::Domain("objective is infinite at x0".into()));
    }
    Ok(f)
}

/// One BPG step `prox^h_{tτψ*}(∇h*(∇h(x) − t∇f(x)))`. Returns the new
/// iterate and the prox first-order residual.
pub fn bpg_step(problem: &Problem, x: &[f64], t: f64) -> Result<(Vec<f64>, f64)> {
    let k = problem.kernel;
    let g = problem.smooth_grad(x)?;
    let mut xbar = Vec::with_capacity(x.len());
    for (i, (&xi, &gi)) in x.iter().zip(&g).enumerate() {
        let z = k.dh1(xi) - t * gi;
        if !k.conj_interior(z) {
            return Err(Error::Domain(format!(
                "gradient step left int dom h* at coordinate {i} (z = {z}); reduce the step"
            )));
        }
        xbar.push(k.dh1_conj(z));
    }
    match &problem.regularizer {
        Regularizer::Prior { prior, tau } => {
            let r = bregman_prox(&ProxRequest::new(k, prior, t * tau, &xbar))?;
            Ok((r.x, r.residual))
        }
        Regularizer::None | Regularizer::Composite { .. } => Ok((xbar, 0.0)),
    }
}

fn fidelity_at(problem: &Problem, opts: &SolverOptions, x: &[f64]) -> Result<Option<f64>> {
    opts.fidelity_target.map(|_| fidelity_value(&problem.fidelity, x)).transpose()
}

/// Bregman proximal gradient method.
///
/// A composite regularizer `τΣψ*(Lᵢx)` with bounded curvature is folded into
/// the smooth part, so its step reduces to a gradient step.
pub fn bpg(problem: &Problem, x0: &[f64], opts: &SolverOptions) -> Result<SolverTrace> {
    opts.validate()?;
    let mut f = check_start(problem, x0)?;
    let t = resolve_step(problem, opts.step)?;
    let mut x = x0.to_vec();
    let mut tracer = Tracer::new(opts, f);
    if let Some(v) = fidelity_at(problem, opts, &x)? {
        if v <= opts.fidelity_target.unwrap() {
            return Ok(tracer.finish(x, 0, Termination::TargetReached, t));
        }
    }
    let mut k = 0;
    loop {
        k += 1;
        let (xn, residual) = bpg_step(problem, &x, t)?;
        let fn_ = objective(problem, &xn)?;
        if !fn_.is_finite() {
            return Err(Error::Domain(format!("iterate {k} left the domain of the objective")));
        }
        let rec = TraceRecord { k, objective: fn_, residual, change: dist(&xn, &x) };
        let stop = tracer.step(rec, f, &x, fidelity_at(problem, opts, &xn)?);
        x = xn;
        f = fn_;
        if let Some(reason) = stop {
            return Ok(tracer.finish(x, k, reason, t));
        }
    }
}

/// FISTA momentum update `t_{k+1} = (1 + √(1 + 4t_k²))/2`.
pub fn fista_momentum(tk: f64) -> f64 {
    0.5 * (1.0 + (1.0 + 4.0 * tk * tk).sqrt())
}

/// FISTA with restart on objective increase; energy kernel only.
pub fn fista(problem: &Problem, x0: &[f64], opts: &SolverOptions) -> Result<SolverTrace> {
    if problem.kernel != KernelKind::Energy {
        return Err(Error::Unsupported(format!(
            "fista needs the energy kernel, got {}",
            problem.kernel.name()
        )));
    }
    opts.validate()?;
    let mut f = check_start(problem, x0)?;
    let t = resolve_step(problem, opts.step)?;
    let mut x = x0.to_vec();
    let mut y = x.clone();
    let mut tk = 1.0;
    let mut tracer = Tracer::new(opts, f);
    if let Some(v) = fidelity_at(problem, opts, &x)? {
        if v <= opts.fidelity_target.unwrap() {
            return Ok(tracer.finish(x, 0, Termination::TargetReached, t));
        }
    }
    let mut k = 0;
    loop {
        k += 1;
        let accelerated = bpg_step(problem, &y, t).and_then(|(xn, r)| {
            let fv = objective(problem, &xn)?;
            Ok((xn, r, fv))
        });
        let (xn, residual, fn_) = match accelerated {
            Ok((xn, r, fv)) if fv <= f => (xn, r, fv),
            _ => {
                // restart from the last iterate with a plain step
                tk = 1.0;
                let (xn, r) = bpg_step(problem, &x, t)?;
                let fv = objective(problem, &xn)?;
                (xn, r, fv)
            }
        };
        if !fn_.is_finite() {
            return Err(Error::Domain(format!("iterate {k} left the domain of the objective")));
        }
        let tn = fista_momentum(tk);
        let beta = (tk - 1.0) / tn;
        y = xn.iter().zip(&x).map(|(a, b)| a + beta * (a - b)).collect();
        tk = tn;
        let rec = TraceRecord { k, objective: fn_, residual, change: dist(&xn, &x) };
        let stop = tracer.step(rec, f, &x, fidelity_at(problem, opts, &xn)?);
        x = xn;
        f = fn_;
        if let Some(reason) = stop {
            return Ok(tracer.finish(x, k, reason, t));
        }
    }
}

/// Deblurring with an NIG total-variation prior,
/// `½‖Ax − ŷ‖² + Σᵢ (√(δ² + ‖Lᵢx‖²) − δ)`, where `Lᵢx ∈ ℝ²` are the forward
/// differences at pixel `i` (NIG with `μ = β = 0`, `α = 1`, `Σ = I`).
#[derive(Debug, Clone)]
pub struct NigTv {
    pub a: Operator,
    pub y: Vec<f64>,
    pub height: usize,
    pub width: usize,
    pub delta: f64,
}

impl NigTv {
    pub fn new(a: Operator, y: Vec<f64>, height: usize, width: usize, delta: f64) -> Result<Self> {
        let n = height * width;
        if n == 0 {
            return Err(Error::InvalidParameter("nig-tv: image must be non-empty".into()));
        }
        check_len(n, a.shape().1)?;
        check_len(a.shape().0, y.len())?;
        reject_nan(&y)?;
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!("nig-tv: delta > 0 violated (delta = {delta})")));
        }
        Ok(NigTv { a, y, height, width, delta })
    }

    pub fn diff(&self) -> FiniteDiff2d {
        FiniteDiff2d { height: self.height, width: self.width }
    }

    pub fn objective(&self, x: &[f64]) -> f64 {
        let r = self.a.apply_raw(x);
        let fid: f64 = r.iter().zip(&self.y).map(|(a, b)| 0.5 * (a - b) * (a - b)).sum();
        let d = self.delta;
        let tv: f64 = self
            .diff()
            .apply_raw(x)
            .chunks(2)
            .map(|g| {
                let q = g[0] * g[0] + g[1] * g[1];
                // √(δ²+q) − δ without cancellation
                q / ((d * d + q).sqrt() + d)
            })
            .sum();
        fid + tv
    }
}

/// Dual scaling `ρ ≥ 0` solving `ρ²(sδ)² + (ρ/(1+ρ))²‖v‖² = 1`, and the
/// equation's residual at the returned root.
pub fn cp_rho(sdelta: f64, vnorm_sq: f64) -> Result<(f64, f64)> {
    let g = |r: f64| {
        let q = r / (1.0 + r);
        r * r * sdelta * sdelta + q * q * vnorm_sq - 1.0
    };
    let dg = |r: f64| 2.0 * r * sdelta * sdelta + 2.0 * r / (1.0 + r).powi(3) * vnorm_sq;
    // g(0) = −1 and g(1/(sδ)) ≥ 0
    let hi = 1.0 / sdelta;
    let rho = if g(hi) <= 0.0 { hi } else { solve_monotone(g, Some(&dg), Bracket::new(0.0, hi)?, 0.0)? };
    Ok((rho, g(rho).abs()))
}

/// Conjugate gradients for `(I + τAᵀA)x = b`, warm-started at `x`.
fn cg_solve(a: &dyn LinearOperator, tau: f64, b: &[f64], x: &mut [f64]) -> Result<()> {
    let apply = |v: &[f64]| -> Vec<f64> {
        let ata = a.adjoint_raw(&a.apply_raw(v));
        v.iter().zip(ata).map(|(p, q)| p + tau * q).collect()
    };
    let tol = 1e-10 * norm(b);
    let mut r: Vec<f64> = b.iter().zip(apply(x)).map(|(p, q)| p - q).collect();
    let mut rr = dot(&r, &r);
    if rr.sqrt() <= tol {
        return Ok(());
    }
    let mut p = r.clone();
    let max = 5 * x.len();
    for _ in 0..max {
        let ap = apply(&p);
        let alpha = rr / dot(&p, &ap);
        for i in 0..x.len() {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rn = dot(&r, &r);
        if rn.sqrt() <= tol {
            return Ok(());
        }
        let beta = rn / rr;
        rr = rn;
        for i in 0..p.len() {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(Error::NonConvergence(max))
}

/// Chambolle–Pock iteration with dual step `s` and primal step `tau_step`;
/// requires `s·τ·‖L‖₂² < 1`. The trace residual is the largest ρ-equation
/// residual of the iteration. `opts.step` is ignored.
pub fn chambolle_pock_nig_tv(
    model: &NigTv,
    s: f64,
    tau_step: f64,
    x0: &[f64],
    opts: &SolverOptions,
) -> Result<SolverTrace> {
    opts.validate()?;
    if !(s > 0.0 && s.is_finite() && tau_step > 0.0 && tau_step.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "chambolle-pock: steps s, tau > 0 violated (s = {s}, tau = {tau_step})"
        )));
    }
    let l = model.diff();
    let lsq = l.norm_sq();
    if s * tau_step * lsq >= 1.0 {
        return Err(Error::StepSize(format!(
            "s*tau*||L||^2 < 1 violated (s = {s}, tau = {tau_step}, ||L||^2 = {lsq})"
        )));
    }
    let n = model.height * model.width;
    check_len(n, x0.len())?;
    reject_nan(x0)?;
    let aty = model.a.adjoint_raw(&model.y);
    let sdelta = s * model.delta;

    let mut x = x0.to_vec();
    let mut z = x.clone();
    let mut y = vec![0.0; 2 * n];
    let mut f = model.objective(&x);
    let mut tracer = Tracer::new(opts, f);
    let mut k = 0;
    loop {
        k += 1;
        let lz = l.apply_raw(&z);
        let mut worst = 0.0f64;
        for (yi, gi) in y.chunks_mut(2).zip(lz.chunks(2)) {
            let v = [yi[0] + s * gi[0], yi[1] + s * gi[1]];
            let (rho, res) = cp_rho(sdelta, v[0] * v[0] + v[1] * v[1])?;
            worst = worst.max(res);
            let c = rho / (1.0 + rho);
            yi[0] = c * v[0];
            yi[1] = c * v[1];
        }
        let lty = l.adjoint_raw(&y);
        let b: Vec<f64> = x.iter().zip(&lty).zip(&aty).map(|((xi, p), q)| xi - tau_step * (p - q)).collect();
        let mut xn = x.clone();
        cg_solve(model.a.as_ref(), tau_step, &b, &mut xn)?;
        z = xn.iter().zip(&x).map(|(a, b)| 2.0 * a - b).collect();
        let fn_ = model.objective(&xn);
        let rec = TraceRecord { k, objective: fn_, residual: worst, change: dist(&xn, &x) };
        let stop = tracer.step(rec, f, &x, None);
        x = xn;
        f = fn_;
        if let Some(reason) = stop {
            return Ok(tracer.finish(x, k, reason, tau_step));
        }
    }
}

//! Bregman proximal operators of scaled Cramér rate functions,
//! `prox(x̄) = argmin { t·ψ_R*(u) + D_h(u, x̄) }`.
//!
//! Closed forms are used where they exist. Otherwise the first-order
//! condition `∇h(u) − ∇h(x̄) + t∇ψ_R*(u) = 0` is solved as a monotone scalar
//! equation: directly in `u` for the closed-form rate functions, in the
//! natural parameter `θ` for the uniform and logistic priors (whose rate
//! functions are themselves implicit), and as nested scalar roots for the
//! coupled multinomial, negative multinomial and NIG priors.

use nalgebra::{DMatrix, DVector};

use crate::cramer::{centre, centred_dpsi};
use crate::error::{check_len, reject_nan, Error, Result};
use crate::expfam::{mat_vec, mean, Family, ReferenceDistribution};
use crate::kernels::KernelKind;
use crate::prior::Prior;
use crate::rootfind::{bracket_root, lambert_w0_exp, solve_monotone, solve_on_interval, Bracket, Bracketed};

/// Input of [`bregman_prox`].
#[derive(Debug, Clone, Copy)]
pub struct ProxRequest<'a> {
    pub kernel: KernelKind,
    pub prior: &'a Prior,
    pub t: f64,
    pub xbar: &'a [f64],
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProxResult {
    pub x: Vec<f64>,
    /// `∇h(x̄) − ∇h(x⁺)`, the dual point of the Moreau-type decomposition.
    pub dual: Vec<f64>,
    /// First-order residual `‖∇h(x⁺) − ∇h(x̄) + t∇ψ_R*(x⁺)‖∞`.
    pub residual: f64,
}

impl<'a> ProxRequest<'a> {
    pub fn new(kernel: KernelKind, prior: &'a Prior, t: f64, xbar: &'a [f64]) -> Self {
        ProxRequest { kernel, prior, t, xbar }
    }

    fn validate(&self) -> Result<()> {
        if !(self.t > 0.0 && self.t.is_finite()) {
            return Err(Error::InvalidParameter(format!("prox: t > 0 violated (t = {})", self.t)));
        }
        check_len(self.prior.dim(), self.xbar.len())?;
        reject_nan(self.xbar)?;
        if let Some(i) = self.xbar.iter().position(|&v| !self.kernel.interior(v)) {
            return Err(Error::Domain(format!(
                "prox: xbar[{i}] = {} is not in int dom h for the {} kernel",
                self.xbar[i],
                self.kernel.name()
            )));
        }
        match self.prior {
            Prior::Joint(d) => check_compatible(self.kernel, d),
            Prior::Iid { dist, .. } => check_compatible(self.kernel, dist),
            Prior::Separable(v) => v.iter().try_for_each(|d| check_compatible(self.kernel, d)),
        }
    }
}

/// `int dom h ∩ dom ψ_R*` must be non-empty, and the coupled priors need
/// structure the operator can exploit.
fn check_compatible(k: KernelKind, d: &ReferenceDistribution) -> Result<()> {
    if k == KernelKind::Energy {
        return Ok(());
    }
    let who = format!("{} prior with the {} kernel", d.name(), k.name());
    match d.family() {
        Family::Normal { .. } if !d.is_univariate() && !d.scale().unwrap().diagonal => {
            Err(Error::Unsupported(format!("{who}: covariance must be diagonal")))
        }
        Family::NormalInverseGaussian { .. } if !d.is_univariate() && d.scale().unwrap().isotropic.is_none() => {
            Err(Error::Unsupported(format!("{who}: Σ must be a multiple of the identity")))
        }
        Family::NegativeMultinomial { p, .. } if p.iter().any(|&q| q == 0.0) => Err(Error::InvalidParameter(
            format!("{who}: p_i > 0 violated (int dom h ∩ dom ψ* is empty)"),
        )),
        Family::DiscreteUniform { b, .. } if *b <= 0 => Err(Error::InvalidParameter(format!(
            "{who}: b > 0 violated (int dom h ∩ dom ψ* is empty)"
        ))),
        Family::ContinuousUniform { b, .. } if *b <= 0.0 => Err(Error::InvalidParameter(format!(
            "{who}: b > 0 violated (int dom h ∩ dom ψ* is empty)"
        ))),
        _ => Ok(()),
    }
}

/// Evaluate the Bregman proximal operator.
pub fn bregman_prox(req: &ProxRequest) -> Result<ProxResult> {
    req.validate()?;
    let (k, t, xbar) = (req.kernel, req.t, req.xbar);
    let x = if xbar == req.prior.mean().as_slice() {
        xbar.to_vec()
    } else {
        match req.prior {
            Prior::Joint(d) if !d.is_univariate() => prox_joint(k, d, t, xbar)?,
            _ => {
                let mut out = Vec::with_capacity(xbar.len());
                for (i, &xb) in xbar.iter().enumerate() {
                    out.push(prox_scalar(k, req.prior.component(i).unwrap(), t, xb)?.0);
                }
                out
            }
        }
    };
    finish(req, x)
}

fn finish(req: &ProxRequest, x: Vec<f64>) -> Result<ProxResult> {
    let k = req.kernel;
    if let Some(i) = x.iter().position(|&v| !k.interior(v)) {
        return Err(Error::RootFailure(format!(
            "prox output x[{i}] = {} left int dom h for the {} kernel",
            x[i],
            k.name()
        )));
    }
    let dual = req.xbar.iter().zip(&x).map(|(&a, &b)| k.dh1(a) - k.dh1(b)).collect();
    let residual = prox_residual(req, &x)?;
    Ok(ProxResult { x, dual, residual })
}

/// First-order residual `‖∇h(x⁺) − ∇h(x̄) + t∇ψ_R*(x⁺)‖∞`.
///
/// Coordinates pinned to zero by a negative multinomial with `pᵢ = 0` are
/// skipped, since the rate function is not differentiable there.
pub fn prox_residual(req: &ProxRequest, x: &[f64]) -> Result<f64> {
    check_len(req.xbar.len(), x.len())?;
    reject_nan(x)?;
    let k = req.kernel;
    if x.iter().any(|&v| !k.interior(v)) {
        return Err(Error::Domain("prox_residual: x is not in int dom h".into()));
    }
    let (grad, keep): (Vec<f64>, Vec<usize>) = match req.prior {
        Prior::Joint(d) => match d.family() {
            Family::NegativeMultinomial { p, x0 } if p.iter().any(|&q| q == 0.0) => {
                let keep: Vec<usize> = (0..p.len()).filter(|&i| p[i] > 0.0).collect();
                if keep.is_empty() {
                    return Ok(0.0);
                }
                let sub = ReferenceDistribution::negative_multinomial(keep.iter().map(|&i| p[i]).collect(), *x0)?;
                let xs: Vec<f64> = keep.iter().map(|&i| x[i]).collect();
                // the pinned coordinates are zero, so ȳ is unchanged
                (crate::cramer::cramer_grad(&sub, &xs)?, keep)
            }
            _ => (req.prior.grad(x)?, (0..x.len()).collect()),
        },
        _ => (req.prior.grad(x)?, (0..x.len()).collect()),
    };
    Ok(keep
        .iter()
        .zip(grad)
        .map(|(&i, g)| (k.dh1(x[i]) - k.dh1(req.xbar[i]) + req.t * g).abs())
        .fold(0.0, f64::max))
}

/// The dual point `θ⁺` in natural-parameter scale: `x⁺ = ∇h*(∇h(x̄) − tθ⁺)`,
/// so `θ⁺ = ∇ψ_R*(x⁺)` at interior solutions. Zero exactly when `x̄ = E_R`.
pub fn dual_prox_theta(kernel: KernelKind, prior: &Prior, t: f64, xbar: &[f64]) -> Result<Vec<f64>> {
    let req = ProxRequest::new(kernel, prior, t, xbar);
    req.validate()?;
    if prior.is_coordinatewise() {
        let mut out = Vec::with_capacity(xbar.len());
        for (i, &xb) in xbar.iter().enumerate() {
            let dist = prior.component(i).unwrap();
            let th = if mean(dist)[0] == xb { 0.0 } else { prox_scalar(kernel, dist, t, xb)?.1 };
            out.push(th);
        }
        return Ok(out);
    }
    let r = bregman_prox(&req)?;
    Ok(r.dual.iter().map(|v| v / t).collect())
}

// ---------------------------------------------------------------------------
// scalar priors

/// Returns `(x⁺, θ⁺)` with `θ⁺` in natural-parameter scale.
fn prox_scalar(k: KernelKind, d: &ReferenceDistribution, t: f64, xb: f64) -> Result<(f64, f64)> {
    use KernelKind::*;
    if mean(d)[0] == xb {
        return Ok((xb, 0.0));
    }
    let closed = match (k, d.family()) {
        (Energy, Family::Normal { mean, .. }) => {
            let s = d.scale().unwrap().sigma[(0, 0)];
            Some((s * xb + t * mean[0]) / (t + s))
        }
        (BoltzmannShannon, Family::Normal { mean, .. }) => {
            let s = d.scale().unwrap().sigma[(0, 0)];
            Some(s / t * lambert_w0_exp((t * xb / s).ln() + t * mean[0] / s))
        }
        (Burg, Family::Normal { mean, .. }) => {
            let s = d.scale().unwrap().sigma[(0, 0)];
            let a = t / s;
            let b = 1.0 / xb - a * mean[0];
            Some(positive_quadratic_root(a, b, -1.0))
        }
        (Energy, Family::Gamma { alpha, beta }) => Some(positive_quadratic_root(1.0, -(xb - t * beta), -t * alpha)),
        (BoltzmannShannon, Family::Gamma { alpha, beta }) => {
            Some(alpha * t / lambert_w0_exp((alpha * t / xb).ln() + t * beta))
        }
        (Burg, Family::Gamma { alpha, beta }) => Some(xb * (t * alpha + 1.0) / (xb * t * beta + 1.0)),
        (Energy, Family::Poisson { lambda }) => Some(t * lambert_w0_exp((lambda / t).ln() + xb / t)),
        (BoltzmannShannon, Family::Poisson { lambda }) => Some(((xb.ln() + t * lambda.ln()) / (1.0 + t)).exp()),
        (_, Family::DiscreteUniform { .. } | Family::ContinuousUniform { .. } | Family::Logistic { .. }) => {
            return prox_dual_route(k, d, t, xb);
        }
        _ => None,
    };
    let x = match closed {
        Some(x) if k.interior(x) && x.is_finite() => x,
        _ => prox_primal_route(k, d, t, xb)?,
    };
    Ok((x, (k.dh1(xb) - k.dh1(x)) / t))
}

/// Root of `a u² + b u + c = 0` with `a > 0, c < 0` (the positive one),
/// evaluated without cancellation.
fn positive_quadratic_root(a: f64, b: f64, c: f64) -> f64 {
    let disc = (b * b - 4.0 * a * c).sqrt();
    if b <= 0.0 {
        (disc - b) / (2.0 * a)
    } else {
        -2.0 * c / (disc + b)
    }
}

fn interior_anchor(lo: f64, hi: f64, prefs: &[f64]) -> f64 {
    if let Some(&p) = prefs.iter().find(|&&p| p > lo && p < hi) {
        return p;
    }
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => lo + 0.5 * (hi - lo),
        (true, false) => lo + lo.abs().max(1.0),
        (false, true) => hi - hi.abs().max(1.0),
        (false, false) => 0.0,
    }
}

/// Solve `h′(u) − h′(x̄) + t·ψ*′(u) = 0` on `int dom h ∩ int dom ψ*`.
fn prox_primal_route(k: KernelKind, d: &ReferenceDistribution, t: f64, xb: f64) -> Result<f64> {
    let (slo, shi) = d.support_hull()?;
    if slo == shi {
        // point mass: the rate function is the indicator of {slo}
        return if k.interior(slo) {
            Ok(slo)
        } else {
            Err(Error::InvalidParameter(format!(
                "{} prior with the {} kernel: int dom h ∩ dom ψ* is empty",
                d.name(),
                k.name()
            )))
        };
    }
    let lo = if k == KernelKind::Energy { slo } else { slo.max(0.0) };
    let hi = shi;
    let c = k.dh1(xb);
    let dstar = |u: f64| crate::cramer::cramer_grad(d, &[u]).map(|g| g[0]).unwrap_or(f64::NAN);
    let f = |u: f64| k.dh1(u) - c + t * dstar(u);
    let df = |u: f64| k.d2h1(u) + t / d.d2psi_1d(dstar(u));
    let anchor = interior_anchor(lo, hi, &[xb, mean(d)[0]]);
    solve_on_interval(f, Some(&df), anchor, lo, hi, true).map_err(|e| root_failure(d, k, e))
}

fn root_failure(d: &ReferenceDistribution, k: KernelKind, e: Error) -> Error {
    Error::RootFailure(format!("{} prior with the {} kernel: {e}", d.name(), k.name()))
}

/// Uniform and logistic priors: solve `ψ′(θ) = ∇h*(∇h(x̄) − tθ)` for the
/// natural parameter, on the branch `sign(θ) = sign(x̄ − μ)`.
fn prox_dual_route(k: KernelKind, d: &ReferenceDistribution, t: f64, xb: f64) -> Result<(f64, f64)> {
    if let Family::DiscreteUniform { a, b } = *d.family() {
        if a == b {
            let x = a as f64;
            return Ok((x, (k.dh1(xb) - k.dh1(x)) / t));
        }
    }
    let mu = centre(d);
    let z = xb - mu;
    if z == 0.0 {
        return Ok((xb, 0.0));
    }
    let x_of = |th: f64| match k {
        KernelKind::Energy => xb - t * th,
        KernelKind::BoltzmannShannon => xb * (-t * th).exp(),
        KernelKind::Burg => xb / (1.0 + t * xb * th),
    };
    // ψ′(θ) − x(θ), with the centre removed analytically where possible
    let f = |th: f64| match k {
        KernelKind::Energy => centred_dpsi(d, th) + t * th - z,
        _ => centred_dpsi(d, th) - (x_of(th) - mu),
    };
    let df = |th: f64| d.d2psi_1d(th) + t / k.d2h1(x_of(th));
    let (tlo, thi) = d.natural_interval();
    let (mut lo, mut hi) = if z > 0.0 { (0.0, thi) } else { (tlo, 0.0) };
    if k == KernelKind::Burg && z < 0.0 {
        lo = lo.max(-1.0 / (t * xb));
    }
    if hi.is_finite() && z > 0.0 {
        hi *= 1.0 - 1e-16;
    }
    let anchor = if z > 0.0 {
        if hi.is_finite() { 0.5 * hi } else { 1.0 }
    } else if lo.is_finite() {
        0.5 * lo
    } else {
        -1.0
    };
    let th = match bracket_root(f, anchor, lo, hi, true).map_err(|e| root_failure(d, k, e))? {
        Bracketed::Exact(th) => th,
        Bracketed::Interval(br) => solve_monotone(f, Some(&df), br, 0.0).map_err(|e| root_failure(d, k, e))?,
    };
    Ok((x_of(th), th))
}

// ---------------------------------------------------------------------------
// joint priors

fn prox_joint(k: KernelKind, d: &ReferenceDistribution, t: f64, xbar: &[f64]) -> Result<Vec<f64>> {
    match d.family() {
        Family::Normal { mean, .. } => {
            let sc = d.scale().unwrap();
            if k == KernelKind::Energy {
                let n = mean.len();
                let m = &sc.sigma + DMatrix::identity(n, n) * t;
                let sx = sc.mul(xbar);
                let rhs = DVector::from_iterator(n, sx.iter().zip(mean).map(|(a, b)| a + t * b));
                let chol = m.cholesky().ok_or_else(|| Error::RootFailure("tI + Σ not SPD".into()))?;
                Ok(chol.solve(&rhs).iter().cloned().collect())
            } else {
                xbar.iter()
                    .enumerate()
                    .map(|(i, &xb)| {
                        let di = ReferenceDistribution::normal_1d(mean[i], sc.sigma[(i, i)])?;
                        Ok(prox_scalar(k, &di, t, xb)?.0)
                    })
                    .collect()
            }
        }
        Family::NormalInverseGaussian { .. } => {
            if k == KernelKind::Energy {
                nig_energy(d, t, xbar)
            } else {
                nig_isotropic(k, d, t, xbar)
            }
        }
        Family::Multinomial { n, p } => multinomial(k, *n as f64, p, t, xbar),
        Family::NegativeMultinomial { p, x0 } => negative_multinomial(k, p, *x0, t, xbar),
        _ => unreachable!("univariate families take the scalar path"),
    }
}

/// NIG under the Energy kernel, any Σ: `x⁺ = μ + (I + ρΣ⁻¹)⁻¹ v` with
/// `v = x̄ − μ + tβ` and `ρ ≥ 0` the root of
/// `ρ²δ² + Σₖ λₖ (ρ ṽₖ / (λₖ + ρ))² = (tα)²` in the eigenbasis of Σ.
fn nig_energy(d: &ReferenceDistribution, t: f64, xbar: &[f64]) -> Result<Vec<f64>> {
    let Family::NormalInverseGaussian { mu, beta, alpha, delta, .. } = d.family() else { unreachable!() };
    let sc = d.scale().unwrap();
    let v: Vec<f64> = (0..mu.len()).map(|i| xbar[i] - mu[i] + t * beta[i]).collect();
    let vt = mat_vec(&sc.eigvecs.transpose(), &v);
    let lam = &sc.eigvals;
    let ta = t * alpha;
    let phi = |rho: f64| {
        let mut s = rho * rho * delta * delta;
        for (l, w) in lam.iter().zip(&vt) {
            let q = rho * w / (l + rho);
            s += l * q * q;
        }
        s - ta * ta
    };
    let dphi = |rho: f64| {
        let mut s = 2.0 * rho * delta * delta;
        for (l, w) in lam.iter().zip(&vt) {
            s += 2.0 * l * l * l * w * w * rho / (l + rho).powi(3);
        }
        s
    };
    let rmax = ta / delta;
    let rho = if phi(rmax) <= 0.0 {
        rmax
    } else {
        solve_monotone(phi, Some(&dphi), Bracket::new(0.0, rmax)?, 0.0)
            .map_err(|e| root_failure(d, KernelKind::Energy, e))?
    };
    let zt: Vec<f64> = lam.iter().zip(&vt).map(|(l, w)| l * w / (l + rho)).collect();
    let z = mat_vec(&sc.eigvecs, &zt);
    Ok(mu.iter().zip(z).map(|(m, zi)| m + zi).collect())
}

/// NIG with Σ = σI under the entropy or Burg kernel. For a fixed
/// `ρ = tα/(σ r)` every coordinate solves
/// `h′(u) − h′(x̄) + ρ(u − μ) − tβ = 0`; the outer equation is
/// `ρ²(δ² + ‖u − μ‖²/σ) = (tα/σ)²`, increasing in ρ.
fn nig_isotropic(k: KernelKind, d: &ReferenceDistribution, t: f64, xbar: &[f64]) -> Result<Vec<f64>> {
    let Family::NormalInverseGaussian { mu, beta, alpha, delta, .. } = d.family() else { unreachable!() };
    let sigma = d.scale().unwrap().isotropic.unwrap();
    let inner = |rho: f64, i: usize| -> f64 {
        let xb = xbar[i];
        match k {
            KernelKind::BoltzmannShannon => {
                lambert_w0_exp((rho * xb).ln() + t * beta[i] + rho * mu[i]) / rho
            }
            KernelKind::Burg => {
                let w = t * beta[i] - 1.0 / xb;
                positive_quadratic_root(rho, -(w + rho * mu[i]), -1.0)
            }
            KernelKind::Energy => (xb + t * beta[i] + rho * mu[i]) / (1.0 + rho),
        }
    };
    let target = t * alpha / sigma;
    let g = |rho: f64| {
        let mut q = 0.0;
        for i in 0..mu.len() {
            let z = inner(rho, i) - mu[i];
            q += z * z;
        }
        rho * rho * (delta * delta + q / sigma) - target * target
    };
    let rmax = target / delta;
    let rho = if g(rmax) <= 0.0 {
        rmax
    } else {
        match bracket_root(g, 0.5 * rmax, 0.0, rmax, true).map_err(|e| root_failure(d, k, e))? {
            Bracketed::Exact(r) => r,
            Bracketed::Interval(br) => solve_monotone(g, None, br, 0.0).map_err(|e| root_failure(d, k, e))?,
        }
    };
    Ok((0..mu.len()).map(|i| inner(rho, i)).collect())
}

/// Solve `h′(u) + t·ln(u/q) = h′(x̄) + c` for `u > 0`.
fn coupled_inner(k: KernelKind, t: f64, xb: f64, q: f64, c: f64) -> f64 {
    match k {
        KernelKind::Energy => t * lambert_w0_exp((xb + c) / t + (q / t).ln()),
        KernelKind::BoltzmannShannon => ((xb.ln() + t * q.ln() + c) / (1.0 + t)).exp(),
        KernelKind::Burg => {
            let rhs = -1.0 / xb + c;
            let f = |u: f64| -1.0 / u + t * (u / q).ln() - rhs;
            let df = |u: f64| 1.0 / (u * u) + t / u;
            solve_on_interval(f, Some(&df), xb, 0.0, f64::INFINITY, true).unwrap_or(f64::NAN)
        }
    }
}

/// Multinomial: for a fixed total `S ∈ (0, n)` each coordinate solves
/// `h′(uᵢ) − h′(x̄ᵢ) + t·ln(uᵢ/(n pᵢ)) = t·ln((n − S)/(n p₀))`; the outer
/// equation `S = Σ uᵢ(S)` is increasing in `S`.
fn multinomial(k: KernelKind, n: f64, p: &[f64], t: f64, xbar: &[f64]) -> Result<Vec<f64>> {
    let p0 = 1.0 - p.iter().sum::<f64>();
    let us = |s: f64| -> Vec<f64> {
        let c = t * ((n - s) / (n * p0)).ln();
        xbar.iter().zip(p).map(|(&xb, &pi)| coupled_inner(k, t, xb, n * pi, c)).collect()
    };
    let g = |s: f64| s - us(s).iter().sum::<f64>();
    let s = solve_on_interval(g, None, n * (1.0 - p0), 0.0, n, true)
        .map_err(|e| Error::RootFailure(format!("multinomial prox with the {} kernel: {e}", k.name())))?;
    Ok(us(s))
}

/// Negative multinomial: for a fixed `S > 0` each coordinate with `pᵢ > 0`
/// solves `h′(uᵢ) − h′(x̄ᵢ) + t·ln(uᵢ/pᵢ) = t·ln(x₀ + S)`; coordinates with
/// `pᵢ = 0` are pinned to 0. The outer equation is `S = Σ uᵢ(S)`.
fn negative_multinomial(k: KernelKind, p: &[f64], x0: f64, t: f64, xbar: &[f64]) -> Result<Vec<f64>> {
    let us = |s: f64| -> Vec<f64> {
        let c = t * (x0 + s).ln();
        xbar.iter()
            .zip(p)
            .map(|(&xb, &pi)| if pi > 0.0 { coupled_inner(k, t, xb, pi, c) } else { 0.0 })
            .collect()
    };
    if p.iter().all(|&q| q == 0.0) {
        return Ok(vec![0.0; p.len()]);
    }
    let p0 = 1.0 - p.iter().sum::<f64>();
    let g = |s: f64| s - us(s).iter().sum::<f64>();
    let s = solve_on_interval(g, None, x0 * (1.0 - p0) / p0, 0.0, f64::INFINITY, true)
        .map_err(|e| Error::RootFailure(format!("negative multinomial prox with the {} kernel: {e}", k.name())))?;
    Ok(us(s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootfind::lambert_w0;
    use KernelKind::*;

    fn prox1(k: KernelKind, d: ReferenceDistribution, t: f64, xb: f64) -> ProxResult {
        let prior = Prior::Joint(d);
        bregman_prox(&ProxRequest::new(k, &prior, t, &[xb])).unwrap()
    }

    #[test]
    fn table_examples() {
        let g = prox1(Energy, ReferenceDistribution::gamma(1.0, 1.0).unwrap(), 1.0, 2.0);
        assert!((g.x[0] - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-15);
        let n = prox1(Energy, ReferenceDistribution::normal_1d(0.0, 1.0).unwrap(), 1.0, 4.0);
        assert_eq!(n.x[0], 2.0);
        let p = prox1(BoltzmannShannon, ReferenceDistribution::poisson(4.0).unwrap(), 1.0, 1.0);
        assert!((p.x[0] - 2.0).abs() < 1e-15);
        let e = std::f64::consts::E;
        let n = prox1(BoltzmannShannon, ReferenceDistribution::normal_1d(0.0, 1.0).unwrap(), 1.0, e);
        assert!((n.x[0] - 1.0).abs() < 1e-15);
        let g = prox1(Burg, ReferenceDistribution::gamma(1.0, 1.0).unwrap(), 1.0, 3.0);
        assert_eq!(g.x[0], 1.5);
        let b = prox1(Energy, ReferenceDistribution::bernoulli(0.5).unwrap(), 0.7, 0.5);
        assert_eq!(b.x[0], 0.5);
        let p = prox1(Energy, ReferenceDistribution::poisson(1.0).unwrap(), 1.0, 0.0);
        assert!((p.x[0] - lambert_w0(1.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn fixed_point_at_the_mean() {
        let d = ReferenceDistribution::logistic(0.3, 1.0).unwrap();
        let prior = Prior::Joint(d);
        let r = bregman_prox(&ProxRequest::new(Energy, &prior, 1.0, &[0.3])).unwrap();
        assert_eq!(r.x, vec![0.3]);
        assert_eq!(r.dual, vec![0.0]);
        assert_eq!(dual_prox_theta(Energy, &prior, 1.0, &[0.3]).unwrap(), vec![0.0]);
    }

    #[test]
    fn residual_is_sensitive_to_perturbation() {
        let d = ReferenceDistribution::gamma(2.0, 1.0).unwrap();
        let prior = Prior::Joint(d);
        let req = ProxRequest::new(Energy, &prior, 0.5, &[3.0]);
        let r = bregman_prox(&req).unwrap();
        assert!(r.residual <= 1e-10);
        assert!(prox_residual(&req, &[r.x[0] + 1e-3]).unwrap() > 1e-4);
    }

    #[test]
    fn dual_sign_follows_offset_from_mean() {
        let prior = Prior::Joint(ReferenceDistribution::continuous_uniform(-1.0, 1.0).unwrap());
        for (xb, s) in [(0.3, 1.0), (-0.7, -1.0), (4.0, 1.0)] {
            let th = dual_prox_theta(Energy, &prior, 1.0, &[xb]).unwrap()[0];
            assert_eq!(th.signum(), s);
        }
    }

    #[test]
    fn uniform_dual_equation() {
        // t(θ − x̄/t) + (b e^{bθ} − a e^{aθ})/(e^{bθ} − e^{aθ}) = 1/θ
        let (a, b, t, xb) = (-1.0f64, 1.0f64, 1.0, 0.3);
        let prior = Prior::Joint(ReferenceDistribution::continuous_uniform(a, b).unwrap());
        let th = dual_prox_theta(Energy, &prior, t, &[xb]).unwrap()[0];
        let lhs = t * (th - xb / t)
            + (b * (b * th).exp() - a * (a * th).exp()) / ((b * th).exp() - (a * th).exp());
        assert!((lhs - 1.0 / th).abs() < 1e-10);
    }

    #[test]
    fn laplace_cubic_energy() {
        let (mu, b, t, xb) = (0.5, 2.0, 0.7, 3.0);
        let r = prox1(Energy, ReferenceDistribution::laplace(mu, b).unwrap(), t, xb);
        let rho = (r.x[0] - mu) / b;
        let bt = b / t;
        let a1 = bt * bt * b * b;
        let a2 = 2.0 * bt * bt * b * (mu - xb);
        let a3 = bt * bt * (mu - xb) * (mu - xb) - 2.0 * bt * b - 1.0;
        let a4 = -2.0 * bt * (mu - xb);
        let cubic = ((a1 * rho + a2) * rho + a3) * rho + a4;
        assert!(cubic.abs() < 1e-10, "{cubic}");
    }

    #[test]
    fn laplace_entropy_equation() {
        let (mu, b, t, xb) = (1.0, 0.8, 0.6, 2.5);
        let r = prox1(BoltzmannShannon, ReferenceDistribution::laplace(mu, b).unwrap(), t, xb);
        let rho = (r.x[0] - mu) / b;
        let l = ((mu + b * rho) / xb).ln();
        let res = rho + 2.0 * b / t * l - b * b * rho / (t * t) * l * l;
        assert!(res.abs() < 1e-10, "{res}");
    }

    #[test]
    fn laplace_burg_cubic() {
        let (mu, b, t, xb) = (0.5, 1.5, 0.8, 2.0);
        let r = prox1(Burg, ReferenceDistribution::laplace(mu, b).unwrap(), t, xb);
        let rho = (r.x[0] - mu) / b;
        let q = (b / xb) * (b / xb) - t * t;
        let a1 = b * b * q;
        let a2 = 2.0 * b * (mu * q - b * b * (t + 1.0) / xb);
        let a3 = b * b * ((1.0 - mu / xb).powi(2) + 2.0 * t * (1.0 - 2.0 * mu / xb)) - t * t * mu * mu;
        let a4 = 2.0 * t * b * mu * (1.0 - mu / xb);
        let cubic = ((a1 * rho + a2) * rho + a3) * rho + a4;
        assert!(cubic.abs() < 1e-10, "{cubic}");
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn nig_scalar_equations() {
        let (mu, beta, alpha, delta, sigma, t, xb) = (0.5, 0.2, 1.5, 0.7, 1.3, 0.9, 2.0);
        let d = ReferenceDistribution::nig(vec![mu], vec![beta], alpha, delta, vec![sigma]).unwrap();
        let x = prox1(BoltzmannShannon, d, t, xb).x[0];
        let lhs = t * alpha / sigma * (x - mu);
        let rhs = (t * beta - (x / xb).ln()) * (delta * delta + (x - mu).powi(2) / sigma).sqrt();
        assert!((lhs - rhs).abs() < 1e-10);

        let d = ReferenceDistribution::nig(vec![mu], vec![beta], alpha, delta, vec![1.0]).unwrap();
        let x = prox1(Burg, d, t, xb).x[0];
        let lhs = t * alpha * (x - mu) * x;
        let rhs = ((t * beta - 1.0 / xb) * x + 1.0) * (delta * delta + (x - mu).powi(2)).sqrt();
        assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn nig_multivariate_energy_matches_isotropic_route() {
        let d = ReferenceDistribution::nig(
            vec![0.1, -0.2, 0.3],
            vec![0.2, 0.1, -0.1],
            2.0,
            0.8,
            vec![1.5, 0.0, 0.0, 0.0, 1.5, 0.0, 0.0, 0.0, 1.5],
        )
        .unwrap();
        let xb = [1.0, 2.0, -0.5];
        let a = nig_energy(&d, 0.7, &xb).unwrap();
        let b = nig_isotropic(Energy, &d, 0.7, &xb).unwrap();
        for (u, v) in a.iter().zip(&b) {
            assert!((u - v).abs() < 1e-12);
        }
        let prior = Prior::Joint(d);
        let r = bregman_prox(&ProxRequest::new(Energy, &prior, 0.7, &xb)).unwrap();
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn nig_multivariate_burg_equation_with_zero_mean() {
        let (alpha, delta, sigma, t) = (2.0, 0.5, 1.0, 0.6);
        let beta = [0.3, -0.2];
        let d = ReferenceDistribution::nig(vec![0.0, 0.0], beta.to_vec(), alpha, delta, vec![sigma, 0.0, 0.0, sigma])
            .unwrap();
        let xb = [1.5, 0.4];
        let prior = Prior::Joint(d);
        let r = bregman_prox(&ProxRequest::new(Burg, &prior, t, &xb)).unwrap();
        assert!(r.residual < 1e-10);
        // recover ρ from any coordinate: ρ u² − w u − 1 = 0
        let w: Vec<f64> = (0..2).map(|i| t * beta[i] - 1.0 / xb[i]).collect();
        let rho = (1.0 + w[0] * r.x[0]) / (r.x[0] * r.x[0]);
        let s: f64 = (0..2).map(|i| (w[i] + (w[i] * w[i] + 4.0 * rho).sqrt()).powi(2)).sum();
        let lhs = (rho * delta).powi(2) + s / (4.0 * sigma);
        assert!((lhs - (alpha * t / sigma).powi(2)).abs() < 1e-9);
    }

    #[test]
    fn multinomial_entropy_closed_form() {
        let (n, p, t) = (4u32, vec![0.2, 0.3], 0.8);
        let xb = [1.5, 0.7];
        let prior = Prior::Joint(ReferenceDistribution::multinomial(n, p.clone()).unwrap());
        let r = bregman_prox(&ProxRequest::new(BoltzmannShannon, &prior, t, &xb)).unwrap();
        let tau = t / (t + 1.0);
        let p0 = 1.0 - p.iter().sum::<f64>();
        let gam: Vec<f64> = (0..2).map(|i| (p[i] * xb[i].powf(1.0 / t) / p0).powf(tau)).collect();
        let rho: f64 = r.x.iter().sum();
        for i in 0..2 {
            assert!((r.x[i] - gam[i] * (n as f64 - rho).powf(tau)).abs() < 1e-10);
        }
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn barcode_update_equation() {
        let (t, xb) = (0.3, 0.9);
        let r = prox1(Energy, ReferenceDistribution::bernoulli(0.5).unwrap(), t, xb);
        let x = r.x[0];
        assert!((x + t * (x / (1.0 - x)).ln() - xb).abs() < 1e-12);
    }

    #[test]
    fn negative_multinomial_with_zero_cell_under_energy() {
        let prior = Prior::Joint(ReferenceDistribution::negative_multinomial(vec![0.3, 0.0], 2.0).unwrap());
        let r = bregman_prox(&ProxRequest::new(Energy, &prior, 1.0, &[2.0, 1.0])).unwrap();
        assert_eq!(r.x[1], 0.0);
        assert!(r.residual < 1e-10);
        assert!(bregman_prox(&ProxRequest::new(Burg, &prior, 1.0, &[2.0, 1.0])).is_err());
    }

    #[test]
    fn incompatible_requests_are_rejected() {
        let prior = Prior::Joint(ReferenceDistribution::continuous_uniform(-2.0, -1.0).unwrap());
        assert!(bregman_prox(&ProxRequest::new(Burg, &prior, 1.0, &[1.0])).is_err());
        let prior = Prior::Joint(ReferenceDistribution::poisson(1.0).unwrap());
        assert!(matches!(
            bregman_prox(&ProxRequest::new(BoltzmannShannon, &prior, 1.0, &[0.0])),
            Err(Error::Domain(_))
        ));
        assert!(bregman_prox(&ProxRequest::new(Energy, &prior, -1.0, &[1.0])).is_err());
    }
}

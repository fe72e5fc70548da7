//! Brute-force reference computations used to validate the closed forms:
//! numeric convex conjugation of log-normalizers, finite-difference
//! gradients, scalar prox minimization and descent-lemma sampling.
//!
//! Everything here is built from log-normalizers and kernel values only, so
//! it stays independent of the rate-function and prox formulas it checks.

use std::fmt::Write as _;
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{check_len, Error, Result};
use crate::expfam::{log_normalizer, log_normalizer_grad, natural_domain_contains, ReferenceDistribution, Region};
use crate::kernels::{bregman_distance, kernel_grad, KernelKind};
use crate::models::{fidelity_grad, fidelity_value, Fidelity};

const MAX_STEPS: usize = 4000;
const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, PartialEq)]
pub struct OracleRow {
    pub quantity: String,
    pub analytic: f64,
    pub oracle: f64,
    pub abs_err: f64,
    /// `abs_err / max(1, |analytic|)`.
    pub rel_err: f64,
    pub pass: bool,
}

impl OracleRow {
    /// Compare two values; passes when `rel_err <= tol`.
    pub fn compare(quantity: impl Into<String>, analytic: f64, oracle: f64, tol: f64) -> Self {
        let abs_err = (analytic - oracle).abs();
        let rel_err = abs_err / analytic.abs().max(1.0);
        OracleRow { quantity: quantity.into(), analytic, oracle, abs_err, rel_err, pass: rel_err <= tol }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct OracleReport {
    pub rows: Vec<OracleRow>,
}

impl OracleReport {
    pub fn push(&mut self, row: OracleRow) {
        self.rows.push(row);
    }

    pub fn all_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("quantity,analytic,oracle,abs_err,rel_err,pass\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{:e},{:e},{:e},{:e},{}",
                r.quantity, r.analytic, r.oracle, r.abs_err, r.rel_err, r.pass
            );
        }
        s
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }
}

/// Walk from `start` in direction `dir` until `f` changes sign, doubling the
/// step and halving towards any point where `inside` fails. Returns the
/// last point with the start sign and the first with the opposite sign.
fn walk_to_sign_change(
    f: &dyn Fn(f64) -> f64,
    inside: &dyn Fn(f64) -> bool,
    start: f64,
    dir: f64,
) -> Option<(f64, f64)> {
    let s0 = f(start).signum();
    let mut a = start;
    let mut step = 1.0;
    for _ in 0..MAX_STEPS {
        if step > 1e300 {
            return None;
        }
        let mut c = a + dir * step;
        let mut fc = if inside(c) { f(c) } else { f64::NAN };
        while fc.is_nan() {
            c = a + 0.5 * (c - a);
            if c == a {
                return None;
            }
            fc = if inside(c) { f(c) } else { f64::NAN };
        }
        if fc == 0.0 || fc.signum() != s0 {
            return Some((a, c));
        }
        step = 2.0 * (c - a).abs();
        a = c;
    }
    None
}

/// Bisection on the sign of `f` between `a` (sign of `f(a)`) and `b`.
fn bisect(f: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    let sa = f(a).signum();
    for _ in 0..MAX_STEPS {
        let m = 0.5 * (a + b);
        if m == a || m == b {
            break;
        }
        let fm = f(m);
        if fm == 0.0 {
            return m;
        }
        if fm.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

/// Golden-section search for the maximum of `g` on `[a, b]`, down to width `tol`.
fn golden_max(g: &dyn Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> f64 {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut gc, mut gd) = (g(c), g(d));
    for _ in 0..MAX_STEPS {
        if (b - a).abs() <= tol * (1.0 + a.abs().max(b.abs())) {
            break;
        }
        if gc >= gd {
            b = d;
            d = c;
            gd = gc;
            c = b - INV_PHI * (b - a);
            gc = g(c);
        } else {
            a = c;
            c = d;
            gc = gd;
            d = a + INV_PHI * (b - a);
            gd = g(d);
        }
    }
    if gc >= gd {
        c
    } else {
        d
    }
}

fn univariate(dist: &ReferenceDistribution) -> Result<()> {
    if dist.is_univariate() {
        Ok(())
    } else {
        Err(Error::Unsupported(format!("oracle is univariate only ({} has dimension {})", dist.name(), dist.dim())))
    }
}

/// Bracket the maximizer of `θ ↦ yθ − ψ(θ)` by the sign of its derivative.
fn conjugate_bracket(dist: &ReferenceDistribution, y: f64) -> Result<(f64, f64)> {
    let inside = |t: f64| t.is_finite() && natural_domain_contains(dist, &[t]).ok() == Some(Region::Interior);
    let dg = |t: f64| y - log_normalizer_grad(dist, &[t]).map(|g| g[0]).unwrap_or(f64::NAN);
    if !inside(0.0) {
        return Err(Error::BracketFailure(format!("0 is not interior to the natural domain of {}", dist.name())));
    }
    let d0 = dg(0.0);
    if d0 == 0.0 {
        return Ok((0.0, 0.0));
    }
    let dir = d0.signum();
    walk_to_sign_change(&dg, &inside, 0.0, dir)
        .map(|(a, b)| if a < b { (a, b) } else { (b, a) })
        .ok_or_else(|| {
            Error::BracketFailure(format!("no sign change of y - psi'(theta) for {} at y = {y}", dist.name()))
        })
}

/// `ψ*(y) = sup_θ {yθ − ψ(θ)}` by golden-section search over a bracket of
/// the maximizer; `tol` bounds the final relative bracket width.
pub fn numeric_conjugate(dist: &ReferenceDistribution, y: f64, tol: f64) -> Result<f64> {
    univariate(dist)?;
    let (a, b) = conjugate_bracket(dist, y)?;
    let g = |t: f64| y * t - log_normalizer(dist, &[t]).unwrap_or(f64::INFINITY);
    if a == b {
        return Ok(g(a));
    }
    let t = golden_max(&g, a, b, tol);
    Ok(g(t).max(g(a)).max(g(b)))
}

/// Maximizer `θ*(y)` of `yθ − ψ(θ)`, i.e. `(ψ*)′(y)`, by bisection on the
/// derivative's sign.
pub fn numeric_conjugate_argmax(dist: &ReferenceDistribution, y: f64) -> Result<f64> {
    univariate(dist)?;
    let (a, b) = conjugate_bracket(dist, y)?;
    if a == b {
        return Ok(a);
    }
    let dg = |t: f64| y - log_normalizer_grad(dist, &[t]).map(|g| g[0]).unwrap_or(f64::NAN);
    Ok(bisect(&dg, a, b))
}

/// Central differences, falling back to a one-sided difference where `f`
/// is infinite on one side.
pub fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) {
        return Err(Error::InvalidParameter(format!("fd_gradient: step > 0 violated (step = {step})")));
    }
    let f0 = f(x);
    let mut p = x.to_vec();
    let mut out = Vec::with_capacity(x.len());
    for i in 0..x.len() {
        p[i] = x[i] + step;
        let fp = f(&p);
        p[i] = x[i] - step;
        let fm = f(&p);
        p[i] = x[i];
        out.push(match (fp.is_finite(), fm.is_finite(), f0.is_finite()) {
            (true, true, _) => (fp - fm) / (2.0 * step),
            (true, false, true) => (fp - f0) / step,
            (false, true, true) => (f0 - fm) / step,
            _ => {
                return Err(Error::Domain(format!(
                    "fd_gradient: f is not finite around coordinate {i}"
                )))
            }
        });
    }
    Ok(out)
}

/// Minimizer of `t·ψ_R*(u) + D_h(u, x̄)` over `int dom h ∩ dom ψ_R*` for a
/// univariate prior. The conjugate is evaluated numerically; a golden-section
/// search is followed by bisection on the sign of the derivative
/// `t·θ*(u) + h′(u) − h′(x̄)`.
pub fn dense_prox_1d(kernel: KernelKind, prior: &ReferenceDistribution, t: f64, xbar: f64) -> Result<f64> {
    univariate(prior)?;
    let (mut lo, hi) = prior.support_hull()?;
    if kernel != KernelKind::Energy {
        lo = lo.max(0.0);
    }
    if !(lo < hi) {
        return Err(Error::Domain(format!("dense_prox_1d: empty domain for {} with the {} kernel", prior.name(), kernel.name())));
    }
    let hbar = kernel_grad(kernel, &[xbar])?[0];
    let inside = |u: f64| u > lo && u < hi && u.is_finite();
    let deriv = |u: f64| match (numeric_conjugate_argmax(prior, u), kernel_grad(kernel, &[u])) {
        (Ok(th), Ok(g)) => t * th + g[0] - hbar,
        _ => f64::NAN,
    };
    let obj = |u: f64| {
        let c = numeric_conjugate(prior, u, 1e-13).unwrap_or(f64::INFINITY);
        let d = bregman_distance(kernel, &[u], &[xbar]).unwrap_or(f64::INFINITY);
        -(t * c + d)
    };
    let start = if inside(xbar) {
        xbar
    } else if lo.is_finite() && hi.is_finite() {
        0.5 * (lo + hi)
    } else if lo.is_finite() {
        lo + 1.0
    } else {
        hi - 1.0
    };
    let d0 = deriv(start);
    if d0 == 0.0 {
        return Ok(start);
    }
    let (a, b) = walk_to_sign_change(&deriv, &inside, start, -d0.signum())
        .ok_or_else(|| Error::BracketFailure("dense_prox_1d: no sign change of the derivative".into()))?;
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    let u = golden_max(&obj, a, b, 1e-6);
    let w = 1e-5 * (b - a);
    let (ga, gb) = ((u - w).max(a), (u + w).min(b));
    if deriv(ga) < 0.0 && deriv(gb) > 0.0 {
        Ok(bisect(&deriv, ga, gb))
    } else {
        Ok(bisect(&deriv, a, b))
    }
}

/// Largest violation of `f(y) ≤ f(x) + ⟨∇f(x), y − x⟩ + L·D_h(y, x)` over
/// `samples` random interior pairs, reported against zero with tolerance 1e-9.
pub fn descent_lemma_check(fid: &Fidelity, kernel: KernelKind, l: f64, samples: usize, seed: u64) -> Result<OracleRow> {
    let d = fid.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let draw = |rng: &mut ChaCha8Rng| -> Vec<f64> {
        (0..d)
            .map(|_| match kernel {
                KernelKind::Energy => rng.random_range(-3.0..3.0),
                _ => rng.random_range((0.02f64).ln()..(5.0f64).ln()).exp(),
            })
            .collect()
    };
    let mut worst = f64::NEG_INFINITY;
    let mut used = 0;
    for _ in 0..samples {
        let x = draw(&mut rng);
        let y = draw(&mut rng);
        let fx = fidelity_value(fid, &x)?;
        let fy = fidelity_value(fid, &y)?;
        let Ok(g) = fidelity_grad(fid, &x) else { continue };
        if !(fx.is_finite() && fy.is_finite()) {
            continue;
        }
        check_len(d, g.len())?;
        let lin: f64 = g.iter().zip(y.iter().zip(&x)).map(|(gi, (yi, xi))| gi * (yi - xi)).sum();
        let v = fy - fx - lin - l * bregman_distance(kernel, &y, &x)?;
        worst = worst.max(v);
        used += 1;
    }
    if used == 0 {
        return Err(Error::Domain("descent_lemma_check: no admissible sample pairs".into()));
    }
    let name = format!("descent_lemma_{}_{}", fid.kind().name(), kernel.name());
    let mut row = OracleRow::compare(name, 0.0, worst.max(0.0), 1e-9);
    row.pass = worst <= 1e-9;
    Ok(row)
}

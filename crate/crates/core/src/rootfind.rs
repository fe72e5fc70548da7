//! Scalar root finding: safeguarded Newton with bisection fallback, and the
//! principal branch of the Lambert W function.
//!
//! Every implicit formula in the toolbox (uniform/logistic rate functions,
//! the nested multinomial proxes, the NIG and Chambolle–Pock ρ-equations)
//! reduces to a strictly monotone scalar equation, so a certified sign
//! change plus safeguarded Newton is enough.

use crate::error::{Error, Result};

const MAX_ITERS: usize = 200;
const MAX_DOUBLINGS: usize = 60;
/// Halvings allowed while approaching a finite open end of an interval.
const MAX_HALVINGS: usize = 1100;

/// A finite interval `[lo, hi]` over which a continuous function changes sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite()) || lo >= hi {
            return Err(Error::InvalidParameter(format!(
                "bracket requires finite lo < hi, got [{lo}, {hi}]"
            )));
        }
        Ok(Bracket { lo, hi })
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Outcome of a bracket search: either an exact root was hit or a sign change
/// was certified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bracketed {
    Exact(f64),
    Interval(Bracket),
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Search for a sign change of `f` starting from `anchor` inside the open
/// interval `(lo, hi)`; either end may be infinite.
///
/// `increasing` states the monotonicity of `f`, which decides the search
/// direction. Infinite ends are approached by doubling the step (at most 60
/// times); finite ends by halving the remaining distance, which reaches
/// solutions that sit extremely close to the boundary.
pub fn bracket_root<F>(f: F, anchor: f64, lo: f64, hi: f64, increasing: bool) -> Result<Bracketed>
where
    F: Fn(f64) -> f64,
{
    if !(anchor > lo && anchor < hi) {
        return Err(Error::InvalidParameter(format!(
            "anchor {anchor} not inside ({lo}, {hi})"
        )));
    }
    let fa = f(anchor);
    if fa.is_nan() {
        return Err(Error::NoSignChange(format!("f is NaN at anchor {anchor}")));
    }
    if fa == 0.0 {
        return Ok(Bracketed::Exact(anchor));
    }
    // Root lies to the right when f is below zero and increasing (or above zero and decreasing).
    let go_right = (fa < 0.0) == increasing;
    let end = if go_right { hi } else { lo };
    let mut prev = anchor;
    if end.is_infinite() {
        let mut step = anchor.abs().max(1.0);
        for _ in 0..MAX_DOUBLINGS {
            let x = if go_right { anchor + step } else { anchor - step };
            if let Some(b) = probe_with_prev(&f, fa, prev, x) {
                return Ok(b);
            }
            prev = x;
            step *= 2.0;
        }
        Err(Error::NoSignChange(format!(
            "no sign change after {MAX_DOUBLINGS} doublings from {anchor}"
        )))
    } else {
        let mut dist = (end - anchor).abs() / 2.0;
        for _ in 0..MAX_HALVINGS {
            let x = if go_right { end - dist } else { end + dist };
            if x == end || x == prev {
                break;
            }
            if let Some(b) = probe_with_prev(&f, fa, prev, x) {
                return Ok(b);
            }
            prev = x;
            dist /= 2.0;
        }
        Err(Error::NoSignChange(format!(
            "no sign change between {anchor} and the open end {end}"
        )))
    }
}

fn probe_with_prev<F: Fn(f64) -> f64>(f: &F, fa: f64, prev: f64, x: f64) -> Option<Bracketed> {
    let fx = f(x);
    if fx.is_nan() {
        return None;
    }
    if fx == 0.0 {
        return Some(Bracketed::Exact(x));
    }
    if sign(fx) != sign(fa) {
        return Some(Bracketed::Interval(Bracket {
            lo: prev.min(x),
            hi: prev.max(x),
        }));
    }
    None
}

/// Solve `f(x) = 0` for `f` continuous and strictly monotone on `bracket`.
///
/// Newton steps (when `df` is given) are accepted only if they stay strictly
/// inside the current bracket and decrease `|f|`; otherwise a bisection step
/// is taken. Brackets with both ends positive (or both negative) and a large
/// ratio are split geometrically, so roots near zero are resolved to full
/// relative precision. Stops when `|f(x)| <= tol` or the bracket has
/// collapsed to a few ulps.
pub fn solve_monotone<F>(
    f: F,
    df: Option<&dyn Fn(f64) -> f64>,
    bracket: Bracket,
    tol: f64,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let fa = f(a);
    let fb = f(b);
    if fa == 0.0 {
        return Ok(a);
    }
    if fb == 0.0 {
        return Ok(b);
    }
    if fa.is_nan() || fb.is_nan() || sign(fa) == sign(fb) {
        return Err(Error::NoSignChange(format!(
            "f({a}) = {fa}, f({b}) = {fb}"
        )));
    }
    let sa = sign(fa);

    let mut x = split(a, b);
    let mut fx = f(x);
    for _ in 0..MAX_ITERS {
        if fx == 0.0 || fx.abs() <= tol {
            return Ok(x);
        }
        if !fx.is_nan() {
            if sign(fx) == sa {
                a = x;
            } else {
                b = x;
            }
        }
        if collapsed(a, b) {
            return Ok(if fx.is_nan() { split(a, b) } else { x });
        }

        let mut next = None;
        if let (Some(d), false) = (df, fx.is_nan()) {
            let slope = d(x);
            if slope.is_finite() && slope != 0.0 {
                let cand = x - fx / slope;
                if cand > a.min(b) && cand < a.max(b) {
                    let fc = f(cand);
                    if !fc.is_nan() && fc.abs() < fx.abs() {
                        if (cand - x).abs() <= f64::EPSILON * cand.abs() {
                            return Ok(cand);
                        }
                        next = Some((cand, fc));
                    }
                }
            }
        }
        let (nx, nfx) = match next {
            Some(p) => p,
            None => {
                let m = split(a, b);
                (m, f(m))
            }
        };
        x = nx;
        fx = nfx;
    }
    if fx.abs() <= tol || collapsed(a, b) {
        return Ok(x);
    }
    Err(Error::MaxIterations(MAX_ITERS))
}

fn collapsed(a: f64, b: f64) -> bool {
    let (lo, hi) = (a.min(b), a.max(b));
    hi - lo <= 4.0 * f64::EPSILON * lo.abs().max(hi.abs()) || hi - lo <= f64::MIN_POSITIVE
}

fn split(a: f64, b: f64) -> f64 {
    let (lo, hi) = (a.min(b), a.max(b));
    if lo > 0.0 && hi > 4.0 * lo {
        (lo * hi).sqrt()
    } else if hi < 0.0 && lo < 4.0 * hi {
        -((lo * hi).sqrt())
    } else {
        lo + 0.5 * (hi - lo)
    }
}

/// Bracket and solve a strictly monotone equation on the open interval
/// `(lo, hi)` starting from `anchor`.
pub fn solve_on_interval<F>(
    f: F,
    df: Option<&dyn Fn(f64) -> f64>,
    anchor: f64,
    lo: f64,
    hi: f64,
    increasing: bool,
) -> Result<f64>
where
    F: Fn(f64) -> f64,
{
    match bracket_root(&f, anchor, lo, hi, increasing)? {
        Bracketed::Exact(x) => Ok(x),
        Bracketed::Interval(b) => solve_monotone(&f, df, b, 0.0),
    }
}

/// Principal branch `W₀` of the Lambert W function: the `w ≥ −1` with
/// `w·eʷ = x`, for `x ≥ −1/e`.
pub fn lambert_w0(x: f64) -> Result<f64> {
    const BRANCH: f64 = -1.0 / std::f64::consts::E;
    if x.is_nan() {
        return Err(Error::Domain("lambert_w0 of NaN".into()));
    }
    if x < BRANCH {
        // 1/e is not exactly representable; tolerate the rounding of the branch point itself.
        if x >= BRANCH - 4.0 * f64::EPSILON {
            return Ok(-1.0);
        }
        return Err(Error::Domain(format!("lambert_w0 requires x >= -1/e, got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    if x == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let mut w = if x > 1e300 {
        return Ok(lambert_w0_exp(x.ln()));
    } else if x >= 0.0 {
        x.ln_1p()
    } else {
        let p = (2.0 * (std::f64::consts::E * x + 1.0)).max(0.0).sqrt();
        if p < 0.3 {
            -1.0 + p - p * p / 3.0 + 11.0 / 72.0 * p * p * p
        } else {
            // Moderately negative x: a Padé-like start from the series at 0.
            x * (1.0 + 4.0 / 3.0 * x) / (1.0 + 7.0 / 3.0 * x + 5.0 / 6.0 * x * x)
        }
    };
    for _ in 0..64 {
        let ew = w.exp();
        let f = w * ew - x;
        let wp1 = w + 1.0;
        if wp1 == 0.0 {
            break;
        }
        let denom = ew * wp1 - (w + 2.0) * f / (2.0 * wp1);
        let dw = f / denom;
        if !dw.is_finite() {
            break;
        }
        let next = (w - dw).max(-1.0);
        if (next - w).abs() <= 2.0 * f64::EPSILON * next.abs().max(f64::MIN_POSITIVE) {
            w = next;
            break;
        }
        w = next;
    }
    Ok(w)
}

/// `W₀(eˡ)` evaluated without forming `eˡ`, i.e. the solution of
/// `w + ln w = l`. Used where the Lambert argument would overflow.
pub fn lambert_w0_exp(l: f64) -> f64 {
    if l < 20.0 {
        // eˡ is representable and W is well inside the fast regime.
        return lambert_w0(l.exp()).unwrap_or(f64::NAN);
    }
    if l == f64::INFINITY {
        return f64::INFINITY;
    }
    let mut w = l - l.ln();
    for _ in 0..64 {
        // Newton on g(w) = w + ln w − l, g' = 1 + 1/w.
        let g = w + w.ln() - l;
        let dw = g / (1.0 + 1.0 / w);
        w -= dw;
        if dw.abs() <= 2.0 * f64::EPSILON * w.abs() {
            break;
        }
    }
    w
}

//! Cramér rate functions `ψ_P*`, the convex conjugates of the log-normalizers.
//!
//! Most families have closed forms. The discrete uniform, continuous uniform
//! and logistic families only admit an implicit description: the maximizer
//! `θ` of `⟨y,θ⟩ − ψ_P(θ)` solves `ψ_P′(θ) = y`, found here by safeguarded
//! Newton on the branch `sign(θ) = sign(y − μ)`.

use crate::error::{check_len, reject_nan, Error, Result};
use crate::expfam::{dot, Family, ReferenceDistribution, Region};
use crate::rootfind::{bracket_root, solve_monotone, Bracketed};
use crate::special::{ln_sinhc, ln_x_csc, one_m_x_cot, x_coth_m1};

/// How a rate function is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    ClosedForm,
    ImplicitScalarRoot,
}

pub fn strategy(dist: &ReferenceDistribution) -> Strategy {
    match dist.family() {
        Family::DiscreteUniform { a, b } if a != b => Strategy::ImplicitScalarRoot,
        Family::ContinuousUniform { .. } | Family::Logistic { .. } => Strategy::ImplicitScalarRoot,
        _ => Strategy::ClosedForm,
    }
}

/// Classify `y` against `dom ψ_P*`.
///
/// `Interior` means the interior of the effective domain, `Boundary` a
/// point of the domain that is not interior (faces of the simplex, the
/// endpoints of a discrete uniform, `y = 0` for Poisson), `Outside` a point
/// where the rate function is `+∞`.
pub fn cramer_domain_classify(dist: &ReferenceDistribution, y: &[f64]) -> Result<Region> {
    check_len(dist.dim(), y.len())?;
    reject_nan(y)?;
    use Region::*;
    let interval = |v: f64, lo: f64, hi: f64, closed: bool| {
        if v > lo && v < hi {
            Interior
        } else if closed && (v == lo || v == hi) {
            Boundary
        } else {
            Outside
        }
    };
    Ok(match dist.family() {
        Family::Normal { .. } | Family::NormalInverseGaussian { .. } => {
            if y.iter().all(|v| v.is_finite()) {
                Interior
            } else {
                Outside
            }
        }
        Family::Laplace { .. } | Family::Logistic { .. } => interval(y[0], f64::NEG_INFINITY, f64::INFINITY, false),
        Family::Gamma { .. } => interval(y[0], 0.0, f64::INFINITY, false),
        Family::Poisson { .. } => interval(y[0], 0.0, f64::INFINITY, true),
        Family::ContinuousUniform { a, b } => interval(y[0], *a, *b, false),
        Family::DiscreteUniform { a, b } => interval(y[0], *a as f64, *b as f64, true),
        Family::Multinomial { n, .. } => {
            let n = *n as f64;
            let s: f64 = y.iter().sum();
            if y.iter().any(|&v| !(v >= 0.0)) || s > n || !s.is_finite() {
                Outside
            } else if y.iter().all(|&v| v > 0.0) && s < n {
                Interior
            } else {
                Boundary
            }
        }
        Family::NegativeMultinomial { p, .. } => {
            let mut region = Interior;
            for (&v, &pi) in y.iter().zip(p) {
                if !(v >= 0.0) || !v.is_finite() || (pi == 0.0 && v != 0.0) {
                    return Ok(Outside);
                }
                if v == 0.0 || pi == 0.0 {
                    region = Boundary;
                }
            }
            region
        }
    })
}

/// Centred log-normalizer `ψ(θ) − μθ` of the symmetric implicit families.
fn centred_psi(dist: &ReferenceDistribution, t: f64) -> f64 {
    match *dist.family() {
        Family::DiscreteUniform { a, b } => {
            let n = (b - a + 1) as f64;
            ln_sinhc(0.5 * n * t) - ln_sinhc(0.5 * t)
        }
        Family::ContinuousUniform { a, b } => ln_sinhc(0.5 * (b - a) * t),
        Family::Logistic { s, .. } => ln_x_csc(std::f64::consts::PI * s * t),
        _ => unreachable!("centred_psi on a closed-form family"),
    }
}

/// `ψ′(θ) − μ` for the symmetric implicit families; odd in θ.
pub(crate) fn centred_dpsi(dist: &ReferenceDistribution, t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    match *dist.family() {
        Family::DiscreteUniform { a, b } => {
            let n = (b - a + 1) as f64;
            (x_coth_m1(0.5 * n * t) - x_coth_m1(0.5 * t)) / t
        }
        Family::ContinuousUniform { a, b } => x_coth_m1(0.5 * (b - a) * t) / t,
        Family::Logistic { s, .. } => one_m_x_cot(std::f64::consts::PI * s * t) / t,
        _ => unreachable!("centred_dpsi on a closed-form family"),
    }
}

/// Centre μ of a symmetric implicit family.
pub(crate) fn centre(dist: &ReferenceDistribution) -> f64 {
    match *dist.family() {
        Family::DiscreteUniform { a, b } => (a as f64 + b as f64) / 2.0,
        Family::ContinuousUniform { a, b } => 0.5 * (a + b),
        Family::Logistic { mu, .. } => mu,
        _ => unreachable!(),
    }
}

/// Upper end of the natural parameter interval (symmetric about 0).
fn theta_limit(dist: &ReferenceDistribution) -> f64 {
    match *dist.family() {
        Family::Logistic { s, .. } => 1.0 / s,
        _ => f64::INFINITY,
    }
}

/// Solve `ψ′(θ) − μ = z` for the implicit families. `z` must be inside the
/// range of the centred gradient map.
pub(crate) fn implicit_theta(dist: &ReferenceDistribution, z: f64) -> Result<f64> {
    if z == 0.0 {
        return Ok(0.0);
    }
    let sgn = z.signum();
    let za = z.abs();
    let lim = theta_limit(dist);
    // Work on the positive branch; the centred gradient is odd.
    let f = |t: f64| centred_dpsi(dist, t) - za;
    let df = |t: f64| dist.d2psi_1d(t);
    let hi = if lim.is_finite() { lim * (1.0 - 1e-12) } else { lim };
    let anchor = if lim.is_finite() {
        0.5 * lim
    } else {
        // ψ′ ≈ μ + (half-width) − 1/θ for large θ; start at the slope-1/3 guess.
        let h = half_width(dist);
        (3.0 * za / (h * h)).min(1.0 / (h - za).max(f64::MIN_POSITIVE)).max(1e-300)
    };
    let theta = match bracket_root(f, anchor, 0.0, hi, true)? {
        Bracketed::Exact(t) => t,
        Bracketed::Interval(br) => solve_monotone(f, Some(&df), br, 0.0)?,
    };
    Ok(sgn * theta)
}

fn half_width(dist: &ReferenceDistribution) -> f64 {
    match *dist.family() {
        Family::DiscreteUniform { a, b } => (b - a) as f64 / 2.0,
        Family::ContinuousUniform { a, b } => 0.5 * (b - a),
        _ => f64::INFINITY,
    }
}

/// Rate function value `ψ_P*(y)`, `+∞` outside its domain.
pub fn cramer_value(dist: &ReferenceDistribution, y: &[f64]) -> Result<f64> {
    let region = cramer_domain_classify(dist, y)?;
    if region == Region::Outside {
        return Ok(f64::INFINITY);
    }
    Ok(match dist.family() {
        Family::Normal { mean, .. } => {
            let z: Vec<f64> = y.iter().zip(mean).map(|(a, b)| a - b).collect();
            0.5 * dist.scale().unwrap().quad_inv(&z)
        }
        Family::NormalInverseGaussian { mu, beta, alpha, delta, .. } => {
            let z: Vec<f64> = y.iter().zip(mu).map(|(a, b)| a - b).collect();
            let q = dist.scale().unwrap().quad_inv(&z);
            let r = (delta * delta + q).sqrt();
            // α·r − δγ − βᵀz, arranged to cancel at the mean where z = δΣβ/γ.
            alpha * r - dot(beta, &z) - delta * dist.nig_gamma()
        }
        Family::Gamma { alpha, beta } => {
            let r = beta * y[0] / alpha;
            alpha * ((r - 1.0) - (r - 1.0).ln_1p())
        }
        Family::Laplace { mu, b } => {
            let rho = (y[0] - mu) / b;
            let s = rho.hypot(1.0);
            rho * rho / (s + 1.0) - ((s - 1.0) / 2.0).ln_1p()
        }
        Family::Poisson { lambda } => {
            let r = y[0] / lambda;
            if r == 0.0 {
                *lambda
            } else {
                lambda * (r * r.ln() - (r - 1.0))
            }
        }
        Family::Multinomial { n, p } => {
            let n = *n as f64;
            let p0 = 1.0 - p.iter().sum::<f64>();
            let rest = n - y.iter().sum::<f64>();
            let mut v: f64 = y.iter().zip(p).map(|(&yi, &pi)| xlogx(yi, n * pi)).sum();
            v += xlogx(rest.max(0.0), n * p0);
            v.max(0.0)
        }
        Family::NegativeMultinomial { p, x0 } => {
            let p0 = 1.0 - p.iter().sum::<f64>();
            let ybar = x0 + y.iter().sum::<f64>();
            let mut v: f64 = y
                .iter()
                .zip(p)
                .filter(|(_, &pi)| pi > 0.0)
                .map(|(&yi, &pi)| xlogx(yi, pi * ybar))
                .sum();
            v += x0 * (x0 / (p0 * ybar)).ln();
            v.max(0.0)
        }
        Family::DiscreteUniform { a, b } => {
            if a == b {
                0.0
            } else if region == Region::Boundary {
                ((b - a + 1) as f64).ln()
            } else {
                implicit_value(dist, y[0])?
            }
        }
        Family::ContinuousUniform { .. } | Family::Logistic { .. } => implicit_value(dist, y[0])?,
    })
}

fn implicit_value(dist: &ReferenceDistribution, y: f64) -> Result<f64> {
    let z = y - centre(dist);
    let t = implicit_theta(dist, z)?;
    Ok((z * t - centred_psi(dist, t)).max(0.0))
}

fn xlogx(a: f64, c: f64) -> f64 {
    crate::special::xlogx_over(a, c)
}

/// Gradient `∇ψ_P*(y)`, the natural parameter `θ` with `∇ψ_P(θ) = y`.
/// Requires `y` in the interior of the domain.
pub fn cramer_grad(dist: &ReferenceDistribution, y: &[f64]) -> Result<Vec<f64>> {
    if cramer_domain_classify(dist, y)? != Region::Interior {
        return Err(Error::Domain(format!(
            "cramer_grad: y is not in the interior of dom ψ* for {}",
            dist.name()
        )));
    }
    Ok(match dist.family() {
        Family::Normal { mean, .. } => {
            let z: Vec<f64> = y.iter().zip(mean).map(|(a, b)| a - b).collect();
            dist.scale().unwrap().mul_inv(&z)
        }
        Family::NormalInverseGaussian { mu, beta, alpha, delta, .. } => {
            let sc = dist.scale().unwrap();
            let z: Vec<f64> = y.iter().zip(mu).map(|(a, b)| a - b).collect();
            let r = (delta * delta + sc.quad_inv(&z)).sqrt();
            sc.mul_inv(&z).iter().zip(beta).map(|(w, b)| alpha * w / r - b).collect()
        }
        Family::Gamma { alpha, beta } => vec![beta - alpha / y[0]],
        Family::Laplace { mu, b } => {
            let rho = (y[0] - mu) / b;
            let s = rho.hypot(1.0);
            vec![rho / (b * (s + 1.0))]
        }
        Family::Poisson { lambda } => vec![(y[0] / lambda).ln()],
        Family::Multinomial { n, p } => {
            let n = *n as f64;
            let p0 = 1.0 - p.iter().sum::<f64>();
            let last = ((n - y.iter().sum::<f64>()) / (n * p0)).ln();
            y.iter().zip(p).map(|(&yi, &pi)| (yi / (n * pi)).ln() - last).collect()
        }
        Family::NegativeMultinomial { p, x0 } => {
            let ybar = x0 + y.iter().sum::<f64>();
            y.iter().zip(p).map(|(&yi, &pi)| (yi / (pi * ybar)).ln()).collect()
        }
        Family::DiscreteUniform { .. } | Family::ContinuousUniform { .. } | Family::Logistic { .. } => {
            vec![implicit_theta(dist, y[0] - centre(dist))?]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expfam::{log_normalizer, log_normalizer_grad, mean};

    fn d(v: Result<ReferenceDistribution>) -> ReferenceDistribution {
        v.unwrap()
    }

    #[test]
    fn closed_form_examples() {
        let n = d(ReferenceDistribution::normal_1d(0.0, 1.0));
        assert_eq!(cramer_value(&n, &[2.0]).unwrap(), 2.0);
        let p = d(ReferenceDistribution::poisson(3.0));
        assert_eq!(cramer_value(&p, &[3.0]).unwrap(), 0.0);
        let g = d(ReferenceDistribution::gamma(1.0, 1.0));
        assert!((cramer_value(&g, &[2.0]).unwrap() - (1.0 - 2f64.ln())).abs() < 1e-15);
        let b = d(ReferenceDistribution::bernoulli(0.5));
        assert!((cramer_value(&b, &[0.0]).unwrap() - 2f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn poisson_gradient() {
        let p = d(ReferenceDistribution::poisson(1.0));
        let e = std::f64::consts::E;
        assert!((cramer_grad(&p, &[e]).unwrap()[0] - 1.0).abs() < 1e-15);
        assert_eq!(cramer_value(&p, &[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn domain_examples() {
        let g = d(ReferenceDistribution::gamma(1.0, 1.0));
        assert_eq!(cramer_domain_classify(&g, &[0.0]).unwrap(), Region::Outside);
        assert_eq!(cramer_value(&g, &[0.0]).unwrap(), f64::INFINITY);
        let m = d(ReferenceDistribution::multinomial(5, vec![0.3, 0.3]));
        assert_eq!(cramer_domain_classify(&m, &[5.0, 0.0]).unwrap(), Region::Boundary);
        let u = d(ReferenceDistribution::discrete_uniform(0, 4));
        assert_eq!(cramer_domain_classify(&u, &[4.0]).unwrap(), Region::Boundary);
        assert!((cramer_value(&u, &[4.0]).unwrap() - 5f64.ln()).abs() < 1e-15);
        let c = d(ReferenceDistribution::continuous_uniform(-1.0, 1.0));
        assert_eq!(cramer_value(&c, &[1.0]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn zero_at_mean() {
        let dists = [
            d(ReferenceDistribution::nig(vec![0.5], vec![0.3], 2.0, 1.5, vec![1.2])),
            d(ReferenceDistribution::laplace(1.0, 2.0)),
            d(ReferenceDistribution::logistic(-1.0, 0.7)),
            d(ReferenceDistribution::continuous_uniform(0.0, 3.0)),
            d(ReferenceDistribution::discrete_uniform(-3, 6)),
            d(ReferenceDistribution::negative_multinomial(vec![0.3, 0.2], 2.0)),
            d(ReferenceDistribution::multinomial(3, vec![0.2, 0.5])),
        ];
        for dist in &dists {
            let m = mean(dist);
            assert!(cramer_value(dist, &m).unwrap().abs() < 1e-12, "{}", dist.name());
            for g in cramer_grad(dist, &m).unwrap() {
                assert!(g.abs() < 1e-12, "{}", dist.name());
            }
        }
    }

    #[test]
    fn degenerate_discrete_uniform_is_an_indicator() {
        let u = d(ReferenceDistribution::discrete_uniform(2, 2));
        assert_eq!(cramer_value(&u, &[2.0]).unwrap(), 0.0);
        assert_eq!(cramer_value(&u, &[2.5]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn fenchel_young_and_inverse_gradient() {
        let dists = [
            (d(ReferenceDistribution::laplace(0.5, 1.5)), 0.5),
            (d(ReferenceDistribution::logistic(0.0, 1.0)), 0.9),
            (d(ReferenceDistribution::continuous_uniform(-1.0, 2.0)), 7.0),
            (d(ReferenceDistribution::discrete_uniform(0, 9)), -3.0),
            (d(ReferenceDistribution::gamma(2.0, 3.0)), 2.5),
            (d(ReferenceDistribution::negative_multinomial(vec![0.4], 1.5)), 0.5),
        ];
        for (dist, th) in &dists {
            let y = log_normalizer_grad(dist, &[*th]).unwrap();
            let psi = log_normalizer(dist, &[*th]).unwrap();
            let v = cramer_value(dist, &y).unwrap();
            assert!((psi + v - y[0] * th).abs() < 1e-8 * (1.0 + v.abs()), "{}", dist.name());
            let g = cramer_grad(dist, &y).unwrap()[0];
            assert!((g - th).abs() < 1e-7 * (1.0 + th.abs()), "{} {g} vs {th}", dist.name());
        }
    }

    #[test]
    fn logistic_root_has_the_sign_of_the_offset() {
        let l = d(ReferenceDistribution::logistic(2.0, 1.0));
        assert!(cramer_grad(&l, &[1.0]).unwrap()[0] < 0.0);
        assert!(cramer_grad(&l, &[3.0]).unwrap()[0] > 0.0);
    }

    #[test]
    fn far_tails_resolve() {
        let l = d(ReferenceDistribution::logistic(0.0, 1.0));
        let v = cramer_value(&l, &[1e6]).unwrap();
        assert!(v.is_finite() && v > 0.0);
        let u = d(ReferenceDistribution::continuous_uniform(0.0, 1.0));
        let t = cramer_grad(&u, &[1.0 - 1e-9]).unwrap()[0];
        assert!((t - 1e9).abs() / 1e9 < 1e-6);
    }
}

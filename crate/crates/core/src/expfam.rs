//! Reference distributions and their cumulant generating functions.
//!
//! For every supported distribution `P` this module evaluates the
//! log-normalizer `ψ_P(θ) = log E_P[exp⟨θ, Y⟩]` (as `+∞` outside the natural
//! parameter space), its gradient (the mean of the exponentially tilted
//! distribution), the mean `E_P`, and a classification of `θ` relative to
//! the natural parameter space `Θ_P`.
//!
//! Only the Normal and normal-inverse Gaussian families are genuinely
//! multivariate. Multinomial and negative multinomial are stored in minimal
//! form and are jointly coupled; everything else is univariate and is lifted
//! to vectors coordinate-wise by the callers (see [`crate::models::Prior`]).

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, reject_nan, Error, Result};
use crate::special::{
    csc_sq_minus_inv_sq, inv_sq_minus_csch_sq, ln_sinhc, ln_x_csc, one_m_x_cot, x_coth_m1,
};

/// Position of a point relative to a convex set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Region {
    Interior,
    Boundary,
    Outside,
}

/// Parameters of a reference distribution, as supplied by the user.
///
/// Matrices are dense, row-major, `d × d`.
#[derive(Debug, Clone, PartialEq)]
pub enum Family {
    Normal {
        mean: Vec<f64>,
        cov: Vec<f64>,
    },
    NormalInverseGaussian {
        mu: Vec<f64>,
        beta: Vec<f64>,
        alpha: f64,
        delta: f64,
        cov: Vec<f64>,
    },
    Gamma {
        alpha: f64,
        beta: f64,
    },
    Laplace {
        mu: f64,
        b: f64,
    },
    Poisson {
        lambda: f64,
    },
    /// Minimal form: `p` holds the first `d` cell probabilities and the last
    /// cell carries `1 − Σpᵢ > 0`.
    Multinomial {
        n: u32,
        p: Vec<f64>,
    },
    /// `x0` is the (fixed) stopping parameter; `p₀ = 1 − Σpᵢ > 0`.
    NegativeMultinomial {
        p: Vec<f64>,
        x0: f64,
    },
    DiscreteUniform {
        a: i64,
        b: i64,
    },
    ContinuousUniform {
        a: f64,
        b: f64,
    },
    Logistic {
        mu: f64,
        s: f64,
    },
}

/// Cached linear algebra for the Normal / NIG scale matrix.
#[derive(Debug, Clone)]
pub(crate) struct Scale {
    pub sigma: DMatrix<f64>,
    pub sigma_inv: DMatrix<f64>,
    /// Eigenvalues and orthonormal eigenvectors (columns) of Σ.
    pub eigvals: DVector<f64>,
    pub eigvecs: DMatrix<f64>,
    /// `Some(σ)` when Σ = σI.
    pub isotropic: Option<f64>,
    pub diagonal: bool,
}

impl Scale {
    fn new(d: usize, cov: &[f64], who: &str) -> Result<Self> {
        if cov.len() != d * d {
            return Err(Error::InvalidParameter(format!(
                "{who}: covariance must be {d}x{d} ({} entries), got {}",
                d * d,
                cov.len()
            )));
        }
        if cov.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("{who}: covariance entries must be finite")));
        }
        let sigma = DMatrix::from_row_slice(d, d, cov);
        let norm = sigma.amax().max(f64::MIN_POSITIVE);
        for i in 0..d {
            for j in 0..i {
                if (sigma[(i, j)] - sigma[(j, i)]).abs() > 1e-12 * norm {
                    return Err(Error::InvalidParameter(format!(
                        "{who}: covariance must be symmetric (Σ[{i},{j}] != Σ[{j},{i}])"
                    )));
                }
            }
        }
        let chol = sigma.clone().cholesky().ok_or_else(|| {
            Error::InvalidParameter(format!("{who}: covariance must be positive definite (Σ ≻ 0)"))
        })?;
        let sigma_inv = chol.inverse();
        let eig = sigma.clone().symmetric_eigen();
        if eig.eigenvalues.iter().any(|&l| l <= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "{who}: covariance must be positive definite (Σ ≻ 0)"
            )));
        }
        let diagonal = (0..d).all(|i| (0..d).all(|j| i == j || sigma[(i, j)] == 0.0));
        let isotropic = if diagonal && (0..d).all(|i| sigma[(i, i)] == sigma[(0, 0)]) {
            Some(sigma[(0, 0)])
        } else {
            None
        };
        Ok(Scale {
            sigma,
            sigma_inv,
            eigvals: eig.eigenvalues,
            eigvecs: eig.eigenvectors,
            isotropic,
            diagonal,
        })
    }

    pub fn quad(&self, v: &[f64]) -> f64 {
        quad_form(&self.sigma, v)
    }

    pub fn quad_inv(&self, v: &[f64]) -> f64 {
        quad_form(&self.sigma_inv, v)
    }

    pub fn mul(&self, v: &[f64]) -> Vec<f64> {
        mat_vec(&self.sigma, v)
    }

    pub fn mul_inv(&self, v: &[f64]) -> Vec<f64> {
        mat_vec(&self.sigma_inv, v)
    }
}

pub(crate) fn mat_vec(m: &DMatrix<f64>, v: &[f64]) -> Vec<f64> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)] * v[j]).sum())
        .collect()
}

fn quad_form(m: &DMatrix<f64>, v: &[f64]) -> f64 {
    let mv = mat_vec(m, v);
    mv.iter().zip(v).map(|(a, b)| a * b).sum()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A validated reference distribution.
#[derive(Debug, Clone)]
pub struct ReferenceDistribution {
    family: Family,
    scale: Option<Scale>,
    /// NIG: γ = √(α² − βᵀΣβ).
    gamma: f64,
}

impl PartialEq for ReferenceDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family
    }
}

fn positive(who: &str, name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{who}: {name} > 0 violated ({name} = {v})")))
    }
}

fn finite(who: &str, name: &str, v: &[f64]) -> Result<()> {
    if v.iter().all(|x| x.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{who}: {name} must be finite")))
    }
}

impl ReferenceDistribution {
    /// Validate the parameters of `family` and build the distribution.
    pub fn new(family: Family) -> Result<Self> {
        let mut scale = None;
        let mut gamma = 0.0;
        match &family {
            Family::Normal { mean, cov } => {
                if mean.is_empty() {
                    return Err(Error::InvalidParameter("Normal: dimension must be >= 1".into()));
                }
                finite("Normal", "mean", mean)?;
                scale = Some(Scale::new(mean.len(), cov, "Normal")?);
            }
            Family::NormalInverseGaussian { mu, beta, alpha, delta, cov } => {
                let who = "NormalInverseGaussian";
                if mu.is_empty() {
                    return Err(Error::InvalidParameter(format!("{who}: dimension must be >= 1")));
                }
                check_len(mu.len(), beta.len()).map_err(|_| {
                    Error::InvalidParameter(format!("{who}: mu and beta must have equal length"))
                })?;
                finite(who, "mu", mu)?;
                finite(who, "beta", beta)?;
                positive(who, "delta", *delta)?;
                if !alpha.is_finite() {
                    return Err(Error::InvalidParameter(format!("{who}: alpha must be finite")));
                }
                let s = Scale::new(mu.len(), cov, who)?;
                let bsb = s.quad(beta);
                if !(*alpha > bsb.sqrt()) {
                    return Err(Error::InvalidParameter(format!(
                        "{who}: alpha > sqrt(betaᵀΣbeta) violated (alpha = {alpha}, sqrt(betaᵀΣbeta) = {})",
                        bsb.sqrt()
                    )));
                }
                gamma = (alpha * alpha - bsb).sqrt();
                scale = Some(s);
            }
            Family::Gamma { alpha, beta } => {
                positive("Gamma", "alpha", *alpha)?;
                positive("Gamma", "beta", *beta)?;
            }
            Family::Laplace { mu, b } => {
                finite("Laplace", "mu", &[*mu])?;
                positive("Laplace", "b", *b)?;
            }
            Family::Poisson { lambda } => positive("Poisson", "lambda", *lambda)?,
            Family::Multinomial { n, p } => {
                if *n == 0 {
                    return Err(Error::InvalidParameter("Multinomial: n >= 1 violated (n = 0)".into()));
                }
                if p.is_empty() {
                    return Err(Error::InvalidParameter("Multinomial: dimension must be >= 1".into()));
                }
                if p.iter().any(|&q| !(q > 0.0 && q < 1.0)) {
                    return Err(Error::InvalidParameter(
                        "Multinomial: p_i in (0,1) violated (p must lie in the open sub-simplex)".into(),
                    ));
                }
                let s: f64 = p.iter().sum();
                if !(s < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "Multinomial: sum(p) < 1 violated (sum = {s})"
                    )));
                }
            }
            Family::NegativeMultinomial { p, x0 } => {
                if p.is_empty() {
                    return Err(Error::InvalidParameter(
                        "NegativeMultinomial: dimension must be >= 1".into(),
                    ));
                }
                if p.iter().any(|&q| !(q >= 0.0 && q < 1.0)) {
                    return Err(Error::InvalidParameter(
                        "NegativeMultinomial: p_i in [0,1) violated".into(),
                    ));
                }
                let s: f64 = p.iter().sum();
                if !(s < 1.0) {
                    return Err(Error::InvalidParameter(format!(
                        "NegativeMultinomial: p0 = 1 - sum(p) > 0 violated (sum = {s})"
                    )));
                }
                positive("NegativeMultinomial", "x0", *x0)?;
            }
            Family::DiscreteUniform { a, b } => {
                if a > b {
                    return Err(Error::InvalidParameter(format!(
                        "DiscreteUniform: a <= b violated (a = {a}, b = {b})"
                    )));
                }
            }
            Family::ContinuousUniform { a, b } => {
                finite("ContinuousUniform", "a, b", &[*a, *b])?;
                if !(a < b) {
                    return Err(Error::InvalidParameter(format!(
                        "ContinuousUniform: a < b violated (a = {a}, b = {b})"
                    )));
                }
            }
            Family::Logistic { mu, s } => {
                finite("Logistic", "mu", &[*mu])?;
                positive("Logistic", "s", *s)?;
            }
        }
        Ok(ReferenceDistribution { family, scale, gamma })
    }

    pub fn normal(mean: Vec<f64>, cov: Vec<f64>) -> Result<Self> {
        Self::new(Family::Normal { mean, cov })
    }

    /// Univariate normal with variance `var`.
    pub fn normal_1d(mean: f64, var: f64) -> Result<Self> {
        Self::new(Family::Normal { mean: vec![mean], cov: vec![var] })
    }

    pub fn nig(mu: Vec<f64>, beta: Vec<f64>, alpha: f64, delta: f64, cov: Vec<f64>) -> Result<Self> {
        Self::new(Family::NormalInverseGaussian { mu, beta, alpha, delta, cov })
    }

    pub fn gamma(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Family::Gamma { alpha, beta })
    }

    pub fn laplace(mu: f64, b: f64) -> Result<Self> {
        Self::new(Family::Laplace { mu, b })
    }

    pub fn poisson(lambda: f64) -> Result<Self> {
        Self::new(Family::Poisson { lambda })
    }

    pub fn multinomial(n: u32, p: Vec<f64>) -> Result<Self> {
        Self::new(Family::Multinomial { n, p })
    }

    /// Bernoulli(p) is the one-trial, one-cell multinomial.
    pub fn bernoulli(p: f64) -> Result<Self> {
        Self::new(Family::Multinomial { n: 1, p: vec![p] })
    }

    pub fn negative_multinomial(p: Vec<f64>, x0: f64) -> Result<Self> {
        Self::new(Family::NegativeMultinomial { p, x0 })
    }

    pub fn discrete_uniform(a: i64, b: i64) -> Result<Self> {
        Self::new(Family::DiscreteUniform { a, b })
    }

    pub fn continuous_uniform(a: f64, b: f64) -> Result<Self> {
        Self::new(Family::ContinuousUniform { a, b })
    }

    pub fn logistic(mu: f64, s: f64) -> Result<Self> {
        Self::new(Family::Logistic { mu, s })
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Short lowercase family name.
    pub fn name(&self) -> &'static str {
        match self.family {
            Family::Normal { .. } => "normal",
            Family::NormalInverseGaussian { .. } => "nig",
            Family::Gamma { .. } => "gamma",
            Family::Laplace { .. } => "laplace",
            Family::Poisson { .. } => "poisson",
            Family::Multinomial { n: 1, ref p } if p.len() == 1 => "bernoulli",
            Family::Multinomial { .. } => "multinomial",
            Family::NegativeMultinomial { .. } => "negative_multinomial",
            Family::DiscreteUniform { .. } => "discrete_uniform",
            Family::ContinuousUniform { .. } => "continuous_uniform",
            Family::Logistic { .. } => "logistic",
        }
    }

    pub fn dim(&self) -> usize {
        match &self.family {
            Family::Normal { mean, .. } => mean.len(),
            Family::NormalInverseGaussian { mu, .. } => mu.len(),
            Family::Multinomial { p, .. } | Family::NegativeMultinomial { p, .. } => p.len(),
            _ => 1,
        }
    }

    pub fn is_univariate(&self) -> bool {
        self.dim() == 1
    }

    pub(crate) fn scale(&self) -> Option<&Scale> {
        self.scale.as_ref()
    }

    /// NIG γ = √(α² − βᵀΣβ); 0 for other families.
    pub(crate) fn nig_gamma(&self) -> f64 {
        self.gamma
    }

    /// Midpoint parameters shared by the symmetric families: (μ, half-width-like scale).
    fn centre(&self) -> f64 {
        match self.family {
            Family::DiscreteUniform { a, b } => (a as f64 + b as f64) / 2.0,
            Family::ContinuousUniform { a, b } => 0.5 * (a + b),
            Family::Laplace { mu, .. } | Family::Logistic { mu, .. } => mu,
            _ => 0.0,
        }
    }

    /// Open interval `int Θ_P` for univariate families.
    pub(crate) fn natural_interval(&self) -> (f64, f64) {
        let inf = f64::INFINITY;
        match &self.family {
            Family::Gamma { beta, .. } => (-inf, *beta),
            Family::Laplace { b, .. } => (-1.0 / b, 1.0 / b),
            Family::Logistic { s, .. } => (-1.0 / s, 1.0 / s),
            Family::NegativeMultinomial { p, .. } if p.len() == 1 && p[0] > 0.0 => (-inf, -p[0].ln()),
            Family::NormalInverseGaussian { beta, alpha, .. } if beta.len() == 1 => {
                let s = self.scale.as_ref().map(|s| s.sigma[(0, 0)]).unwrap_or(1.0);
                let r = alpha / s.sqrt();
                (-r - beta[0], r - beta[0])
            }
            _ => (-inf, inf),
        }
    }

    /// Closed convex hull of the support, `cl conv Ω_P`, for univariate families.
    ///
    /// Returned as interval endpoints (possibly infinite).
    pub fn support_hull(&self) -> Result<(f64, f64)> {
        let inf = f64::INFINITY;
        if !self.is_univariate() {
            return Err(Error::Unsupported(format!(
                "support_hull is univariate only ({} has dimension {})",
                self.name(),
                self.dim()
            )));
        }
        Ok(match &self.family {
            Family::Gamma { .. } | Family::Poisson { .. } => (0.0, inf),
            Family::NegativeMultinomial { p, .. } => {
                if p[0] > 0.0 {
                    (0.0, inf)
                } else {
                    (0.0, 0.0)
                }
            }
            Family::Multinomial { n, .. } => (0.0, *n as f64),
            Family::DiscreteUniform { a, b } => (*a as f64, *b as f64),
            Family::ContinuousUniform { a, b } => (*a, *b),
            _ => (-inf, inf),
        })
    }

    /// ψ for univariate families; +∞ outside Θ.
    pub(crate) fn psi_1d(&self, t: f64) -> f64 {
        let inf = f64::INFINITY;
        match &self.family {
            Family::Normal { mean, .. } => {
                let var = self.scale.as_ref().unwrap().sigma[(0, 0)];
                mean[0] * t + 0.5 * var * t * t
            }
            Family::NormalInverseGaussian { mu, beta, alpha, delta, .. } => {
                let s = self.scale.as_ref().unwrap().sigma[(0, 0)];
                let q = s * (beta[0] + t) * (beta[0] + t);
                if q > alpha * alpha {
                    inf
                } else {
                    mu[0] * t + delta * (self.gamma - (alpha * alpha - q).sqrt())
                }
            }
            Family::Gamma { alpha, beta } => {
                if t < *beta {
                    -alpha * (-t / beta).ln_1p()
                } else {
                    inf
                }
            }
            Family::Laplace { mu, b } => {
                let bt = b * t;
                if bt.abs() < 1.0 {
                    mu * t - (-bt * bt).ln_1p()
                } else {
                    inf
                }
            }
            Family::Poisson { lambda } => lambda * t.exp_m1(),
            Family::Multinomial { n, p } => {
                let n = *n as f64;
                let p = p[0];
                if t <= 30.0 {
                    n * (p * t.exp_m1()).ln_1p()
                } else {
                    n * (t + (p + (1.0 - p) * (-t).exp()).ln())
                }
            }
            Family::NegativeMultinomial { p, x0 } => {
                let p = p[0];
                let pe = p * t.exp();
                if pe < 1.0 {
                    -x0 * (-(p * t.exp_m1()) / (1.0 - p)).ln_1p()
                } else {
                    inf
                }
            }
            Family::DiscreteUniform { a, b } => {
                let n = (b - a + 1) as f64;
                self.centre() * t + ln_sinhc(0.5 * n * t) - ln_sinhc(0.5 * t)
            }
            Family::ContinuousUniform { a, b } => self.centre() * t + ln_sinhc(0.5 * (b - a) * t),
            Family::Logistic { mu, s } => {
                let x = std::f64::consts::PI * s * t;
                if (s * t).abs() < 1.0 {
                    mu * t + ln_x_csc(x)
                } else {
                    inf
                }
            }
        }
    }

    /// ψ′ for univariate families; caller guarantees θ ∈ int Θ.
    pub(crate) fn dpsi_1d(&self, t: f64) -> f64 {
        match &self.family {
            Family::Normal { mean, .. } => mean[0] + self.scale.as_ref().unwrap().sigma[(0, 0)] * t,
            Family::NormalInverseGaussian { mu, beta, alpha, delta, .. } => {
                let s = self.scale.as_ref().unwrap().sigma[(0, 0)];
                let bt = beta[0] + t;
                mu[0] + delta * s * bt / (alpha * alpha - s * bt * bt).sqrt()
            }
            Family::Gamma { alpha, beta } => alpha / (beta - t),
            Family::Laplace { mu, b } => {
                let b2 = b * b;
                mu + 2.0 * b2 * t / (1.0 - b2 * t * t)
            }
            Family::Poisson { lambda } => lambda * t.exp(),
            Family::Multinomial { n, p } => {
                let p = p[0];
                (*n as f64) / (1.0 + (1.0 - p) / p * (-t).exp())
            }
            Family::NegativeMultinomial { p, x0 } => {
                let pe = p[0] * t.exp();
                x0 * pe / (1.0 - pe)
            }
            Family::DiscreteUniform { a, b } => {
                // μ + (n/2)coth(nθ/2) − (1/2)coth(θ/2), written through x·coth(x) − 1.
                let n = (b - a + 1) as f64;
                if t == 0.0 {
                    return self.centre();
                }
                self.centre() + (x_coth_m1(0.5 * n * t) - x_coth_m1(0.5 * t)) / t
            }
            Family::ContinuousUniform { a, b } => {
                let g = 0.5 * (b - a);
                if t == 0.0 {
                    return self.centre();
                }
                self.centre() + x_coth_m1(g * t) / t
            }
            Family::Logistic { mu, s } => {
                if t == 0.0 {
                    return *mu;
                }
                let x = std::f64::consts::PI * s * t;
                mu + one_m_x_cot(x) / t
            }
        }
    }

    /// ψ″ for univariate families (Newton slopes for the implicit equations).
    pub(crate) fn d2psi_1d(&self, t: f64) -> f64 {
        match &self.family {
            Family::Normal { .. } => self.scale.as_ref().unwrap().sigma[(0, 0)],
            Family::NormalInverseGaussian { beta, alpha, delta, .. } => {
                let s = self.scale.as_ref().unwrap().sigma[(0, 0)];
                let bt = beta[0] + t;
                let r = alpha * alpha - s * bt * bt;
                delta * s * alpha * alpha / (r * r.sqrt())
            }
            Family::Gamma { alpha, beta } => alpha / ((beta - t) * (beta - t)),
            Family::Laplace { b, .. } => {
                let b2 = b * b;
                let u = 1.0 - b2 * t * t;
                2.0 * b2 * (1.0 + b2 * t * t) / (u * u)
            }
            Family::Poisson { lambda } => lambda * t.exp(),
            Family::Multinomial { n, p } => {
                let p = p[0];
                let q = 1.0 / (1.0 + (1.0 - p) / p * (-t).exp());
                (*n as f64) * q * (1.0 - q)
            }
            Family::NegativeMultinomial { p, x0 } => {
                let pe = p[0] * t.exp();
                x0 * pe / ((1.0 - pe) * (1.0 - pe))
            }
            Family::DiscreteUniform { a, b } => {
                let n = (b - a + 1) as f64;
                let hn = 0.5 * n;
                hn * hn * inv_sq_minus_csch_sq(hn * t) - 0.25 * inv_sq_minus_csch_sq(0.5 * t)
            }
            Family::ContinuousUniform { a, b } => {
                let g = 0.5 * (b - a);
                g * g * inv_sq_minus_csch_sq(g * t)
            }
            Family::Logistic { s, .. } => {
                let k = std::f64::consts::PI * s;
                k * k * csc_sq_minus_inv_sq(k * t)
            }
        }
    }
}

/// Log-normalizer `ψ_P(θ)`, `+∞` outside the natural parameter space.
pub fn log_normalizer(dist: &ReferenceDistribution, theta: &[f64]) -> Result<f64> {
    check_len(dist.dim(), theta.len())?;
    reject_nan(theta)?;
    let inf = f64::INFINITY;
    Ok(match dist.family() {
        Family::Normal { mean, .. } => dot(mean, theta) + 0.5 * dist.scale().unwrap().quad(theta),
        Family::NormalInverseGaussian { mu, beta, alpha, delta, .. } => {
            let bt: Vec<f64> = beta.iter().zip(theta).map(|(b, t)| b + t).collect();
            let q = dist.scale().unwrap().quad(&bt);
            if q > alpha * alpha {
                inf
            } else {
                dot(mu, theta) + delta * (dist.nig_gamma() - (alpha * alpha - q).sqrt())
            }
        }
        Family::Multinomial { n, p } => {
            let n = *n as f64;
            let m = theta.iter().cloned().fold(0.0, f64::max);
            if m <= 30.0 {
                let s: f64 = p.iter().zip(theta).map(|(p, t)| p * t.exp_m1()).sum();
                n * s.ln_1p()
            } else {
                let p0 = 1.0 - p.iter().sum::<f64>();
                let s: f64 = p0 * (-m).exp()
                    + p.iter().zip(theta).map(|(p, t)| p * (t - m).exp()).sum::<f64>();
                n * (m + s.ln())
            }
        }
        Family::NegativeMultinomial { p, x0 } => {
            let pe: f64 = p.iter().zip(theta).map(|(p, t)| p * t.exp()).sum();
            if pe >= 1.0 {
                inf
            } else {
                let p0 = 1.0 - p.iter().sum::<f64>();
                let s: f64 = p.iter().zip(theta).map(|(p, t)| p * t.exp_m1()).sum();
                -x0 * (-s / p0).ln_1p()
            }
        }
        _ => dist.psi_1d(theta[0]),
    })
}

/// Gradient `∇ψ_P(θ)`, the mean of the tilted distribution. Requires
/// `θ ∈ int Θ_P`.
pub fn log_normalizer_grad(dist: &ReferenceDistribution, theta: &[f64]) -> Result<Vec<f64>> {
    check_len(dist.dim(), theta.len())?;
    reject_nan(theta)?;
    if natural_domain_contains(dist, theta)? != Region::Interior {
        return Err(Error::Domain(format!(
            "log_normalizer_grad: theta not in the interior of the natural parameter space of {}",
            dist.name()
        )));
    }
    Ok(match dist.family() {
        Family::Normal { mean, .. } => {
            let st = dist.scale().unwrap().mul(theta);
            mean.iter().zip(st).map(|(m, s)| m + s).collect()
        }
        Family::NormalInverseGaussian { mu, beta, alpha, delta, .. } => {
            let sc = dist.scale().unwrap();
            let bt: Vec<f64> = beta.iter().zip(theta).map(|(b, t)| b + t).collect();
            let r = (alpha * alpha - sc.quad(&bt)).sqrt();
            let sbt = sc.mul(&bt);
            mu.iter().zip(sbt).map(|(m, s)| m + delta * s / r).collect()
        }
        Family::Multinomial { n, p } => {
            let n = *n as f64;
            let m = theta.iter().cloned().fold(0.0, f64::max);
            let p0 = 1.0 - p.iter().sum::<f64>();
            let w: Vec<f64> = p.iter().zip(theta).map(|(p, t)| p * (t - m).exp()).collect();
            let z = p0 * (-m).exp() + w.iter().sum::<f64>();
            w.iter().map(|wi| n * wi / z).collect()
        }
        Family::NegativeMultinomial { p, x0 } => {
            let p0 = 1.0 - p.iter().sum::<f64>();
            let s: f64 = p.iter().zip(theta).map(|(p, t)| p * t.exp_m1()).sum();
            let denom = p0 - s;
            p.iter().zip(theta).map(|(p, t)| x0 * p * t.exp() / denom).collect()
        }
        _ => vec![dist.dpsi_1d(theta[0])],
    })
}

/// Mean `E_P`.
pub fn mean(dist: &ReferenceDistribution) -> Vec<f64> {
    match dist.family() {
        Family::Normal { mean, .. } => mean.clone(),
        Family::NormalInverseGaussian { mu, beta, delta, .. } => {
            let sb = dist.scale().unwrap().mul(beta);
            let g = dist.nig_gamma();
            mu.iter().zip(sb).map(|(m, s)| m + delta * s / g).collect()
        }
        Family::Gamma { alpha, beta } => vec![alpha / beta],
        Family::Laplace { mu, .. } | Family::Logistic { mu, .. } => vec![*mu],
        Family::Poisson { lambda } => vec![*lambda],
        Family::Multinomial { n, p } => p.iter().map(|q| *n as f64 * q).collect(),
        Family::NegativeMultinomial { p, x0 } => {
            let p0 = 1.0 - p.iter().sum::<f64>();
            p.iter().map(|q| x0 * q / p0).collect()
        }
        Family::DiscreteUniform { .. } | Family::ContinuousUniform { .. } => vec![dist.centre()],
    }
}

/// Classify `θ` against `Θ_P`: interior, topological boundary of the
/// interior, or outside its closure.
pub fn natural_domain_contains(dist: &ReferenceDistribution, theta: &[f64]) -> Result<Region> {
    check_len(dist.dim(), theta.len())?;
    reject_nan(theta)?;
    let by_margin = |m: f64| {
        if m > 0.0 {
            Region::Interior
        } else if m == 0.0 {
            Region::Boundary
        } else {
            Region::Outside
        }
    };
    Ok(match dist.family() {
        Family::NormalInverseGaussian { beta, alpha, .. } => {
            let bt: Vec<f64> = beta.iter().zip(theta).map(|(b, t)| b + t).collect();
            by_margin(alpha * alpha - dist.scale().unwrap().quad(&bt))
        }
        Family::NegativeMultinomial { p, .. } => {
            let pe: f64 = p.iter().zip(theta).map(|(p, t)| p * t.exp()).sum();
            by_margin(1.0 - pe)
        }
        Family::Normal { .. } | Family::Multinomial { .. } => Region::Interior,
        _ => {
            let (lo, hi) = dist.natural_interval();
            let t = theta[0];
            by_margin((t - lo).min(hi - t))
        }
    })
}

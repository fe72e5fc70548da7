//! Separable Legendre kernels `h(x) = Σⱼ hⱼ(xⱼ)` and their Bregman distances.

use crate::error::{check_len, reject_nan, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KernelKind {
    /// `½‖x‖²`
    Energy,
    /// `Σ xⱼ log xⱼ`
    BoltzmannShannon,
    /// `−Σ log xⱼ`
    Burg,
}

impl KernelKind {
    pub fn name(self) -> &'static str {
        match self {
            KernelKind::Energy => "energy",
            KernelKind::BoltzmannShannon => "entropy",
            KernelKind::Burg => "burg",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "energy" => Some(KernelKind::Energy),
            "entropy" | "boltzmann_shannon" => Some(KernelKind::BoltzmannShannon),
            "burg" => Some(KernelKind::Burg),
            _ => None,
        }
    }

    /// Scalar `hⱼ`, `+∞` off the domain.
    pub(crate) fn h1(self, x: f64) -> f64 {
        match self {
            KernelKind::Energy => 0.5 * x * x,
            KernelKind::BoltzmannShannon => {
                if x > 0.0 {
                    x * x.ln()
                } else if x == 0.0 {
                    0.0
                } else {
                    f64::INFINITY
                }
            }
            KernelKind::Burg => {
                if x > 0.0 {
                    -x.ln()
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    pub(crate) fn interior(self, x: f64) -> bool {
        match self {
            KernelKind::Energy => x.is_finite(),
            _ => x > 0.0 && x.is_finite(),
        }
    }

    /// Scalar `hⱼ′`; caller guarantees an interior point.
    pub(crate) fn dh1(self, x: f64) -> f64 {
        match self {
            KernelKind::Energy => x,
            KernelKind::BoltzmannShannon => x.ln() + 1.0,
            KernelKind::Burg => -1.0 / x,
        }
    }

    /// Scalar `hⱼ″`.
    pub(crate) fn d2h1(self, x: f64) -> f64 {
        match self {
            KernelKind::Energy => 1.0,
            KernelKind::BoltzmannShannon => 1.0 / x,
            KernelKind::Burg => 1.0 / (x * x),
        }
    }

    /// Scalar `(hⱼ*)′ = (hⱼ′)⁻¹`; Burg needs `z < 0`.
    pub(crate) fn dh1_conj(self, z: f64) -> f64 {
        match self {
            KernelKind::Energy => z,
            KernelKind::BoltzmannShannon => (z - 1.0).exp(),
            KernelKind::Burg => -1.0 / z,
        }
    }

    pub(crate) fn conj_interior(self, z: f64) -> bool {
        match self {
            KernelKind::Burg => z < 0.0,
            _ => z.is_finite(),
        }
    }

    /// Scalar `Dₕ(y, x)` for interior `x`, written to avoid cancellation.
    pub(crate) fn bregman1(self, y: f64, x: f64) -> f64 {
        match self {
            KernelKind::Energy => 0.5 * (y - x) * (y - x),
            KernelKind::BoltzmannShannon => {
                if y < 0.0 {
                    f64::INFINITY
                } else if y == 0.0 {
                    x
                } else {
                    // y log(y/x) − y + x
                    let r = y / x;
                    x * (r * r.ln() - (r - 1.0))
                }
            }
            KernelKind::Burg => {
                if y <= 0.0 {
                    f64::INFINITY
                } else {
                    // y/x − log(y/x) − 1
                    let r = y / x - 1.0;
                    r - r.ln_1p()
                }
            }
        }
    }
}

fn require_interior(k: KernelKind, x: &[f64], what: &str) -> Result<()> {
    reject_nan(x)?;
    if let Some(i) = x.iter().position(|&v| !k.interior(v)) {
        return Err(Error::Domain(format!(
            "{what}: x[{i}] = {} is not in int dom h for the {} kernel",
            x[i],
            k.name()
        )));
    }
    Ok(())
}

/// `h(x)`, `+∞` off the domain.
pub fn kernel_value(k: KernelKind, x: &[f64]) -> Result<f64> {
    reject_nan(x)?;
    Ok(x.iter().map(|&v| k.h1(v)).sum())
}

/// `∇h(x)` for `x ∈ int dom h`.
pub fn kernel_grad(k: KernelKind, x: &[f64]) -> Result<Vec<f64>> {
    require_interior(k, x, "kernel_grad")?;
    Ok(x.iter().map(|&v| k.dh1(v)).collect())
}

/// `∇h*(z)` for `z ∈ int dom h*`.
pub fn kernel_grad_conj(k: KernelKind, z: &[f64]) -> Result<Vec<f64>> {
    reject_nan(z)?;
    if let Some(i) = z.iter().position(|&v| !k.conj_interior(v)) {
        return Err(Error::Domain(format!(
            "kernel_grad_conj: z[{i}] = {} is not in int dom h* for the {} kernel",
            z[i],
            k.name()
        )));
    }
    Ok(z.iter().map(|&v| k.dh1_conj(v)).collect())
}

/// Bregman distance `Dₕ(y, x)` for `x ∈ int dom h`.
pub fn bregman_distance(k: KernelKind, y: &[f64], x: &[f64]) -> Result<f64> {
    check_len(x.len(), y.len())?;
    reject_nan(y)?;
    require_interior(k, x, "bregman_distance")?;
    Ok(y.iter().zip(x).map(|(&a, &b)| k.bregman1(a, b)).sum())
}

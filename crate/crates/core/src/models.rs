//! Regularized linear models `F(x) = ψ*_{P_ŷ}(Ax) + τ·φ(x)`: the data
//! fidelity families, their smooth-adaptability constants and the
//! regularizer wrappers.

use crate::cramer::{cramer_grad, cramer_value};
use crate::error::{check_len, reject_nan, Error, Result};
use crate::expfam::{Family, ReferenceDistribution};
use crate::kernels::KernelKind;
use crate::linops::{norm_1_columns, op_norm_2, Operator};
use crate::prior::Prior;

/// Relative tolerance of the power iteration behind Normal-fidelity constants.
pub const NORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FidelityKind {
    Normal,
    Poisson,
    /// Gamma with unit rate parameter.
    Gamma,
}

impl FidelityKind {
    pub fn name(self) -> &'static str {
        match self {
            FidelityKind::Normal => "normal",
            FidelityKind::Poisson => "poisson",
            FidelityKind::Gamma => "gamma",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "normal" => Some(FidelityKind::Normal),
            "poisson" => Some(FidelityKind::Poisson),
            "gamma" => Some(FidelityKind::Gamma),
            _ => None,
        }
    }

    /// The kernel relative to which this fidelity is smooth adaptable.
    pub fn paired_kernel(self) -> KernelKind {
        match self {
            FidelityKind::Normal => KernelKind::Energy,
            FidelityKind::Poisson => KernelKind::BoltzmannShannon,
            FidelityKind::Gamma => KernelKind::Burg,
        }
    }
}

/// Data term `ψ*_{P_ŷ}(Ax)`.
#[derive(Debug, Clone)]
pub struct Fidelity {
    kind: FidelityKind,
    a: Operator,
    y: Vec<f64>,
}

impl Fidelity {
    pub fn new(kind: FidelityKind, a: Operator, y: Vec<f64>) -> Result<Self> {
        check_len(a.shape().0, y.len())?;
        reject_nan(&y)?;
        if y.iter().any(|v| v.is_infinite()) {
            return Err(Error::InvalidParameter("fidelity: observation must be finite".into()));
        }
        let who = kind.name();
        match kind {
            FidelityKind::Normal => {}
            FidelityKind::Poisson | FidelityKind::Gamma => {
                if kind == FidelityKind::Poisson && y.iter().any(|&v| v <= 0.0) {
                    return Err(Error::InvalidParameter(format!("{who} fidelity: observation y > 0 violated")));
                }
                if y.iter().any(|&v| v < 0.0) {
                    return Err(Error::InvalidParameter(format!("{who} fidelity: observation y >= 0 violated")));
                }
                if !a.is_nonnegative() {
                    return Err(Error::InvalidParameter(format!("{who} fidelity: operator entries >= 0 violated")));
                }
                let (m, d) = a.shape();
                if a.apply_raw(&vec![1.0; d]).iter().any(|&v| v <= 0.0)
                    || a.adjoint_raw(&vec![1.0; m]).iter().any(|&v| v <= 0.0)
                {
                    return Err(Error::InvalidParameter(format!(
                        "{who} fidelity: operator has a zero row or column"
                    )));
                }
            }
        }
        Ok(Fidelity { kind, a, y })
    }

    pub fn kind(&self) -> FidelityKind {
        self.kind
    }

    pub fn operator(&self) -> &Operator {
        &self.a
    }

    pub fn observation(&self) -> &[f64] {
        &self.y
    }

    pub fn dim(&self) -> usize {
        self.a.shape().1
    }

    /// `x ∈ X`: unrestricted, `x ≥ 0` or `x > 0` by family.
    fn admissible(&self, x: &[f64]) -> bool {
        match self.kind {
            FidelityKind::Normal => true,
            FidelityKind::Poisson => x.iter().all(|&v| v >= 0.0),
            FidelityKind::Gamma => x.iter().all(|&v| v > 0.0),
        }
    }
}

/// Fidelity value, `+∞` outside `X` or where `Ax` leaves the rate function's domain.
pub fn fidelity_value(fid: &Fidelity, x: &[f64]) -> Result<f64> {
    check_len(fid.dim(), x.len())?;
    reject_nan(x)?;
    if !fid.admissible(x) {
        return Ok(f64::INFINITY);
    }
    let z = fid.a.apply_raw(x);
    let mut s = 0.0;
    for (&zi, &yi) in z.iter().zip(&fid.y) {
        s += match fid.kind {
            FidelityKind::Normal => 0.5 * (zi - yi) * (zi - yi),
            FidelityKind::Poisson => {
                if zi < 0.0 {
                    return Ok(f64::INFINITY);
                } else if zi == 0.0 {
                    yi
                } else {
                    let r = zi / yi;
                    yi * (r * r.ln() - (r - 1.0))
                }
            }
            FidelityKind::Gamma => {
                if yi == 0.0 {
                    zi
                } else if zi <= 0.0 {
                    return Ok(f64::INFINITY);
                } else {
                    let r = zi / yi - 1.0;
                    yi * (r - r.ln_1p())
                }
            }
        };
    }
    Ok(s)
}

/// `Aᵀ∇ψ*(Ax)`; needs `Ax` in the interior of the rate function's domain.
pub fn fidelity_grad(fid: &Fidelity, x: &[f64]) -> Result<Vec<f64>> {
    check_len(fid.dim(), x.len())?;
    reject_nan(x)?;
    if !fid.admissible(x) {
        return Err(Error::Domain(format!("{} fidelity: x is outside the admissible set", fid.kind.name())));
    }
    let z = fid.a.apply_raw(x);
    let mut w = Vec::with_capacity(z.len());
    for (i, (&zi, &yi)) in z.iter().zip(&fid.y).enumerate() {
        w.push(match fid.kind {
            FidelityKind::Normal => zi - yi,
            _ if zi <= 0.0 => {
                return Err(Error::Domain(format!(
                    "{} fidelity: (Ax)[{i}] = {zi} is not positive",
                    fid.kind.name()
                )))
            }
            FidelityKind::Poisson => (zi / yi).ln(),
            FidelityKind::Gamma => 1.0 - yi / zi,
        });
    }
    Ok(fid.a.adjoint_raw(&w))
}

/// Constant `L` with `L·h − f` convex for the paired kernel: `‖A‖₂²`
/// (Normal), `‖A‖₁` (Poisson) or `‖ŷ‖₁` (Gamma).
pub fn smoothness_constant(fid: &Fidelity) -> Result<f64> {
    match fid.kind {
        FidelityKind::Normal => {
            let n = op_norm_2(fid.a.as_ref(), NORM_TOL)?;
            Ok(n * n)
        }
        FidelityKind::Poisson => norm_1_columns(fid.a.as_ref()),
        FidelityKind::Gamma => Ok(fid.y.iter().map(|v| v.abs()).sum()),
    }
}

/// Regularizer `τ·φ(x)`.
#[derive(Debug, Clone)]
pub enum Regularizer {
    /// `φ ≡ 0`; the prox step is the identity.
    None,
    /// `φ = ψ_R*`, handled through its Bregman prox.
    Prior { prior: Prior, tau: f64 },
    /// `φ(x) = Σᵢ ψ_R*(Lᵢx)` with `Lᵢ` the consecutive blocks of `L`'s
    /// output, each of the dimension of `block`.
    Composite { block: ReferenceDistribution, op: Operator, tau: f64 },
}

fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("regularizer: tau > 0 violated (tau = {tau})")))
    }
}

impl Regularizer {
    pub fn prior(prior: Prior, tau: f64) -> Result<Self> {
        check_tau(tau)?;
        Ok(Regularizer::Prior { prior, tau })
    }

    pub fn composite(block: ReferenceDistribution, op: Operator, tau: f64) -> Result<Self> {
        check_tau(tau)?;
        let m = op.shape().0;
        if m % block.dim() != 0 {
            return Err(Error::InvalidParameter(format!(
                "composite regularizer: operator output {m} is not a multiple of the block dimension {}",
                block.dim()
            )));
        }
        Ok(Regularizer::Composite { block, op, tau })
    }

    pub fn tau(&self) -> f64 {
        match self {
            Regularizer::None => 0.0,
            Regularizer::Prior { tau, .. } | Regularizer::Composite { tau, .. } => *tau,
        }
    }

    /// Input dimension, when fixed by the regularizer.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Regularizer::None => None,
            Regularizer::Prior { prior, .. } => Some(prior.dim()),
            Regularizer::Composite { op, .. } => Some(op.shape().1),
        }
    }

    /// `τ·φ(x)`, `+∞` off the domain.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        match self {
            Regularizer::None => Ok(0.0),
            Regularizer::Prior { prior, tau } => Ok(tau * prior.value(x)?),
            Regularizer::Composite { block, op, tau } => {
                let z = op.apply(x)?;
                let mut s = 0.0;
                for c in z.chunks(block.dim()) {
                    s += cramer_value(block, c)?;
                }
                Ok(tau * s)
            }
        }
    }

    /// Gradient of a composite regularizer, `τ·Lᵀ[∇ψ_R*(Lᵢx)]ᵢ`.
    pub fn composite_grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        let Regularizer::Composite { block, op, tau } = self else {
            return Err(Error::Unsupported("gradient is only formed for composite regularizers".into()));
        };
        let z = op.apply(x)?;
        let mut w = Vec::with_capacity(z.len());
        for c in z.chunks(block.dim()) {
            w.extend(cramer_grad(block, c)?);
        }
        Ok(op.adjoint_raw(&w).into_iter().map(|v| tau * v).collect())
    }

    /// Lipschitz constant of [`Regularizer::composite_grad`] for the blocks
    /// whose rate function has bounded curvature (Normal, NIG).
    pub fn composite_lipschitz(&self) -> Result<f64> {
        let Regularizer::Composite { block, op, tau } = self else {
            return Err(Error::Unsupported("only composite regularizers have a gradient constant".into()));
        };
        let lmin = block.scale().map(|s| s.eigvals.min());
        let curvature = match (block.family(), lmin) {
            (Family::Normal { .. }, Some(l)) => 1.0 / l,
            (Family::NormalInverseGaussian { alpha, delta, .. }, Some(l)) => alpha / (delta * l),
            _ => {
                return Err(Error::Unsupported(format!(
                    "composite {} regularizer has unbounded curvature; use a primal-dual method",
                    block.name()
                )))
            }
        };
        let n = op_norm_2(op.as_ref(), NORM_TOL)?;
        Ok(tau * curvature * n * n)
    }
}

/// Fidelity, regularizer and Bregman kernel.
#[derive(Debug, Clone)]
pub struct Problem {
    pub fidelity: Fidelity,
    pub regularizer: Regularizer,
    pub kernel: KernelKind,
    /// User-supplied smoothness constant; required when the kernel is not
    /// the fidelity's paired kernel.
    pub l_override: Option<f64>,
}

impl Problem {
    pub fn new(fidelity: Fidelity, regularizer: Regularizer, kernel: KernelKind) -> Result<Self> {
        Problem::with_constant(fidelity, regularizer, kernel, None)
    }

    pub fn with_constant(
        fidelity: Fidelity,
        regularizer: Regularizer,
        kernel: KernelKind,
        l_override: Option<f64>,
    ) -> Result<Self> {
        if let Some(d) = regularizer.dim() {
            check_len(fidelity.dim(), d)?;
        }
        if let Some(l) = l_override {
            if !(l > 0.0 && l.is_finite()) {
                return Err(Error::InvalidParameter(format!("smoothness constant L > 0 violated (L = {l})")));
            }
        } else if kernel != fidelity.kind.paired_kernel() {
            return Err(Error::InvalidParameter(format!(
                "{} fidelity pairs with the {} kernel; the {} kernel needs an explicit smoothness constant",
                fidelity.kind.name(),
                fidelity.kind.paired_kernel().name(),
                kernel.name()
            )));
        }
        if matches!(regularizer, Regularizer::Composite { .. }) && kernel != KernelKind::Energy {
            return Err(Error::Unsupported("composite regularizers are only supported with the energy kernel".into()));
        }
        Ok(Problem { fidelity, regularizer, kernel, l_override })
    }

    pub fn dim(&self) -> usize {
        self.fidelity.dim()
    }

    /// Gradient of the smooth part: the fidelity plus any composite regularizer.
    pub fn smooth_grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut g = fidelity_grad(&self.fidelity, x)?;
        if let Regularizer::Composite { .. } = self.regularizer {
            for (a, b) in g.iter_mut().zip(self.regularizer.composite_grad(x)?) {
                *a += b;
            }
        }
        Ok(g)
    }

    /// Smoothness constant of the smooth part relative to the kernel.
    pub fn smoothness_constant(&self) -> Result<f64> {
        if let Some(l) = self.l_override {
            return Ok(l);
        }
        let mut l = smoothness_constant(&self.fidelity)?;
        if let Regularizer::Composite { .. } = self.regularizer {
            l += self.regularizer.composite_lipschitz()?;
        }
        Ok(l)
    }
}

/// `F(x)`, `+∞` off the domain.
pub fn objective(problem: &Problem, x: &[f64]) -> Result<f64> {
    let f = fidelity_value(&problem.fidelity, x)?;
    if f == f64::INFINITY {
        return Ok(f);
    }
    Ok(f + problem.regularizer.value(x)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linops::{finite_difference_2d, Dense, Identity};
    use std::f64::consts::E;
    use std::sync::Arc;

    fn id(n: usize) -> Operator {
        Arc::new(Identity(n))
    }

    #[test]
    fn fidelity_examples() {
        let n = Fidelity::new(FidelityKind::Normal, id(2), vec![0.0, 0.0]).unwrap();
        assert_eq!(fidelity_value(&n, &[3.0, 4.0]).unwrap(), 12.5);
        let p = Fidelity::new(FidelityKind::Poisson, id(2), vec![2.0, 5.0]).unwrap();
        assert_eq!(fidelity_value(&p, &[2.0, 5.0]).unwrap(), 0.0);
        assert_eq!(fidelity_grad(&p, &[2.0, 5.0]).unwrap(), vec![0.0, 0.0]);
        let g = Fidelity::new(FidelityKind::Gamma, id(2), vec![1.0, 3.0]).unwrap();
        assert_eq!(fidelity_value(&g, &[1.0, 3.0]).unwrap(), 0.0);
        let p1 = Fidelity::new(FidelityKind::Poisson, id(1), vec![1.0]).unwrap();
        assert!((fidelity_value(&p1, &[E]).unwrap() - 1.0).abs() < 1e-15);
        // 0·log 0 convention at the boundary
        assert_eq!(fidelity_value(&p1, &[0.0]).unwrap(), 1.0);
        assert!(fidelity_grad(&p1, &[0.0]).is_err());
        assert_eq!(fidelity_value(&p1, &[-1.0]).unwrap(), f64::INFINITY);
        assert_eq!(fidelity_value(&g, &[0.0, 1.0]).unwrap(), f64::INFINITY);
    }

    #[test]
    fn gamma_matches_rate_function() {
        let g = Fidelity::new(FidelityKind::Gamma, id(1), vec![2.0]).unwrap();
        let r = ReferenceDistribution::gamma(2.0, 1.0).unwrap();
        for x in [0.1, 1.0, 2.0, 7.5] {
            let a = fidelity_value(&g, &[x]).unwrap();
            let b = cramer_value(&r, &[x]).unwrap();
            assert!((a - b).abs() < 1e-14, "{x}");
        }
    }

    #[test]
    fn constants() {
        let n = Fidelity::new(FidelityKind::Normal, id(2), vec![0.0; 2]).unwrap();
        assert!((smoothness_constant(&n).unwrap() - 1.0).abs() < 1e-12);
        let a: Operator = Arc::new(Dense::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap());
        let p = Fidelity::new(FidelityKind::Poisson, a, vec![1.0, 1.0]).unwrap();
        assert_eq!(smoothness_constant(&p).unwrap(), 6.0);
        let g = Fidelity::new(FidelityKind::Gamma, id(3), vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(smoothness_constant(&g).unwrap(), 6.0);
    }

    #[test]
    fn fidelity_validation() {
        assert!(Fidelity::new(FidelityKind::Poisson, id(2), vec![1.0, 0.0]).is_err());
        assert!(Fidelity::new(FidelityKind::Gamma, id(2), vec![1.0, 0.0]).is_ok());
        assert!(Fidelity::new(FidelityKind::Gamma, id(2), vec![1.0, -1.0]).is_err());
        let zero_col: Operator = Arc::new(Dense::from_rows(&[vec![1.0, 0.0], vec![1.0, 0.0]]).unwrap());
        assert!(Fidelity::new(FidelityKind::Poisson, zero_col, vec![1.0, 1.0]).is_err());
        let neg: Operator = Arc::new(Dense::from_rows(&[vec![1.0, -1.0], vec![1.0, 1.0]]).unwrap());
        assert!(Fidelity::new(FidelityKind::Poisson, neg.clone(), vec![1.0, 1.0]).is_err());
        assert!(Fidelity::new(FidelityKind::Normal, neg, vec![1.0]).is_err());
    }

    #[test]
    fn objective_examples() {
        // ψ* vanishes at the prior mean
        let fid = Fidelity::new(FidelityKind::Normal, id(2), vec![1.0, -1.0]).unwrap();
        let x = [0.5, 2.0];
        let r = ReferenceDistribution::normal(x.to_vec(), vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let p = Problem::new(fid.clone(), Regularizer::prior(r.into(), 1.0).unwrap(), KernelKind::Energy).unwrap();
        assert!((objective(&p, &x).unwrap() - fidelity_value(&fid, &x).unwrap()).abs() < 1e-15);

        let fid = Fidelity::new(FidelityKind::Poisson, id(1), vec![1.0]).unwrap();
        let lap = Prior::Joint(ReferenceDistribution::laplace(0.0, 1.0).unwrap());
        let p = Problem::new(fid, Regularizer::prior(lap, 0.3).unwrap(), KernelKind::BoltzmannShannon).unwrap();
        assert_eq!(objective(&p, &[0.0]).unwrap(), 1.0);
    }

    #[test]
    fn barcode_objective_at_truth() {
        let truth = [1.0, 0.0, 0.0, 1.0];
        let fid = Fidelity::new(FidelityKind::Normal, id(4), truth.to_vec()).unwrap();
        let eps = 1e-6;
        let ps = truth.iter().map(|&v| ReferenceDistribution::bernoulli(if v > 0.5 { 1.0 - eps } else { eps }).unwrap());
        let prior = Prior::separable(ps.collect()).unwrap();
        let p = Problem::new(fid, Regularizer::prior(prior, 0.5).unwrap(), KernelKind::Energy).unwrap();
        // each pinned pixel costs −τ log(1−ε)
        let v = objective(&p, &truth).unwrap();
        assert!((v - 4.0 * 0.5 * -(-eps).ln_1p()).abs() < 1e-15);
    }

    #[test]
    fn pairing_and_composites() {
        let fid = Fidelity::new(FidelityKind::Normal, id(4), vec![0.0; 4]).unwrap();
        assert!(Problem::new(fid.clone(), Regularizer::None, KernelKind::Burg).is_err());
        assert!(Problem::with_constant(fid.clone(), Regularizer::None, KernelKind::Burg, Some(2.0)).is_ok());

        let nig = ReferenceDistribution::nig(vec![0.0; 2], vec![0.0; 2], 1.0, 0.5, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let l: Operator = Arc::new(finite_difference_2d(2, 2).unwrap());
        let reg = Regularizer::composite(nig, l, 2.0).unwrap();
        // constant image: every block is zero, ψ*(0) = 0
        assert!(reg.value(&[1.5; 4]).unwrap().abs() < 1e-15);
        let bound = reg.composite_lipschitz().unwrap();
        assert!(bound > 0.0 && bound <= 2.0 / 0.5 * 8.0);
        let p = Problem::new(fid, reg, KernelKind::Energy).unwrap();
        assert!(p.smoothness_constant().unwrap() > 1.0);

        let lap = ReferenceDistribution::laplace(0.0, 1.0).unwrap();
        let reg = Regularizer::composite(lap, id(4), 1.0).unwrap();
        assert!(matches!(reg.composite_lipschitz(), Err(Error::Unsupported(_))));
        assert!(Regularizer::prior(Prior::iid(ReferenceDistribution::poisson(1.0).unwrap(), 2).unwrap(), 0.0).is_err());
    }
}

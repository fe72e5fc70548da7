//! Regularizer priors on `ℝ^d`: a single joint distribution, or a product of
//! univariate distributions whose rate function is the sum of the
//! coordinate rate functions.

use crate::cramer::{cramer_grad, cramer_value};
use crate::error::{check_len, Error, Result};
use crate::expfam::{mean, ReferenceDistribution};

#[derive(Debug, Clone, PartialEq)]
pub enum Prior {
    /// One (possibly multivariate) distribution covering all coordinates.
    Joint(ReferenceDistribution),
    /// `dim` independent copies of a univariate distribution.
    Iid { dist: ReferenceDistribution, dim: usize },
    /// One univariate distribution per coordinate.
    Separable(Vec<ReferenceDistribution>),
}

impl From<ReferenceDistribution> for Prior {
    fn from(d: ReferenceDistribution) -> Self {
        Prior::Joint(d)
    }
}

impl Prior {
    pub fn iid(dist: ReferenceDistribution, dim: usize) -> Result<Self> {
        if !dist.is_univariate() {
            return Err(Error::InvalidParameter(format!(
                "iid prior needs a univariate distribution, {} has dimension {}",
                dist.name(),
                dist.dim()
            )));
        }
        if dim == 0 {
            return Err(Error::InvalidParameter("iid prior: dim >= 1 violated".into()));
        }
        Ok(Prior::Iid { dist, dim })
    }

    pub fn separable(dists: Vec<ReferenceDistribution>) -> Result<Self> {
        if dists.is_empty() {
            return Err(Error::InvalidParameter("separable prior: at least one component required".into()));
        }
        if let Some(d) = dists.iter().find(|d| !d.is_univariate()) {
            return Err(Error::InvalidParameter(format!(
                "separable prior components must be univariate ({} has dimension {})",
                d.name(),
                d.dim()
            )));
        }
        Ok(Prior::Separable(dists))
    }

    pub fn dim(&self) -> usize {
        match self {
            Prior::Joint(d) => d.dim(),
            Prior::Iid { dim, .. } => *dim,
            Prior::Separable(v) => v.len(),
        }
    }

    /// Univariate component for coordinate `i`, if the prior is coordinate-wise.
    pub fn component(&self, i: usize) -> Option<&ReferenceDistribution> {
        match self {
            Prior::Joint(d) if d.is_univariate() && i == 0 => Some(d),
            Prior::Joint(_) => None,
            Prior::Iid { dist, dim } => (i < *dim).then_some(dist),
            Prior::Separable(v) => v.get(i),
        }
    }

    pub fn is_coordinatewise(&self) -> bool {
        match self {
            Prior::Joint(d) => d.is_univariate(),
            _ => true,
        }
    }

    pub fn mean(&self) -> Vec<f64> {
        match self {
            Prior::Joint(d) => mean(d),
            _ => (0..self.dim()).map(|i| mean(self.component(i).unwrap())[0]).collect(),
        }
    }

    /// `Σ ψ*` over the blocks, `+∞` off the domain.
    pub fn value(&self, x: &[f64]) -> Result<f64> {
        check_len(self.dim(), x.len())?;
        match self {
            Prior::Joint(d) => cramer_value(d, x),
            _ => {
                let mut s = 0.0;
                for (i, &xi) in x.iter().enumerate() {
                    s += cramer_value(self.component(i).unwrap(), &[xi])?;
                }
                Ok(s)
            }
        }
    }

    pub fn grad(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), x.len())?;
        match self {
            Prior::Joint(d) => cramer_grad(d, x),
            _ => x
                .iter()
                .enumerate()
                .map(|(i, &xi)| Ok(cramer_grad(self.component(i).unwrap(), &[xi])?[0]))
                .collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn separable_sums_components() {
        let p = Prior::separable(vec![
            ReferenceDistribution::poisson(1.0).unwrap(),
            ReferenceDistribution::normal_1d(0.0, 1.0).unwrap(),
        ])
        .unwrap();
        assert_eq!(p.dim(), 2);
        assert_eq!(p.mean(), vec![1.0, 0.0]);
        assert!((p.value(&[0.0, 2.0]).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn iid_requires_univariate() {
        let n = ReferenceDistribution::normal(vec![0.0, 0.0], vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert!(Prior::iid(n, 3).is_err());
        let b = ReferenceDistribution::bernoulli(0.5).unwrap();
        let p = Prior::iid(b, 4).unwrap();
        assert!((p.value(&[0.0, 1.0, 0.5, 0.5]).unwrap() - 2.0 * 2f64.ln()).abs() < 1e-15);
    }
}

//! Representative reference distributions and samplers for interior points,
//! shared by the oracle report and the validation suites.

use rand::Rng;

use crate::expfam::{mean, ReferenceDistribution};
use crate::kernels::KernelKind;

/// One member of every univariate family (Bernoulli and binomial both
/// cover the one-cell multinomial).
pub fn univariate() -> Vec<ReferenceDistribution> {
    vec![
        ReferenceDistribution::normal_1d(0.5, 2.0).unwrap(),
        ReferenceDistribution::nig(vec![0.3], vec![0.4], 1.5, 0.8, vec![1.2]).unwrap(),
        ReferenceDistribution::gamma(2.5, 1.5).unwrap(),
        ReferenceDistribution::laplace(-0.5, 0.7).unwrap(),
        ReferenceDistribution::poisson(3.0).unwrap(),
        ReferenceDistribution::bernoulli(0.3).unwrap(),
        ReferenceDistribution::multinomial(5, vec![0.4]).unwrap(),
        ReferenceDistribution::negative_multinomial(vec![0.4], 2.5).unwrap(),
        ReferenceDistribution::discrete_uniform(-2, 3).unwrap(),
        ReferenceDistribution::continuous_uniform(-1.0, 2.0).unwrap(),
        ReferenceDistribution::logistic(0.2, 0.8).unwrap(),
    ]
}

/// Joint distributions on `ℝ³` (or `ℝ²`).
pub fn multivariate() -> Vec<ReferenceDistribution> {
    vec![
        ReferenceDistribution::normal(vec![0.5, -1.0, 2.0], vec![2.0, 0.3, 0.1, 0.3, 1.0, -0.2, 0.1, -0.2, 0.5]).unwrap(),
        ReferenceDistribution::normal(vec![1.0, 2.0, 0.5], vec![1.5, 0.0, 0.0, 0.0, 0.5, 0.0, 0.0, 0.0, 2.0]).unwrap(),
        ReferenceDistribution::nig(vec![0.2, -0.1, 0.4], vec![0.1, 0.2, -0.3], 2.0, 0.7, vec![1.3, 0.0, 0.0, 0.0, 1.3, 0.0, 0.0, 0.0, 1.3])
            .unwrap(),
        ReferenceDistribution::nig(vec![0.0, 0.5, 0.0], vec![0.2, 0.0, 0.1], 1.8, 1.1, vec![1.0, 0.2, 0.0, 0.2, 0.8, 0.1, 0.0, 0.1, 1.5])
            .unwrap(),
        ReferenceDistribution::multinomial(4, vec![0.2, 0.3, 0.1]).unwrap(),
        ReferenceDistribution::negative_multinomial(vec![0.2, 0.3], 1.5).unwrap(),
    ]
}

/// Random point in the interior of `dom ψ*` (the support hull) of a
/// univariate distribution.
pub fn interior_point<R: Rng>(dist: &ReferenceDistribution, rng: &mut R) -> f64 {
    let (lo, hi) = dist.support_hull().expect("univariate");
    let m = mean(dist)[0];
    match (lo.is_finite(), hi.is_finite()) {
        (true, true) => lo + (hi - lo) * rng.random_range(0.02..0.98),
        (true, false) => lo + (m - lo).max(0.5) * rng.random_range((0.05f64).ln()..(4.0f64).ln()).exp(),
        _ => m + rng.random_range(-4.0..4.0),
    }
}

/// Random point of `int dom h`, loosely centred on `centre` for the energy kernel.
pub fn kernel_point<R: Rng>(k: KernelKind, centre: f64, rng: &mut R) -> f64 {
    match k {
        KernelKind::Energy => centre + rng.random_range(-3.0..3.0),
        _ => rng.random_range((0.05f64).ln()..(8.0f64).ln()).exp(),
    }
}

/// Does the pair have a non-empty `int dom h ∩ dom ψ*`?
pub fn compatible(k: KernelKind, dist: &ReferenceDistribution) -> bool {
    k == KernelKind::Energy || dist.support_hull().map(|(_, hi)| hi > 0.0).unwrap_or(true)
}

//! Reference quantities the micro-state volumes converge to: Shannon and
//! differential entropies, relative entropy, and mutual information. All
//! values are in nats.

pub mod distribution;
pub mod quadrature;

use num_traits::Zero;

pub use distribution::{DistributionSpec, MomentOracle};
pub use quadrature::Quadrature;

use crate::error::{domain, Result};
use crate::types::{rational_to_f64, JointProbTensor, ProbVector, Rational};

/// `−Σ p log p` of raw weights, with `0 log 0 = 0`.
pub fn shannon_entropy_of(weights: &[Rational]) -> f64 {
    -weights
        .iter()
        .filter(|w| !w.is_zero())
        .map(|w| {
            let p = rational_to_f64(w);
            p * p.ln()
        })
        .sum::<f64>()
}

pub fn shannon_entropy(p: &ProbVector) -> f64 {
    shannon_entropy_of(p.weights())
}

/// `Σ p log(p/q)` over matching weight lists; `+inf` when `p` charges a
/// point that `q` does not. The ratio `p/q` is formed exactly, so `S(p, p)`
/// is exactly zero.
pub fn relative_entropy_of(p: &[Rational], q: &[Rational]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(domain(format!("shapes differ: {} vs {}", p.len(), q.len())));
    }
    let mut acc = 0.0;
    for (a, b) in p.iter().zip(q) {
        if a.is_zero() {
            continue;
        }
        if b.is_zero() {
            return Ok(f64::INFINITY);
        }
        acc += rational_to_f64(a) * rational_to_f64(&(a / b)).ln();
    }
    Ok(acc)
}

pub fn relative_entropy(p: &ProbVector, q: &ProbVector) -> Result<f64> {
    relative_entropy_of(p.weights(), q.weights())
}

pub fn relative_entropy_joint(p: &JointProbTensor, q: &JointProbTensor) -> Result<f64> {
    if p.arity() != q.arity() || p.d() != q.d() {
        return Err(domain("tensor shapes differ"));
    }
    relative_entropy_of(p.weights(), q.weights())
}

/// `Σ_i S(p_{X_i}) − S(p)` for a joint pmf of `n ≥ 2` variables.
pub fn discrete_mutual_information(p: &JointProbTensor) -> Result<f64> {
    if p.arity() < 2 {
        return Err(domain("mutual information needs at least two variables"));
    }
    let marginal_sum: f64 = p.marginals()?.iter().map(shannon_entropy).sum();
    Ok(marginal_sum - shannon_entropy_of(p.weights()))
}

/// `S(p, p_{X_1} ⊗ … ⊗ p_{X_n})`: the same quantity through the divergence.
pub fn mutual_information_as_divergence(p: &JointProbTensor) -> Result<f64> {
    let product = JointProbTensor::product(&p.marginals()?)?;
    relative_entropy_joint(p, &product)
}

/// Differential entropy `−∫ p log p` by adaptive quadrature over the
/// support box, or `−inf` when the law has no density.
pub fn bg_entropy_quadrature(spec: &DistributionSpec) -> Result<f64> {
    bg_entropy_with(spec, &Quadrature::default())
}

pub fn bg_entropy_with(spec: &DistributionSpec, quad: &Quadrature) -> Result<f64> {
    spec.validate()?;
    if !spec.has_density() {
        return Ok(f64::NEG_INFINITY);
    }
    let n = spec.arity();
    let mut lo = Vec::with_capacity(n);
    let mut hi = Vec::with_capacity(n);
    for i in 0..n {
        let (a, b) = spec.support_interval(i)?;
        lo.push(rational_to_f64(&a));
        hi.push(rational_to_f64(&b));
    }
    let integrand = |x: &[f64]| {
        let p = spec.density(x).unwrap_or(0.0);
        if p > 0.0 {
            -p * p.ln()
        } else {
            0.0
        }
    };
    quad.integrate_box(&integrand, &lo, &hi)
}

/// `H(X_1) + H(X_2) − H(X_1, X_2)` for a two-variable law with a density.
pub fn continuous_mi_quadrature(spec: &DistributionSpec) -> Result<f64> {
    if spec.arity() != 2 {
        return Err(domain(
            "continuous mutual information is defined here for two variables",
        ));
    }
    if !spec.has_density() {
        return Err(domain("law has no joint density"));
    }
    let quad = Quadrature::default();
    let joint = bg_entropy_with(spec, &quad)?;
    let h0 = bg_entropy_with(&spec.marginal(0)?, &quad)?;
    let h1 = bg_entropy_with(&spec.marginal(1)?, &quad)?;
    Ok(h0 + h1 - joint)
}

//! A closed family of bounded distributions whose joint moments all have
//! closed forms.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Result};
use crate::types::{decode_cell, format_rational, rational_to_f64, JointProbTensor, Rational};

/// Law of a bounded random vector.
#[derive(Clone, Debug, PartialEq)]
pub enum DistributionSpec {
    /// Uniform on `[a, b]`, `a < b`.
    UniformInterval { a: Rational, b: Rational },
    /// Density `1 + ρ(2x−1)(2y−1)` on `[0, 1]^2`, `|ρ| ≤ 1`. Both marginals
    /// are uniform on `[0, 1]`.
    TiltedUniformSquare { rho: Rational },
    /// Finitely supported law: variable `i` takes the value `support[z_i]`
    /// with joint probabilities `pmf` (arity 1 for a single variable).
    DiscreteOnReals {
        support: Vec<Rational>,
        pmf: JointProbTensor,
    },
    /// Independent concatenation of component vectors.
    Product(Vec<DistributionSpec>),
}

impl DistributionSpec {
    pub fn uniform(a: Rational, b: Rational) -> Result<Self> {
        let s = DistributionSpec::UniformInterval { a, b };
        s.validate()?;
        Ok(s)
    }

    pub fn tilted(rho: Rational) -> Result<Self> {
        let s = DistributionSpec::TiltedUniformSquare { rho };
        s.validate()?;
        Ok(s)
    }

    pub fn discrete(support: Vec<Rational>, pmf: JointProbTensor) -> Result<Self> {
        let s = DistributionSpec::DiscreteOnReals { support, pmf };
        s.validate()?;
        Ok(s)
    }

    pub fn product(parts: Vec<DistributionSpec>) -> Result<Self> {
        let s = DistributionSpec::Product(parts);
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            DistributionSpec::UniformInterval { a, b } => {
                if a >= b {
                    return Err(domain(format!(
                        "uniform interval needs a < b, got [{}, {}]",
                        format_rational(a),
                        format_rational(b)
                    )));
                }
            }
            DistributionSpec::TiltedUniformSquare { rho } => {
                if rho.abs() > Rational::one() {
                    return Err(domain("tilt must satisfy |rho| <= 1"));
                }
            }
            DistributionSpec::DiscreteOnReals { support, pmf } => {
                if support.len() != pmf.d() {
                    return Err(domain("support size differs from the pmf alphabet size"));
                }
                if support.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(domain("support points must be strictly increasing"));
                }
            }
            DistributionSpec::Product(parts) => {
                if parts.is_empty() {
                    return Err(domain("empty product"));
                }
                for p in parts {
                    p.validate()?;
                }
            }
        }
        Ok(())
    }

    /// Number of scalar coordinates.
    pub fn arity(&self) -> usize {
        match self {
            DistributionSpec::UniformInterval { .. } => 1,
            DistributionSpec::TiltedUniformSquare { .. } => 2,
            DistributionSpec::DiscreteOnReals { pmf, .. } => pmf.arity(),
            DistributionSpec::Product(parts) => parts.iter().map(|p| p.arity()).sum(),
        }
    }

    fn check_var(&self, i: usize) -> Result<()> {
        if i >= self.arity() {
            return Err(domain(format!(
                "variable {i} out of range for arity {}",
                self.arity()
            )));
        }
        Ok(())
    }

    /// Component holding coordinate `i`, and `i` relative to it.
    fn locate(parts: &[DistributionSpec], mut i: usize) -> (&DistributionSpec, usize) {
        for p in parts {
            if i < p.arity() {
                return (p, i);
            }
            i -= p.arity();
        }
        unreachable!("coordinate checked against arity")
    }

    /// One-dimensional law of coordinate `i`.
    pub fn marginal(&self, i: usize) -> Result<DistributionSpec> {
        self.check_var(i)?;
        Ok(match self {
            DistributionSpec::UniformInterval { .. } => self.clone(),
            DistributionSpec::TiltedUniformSquare { .. } => DistributionSpec::UniformInterval {
                a: Rational::zero(),
                b: Rational::one(),
            },
            DistributionSpec::DiscreteOnReals { support, pmf } => {
                DistributionSpec::DiscreteOnReals {
                    support: support.clone(),
                    pmf: pmf.marginal(i)?.into(),
                }
            }
            DistributionSpec::Product(parts) => {
                let (part, j) = Self::locate(parts, i);
                part.marginal(j)?
            }
        })
    }

    /// Closed support interval `[lo, hi]` of coordinate `i`.
    pub fn support_interval(&self, i: usize) -> Result<(Rational, Rational)> {
        self.check_var(i)?;
        Ok(match self {
            DistributionSpec::UniformInterval { a, b } => (*a, *b),
            DistributionSpec::TiltedUniformSquare { .. } => (Rational::zero(), Rational::one()),
            DistributionSpec::DiscreteOnReals { support, pmf } => {
                let m = pmf.marginal(i)?;
                let charged: Vec<Rational> = support
                    .iter()
                    .zip(m.weights())
                    .filter(|(_, w)| !w.is_zero())
                    .map(|(r, _)| *r)
                    .collect();
                (charged[0], charged[charged.len() - 1])
            }
            DistributionSpec::Product(parts) => {
                let (part, j) = Self::locate(parts, i);
                part.support_interval(j)?
            }
        })
    }

    /// `‖X_i‖_∞`.
    pub fn sup_norm(&self, i: usize) -> Result<f64> {
        let (lo, hi) = self.support_interval(i)?;
        Ok(rational_to_f64(&lo.abs().max(hi.abs())))
    }

    pub fn max_sup_norm(&self) -> Result<f64> {
        (0..self.arity()).try_fold(0.0f64, |m, i| Ok(m.max(self.sup_norm(i)?)))
    }

    /// `E[Π_i X_i^{e_i}]` as an exact rational.
    pub fn moment_exact(&self, exponents: &[u32]) -> Result<BigRational> {
        if exponents.len() != self.arity() {
            return Err(domain(format!(
                "{} exponents for arity {}",
                exponents.len(),
                self.arity()
            )));
        }
        Ok(match self {
            DistributionSpec::UniformInterval { a, b } => {
                let k = exponents[0];
                let (a, b) = (big(a), big(b));
                let num = pow(&b, k + 1) - pow(&a, k + 1);
                num / ((&b - &a) * BigRational::from_integer(BigInt::from(k + 1)))
            }
            DistributionSpec::TiltedUniformSquare { rho } => {
                let (ea, eb) = (exponents[0], exponents[1]);
                let plain = BigRational::new(
                    BigInt::one(),
                    BigInt::from((u64::from(ea) + 1) * (u64::from(eb) + 1)),
                );
                // c_a = ∫ x^a (2x−1) dx = a / ((a+1)(a+2))
                let c = |a: u32| {
                    BigRational::new(
                        BigInt::from(a),
                        BigInt::from((u64::from(a) + 1) * (u64::from(a) + 2)),
                    )
                };
                plain + big(rho) * c(ea) * c(eb)
            }
            DistributionSpec::DiscreteOnReals { support, pmf } => {
                let n = pmf.arity();
                let mut digits = vec![0usize; n];
                let mut acc = BigRational::zero();
                for (cell, w) in pmf.weights().iter().enumerate() {
                    if w.is_zero() {
                        continue;
                    }
                    decode_cell(cell, pmf.d(), &mut digits);
                    let mut term = big(w);
                    for (z, &e) in digits.iter().zip(exponents) {
                        term *= pow(&big(&support[*z]), e);
                    }
                    acc += term;
                }
                acc
            }
            DistributionSpec::Product(parts) => {
                let mut acc = BigRational::one();
                let mut offset = 0;
                for p in parts {
                    acc *= p.moment_exact(&exponents[offset..offset + p.arity()])?;
                    offset += p.arity();
                }
                acc
            }
        })
    }

    /// Generalized inverse CDF of a one-dimensional law at level `u ∈ (0, 1)`.
    pub fn quantile(&self, u: Rational) -> Result<f64> {
        if self.arity() != 1 {
            return Err(domain("quantile of a multivariate law"));
        }
        if u <= Rational::zero() || u >= Rational::one() {
            return Err(domain("quantile level must lie in (0, 1)"));
        }
        match self {
            DistributionSpec::UniformInterval { a, b } => Ok(rational_to_f64(&(a + (b - a) * u))),
            DistributionSpec::DiscreteOnReals { support, pmf } => {
                let mut cdf = Rational::zero();
                for (r, w) in support.iter().zip(pmf.weights()) {
                    cdf += w;
                    if !w.is_zero() && cdf >= u {
                        return Ok(rational_to_f64(r));
                    }
                }
                Ok(rational_to_f64(&support[support.len() - 1]))
            }
            DistributionSpec::Product(parts) => parts[0].quantile(u),
            DistributionSpec::TiltedUniformSquare { .. } => unreachable!("arity 2"),
        }
    }

    /// Whether the law has a density with respect to Lebesgue measure.
    pub fn has_density(&self) -> bool {
        match self {
            DistributionSpec::UniformInterval { .. }
            | DistributionSpec::TiltedUniformSquare { .. } => true,
            DistributionSpec::DiscreteOnReals { .. } => false,
            DistributionSpec::Product(parts) => parts.iter().all(|p| p.has_density()),
        }
    }

    /// Density at `x`; `None` when the law has no density.
    pub fn density(&self, x: &[f64]) -> Option<f64> {
        match self {
            DistributionSpec::UniformInterval { a, b } => {
                let (a, b) = (rational_to_f64(a), rational_to_f64(b));
                Some(if (a..=b).contains(&x[0]) {
                    1.0 / (b - a)
                } else {
                    0.0
                })
            }
            DistributionSpec::TiltedUniformSquare { rho } => {
                let inside = x[..2].iter().all(|v| (0.0..=1.0).contains(v));
                let rho = rational_to_f64(rho);
                Some(if inside {
                    1.0 + rho * (2.0 * x[0] - 1.0) * (2.0 * x[1] - 1.0)
                } else {
                    0.0
                })
            }
            DistributionSpec::DiscreteOnReals { .. } => None,
            DistributionSpec::Product(parts) => {
                let mut acc = 1.0;
                let mut offset = 0;
                for p in parts {
                    acc *= p.density(&x[offset..offset + p.arity()])?;
                    offset += p.arity();
                }
                Some(acc)
            }
        }
    }
}

fn big(r: &Rational) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

fn pow(x: &BigRational, k: u32) -> BigRational {
    (0..k).fold(BigRational::one(), |acc, _| acc * x)
}

/// Exact joint moments `E(X_{i_1} ⋯ X_{i_k})` of a [`DistributionSpec`].
#[derive(Clone, Debug)]
pub struct MomentOracle {
    spec: DistributionSpec,
}

impl MomentOracle {
    pub fn new(spec: DistributionSpec) -> Result<Self> {
        spec.validate()?;
        Ok(MomentOracle { spec })
    }

    pub fn spec(&self) -> &DistributionSpec {
        &self.spec
    }

    pub fn arity(&self) -> usize {
        self.spec.arity()
    }

    /// Exact moment for a multi-index of 0-based variable indices.
    pub fn moment_exact(&self, multi_index: &[usize]) -> Result<BigRational> {
        if multi_index.is_empty() {
            return Err(domain("empty multi-index"));
        }
        let mut exps = vec![0u32; self.arity()];
        for &i in multi_index {
            *exps
                .get_mut(i)
                .ok_or_else(|| domain(format!("index {i} out of range")))? += 1;
        }
        self.spec.moment_exact(&exps)
    }

    /// The exact moment, rounded once to `f64`.
    pub fn moment(&self, multi_index: &[usize]) -> Result<f64> {
        let m = self.moment_exact(multi_index)?;
        m.to_f64()
            .ok_or_else(|| domain("moment not representable as f64"))
    }
}

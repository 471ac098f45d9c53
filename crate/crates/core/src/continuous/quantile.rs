use num_rational::Ratio;

use crate::entropy::DistributionSpec;
use crate::error::{domain, Result};
use crate::perm::SortedVector;

/// Midpoint-quantile sequence `ξ(N)_j = F^{-1}((2j−1)/(2N))`, `j = 1..N`,
/// of a one-dimensional law. Entries stay inside the support.
pub fn quantile_sequence(spec: &DistributionSpec, n_len: usize) -> Result<SortedVector> {
    if n_len == 0 {
        return Err(domain("N must be at least 1"));
    }
    if spec.arity() != 1 {
        return Err(domain("quantile sequence of a multivariate law"));
    }
    let den = 2 * n_len as i64;
    let entries = (1..=n_len as i64)
        .map(|j| spec.quantile(Ratio::new(2 * j - 1, den)))
        .collect::<Result<Vec<_>>>()?;
    SortedVector::new(entries)
}

/// One quantile sequence per marginal of `spec`.
pub fn approximating_sequences(spec: &DistributionSpec, n_len: usize) -> Result<Vec<SortedVector>> {
    (0..spec.arity())
        .map(|i| quantile_sequence(&spec.marginal(i)?, n_len))
        .collect()
}

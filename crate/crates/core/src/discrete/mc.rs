use crate::error::{domain, Result};
use crate::estimate::{count_successes, LogProbEstimate};
use crate::perm::Permutation;
use crate::types::JointProbTensor;

use super::membership::MicrostateBand;
use super::BandSpec;

/// Counts successes of `accept` over `trials` tuples `(id, σ_2, …, σ_n)`
/// with `σ_2, …, σ_n` uniform and independent.
pub(crate) fn count_sampled<S, I, F>(
    n_len: usize,
    arity: usize,
    trials: u64,
    seed: u64,
    init: I,
    accept: F,
) -> u64
where
    I: Fn() -> S + Sync,
    F: Fn(&mut S, &[Permutation]) -> bool + Sync,
{
    count_successes(
        trials,
        seed,
        || (vec![Permutation::identity(n_len); arity], init()),
        |(sigmas, state), rng| {
            for sigma in sigmas.iter_mut().skip(1) {
                sigma.reshuffle(rng);
            }
            accept(state, sigmas)
        },
    )
}

/// Monte Carlo estimate of the uniform measure of `Δ_sym` in `S_N^n`.
pub fn microstate_mc_estimate(
    p: &JointProbTensor,
    band: &BandSpec,
    trials: u64,
    seed: u64,
) -> Result<LogProbEstimate> {
    if trials == 0 {
        return Err(domain("at least one trial is required"));
    }
    let tester = MicrostateBand::new(p, band)?;
    let successes = count_sampled(
        band.n_len,
        p.arity(),
        trials,
        seed,
        || tester.scratch(),
        |scratch, sigmas| tester.contains_with(sigmas, scratch),
    );
    Ok(LogProbEstimate::from_counts(successes, trials))
}

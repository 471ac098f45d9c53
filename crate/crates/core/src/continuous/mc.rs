use rand::Rng;
use serde::Serialize;

use crate::discrete::mc::count_sampled;
use crate::entropy::{DistributionSpec, MomentOracle};
use crate::error::{domain, Result};
use crate::estimate::{count_successes, LogProbEstimate};
use crate::perm::{sort_to_canonical, trial_rng, Permutation};
use crate::types::rational_to_f64;

use super::quantile::approximating_sequences;
use super::{joint_moment_membership, MomentBand, MomentWindow};

/// Monte Carlo estimate of the uniform measure of the tuples `(σ_i)` for
/// which `(σ_1(ξ_1), …, σ_n(ξ_n))` is a moment micro-state, `ξ_i` being the
/// midpoint-quantile sequences of the marginals. `σ_1` is fixed to the
/// identity since a common permutation leaves every joint moment unchanged.
pub fn approximating_mc_estimate(
    spec: &DistributionSpec,
    window: &MomentWindow,
    n_len: usize,
    trials: u64,
    seed: u64,
) -> Result<LogProbEstimate> {
    if trials == 0 {
        return Err(domain("at least one trial is required"));
    }
    let band = MomentBand::new(&MomentOracle::new(spec.clone())?, *window)?;
    let xis: Vec<Vec<f64>> = approximating_sequences(spec, n_len)?
        .into_iter()
        .map(|x| x.into_vec())
        .collect();
    let arity = xis.len();
    let successes = count_sampled(
        n_len,
        arity,
        trials,
        seed,
        || xis.clone(),
        |buf, sigmas| {
            for (i, sigma) in sigmas.iter().enumerate().skip(1) {
                sigma.apply_into(&xis[i], &mut buf[i]);
            }
            let views: Vec<&[f64]> = buf.iter().map(Vec::as_slice).collect();
            band.contains_unchecked(&views)
        },
    );
    Ok(LogProbEstimate::from_counts(successes, trials))
}

/// Where the Lebesgue probe samples each coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplingBox {
    /// `[−R, R]` from the window's cut-off.
    Cutoff,
    /// The support interval of each variable.
    Support,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VolumeEstimate {
    /// `(1/N) log` of the estimated volume of the micro-state set.
    pub log_volume_rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub successes: u64,
    pub trials: u64,
}

/// Estimates `(1/N) log λ_N^{⊗n}` of the moment micro-states inside a
/// sampling box as `Σ_i log width_i + (1/N) log p̂`, where `p̂` is the
/// accepted fraction of uniform samples from the box. The window must
/// carry a cut-off `R ≥ max_i ‖X_i‖_∞`.
pub fn lebesgue_volume_mc_estimate(
    spec: &DistributionSpec,
    window: &MomentWindow,
    n_len: usize,
    trials: u64,
    seed: u64,
    sampling: SamplingBox,
) -> Result<VolumeEstimate> {
    if trials == 0 {
        return Err(domain("at least one trial is required"));
    }
    if n_len == 0 {
        return Err(domain("N must be at least 1"));
    }
    let r = window
        .cutoff
        .ok_or_else(|| domain("the Lebesgue probe needs a cut-off R"))?;
    let sup = spec.max_sup_norm()?;
    if r < sup {
        return Err(domain(format!(
            "cut-off R = {r} is below max ‖X_i‖∞ = {sup}"
        )));
    }
    let arity = spec.arity();
    let boxes: Vec<(f64, f64)> = match sampling {
        SamplingBox::Cutoff => vec![(-r, r); arity],
        SamplingBox::Support => (0..arity)
            .map(|i| {
                spec.support_interval(i)
                    .map(|(a, b)| (rational_to_f64(&a), rational_to_f64(&b)))
            })
            .collect::<Result<_>>()?,
    };
    let band = MomentBand::new(&MomentOracle::new(spec.clone())?, *window)?;
    let successes = count_successes(
        trials,
        seed,
        || vec![vec![0.0f64; n_len]; arity],
        |buf, rng| {
            for (v, &(lo, hi)) in buf.iter_mut().zip(&boxes) {
                for x in v.iter_mut() {
                    *x = lo + (hi - lo) * rng.random::<f64>();
                }
            }
            let views: Vec<&[f64]> = buf.iter().map(Vec::as_slice).collect();
            band.contains_unchecked(&views)
        },
    );
    let est = LogProbEstimate::from_counts(successes, trials);
    let log_width: f64 = boxes.iter().map(|(lo, hi)| (hi - lo).ln()).sum();
    let n = n_len as f64;
    Ok(VolumeEstimate {
        log_volume_rate: log_width + est.log_p_hat / n,
        ci_low: log_width + est.ci_low / n,
        ci_high: log_width + est.ci_high / n,
        successes,
        trials,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpotCheckReport {
    pub tuples_checked: u64,
    /// Sampled tuples inside the band built on the approximating sequences.
    pub members: u64,
    /// Trial indices whose tuple failed a forward inclusion.
    pub violations: Vec<u64>,
    /// Set when no cut-off is given or it is below `max_i ‖X_i‖_∞`, so the
    /// cut-off inclusion was not tested.
    pub cutoff_check_skipped: bool,
}

/// Samples tuples `(id, σ_2, …, σ_n)` and, for each that lies in the band
/// built on the approximating sequences, re-derives membership of the
/// unconstrained and cut-off sets with `x_i = ξ_i(N)` as the witness: the
/// sorted form of `σ_i(ξ_i)` must give back `ξ_i` and `σ_i(ξ_i)`, and the
/// witnesses must pass the moment test directly.
pub fn approximating_inclusion_spot_check(
    spec: &DistributionSpec,
    window: &MomentWindow,
    n_len: usize,
    trials: u64,
    seed: u64,
) -> Result<SpotCheckReport> {
    if trials == 0 {
        return Err(domain("at least one trial is required"));
    }
    let oracle = MomentOracle::new(spec.clone())?;
    let free = window.without_cutoff();
    let band = MomentBand::new(&oracle, free)?;
    let xis: Vec<Vec<f64>> = approximating_sequences(spec, n_len)?
        .into_iter()
        .map(|x| x.into_vec())
        .collect();
    let sup = spec.max_sup_norm()?;
    let cutoff = window.cutoff.filter(|&r| r >= sup);
    let arity = xis.len();

    let mut report = SpotCheckReport {
        tuples_checked: trials,
        members: 0,
        violations: Vec::new(),
        cutoff_check_skipped: cutoff.is_none(),
    };
    // serial on purpose: the report lists trial indices in order
    let mut rng_sigmas = vec![Permutation::identity(n_len); arity];
    for t in 0..trials {
        let mut rng = trial_rng(seed, t);
        for sigma in rng_sigmas.iter_mut().skip(1) {
            sigma.reshuffle(&mut rng);
        }
        let moved: Vec<Vec<f64>> = rng_sigmas
            .iter()
            .zip(&xis)
            .map(|(s, x)| s.apply(x))
            .collect::<Result<_>>()?;
        let views: Vec<&[f64]> = moved.iter().map(Vec::as_slice).collect();
        if !band.contains_unchecked(&views) {
            continue;
        }
        report.members += 1;
        let mut ok = true;
        for (s, x) in moved.iter().zip(&xis) {
            let (sorted, tau) = sort_to_canonical(s)?;
            ok &= sorted.entries() == x.as_slice() && tau.apply(sorted.entries())? == *s;
        }
        ok &= joint_moment_membership(&views, &oracle, &free)?;
        if let Some(r) = cutoff {
            let bounded = MomentWindow {
                cutoff: Some(r),
                ..free
            };
            ok &= xis.iter().all(|x| x.iter().all(|v| v.abs() <= r));
            ok &= joint_moment_membership(&views, &oracle, &bounded)?;
        }
        if !ok {
            report.violations.push(t);
        }
    }
    Ok(report)
}

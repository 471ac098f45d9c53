//! Monte Carlo probability estimates with exact binomial intervals, kept in
//! the log domain because the probabilities of interest decay exponentially.

use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{Beta, ContinuousCDF};

use crate::perm::trial_rng;

/// Two-sided confidence level of the reported intervals.
pub const CONFIDENCE: f64 = 0.95;

/// Estimate of a probability from `successes` out of `trials`, with a
/// Clopper–Pearson interval. With zero successes the upper end is the
/// one-sided bound `1 − α^{1/trials}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogProbEstimate {
    pub successes: u64,
    pub trials: u64,
    pub log_p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl LogProbEstimate {
    pub fn from_counts(successes: u64, trials: u64) -> Self {
        assert!(trials >= 1, "at least one trial");
        assert!(successes <= trials, "successes exceed trials");
        let (low, high) = clopper_pearson(successes, trials, 1.0 - CONFIDENCE);
        let log_p_hat = if successes == 0 {
            f64::NEG_INFINITY
        } else {
            (successes as f64 / trials as f64).ln()
        };
        LogProbEstimate {
            successes,
            trials,
            log_p_hat,
            ci_low: low.ln(),
            ci_high: high.ln(),
        }
    }

    pub fn p_hat(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// Binomial standard error of a success rate `p` over these trials.
    pub fn standard_error_at(&self, p: f64) -> f64 {
        (p * (1.0 - p) / self.trials as f64).sqrt()
    }
}

const CHUNK: u64 = 1024;

/// Number of trials `t ∈ 0..trials` for which `accept` succeeds, each trial
/// drawing from its own generator `trial_rng(seed, t)`. Trials run in
/// parallel chunks with one `init()` state per chunk; the integer total is
/// independent of the thread count and schedule.
pub(crate) fn count_successes<S, I, F>(trials: u64, seed: u64, init: I, accept: F) -> u64
where
    I: Fn() -> S + Sync,
    F: Fn(&mut S, &mut ChaCha8Rng) -> bool + Sync,
{
    (0..trials.div_ceil(CHUNK))
        .into_par_iter()
        .map(|chunk| {
            let mut state = init();
            let end = ((chunk + 1) * CHUNK).min(trials);
            (chunk * CHUNK..end)
                .filter(|&t| accept(&mut state, &mut trial_rng(seed, t)))
                .count() as u64
        })
        .sum()
}

/// Exact binomial interval `(low, high)` for `k` successes in `n` trials at
/// level `1 − alpha`.
pub fn clopper_pearson(k: u64, n: u64, alpha: f64) -> (f64, f64) {
    let (kf, nf) = (k as f64, n as f64);
    if k == 0 {
        return (0.0, 1.0 - alpha.powf(1.0 / nf));
    }
    let low = Beta::new(kf, nf - kf + 1.0)
        .map(|b| b.inverse_cdf(alpha / 2.0))
        .unwrap_or(0.0);
    let high = if k == n {
        1.0
    } else {
        Beta::new(kf + 1.0, nf - kf)
            .map(|b| b.inverse_cdf(1.0 - alpha / 2.0))
            .unwrap_or(1.0)
    };
    (low, high)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_successes_have_finite_upper_bound() {
        let e = LogProbEstimate::from_counts(0, 1000);
        assert_eq!(e.log_p_hat, f64::NEG_INFINITY);
        assert_eq!(e.ci_low, f64::NEG_INFINITY);
        let expected = (1.0 - 0.05f64.powf(1.0 / 1000.0)).ln();
        assert!((e.ci_high - expected).abs() < 1e-12);
        assert!(e.ci_high.is_finite());
    }

    #[test]
    fn interval_brackets_the_estimate() {
        for (k, n) in [
            (1, 10),
            (5, 10),
            (9, 10),
            (10, 10),
            (37, 100_000),
            (50_000, 100_000),
        ] {
            let e = LogProbEstimate::from_counts(k, n);
            assert!(
                e.ci_low <= e.log_p_hat && e.log_p_hat <= e.ci_high,
                "{k}/{n}: {e:?}"
            );
            assert!(!e.ci_low.is_nan() && !e.ci_high.is_nan());
        }
        assert_eq!(LogProbEstimate::from_counts(10, 10).ci_high, 0.0);
    }

    #[test]
    fn known_interval() {
        // 5 of 10: the textbook Clopper-Pearson interval is (0.1871, 0.8129)
        let (lo, hi) = clopper_pearson(5, 10, 0.05);
        assert!((lo - 0.187_086).abs() < 1e-5, "{lo}");
        assert!((hi - 0.812_914).abs() < 1e-5, "{hi}");
    }
}

//! Moment-band micro-states of bounded real random variables.
//!
//! `(x_1, …, x_n) ∈ (ℝ^N)^n` is a micro-state at `(m, δ)` when every joint
//! empirical moment `κ_N(x_{i_1} ⋯ x_{i_k})`, `1 ≤ k ≤ m`, lies strictly
//! within `δ` of `E(X_{i_1} ⋯ X_{i_k})`. With a cut-off `R` the entries
//! must also satisfy `‖x_i‖_∞ ≤ R`.
//!
//! Pointwise products commute, so only multisets of indices are tested:
//! `C(n+k−1, k)` constraints at order `k` instead of `n^k` (for `n = 2`,
//! `m = 4`: 14 instead of 30).

mod mc;
mod quantile;

pub use mc::{
    approximating_inclusion_spot_check, approximating_mc_estimate, lebesgue_volume_mc_estimate,
    SamplingBox, SpotCheckReport, VolumeEstimate,
};
pub use quantile::{approximating_sequences, quantile_sequence};

use crate::entropy::MomentOracle;
use crate::error::{domain, Result};

/// Moment order `m`, radius `δ` and optional cut-off `R`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MomentWindow {
    pub max_order: usize,
    pub delta: f64,
    pub cutoff: Option<f64>,
}

impl MomentWindow {
    pub fn new(max_order: usize, delta: f64, cutoff: Option<f64>) -> Result<Self> {
        if max_order == 0 {
            return Err(domain("moment order m must be at least 1"));
        }
        if delta.is_nan() || delta <= 0.0 {
            return Err(domain(format!("delta must be positive, got {delta}")));
        }
        if let Some(r) = cutoff {
            if r.is_nan() || r <= 0.0 {
                return Err(domain(format!("cut-off R must be positive, got {r}")));
            }
        }
        Ok(MomentWindow {
            max_order,
            delta,
            cutoff,
        })
    }

    pub fn without_cutoff(&self) -> Self {
        MomentWindow {
            cutoff: None,
            ..*self
        }
    }
}

/// Nondecreasing index tuples of `0..n` of lengths `1..=m`, by length then
/// lexicographically.
pub fn moment_multisets(n: usize, m: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for k in 1..=m {
        let mut idx = vec![0usize; k];
        loop {
            out.push(idx.clone());
            // advance to the next nondecreasing tuple
            let Some(pos) = (0..k).rev().find(|&p| idx[p] + 1 < n) else {
                break;
            };
            let v = idx[pos] + 1;
            for slot in &mut idx[pos..] {
                *slot = v;
            }
        }
    }
    out
}

/// The constraint list of a [`MomentWindow`] against a [`MomentOracle`],
/// with targets converted to `f64` once.
#[derive(Clone, Debug)]
pub struct MomentBand {
    arity: usize,
    window: MomentWindow,
    constraints: Vec<(Vec<usize>, f64)>,
}

impl MomentBand {
    pub fn new(oracle: &MomentOracle, window: MomentWindow) -> Result<Self> {
        let arity = oracle.arity();
        let constraints = moment_multisets(arity, window.max_order)
            .into_iter()
            .map(|idx| oracle.moment(&idx).map(|t| (idx, t)))
            .collect::<Result<Vec<_>>>()?;
        Ok(MomentBand {
            arity,
            window,
            constraints,
        })
    }

    pub fn window(&self) -> &MomentWindow {
        &self.window
    }

    pub fn constraint_count(&self) -> usize {
        self.constraints.len()
    }

    /// Membership of equal-length vectors; lengths are not checked.
    pub(crate) fn contains_unchecked(&self, seqs: &[&[f64]]) -> bool {
        if let Some(r) = self.window.cutoff {
            if seqs.iter().any(|s| s.iter().any(|v| v.abs() > r)) {
                return false;
            }
        }
        let n = seqs[0].len();
        self.constraints.iter().all(|(idx, target)| {
            let sum: f64 = (0..n)
                .map(|j| idx.iter().map(|&i| seqs[i][j]).product::<f64>())
                .sum();
            (sum / n as f64 - target).abs() < self.window.delta
        })
    }

    pub fn contains(&self, seqs: &[&[f64]]) -> Result<bool> {
        if seqs.len() != self.arity {
            return Err(domain(format!(
                "{} vectors for {} variables",
                seqs.len(),
                self.arity
            )));
        }
        let n = seqs[0].len();
        if n == 0 || seqs.iter().any(|s| s.len() != n) {
            return Err(domain("vectors must be nonempty and of equal length"));
        }
        Ok(self.contains_unchecked(seqs))
    }
}

/// Whether `seqs` is a moment micro-state of the oracle's law at `window`.
pub fn joint_moment_membership(
    seqs: &[&[f64]],
    oracle: &MomentOracle,
    window: &MomentWindow,
) -> Result<bool> {
    MomentBand::new(oracle, *window)?.contains(seqs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::entropy::DistributionSpec;
    use crate::perm::random_permutation;
    use num_rational::Ratio;

    fn uniform01() -> MomentOracle {
        MomentOracle::new(
            DistributionSpec::uniform(Ratio::from_integer(0), Ratio::from_integer(1)).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn multiset_enumeration() {
        assert_eq!(
            moment_multisets(2, 2),
            vec![vec![0], vec![1], vec![0, 0], vec![0, 1], vec![1, 1]]
        );
        assert_eq!(moment_multisets(2, 4).len(), 2 + 3 + 4 + 5);
        assert_eq!(
            moment_multisets(1, 3),
            vec![vec![0], vec![0, 0], vec![0, 0, 0]]
        );
        assert_eq!(moment_multisets(3, 2).len(), 3 + 6);
    }

    #[test]
    fn midpoint_uniform_examples() {
        let xi = [0.125, 0.375, 0.625, 0.875];
        let w = |m, d| MomentWindow::new(m, d, None).unwrap();
        assert!(joint_moment_membership(&[&xi], &uniform01(), &w(1, 0.01)).unwrap());
        assert!(joint_moment_membership(&[&xi], &uniform01(), &w(2, 0.01)).unwrap());
        assert!(!joint_moment_membership(&[&xi], &uniform01(), &w(2, 0.001)).unwrap());
    }

    #[test]
    fn cutoff_rejects_large_entries() {
        let xi = [0.125, 0.375, 0.625, 0.875];
        let w = MomentWindow::new(1, 0.01, Some(0.8)).unwrap();
        assert!(!joint_moment_membership(&[&xi], &uniform01(), &w).unwrap());
        let w = MomentWindow::new(1, 0.01, Some(1.0)).unwrap();
        assert!(joint_moment_membership(&[&xi], &uniform01(), &w).unwrap());
    }

    #[test]
    fn window_validation() {
        assert!(MomentWindow::new(0, 0.1, None).is_err());
        assert!(MomentWindow::new(1, 0.0, None).is_err());
        assert!(MomentWindow::new(1, f64::NAN, None).is_err());
        assert!(MomentWindow::new(1, 0.1, Some(-1.0)).is_err());
    }

    #[test]
    fn length_mismatch_is_an_error() {
        let oracle =
            MomentOracle::new(DistributionSpec::tilted(Ratio::new(1, 2)).unwrap()).unwrap();
        let w = MomentWindow::new(2, 0.1, None).unwrap();
        assert!(joint_moment_membership(&[&[0.5, 0.5], &[0.5]], &oracle, &w).is_err());
        assert!(joint_moment_membership(&[&[0.5, 0.5]], &oracle, &w).is_err());
    }

    #[test]
    fn common_permutation_is_invisible() {
        let oracle =
            MomentOracle::new(DistributionSpec::tilted(Ratio::new(1, 2)).unwrap()).unwrap();
        let band = MomentBand::new(&oracle, MomentWindow::new(2, 0.05, None).unwrap()).unwrap();
        let n = 12;
        let xi: Vec<f64> = (0..n)
            .map(|j| (2 * j + 1) as f64 / (2 * n) as f64)
            .collect();
        let mut members = 0;
        for seed in 0..1000u64 {
            let s1 = random_permutation(n, 3 * seed).unwrap();
            let s2 = random_permutation(n, 3 * seed + 1).unwrap();
            let c = random_permutation(n, 3 * seed + 2).unwrap();
            let a = band
                .contains(&[&s1.apply(&xi).unwrap(), &s2.apply(&xi).unwrap()])
                .unwrap();
            let c1 = c.compose(&s1).unwrap();
            let c2 = c.compose(&s2).unwrap();
            let b = band
                .contains(&[&c1.apply(&xi).unwrap(), &c2.apply(&xi).unwrap()])
                .unwrap();
            assert_eq!(a, b);
            members += usize::from(a);
        }
        assert!(members > 0 && members < 1000, "{members}");
    }
}

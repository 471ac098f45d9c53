//! Micro-states of finite-alphabet random variables.
//!
//! For a joint pmf `p` of `(X_1, …, X_n)` on `X^n` a tuple of permutations
//! `(σ_1, …, σ_n) ∈ S_N^n` is a micro-state at radius `δ` when there are
//! canonical sorted sequences `x_i ∈ X^N_≤` (equivalently, types) such that
//! the joint type of `(σ_1(x_1), …, σ_n(x_n))` lies strictly within `δ` of
//! `p` in every cell. Bands are decided in exact rational arithmetic.
//!
//! Membership is invariant under a common left factor `σ ↦ (σσ_1, …, σσ_n)`
//! since that permutes the positions of all sequences at once. Counting and
//! sampling therefore fix `σ_1 = id` and scale by `N!`.

mod counting;
mod inclusion;
pub(crate) mod mc;
mod membership;

pub use counting::{
    brute_force_count, brute_force_count_with_budget, microstate_log_lower_bound,
    microstate_log_upper_bound, BruteForceCount, DEFAULT_BRUTE_FORCE_BUDGET,
};
pub use inclusion::{approximating_inclusion_check, InclusionReport, InclusionViolation};
pub use mc::microstate_mc_estimate;
pub use membership::{
    membership_by_definition, microstate_membership, xi_microstate_membership, MicrostateBand,
    Scratch,
};

use num_bigint::BigUint;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::error::{domain, Result};
use crate::logspace::{
    ln_multinomial, log_sum_exp, multinomial, LogCount, EXACT_FACTORIAL_THRESHOLD,
};
use crate::types::{format_rational, ProbVector, Rational, TypeVector};

/// Radius `δ` and sequence length `N` of a band.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BandSpec {
    pub delta: Rational,
    pub n_len: usize,
}

impl BandSpec {
    pub fn new(delta: Rational, n_len: usize) -> Result<Self> {
        if !delta.is_positive() {
            return Err(domain(format!(
                "delta must be positive, got {}",
                format_rational(&delta)
            )));
        }
        if n_len == 0 {
            return Err(domain("N must be at least 1"));
        }
        Ok(BandSpec { delta, n_len })
    }

    pub fn with_delta(&self, delta: Rational) -> Result<Self> {
        BandSpec::new(delta, self.n_len)
    }
}

/// Inclusive range of counts `c ∈ 0..=N` with `|c/N − p| < δ`, or `None`.
pub fn count_interval(p: Rational, delta: Rational, n_len: usize) -> Option<(usize, usize)> {
    let wide = |r: Rational| Ratio::<i128>::new(i128::from(*r.numer()), i128::from(*r.denom()));
    let n = Ratio::from_integer(n_len as i128);
    let low = n * (wide(p) - wide(delta));
    let high = n * (wide(p) + wide(delta));
    // strict: smallest integer above `low`, largest below `high`
    let lo = low.floor().to_integer() + 1;
    let hi = high.ceil().to_integer() - 1;
    let lo = lo.max(0);
    let hi = hi.min(n_len as i128);
    (lo <= hi).then_some((lo as usize, hi as usize))
}

/// Calls `f` on every integer vector `c` with `lo_k ≤ c_k ≤ hi_k` and
/// `Σ c = total`, in lexicographic order. Partial sums are pruned against
/// the reachable range of the remaining coordinates.
pub(crate) fn for_each_in_box(
    bounds: &[(usize, usize)],
    total: usize,
    f: &mut dyn FnMut(&[usize]),
) {
    let k = bounds.len();
    if k == 0 {
        return;
    }
    let mut min_rest = vec![0usize; k + 1];
    let mut max_rest = vec![0usize; k + 1];
    for i in (0..k).rev() {
        min_rest[i] = min_rest[i + 1] + bounds[i].0;
        max_rest[i] = max_rest[i + 1].saturating_add(bounds[i].1);
    }
    if total < min_rest[0] || total > max_rest[0] {
        return;
    }
    let mut current = vec![0usize; k];
    fn rec(
        i: usize,
        left: usize,
        bounds: &[(usize, usize)],
        min_rest: &[usize],
        max_rest: &[usize],
        current: &mut [usize],
        f: &mut dyn FnMut(&[usize]),
    ) {
        let k = bounds.len();
        if i + 1 == k {
            current[i] = left;
            f(current);
            return;
        }
        let lo = bounds[i].0.max(left.saturating_sub(max_rest[i + 1]));
        let hi = bounds[i].1.min(left - min_rest[i + 1]);
        for c in lo..=hi {
            current[i] = c;
            rec(i + 1, left - c, bounds, min_rest, max_rest, current, f);
        }
    }
    rec(0, total, bounds, &min_rest, &max_rest, &mut current, f);
}

/// Per-cell count ranges of a band around `weights`; `None` if some cell
/// admits no count.
pub(crate) fn band_bounds(
    weights: &[Rational],
    delta: Rational,
    n_len: usize,
) -> Option<Vec<(usize, usize)>> {
    weights
        .iter()
        .map(|&w| count_interval(w, delta, n_len))
        .collect()
}

/// All types `τ` of length-`N` sequences with `|τ(t)/N − p(t)| < δ` for
/// every symbol `t`.
pub fn enumerate_band_types(p: &ProbVector, band: &BandSpec) -> Vec<TypeVector> {
    let mut out = Vec::new();
    if let Some(bounds) = band_bounds(p.weights(), band.delta, band.n_len) {
        for_each_in_box(&bounds, band.n_len, &mut |c| {
            out.push(TypeVector::new(c.to_vec()).expect("nonempty alphabet"));
        });
    }
    out
}

/// `log #Δ(p; N, δ)`: the number of `δ`-typical sequences, summed over the
/// band's type classes.
pub fn typical_set_log_count(p: &ProbVector, band: &BandSpec) -> LogCount {
    typical_set_log_count_with_threshold(p, band, EXACT_FACTORIAL_THRESHOLD)
}

pub fn typical_set_log_count_with_threshold(
    p: &ProbVector,
    band: &BandSpec,
    threshold: u64,
) -> LogCount {
    let Some(bounds) = band_bounds(p.weights(), band.delta, band.n_len) else {
        return LogCount::zero();
    };
    if band.n_len as u64 <= threshold {
        let mut total = BigUint::zero();
        for_each_in_box(&bounds, band.n_len, &mut |c| total += multinomial(c));
        LogCount::from_exact(total)
    } else {
        let mut terms = Vec::new();
        for_each_in_box(&bounds, band.n_len, &mut |c| terms.push(ln_multinomial(c)));
        LogCount::from_log(log_sum_exp(&terms))
    }
}

/// Largest-remainder rounding of `N·p` to a type: floors first, then the
/// leftover units go to the largest fractional parts (lower index on ties).
pub fn largest_remainder_type(p: &ProbVector, n_len: usize) -> TypeVector {
    let n = Ratio::from_integer(n_len as i64);
    let scaled: Vec<Rational> = p.weights().iter().map(|w| n * w).collect();
    let mut counts: Vec<usize> = scaled
        .iter()
        .map(|s| s.floor().to_integer() as usize)
        .collect();
    let leftover = n_len - counts.iter().sum::<usize>();
    let mut order: Vec<usize> = (0..counts.len()).collect();
    order.sort_by(|&a, &b| scaled[b].fract().cmp(&scaled[a].fract()).then(a.cmp(&b)));
    for &t in order.iter().take(leftover) {
        counts[t] += 1;
    }
    TypeVector::new(counts).expect("nonempty alphabet")
}

/// Canonical sorted sequence in `X^N_≤` whose type is the largest-remainder
/// rounding of `N·p`, as symbol indices.
pub fn discrete_quantile_sequence(p: &ProbVector, n_len: usize) -> Result<Vec<usize>> {
    if n_len == 0 {
        return Err(domain("N must be at least 1"));
    }
    Ok(largest_remainder_type(p, n_len).canonical_sequence())
}

use std::collections::HashMap;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::logspace::{
    factorial, ln_factorial, ln_multinomial, log_sum_exp, multinomial, LogCount,
    EXACT_FACTORIAL_THRESHOLD,
};
use crate::perm::Permutation;
use crate::types::{decode_cell, JointProbTensor, Rational};

use super::membership::MicrostateBand;
use super::{band_bounds, for_each_in_box, BandSpec};

/// Default cap on the number of anchored tuples `(N!)^{n−1}` a brute-force
/// enumeration may visit.
pub const DEFAULT_BRUTE_FORCE_BUDGET: u128 = 40_000_000;

const CHUNK: u64 = 4096;

/// Exhaustive count of micro-state tuples with `σ_1 = id`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BruteForceCount {
    pub n_len: usize,
    pub arity: usize,
    pub anchored_members: u64,
    pub anchored_total: u64,
}

impl BruteForceCount {
    /// Number of member tuples in all of `S_N^n`.
    pub fn count(&self) -> BigUint {
        BigUint::from(self.anchored_members) * factorial(self.n_len as u64)
    }

    /// `(N!)^n`.
    pub fn total(&self) -> BigUint {
        BigUint::from(self.anchored_total) * factorial(self.n_len as u64)
    }

    /// Uniform measure of the micro-state set.
    pub fn ratio(&self) -> f64 {
        self.anchored_members as f64 / self.anchored_total as f64
    }

    pub fn log_count(&self) -> LogCount {
        LogCount::from_exact(self.count())
    }
}

pub fn brute_force_count(p: &JointProbTensor, band: &BandSpec) -> Result<BruteForceCount> {
    brute_force_count_with_budget(p, band, DEFAULT_BRUTE_FORCE_BUDGET)
}

/// Anchored tuples `(N!)^{n−1}`, saturating.
pub(crate) fn anchored_tuple_count(n_len: usize, arity: usize) -> u128 {
    let mut f: u128 = 1;
    for k in 2..=n_len as u128 {
        f = match f.checked_mul(k) {
            Some(v) => v,
            None => return u128::MAX,
        };
    }
    let mut total: u128 = 1;
    for _ in 1..arity {
        total = match total.checked_mul(f) {
            Some(v) => v,
            None => return u128::MAX,
        };
    }
    total
}

pub(crate) fn check_budget(n_len: usize, arity: usize, budget: u128) -> Result<u64> {
    let needed = anchored_tuple_count(n_len, arity);
    if needed > budget || needed > u64::MAX as u128 {
        return Err(Error::BudgetExceeded { needed, budget });
    }
    Ok(needed as u64)
}

/// Anchored tuple number `rank` as `(id, σ_2, …, σ_n)`, writing into `out`.
pub(crate) fn anchored_tuple(n_len: usize, per: u64, mut rank: u64, out: &mut [Permutation]) {
    for sigma in out.iter_mut().skip(1) {
        *sigma = Permutation::unrank(n_len, u128::from(rank % per));
        rank /= per;
    }
}

/// Visits every anchored tuple in parallel and counts those accepted by
/// `accept`. The sum is an integer reduction, so it is schedule-free.
pub(crate) fn count_anchored<S, I, F>(
    n_len: usize,
    arity: usize,
    total: u64,
    init: I,
    accept: F,
) -> u64
where
    I: Fn() -> S + Sync,
    F: Fn(&mut S, &[Permutation]) -> bool + Sync,
{
    let per = anchored_tuple_count(n_len, 2) as u64;
    let chunks = total.div_ceil(CHUNK);
    (0..chunks)
        .into_par_iter()
        .map(|chunk| {
            let mut sigmas = vec![Permutation::identity(n_len); arity];
            let mut state = init();
            let end = ((chunk + 1) * CHUNK).min(total);
            (chunk * CHUNK..end)
                .filter(|&rank| {
                    anchored_tuple(n_len, per, rank, &mut sigmas);
                    accept(&mut state, &sigmas)
                })
                .count() as u64
        })
        .sum()
}

/// Exact `#Δ_sym` by enumerating every `(σ_2, …, σ_n)` with `σ_1 = id`;
/// refuses when `(N!)^{n−1}` exceeds `budget`.
pub fn brute_force_count_with_budget(
    p: &JointProbTensor,
    band: &BandSpec,
    budget: u128,
) -> Result<BruteForceCount> {
    let arity = p.arity();
    let total = check_budget(band.n_len, arity, budget)?;
    let tester = MicrostateBand::new(p, band)?;
    let anchored_members = count_anchored(
        band.n_len,
        arity,
        total,
        || tester.scratch(),
        |scratch, sigmas| tester.contains_with(sigmas, scratch),
    );
    Ok(BruteForceCount {
        n_len: band.n_len,
        arity,
        anchored_members,
        anchored_total: total,
    })
}

/// Marginal counts of a joint count tensor, `arity` blocks of `d`.
fn joint_marginals(counts: &[usize], d: usize, arity: usize) -> Vec<usize> {
    let mut out = vec![0usize; arity * d];
    let mut digits = vec![0usize; arity];
    for (cell, &c) in counts.iter().enumerate() {
        if c == 0 {
            continue;
        }
        decode_cell(cell, d, &mut digits);
        for (i, &t) in digits.iter().enumerate() {
            out[i * d + t] += c;
        }
    }
    out
}

fn factorial_product(counts: &[usize]) -> BigUint {
    counts
        .iter()
        .fold(BigUint::one(), |acc, &c| acc * factorial(c as u64))
}

fn ln_factorial_product(counts: &[usize]) -> f64 {
    counts.iter().map(|&c| ln_factorial(c as u64)).sum()
}

/// Certified upper bound on `#Δ_sym`: the number of sequence tuples with a
/// joint type in the band, times the largest stabilizer `Π_t (Nτ(t))!` of
/// each variable over marginal types within `d^{n−1}δ`.
pub fn microstate_log_upper_bound(p: &JointProbTensor, band: &BandSpec) -> Result<LogCount> {
    let n_len = band.n_len;
    let (d, arity) = (p.d(), p.arity());
    let Some(bounds) = band_bounds(p.weights(), band.delta, n_len) else {
        return Ok(LogCount::zero());
    };
    let exact = n_len as u64 <= EXACT_FACTORIAL_THRESHOLD;
    let mut sum = BigUint::zero();
    let mut terms = Vec::new();
    for_each_in_box(&bounds, n_len, &mut |c| {
        if exact {
            sum += multinomial(c);
        } else {
            terms.push(ln_multinomial(c));
        }
    });
    if (exact && sum.is_zero()) || (!exact && terms.is_empty()) {
        return Ok(LogCount::zero());
    }
    let radius = band.delta * Rational::from_integer(d.pow(arity as u32 - 1) as i64);
    let mut stabilizers = Vec::with_capacity(arity);
    let mut ln_stabilizers = 0.0;
    for i in 0..arity {
        let marginal = p.marginal(i)?;
        let mbounds = band_bounds(marginal.weights(), radius, n_len)
            .expect("a nonempty joint band has nonempty marginal bands");
        let mut best = BigUint::zero();
        let mut ln_best = f64::NEG_INFINITY;
        for_each_in_box(&mbounds, n_len, &mut |c| {
            if exact {
                let v = factorial_product(c);
                if v > best {
                    best = v;
                }
            } else {
                ln_best = ln_best.max(ln_factorial_product(c));
            }
        });
        stabilizers.push(best);
        ln_stabilizers += ln_best;
    }
    if exact {
        let product = stabilizers.into_iter().fold(sum, |acc, s| acc * s);
        Ok(LogCount::from_exact(product))
    } else {
        Ok(LogCount::from_log(log_sum_exp(&terms) + ln_stabilizers))
    }
}

/// Certified lower bound on `#Δ_sym`: for one fixed marginal-type tuple
/// the cosets `σ_1 S(τ_1) × … × σ_n S(τ_n)` of distinct member tuples are
/// disjoint, so each joint type with those marginals contributes its class
/// size times the stabilizer orders. The best tuple is kept.
pub fn microstate_log_lower_bound(p: &JointProbTensor, band: &BandSpec) -> Result<LogCount> {
    let n_len = band.n_len;
    let (d, arity) = (p.d(), p.arity());
    let Some(bounds) = band_bounds(p.weights(), band.delta, n_len) else {
        return Ok(LogCount::zero());
    };
    let exact = n_len as u64 <= EXACT_FACTORIAL_THRESHOLD;
    let mut exact_groups: HashMap<Vec<usize>, BigUint> = HashMap::new();
    let mut log_groups: HashMap<Vec<usize>, Vec<f64>> = HashMap::new();
    for_each_in_box(&bounds, n_len, &mut |c| {
        let key = joint_marginals(c, d, arity);
        if exact {
            *exact_groups.entry(key).or_default() += multinomial(c);
        } else {
            log_groups.entry(key).or_default().push(ln_multinomial(c));
        }
    });
    if exact {
        let best = exact_groups
            .into_iter()
            .map(|(key, classes)| classes * factorial_product(&key))
            .max();
        Ok(best.map_or_else(LogCount::zero, LogCount::from_exact))
    } else {
        let best = log_groups
            .into_iter()
            .map(|(key, terms)| log_sum_exp(&terms) + ln_factorial_product(&key))
            .fold(f64::NEG_INFINITY, f64::max);
        Ok(if best == f64::NEG_INFINITY {
            LogCount::zero()
        } else {
            LogCount::from_log(best)
        })
    }
}

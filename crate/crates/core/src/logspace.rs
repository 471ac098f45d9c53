//! Log-domain counting: factorials, multinomials, log-sum-exp.

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use statrs::function::gamma::ln_gamma;

/// Largest `N` for which factorial-based counts are evaluated in exact
/// integer arithmetic by default.
pub const EXACT_FACTORIAL_THRESHOLD: u64 = 170;

/// A nonnegative count held by its natural log. `log_value = -inf` is zero.
///
/// Counts produced by the exact integer path keep the integer itself so that
/// brackets can be compared without rounding.
#[derive(Clone, Debug, PartialEq)]
pub struct LogCount {
    pub log_value: f64,
    exact: Option<BigUint>,
}

impl LogCount {
    pub fn zero() -> Self {
        LogCount {
            log_value: f64::NEG_INFINITY,
            exact: Some(BigUint::zero()),
        }
    }

    pub fn from_exact(value: BigUint) -> Self {
        LogCount {
            log_value: ln_biguint(&value),
            exact: Some(value),
        }
    }

    pub fn from_log(log_value: f64) -> Self {
        LogCount {
            log_value,
            exact: None,
        }
    }

    pub fn is_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn exact(&self) -> Option<&BigUint> {
        self.exact.as_ref()
    }

    pub fn is_zero(&self) -> bool {
        self.log_value == f64::NEG_INFINITY
    }

    /// `-(1/N) · log(count / (N!)^n)`: the normalized rate of a count of
    /// permutation tuples in `S_N^n`.
    pub fn sym_rate(&self, n_len: usize, arity: usize) -> f64 {
        if self.is_zero() {
            return f64::INFINITY;
        }
        -(self.log_value - arity as f64 * ln_factorial(n_len as u64)) / n_len as f64
    }
}

/// Natural log of an arbitrary-size unsigned integer; `-inf` for zero.
pub fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return f64::NEG_INFINITY;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().map_or(f64::NAN, f64::ln);
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().unwrap_or(f64::NAN);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// `ln n!` via the log-gamma function.
pub fn ln_factorial(n: u64) -> f64 {
    if n < 2 {
        0.0
    } else {
        ln_gamma(n as f64 + 1.0)
    }
}

/// `(Σ c)! / Π c!` in exact integer arithmetic.
pub fn multinomial(counts: &[usize]) -> BigUint {
    // product of binomials avoids the full factorials
    let mut acc = BigUint::one();
    let mut total: u64 = 0;
    for &c in counts {
        for k in 1..=c as u64 {
            total += 1;
            acc *= total;
            acc /= k;
        }
    }
    acc
}

/// `log((Σ c)! / Π c!)`, exact when `Σ c ≤ EXACT_FACTORIAL_THRESHOLD`.
pub fn log_multinomial(counts: &[usize]) -> LogCount {
    log_multinomial_with_threshold(counts, EXACT_FACTORIAL_THRESHOLD)
}

pub fn log_multinomial_with_threshold(counts: &[usize], threshold: u64) -> LogCount {
    let total: usize = counts.iter().sum();
    if total as u64 <= threshold {
        LogCount::from_exact(multinomial(counts))
    } else {
        LogCount::from_log(ln_multinomial(counts))
    }
}

/// Floating-point `log((Σ c)! / Π c!)` through log-gamma.
pub fn ln_multinomial(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    ln_factorial(total as u64) - counts.iter().map(|&c| ln_factorial(c as u64)).sum::<f64>()
}

/// `log Σ exp(t)`, shifted by the maximum; `-inf` for an empty list.
pub fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn multinomial_examples() {
        assert!((log_multinomial(&[2, 2]).log_value - 6f64.ln()).abs() < 1e-15);
        assert_eq!(log_multinomial(&[7]).log_value, 0.0);
        assert_eq!(
            log_multinomial(&[1, 1, 1]).exact(),
            Some(&BigUint::from(6u32))
        );
        assert!(log_multinomial(&[80, 90]).is_exact());
        assert!(!log_multinomial(&[80, 90, 1]).is_exact());
    }

    #[test]
    fn log_sum_exp_examples() {
        assert!((log_sum_exp(&[0.0, 3f64.ln()]) - 4f64.ln()).abs() < 1e-15);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[-2.5]), -2.5);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY, 1.0]), 1.0);
        assert!((log_sum_exp(&[1000.0, 1000.0]) - (1000.0 + 2f64.ln())).abs() < 1e-12);
    }

    #[test]
    fn big_logs() {
        let f = factorial(500);
        assert!((ln_biguint(&f) - ln_factorial(500)).abs() < 1e-9);
        assert_eq!(ln_biguint(&BigUint::zero()), f64::NEG_INFINITY);
    }

    #[test]
    fn sym_rate_of_full_group_is_zero() {
        let full = LogCount::from_exact(factorial(6) * factorial(6));
        assert!(full.sym_rate(6, 2).abs() < 1e-12);
        assert_eq!(LogCount::zero().sym_rate(6, 2), f64::INFINITY);
    }

    proptest! {
        #[test]
        fn exact_and_lgamma_paths_agree(counts in prop::collection::vec(0usize..60, 1..5)) {
            prop_assume!((1..=170).contains(&counts.iter().sum::<usize>()));
            let exact = log_multinomial_with_threshold(&counts, 170);
            let approx = log_multinomial_with_threshold(&counts, 0);
            prop_assert!(exact.is_exact() && !approx.is_exact());
            prop_assert!((exact.log_value - approx.log_value).abs() < 1e-9);
        }

        #[test]
        fn log_sum_exp_is_order_invariant(mut terms in prop::collection::vec(-50.0f64..50.0, 0..12)) {
            let a = log_sum_exp(&terms);
            terms.reverse();
            let half = terms.len() / 2;
            terms.rotate_left(half);
            let b = log_sum_exp(&terms);
            prop_assert!(a == b || (a - b).abs() < 1e-12);
        }
    }
}

//! Built-in verification suite: oracle equivalences and the counting
//! inequalities the brackets rest on, each reported as one row.

use num_bigint::BigUint;
use num_rational::Ratio;
use rayon::prelude::*;

use crate::continuous::{approximating_inclusion_spot_check, MomentWindow};
use crate::discrete::{
    approximating_inclusion_check, brute_force_count, membership_by_definition,
    microstate_log_lower_bound, microstate_log_upper_bound, typical_set_log_count, BandSpec,
    MicrostateBand,
};
use crate::entropy::{shannon_entropy_of, DistributionSpec};
use crate::estimate::LogProbEstimate;
use crate::logspace::{ln_biguint, multinomial};
use crate::perm::{random_permutation, trial_seed, Permutation};
use crate::types::{type_of_indices, JointProbTensor, ProbVector, Rational};

use super::rows::{RowStatus, StudyRow};

/// Outcome of one property check.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub cases: u64,
    pub violations: u64,
    pub max_n: usize,
    pub first_violation: Option<String>,
}

impl CheckResult {
    fn new(name: &'static str, max_n: usize) -> Self {
        CheckResult {
            name,
            cases: 0,
            violations: 0,
            max_n,
            first_violation: None,
        }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.cases += 1;
        if !ok {
            self.violations += 1;
            if self.first_violation.is_none() {
                self.first_violation = Some(describe());
            }
        }
    }

    fn merge(mut self, other: CheckResult) -> Self {
        self.cases += other.cases;
        self.violations += other.violations;
        if self.first_violation.is_none() {
            self.first_violation = other.first_violation;
        }
        self
    }

    pub fn passed(&self) -> bool {
        self.violations == 0 && self.cases > 0
    }
}

fn r(n: i64, d: i64) -> Rational {
    Ratio::new(n, d)
}

/// Joint pmfs on two bits used by the exhaustive checks: perfectly
/// correlated fair bits, a tilted table, and a product.
pub fn small_pmfs() -> Vec<(&'static str, JointProbTensor)> {
    vec![
        (
            "diagonal",
            JointProbTensor::from_ratios(2, 2, &[(1, 2), (0, 1), (0, 1), (1, 2)])
                .expect("valid pmf"),
        ),
        (
            "tilted",
            JointProbTensor::from_ratios(2, 2, &[(2, 5), (1, 10), (1, 10), (2, 5)])
                .expect("valid pmf"),
        ),
        (
            "product",
            JointProbTensor::from_ratios(2, 2, &[(1, 4), (1, 4), (1, 4), (1, 4)])
                .expect("valid pmf"),
        ),
    ]
}

const SMALL_DELTAS: [(i64, i64); 2] = [(3, 20), (3, 10)];

/// `lower ≤ brute ≤ upper` in exact integers, N ≤ `max_n`.
pub fn check_sandwich(max_n: usize) -> CheckResult {
    let mut res = CheckResult::new("bracket_sandwich", max_n);
    for (name, p) in small_pmfs() {
        for n in 2..=max_n {
            for (a, b) in SMALL_DELTAS {
                let band = BandSpec::new(r(a, b), n).expect("valid band");
                let brute = brute_force_count(&p, &band).map(|c| c.count());
                let up = microstate_log_upper_bound(&p, &band);
                let lo = microstate_log_lower_bound(&p, &band);
                let ok = match (&brute, &up, &lo) {
                    (Ok(c), Ok(u), Ok(l)) => match (u.exact(), l.exact()) {
                        (Some(u), Some(l)) => l <= c && c <= u,
                        _ => false,
                    },
                    _ => false,
                };
                res.record(ok, || format!("{name} N={n} δ={a}/{b}"));
            }
        }
    }
    res
}

/// Pruned membership against the unpruned definition on every tuple in
/// `S_N × S_N`, N ≤ `max_n`.
pub fn check_oracle_equivalence(max_n: usize) -> CheckResult {
    let mut res = CheckResult::new("membership_oracle", max_n);
    for (name, p) in small_pmfs() {
        for n in 2..=max_n {
            let total: u128 = (1..=n as u128).product();
            let perms: Vec<Permutation> = (0..total).map(|k| Permutation::unrank(n, k)).collect();
            for (a, b) in SMALL_DELTAS {
                let band = BandSpec::new(r(a, b), n).expect("valid band");
                let tester = MicrostateBand::new(&p, &band).expect("valid band");
                let part = perms
                    .par_iter()
                    .map(|s1| {
                        let mut sub = CheckResult::new("membership_oracle", max_n);
                        for s2 in &perms {
                            let sigmas = [s1.clone(), s2.clone()];
                            let fast = tester.contains(&sigmas).ok();
                            let slow = membership_by_definition(&sigmas, &p, &band).ok();
                            sub.record(fast.is_some() && fast == slow, || {
                                format!(
                                    "{name} N={n} δ={a}/{b} σ=({:?}, {:?})",
                                    s1.images(),
                                    s2.images()
                                )
                            });
                        }
                        sub
                    })
                    .reduce(
                        || CheckResult::new("membership_oracle", max_n),
                        CheckResult::merge,
                    );
                res = res.merge(part);
            }
        }
    }
    res
}

/// Membership is unchanged by a common left factor on `trials` random
/// tuples.
pub fn check_left_invariance(trials: u64, seed: u64) -> CheckResult {
    let n = 7;
    let mut res = CheckResult::new("left_invariance", n);
    let p = &small_pmfs()[1].1;
    let band = BandSpec::new(r(3, 20), n).expect("valid band");
    let tester = MicrostateBand::new(p, &band).expect("valid band");
    for t in 0..trials {
        let s = |k: u64| random_permutation(n, trial_seed(seed, 3 * t + k)).expect("n ≥ 1");
        let (s1, s2, c) = (s(0), s(1), s(2));
        let a = tester.contains(&[s1.clone(), s2.clone()]).ok();
        let moved = [
            c.compose(&s1).expect("sizes"),
            c.compose(&s2).expect("sizes"),
        ];
        let b = tester.contains(&moved).ok();
        res.record(a.is_some() && a == b, || format!("trial {t}"));
    }
    res
}

/// `(N+1)^{−d} e^{N S(τ)} ≤ N!/Π(Nτ(t))! ≤ e^{N S(τ)}` for all types,
/// N ≤ `max_n`, d ≤ `max_d`.
pub fn check_type_class_bound(max_n: usize, max_d: usize) -> CheckResult {
    (1..=max_d)
        .flat_map(|d| (1..=max_n).map(move |n| (d, n)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(d, n)| {
            let mut res = CheckResult::new("type_class_bound", max_n);
            let nf = n as f64;
            crate::discrete::for_each_in_box(&vec![(0, n); d], n, &mut |c| {
                let ln_count = ln_biguint(&multinomial(c));
                let freqs: Vec<Rational> = c.iter().map(|&k| r(k as i64, n as i64)).collect();
                let ns = nf * shannon_entropy_of(&freqs);
                let slack = 1e-9 * ns.abs().max(1.0);
                let lower = ns - d as f64 * (nf + 1.0).ln();
                res.record(lower <= ln_count + slack && ln_count <= ns + slack, || {
                    format!("d={d} N={n} τ={c:?}")
                });
            });
            res
        })
        .reduce(
            || CheckResult::new("type_class_bound", max_n),
            CheckResult::merge,
        )
}

/// `|(1/N)(log N! − Σ log (Nτ(t))!) − S(τ)| ≤ (d+2) log(N+1)/N` for all
/// types, 2 ≤ N ≤ `max_n`, d ≤ `max_d`, factorials evaluated exactly.
pub fn check_stirling_bound(max_n: usize, max_d: usize) -> CheckResult {
    let mut ln_fact = Vec::with_capacity(max_n + 1);
    let mut f = BigUint::from(1u32);
    for k in 0..=max_n {
        if k > 0 {
            f *= k;
        }
        ln_fact.push(ln_biguint(&f));
    }
    (1..=max_d)
        .flat_map(|d| (2..=max_n).map(move |n| (d, n)))
        .collect::<Vec<_>>()
        .into_par_iter()
        .map(|(d, n)| {
            let mut res = CheckResult::new("stirling_bound", max_n);
            let nf = n as f64;
            let bound = (d as f64 + 2.0) * (nf + 1.0).ln() / nf;
            crate::discrete::for_each_in_box(&vec![(0, n); d], n, &mut |c| {
                let lhs = (ln_fact[n] - c.iter().map(|&k| ln_fact[k]).sum::<f64>()) / nf;
                let s: f64 = c
                    .iter()
                    .filter(|&&k| k > 0)
                    .map(|&k| {
                        let q = k as f64 / nf;
                        -q * q.ln()
                    })
                    .sum();
                res.record((lhs - s).abs() <= bound, || format!("d={d} N={n} τ={c:?}"));
            });
            res
        })
        .reduce(
            || CheckResult::new("stirling_bound", max_n),
            CheckResult::merge,
        )
}

/// Typical-set counts against enumeration of `{0,1}^N`, N ≤ `max_n`.
pub fn check_typical_count(max_n: usize) -> CheckResult {
    let mut res = CheckResult::new("typical_count", max_n);
    let p = ProbVector::from_ratios(&[(1, 3), (2, 3)]).expect("valid pmf");
    for n in 1..=max_n {
        for delta in [r(1, 50), r(1, 10), r(1, 4), r(1, 2), r(2, 1)] {
            let band = BandSpec::new(delta, n).expect("valid band");
            let mut brute = 0u64;
            for mask in 0u64..(1 << n) {
                let seq: Vec<usize> = (0..n).map(|j| ((mask >> j) & 1) as usize).collect();
                let t = type_of_indices(2, &seq).expect("binary");
                let inside = t
                    .frequencies()
                    .iter()
                    .zip(p.weights())
                    .all(|(f, w)| (f - w) < delta && (w - f) < delta);
                brute += u64::from(inside);
            }
            let count = typical_set_log_count(&p, &band);
            res.record(count.exact() == Some(&BigUint::from(brute)), || {
                format!("N={n}")
            });
        }
    }
    res
}

/// Exhaustive inclusion of the small band into the band on approximating
/// sequences, diagonal bits at N = 4, δ = 9/10.
pub fn check_inclusion() -> CheckResult {
    let mut res = CheckResult::new("approximating_inclusion", 4);
    let p = &small_pmfs()[0].1;
    match approximating_inclusion_check(p, 4, r(9, 10)) {
        Ok(rep) => {
            res.cases = rep.tuples_checked;
            res.violations = rep.violations.len() as u64;
            if let Some(v) = rep.violations.first() {
                res.first_violation = Some(format!("{v:?}"));
            }
        }
        Err(e) => res.record(false, || e.to_string()),
    }
    res
}

/// Forward inclusions of the moment band on sampled tuples.
pub fn check_spot_inclusion(seed: u64) -> CheckResult {
    let n = 16;
    let mut res = CheckResult::new("moment_inclusion_spot", n);
    let outcome = DistributionSpec::tilted(r(1, 2)).and_then(|spec| {
        let window = MomentWindow::new(2, 0.05, Some(1.0))?;
        approximating_inclusion_spot_check(&spec, &window, n, 2000, seed)
    });
    match outcome {
        Ok(rep) => {
            res.cases = rep.tuples_checked;
            res.violations = rep.violations.len() as u64 + u64::from(rep.cutoff_check_skipped);
            if let Some(t) = rep.violations.first() {
                res.first_violation = Some(format!("trial {t}"));
            }
        }
        Err(e) => res.record(false, || e.to_string()),
    }
    res
}

/// Zero-success estimates report `−inf` with a finite upper end.
pub fn check_zero_success() -> CheckResult {
    let mut res = CheckResult::new("zero_success_estimate", 0);
    for trials in [1, 10, 1000, 100_000] {
        let e = LogProbEstimate::from_counts(0, trials);
        let ok = e.log_p_hat == f64::NEG_INFINITY && e.ci_high.is_finite() && !e.ci_low.is_nan();
        res.record(ok, || format!("trials={trials}"));
    }
    res
}

/// Every check at its default size.
pub fn run_checks(seed: u64) -> Vec<CheckResult> {
    vec![
        check_sandwich(5),
        check_oracle_equivalence(5),
        check_left_invariance(1000, seed),
        check_type_class_bound(20, 4),
        check_stirling_bound(200, 4),
        check_typical_count(12),
        check_inclusion(),
        check_spot_inclusion(seed),
        check_zero_success(),
    ]
}

/// The suite as study rows: value is the violation count, `trials` the
/// number of cases.
pub fn run_verify_suite(study: &str, seed: u64) -> Vec<StudyRow> {
    run_checks(seed)
        .into_iter()
        .map(|c| {
            let mut row = StudyRow::new(study, c.name, c.violations as f64, seed);
            row.n = Some(c.max_n);
            row.successes = Some(c.cases - c.violations);
            row.trials = Some(c.cases);
            row.status = if c.passed() {
                RowStatus::Pass
            } else {
                RowStatus::Fail
            };
            row.note = c
                .first_violation
                .or_else(|| (c.cases == 0).then(|| "no cases ran".into()));
            row
        })
        .collect()
}

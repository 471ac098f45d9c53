use num_traits::Signed;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::perm::Permutation;
use crate::types::{format_rational, JointProbTensor, Rational, TypeVector};

use super::counting::{
    anchored_tuple, anchored_tuple_count, check_budget, DEFAULT_BRUTE_FORCE_BUDGET,
};
use super::membership::MicrostateBand;
use super::{largest_remainder_type, BandSpec};

/// A tuple in the small band that the approximating sequences miss.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InclusionViolation {
    /// Image arrays of `(σ_1, …, σ_n)`, zero-based.
    pub sigmas: Vec<Vec<usize>>,
    /// Marginal types witnessing membership in the small band.
    pub witness: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InclusionReport {
    pub n_len: usize,
    pub delta: String,
    pub delta_prime: String,
    /// Types of the approximating sequences `ξ_i(N)`.
    pub xi_types: Vec<Vec<usize>>,
    /// Anchored tuples `(id, σ_2, …, σ_n)` enumerated.
    pub tuples_checked: u64,
    /// Anchored tuples inside the small band.
    pub members: u64,
    /// True when the small band holds no joint type, so the inclusion
    /// holds trivially.
    pub vacuous: bool,
    pub violations: Vec<InclusionViolation>,
}

impl InclusionReport {
    pub fn is_clean(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks exhaustively that every tuple in `Δ_sym(δ′)`, with
/// `δ′ = δ / (3 n d^{n+1})`, also lies in the `δ`-band built on the
/// fixed approximating sequences `ξ_i(N)` (largest-remainder roundings of
/// the marginals).
///
/// Both sets are invariant under a common left factor, so only tuples with
/// `σ_1 = id` are enumerated.
pub fn approximating_inclusion_check(
    p: &JointProbTensor,
    n_len: usize,
    delta: Rational,
) -> Result<InclusionReport> {
    let band = BandSpec::new(delta, n_len)?;
    let (d, arity) = (p.d(), p.arity());
    let scale = 3 * arity as i64 * (d as i64).pow(arity as u32 + 1);
    let delta_prime = delta / Rational::from_integer(scale);
    let small = BandSpec::new(delta_prime, n_len)?;

    let marginals = p.marginals()?;
    let xi_types: Vec<TypeVector> = marginals
        .iter()
        .map(|m| largest_remainder_type(m, n_len))
        .collect();
    let mut report = InclusionReport {
        n_len,
        delta: format_rational(&delta),
        delta_prime: format_rational(&delta_prime),
        xi_types: xi_types.iter().map(|t| t.counts().to_vec()).collect(),
        tuples_checked: 0,
        members: 0,
        vacuous: false,
        violations: Vec::new(),
    };

    let small_tester = MicrostateBand::new(p, &small)?;
    if small_tester.joint_band_is_empty() {
        report.vacuous = true;
        return Ok(report);
    }
    let n = Rational::from_integer(n_len as i64);
    for (m, xi) in marginals.iter().zip(&xi_types) {
        for (&w, &c) in m.weights().iter().zip(xi.counts()) {
            let gap = Rational::from_integer(c as i64) / n - w;
            if gap.abs() >= delta_prime {
                return Err(Error::NTooSmall {
                    n: n_len,
                    delta: format_rational(&delta),
                    detail: format!(
                        "approximating type {} is not within {} of its marginal",
                        xi,
                        format_rational(&delta_prime)
                    ),
                });
            }
        }
    }

    let total = check_budget(n_len, arity, DEFAULT_BRUTE_FORCE_BUDGET)?;
    let tester = MicrostateBand::new(p, &band)?;
    let xs: Vec<Vec<usize>> = xi_types
        .iter()
        .map(TypeVector::canonical_sequence)
        .collect();
    let per = anchored_tuple_count(n_len, 2) as u64;

    let outcomes: Vec<(u64, Vec<InclusionViolation>)> = (0..total.div_ceil(1024))
        .into_par_iter()
        .map(|chunk| {
            let mut sigmas = vec![Permutation::identity(n_len); arity];
            let mut members = 0u64;
            let mut found = Vec::new();
            for rank in chunk * 1024..((chunk + 1) * 1024).min(total) {
                anchored_tuple(n_len, per, rank, &mut sigmas);
                let Some(witness) = small_tester.find_witness(&sigmas).expect("sizes match") else {
                    continue;
                };
                members += 1;
                if !tester
                    .contains_for_sequences(&sigmas, &xs)
                    .expect("sizes match")
                {
                    found.push(InclusionViolation {
                        sigmas: sigmas.iter().map(|s| s.images().to_vec()).collect(),
                        witness: witness.iter().map(|t| t.counts().to_vec()).collect(),
                    });
                }
            }
            (members, found)
        })
        .collect();

    report.tuples_checked = total;
    for (members, found) in outcomes {
        report.members += members;
        report.violations.extend(found);
    }
    Ok(report)
}

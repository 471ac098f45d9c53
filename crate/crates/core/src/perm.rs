//! Permutations of `{0, …, N-1}`, their action on vectors, and seeded sampling.
//!
//! The action follows the left-action convention
//! `σ(x)_j = x_{σ^{-1}(j)}`, so `(στ)(x) = σ(τ(x))` with `(στ)(j) = σ(τ(j))`.
//!
//! Monte Carlo trials derive their generator from
//! `ChaCha8Rng::seed_from_u64(trial_seed(master, trial))`, where
//! [`trial_seed`] is the SplitMix64 finalizer applied to
//! `master ⊕ splitmix64(trial)`. Trials therefore never depend on the order
//! in which worker threads execute them.

use std::cmp::Ordering;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Result};

/// Bijection of `{0, …, N-1}` with both directions materialized.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    images: Vec<usize>,
    inverse: Vec<usize>,
}

impl Permutation {
    /// Builds `σ` from its image array `images[j] = σ(j)`.
    pub fn new(images: Vec<usize>) -> Result<Self> {
        let n = images.len();
        if n == 0 {
            return Err(domain("permutation of an empty set"));
        }
        let mut inverse = vec![usize::MAX; n];
        for (j, &i) in images.iter().enumerate() {
            if i >= n || inverse[i] != usize::MAX {
                return Err(domain(format!("{images:?} is not a bijection of 0..{n}")));
            }
            inverse[i] = j;
        }
        Ok(Permutation { images, inverse })
    }

    /// Builds a permutation from 1-based images, as permutations are usually
    /// written by hand.
    pub fn from_one_based(images: &[usize]) -> Result<Self> {
        if images.contains(&0) {
            return Err(domain("one-based images must be positive"));
        }
        Permutation::new(images.iter().map(|&i| i - 1).collect())
    }

    pub fn identity(n: usize) -> Self {
        let images: Vec<usize> = (0..n).collect();
        Permutation {
            inverse: images.clone(),
            images,
        }
    }

    fn from_images_unchecked(images: Vec<usize>) -> Self {
        let mut inverse = vec![0; images.len()];
        for (j, &i) in images.iter().enumerate() {
            inverse[i] = j;
        }
        Permutation { images, inverse }
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn images(&self) -> &[usize] {
        &self.images
    }

    pub fn inverse_images(&self) -> &[usize] {
        &self.inverse
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(j, &i)| i == j)
    }

    pub fn inverse(&self) -> Permutation {
        Permutation {
            images: self.inverse.clone(),
            inverse: self.images.clone(),
        }
    }

    /// `self ∘ other`, i.e. `j ↦ self(other(j))`.
    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.len() != other.len() {
            return Err(domain("composing permutations of different sizes"));
        }
        Ok(Permutation::from_images_unchecked(
            other.images.iter().map(|&i| self.images[i]).collect(),
        ))
    }

    /// `σ(x)_j = x_{σ^{-1}(j)}`.
    pub fn apply<T: Clone>(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.len() {
            return Err(domain(format!(
                "vector of length {} for a permutation of size {}",
                x.len(),
                self.len()
            )));
        }
        Ok(self.inverse.iter().map(|&i| x[i].clone()).collect())
    }

    /// Unchecked form of [`Permutation::apply`] writing into `out`.
    pub(crate) fn apply_into<T: Copy>(&self, x: &[T], out: &mut [T]) {
        for (o, &i) in out.iter_mut().zip(&self.inverse) {
            *o = x[i];
        }
    }

    /// The `rank`-th permutation of `{0, …, n-1}` in lexicographic order of
    /// image arrays, decoded from the factorial number system.
    pub fn unrank(n: usize, mut rank: u128) -> Permutation {
        let mut remaining: Vec<usize> = (0..n).collect();
        let mut images = Vec::with_capacity(n);
        let mut radix: u128 = (1..n as u128).product::<u128>().max(1);
        for k in (0..n).rev() {
            let digit = (rank / radix) as usize;
            rank %= radix;
            images.push(remaining.remove(digit));
            if k > 0 {
                radix /= k as u128;
            }
        }
        Permutation::from_images_unchecked(images)
    }

    /// Uniform draw from `S_N` using `rng`.
    pub fn random_with<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Permutation {
        let mut images: Vec<usize> = (0..n).collect();
        images.shuffle(rng);
        Permutation::from_images_unchecked(images)
    }

    /// Resamples `self` in place; avoids reallocating in hot loops.
    pub(crate) fn reshuffle<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        for (j, slot) in self.images.iter_mut().enumerate() {
            *slot = j;
        }
        self.images.shuffle(rng);
        for (j, &i) in self.images.iter().enumerate() {
            self.inverse[i] = j;
        }
    }
}

/// Uniform random permutation, deterministic in `(n, seed)`.
pub fn random_permutation(n: usize, seed: u64) -> Result<Permutation> {
    if n == 0 {
        return Err(domain("N must be at least 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(Permutation::random_with(n, &mut rng))
}

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 output function.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(GOLDEN_GAMMA);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of trial `trial` under master seed `master`.
pub fn trial_seed(master: u64, trial: u64) -> u64 {
    splitmix64(master ^ splitmix64(trial))
}

pub fn trial_rng(master: u64, trial: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(trial_seed(master, trial))
}

/// Nondecreasing real vector, an element of the cone `ℝ^N_≤`.
#[derive(Clone, Debug, PartialEq)]
pub struct SortedVector {
    entries: Vec<f64>,
}

impl SortedVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.iter().any(|v| v.is_nan()) {
            return Err(domain("NaN entry"));
        }
        if entries.windows(2).any(|w| w[0] > w[1]) {
            return Err(domain("entries are not nondecreasing"));
        }
        Ok(SortedVector { entries })
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sup_norm(&self) -> f64 {
        self.entries.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.entries
    }
}

fn canonical_by<T: Clone>(s: &[T], cmp: impl Fn(&T, &T) -> Ordering) -> (Vec<T>, Permutation) {
    let mut order: Vec<usize> = (0..s.len()).collect();
    // stable: ties keep input order
    order.sort_by(|&a, &b| cmp(&s[a], &s[b]));
    let sorted = order.iter().map(|&j| s[j].clone()).collect();
    (sorted, Permutation::from_images_unchecked(order))
}

/// Writes `s = σ(x)` with `x` nondecreasing. Ties are broken stably, so
/// equal entries keep their input order and sorted input yields the identity.
pub fn sort_to_canonical(s: &[f64]) -> Result<(SortedVector, Permutation)> {
    if s.is_empty() {
        return Err(domain("N must be at least 1"));
    }
    let (sorted, sigma) = canonical_by(s, |a, b| a.total_cmp(b));
    Ok((SortedVector::new(sorted)?, sigma))
}

/// Symbol-sequence analogue of [`sort_to_canonical`] for alphabet indices.
pub fn sort_symbols_to_canonical(s: &[usize]) -> Result<(Vec<usize>, Permutation)> {
    if s.is_empty() {
        return Err(domain("N must be at least 1"));
    }
    Ok(canonical_by(s, |a, b| a.cmp(b)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::types::{kappa_mean, type_of_indices};
    use proptest::prelude::*;

    #[test]
    fn apply_uses_inverse_images() {
        let sigma = Permutation::from_one_based(&[2, 3, 1]).unwrap();
        assert_eq!(sigma.apply(&['a', 'b', 'c']).unwrap(), vec!['c', 'a', 'b']);
        let id = Permutation::identity(3);
        assert_eq!(id.apply(&['a', 'b', 'c']).unwrap(), vec!['a', 'b', 'c']);
        assert!(sigma.apply(&[1, 2]).is_err());
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![0, 0, 1]).is_err());
        assert!(Permutation::new(vec![0, 3, 1]).is_err());
        assert!(Permutation::new(vec![]).is_err());
    }

    #[test]
    fn canonical_examples() {
        let (x, sigma) = sort_to_canonical(&[3.0, 1.0, 2.0]).unwrap();
        assert_eq!(x.entries(), &[1.0, 2.0, 3.0]);
        assert_eq!(sigma, Permutation::from_one_based(&[2, 3, 1]).unwrap());
        let (_, sigma) = sort_to_canonical(&[0.5, 1.5, 2.5]).unwrap();
        assert!(sigma.is_identity());
        let (x, sigma) = sort_to_canonical(&[1.0, 1.0]).unwrap();
        assert_eq!(x.entries(), &[1.0, 1.0]);
        assert!(sigma.is_identity());
    }

    #[test]
    fn composition_is_a_left_action() {
        let s = Permutation::from_one_based(&[2, 3, 1, 4]).unwrap();
        let t = Permutation::from_one_based(&[4, 1, 3, 2]).unwrap();
        let x = [10, 20, 30, 40];
        let lhs = s.compose(&t).unwrap().apply(&x).unwrap();
        let rhs = s.apply(&t.apply(&x).unwrap()).unwrap();
        assert_eq!(lhs, rhs);
        assert!(s.compose(&s.inverse()).unwrap().is_identity());
    }

    #[test]
    fn unrank_enumerates_all_permutations() {
        let all: std::collections::HashSet<_> =
            (0..24u128).map(|r| Permutation::unrank(4, r)).collect();
        assert_eq!(all.len(), 24);
        assert!(Permutation::unrank(4, 0).is_identity());
        assert_eq!(Permutation::unrank(3, 5).images(), &[2, 1, 0]);
    }

    #[test]
    fn random_permutation_is_deterministic() {
        assert_eq!(
            random_permutation(10, 7).unwrap(),
            random_permutation(10, 7).unwrap()
        );
        assert!(random_permutation(1, 99).unwrap().is_identity());
        assert!(random_permutation(0, 1).is_err());
    }

    #[test]
    fn random_permutation_is_uniform_on_s3() {
        // chi-square with 5 degrees of freedom; 99.9% critical value 20.515
        let draws = 60_000u64;
        let mut counts = std::collections::HashMap::new();
        for seed in 0..draws {
            let p = random_permutation(3, trial_seed(12345, seed)).unwrap();
            *counts.entry(p.images().to_vec()).or_insert(0u64) += 1;
        }
        assert_eq!(counts.len(), 6);
        let expected = draws as f64 / 6.0;
        let chi2: f64 = counts
            .values()
            .map(|&c| (c as f64 - expected).powi(2) / expected)
            .sum();
        assert!(chi2 < 20.515, "chi-square {chi2}");
    }

    fn perm_and_vec() -> impl Strategy<Value = (Permutation, Vec<f64>)> {
        (1usize..12).prop_flat_map(|n| {
            (
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
                prop::collection::vec(-5.0f64..5.0, n),
            )
                .prop_map(|(images, x)| (Permutation::new(images).unwrap(), x))
        })
    }

    proptest! {
        #[test]
        fn permutation_preserves_type_and_mean((sigma, x) in perm_and_vec()) {
            let y = sigma.apply(&x).unwrap();
            prop_assert!((kappa_mean(&y) - kappa_mean(&x)).abs() < 1e-12);
            let sym: Vec<usize> = x.iter().map(|v| (v.abs() as usize) % 3).collect();
            prop_assert_eq!(
                type_of_indices(3, &sigma.apply(&sym).unwrap()).unwrap(),
                type_of_indices(3, &sym).unwrap()
            );
        }

        #[test]
        fn common_permutation_keeps_joint_moments(
            (sigma, x) in perm_and_vec(), shift in 0.1f64..2.0
        ) {
            let y: Vec<f64> = x.iter().map(|v| v * v + shift).collect();
            let prod = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(u, v)| u * v).collect::<Vec<_>>();
            let before = kappa_mean(&prod(&x, &y));
            let after = kappa_mean(&prod(&sigma.apply(&x).unwrap(), &sigma.apply(&y).unwrap()));
            prop_assert!((before - after).abs() < 1e-12);
        }

        #[test]
        fn canonical_round_trip(s in prop::collection::vec(-3i32..3, 1..15)) {
            let s: Vec<f64> = s.into_iter().map(f64::from).collect();
            let (x, sigma) = sort_to_canonical(&s).unwrap();
            prop_assert_eq!(sigma.apply(x.entries()).unwrap(), s);
        }
    }
}

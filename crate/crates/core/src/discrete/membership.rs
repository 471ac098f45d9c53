use crate::error::{domain, Result};
use crate::perm::Permutation;
use crate::types::{JointProbTensor, JointType, Rational, TypeVector};

use super::{band_bounds, count_interval, for_each_in_box, BandSpec};

/// Precomputed membership test for the permutation micro-states of a joint
/// pmf at one `(N, δ)`.
///
/// Candidate witnesses are restricted to marginal types within
/// `d^{n−1}·δ` of each marginal of `p`: a joint type within `δ` of `p`
/// in every cell has marginals within the sum of `d^{n−1}` such gaps.
#[derive(Clone, Debug)]
pub struct MicrostateBand {
    d: usize,
    arity: usize,
    n_len: usize,
    cell_bounds: Option<Vec<(usize, usize)>>,
    candidates: Vec<Vec<TypeVector>>,
    sequences: Vec<Vec<Vec<usize>>>,
}

/// Reusable buffers for [`MicrostateBand`] searches.
#[derive(Clone, Debug)]
pub struct Scratch {
    codes: Vec<Vec<usize>>,
    histogram: Vec<usize>,
}

impl MicrostateBand {
    pub fn new(p: &JointProbTensor, band: &BandSpec) -> Result<Self> {
        let d = p.d();
        let arity = p.arity();
        let n_len = band.n_len;
        let cell_bounds = band_bounds(p.weights(), band.delta, n_len);
        let radius = band.delta * Rational::from_integer(d.pow(arity as u32 - 1) as i64);
        let mut candidates = Vec::with_capacity(arity);
        for i in 0..arity {
            let marginal = p.marginal(i)?;
            let mut list = Vec::new();
            if let Some(bounds) = band_bounds(marginal.weights(), radius, n_len) {
                for_each_in_box(&bounds, n_len, &mut |c| {
                    list.push(TypeVector::new(c.to_vec()).expect("nonempty alphabet"));
                });
            }
            candidates.push(list);
        }
        let sequences = candidates
            .iter()
            .map(|list| list.iter().map(TypeVector::canonical_sequence).collect())
            .collect();
        Ok(MicrostateBand {
            d,
            arity,
            n_len,
            cell_bounds,
            candidates,
            sequences,
        })
    }

    pub fn n_len(&self) -> usize {
        self.n_len
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    /// Marginal types searched for variable `i`.
    pub fn candidates(&self, i: usize) -> &[TypeVector] {
        &self.candidates[i]
    }

    /// Whether any joint type at all lies in the band.
    pub fn joint_band_is_empty(&self) -> bool {
        match &self.cell_bounds {
            None => true,
            Some(b) => {
                let lo: usize = b.iter().map(|x| x.0).sum();
                let hi: usize = b.iter().map(|x| x.1).sum();
                !(lo..=hi).contains(&self.n_len)
            }
        }
    }

    pub fn scratch(&self) -> Scratch {
        Scratch {
            codes: vec![vec![0; self.n_len]; self.arity],
            histogram: vec![0; self.d.pow(self.arity as u32)],
        }
    }

    fn check_sigmas(&self, sigmas: &[Permutation]) -> Result<()> {
        if sigmas.len() != self.arity {
            return Err(domain(format!(
                "{} permutations for {} variables",
                sigmas.len(),
                self.arity
            )));
        }
        if sigmas.iter().any(|s| s.len() != self.n_len) {
            return Err(domain(format!(
                "permutations must act on N = {}",
                self.n_len
            )));
        }
        Ok(())
    }

    /// Whether the cell codes in `codes` form a joint type inside the band.
    fn histogram_in_band(&self, codes: &[usize], histogram: &mut [usize]) -> bool {
        let Some(bounds) = &self.cell_bounds else {
            return false;
        };
        histogram.iter_mut().for_each(|h| *h = 0);
        for &c in codes {
            histogram[c] += 1;
        }
        histogram
            .iter()
            .zip(bounds)
            .all(|(&h, &(lo, hi))| lo <= h && h <= hi)
    }

    /// Marginal-type witnesses `(x_1, …, x_n)` making `(σ_i(x_i))` a
    /// micro-state, if any.
    pub fn find_witness(&self, sigmas: &[Permutation]) -> Result<Option<Vec<TypeVector>>> {
        self.check_sigmas(sigmas)?;
        let mut scratch = self.scratch();
        Ok(self.search(sigmas, &mut scratch).map(|choice| {
            choice
                .iter()
                .enumerate()
                .map(|(i, &c)| self.candidates[i][c].clone())
                .collect()
        }))
    }

    pub fn contains(&self, sigmas: &[Permutation]) -> Result<bool> {
        self.check_sigmas(sigmas)?;
        let mut scratch = self.scratch();
        Ok(self.search(sigmas, &mut scratch).is_some())
    }

    /// Unchecked membership for hot loops; `sigmas` must match the band.
    pub(crate) fn contains_with(&self, sigmas: &[Permutation], scratch: &mut Scratch) -> bool {
        self.search(sigmas, scratch).is_some()
    }

    fn search(&self, sigmas: &[Permutation], scratch: &mut Scratch) -> Option<Vec<usize>> {
        if self.joint_band_is_empty() || self.candidates.iter().any(Vec::is_empty) {
            return None;
        }
        let mut choice = vec![0usize; self.arity];
        if self.descend(0, sigmas, scratch, &mut choice) {
            Some(choice)
        } else {
            None
        }
    }

    fn descend(
        &self,
        level: usize,
        sigmas: &[Permutation],
        scratch: &mut Scratch,
        choice: &mut [usize],
    ) -> bool {
        let inverse = sigmas[level].inverse_images();
        for (c, seq) in self.sequences[level].iter().enumerate() {
            choice[level] = c;
            // codes[level][j] = codes[level-1][j]·d + x_c[σ^{-1}(j)]
            let (before, rest) = scratch.codes.split_at_mut(level);
            let codes = &mut rest[0];
            match before.last() {
                Some(prev) => {
                    for j in 0..self.n_len {
                        codes[j] = prev[j] * self.d + seq[inverse[j]];
                    }
                }
                None => {
                    for j in 0..self.n_len {
                        codes[j] = seq[inverse[j]];
                    }
                }
            }
            let found = if level + 1 == self.arity {
                let Scratch { codes, histogram } = scratch;
                self.histogram_in_band(&codes[level], histogram)
            } else {
                self.descend(level + 1, sigmas, scratch, choice)
            };
            if found {
                return true;
            }
        }
        false
    }

    /// Whether the joint type of `(σ_1(x_1), …, σ_n(x_n))` for the given
    /// fixed sorted sequences lies in the band.
    pub fn contains_for_sequences(
        &self,
        sigmas: &[Permutation],
        xs: &[Vec<usize>],
    ) -> Result<bool> {
        self.check_sigmas(sigmas)?;
        if xs.len() != self.arity || xs.iter().any(|x| x.len() != self.n_len) {
            return Err(domain("sequences do not match the band"));
        }
        if xs.iter().flatten().any(|&t| t >= self.d) {
            return Err(domain("symbol index out of range"));
        }
        let mut codes = vec![0usize; self.n_len];
        for (sigma, x) in sigmas.iter().zip(xs) {
            let inverse = sigma.inverse_images();
            for j in 0..self.n_len {
                codes[j] = codes[j] * self.d + x[inverse[j]];
            }
        }
        let mut histogram = vec![0; self.d.pow(self.arity as u32)];
        Ok(self.histogram_in_band(&codes, &mut histogram))
    }
}

/// Whether `(σ_1, …, σ_n)` is a permutation micro-state of `p` at `band`.
pub fn microstate_membership(
    sigmas: &[Permutation],
    p: &JointProbTensor,
    band: &BandSpec,
) -> Result<bool> {
    MicrostateBand::new(p, band)?.contains(sigmas)
}

/// Membership with the sorted sequences fixed to `xs` (approximating
/// sequences) instead of searched.
pub fn xi_microstate_membership(
    sigmas: &[Permutation],
    xs: &[Vec<usize>],
    p: &JointProbTensor,
    band: &BandSpec,
) -> Result<bool> {
    MicrostateBand::new(p, band)?.contains_for_sequences(sigmas, xs)
}

/// Membership straight from the definition: every tuple of marginal types
/// is tried, without pruning, and the joint type of the moved canonical
/// sequences is compared cell by cell.
pub fn membership_by_definition(
    sigmas: &[Permutation],
    p: &JointProbTensor,
    band: &BandSpec,
) -> Result<bool> {
    let (d, arity, n_len) = (p.d(), p.arity(), band.n_len);
    if sigmas.len() != arity || sigmas.iter().any(|s| s.len() != n_len) {
        return Err(domain("permutations do not match the band"));
    }
    let mut all_types = Vec::new();
    for_each_in_box(&vec![(0, n_len); d], n_len, &mut |c| {
        all_types.push(c.to_vec())
    });
    let moved: Vec<Vec<Vec<usize>>> = sigmas
        .iter()
        .map(|s| {
            all_types
                .iter()
                .map(|c| {
                    s.apply(
                        &TypeVector::new(c.clone())
                            .expect("d ≥ 1")
                            .canonical_sequence(),
                    )
                })
                .collect::<Result<_>>()
        })
        .collect::<Result<_>>()?;
    let mut choice = vec![0usize; arity];
    loop {
        let seqs: Vec<&[usize]> = (0..arity).map(|i| moved[i][choice[i]].as_slice()).collect();
        let joint = JointType::of(d, &seqs)?;
        let inside = joint.counts().iter().zip(p.weights()).all(|(&c, &w)| {
            count_interval(w, band.delta, n_len).is_some_and(|(lo, hi)| lo <= c && c <= hi)
        });
        if inside {
            return Ok(true);
        }
        // odometer over type tuples
        let mut i = 0;
        loop {
            if i == arity {
                return Ok(false);
            }
            choice[i] += 1;
            if choice[i] < all_types.len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::perm::random_permutation;
    use num_rational::Ratio;

    fn diag() -> JointProbTensor {
        JointProbTensor::from_ratios(2, 2, &[(1, 2), (0, 1), (0, 1), (1, 2)]).unwrap()
    }

    #[test]
    fn diagonal_pairs_at_n2() {
        let band = BandSpec::new(Ratio::new(3, 10), 2).unwrap();
        let id = Permutation::identity(2);
        let swap = Permutation::new(vec![1, 0]).unwrap();
        assert!(microstate_membership(&[id.clone(), id.clone()], &diag(), &band).unwrap());
        assert!(microstate_membership(&[swap.clone(), swap.clone()], &diag(), &band).unwrap());
        assert!(!microstate_membership(&[id.clone(), swap.clone()], &diag(), &band).unwrap());
        assert!(!microstate_membership(&[swap, id], &diag(), &band).unwrap());
    }

    #[test]
    fn witness_is_reported() {
        let band = BandSpec::new(Ratio::new(3, 10), 2).unwrap();
        let id = Permutation::identity(2);
        let w = MicrostateBand::new(&diag(), &band)
            .unwrap()
            .find_witness(&[id.clone(), id])
            .unwrap()
            .unwrap();
        assert_eq!(w[0].counts(), &[1, 1]);
        assert_eq!(w[1].counts(), &[1, 1]);
    }

    #[test]
    fn wide_band_accepts_everything() {
        let p = JointProbTensor::from_ratios(2, 2, &[(2, 5), (1, 10), (1, 10), (2, 5)]).unwrap();
        let band = BandSpec::new(Ratio::from_integer(1), 6).unwrap();
        let tester = MicrostateBand::new(&p, &band).unwrap();
        for seed in 0..50 {
            let s = [
                random_permutation(6, seed).unwrap(),
                random_permutation(6, seed + 1000).unwrap(),
            ];
            assert!(tester.contains(&s).unwrap());
        }
    }

    #[test]
    fn size_mismatch_is_an_error() {
        let band = BandSpec::new(Ratio::new(3, 10), 3).unwrap();
        let id = Permutation::identity(2);
        assert!(microstate_membership(&[id.clone(), id.clone()], &diag(), &band).is_err());
        assert!(microstate_membership(&[Permutation::identity(3)], &diag(), &band).is_err());
    }

    #[test]
    fn common_left_factor_is_invisible() {
        let p = JointProbTensor::from_ratios(2, 2, &[(2, 5), (1, 10), (1, 10), (2, 5)]).unwrap();
        let band = BandSpec::new(Ratio::new(3, 20), 7).unwrap();
        let tester = MicrostateBand::new(&p, &band).unwrap();
        let mut members = 0;
        for seed in 0..1000u64 {
            let s1 = random_permutation(7, 3 * seed).unwrap();
            let s2 = random_permutation(7, 3 * seed + 1).unwrap();
            let common = random_permutation(7, 3 * seed + 2).unwrap();
            let a = tester.contains(&[s1.clone(), s2.clone()]).unwrap();
            let b = tester
                .contains(&[common.compose(&s1).unwrap(), common.compose(&s2).unwrap()])
                .unwrap();
            assert_eq!(a, b);
            members += usize::from(a);
        }
        assert!(members > 0 && members < 1000, "{members}");
    }

    #[test]
    fn pruned_search_matches_the_definition() {
        let ps = [
            diag(),
            JointProbTensor::from_ratios(2, 2, &[(2, 5), (1, 10), (1, 10), (2, 5)]).unwrap(),
            JointProbTensor::from_ratios(3, 2, &[(1, 9); 9]).unwrap(),
        ];
        for p in &ps {
            for n in 2..=4 {
                for delta in [Ratio::new(3, 20), Ratio::new(3, 10)] {
                    let band = BandSpec::new(delta, n).unwrap();
                    let tester = MicrostateBand::new(p, &band).unwrap();
                    for seed in 0..40 {
                        let s = [
                            random_permutation(n, seed).unwrap(),
                            random_permutation(n, seed + 99).unwrap(),
                        ];
                        assert_eq!(
                            tester.contains(&s).unwrap(),
                            membership_by_definition(&s, p, &band).unwrap()
                        );
                    }
                }
            }
        }
    }
}

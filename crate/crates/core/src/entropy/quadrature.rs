//! Adaptive Gauss–Kronrod (7/15) quadrature over boxes.
//!
//! One-dimensional integrals are refined globally: the interval with the
//! largest `|K15 − G7|` is bisected until the summed error estimate falls
//! below the absolute tolerance. Boxes are integrated as nested 1-D
//! integrals, the inner tolerance scaled by the outer width. Every integrand
//! evaluation counts against a shared budget; running out is an error.

use std::cell::Cell;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7]
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Clone, Copy, Debug)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub max_evals: u64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Quadrature {
            abs_tol: 1e-8,
            max_evals: 10_000_000,
        }
    }
}

struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

impl Quadrature {
    /// `∫_{lo}^{hi} f(x) dx` over the box `Π [lo_i, hi_i]`.
    pub fn integrate_box(&self, f: &dyn Fn(&[f64]) -> f64, lo: &[f64], hi: &[f64]) -> Result<f64> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(Error::Quadrature("box dimensions disagree".into()));
        }
        let evals = Cell::new(0u64);
        let mut point = vec![0.0; lo.len()];
        let cx = Ctx {
            f,
            lo,
            hi,
            evals: &evals,
            budget: self.max_evals,
        };
        cx.integrate_dim(0, self.abs_tol, &mut point)
    }

    pub fn integrate_1d(&self, f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> Result<f64> {
        self.integrate_box(&|x: &[f64]| f(x[0]), &[lo], &[hi])
    }
}

struct Ctx<'a> {
    f: &'a dyn Fn(&[f64]) -> f64,
    lo: &'a [f64],
    hi: &'a [f64],
    evals: &'a Cell<u64>,
    budget: u64,
}

impl Ctx<'_> {
    fn integrate_dim(&self, dim: usize, tol: f64, point: &mut Vec<f64>) -> Result<f64> {
        let (a, b) = (self.lo[dim], self.hi[dim]);
        if a == b {
            return Ok(0.0);
        }
        let last = dim + 1 == self.lo.len();
        let inner_tol = 0.1 * tol / (b - a).abs();
        let eval = |x: f64, point: &mut Vec<f64>| -> Result<f64> {
            point[dim] = x;
            if last {
                let n = self.evals.get() + 1;
                if n > self.budget {
                    return Err(Error::Quadrature(format!(
                        "evaluation budget of {} exhausted",
                        self.budget
                    )));
                }
                self.evals.set(n);
                let v = (self.f)(point);
                if !v.is_finite() {
                    return Err(Error::Quadrature(format!(
                        "integrand not finite at {point:?}"
                    )));
                }
                Ok(v)
            } else {
                self.integrate_dim(dim + 1, inner_tol, point)
            }
        };

        let mut heap = BinaryHeap::new();
        let first = gk15(a, b, &mut |x| eval(x, point))?;
        let mut total_error = first.error;
        heap.push(first);
        while total_error > tol {
            if heap.len() >= MAX_INTERVALS {
                return Err(Error::Quadrature(format!(
                    "no convergence after {MAX_INTERVALS} subintervals (error {total_error:e})"
                )));
            }
            let worst = heap.pop().expect("heap is nonempty");
            let mid = 0.5 * (worst.lo + worst.hi);
            if mid <= worst.lo || mid >= worst.hi {
                return Err(Error::Quadrature(
                    "subinterval below machine resolution".into(),
                ));
            }
            let left = gk15(worst.lo, mid, &mut |x| eval(x, point))?;
            let right = gk15(mid, worst.hi, &mut |x| eval(x, point))?;
            total_error += left.error + right.error - worst.error;
            heap.push(left);
            heap.push(right);
        }
        Ok(heap.iter().map(|s| s.value).sum())
    }
}

fn gk15(lo: f64, hi: f64, f: &mut dyn FnMut(f64) -> Result<f64>) -> Result<Segment> {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(center)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for k in 0..7 {
        let dx = half * XGK[k];
        let s = f(center - dx)? + f(center + dx)?;
        kronrod += WGK[k] * s;
        if k % 2 == 1 {
            gauss += WG[k / 2] * s;
        }
    }
    Ok(Segment {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let q = Quadrature::default();
        let v = q.integrate_1d(|x| x.powi(5) - 3.0 * x, -1.0, 2.0).unwrap();
        assert!((v - (64.0 / 6.0 - 1.0 / 6.0 - 4.5)).abs() < 1e-12);
    }

    #[test]
    fn nested_box() {
        let q = Quadrature::default();
        let v = q
            .integrate_box(&|x| (x[0] * x[1]).exp(), &[0.0, 0.0], &[1.0, 1.0])
            .unwrap();
        // Σ 1/(k!·(k+1)^2)
        let series: f64 = (0..30)
            .map(|k| 1.0 / ((1..=k).map(f64::from).product::<f64>() * f64::from(k + 1).powi(2)))
            .sum();
        assert!((v - series).abs() < 1e-9, "{v} vs {series}");
    }

    #[test]
    fn singular_integrand_converges() {
        let q = Quadrature::default();
        let v = q
            .integrate_1d(|x| if x > 0.0 { -x * x.ln() } else { 0.0 }, 0.0, 1.0)
            .unwrap();
        assert!((v - 0.25).abs() < 1e-8);
    }

    #[test]
    fn budget_is_enforced() {
        let q = Quadrature {
            abs_tol: 1e-14,
            max_evals: 100,
        };
        let r = q.integrate_1d(|x| (50.0 * x).sin().abs(), 0.0, 3.0);
        assert!(matches!(r, Err(Error::Quadrature(_))));
    }
}

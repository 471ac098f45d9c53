//! Alphabets, exact-rational distributions and empirical types.

use std::fmt;

use num_rational::Ratio;
use num_traits::{CheckedAdd, One, Signed, ToPrimitive, Zero};

use crate::error::{domain, Error, Result};

/// Exact rational used for probabilities and band radii.
pub type Rational = Ratio<i64>;

/// Parses `"num/den"`, an integer, or a finite decimal literal such as
/// `"0.025"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::Config(format!("not a rational: {s:?}"));
    if let Some((num, den)) = s.split_once('/') {
        let num: i64 = num.trim().parse().map_err(|_| bad())?;
        let den: i64 = den.trim().parse().map_err(|_| bad())?;
        if den == 0 {
            return Err(bad());
        }
        return Ok(Ratio::new(num, den));
    }
    if let Some((int, frac)) = s.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) || frac.len() > 15 {
            return Err(bad());
        }
        let negative = int.trim_start().starts_with('-');
        let int_part: i64 = match int.trim() {
            "" | "-" | "+" => 0,
            t => t.parse().map_err(|_| bad())?,
        };
        let den = 10i64.pow(frac.len() as u32);
        let frac_part: i64 = frac.parse().map_err(|_| bad())?;
        let mag = int_part
            .abs()
            .checked_mul(den)
            .and_then(|v| v.checked_add(frac_part))
            .ok_or_else(bad)?;
        let num = if negative { -mag } else { mag };
        return Ok(Ratio::new(num, den));
    }
    let v: i64 = s.parse().map_err(|_| bad())?;
    Ok(Ratio::from_integer(v))
}

/// Formats a rational as `"num/den"`, or as a bare integer when `den = 1`.
pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

pub fn rational_to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Ordered finite alphabet `{t_1, …, t_d}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Alphabet {
    symbols: Vec<String>,
}

impl Alphabet {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = S>) -> Result<Self> {
        let symbols: Vec<String> = symbols.into_iter().map(Into::into).collect();
        if symbols.is_empty() {
            return Err(domain("alphabet must contain at least one symbol"));
        }
        for (i, s) in symbols.iter().enumerate() {
            if symbols[..i].contains(s) {
                return Err(domain(format!("duplicate alphabet symbol {s:?}")));
            }
        }
        Ok(Alphabet { symbols })
    }

    /// Alphabet `{"0", "1", …, "d-1"}`.
    pub fn numbered(d: usize) -> Result<Self> {
        Alphabet::new((0..d).map(|i| i.to_string()))
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn symbols(&self) -> &[String] {
        &self.symbols
    }

    pub fn index_of(&self, symbol: &str) -> Option<usize> {
        self.symbols.iter().position(|s| s == symbol)
    }
}

fn check_weights(weights: &[Rational]) -> Result<()> {
    let mut total = Rational::zero();
    for w in weights {
        if w.is_negative() {
            return Err(domain(format!(
                "negative probability {}",
                format_rational(w)
            )));
        }
        total = total
            .checked_add(w)
            .ok_or_else(|| domain("probability sum overflows i64 rationals"))?;
    }
    if !total.is_one() {
        return Err(domain(format!(
            "probabilities sum to {}, not 1",
            format_rational(&total)
        )));
    }
    Ok(())
}

/// Probability vector on an alphabet with exact rational weights.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVector {
    alphabet: Alphabet,
    weights: Vec<Rational>,
}

impl ProbVector {
    pub fn new(alphabet: Alphabet, weights: Vec<Rational>) -> Result<Self> {
        if weights.len() != alphabet.len() {
            return Err(domain(format!(
                "{} weights for an alphabet of size {}",
                weights.len(),
                alphabet.len()
            )));
        }
        check_weights(&weights)?;
        Ok(ProbVector { alphabet, weights })
    }

    /// Convenience constructor over the numbered alphabet `{0, …, d-1}`.
    pub fn from_ratios(weights: &[(i64, i64)]) -> Result<Self> {
        let w = weights.iter().map(|&(n, d)| Ratio::new(n, d)).collect();
        ProbVector::new(Alphabet::numbered(weights.len())?, w)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

/// Joint pmf of `n` variables on `X^n`, stored row-major with the first
/// variable most significant: cell `(z_1, …, z_n)` lives at
/// `Σ_i z_i · d^(n-1-i)`.
#[derive(Clone, Debug, PartialEq)]
pub struct JointProbTensor {
    alphabet: Alphabet,
    arity: usize,
    weights: Vec<Rational>,
}

impl JointProbTensor {
    pub fn new(alphabet: Alphabet, arity: usize, weights: Vec<Rational>) -> Result<Self> {
        if arity == 0 {
            return Err(domain("arity must be at least 1"));
        }
        let cells = checked_cells(alphabet.len(), arity)?;
        if weights.len() != cells {
            return Err(domain(format!(
                "{} weights for {} cells (d = {}, n = {})",
                weights.len(),
                cells,
                alphabet.len(),
                arity
            )));
        }
        check_weights(&weights)?;
        Ok(JointProbTensor {
            alphabet,
            arity,
            weights,
        })
    }

    pub fn from_ratios(d: usize, arity: usize, weights: &[(i64, i64)]) -> Result<Self> {
        let w = weights.iter().map(|&(n, den)| Ratio::new(n, den)).collect();
        JointProbTensor::new(Alphabet::numbered(d)?, arity, w)
    }

    /// Product tensor `p_1 ⊗ … ⊗ p_n` of marginals on a common alphabet.
    pub fn product(marginals: &[ProbVector]) -> Result<Self> {
        let first = marginals
            .first()
            .ok_or_else(|| domain("product of zero marginals"))?;
        let alphabet = first.alphabet().clone();
        if marginals.iter().any(|m| m.alphabet() != &alphabet) {
            return Err(domain("marginals live on different alphabets"));
        }
        let d = alphabet.len();
        let n = marginals.len();
        let cells = checked_cells(d, n)?;
        let mut weights = Vec::with_capacity(cells);
        let mut digits = vec![0usize; n];
        for cell in 0..cells {
            decode_cell(cell, d, &mut digits);
            let w = digits
                .iter()
                .zip(marginals)
                .fold(Rational::one(), |acc, (&z, m)| acc * m.weights()[z]);
            weights.push(w);
        }
        JointProbTensor::new(alphabet, n, weights)
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn d(&self) -> usize {
        self.alphabet.len()
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn cells(&self) -> usize {
        self.weights.len()
    }

    /// Distribution of variable `i` (0-based).
    pub fn marginal(&self, i: usize) -> Result<ProbVector> {
        if i >= self.arity {
            return Err(domain(format!(
                "variable {i} out of range (n = {})",
                self.arity
            )));
        }
        let d = self.d();
        let mut w = vec![Rational::zero(); d];
        let mut digits = vec![0usize; self.arity];
        for (cell, p) in self.weights.iter().enumerate() {
            decode_cell(cell, d, &mut digits);
            w[digits[i]] += p;
        }
        ProbVector::new(self.alphabet.clone(), w)
    }

    pub fn marginals(&self) -> Result<Vec<ProbVector>> {
        (0..self.arity).map(|i| self.marginal(i)).collect()
    }

    /// The tensor read as a pmf on the product alphabet `X^n`.
    pub fn flattened(&self) -> Result<ProbVector> {
        let d = self.d();
        let mut digits = vec![0usize; self.arity];
        let labels = (0..self.cells()).map(|c| {
            decode_cell(c, d, &mut digits);
            digits
                .iter()
                .map(|&z| self.alphabet.symbols()[z].as_str())
                .collect::<Vec<_>>()
                .join(",")
        });
        ProbVector::new(Alphabet::new(labels)?, self.weights.clone())
    }
}

impl From<ProbVector> for JointProbTensor {
    fn from(p: ProbVector) -> Self {
        JointProbTensor {
            alphabet: p.alphabet,
            arity: 1,
            weights: p.weights,
        }
    }
}

pub(crate) fn checked_cells(d: usize, arity: usize) -> Result<usize> {
    u32::try_from(arity)
        .ok()
        .and_then(|a| d.checked_pow(a))
        .filter(|&c| c <= 1 << 24)
        .ok_or_else(|| domain(format!("tensor with d = {d}, n = {arity} is too large")))
}

/// Writes the base-`d` digits of `cell` (most significant first) into `digits`.
pub(crate) fn decode_cell(mut cell: usize, d: usize, digits: &mut [usize]) {
    for slot in digits.iter_mut().rev() {
        *slot = cell % d;
        cell /= d;
    }
}

/// Empirical type of a length-`N` sequence, kept as integer counts
/// `N_y(t)`; the frequencies are `counts[t] / N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TypeVector {
    counts: Vec<usize>,
}

impl TypeVector {
    pub fn new(counts: Vec<usize>) -> Result<Self> {
        if counts.is_empty() {
            return Err(domain("type over an empty alphabet"));
        }
        Ok(TypeVector { counts })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    /// Sequence length `N = Σ counts`.
    pub fn len(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Frequencies `N_y(t) / N` as exact rationals.
    pub fn frequencies(&self) -> Vec<Rational> {
        let n = self.len() as i64;
        self.counts
            .iter()
            .map(|&c| Ratio::new(c as i64, n.max(1)))
            .collect()
    }

    /// The canonical sorted sequence `(t_1, …, t_1, t_2, …, t_d)` with this type.
    pub fn canonical_sequence(&self) -> Vec<usize> {
        self.counts
            .iter()
            .enumerate()
            .flat_map(|(t, &c)| std::iter::repeat_n(t, c))
            .collect()
    }
}

impl fmt::Display for TypeVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, c) in self.counts.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

/// Type of a sequence of alphabet labels.
pub fn type_of<S: AsRef<str>>(alphabet: &Alphabet, seq: &[S]) -> Result<TypeVector> {
    if seq.is_empty() {
        return Err(domain("empty sequence"));
    }
    let mut counts = vec![0usize; alphabet.len()];
    for s in seq {
        let s = s.as_ref();
        let t = alphabet
            .index_of(s)
            .ok_or_else(|| domain(format!("symbol {s:?} not in alphabet")))?;
        counts[t] += 1;
    }
    TypeVector::new(counts)
}

/// Type of a sequence of symbol indices in `0..d`.
pub fn type_of_indices(d: usize, seq: &[usize]) -> Result<TypeVector> {
    if seq.is_empty() {
        return Err(domain("empty sequence"));
    }
    let mut counts = vec![0usize; d];
    for &t in seq {
        *counts
            .get_mut(t)
            .ok_or_else(|| domain(format!("symbol index {t} not below d = {d}")))? += 1;
    }
    TypeVector::new(counts)
}

/// Joint empirical type of an `n`-tuple of equal-length index sequences,
/// laid out like [`JointProbTensor`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JointType {
    d: usize,
    arity: usize,
    counts: Vec<usize>,
}

impl JointType {
    pub fn of(d: usize, seqs: &[&[usize]]) -> Result<Self> {
        let arity = seqs.len();
        let n = seqs
            .first()
            .map(|s| s.len())
            .ok_or_else(|| domain("joint type of zero sequences"))?;
        if n == 0 || seqs.iter().any(|s| s.len() != n) {
            return Err(domain("sequences must be nonempty and of equal length"));
        }
        let mut counts = vec![0usize; checked_cells(d, arity)?];
        for j in 0..n {
            let mut cell = 0usize;
            for s in seqs {
                if s[j] >= d {
                    return Err(domain(format!("symbol index {} not below d = {d}", s[j])));
                }
                cell = cell * d + s[j];
            }
            counts[cell] += 1;
        }
        Ok(JointType { d, arity, counts })
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn arity(&self) -> usize {
        self.arity
    }

    pub fn marginal(&self, i: usize) -> Result<TypeVector> {
        if i >= self.arity {
            return Err(domain(format!("variable {i} out of range")));
        }
        let mut m = vec![0usize; self.d];
        let mut digits = vec![0usize; self.arity];
        for (cell, &c) in self.counts.iter().enumerate() {
            decode_cell(cell, self.d, &mut digits);
            m[digits[i]] += c;
        }
        TypeVector::new(m)
    }
}

/// Empirical mean `κ_N(x) = N^{-1} Σ_j x_j`.
pub fn kappa_mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

//! JSON study configuration.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::entropy::DistributionSpec;
use crate::error::{Error, Result};
use crate::types::{parse_rational, rational_to_f64, Alphabet, JointProbTensor, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StudyKind {
    /// `(1/N) log #Δ(p; N, δ)` against `S(p)`.
    TypicalCount,
    /// Upper and lower brackets of `#Δ_sym` as rates.
    DiscreteBounds,
    /// Monte Carlo rate of `Δ_sym`.
    DiscreteMc,
    /// Exhaustive rate of `Δ_sym`, small `N` only.
    DiscreteBrute,
    /// Monte Carlo rate of the moment band on approximating sequences.
    ContinuousMc,
    /// Lebesgue-volume rate of the moment band.
    BgVolume,
    /// Built-in property and oracle checks.
    VerifySuite,
}

impl StudyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StudyKind::TypicalCount => "typical-count",
            StudyKind::DiscreteBounds => "discrete-bounds",
            StudyKind::DiscreteMc => "discrete-mc",
            StudyKind::DiscreteBrute => "discrete-brute",
            StudyKind::ContinuousMc => "continuous-mc",
            StudyKind::BgVolume => "bg-volume",
            StudyKind::VerifySuite => "verify-suite",
        }
    }
}

/// Distribution as written in a config file; every number is a string.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionConfig {
    /// Joint pmf on `X^n`, row-major with the first variable most
    /// significant. `alphabet` defaults to `0..d-1` when `d` is given.
    JointPmf {
        #[serde(default)]
        alphabet: Option<Vec<String>>,
        #[serde(default)]
        d: Option<usize>,
        #[serde(default = "one")]
        arity: usize,
        weights: Vec<String>,
    },
    Uniform {
        a: String,
        b: String,
    },
    TiltedSquare {
        rho: String,
    },
    /// Each variable takes `support[z_i]` with joint pmf `weights`.
    DiscreteOnReals {
        support: Vec<String>,
        #[serde(default = "one")]
        arity: usize,
        weights: Vec<String>,
    },
    Product {
        parts: Vec<DistributionConfig>,
    },
}

fn one() -> usize {
    1
}

fn rationals(xs: &[String]) -> Result<Vec<Rational>> {
    xs.iter().map(|s| parse_rational(s)).collect()
}

impl DistributionConfig {
    /// The finite-alphabet pmf behind a `joint_pmf` entry.
    pub fn joint_pmf(&self) -> Result<JointProbTensor> {
        match self {
            DistributionConfig::JointPmf {
                alphabet,
                d,
                arity,
                weights,
            } => {
                let alphabet = match (alphabet, d) {
                    (Some(a), _) => Alphabet::new(a.iter().cloned())?,
                    (None, Some(d)) => Alphabet::numbered(*d)?,
                    (None, None) => {
                        return Err(Error::Config("joint_pmf needs `alphabet` or `d`".into()));
                    }
                };
                JointProbTensor::new(alphabet, *arity, rationals(weights)?)
            }
            _ => Err(Error::Config(
                "this study needs a finite-alphabet `joint_pmf` distribution".into(),
            )),
        }
    }

    /// The bounded real law behind a continuous entry.
    pub fn spec(&self) -> Result<DistributionSpec> {
        match self {
            DistributionConfig::Uniform { a, b } => {
                DistributionSpec::uniform(parse_rational(a)?, parse_rational(b)?)
            }
            DistributionConfig::TiltedSquare { rho } => {
                DistributionSpec::tilted(parse_rational(rho)?)
            }
            DistributionConfig::DiscreteOnReals {
                support,
                arity,
                weights,
            } => {
                let alphabet = Alphabet::numbered(support.len())?;
                let pmf = JointProbTensor::new(alphabet, *arity, rationals(weights)?)?;
                DistributionSpec::discrete(rationals(support)?, pmf)
            }
            DistributionConfig::Product { parts } => {
                DistributionSpec::product(parts.iter().map(|p| p.spec()).collect::<Result<_>>()?)
            }
            DistributionConfig::JointPmf { .. } => Err(Error::Config(
                "this study needs a real-valued distribution, not `joint_pmf`".into(),
            )),
        }
    }
}

/// Coupled schedule `δ(N) = c · N^{−1/4}`.
#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoupledSchedule {
    pub c: String,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingBoxConfig {
    Cutoff,
    Support,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckKind {
    /// `|value − reference| ≤ tol` at the largest `N` of every δ slice.
    FinalWithin,
    /// `|a − reference| ≤ tol` for the fitted intercept of every δ slice.
    InterceptWithin,
    /// `value ≤ tol` at the largest `N` of every δ slice.
    FinalAtMost,
    /// Values strictly decrease in `N` within every δ slice.
    MonotoneDecreasing,
    /// Values strictly increase in `N` within every δ slice.
    MonotoneIncreasing,
    /// `|upper_bound − lower_bound|` strictly decreases in `N`.
    GapDecreasing,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Threshold {
    #[serde(default)]
    pub estimator: Option<String>,
    pub check: CheckKind,
    #[serde(default)]
    pub tol: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    pub id: String,
    #[serde(default)]
    pub study: Option<StudyKind>,
    #[serde(default)]
    pub distribution: Option<DistributionConfig>,
    #[serde(default)]
    pub n_grid: Vec<usize>,
    #[serde(default)]
    pub delta_grid: Vec<String>,
    #[serde(default)]
    pub coupled: Option<CoupledSchedule>,
    #[serde(default)]
    pub m: Option<usize>,
    #[serde(default)]
    pub trials: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub cutoff: Option<String>,
    #[serde(default)]
    pub sampling_box: Option<SamplingBoxConfig>,
    #[serde(default)]
    pub brute_budget: Option<u64>,
    #[serde(default)]
    pub thresholds: Vec<Threshold>,
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn kind(&self) -> Result<StudyKind> {
        self.study
            .ok_or_else(|| Error::Config("missing `study` kind".into()))
    }

    pub fn distribution(&self) -> Result<&DistributionConfig> {
        self.distribution
            .as_ref()
            .ok_or_else(|| Error::Config("missing `distribution`".into()))
    }

    pub fn trials(&self) -> Result<u64> {
        match self.trials {
            Some(t) if t >= 1 => Ok(t),
            Some(_) => Err(Error::Config("`trials` must be at least 1".into())),
            None => Err(Error::Config("this study needs `trials`".into())),
        }
    }

    pub fn moment_order(&self) -> Result<usize> {
        match self.m {
            Some(m) if m >= 1 => Ok(m),
            Some(_) => Err(Error::Config("`m` must be at least 1".into())),
            None => Err(Error::Config("this study needs `m`".into())),
        }
    }

    pub fn cutoff(&self) -> Result<Option<f64>> {
        self.cutoff
            .as_deref()
            .map(|s| parse_rational(s).map(|r| rational_to_f64(&r)))
            .transpose()
    }

    /// Grid points `(N, δ, exploratory)`, N-major.
    pub fn grid(&self) -> Result<Vec<(usize, Rational, bool)>> {
        if self.n_grid.is_empty() {
            return Err(Error::Config("`n_grid` must be nonempty".into()));
        }
        if self.n_grid.contains(&0) {
            return Err(Error::Config("N values must be at least 1".into()));
        }
        match (&self.coupled, self.delta_grid.is_empty()) {
            (Some(_), false) => Err(Error::Config(
                "give either `delta_grid` or `coupled`, not both".into(),
            )),
            (None, true) => Err(Error::Config("`delta_grid` must be nonempty".into())),
            (Some(sched), true) => {
                if !self.thresholds.is_empty() {
                    return Err(Error::Config(
                        "the coupled schedule is exploratory and takes no thresholds".into(),
                    ));
                }
                let c = rational_to_f64(&parse_rational(&sched.c)?);
                self.n_grid
                    .iter()
                    .map(|&n| Ok((n, coupled_delta(c, n)?, true)))
                    .collect()
            }
            (None, false) => {
                let deltas = rationals(&self.delta_grid)?;
                if deltas.iter().any(|d| *d <= Rational::from_integer(0)) {
                    return Err(Error::Config("δ values must be positive".into()));
                }
                Ok(self
                    .n_grid
                    .iter()
                    .flat_map(|&n| deltas.iter().map(move |&d| (n, d, false)))
                    .collect())
            }
        }
    }
}

/// `c · N^{−1/4}` rounded to a multiple of `10^{−9}`.
fn coupled_delta(c: f64, n: usize) -> Result<Rational> {
    const SCALE: i64 = 1_000_000_000;
    let v = c * (n as f64).powf(-0.25);
    let num = (v * SCALE as f64).round() as i64;
    if num <= 0 {
        return Err(Error::Config(format!("coupled δ({n}) rounds to zero")));
    }
    Ok(Rational::new(num, SCALE))
}

#[cfg(test)]
mod tests {
    use super::*;

    const BOUNDS: &str = r#"{
        "id": "bounds",
        "study": "discrete-bounds",
        "distribution": {"type": "joint_pmf", "d": 2, "arity": 2,
                         "weights": ["2/5", "1/10", "1/10", "2/5"]},
        "n_grid": [64, 128],
        "delta_grid": ["1/50", "0.05"],
        "thresholds": [{"estimator": "upper_bound", "check": "final_within", "tol": 0.1}]
    }"#;

    #[test]
    fn parses_a_bounds_study() {
        let c = StudyConfig::from_json(BOUNDS).unwrap();
        assert_eq!(c.kind().unwrap(), StudyKind::DiscreteBounds);
        let p = c.distribution().unwrap().joint_pmf().unwrap();
        assert_eq!(p.arity(), 2);
        let grid = c.grid().unwrap();
        assert_eq!(grid.len(), 4);
        assert_eq!(grid[1], (64, Rational::new(1, 20), false));
        assert_eq!(c.thresholds[0].check, CheckKind::FinalWithin);
    }

    #[test]
    fn parses_continuous_specs() {
        let text = r#"{"id": "c", "study": "continuous-mc", "m": 2, "trials": 10,
            "distribution": {"type": "product", "parts": [
                {"type": "uniform", "a": "0", "b": "1"},
                {"type": "discrete_on_reals", "support": ["0", "1"], "weights": ["1/2", "1/2"]}]},
            "n_grid": [8], "delta_grid": ["1/20"]}"#;
        let c = StudyConfig::from_json(text).unwrap();
        let spec = c.distribution().unwrap().spec().unwrap();
        assert_eq!(spec.arity(), 2);
        assert!(c.distribution().unwrap().joint_pmf().is_err());
        let t = r#"{"id": "t", "distribution": {"type": "tilted_square", "rho": "1/2"}}"#;
        assert!(StudyConfig::from_json(t)
            .unwrap()
            .distribution()
            .unwrap()
            .spec()
            .is_ok());
    }

    #[test]
    fn rejects_bad_configs() {
        assert!(StudyConfig::from_json("{").is_err());
        assert!(StudyConfig::from_json(r#"{"id": "x", "bogus": 1}"#).is_err());
        let bad_weights = r#"{"id": "x", "distribution": {"type": "joint_pmf", "d": 2, "weights": ["1/2", "1/3"]}}"#;
        let c = StudyConfig::from_json(bad_weights).unwrap();
        assert!(c.distribution().unwrap().joint_pmf().is_err());
        let no_grid = r#"{"id": "x", "n_grid": [4]}"#;
        assert!(StudyConfig::from_json(no_grid).unwrap().grid().is_err());
        let both = r#"{"id": "x", "n_grid": [4], "delta_grid": ["1/2"], "coupled": {"c": "1"}}"#;
        assert!(StudyConfig::from_json(both).unwrap().grid().is_err());
    }

    #[test]
    fn coupled_schedule_is_exploratory() {
        let text = r#"{"id": "x", "n_grid": [16, 256], "coupled": {"c": "1/2"}}"#;
        let grid = StudyConfig::from_json(text).unwrap().grid().unwrap();
        assert_eq!(grid[0], (16, Rational::new(1, 4), true));
        assert_eq!(grid[1], (256, Rational::new(1, 8), true));
    }
}

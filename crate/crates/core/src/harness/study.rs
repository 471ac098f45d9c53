//! Grid runner: one set of estimator rows plus a reference row per
//! `(N, δ)` point.

use std::time::Instant;

use rayon::prelude::*;

use crate::continuous::{
    approximating_mc_estimate, lebesgue_volume_mc_estimate, MomentWindow, SamplingBox,
};
use crate::discrete::{
    brute_force_count_with_budget, microstate_log_lower_bound, microstate_log_upper_bound,
    microstate_mc_estimate, typical_set_log_count, BandSpec, DEFAULT_BRUTE_FORCE_BUDGET,
};
use crate::entropy::{
    bg_entropy_quadrature, discrete_mutual_information, shannon_entropy, DistributionSpec,
};
use crate::error::{Error, Result};
use crate::estimate::LogProbEstimate;
use crate::types::{rational_to_f64, JointProbTensor, Rational};

use super::config::{SamplingBoxConfig, StudyConfig, StudyKind};
use super::rows::{sort_rows, RowStatus, StudyRow};
use super::verify::run_verify_suite;

/// The value every estimator of a study should approach, with a plain
/// description of how it was obtained.
#[derive(Clone, Debug, PartialEq)]
pub struct Reference {
    pub label: &'static str,
    pub value: f64,
    pub source: &'static str,
}

#[derive(Clone, Debug)]
pub struct StudyOutcome {
    pub kind: StudyKind,
    pub rows: Vec<StudyRow>,
    pub reference: Option<Reference>,
    /// Grid points refused because enumeration would exceed the budget.
    pub budget_refusals: usize,
}

enum Target {
    Pmf(JointProbTensor),
    Spec(DistributionSpec),
    None,
}

/// Runs every grid point of `config` as a study of kind `kind`. Rows come
/// back sorted by estimator, `N` and `δ`.
pub fn run_study(config: &StudyConfig, kind: StudyKind) -> Result<StudyOutcome> {
    if kind == StudyKind::VerifySuite {
        let rows = run_verify_suite(&config.id, config.seed);
        return Ok(StudyOutcome {
            kind,
            rows,
            reference: None,
            budget_refusals: 0,
        });
    }
    let grid = config.grid()?;
    let dist = config.distribution()?;
    let target = match kind {
        StudyKind::TypicalCount
        | StudyKind::DiscreteBounds
        | StudyKind::DiscreteMc
        | StudyKind::DiscreteBrute => Target::Pmf(dist.joint_pmf()?),
        StudyKind::ContinuousMc | StudyKind::BgVolume => Target::Spec(dist.spec()?),
        StudyKind::VerifySuite => Target::None,
    };
    let trials = match kind {
        StudyKind::DiscreteMc | StudyKind::ContinuousMc | StudyKind::BgVolume => {
            Some(config.trials()?)
        }
        _ => None,
    };
    let m = match kind {
        StudyKind::ContinuousMc | StudyKind::BgVolume => Some(config.moment_order()?),
        _ => None,
    };
    let cutoff = config.cutoff()?;
    let sampling = match config.sampling_box {
        Some(SamplingBoxConfig::Cutoff) => SamplingBox::Cutoff,
        Some(SamplingBoxConfig::Support) => SamplingBox::Support,
        None if cutoff.is_some() => SamplingBox::Cutoff,
        None => SamplingBox::Support,
    };
    if kind == StudyKind::BgVolume && cutoff.is_none() {
        return Err(Error::Config("bg-volume needs a `cutoff` R".into()));
    }
    if kind == StudyKind::DiscreteMc
        || kind == StudyKind::DiscreteBounds
        || kind == StudyKind::DiscreteBrute
    {
        if let Target::Pmf(p) = &target {
            if p.arity() < 2 {
                return Err(Error::Config(
                    "micro-state studies need a joint pmf of arity ≥ 2".into(),
                ));
            }
        }
    }
    let reference = reference_for(kind, &target)?;
    let budget = config
        .brute_budget
        .map_or(DEFAULT_BRUTE_FORCE_BUDGET, u128::from);

    let per_point: Vec<(Vec<StudyRow>, usize)> = grid
        .par_iter()
        .map(|&(n, delta, exploratory)| {
            let point = GridPoint {
                study: &config.id,
                kind,
                n,
                delta,
                m,
                seed: config.seed,
                status: if exploratory {
                    RowStatus::Exploratory
                } else {
                    RowStatus::Ok
                },
            };
            let (mut rows, refused) = point.run(&target, trials, cutoff, sampling, budget);
            if let Some(r) = &reference {
                rows.push(point.row("reference", r.value));
            }
            (rows, refused)
        })
        .collect();

    let mut rows = Vec::new();
    let mut budget_refusals = 0;
    for (r, refused) in per_point {
        rows.extend(r);
        budget_refusals += refused;
    }
    sort_rows(&mut rows);
    Ok(StudyOutcome {
        kind,
        rows,
        reference,
        budget_refusals,
    })
}

fn reference_for(kind: StudyKind, target: &Target) -> Result<Option<Reference>> {
    Ok(match (kind, target) {
        (StudyKind::TypicalCount, Target::Pmf(p)) => Some(Reference {
            label: "S(p)",
            value: shannon_entropy(&p.flattened()?),
            source: "Shannon entropy of the pmf by direct summation",
        }),
        (
            StudyKind::DiscreteBounds | StudyKind::DiscreteMc | StudyKind::DiscreteBrute,
            Target::Pmf(p),
        ) => Some(Reference {
            label: "I",
            value: discrete_mutual_information(p)?,
            source: "mutual information Σ S(p_i) − S(p) by direct summation",
        }),
        (StudyKind::ContinuousMc, Target::Spec(spec)) => Some(continuous_reference(spec)?),
        (StudyKind::BgVolume, Target::Spec(spec)) => Some(Reference {
            label: "H",
            value: bg_entropy_quadrature(spec)?,
            source: "differential entropy by adaptive Gauss-Kronrod quadrature",
        }),
        _ => None,
    })
}

fn continuous_reference(spec: &DistributionSpec) -> Result<Reference> {
    if spec.arity() == 1 {
        return Ok(Reference {
            label: "I",
            value: 0.0,
            source: "a single variable carries no mutual information",
        });
    }
    if let DistributionSpec::DiscreteOnReals { pmf, .. } = spec {
        return Ok(Reference {
            label: "I",
            value: discrete_mutual_information(pmf)?,
            source: "mutual information of the finite pmf by direct summation",
        });
    }
    if !spec.has_density() {
        return Err(Error::Config(
            "no reference mutual information for a mixed law; use a product of densities or a finite law".into(),
        ));
    }
    let marginals = (0..spec.arity())
        .map(|i| bg_entropy_quadrature(&spec.marginal(i)?))
        .sum::<Result<f64>>()?;
    Ok(Reference {
        label: "I",
        value: marginals - bg_entropy_quadrature(spec)?,
        source: "Σ H(X_i) − H(X) by adaptive Gauss-Kronrod quadrature",
    })
}

struct GridPoint<'a> {
    study: &'a str,
    kind: StudyKind,
    n: usize,
    delta: Rational,
    m: Option<usize>,
    seed: u64,
    status: RowStatus,
}

impl GridPoint<'_> {
    fn row(&self, estimator: &str, value: f64) -> StudyRow {
        let mut row = StudyRow::new(self.study, estimator, value, self.seed);
        row.n = Some(self.n);
        row.delta = Some(self.delta);
        row.m = self.m;
        row.status = self.status;
        row
    }

    fn skipped(&self, estimator: &str, err: &Error) -> StudyRow {
        let mut row = self.row(estimator, f64::NAN);
        row.status = RowStatus::Skipped;
        row.note = Some(err.to_string());
        row
    }

    /// Rate row `−(1/N) log p̂` with the interval flipped accordingly.
    fn mc_row(&self, estimator: &str, est: &LogProbEstimate) -> StudyRow {
        let n = self.n as f64;
        let mut row = self.row(estimator, -est.log_p_hat / n);
        row.ci_low = Some(-est.ci_high / n);
        row.ci_high = Some(-est.ci_low / n);
        row.successes = Some(est.successes);
        row.trials = Some(est.trials);
        row
    }

    fn timed<T>(f: impl FnOnce() -> Result<T>) -> (Result<T>, u64) {
        let start = Instant::now();
        let out = f();
        (out, start.elapsed().as_millis() as u64)
    }

    fn run(
        &self,
        target: &Target,
        trials: Option<u64>,
        cutoff: Option<f64>,
        sampling: SamplingBox,
        budget: u128,
    ) -> (Vec<StudyRow>, usize) {
        let band = match BandSpec::new(self.delta, self.n) {
            Ok(b) => b,
            Err(e) => return (vec![self.skipped(self.estimator_names()[0], &e)], 0),
        };
        let mut rows = Vec::new();
        let mut refused = 0;
        let delta_f = rational_to_f64(&self.delta);
        match (self.kind, target) {
            (StudyKind::TypicalCount, Target::Pmf(p)) => {
                let (res, ms) = Self::timed(|| {
                    let flat = p.flattened()?;
                    Ok(typical_set_log_count(&flat, &band))
                });
                rows.push(match res {
                    Ok(c) => {
                        let mut r = self.row("typical_rate", c.log_value / self.n as f64);
                        r.wall_ms = ms;
                        r
                    }
                    Err(e) => self.skipped("typical_rate", &e),
                });
            }
            (StudyKind::DiscreteBounds, Target::Pmf(p)) => {
                for (name, f) in [
                    ("upper_bound", microstate_log_upper_bound as fn(&_, &_) -> _),
                    ("lower_bound", microstate_log_lower_bound),
                ] {
                    let (res, ms) = Self::timed(|| f(p, &band));
                    rows.push(match res {
                        Ok(c) => {
                            let mut r = self.row(name, c.sym_rate(self.n, p.arity()));
                            r.wall_ms = ms;
                            r
                        }
                        Err(e) => self.skipped(name, &e),
                    });
                }
            }
            (StudyKind::DiscreteMc, Target::Pmf(p)) => {
                let trials = trials.expect("checked above");
                let (res, ms) = Self::timed(|| microstate_mc_estimate(p, &band, trials, self.seed));
                rows.push(match res {
                    Ok(est) => {
                        let mut r = self.mc_row("mc", &est);
                        r.wall_ms = ms;
                        r
                    }
                    Err(e) => self.skipped("mc", &e),
                });
            }
            (StudyKind::DiscreteBrute, Target::Pmf(p)) => {
                let (res, ms) = Self::timed(|| brute_force_count_with_budget(p, &band, budget));
                rows.push(match res {
                    Ok(c) => {
                        let mut r = self.row("brute", c.log_count().sym_rate(self.n, p.arity()));
                        r.successes = Some(c.anchored_members);
                        r.trials = Some(c.anchored_total);
                        r.wall_ms = ms;
                        r
                    }
                    Err(e) => {
                        if matches!(e, Error::BudgetExceeded { .. }) {
                            refused += 1;
                        }
                        self.skipped("brute", &e)
                    }
                });
            }
            (StudyKind::ContinuousMc, Target::Spec(spec)) => {
                let trials = trials.expect("checked above");
                let (res, ms) = Self::timed(|| {
                    let window =
                        MomentWindow::new(self.m.expect("checked above"), delta_f, cutoff)?;
                    approximating_mc_estimate(spec, &window, self.n, trials, self.seed)
                });
                rows.push(match res {
                    Ok(est) => {
                        let mut r = self.mc_row("mc_xi", &est);
                        r.wall_ms = ms;
                        r
                    }
                    Err(e) => self.skipped("mc_xi", &e),
                });
            }
            (StudyKind::BgVolume, Target::Spec(spec)) => {
                let trials = trials.expect("checked above");
                let (res, ms) = Self::timed(|| {
                    let window =
                        MomentWindow::new(self.m.expect("checked above"), delta_f, cutoff)?;
                    lebesgue_volume_mc_estimate(spec, &window, self.n, trials, self.seed, sampling)
                });
                rows.push(match res {
                    Ok(v) => {
                        let mut r = self.row("bg_volume", v.log_volume_rate);
                        r.ci_low = Some(v.ci_low);
                        r.ci_high = Some(v.ci_high);
                        r.successes = Some(v.successes);
                        r.trials = Some(v.trials);
                        r.wall_ms = ms;
                        r
                    }
                    Err(e) => self.skipped("bg_volume", &e),
                });
            }
            _ => unreachable!("targets are built per kind"),
        }
        (rows, refused)
    }

    fn estimator_names(&self) -> &'static [&'static str] {
        match self.kind {
            StudyKind::TypicalCount => &["typical_rate"],
            StudyKind::DiscreteBounds => &["upper_bound", "lower_bound"],
            StudyKind::DiscreteMc => &["mc"],
            StudyKind::DiscreteBrute => &["brute"],
            StudyKind::ContinuousMc => &["mc_xi"],
            StudyKind::BgVolume => &["bg_volume"],
            StudyKind::VerifySuite => &["verify"],
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(text: &str) -> StudyConfig {
        StudyConfig::from_json(text).unwrap()
    }

    const PMF: &str =
        r#"{"type": "joint_pmf", "d": 2, "arity": 2, "weights": ["2/5", "1/10", "1/10", "2/5"]}"#;

    #[test]
    fn bounds_study_shape() {
        let c = config(&format!(
            r#"{{"id": "b", "distribution": {PMF}, "n_grid": [16, 32, 64], "delta_grid": ["1/20", "1/10"]}}"#
        ));
        let out = run_study(&c, StudyKind::DiscreteBounds).unwrap();
        assert_eq!(out.rows.len(), 3 * 2 * 3);
        let reference = out.reference.unwrap();
        assert!((reference.value - 0.19274).abs() < 5e-6);
        let estimators: Vec<&str> = out.rows.iter().map(|r| r.estimator.as_str()).collect();
        assert_eq!(estimators[0], "lower_bound");
        assert_eq!(estimators[17], "upper_bound");
        for pair in out.rows.chunks(2).take(3) {
            assert!(pair[0].n <= pair[1].n);
        }
    }

    #[test]
    fn brute_study_refuses_large_n() {
        let c = config(&format!(
            r#"{{"id": "b", "distribution": {PMF}, "n_grid": [4, 13], "delta_grid": ["1/5"]}}"#
        ));
        let out = run_study(&c, StudyKind::DiscreteBrute).unwrap();
        assert_eq!(out.budget_refusals, 1);
        let skipped: Vec<_> = out
            .rows
            .iter()
            .filter(|r| r.status == RowStatus::Skipped)
            .collect();
        assert_eq!(skipped.len(), 1);
        assert_eq!(skipped[0].n, Some(13));
    }

    #[test]
    fn mc_study_is_reproducible() {
        let c = config(&format!(
            r#"{{"id": "m", "distribution": {PMF}, "n_grid": [6, 8], "delta_grid": ["1/4"], "trials": 3000, "seed": 5}}"#
        ));
        let a = run_study(&c, StudyKind::DiscreteMc).unwrap();
        let b = run_study(&c, StudyKind::DiscreteMc).unwrap();
        let strip = |rows: &[StudyRow]| -> Vec<Vec<String>> {
            rows.iter()
                .map(|r| {
                    let mut f = r.fields();
                    f.remove(10);
                    f
                })
                .collect()
        };
        assert_eq!(strip(&a.rows), strip(&b.rows));
    }

    #[test]
    fn wrong_distribution_kind_is_a_config_error() {
        let c = config(
            r#"{"id": "x", "distribution": {"type": "uniform", "a": "0", "b": "1"}, "n_grid": [4], "delta_grid": ["1/4"]}"#,
        );
        assert!(matches!(
            run_study(&c, StudyKind::DiscreteBounds),
            Err(Error::Config(_))
        ));
        let c = config(&format!(
            r#"{{"id": "x", "distribution": {PMF}, "n_grid": [4], "delta_grid": ["1/4"]}}"#
        ));
        assert!(matches!(
            run_study(&c, StudyKind::DiscreteMc),
            Err(Error::Config(_))
        ));
    }
}

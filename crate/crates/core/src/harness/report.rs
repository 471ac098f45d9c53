//! Plain-text summary and threshold evaluation.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::types::{format_rational, Rational};

use super::config::{CheckKind, StudyConfig, Threshold};
use super::extrapolate::extrapolate_rate;
use super::rows::{format_value, RowStatus, StudyRow};
use super::study::StudyOutcome;

#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub text: String,
    /// One line per breached threshold.
    pub breaches: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.breaches.is_empty()
    }
}

type Slice = Vec<(usize, f64)>;

/// `(estimator, δ) → [(N, value)]` over rows that carry a value.
fn slices(rows: &[StudyRow]) -> BTreeMap<(String, Option<Rational>), Slice> {
    let mut out: BTreeMap<(String, Option<Rational>), Slice> = BTreeMap::new();
    for r in rows {
        if r.status == RowStatus::Skipped {
            continue;
        }
        if let Some(n) = r.n {
            out.entry((r.estimator.clone(), r.delta))
                .or_default()
                .push((n, r.value));
        }
    }
    for s in out.values_mut() {
        s.sort_by_key(|p| p.0);
    }
    out
}

fn delta_label(d: &Option<Rational>) -> String {
    d.map_or_else(|| "-".to_string(), |d| format_rational(&d))
}

/// Summarizes `outcome` and checks the configured thresholds.
pub fn emit_report(outcome: &StudyOutcome, config: &StudyConfig) -> Report {
    let mut text = String::new();
    let mut breaches = Vec::new();
    let _ = writeln!(text, "study {} ({})", config.id, outcome.kind.name());
    if let Some(r) = &outcome.reference {
        let _ = writeln!(
            text,
            "reference {} = {} (source: {})",
            r.label,
            format_value(r.value),
            r.source
        );
    }
    if outcome
        .rows
        .iter()
        .any(|r| r.status == RowStatus::Exploratory)
    {
        let _ = writeln!(
            text,
            "note: coupled δ(N) schedule; exploratory only, no limit is claimed"
        );
    }

    let by_slice = slices(&outcome.rows);
    let verify = outcome.kind == super::config::StudyKind::VerifySuite;
    for ((estimator, delta), points) in &by_slice {
        if estimator == "reference" || verify {
            continue;
        }
        let _ = writeln!(text, "\n{estimator}  δ = {}", delta_label(delta));
        let _ = writeln!(text, "  {:>8}  {:>16}", "N", "value");
        for (n, v) in points {
            let _ = writeln!(text, "  {n:>8}  {:>16}", format_value(*v));
        }
        if points.len() >= 3 {
            match extrapolate_rate(points) {
                Ok(fit) => {
                    let _ = writeln!(
                        text,
                        "  fit a + b·log N/N: a = {}, b = {}, max residual {}",
                        format_value(fit.intercept),
                        format_value(fit.slope),
                        format_value(fit.max_residual)
                    );
                    if !fit.excluded.is_empty() {
                        let _ =
                            writeln!(text, "  excluded (infinite rate): N = {:?}", fit.excluded);
                    }
                }
                Err(e) => {
                    let _ = writeln!(text, "  no fit: {e}");
                }
            }
        }
    }

    for r in outcome
        .rows
        .iter()
        .filter(|r| r.status == RowStatus::Skipped)
    {
        let _ = writeln!(
            text,
            "skipped {} at N = {:?}, δ = {}: {}",
            r.estimator,
            r.n,
            delta_label(&r.delta),
            r.note.as_deref().unwrap_or("")
        );
    }
    for r in outcome.rows.iter().filter(|r| r.status == RowStatus::Fail) {
        breaches.push(format!(
            "{}: {}",
            r.estimator,
            r.note.as_deref().unwrap_or("check failed")
        ));
    }

    let reference = outcome.reference.as_ref().map(|r| r.value);
    for t in &config.thresholds {
        breaches.extend(check_threshold(t, &by_slice, reference));
    }

    let _ = writeln!(text);
    if verify {
        for r in &outcome.rows {
            let _ = writeln!(
                text,
                "{:<28} {:>4}  cases {:>10}  violations {}",
                r.estimator,
                r.status.as_str(),
                r.trials.unwrap_or(0),
                format_value(r.value)
            );
        }
    }
    if breaches.is_empty() {
        let _ = writeln!(text, "PASS: {} threshold(s) met", config.thresholds.len());
    } else {
        for b in &breaches {
            let _ = writeln!(text, "BREACH: {b}");
        }
    }
    Report { text, breaches }
}

fn check_threshold(
    t: &Threshold,
    by_slice: &BTreeMap<(String, Option<Rational>), Slice>,
    reference: Option<f64>,
) -> Vec<String> {
    let mut out = Vec::new();
    let name = t.estimator.clone().unwrap_or_default();
    let tol = t.tol.unwrap_or(0.0);
    let need_tol = matches!(
        t.check,
        CheckKind::FinalWithin | CheckKind::InterceptWithin | CheckKind::FinalAtMost
    );
    if need_tol && t.tol.is_none() {
        out.push(format!("{name} {:?}: missing `tol`", t.check));
        return out;
    }
    if t.check == CheckKind::GapDecreasing {
        let deltas: Vec<Option<Rational>> = by_slice
            .keys()
            .filter(|(e, _)| e == "upper_bound")
            .map(|(_, d)| *d)
            .collect();
        if deltas.is_empty() {
            out.push("gap_decreasing: no upper_bound rows".into());
        }
        for d in deltas {
            let up = &by_slice[&("upper_bound".to_string(), d)];
            let Some(lo) = by_slice.get(&("lower_bound".to_string(), d)) else {
                out.push(format!(
                    "gap_decreasing δ = {}: no lower_bound rows",
                    delta_label(&d)
                ));
                continue;
            };
            let gaps: Vec<f64> = up.iter().zip(lo).map(|(a, b)| (a.1 - b.1).abs()).collect();
            if !gaps.windows(2).all(|w| w[1] < w[0]) {
                out.push(format!(
                    "gap_decreasing δ = {}: gaps {:?} are not strictly decreasing",
                    delta_label(&d),
                    gaps.iter().map(|g| format_value(*g)).collect::<Vec<_>>()
                ));
            }
        }
        return out;
    }
    let slices: Vec<(&Option<Rational>, &Slice)> = by_slice
        .iter()
        .filter(|((e, _), _)| *e == name)
        .map(|((_, d), s)| (d, s))
        .collect();
    if slices.is_empty() {
        out.push(format!("{name} {:?}: no rows for this estimator", t.check));
        return out;
    }
    for (d, s) in slices {
        let label = format!("{name} δ = {}", delta_label(d));
        let last = s.last().expect("slices are nonempty").1;
        let values: Vec<f64> = s.iter().map(|p| p.1).collect();
        match t.check {
            CheckKind::FinalWithin | CheckKind::InterceptWithin => {
                let Some(reference) = reference else {
                    out.push(format!("{label}: no reference value"));
                    continue;
                };
                let value = if t.check == CheckKind::FinalWithin {
                    last
                } else {
                    match extrapolate_rate(s) {
                        Ok(fit) => fit.intercept,
                        Err(e) => {
                            out.push(format!("{label} intercept: {e}"));
                            continue;
                        }
                    }
                };
                // NaN fails the comparison and is reported
                let within = (value - reference).abs() <= tol;
                if !within {
                    out.push(format!(
                        "{label} {:?}: {} is not within {} of {}",
                        t.check,
                        format_value(value),
                        format_value(tol),
                        format_value(reference)
                    ));
                }
            }
            CheckKind::FinalAtMost => {
                let below = last <= tol;
                if !below {
                    out.push(format!(
                        "{label} final_at_most: {} exceeds {}",
                        format_value(last),
                        format_value(tol)
                    ));
                }
            }
            CheckKind::MonotoneDecreasing | CheckKind::MonotoneIncreasing => {
                let ok = values.windows(2).all(|w| {
                    if t.check == CheckKind::MonotoneDecreasing {
                        w[1] < w[0]
                    } else {
                        w[1] > w[0]
                    }
                });
                if !ok {
                    out.push(format!(
                        "{label} {:?}: {:?}",
                        t.check,
                        values.iter().map(|v| format_value(*v)).collect::<Vec<_>>()
                    ));
                }
            }
            CheckKind::GapDecreasing => unreachable!("handled above"),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::config::StudyKind;
    use super::super::study::Reference;
    use super::*;

    fn outcome(values: &[(usize, f64)]) -> StudyOutcome {
        let rows = values
            .iter()
            .map(|&(n, v)| {
                let mut r = StudyRow::new("s", "lower_bound", v, 1);
                r.n = Some(n);
                r.delta = Some(Rational::new(1, 20));
                r
            })
            .collect();
        StudyOutcome {
            kind: StudyKind::DiscreteBounds,
            rows,
            reference: Some(Reference {
                label: "I",
                value: 0.0,
                source: "test",
            }),
            budget_refusals: 0,
        }
    }

    fn config(thresholds: &str) -> StudyConfig {
        StudyConfig::from_json(&format!(r#"{{"id": "s", "thresholds": {thresholds}}}"#)).unwrap()
    }

    #[test]
    fn passing_study() {
        let o = outcome(&[(64, 0.2), (128, 0.1), (256, 0.05)]);
        let c = config(
            r#"[{"estimator": "lower_bound", "check": "final_at_most", "tol": 0.06},
                           {"estimator": "lower_bound", "check": "monotone_decreasing"}]"#,
        );
        let rep = emit_report(&o, &c);
        assert!(rep.passed(), "{:?}", rep.breaches);
        assert!(rep.text.contains("reference I = 0 (source: test)"));
        assert!(rep.text.contains("PASS"));
    }

    #[test]
    fn breach_names_the_criterion() {
        let o = outcome(&[(64, 0.2), (128, 0.25), (256, 0.05)]);
        let c = config(
            r#"[{"estimator": "lower_bound", "check": "monotone_decreasing"},
                           {"estimator": "lower_bound", "check": "final_within", "tol": 0.01}]"#,
        );
        let rep = emit_report(&o, &c);
        assert_eq!(rep.breaches.len(), 2);
        assert!(rep.breaches[0].contains("MonotoneDecreasing"));
        assert!(rep.breaches[1].contains("FinalWithin"));
        assert!(rep.text.contains("BREACH"));
    }

    #[test]
    fn missing_estimator_is_a_breach() {
        let o = outcome(&[(64, 0.2)]);
        let c = config(r#"[{"estimator": "mc", "check": "final_at_most", "tol": 1.0}]"#);
        assert!(!emit_report(&o, &c).passed());
    }
}

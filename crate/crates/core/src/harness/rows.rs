//! Result rows and their CSV form.

use std::cmp::Ordering;
use std::io::Write;

use crate::error::Result;
use crate::types::{rational_to_f64, Rational};

/// Column order of every CSV the harness writes.
pub const CSV_HEADER: [&str; 13] = [
    "study",
    "N",
    "delta",
    "m",
    "estimator",
    "value",
    "ci_low",
    "ci_high",
    "successes",
    "trials",
    "wall_ms",
    "seed",
    "status",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RowStatus {
    Ok,
    Skipped,
    Exploratory,
    Pass,
    Fail,
}

impl RowStatus {
    pub fn as_str(&self) -> &'static str {
        match self {
            RowStatus::Ok => "ok",
            RowStatus::Skipped => "skipped",
            RowStatus::Exploratory => "exploratory",
            RowStatus::Pass => "pass",
            RowStatus::Fail => "fail",
        }
    }
}

/// One estimator at one grid point. Rates are in nats.
#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow {
    pub study: String,
    pub n: Option<usize>,
    pub delta: Option<Rational>,
    pub m: Option<usize>,
    pub estimator: String,
    pub value: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub successes: Option<u64>,
    pub trials: Option<u64>,
    pub wall_ms: u64,
    pub seed: u64,
    pub status: RowStatus,
    /// Reason for a skipped or failed row; reported, not written.
    pub note: Option<String>,
}

impl StudyRow {
    pub fn new(study: &str, estimator: &str, value: f64, seed: u64) -> Self {
        StudyRow {
            study: study.to_string(),
            n: None,
            delta: None,
            m: None,
            estimator: estimator.to_string(),
            value,
            ci_low: None,
            ci_high: None,
            successes: None,
            trials: None,
            wall_ms: 0,
            seed,
            status: RowStatus::Ok,
            note: None,
        }
    }

    /// Fields in [`CSV_HEADER`] order.
    pub fn fields(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(format_value).unwrap_or_default();
        vec![
            self.study.clone(),
            self.n.map(|n| n.to_string()).unwrap_or_default(),
            self.delta
                .map(|d| format_value(rational_to_f64(&d)))
                .unwrap_or_default(),
            self.m.map(|m| m.to_string()).unwrap_or_default(),
            self.estimator.clone(),
            format_value(self.value),
            opt(self.ci_low),
            opt(self.ci_high),
            self.successes.map(|s| s.to_string()).unwrap_or_default(),
            self.trials.map(|t| t.to_string()).unwrap_or_default(),
            self.wall_ms.to_string(),
            self.seed.to_string(),
            self.status.as_str().to_string(),
        ]
    }
}

/// Orders rows by estimator, then `N`, then `δ`.
pub fn sort_rows(rows: &mut [StudyRow]) {
    rows.sort_by(|a, b| {
        a.estimator
            .cmp(&b.estimator)
            .then(a.n.cmp(&b.n))
            .then(a.delta.partial_cmp(&b.delta).unwrap_or(Ordering::Equal))
    });
}

/// `%g`-style rendering with 9 significant digits; `inf`, `-inf`, `nan`.
pub fn format_value(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{v:.8e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..9).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        return format!("{mantissa}e{sign}{:02}", exp.abs());
    }
    let decimals = (8 - exp).max(0) as usize;
    trim_zeros(&format!("{v:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

pub fn write_csv<W: Write>(rows: &[StudyRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(row.fields())?;
    }
    w.flush()?;
    Ok(())
}

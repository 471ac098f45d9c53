//! Acceptance criteria 1 to 10. Runs without the libtest harness so every
//! criterion prints exactly one PASS/FAIL line whatever happens to the
//! others; the process fails if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use msmi_core::continuous::{
    approximating_mc_estimate, lebesgue_volume_mc_estimate, MomentWindow, SamplingBox,
};
use msmi_core::discrete::{
    approximating_inclusion_check, brute_force_count, microstate_log_lower_bound,
    microstate_log_upper_bound, microstate_mc_estimate, microstate_membership,
    typical_set_log_count, BandSpec,
};
use msmi_core::entropy::{discrete_mutual_information, DistributionSpec};
use msmi_core::harness::verify::{check_stirling_bound, check_type_class_bound};
use msmi_core::harness::{extrapolate_rate, run_study, StudyConfig, StudyRow};
use msmi_core::perm::Permutation;
use msmi_core::types::{JointProbTensor, ProbVector, Rational};

// Pinned tolerances and budgets.
const C1_RUNTIME: Duration = Duration::from_secs(120);
const C2_FINAL_TOL: f64 = 0.10;
const C2_INTERCEPT_TOL: f64 = 0.03;
const C2_RUNTIME: Duration = Duration::from_secs(300);
const C3_FINAL_MAX: f64 = 0.06;
const C4_SIGMAS: f64 = 3.0;
const C4_RUNTIME: Duration = Duration::from_secs(60);
const C5_FINAL_TOL: f64 = 0.06;
const C5_SUP_SLACK: f64 = 1e-12;
const C8_TOL: f64 = 0.05;
const C8_RUNTIME: Duration = Duration::from_secs(60);
const C10_THREADS: usize = 8;

type Verdict = Result<String, String>;
type Series = Vec<(usize, f64)>;
type Criterion = (&'static str, fn() -> Verdict);

fn r(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}

fn pmf(w: &[(i64, i64)]) -> JointProbTensor {
    JointProbTensor::from_ratios(2, 2, w).expect("valid pmf")
}

fn diag() -> JointProbTensor {
    pmf(&[(1, 2), (0, 1), (0, 1), (1, 2)])
}

fn tilted() -> JointProbTensor {
    pmf(&[(2, 5), (1, 10), (1, 10), (2, 5)])
}

fn product() -> JointProbTensor {
    pmf(&[(1, 4), (1, 4), (1, 4), (1, 4)])
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Membership by unfolding the definition with no pruning: some pair of
/// canonical sorted binary sequences, permuted, has every joint cell count
/// strictly inside `N(p ± δ)`.
fn unpruned_membership(sigmas: &[Permutation; 2], p: &JointProbTensor, delta: Rational) -> bool {
    let n = sigmas[0].len();
    let nn = Rational::from_integer(n as i64);
    let canonical =
        |ones: usize| -> Vec<usize> { (0..n).map(|j| usize::from(j >= n - ones)).collect() };
    for a in 0..=n {
        let x1 = sigmas[0].apply(&canonical(a)).expect("sizes");
        for b in 0..=n {
            let x2 = sigmas[1].apply(&canonical(b)).expect("sizes");
            let mut cells = [0i64; 4];
            for j in 0..n {
                cells[2 * x1[j] + x2[j]] += 1;
            }
            let inside = cells.iter().zip(p.weights()).all(|(&c, &w)| {
                let diff = Rational::from_integer(c) - nn * w;
                diff < nn * delta && -diff < nn * delta
            });
            if inside {
                return true;
            }
        }
    }
    false
}

fn criterion_1() -> Verdict {
    let start = Instant::now();
    let mut tuples = 0u64;
    for (name, p) in [
        ("diag", diag()),
        ("tilted", tilted()),
        ("product", product()),
    ] {
        for n in 2..=5 {
            let perms: Vec<Permutation> = (0..(1..=n as u128).product())
                .map(|k| Permutation::unrank(n, k))
                .collect();
            for delta in [r(3, 20), r(3, 10)] {
                let band = BandSpec::new(delta, n).map_err(|e| e.to_string())?;
                let brute = brute_force_count(&p, &band)
                    .map_err(|e| e.to_string())?
                    .count();
                let up = microstate_log_upper_bound(&p, &band).map_err(|e| e.to_string())?;
                let lo = microstate_log_lower_bound(&p, &band).map_err(|e| e.to_string())?;
                let (up, lo) = (up.exact().cloned(), lo.exact().cloned());
                ensure(up.is_some() && lo.is_some(), || {
                    format!("{name} N={n}: bounds not exact")
                })?;
                let (up, lo) = (up.unwrap(), lo.unwrap());
                ensure(lo <= brute && brute <= up, || {
                    format!("{name} N={n} δ={delta}: {lo} ≤ {brute} ≤ {up} fails")
                })?;
                let mut members = 0u64;
                for s1 in &perms {
                    for s2 in &perms {
                        let sigmas = [s1.clone(), s2.clone()];
                        let fast =
                            microstate_membership(&sigmas, &p, &band).map_err(|e| e.to_string())?;
                        let slow = unpruned_membership(&sigmas, &p, delta);
                        ensure(fast == slow, || {
                            format!("{name} N={n} δ={delta} σ=({:?}, {:?}): pruned {fast}, unpruned {slow}", s1.images(), s2.images())
                        })?;
                        members += u64::from(fast);
                        tuples += 1;
                    }
                }
                ensure(brute == (members as u128).into(), || {
                    format!("{name} N={n} δ={delta}: brute {brute} vs {members} members over all tuples")
                })?;
            }
        }
    }
    let elapsed = start.elapsed();
    ensure(elapsed < C1_RUNTIME, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "{tuples} tuples agree, sandwich exact on 24 cases, {elapsed:.1?}"
    ))
}

fn rate_series(
    p: &JointProbTensor,
    delta: Rational,
    ns: &[usize],
) -> Result<(Series, Series), String> {
    let mut up = Vec::new();
    let mut lo = Vec::new();
    for &n in ns {
        let band = BandSpec::new(delta, n).map_err(|e| e.to_string())?;
        let u = microstate_log_upper_bound(p, &band).map_err(|e| e.to_string())?;
        let l = microstate_log_lower_bound(p, &band).map_err(|e| e.to_string())?;
        up.push((n, u.sym_rate(n, 2)));
        lo.push((n, l.sym_rate(n, 2)));
    }
    Ok((up, lo))
}

fn fmt_series(s: &[(usize, f64)]) -> String {
    s.iter()
        .map(|(_, v)| format!("{v:.5}"))
        .collect::<Vec<_>>()
        .join(", ")
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let p = tilted();
    let i = discrete_mutual_information(&p).map_err(|e| e.to_string())?;
    ensure((i - 0.19274).abs() < 5e-5, || format!("reference I = {i}"))?;
    let ns = [64, 128, 256, 512];
    let (up, lo) = rate_series(&p, r(1, 50), &ns)?;
    let mut failures = Vec::new();
    for (label, s) in [("upper-count rate", &up), ("lower-count rate", &lo)] {
        let last = s.last().unwrap().1;
        if (last - i).abs() > C2_FINAL_TOL {
            failures.push(format!(
                "{label} {last:.5} at N=512 not within {C2_FINAL_TOL} of I={i:.5}"
            ));
        }
        let fit = extrapolate_rate(s).map_err(|e| e.to_string())?;
        if (fit.intercept - i).abs() > C2_INTERCEPT_TOL {
            failures.push(format!(
                "{label} intercept {:.5} not within {C2_INTERCEPT_TOL} of I={i:.5}",
                fit.intercept
            ));
        }
    }
    let gaps: Vec<f64> = up.iter().zip(&lo).map(|(a, b)| (a.1 - b.1).abs()).collect();
    if !gaps.windows(2).all(|w| w[1] < w[0]) {
        failures.push(format!("gap not monotone: {gaps:.5?}"));
    }
    let elapsed = start.elapsed();
    if elapsed > C2_RUNTIME {
        failures.push(format!("took {elapsed:?}"));
    }
    let detail = format!(
        "upper-count [{}], lower-count [{}]",
        fmt_series(&up),
        fmt_series(&lo)
    );
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(format!("{}; {detail}", failures.join("; ")))
    }
}

/// The rate bounding `I` from above is the one computed from the lower
/// count; the upper count overshoots `(N!)²` for a product law and gives a
/// negative rate that rises toward zero.
fn criterion_3() -> Verdict {
    let ns = [64, 128, 256, 512];
    let (up, lo) = rate_series(&product(), r(1, 20), &ns)?;
    let last = lo.last().unwrap().1;
    ensure(last <= C3_FINAL_MAX, || {
        format!("rate {last} at N=512 exceeds {C3_FINAL_MAX}")
    })?;
    ensure(lo.windows(2).all(|w| w[1].1 < w[0].1), || {
        format!("not decreasing: [{}]", fmt_series(&lo))
    })?;
    Ok(format!(
        "lower-count rate [{}] decreasing, ≤ {C3_FINAL_MAX}; upper-count rate [{}] stays below 0",
        fmt_series(&lo),
        fmt_series(&up)
    ))
}

fn criterion_4() -> Verdict {
    let start = Instant::now();
    let p = diag();
    let band = BandSpec::new(r(1, 4), 8).map_err(|e| e.to_string())?;
    let brute = brute_force_count(&p, &band).map_err(|e| e.to_string())?;
    let exact = brute.anchored_members as f64 / brute.anchored_total as f64;
    let trials = 200_000;
    let est = microstate_mc_estimate(&p, &band, trials, 20240601).map_err(|e| e.to_string())?;
    let p_hat = est.successes as f64 / trials as f64;
    let se = (exact * (1.0 - exact) / trials as f64).sqrt();
    let z = (p_hat - exact).abs() / se;
    ensure(z <= C4_SIGMAS, || {
        format!("MC {p_hat} vs brute {exact}: {z:.2} standard errors")
    })?;
    let elapsed = start.elapsed();
    ensure(elapsed < C4_RUNTIME, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "MC {p_hat:.6} vs brute {exact:.6}: {z:.2} standard errors, {elapsed:.1?}"
    ))
}

fn criterion_5() -> Verdict {
    let p = ProbVector::from_ratios(&[(1, 2), (1, 2)]).map_err(|e| e.to_string())?;
    let s = std::f64::consts::LN_2;
    let d = 2.0;
    let mut rates = Vec::new();
    for n in (20..=400).step_by(20) {
        let band = BandSpec::new(r(1, 20), n).map_err(|e| e.to_string())?;
        let rate = typical_set_log_count(&p, &band).log_value / n as f64;
        let nf = n as f64;
        ensure(rate <= s + (d + 2.0) * (nf + 1.0).ln() / nf, || {
            format!("N={n}: {rate} above the sup bound")
        })?;
        ensure(rate <= s + C5_SUP_SLACK, || {
            format!("N={n}: {rate} exceeds log 2")
        })?;
        rates.push((n, rate));
    }
    ensure(rates.windows(2).all(|w| w[1].1 > w[0].1), || {
        format!("not increasing: [{}]", fmt_series(&rates))
    })?;
    let last = rates.last().unwrap().1;
    ensure((s - last).abs() <= C5_FINAL_TOL, || {
        format!("final {last} not within {C5_FINAL_TOL} of log 2")
    })?;
    Ok(format!(
        "increasing from {:.5} to {last:.5}, log 2 = {s:.5}",
        rates[0].1
    ))
}

fn criterion_6() -> Verdict {
    let tc = check_type_class_bound(20, 4);
    let st = check_stirling_bound(200, 4);
    for c in [&tc, &st] {
        ensure(c.passed(), || {
            format!(
                "{}: {} violations, first {:?}",
                c.name, c.violations, c.first_violation
            )
        })?;
    }
    Ok(format!(
        "type-class bound {} types, Stirling bound {} types, zero violations",
        tc.cases, st.cases
    ))
}

fn criterion_7() -> Verdict {
    let window = MomentWindow::new(2, 0.05, None).map_err(|e| e.to_string())?;
    let run = |rho: Rational| {
        DistributionSpec::tilted(rho)
            .and_then(|spec| approximating_mc_estimate(&spec, &window, 24, 100_000, 7))
    };
    let a = run(r(0, 1)).map_err(|e| e.to_string())?;
    let b = run(r(1, 2)).map_err(|e| e.to_string())?;
    ensure(a.successes > b.successes && a.ci_low > b.ci_high, || {
        format!(
            "ρ=0 {} successes, CI [{:.6}, {:.6}]; ρ=1/2 {} successes, CI [{:.6}, {:.6}]",
            a.successes, a.ci_low, a.ci_high, b.successes, b.ci_low, b.ci_high
        )
    })?;
    Ok(format!(
        "ρ=0 {}/100000 vs ρ=1/2 {}/100000, log-CIs [{:.6}, {:.6}] and [{:.6}, {:.6}] disjoint",
        a.successes, b.successes, a.ci_low, a.ci_high, b.ci_low, b.ci_high
    ))
}

fn criterion_8() -> Verdict {
    let start = Instant::now();
    let spec = DistributionSpec::uniform(r(0, 1), r(1, 1)).map_err(|e| e.to_string())?;
    let window = MomentWindow::new(2, 0.1, Some(1.0)).map_err(|e| e.to_string())?;
    let v = lebesgue_volume_mc_estimate(&spec, &window, 24, 100_000, 11, SamplingBox::Support)
        .map_err(|e| e.to_string())?;
    ensure(v.log_volume_rate.abs() <= C8_TOL, || {
        format!("rate {} not within {C8_TOL} of H = 0", v.log_volume_rate)
    })?;
    let elapsed = start.elapsed();
    ensure(elapsed < C8_RUNTIME, || format!("took {elapsed:?}"))?;
    Ok(format!(
        "volume rate {:.6} ({} of {} accepted), {elapsed:.1?}",
        v.log_volume_rate, v.successes, v.trials
    ))
}

fn criterion_9() -> Verdict {
    let rep = approximating_inclusion_check(&diag(), 4, r(9, 10)).map_err(|e| e.to_string())?;
    ensure(!rep.vacuous && rep.tuples_checked > 0, || {
        "inclusion check was vacuous".into()
    })?;
    ensure(rep.violations.is_empty(), || {
        format!(
            "{} violations, first {:?}",
            rep.violations.len(),
            rep.violations[0]
        )
    })?;
    Ok(format!(
        "{} tuples, {} members, δ′ = {}, no violations",
        rep.tuples_checked, rep.members, rep.delta_prime
    ))
}

fn config(name: &str) -> StudyConfig {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name);
    StudyConfig::load(&path).expect("bundled config")
}

/// Every CSV column except `wall_ms`.
fn values(rows: &[StudyRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            let mut f = r.fields();
            f.remove(10);
            f
        })
        .collect()
}

fn criterion_10() -> Verdict {
    let configs = [
        "discrete_mc_diag.json",
        "continuous_tilted_0.json",
        "continuous_tilted_half.json",
        "bg_volume_uniform.json",
    ];
    let pool = |k| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build()
            .expect("pool")
    };
    let (serial, parallel) = (pool(1), pool(C10_THREADS));
    for name in configs {
        let c = config(name);
        let kind = c.kind().map_err(|e| e.to_string())?;
        let run =
            |p: &rayon::ThreadPool| p.install(|| run_study(&c, kind)).map(|o| values(&o.rows));
        let a = run(&serial).map_err(|e| e.to_string())?;
        let b = run(&serial).map_err(|e| e.to_string())?;
        let c8 = run(&parallel).map_err(|e| e.to_string())?;
        ensure(a == b, || format!("{name}: serial reruns differ"))?;
        ensure(a == c8, || {
            format!("{name}: serial and {C10_THREADS}-thread runs differ")
        })?;
    }
    Ok(format!(
        "{} MC configs identical across reruns and 1 vs {C10_THREADS} threads",
        configs.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("oracle equivalence", criterion_1),
        ("discrete bracket convergence", criterion_2),
        ("independence limit", criterion_3),
        ("MC consistency", criterion_4),
        ("typical-set growth", criterion_5),
        ("type-class and Stirling bounds", criterion_6),
        ("continuous separation", criterion_7),
        ("Lebesgue-volume probe", criterion_8),
        ("approximating inclusion", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (k, (name, f)) in criteria.iter().enumerate() {
        let verdict = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match verdict {
            Ok(detail) => println!("criterion {:>2} PASS {name}: {detail}", k + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL {name}: {detail}", k + 1);
            }
        }
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

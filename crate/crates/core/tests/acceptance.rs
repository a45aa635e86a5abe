//! One test per acceptance criterion; each prints a single
//! `criterion N: PASS|FAIL ...` line (run with `--nocapture` to see them).

use std::process::Command;
use std::time::{Duration, Instant};

use bures::closed_form::*;
use bures::density::{density_moment, g_q_kernel, g_q_kernel_tail, MomentWeight};
use bures::oracle::{
    constrained_average_m2, constrained_average_m3, mellin_g21_quadrature, unconstrained_average, OracleStatistic,
};
use bures::record::ResultRow;
use bures::special::{digamma, mellin_g21, MeijerFamilyParams, EULER_GAMMA};
use bures::verify::{matrix_model_rows, mcmc_rows};

/// Prints the verdict line, then fails the test if the criterion failed.
fn report(n: u32, failures: &[String], elapsed: Duration, limit: Duration, detail: &str) {
    let in_time = elapsed <= limit;
    let ok = failures.is_empty() && in_time;
    println!(
        "criterion {n}: {} ({detail}; {:.2} s of {} s allowed)",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    for f in failures {
        println!("  {f}");
    }
    assert!(in_time, "criterion {n} took {elapsed:?}, limit {limit:?}");
    assert!(failures.is_empty(), "criterion {n}: {failures:#?}");
}

fn within(failures: &mut Vec<String>, what: String, got: f64, expect: f64, tol: f64) {
    let diff = (got - expect).abs();
    if diff.is_nan() || diff > tol {
        failures.push(format!("{what}: {got} vs {expect} (diff {diff:e} > {tol:e})"));
    }
}

fn p(m: usize, a: f64) -> EnsembleParams {
    EnsembleParams::new(m, a).unwrap()
}

#[test]
fn criterion_01_specialisation_grid() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let mut pairs = 0;
    for m in 1..=12 {
        for n in m..=12 {
            pairs += 1;
            let d = Dims::new(m, n).unwrap();
            let (a, b) = (avg_purity_bures(d), avg_purity_general(d.params()));
            within(&mut failures, format!("purity ({m},{n})"), a, b, 1e-12 * b.abs());
            let (a, b) = (avg_vn_bures(d), avg_vn_general(d.params()));
            within(&mut failures, format!("entropy ({m},{n})"), a, b, 1e-12 * b.abs());
        }
    }
    assert_eq!(pairs, 78);
    report(1, &failures, t.elapsed(), Duration::from_secs(1), "78 (m, n) pairs, 1e-12 relative");
}

#[test]
fn criterion_02_oracle_m2() {
    let t = Instant::now();
    let mut failures = Vec::new();
    for n in 2..=5 {
        let d = Dims::new(2, n).unwrap();
        let sp = constrained_average_m2(d.alpha(), OracleStatistic::SP, 1e-9).unwrap().value;
        let sv = constrained_average_m2(d.alpha(), OracleStatistic::SvN, 1e-9).unwrap().value;
        within(&mut failures, format!("S_P n={n}"), sp, avg_purity_bures(d), 1e-8);
        within(&mut failures, format!("S_vN n={n}"), sv, avg_vn_bures(d), 1e-8);
        if n == 2 {
            within(&mut failures, "S_P n=2 = 7/8".into(), sp, 0.875, 1e-8);
            within(&mut failures, "S_vN n=2 = 2 ln 2 - 7/6".into(), sv, 2.0 * 2f64.ln() - 7.0 / 6.0, 1e-8);
        }
    }
    report(2, &failures, t.elapsed(), Duration::from_secs(5), "m = 2, n = 2..5, 1e-8");
}

#[test]
fn criterion_03_oracle_m3() {
    let t = Instant::now();
    let mut failures = Vec::new();
    for n in 3..=5 {
        let d = Dims::new(3, n).unwrap();
        let sp = constrained_average_m3(d.alpha(), OracleStatistic::SP, 1e-7).unwrap().value;
        let sv = constrained_average_m3(d.alpha(), OracleStatistic::SvN, 1e-7).unwrap().value;
        within(&mut failures, format!("S_P n={n}"), sp, avg_purity_bures(d), 1e-6);
        within(&mut failures, format!("S_vN n={n}"), sv, avg_vn_bures(d), 1e-6);
    }
    report(3, &failures, t.elapsed(), Duration::from_secs(60), "m = 3, n = 3..5, 1e-6");
}

#[test]
fn criterion_04_unconstrained_oracle() {
    let t = Instant::now();
    let mut failures = Vec::new();
    for m in 1..=2 {
        for a in [-0.5, 0.0, 0.5, 1.5] {
            let tp = unconstrained_average(m, a, OracleStatistic::TP, 1e-9).unwrap().value;
            let tv = unconstrained_average(m, a, OracleStatistic::TvN, 1e-9).unwrap().value;
            within(&mut failures, format!("T_P m={m} α={a}"), tp, induced_purity_mean(p(m, a)), 1e-8);
            within(&mut failures, format!("T_vN m={m} α={a}"), tv, induced_vn_mean(p(m, a)), 1e-8);
            if m == 1 && a == 0.0 {
                within(&mut failures, "T_P m=1 α=0 = 2".into(), tp, 2.0, 1e-8);
                within(&mut failures, "T_vN m=1 α=0 = 1 - γ".into(), tv, 1.0 - EULER_GAMMA, 1e-8);
            }
        }
    }
    report(4, &failures, t.elapsed(), Duration::from_secs(5), "m <= 2, four α, 1e-8");
}

#[test]
fn criterion_05_finite_sum_identities() {
    let t = Instant::now();
    let mut failures = Vec::new();
    for m in 1..=6 {
        for a in [-0.5, 0.0, 0.5, 1.0, 1.5, 2.5] {
            let e = p(m, a);
            for q in [a, a + 1.0] {
                for beta in 0..=2 {
                    let sum = i_beta_sum(q, beta as f64, e).unwrap();
                    let closed = i_beta_closed(q, beta, e, 1.0).unwrap();
                    within(&mut failures, format!("I sum β={beta} m={m} α={a} q={q}"), sum, closed, 1e-11);
                }
                let (hs, hc) = (h_q_sum(q, e).unwrap(), h_q_closed(q, e).unwrap());
                within(&mut failures, format!("H sum m={m} α={a} q={q}"), hs, hc, 1e-10);
            }
            // m(m + 2α + 1)
            let s = 2.0 * e.trace_shape();
            let i_pair = i_beta_sum(a, 1.0, e).unwrap() + i_beta_sum(a + 1.0, 1.0, e).unwrap();
            within(&mut failures, format!("I pair m={m} α={a}"), i_pair, -s, 1e-11);
            let h_pair = h_q_closed(a, e).unwrap() + h_q_closed(a + 1.0, e).unwrap();
            let expect = -s * (digamma(m as f64 + a + 1.0).unwrap() + 1.0);
            within(&mut failures, format!("H pair m={m} α={a}"), h_pair, expect, 1e-11);
        }
    }
    report(5, &failures, t.elapsed(), Duration::from_secs(1), "m <= 6, six α, q ∈ {α, α+1}");
}

#[test]
fn criterion_06_mellin_spot_checks() {
    let t = Instant::now();
    let mut failures = Vec::new();
    let cases = [
        (1, 0.0, 0.5, 1.0),
        (2, -0.5, -0.5, 1.5),
        (2, -0.5, 0.5, 2.5),
        (2, 0.5, 0.5, 2.0),
        (3, 0.5, 1.5, 2.0),
        (3, 1.5, 2.5, 3.5),
    ];
    for (m, a, q, s) in cases {
        let mp = MeijerFamilyParams::new(m, a, q).unwrap();
        let expect = mellin_g21(mp, s).unwrap();
        let got = mellin_g21_quadrature(mp, s, 1e-9).unwrap().value;
        within(&mut failures, format!("m={m} α={a} q={q} s={s}"), got, expect, 1e-6 * expect.abs());
    }
    let root_pi = std::f64::consts::PI.sqrt();
    let sqrt_case = mellin_g21_quadrature(MeijerFamilyParams::new(1, 0.0, 0.5).unwrap(), 1.0, 1e-9).unwrap();
    within(&mut failures, "√π case".into(), sqrt_case.value, root_pi, 1e-6 * root_pi);
    report(6, &failures, t.elapsed(), Duration::from_secs(10), "6 (m, α, q, s) cases, 1e-6 relative");
}

#[test]
fn criterion_07_density_closure() {
    let t = Instant::now();
    let mut failures = Vec::new();
    for (m, a) in [(2, -0.5), (2, 0.5), (3, 0.5)] {
        let e = p(m, a);
        let moment = |w| density_moment(e, w, 1e-7).unwrap().value;
        let tag = format!("m={m} α={a}");
        within(&mut failures, format!("normalisation {tag}"), moment(MomentWeight::Unity) / m as f64, 1.0, 1e-5);
        within(&mut failures, format!("first moment {tag}"), moment(MomentWeight::X), e.trace_shape(), 1e-5);
        within(&mut failures, format!("second moment {tag}"), moment(MomentWeight::XSquared), induced_purity_mean(e), 1e-5);
        within(&mut failures, format!("x ln x moment {tag}"), moment(MomentWeight::XLogX), induced_vn_mean(e), 1e-4);
        for x in [0.25, 1.0, 4.0] {
            for q in [a, a + 1.0] {
                let head = g_q_kernel(q, e, x, 1e-8).unwrap();
                let tail = g_q_kernel_tail(q, e, x, 1e-8).unwrap();
                within(&mut failures, format!("kernel forms {tag} q={q} x={x}"), head, tail, 1e-6);
            }
        }
    }
    report(7, &failures, t.elapsed(), Duration::from_secs(120), "three (m, α), four moments, kernel forms at three x");
}

fn gate_failures(rows: &[ResultRow]) -> Vec<String> {
    rows.iter()
        .filter(|r| r.passed != Some(true))
        .map(|r| format!("{}: {} ± {:?} vs {:?}", r.name, r.value, r.std_err, r.reference))
        .collect()
}

#[test]
fn criterion_08_mcmc_gates() {
    let t = Instant::now();
    let mut rows = mcmc_rows(Dims::new(2, 2).unwrap(), 200_000, 42);
    rows.extend(mcmc_rows(Dims::new(4, 5).unwrap(), 200_000, 42));
    for r in &rows {
        println!("  {}: {:.6} ± {:.6} (ref {:.6})", r.name, r.value, r.std_err.unwrap_or(0.0), r.reference.unwrap_or(f64::NAN));
    }
    let failures = gate_failures(&rows);
    report(8, &failures, t.elapsed(), Duration::from_secs(120), "seed 42, 2e5 kept samples, 3σ gates");
}

#[test]
fn criterion_09_matrix_model() {
    let t = Instant::now();
    let mut rows = matrix_model_rows(Dims::new(2, 2).unwrap(), 100_000, 42);
    rows.extend(matrix_model_rows(Dims::new(3, 3).unwrap(), 100_000, 42));
    for r in &rows {
        println!("  {}: {:.6} ± {:.6} (ref {:.6})", r.name, r.value, r.std_err.unwrap_or(0.0), r.reference.unwrap_or(f64::NAN));
    }
    let failures = gate_failures(&rows);
    report(9, &failures, t.elapsed(), Duration::from_secs(60), "(2,2), (3,3), 1e5 draws, 3σ gates");
}

fn verify_json() -> (String, i32) {
    let out = Command::new(env!("CARGO_BIN_EXE_bures"))
        .args(["verify", "--level", "full", "--seed", "1", "--format", "json"])
        .output()
        .expect("binary runs");
    let text = String::from_utf8(out.stdout).expect("utf-8 output");
    let stripped: String = text
        .lines()
        .filter(|l| !l.trim_start().starts_with("\"elapsed_ms\""))
        .collect::<Vec<_>>()
        .join("\n");
    (stripped, out.status.code().unwrap_or(-1))
}

#[test]
fn criterion_10_determinism() {
    let t = Instant::now();
    let (first, code1) = verify_json();
    let (second, code2) = verify_json();
    let mut failures = Vec::new();
    if first != second {
        failures.push("the two JSON outputs differ beyond elapsed_ms".into());
    }
    if first.is_empty() || !first.contains("\"command\": \"verify\"") {
        failures.push("no verify record on stdout".into());
    }
    if code1 != code2 {
        failures.push(format!("exit codes differ: {code1} vs {code2}"));
    }
    // no runtime bound is stated for this criterion; the full suite's own limits apply
    report(10, &failures, t.elapsed(), Duration::from_secs(600), "two `verify --level full --seed 1` runs");
}

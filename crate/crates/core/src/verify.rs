//! The verification suite behind `bures verify`: every identity, oracle
//! comparison and statistical gate, as rows of a [`RunRecord`].
//!
//! Groups run in parallel but rows come back in a fixed order, so the
//! record depends only on the level and the seed.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::*;
use crate::density::{density_moment, g_q_kernel, g_q_kernel_tail, MomentWeight};
use crate::error::Result;
use crate::oracle::{
    constrained_average_m2, constrained_average_m3, gamma_log_integral_check, mellin_g21_quadrature,
    unconstrained_average, OracleStatistic,
};
use crate::record::{ResultRow, RunRecord};
use crate::sampling::{
    constrain, correlation, mean_with_error, sample_bures_matrix_model, sample_unconstrained_mcmc, ErrorModel,
    McmcConfig, SampleBatch, Statistic,
};
use crate::special::{digamma, gamma, mellin_g21, MeijerFamilyParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Level {
    /// Closed-form identities, quadrature oracles and Mellin checks.
    Fast,
    /// Everything in `Fast` plus the density and Monte Carlo suites.
    Full,
}

const ALPHAS: [f64; 6] = [-0.5, 0.0, 0.5, 1.0, 1.5, 2.5];
/// Kept samples per MCMC chain and draws per matrix-model run.
pub const MCMC_SAMPLES: usize = 200_000;
pub const MATRIX_MODEL_DRAWS: usize = 100_000;
/// Statistical gates accept within this many standard errors.
pub const SIGMA_GATE: f64 = 3.0;

fn params(m: usize, alpha: f64) -> EnsembleParams {
    EnsembleParams::new(m, alpha).expect("suite parameters are valid")
}

fn dims(m: usize, n: usize) -> Dims {
    Dims::new(m, n).expect("suite dimensions are valid")
}

/// A check whose computation failed outright.
fn failed(name: String, err: crate::Error) -> ResultRow {
    let mut row = ResultRow::new(format!("{name} [error: {err}]"), 0.0);
    row.passed = Some(false);
    row
}

fn check(name: String, value: Result<f64>, reference: f64, tol: f64) -> ResultRow {
    match value {
        Ok(v) => ResultRow::new(name, v).with_reference(reference).with_tolerance(tol),
        Err(e) => failed(name, e),
    }
}

/// Largest value of `f` over a grid, reported against 0.
fn worst<I: IntoIterator<Item = Result<f64>>>(name: &str, diffs: I, tol: f64) -> ResultRow {
    let mut max = 0.0f64;
    for d in diffs {
        match d {
            Ok(d) => max = max.max(d),
            Err(e) => return failed(name.to_string(), e),
        }
    }
    ResultRow::new(name, max).with_reference(0.0).with_tolerance(tol)
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

fn specialisation() -> Vec<ResultRow> {
    let pairs: Vec<Dims> = (1..=12).flat_map(|m| (m..=12).map(move |n| dims(m, n))).collect();
    vec![
        worst(
            "purity (m, n) form = general-alpha form, 1 <= m <= n <= 12 [max rel diff]",
            pairs.iter().map(|&d| Ok(rel(avg_purity_bures(d), avg_purity_general(d.params())))),
            1e-12,
        ),
        worst(
            "von Neumann (m, n) form = general-alpha form, 1 <= m <= n <= 12 [max rel diff]",
            pairs.iter().map(|&d| Ok(rel(avg_vn_bures(d), avg_vn_general(d.params())))),
            1e-12,
        ),
    ]
}

fn grid() -> impl Iterator<Item = EnsembleParams> {
    (1..=6).flat_map(|m| ALPHAS.into_iter().map(move |a| params(m, a)))
}

fn moment_relations() -> Vec<ResultRow> {
    vec![
        worst(
            "purity moment relation maps E_h[T_P] to E[S_P], m <= 6 [max rel diff]",
            grid().map(|p| Ok(rel(purity_moment_relation(p, induced_purity_mean(p)), avg_purity_general(p)))),
            1e-12,
        ),
        worst(
            "entropy moment relation maps E_h[T_vN] to E[S_vN], m <= 6 [max abs diff]",
            grid().map(|p| Ok((vn_moment_relation(p, induced_vn_mean(p)) - avg_vn_general(p)).abs())),
            1e-12,
        ),
    ]
}

fn finite_sums() -> Vec<ResultRow> {
    let qs = |p: EnsembleParams| [p.alpha, p.alpha + 1.0].into_iter().map(move |q| (p, q));
    let i_diffs = grid().flat_map(qs).flat_map(|(p, q)| {
        (0..=2).map(move |b| Ok((i_beta_sum(q, b as f64, p)? - i_beta_closed(q, b, p, 1.0)?).abs()))
    });
    let h_diffs = grid().flat_map(qs).map(|(p, q)| Ok((h_q_sum(q, p)? - h_q_closed(q, p)?).abs()));
    let shape = |p: EnsembleParams| 2.0 * p.trace_shape();
    let i_pair = grid().map(|p| Ok((i_beta_sum(p.alpha, 1.0, p)? + i_beta_sum(p.alpha + 1.0, 1.0, p)? + shape(p)).abs()));
    let h_pair = grid().map(|p| {
        let psi = digamma(p.m as f64 + p.alpha + 1.0)?;
        let pair = h_q_closed(p.alpha, p)? + h_q_closed(p.alpha + 1.0, p)?;
        Ok((pair + shape(p) * (psi + 1.0)).abs())
    });
    vec![
        worst("I_q^(beta) finite sum = closed form, beta in {0, 1, 2} [max abs diff]", i_diffs, 1e-11),
        worst("H_q finite sum = closed form [max abs diff]", h_diffs, 1e-10),
        worst("I_q^(1) pair: q = alpha and alpha + 1 sum to -m(m+2alpha+1) [max abs diff]", i_pair, 1e-11),
        worst("H_q pair: q = alpha and alpha + 1 sum to -m(m+2alpha+1)(psi(m+alpha+1)+1) [max abs diff]", h_pair, 1e-11),
    ]
}

fn oracle_m2() -> Vec<ResultRow> {
    let mut rows = Vec::new();
    for n in 2..=5 {
        let d = dims(2, n);
        let a = d.alpha();
        let q = |s| constrained_average_m2(a, s, 1e-9).map(|r| r.value);
        rows.push(check(format!("m=2 oracle S_P (n={n}) = closed form"), q(OracleStatistic::SP), avg_purity_bures(d), 1e-8));
        rows.push(check(format!("m=2 oracle S_vN (n={n}) = closed form"), q(OracleStatistic::SvN), avg_vn_bures(d), 1e-8));
        rows.push(check(format!("m=2 normalisation constant (n={n})"), q(OracleStatistic::Unity), 1.0, 1e-8));
    }
    rows
}

fn oracle_m3() -> Vec<ResultRow> {
    let mut rows = Vec::new();
    for n in 3..=5 {
        let d = dims(3, n);
        let a = d.alpha();
        let q = |s| constrained_average_m3(a, s, 1e-7).map(|r| r.value);
        rows.push(check(format!("m=3 oracle S_P (n={n}) = closed form"), q(OracleStatistic::SP), avg_purity_bures(d), 1e-6));
        rows.push(check(format!("m=3 oracle S_vN (n={n}) = closed form"), q(OracleStatistic::SvN), avg_vn_bures(d), 1e-6));
        rows.push(check(format!("m=3 normalisation constant (n={n})"), q(OracleStatistic::Unity), 1.0, 1e-6));
    }
    rows
}

fn oracle_unconstrained() -> Vec<ResultRow> {
    let mut rows = Vec::new();
    for m in 1..=2 {
        for a in [-0.5, 0.0, 0.5, 1.5] {
            let p = params(m, a);
            let q = |s| unconstrained_average(m, a, s, 1e-9).map(|r| r.value);
            let tag = format!("(m={m}, alpha={a})");
            rows.push(check(format!("unconstrained oracle T_P {tag} = induced purity"), q(OracleStatistic::TP), induced_purity_mean(p), 1e-8));
            rows.push(check(format!("unconstrained oracle T_vN {tag} = induced entropy"), q(OracleStatistic::TvN), induced_vn_mean(p), 1e-8));
            rows.push(check(format!("unconstrained oracle trace sum {tag}"), q(OracleStatistic::TraceSum), p.trace_shape(), 1e-8));
            rows.push(check(format!("unconstrained normalisation constant {tag}"), q(OracleStatistic::Unity), 1.0, 1e-8));
        }
    }
    for d in [1.0, 2.0, 2.5] {
        let expect = gamma(d) * digamma(d).expect("positive argument");
        let got = gamma_log_integral_check(d, 1e-11).map(|r| r.value);
        rows.push(check(format!("log-gamma integral = Gamma(d) psi(d) (d={d})"), got, expect, 1e-10));
    }
    rows
}

/// `(m, α, q, s)` for the Mellin spot checks.
pub const MELLIN_CASES: [(usize, f64, f64, f64); 6] = [
    (1, 0.0, 0.5, 1.0),
    (2, -0.5, -0.5, 1.5),
    (2, -0.5, 0.5, 2.5),
    (2, 0.5, 0.5, 2.0),
    (3, 0.5, 1.5, 2.0),
    (3, 1.5, 2.5, 3.5),
];

fn mellin() -> Vec<ResultRow> {
    MELLIN_CASES
        .iter()
        .map(|&(m, a, q, s)| {
            let name = format!("Mellin transform of G21 (m={m}, alpha={a}, q={q}, s={s})");
            let p = match MeijerFamilyParams::new(m, a, q) {
                Ok(p) => p,
                Err(e) => return failed(name, e),
            };
            match mellin_g21(p, s) {
                Ok(expect) => check(name, mellin_g21_quadrature(p, s, 1e-9).map(|r| r.value), expect, 1e-6 * expect.abs()),
                Err(e) => failed(name, e),
            }
        })
        .collect()
}

/// `(m, α)` for the density closure checks.
pub const DENSITY_CASES: [(usize, f64); 3] = [(2, -0.5), (2, 0.5), (3, 0.5)];

fn density() -> Vec<ResultRow> {
    DENSITY_CASES
        .par_iter()
        .map(|&(m, a)| {
            let p = params(m, a);
            let tag = format!("(m={m}, alpha={a})");
            let moment = |w| density_moment(p, w, 1e-7).map(|r| r.value);
            let mut rows = vec![
                check(format!("one-point density normalisation {tag}"), moment(MomentWeight::Unity).map(|v| v / m as f64), 1.0, 1e-5),
                check(format!("one-point density first moment {tag}"), moment(MomentWeight::X), p.trace_shape(), 1e-5),
                check(format!("one-point density second moment = induced purity {tag}"), moment(MomentWeight::XSquared), induced_purity_mean(p), 1e-5),
                check(format!("one-point density x ln x moment = induced entropy {tag}"), moment(MomentWeight::XLogX), induced_vn_mean(p), 1e-4),
            ];
            for x in [0.25, 1.0, 4.0] {
                let name = format!("kernel integral over (0,1) = minus integral over (1,inf) {tag}, q=alpha, x={x}");
                rows.push(match g_q_kernel_tail(a, p, x, 1e-8) {
                    Ok(tail) => check(name, g_q_kernel(a, p, x, 1e-8), tail, 1e-6),
                    Err(e) => failed(name, e),
                });
            }
            rows
        })
        .flatten()
        .collect()
}

fn stat_row(name: String, batch: &SampleBatch, statistic: Statistic, reference: f64) -> ResultRow {
    match batch.entropy_stats(statistic) {
        Ok(s) => ResultRow::new(name, s.mean)
            .with_std_err(s.std_err)
            .with_reference(reference)
            .with_sigma_gate(SIGMA_GATE),
        Err(e) => failed(name, e),
    }
}

fn gated(name: String, (value, std_err): (f64, f64), reference: f64) -> ResultRow {
    ResultRow::new(name, value)
        .with_std_err(std_err)
        .with_reference(reference)
        .with_sigma_gate(SIGMA_GATE)
}

/// Constrained means, θ moments and the θ–S_P correlation of one chain.
pub fn mcmc_rows(d: Dims, count: usize, seed: u64) -> Vec<ResultRow> {
    let tag = format!("(m={}, n={})", d.m, d.n);
    let name = format!("MCMC {tag}");
    let p = d.params();
    let batch = match sample_unconstrained_mcmc(p, McmcConfig::new(d.m, count, seed)) {
        Ok(b) => b,
        Err(e) => return vec![failed(name, e)],
    };
    let (simplex, theta) = match constrain(&batch) {
        Ok(v) => v,
        Err(e) => return vec![failed(name, e)],
    };
    let k = p.trace_shape();
    let model = ErrorModel::BatchMeans;
    let centred: Vec<f64> = theta.iter().map(|t| (t - k).powi(2)).collect();
    let purity: Vec<f64> = simplex.iter().map(|s| s.purity()).collect();
    let mut rows = vec![
        stat_row(format!("MCMC S_P {tag} = closed form"), &batch, Statistic::SP, avg_purity_bures(d)),
        stat_row(format!("MCMC S_vN {tag} = closed form"), &batch, Statistic::SvN, avg_vn_bures(d)),
        stat_row(format!("MCMC T_P {tag} = induced purity"), &batch, Statistic::TP, induced_purity_mean(p)),
        stat_row(format!("MCMC T_vN {tag} = induced entropy"), &batch, Statistic::TvN, induced_vn_mean(p)),
        gated(format!("MCMC theta mean {tag} = Gamma shape"), mean_with_error(&theta, model), k),
        gated(format!("MCMC theta variance {tag} = Gamma shape"), mean_with_error(&centred, model), k),
    ];
    rows.push(match correlation(&theta, &purity, model) {
        Ok(c) => gated(format!("MCMC theta-S_P correlation {tag} = 0"), c, 0.0),
        Err(e) => failed(format!("MCMC theta-S_P correlation {tag}"), e),
    });
    rows
}

/// Means of the matrix-model construction for square `d`.
pub fn matrix_model_rows(d: Dims, count: usize, seed: u64) -> Vec<ResultRow> {
    let tag = format!("(m={}, n={})", d.m, d.n);
    match sample_bures_matrix_model(d, count, seed) {
        Ok(b) => vec![
            stat_row(format!("matrix model S_P {tag} = closed form"), &b, Statistic::SP, avg_purity_bures(d)),
            stat_row(format!("matrix model S_vN {tag} = closed form"), &b, Statistic::SvN, avg_vn_bures(d)),
        ],
        Err(e) => vec![failed(format!("matrix model {tag}"), e)],
    }
}

type Group = Box<dyn Fn(u64) -> Vec<ResultRow> + Send + Sync>;

fn groups(level: Level) -> Vec<Group> {
    let mut g: Vec<Group> = vec![
        Box::new(|_| specialisation()),
        Box::new(|_| moment_relations()),
        Box::new(|_| finite_sums()),
        Box::new(|_| oracle_m2()),
        Box::new(|_| oracle_m3()),
        Box::new(|_| oracle_unconstrained()),
        Box::new(|_| mellin()),
    ];
    if level == Level::Full {
        g.push(Box::new(|_| density()));
        g.push(Box::new(|s| mcmc_rows(dims(2, 2), MCMC_SAMPLES, s)));
        g.push(Box::new(|s| mcmc_rows(dims(4, 5), MCMC_SAMPLES, s)));
        g.push(Box::new(|s| matrix_model_rows(dims(2, 2), MATRIX_MODEL_DRAWS, s)));
        g.push(Box::new(|s| matrix_model_rows(dims(3, 3), MATRIX_MODEL_DRAWS, s)));
    }
    g
}

/// Runs the suite; `elapsed_ms` is left at 0 for the caller to fill in.
pub fn run_verify(level: Level, seed: u64) -> RunRecord {
    let rows: Vec<Vec<ResultRow>> = groups(level).par_iter().map(|g| g(seed)).collect();
    let mut record = RunRecord::new("verify");
    record.param("level", match level {
        Level::Fast => "fast",
        Level::Full => "full",
    });
    record.seed = Some(seed);
    record.results = rows.into_iter().flatten().collect();
    record
}

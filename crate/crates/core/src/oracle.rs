//! Brute-force quadrature of the joint eigenvalue densities for `m <= 3`:
//! ground truth that does not use any of the closed forms.
//!
//! Weights are divided by the normalisation constant `c` (or `c'`) before
//! integration so that absolute tolerances act on O(1) numbers. Averages
//! are returned as `∫ stat · w / ∫ w`, so their values do not depend on
//! the constant; `Unity` returns `∫ w / c` itself, which tests it.

use serde::{Deserialize, Serialize};

use crate::closed_form::{log_norm_constant_constrained, log_norm_constant_unconstrained, EnsembleParams};
use crate::error::{Error, Result};
use crate::special::{meijer_g_2_1, MeijerFamilyParams};
use crate::quadrature::{adaptive, exp_tail_cutoff, half_line, AdaptiveOptions, GaussRule, QuadratureResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OracleStatistic {
    #[serde(rename = "S_P")]
    SP,
    #[serde(rename = "S_vN")]
    SvN,
    #[serde(rename = "T_P")]
    TP,
    #[serde(rename = "T_vN")]
    TvN,
    #[serde(rename = "trace_sum")]
    TraceSum,
    #[serde(rename = "unity")]
    Unity,
}

impl OracleStatistic {
    pub fn name(self) -> &'static str {
        match self {
            OracleStatistic::SP => "S_P",
            OracleStatistic::SvN => "S_vN",
            OracleStatistic::TP => "T_P",
            OracleStatistic::TvN => "T_vN",
            OracleStatistic::TraceSum => "trace_sum",
            OracleStatistic::Unity => "unity",
        }
    }

    fn constrained(self, lambda: &[f64]) -> f64 {
        match self {
            OracleStatistic::SP => lambda.iter().map(|l| l * l).sum(),
            OracleStatistic::SvN => -lambda.iter().filter(|&&l| l > 0.0).map(|l| l * l.ln()).sum::<f64>(),
            _ => 1.0,
        }
    }

    fn unconstrained(self, x: &[f64]) -> f64 {
        match self {
            OracleStatistic::TP => x.iter().map(|v| v * v).sum(),
            OracleStatistic::TvN => x.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum(),
            OracleStatistic::TraceSum => x.iter().sum(),
            _ => 1.0,
        }
    }
}

fn check(alpha: f64, tol: f64) -> Result<()> {
    if !(alpha > -1.0) || !alpha.is_finite() {
        return Err(Error::Parameter(format!("alpha = {alpha} must be finite and > -1")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("oracle", format!("tol = {tol} must be positive")));
    }
    Ok(())
}

fn require(stat: OracleStatistic, allowed: &[OracleStatistic], ensemble: &'static str) -> Result<()> {
    if allowed.contains(&stat) {
        Ok(())
    } else {
        Err(Error::SampleKind {
            statistic: stat.name(),
            samples: ensemble,
        })
    }
}

/// Mean of `stat` from the integrals of `stat · w / c` and of `w / c`;
/// `Unity` is the latter alone.
fn finish(stat: OracleStatistic, weighted: QuadratureResult, mass: QuadratureResult) -> QuadratureResult {
    if stat == OracleStatistic::Unity {
        mass
    } else {
        weighted.ratio(mass)
    }
}

/// Relative floor added to every estimate: the rules cannot beat the
/// roundoff of summing a few thousand terms.
const ROUNDOFF: f64 = 1e-14;

/// Constrained average for `m = 2`.
///
/// With `λ₂ = 1 - λ₁` the density is `∝ (2λ-1)² (λ(1-λ))^α` on `[0, 1]`.
/// The integrand is symmetric, so `[0, 1/2]` is split into geometric
/// panels `[2^{-k-1}, 2^{-k}] / 2` (Gauss-Legendre) down to `2^{-50}`, and
/// the last panel `[0, 2^{-51}]` carries the `λ^α` endpoint exactly through
/// Gauss-Jacobi nodes. The error estimate compares 16- and 24-point rules.
pub fn constrained_average_m2(alpha: f64, stat: OracleStatistic, tol: f64) -> Result<QuadratureResult> {
    check(alpha, tol)?;
    require(stat, &[OracleStatistic::SP, OracleStatistic::SvN, OracleStatistic::Unity], "constrained")?;
    const LEVELS: i32 = 50;
    let inv_c = (-log_norm_constant_constrained(EnsembleParams::new(2, alpha)?)).exp();
    let pass = |n: usize, g: &dyn Fn(f64) -> f64| -> Result<f64> {
        let legendre = GaussRule::legendre(n);
        let jacobi = GaussRule::jacobi(n, 0.0, alpha)?;
        let mut total = 0.0;
        for k in 0..LEVELS {
            let hi = 0.5 * 2f64.powi(-k);
            total += legendre.apply(hi / 2.0, hi, 1.0, |l| Ok(g(l) * l.powf(alpha)))?;
        }
        let edge = 0.5 * 2f64.powi(-LEVELS);
        // λ^α = (edge/2)^α (1+x)^α on the mapped rule
        total += jacobi.apply(0.0, edge, (edge / 2.0).powf(alpha), |l| Ok(g(l)))?;
        Ok(2.0 * total)
    };
    let smooth = |with_stat: bool| {
        move |l: f64| {
            let base = inv_c * (2.0 * l - 1.0).powi(2) * (1.0 - l).powf(alpha);
            if with_stat {
                base * stat.constrained(&[l, 1.0 - l])
            } else {
                base
            }
        }
    };
    let integrate = |with_stat: bool| -> Result<QuadratureResult> {
        let g = smooth(with_stat);
        let coarse = pass(16, &g)?;
        let fine = pass(24, &g)?;
        let err = (fine - coarse).abs() + ROUNDOFF * fine.abs();
        if err > tol * fine.abs().max(1.0) {
            return Err(Error::no_convergence(
                "m = 2 constrained oracle",
                format!("rule difference {err:e} exceeds tol = {tol:e}"),
            ));
        }
        Ok(QuadratureResult {
            value: fine,
            abs_error_estimate: err,
            evaluations: 2 * (16 + 24) * (LEVELS as usize + 1),
        })
    };
    let mass = integrate(false)?;
    let weighted = if stat == OracleStatistic::Unity { mass } else { integrate(true)? };
    Ok(finish(stat, weighted, mass))
}

/// Nested adaptive integration of `f(s, t)` over `s ∈ [0, s_max]`,
/// `t ∈ [0, t_max(s)]`. The inner error budget is folded into the estimate.
fn nested<F, T>(f: F, s_max: f64, t_max: T, tol: f64) -> Result<QuadratureResult>
where
    F: Fn(f64, f64) -> f64,
    T: Fn(f64) -> f64,
{
    let inner_tol = tol / (10.0 * s_max);
    let mut inner_evals = 0;
    let outer = adaptive(
        |s| {
            let hi = t_max(s);
            if hi <= 0.0 {
                return Ok(0.0);
            }
            let r = adaptive(|t| Ok(f(s, t)), 0.0, hi, AdaptiveOptions::abs(inner_tol).with_rel(1e-13))?;
            inner_evals += r.evaluations;
            Ok(r.value)
        },
        0.0,
        s_max,
        AdaptiveOptions::abs(tol / 2.0).with_rel(1e-13),
    )?;
    Ok(QuadratureResult {
        value: outer.value,
        abs_error_estimate: outer.abs_error_estimate + inner_tol * s_max + ROUNDOFF * outer.value.abs(),
        evaluations: outer.evaluations + inner_evals,
    })
}

/// Constrained average for `m = 3` on the 2-simplex.
///
/// The integrand is symmetric, so only the ordered region
/// `λ₁ >= λ₂ >= λ₃` is integrated (times 6), with `λ₃ = s²`,
/// `λ₂ = λ₃ + t²` and `λ₁ = 1 - λ₂ - λ₃`; the squares absorb the
/// `λ^α` face singularities.
pub fn constrained_average_m3(alpha: f64, stat: OracleStatistic, tol: f64) -> Result<QuadratureResult> {
    check(alpha, tol)?;
    require(stat, &[OracleStatistic::SP, OracleStatistic::SvN, OracleStatistic::Unity], "constrained")?;
    let inv_c = (-log_norm_constant_constrained(EnsembleParams::new(3, alpha)?)).exp();
    let weight = |l: [f64; 3]| -> f64 {
        let mut w = inv_c;
        for i in 0..3 {
            for j in i + 1..3 {
                w *= (l[i] - l[j]).powi(2) / (l[i] + l[j]);
            }
        }
        w * (l[0] * l[1] * l[2]).powf(alpha)
    };
    let integrand = |with_stat: bool| {
        move |s: f64, t: f64| -> f64 {
            let l3 = s * s;
            let l2 = l3 + t * t;
            let l1 = 1.0 - l2 - l3;
            if l3 <= 0.0 || l2 <= 0.0 {
                return 0.0;
            }
            // Jacobian of (s, t) -> (λ₃, λ₂): 4 s t
            let v = 6.0 * weight([l1, l2, l3]) * 4.0 * s * t;
            if with_stat {
                v * stat.constrained(&[l1, l2, l3])
            } else {
                v
            }
        }
    };
    // λ₃ <= 1/3 and λ₂ <= (1 - λ₃) / 2
    let s_max = (1.0f64 / 3.0).sqrt();
    let t_max = |s: f64| ((1.0 - 3.0 * s * s) / 2.0).max(0.0).sqrt();
    let mass = nested(integrand(false), s_max, t_max, tol * 0.1)?;
    let weighted = if stat == OracleStatistic::Unity {
        mass
    } else {
        nested(integrand(true), s_max, t_max, tol * 0.1)?
    };
    Ok(finish(stat, weighted, mass))
}


/// Unconstrained average for `m ∈ {1, 2}`.
///
/// Coordinates are `x = σ²` (absorbing `x^α` at the origin) on
/// `(0, X_max)`, with `X_max` chosen so the discarded `e^{-x}` tail of the
/// heaviest integrand (`x²` times the density) is below `tol / 10`. For
/// `m = 2` the symmetric integrand is taken over `y < x` times 2.
pub fn unconstrained_average(m: usize, alpha: f64, stat: OracleStatistic, tol: f64) -> Result<QuadratureResult> {
    check(alpha, tol)?;
    require(
        stat,
        &[OracleStatistic::TP, OracleStatistic::TvN, OracleStatistic::TraceSum, OracleStatistic::Unity],
        "unconstrained",
    )?;
    let p = EnsembleParams::new(m, alpha)?;
    let inv_c = (-log_norm_constant_unconstrained(p)).exp();
    let x_max = exp_tail_cutoff(alpha + 2.0 * m as f64 + 4.0, tol / 10.0);
    let s_max = x_max.sqrt();
    let (mass, weighted) = match m {
        1 => {
            let f = |with_stat: bool| {
                move |s: f64| -> Result<f64> {
                    let x = s * s;
                    if x == 0.0 {
                        return Ok(0.0);
                    }
                    let v = inv_c * 2.0 * s * x.powf(alpha) * (-x).exp();
                    Ok(if with_stat { v * stat.unconstrained(&[x]) } else { v })
                }
            };
            let opts = AdaptiveOptions::abs(tol * 1e-2).with_rel(1e-13);
            let mass = adaptive(f(false), 0.0, s_max, opts)?;
            let weighted = adaptive(f(true), 0.0, s_max, opts)?;
            (mass, weighted)
        }
        2 => {
            let f = |with_stat: bool| {
                move |s: f64, t: f64| -> f64 {
                    let (x, y) = (s * s, t * t);
                    if x == 0.0 || y == 0.0 {
                        return 0.0;
                    }
                    let w = (x - y).powi(2) / (x + y) * (x * y).powf(alpha) * (-x - y).exp();
                    let v = inv_c * 2.0 * w * 4.0 * s * t;
                    if with_stat {
                        v * stat.unconstrained(&[x, y])
                    } else {
                        v
                    }
                }
            };
            let mass = nested(f(false), s_max, |s| s, tol * 1e-2)?;
            let weighted = nested(f(true), s_max, |s| s, tol * 1e-2)?;
            (mass, weighted)
        }
        _ => {
            return Err(Error::Parameter(format!(
                "unconstrained oracle supports m ∈ {{1, 2}}, got {m}"
            )))
        }
    };
    Ok(finish(stat, weighted, mass))
}

/// `∫₀^∞ y^{s-1} G^{2,1}_{2,3}(y) dy` by quadrature of the implemented
/// G-function; compare with [`crate::special::mellin_g21`].
pub fn mellin_g21_quadrature(params: MeijerFamilyParams, s: f64, tol: f64) -> Result<QuadratureResult> {
    if !(tol > 0.0) {
        return Err(Error::domain("mellin_g21_quadrature", format!("tol = {tol} must be positive")));
    }
    // G is O(1) near its peak, so a fixed absolute tolerance for the
    // pointwise values is enough for the integral.
    half_line(|y| Ok(y.powf(s - 1.0) * meijer_g_2_1(params, y, 1e-13)?), tol)
}

/// `∫₀^∞ e^{-θ} θ^{d-1} ln θ dθ` by quadrature (equals `Γ(d) ψ₀(d)`).
pub fn gamma_log_integral_check(d: f64, tol: f64) -> Result<QuadratureResult> {
    if !(d > 0.0) {
        return Err(Error::domain("gamma_log_integral_check", format!("d = {d} must be positive")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("gamma_log_integral_check", format!("tol = {tol} must be positive")));
    }
    half_line(|t| Ok((-t).exp() * t.powf(d - 1.0) * t.ln()), tol)
}

//! Closed-form averages over the Bures-Hall ensemble and its unconstrained
//! companion, the finite sums `I_q^(β)` and `H_q` behind them, and the
//! normalisation constants.
//!
//! Conventions: the constrained density is
//! `f(λ) = c⁻¹ δ(1 - Σλ) Π_{i<j} (λ_i-λ_j)²/(λ_i+λ_j) Π λ_i^α`, the
//! unconstrained one replaces the delta by `Π e^{-x_i}` and `c` by `c'`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::{digamma, log_gamma, pochhammer, GammaRatio};

/// Subsystem dimensions, `1 <= m <= n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dims {
    pub m: usize,
    pub n: usize,
}

impl Dims {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || m > n {
            return Err(Error::Parameter(format!(
                "dimensions must satisfy 1 <= m <= n, got m = {m}, n = {n}"
            )));
        }
        Ok(Dims { m, n })
    }

    pub fn alpha(&self) -> f64 {
        alpha_from_dims(*self)
    }

    pub fn params(&self) -> EnsembleParams {
        EnsembleParams {
            m: self.m,
            alpha: self.alpha(),
        }
    }
}

/// `(m, α)` with `m >= 1` and `α > -1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnsembleParams {
    pub m: usize,
    pub alpha: f64,
}

impl EnsembleParams {
    pub fn new(m: usize, alpha: f64) -> Result<Self> {
        if m == 0 {
            return Err(Error::Parameter("m must be at least 1".into()));
        }
        if !(alpha > -1.0) || !alpha.is_finite() {
            return Err(Error::Parameter(format!("alpha = {alpha} must be finite and > -1")));
        }
        Ok(EnsembleParams { m, alpha })
    }

    fn mf(&self) -> f64 {
        self.m as f64
    }

    /// `m(m+2α+1)/2`: the Gamma shape of the trace `θ = Σ x_i`, and the
    /// exponent linking `c` and `c'`.
    pub fn trace_shape(&self) -> f64 {
        let m = self.mf();
        m * (m + 2.0 * self.alpha + 1.0) / 2.0
    }
}

/// `ψ₀` at an argument the caller has shown to be positive.
fn psi(x: f64) -> f64 {
    digamma(x).expect("digamma argument is positive for every valid ensemble")
}

/// `α = n - m - 1/2`.
pub fn alpha_from_dims(dims: Dims) -> f64 {
    dims.n as f64 - dims.m as f64 - 0.5
}

/// Average purity over the Bures-Hall ensemble, written in `(m, n)`.
pub fn avg_purity_bures(dims: Dims) -> f64 {
    let (m, n) = (dims.m as f64, dims.n as f64);
    (2.0 * n * (2.0 * n + m) - m * m + 1.0) / (2.0 * n * (2.0 * m * n - m * m + 2.0))
}

/// Average von Neumann entropy over the Bures-Hall ensemble, written in `(m, n)`.
pub fn avg_vn_bures(dims: Dims) -> f64 {
    let (m, n) = (dims.m as f64, dims.n as f64);
    psi(m * n - m * m / 2.0 + 1.0) - psi(n + 0.5)
}

/// Average purity for general `α`.
pub fn avg_purity_general(params: EnsembleParams) -> f64 {
    let (m, a) = (params.mf(), params.alpha);
    let num = 5.0 * m * m + 10.0 * a * m + 5.0 * m + 4.0 * a * a + 4.0 * a + 2.0;
    num / ((2.0 * m + 2.0 * a + 1.0) * (m * m + 2.0 * a * m + m + 2.0))
}

/// Average von Neumann entropy for general `α`.
pub fn avg_vn_general(params: EnsembleParams) -> f64 {
    let (m, a) = (params.mf(), params.alpha);
    psi(m * (m + 1.0) / 2.0 + a * m + 1.0) - psi(m + a + 1.0)
}

/// `E_h[T_P] = E_h[Σ x_i²]` over the unconstrained ensemble.
pub fn induced_purity_mean(params: EnsembleParams) -> f64 {
    let (m, a) = (params.mf(), params.alpha);
    let poly = 5.0 * m * m + 10.0 * a * m + 5.0 * m + 4.0 * a * a + 4.0 * a + 2.0;
    m * (m + 2.0 * a + 1.0) / (4.0 * (2.0 * m + 2.0 * a + 1.0)) * poly
}

/// `E_h[T_vN] = E_h[Σ x_i ln x_i]` over the unconstrained ensemble.
pub fn induced_vn_mean(params: EnsembleParams) -> f64 {
    let (m, a) = (params.mf(), params.alpha);
    m * (m + 2.0 * a + 1.0) / 2.0 * psi(m + a + 1.0)
}

/// Constrained purity from the unconstrained `E_h[T_P]`.
///
/// With `θ ~ Gamma(d-1)` independent of `λ`, `E[T_P] = E[θ²] E[S_P]` and
/// `E[θ²] = (d-1) d`.
pub fn purity_moment_relation(params: EnsembleParams, eh_tp: f64) -> f64 {
    let (m, a) = (params.mf(), params.alpha);
    4.0 * eh_tp / (m * (m + 2.0 * a + 1.0) * (m * m + 2.0 * a * m + m + 2.0))
}

/// Constrained von Neumann entropy from the unconstrained `E_h[T_vN]`.
///
/// `d = m(m+1)/2 + αm + 1` is the shape of `θ` plus one; the `ψ₀(d)` term
/// comes from `E[θ ln θ] = (d-1) ψ₀(d)`.
pub fn vn_moment_relation(params: EnsembleParams, eh_tvn: f64) -> f64 {
    let (m, a) = (params.mf(), params.alpha);
    let d = m * (m + 1.0) / 2.0 + a * m + 1.0;
    psi(d) - 2.0 * eh_tvn / (m * (m + 2.0 * a + 1.0))
}

/// `I_q^(β)(t)` for `β ∈ {0, 1, 2}` in closed form.
pub fn i_beta_closed(q: f64, beta: u32, params: EnsembleParams, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::domain("i_beta_closed", format!("t = {t} must be positive")));
    }
    let (m, a) = (params.mf(), params.alpha);
    let s = m + 2.0 * a + 1.0;
    match beta {
        0 => Ok(0.0),
        1 => Ok(-m * s * (s - q) / (2.0 * m + 2.0 * a + 1.0) / (t * t)),
        2 => {
            let cubic = s * (5.0 * m * m + 8.0 * a * m + 4.0 * m + 4.0 * a * a + 4.0 * a)
                - (3.0 * m * m + 6.0 * a * m + 3.0 * m + 4.0 * a * a + 4.0 * a) * q;
            let pre = -m * s * (s - q)
                / (2.0 * (m + a) * (m + a + 1.0) * (2.0 * m + 2.0 * a + 1.0));
            Ok(pre * cubic / (t * t * t))
        }
        _ => Err(Error::Parameter(format!(
            "closed form of I_q^(β) is only available for β ∈ {{0, 1, 2}}, got {beta}"
        ))),
    }
}

/// The `t`-independent part of `I_q^(β)` as a finite sum over `k < m`.
///
/// Gamma ratios whose arguments differ by an integer are taken as direct
/// Pochhammer products, so `1/Γ` at a pole is an exact zero factor: for
/// integer `β` only the last `β` terms survive.
pub fn i_beta_sum(q: f64, beta: f64, params: EnsembleParams) -> Result<f64> {
    if !(beta >= 0.0) {
        return Err(Error::domain("i_beta_sum", format!("beta = {beta} must be >= 0")));
    }
    let m = params.m;
    let mu = m as u32;
    let (mf, a) = (params.mf(), params.alpha);
    let integer_beta = beta.fract() == 0.0 && beta <= u32::MAX as f64;
    let mut sum = 0.0;
    let mut k_factorial = 1.0;
    for k in 0..m {
        let kf = k as f64;
        if k > 0 {
            k_factorial *= kf;
        }
        // Γ(k+β+1) / Γ(k+β-m+1)
        let vanishing = pochhammer(kf + beta - mf + 1.0, mu);
        if vanishing == 0.0 {
            continue;
        }
        // Γ(k+β+2α+2-q) / Γ(k+2α+2-q)
        let x = kf + 2.0 * a + 2.0 - q;
        let shifted = if integer_beta {
            pochhammer(x, beta as u32)
        } else {
            GammaRatio::one().times_gamma(x + beta)?.over_gamma(x).value()
        };
        let m_minus_k_factorial: f64 = (1..m - k).map(|i| i as f64).product();
        let sign = if (k + m).is_multiple_of(2) { 1.0 } else { -1.0 };
        sum += sign * vanishing * shifted * pochhammer(kf + 2.0 * a + 2.0, mu)
            / pochhammer(kf + beta + 2.0 * a + 2.0, mu)
            / (m_minus_k_factorial * k_factorial);
    }
    Ok(sum)
}

fn check_h_q(q: f64, params: &EnsembleParams, function: &'static str) -> Result<()> {
    let edge = params.mf() + 2.0 * params.alpha + 1.0 - q;
    if !(edge > 0.0) {
        return Err(Error::domain(
            function,
            format!("m + 2α + 1 - q = {edge} must be positive"),
        ));
    }
    Ok(())
}

/// `H_q`: `∂_β I_q^(β)` at `β = 1` without the `t` dependence, as a
/// digamma bracket plus a finite sum.
pub fn h_q_sum(q: f64, params: EnsembleParams) -> Result<f64> {
    check_h_q(q, &params, "h_q_sum")?;
    let (m, a) = (params.mf(), params.alpha);
    let lead = i_beta_closed(q, 1, params, 1.0)?;
    let bracket = psi(m + 1.0) + psi(m + 2.0 * a + 2.0) + psi(m + 2.0 * a + 2.0 - q)
        - psi(2.0 * m + 2.0 * a + 2.0)
        - psi(1.0);
    let tail: f64 = (0..params.m.saturating_sub(1))
        .map(|k| {
            let k = k as f64;
            (k + 1.0) * (k + 2.0 * a + 2.0) * (k + 2.0 * a + 2.0 - q)
                / ((m - k - 1.0) * (k + m + 2.0 * a + 2.0))
        })
        .sum();
    Ok(lead * bracket + tail)
}

/// `H_q` with the finite sum resolved into polynomials and two digammas.
pub fn h_q_closed(q: f64, params: EnsembleParams) -> Result<f64> {
    check_h_q(q, &params, "h_q_closed")?;
    let (m, a) = (params.mf(), params.alpha);
    let a1 = -4.0 * m.powi(3) - 24.0 * a * m * m - 14.0 * m * m - 36.0 * a * a * m - 40.0 * a * m
        - 11.0 * m
        - 16.0 * a.powi(3)
        - 28.0 * a * a
        - 16.0 * a
        - 3.0;
    let a2 = 4.0 * m * m + 8.0 * a * m + 3.0 * m + 4.0 * a * a + 4.0 * a + 1.0;
    let s = m + 2.0 * a + 1.0;
    let w = 2.0 * m + 2.0 * a + 1.0;
    let poly = (a1 + 2.0 * a2 * q) / (2.0 * s * w);
    let digammas = (2.0 * a + 1.0 - 2.0 * q) * (psi(2.0 * m + 2.0 * a + 2.0) - psi(m + 2.0 * a + 2.0))
        - (s - q) * psi(s - q);
    Ok(m * s / w * (poly + digammas))
}

/// `ln c` for the constrained density (integrated over the unordered simplex).
pub fn log_norm_constant_constrained(params: EnsembleParams) -> f64 {
    let (m, a) = (params.mf(), params.alpha);
    let lg = |x: f64| log_gamma(x).expect("gamma argument is positive for every valid ensemble");
    let mut v = -m * (m + 2.0 * a) * std::f64::consts::LN_2 + m / 2.0 * std::f64::consts::PI.ln()
        - lg(params.trace_shape());
    for i in 1..=params.m {
        let i = i as f64;
        v += lg(i + 1.0) + lg(i + 2.0 * a + 1.0) - lg(i + a + 0.5);
    }
    v
}

/// `ln c' = ln c + ln Γ(m(m+2α+1)/2)` for the unconstrained density.
pub fn log_norm_constant_unconstrained(params: EnsembleParams) -> f64 {
    log_norm_constant_constrained(params)
        + log_gamma(params.trace_shape()).expect("trace shape is positive")
}

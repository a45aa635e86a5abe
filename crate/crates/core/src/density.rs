//! One-point eigenvalue density `h₁(x)` of the unconstrained ensemble,
//! built from the Meijer G-functions, and its moments.
//!
//! `h₁(x) = (G_α(x) + G_{α+1}(x)) / 2m`, with
//! `G_q(x) = ∫₀¹ G^{1,1}(q | tx) G^{2,1}(q | tx) dt`, or equivalently
//! `G_q(x) = -∫₁^∞ (same) dt`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::EnsembleParams;
use crate::error::{Error, Result};
use crate::quadrature::{adaptive, exp_tail_cutoff, half_line, half_line_to, AdaptiveOptions, QuadratureResult};
use crate::special::{meijer_g_1_1, meijer_g_2_1, MeijerFamilyParams};

/// Relative accuracy requested from each `G^{2,1}` evaluation.
const G21_TOL: f64 = 1e-11;
/// Looser target next to integer `q`, where the residue terms carry an
/// extra `1/δ` cancellation.
const G21_TOL_NEAR_INTEGER: f64 = 1e-10;

/// Below this abscissa `h₁` is extrapolated with its leading power `x^α`.
pub const SMALL_X: f64 = 1e-8;

/// Half-width of the symmetric `q ± δ` averages used at integer `q`, where
/// the two pole families of `G^{2,1}` collide. The kernel is smooth in `q`,
/// so an average carries an `O(δ²)` error; combining the averages at `δ`
/// and `2δ` (Richardson) leaves `O(δ⁴)`. A smaller `δ` would only trade
/// truncation error for cancellation noise.
const INTEGER_Q_DELTA: f64 = 1e-3;

pub const DEFAULT_POINT_TOL: f64 = 1e-6;
pub const DEFAULT_MOMENT_TOL: f64 = 1e-5;

fn is_integer(x: f64) -> bool {
    x.fract() == 0.0
}

/// `G^{1,1}(q|y) G^{2,1}(q|y)`.
fn kernel_integrand(mp: MeijerFamilyParams, y: f64, g21_tol: f64) -> Result<f64> {
    if y == 0.0 {
        return Ok(0.0);
    }
    let g11 = meijer_g_1_1(mp, y)?;
    if g11 == 0.0 {
        return Ok(0.0);
    }
    Ok(g11 * meijer_g_2_1(mp, y, g21_tol)?)
}

fn check_x(x: f64, tol: f64) -> Result<()> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("density", format!("x = {x} must be positive and finite")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain("density", format!("tol = {tol} must be positive")));
    }
    Ok(())
}

/// Evaluates `kernel(q', g21_tol)` at `q' = q`, or extrapolates the
/// symmetric averages around integer `q`.
fn at_q<F>(q: f64, mut kernel: F) -> Result<f64>
where
    F: FnMut(f64, f64) -> Result<f64>,
{
    if is_integer(q) {
        let mut avg = |d: f64| -> Result<f64> {
            Ok(0.5 * (kernel(q - d, G21_TOL_NEAR_INTEGER)? + kernel(q + d, G21_TOL_NEAR_INTEGER)?))
        };
        let near = avg(INTEGER_Q_DELTA)?;
        let far = avg(2.0 * INTEGER_Q_DELTA)?;
        Ok((4.0 * near - far) / 3.0)
    } else {
        kernel(q, G21_TOL)
    }
}

fn kernel_options(tol: f64) -> AdaptiveOptions {
    AdaptiveOptions::abs(tol / 4.0).with_rel(1e-10)
}

/// `G_q(x) = ∫₀¹ G^{1,1}(q|tx) G^{2,1}(q|tx) dt`.
///
/// Integrated in `w = √t`: near `t = 0` the integrand goes like
/// `t^{2α+1-max(q,0)}`, which for half-integer `α` is a half-integer
/// power of `t` and so analytic in `w`.
pub fn g_q_kernel(q: f64, params: EnsembleParams, x: f64, tol: f64) -> Result<f64> {
    check_x(x, tol)?;
    at_q(q, |q, g21_tol| {
        let mp = MeijerFamilyParams::new(params.m, params.alpha, q)?;
        let r = adaptive(
            |w| Ok(2.0 * w * kernel_integrand(mp, x * w * w, g21_tol)?),
            0.0,
            1.0,
            kernel_options(tol),
        )?;
        Ok(r.value)
    })
}

/// `G_q(x) = -∫₁^∞ G^{1,1}(q|tx) G^{2,1}(q|tx) dt`, the tail form.
///
/// The tail is truncated once three consecutive panels contribute less
/// than `tol / 100`.
pub fn g_q_kernel_tail(q: f64, params: EnsembleParams, x: f64, tol: f64) -> Result<f64> {
    check_x(x, tol)?;
    at_q(q, |q, g21_tol| {
        let mp = MeijerFamilyParams::new(params.m, params.alpha, q)?;
        // -(1/x) ∫_0^∞ g(x + z) dz
        let r = half_line(|z| kernel_integrand(mp, x + z, g21_tol), tol * x / 4.0)?;
        Ok(-r.value / x)
    })
}

fn h1_direct(params: EnsembleParams, x: f64, tol: f64) -> Result<f64> {
    let g_a = g_q_kernel(params.alpha, params, x, tol)?;
    let g_b = g_q_kernel(params.alpha + 1.0, params, x, tol)?;
    Ok((g_a + g_b) / (2.0 * params.m as f64))
}

/// `h₁(x)`, the density of one (unordered) eigenvalue; integrates to 1.
///
/// For `x < SMALL_X` the value is `h₁(SMALL_X) (x / SMALL_X)^α`: the
/// residue terms cancel there and the leading power dominates anyway.
pub fn one_point_density(params: EnsembleParams, x: f64, tol: f64) -> Result<f64> {
    check_x(x, tol)?;
    if x < SMALL_X {
        let edge = h1_direct(params, SMALL_X, tol)?;
        return Ok(edge * (x / SMALL_X).powf(params.alpha));
    }
    h1_direct(params, x, tol)
}

/// Weight functions for [`density_moment`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentWeight {
    Unity,
    X,
    XSquared,
    XLogX,
}

impl MomentWeight {
    pub const ALL: [MomentWeight; 4] = [
        MomentWeight::Unity,
        MomentWeight::X,
        MomentWeight::XSquared,
        MomentWeight::XLogX,
    ];

    pub fn apply(self, x: f64) -> f64 {
        match self {
            MomentWeight::Unity => 1.0,
            MomentWeight::X => x,
            MomentWeight::XSquared => x * x,
            MomentWeight::XLogX => x * x.ln(),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            MomentWeight::Unity => "unity",
            MomentWeight::X => "x",
            MomentWeight::XSquared => "x_squared",
            MomentWeight::XLogX => "x_log_x",
        }
    }
}

/// `m ∫₀^∞ w(x) h₁(x) dx`.
///
/// Unity, `x`, `x²` and `x ln x` give `m`, `E[Σx_i]`, `E[T_P]` and
/// `E[T_vN]` respectively.
///
/// Far out, computed `h₁` sits on a rounding floor near 1e-17 rather than
/// decaying, which the `x²` weight would amplify without bound; the
/// integral therefore stops at `X` with `X^{α+2m+3} e^{-X} <= tol / 100`,
/// using the (generous) envelope `m h₁(x) <= x^{α+2m} e^{-x}` for `x >= 5`.
pub fn density_moment(params: EnsembleParams, weight: MomentWeight, tol: f64) -> Result<QuadratureResult> {
    if !(tol > 0.0) {
        return Err(Error::domain("density_moment", format!("tol = {tol} must be positive")));
    }
    let m = params.m as f64;
    // h₁ itself only needs to be good relative to the outer tolerance
    let point_tol = tol * 1e-3;
    let x_max = exp_tail_cutoff(params.alpha + 2.0 * m + 3.0, tol / 100.0).max(5.0);
    let r = half_line_to(
        |x| Ok(weight.apply(x) * one_point_density(params, x, point_tol)?),
        x_max,
        tol / m,
    )?;
    Ok(r.scale(m))
}

/// Tabulated `h₁` on a set of abscissae.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensityGrid {
    pub params: EnsembleParams,
    pub points: Vec<(f64, f64)>,
    pub tol: f64,
}

impl DensityGrid {
    /// Evaluates `h₁` at each of `xs` (strictly increasing), in parallel.
    pub fn compute(params: EnsembleParams, xs: &[f64], tol: f64) -> Result<Self> {
        if xs.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Parameter("abscissae must be strictly increasing".into()));
        }
        let values: Vec<f64> = xs
            .par_iter()
            .map(|&x| one_point_density(params, x, tol))
            .collect::<Result<_>>()?;
        Ok(DensityGrid {
            params,
            points: xs.iter().copied().zip(values).collect(),
            tol,
        })
    }

    /// `count` points spaced evenly in `ln x` over `[x_min, x_max]`.
    pub fn log_spaced(x_min: f64, x_max: f64, count: usize) -> Result<Vec<f64>> {
        if !(x_min > 0.0) || !(x_max > x_min) || count < 2 {
            return Err(Error::Parameter(format!(
                "need 0 < x_min < x_max and at least 2 points, got [{x_min}, {x_max}] with {count}"
            )));
        }
        let (a, b) = (x_min.ln(), x_max.ln());
        Ok((0..count)
            .map(|i| {
                if i + 1 == count {
                    x_max
                } else {
                    (a + (b - a) * i as f64 / (count - 1) as f64).exp()
                }
            })
            .collect())
    }

    /// CSV with header `x,h1`; noise below zero is clamped to 0.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,h1\n");
        for &(x, h) in &self.points {
            out.push_str(&format!("{x:e},{:e}\n", h.max(0.0)));
        }
        out
    }
}

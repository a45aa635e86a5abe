//! Deterministic integrators shared by the oracle and density modules.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::special::log_gamma;

/// Value, error estimate and integrand evaluation count of one integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub abs_error_estimate: f64,
    pub evaluations: usize,
}

impl QuadratureResult {
    pub fn zero() -> Self {
        QuadratureResult {
            value: 0.0,
            abs_error_estimate: 0.0,
            evaluations: 0,
        }
    }

    /// Sum of independent pieces; error estimates add.
    pub fn combine(self, other: QuadratureResult) -> Self {
        QuadratureResult {
            value: self.value + other.value,
            abs_error_estimate: self.abs_error_estimate + other.abs_error_estimate,
            evaluations: self.evaluations + other.evaluations,
        }
    }

    pub fn scale(self, factor: f64) -> Self {
        QuadratureResult {
            value: self.value * factor,
            abs_error_estimate: self.abs_error_estimate * factor.abs(),
            evaluations: self.evaluations,
        }
    }

    /// `self / other` with first-order error propagation.
    pub fn ratio(self, other: QuadratureResult) -> Self {
        let value = self.value / other.value;
        let err = (self.abs_error_estimate + value.abs() * other.abs_error_estimate) / other.value.abs();
        QuadratureResult {
            value,
            abs_error_estimate: err,
            evaluations: self.evaluations + other.evaluations,
        }
    }
}

// 15-point Kronrod extension of the 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// One Gauss-Kronrod panel: (Kronrod value, error estimate).
fn gk15<F>(f: &mut F, a: f64, b: f64) -> Result<(f64, f64)>
where
    F: FnMut(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    let mut abs_sum = kronrod.abs();
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx)?;
        let f2 = f(center + dx)?;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let value = kronrod * half;
    let roundoff = 50.0 * f64::EPSILON * abs_sum * half.abs();
    let err = ((kronrod - gauss) * half).abs().max(roundoff);
    Ok((value, err))
}

#[derive(Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err.total_cmp(&other.err) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Tolerance and budget for [`adaptive`].
#[derive(Debug, Clone, Copy)]
pub struct AdaptiveOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_panels: usize,
}

impl AdaptiveOptions {
    pub fn abs(abs_tol: f64) -> Self {
        AdaptiveOptions {
            abs_tol,
            rel_tol: 0.0,
            max_panels: 4000,
        }
    }

    pub fn with_rel(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

/// Globally adaptive Gauss-Kronrod (7/15) integration of a fallible integrand.
///
/// The panel with the largest error estimate is bisected until the summed
/// estimate meets `max(abs_tol, rel_tol |value|)`. Endpoint power
/// singularities are handled by repeated bisection toward the endpoint.
pub fn adaptive<F>(mut f: F, a: f64, b: f64, opts: AdaptiveOptions) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    if a == b {
        return Ok(QuadratureResult::zero());
    }
    let mut heap = BinaryHeap::new();
    let (value, err) = gk15(&mut f, a, b)?;
    let mut evaluations = 15;
    let mut total_value = value;
    let mut total_err = err;
    heap.push(Panel { a, b, value, err });

    let target = |v: f64| opts.abs_tol.max(opts.rel_tol * v.abs());
    while total_err > target(total_value) {
        if heap.len() >= opts.max_panels {
            // Accept if the error is within an order of magnitude of the goal.
            if total_err > 10.0 * target(total_value) {
                return Err(Error::no_convergence(
                    "adaptive Gauss-Kronrod",
                    format!(
                        "{} panels on [{a}, {b}], error estimate {total_err:e} vs tolerance {:e}",
                        heap.len(),
                        target(total_value)
                    ),
                ));
            }
            break;
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // Interval exhausted at machine resolution.
            heap.push(worst);
            break;
        }
        let (v1, e1) = gk15(&mut f, worst.a, mid)?;
        let (v2, e2) = gk15(&mut f, mid, worst.b)?;
        evaluations += 30;
        total_value += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel {
            a: worst.a,
            b: mid,
            value: v1,
            err: e1,
        });
        heap.push(Panel {
            a: mid,
            b: worst.b,
            value: v2,
            err: e2,
        });
    }
    // Re-sum to shed the drift of the running totals.
    let (value, err) = heap
        .iter()
        .fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.err));
    Ok(QuadratureResult {
        value,
        abs_error_estimate: err,
        evaluations,
    })
}

/// [`adaptive`] for an infallible integrand.
pub fn adaptive_plain<F>(mut f: F, a: f64, b: f64, opts: AdaptiveOptions) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> f64,
{
    adaptive(|x| Ok(f(x)), a, b, opts)
}

/// `X` with `X^p e^{-X} <= eps`, solved by fixed-point iteration.
pub fn exp_tail_cutoff(p: f64, eps: f64) -> f64 {
    let mut x = 10.0f64.max(-eps.ln());
    for _ in 0..100 {
        x = -eps.ln() + p.max(0.0) * x.ln();
    }
    x
}

/// `∫_0^∞ f(x) dx` through `x = e^u`: panels of width 1/2 in `u` are added
/// outward from `u = 0` on both sides until three consecutive panels each
/// contribute less than `tol / 100`.
pub fn half_line<F>(f: F, tol: f64) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    half_line_to(f, f64::INFINITY, tol)
}

/// As [`half_line`], over `(0, upper]`; the upward sweep also stops at
/// `upper`. For integrands whose far tail is lost in rounding noise.
pub fn half_line_to<F>(mut f: F, upper: f64, tol: f64) -> Result<QuadratureResult>
where
    F: FnMut(f64) -> Result<f64>,
{
    const WIDTH: f64 = 0.5;
    const MAX_PANELS: usize = 400;
    if !(upper > 0.0) {
        return Err(Error::domain("half_line_to", format!("upper = {upper} must be positive")));
    }
    let top = upper.ln();
    let start = top.min(0.0);
    let panel_opts = AdaptiveOptions::abs(tol / 100.0).with_rel(1e-13);
    let mut g = |u: f64| -> Result<f64> {
        let x = u.exp();
        if x == 0.0 || !x.is_finite() {
            return Ok(0.0);
        }
        Ok(f(x)? * x)
    };
    let mut total = QuadratureResult::zero();
    for direction in [1.0, -1.0] {
        let mut quiet = 0;
        let mut converged = false;
        for k in 0..MAX_PANELS {
            let (lo, hi) = if direction > 0.0 {
                (start + k as f64 * WIDTH, (start + (k + 1) as f64 * WIDTH).min(top))
            } else {
                (start - (k + 1) as f64 * WIDTH, start - k as f64 * WIDTH)
            };
            if lo >= hi {
                converged = true;
                break;
            }
            let piece = adaptive(&mut g, lo, hi, panel_opts)?;
            total = total.combine(piece);
            if piece.value.abs() < tol / 100.0 {
                quiet += 1;
                if quiet >= 3 {
                    converged = true;
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        if !converged {
            return Err(Error::no_convergence(
                "half-line integration",
                format!("tail did not decay within {MAX_PANELS} panels"),
            ));
        }
    }
    Ok(total)
}

/// Nodes and weights of a fixed Gaussian rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    /// Gauss-Legendre rule, nodes by Newton iteration on `P_n`.
    pub fn legendre(n: usize) -> Self {
        assert!(n >= 1, "rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    let (_, d) = legendre_with_derivative(n, x);
                    dp = d;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussRule { nodes, weights }
    }

    /// Gauss-Jacobi rule for the weight `(1-x)^a (1+x)^b` on `[-1, 1]`,
    /// built by Golub-Welsch from the Jacobi three-term recurrence.
    pub fn jacobi(n: usize, a: f64, b: f64) -> Result<Self> {
        if n == 0 || !(a > -1.0) || !(b > -1.0) {
            return Err(Error::Parameter(format!(
                "Gauss-Jacobi needs n >= 1 and exponents > -1 (n = {n}, a = {a}, b = {b})"
            )));
        }
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n];
        let ab = a + b;
        for (k, d) in diag.iter_mut().enumerate() {
            let kf = k as f64;
            *d = if k == 0 {
                (b - a) / (ab + 2.0)
            } else {
                (b * b - a * a) / ((2.0 * kf + ab) * (2.0 * kf + ab + 2.0))
            };
        }
        for k in 1..n {
            let kf = k as f64;
            let s = 2.0 * kf + ab;
            let beta = if k == 1 {
                4.0 * (1.0 + a) * (1.0 + b) / ((2.0 + ab).powi(2) * (3.0 + ab))
            } else {
                4.0 * kf * (kf + a) * (kf + b) * (kf + ab) / (s * s * (s + 1.0) * (s - 1.0))
            };
            off[k - 1] = beta.sqrt();
        }
        let ln_mu0 = (ab + 1.0) * std::f64::consts::LN_2 + log_gamma(a + 1.0)? + log_gamma(b + 1.0)?
            - log_gamma(ab + 2.0)?;
        let mut first = vec![0.0; n];
        first[0] = 1.0;
        tridiagonal_ql(&mut diag, &mut off, &mut first)?;
        let mu0 = ln_mu0.exp();
        let mut pairs: Vec<(f64, f64)> = diag
            .into_iter()
            .zip(first)
            .map(|(x, z)| (x, mu0 * z * z))
            .collect();
        pairs.sort_by(|p, q| p.0.total_cmp(&q.0));
        let (nodes, weights) = pairs.into_iter().unzip();
        Ok(GaussRule { nodes, weights })
    }

    /// `∫_lo^hi w(x) f(x) dx` with the rule mapped affinely onto `[lo, hi]`;
    /// `weight_scale` is the Jacobian of the weight (1 for Legendre).
    pub fn apply<F>(&self, lo: f64, hi: f64, weight_scale: f64, mut f: F) -> Result<f64>
    where
        F: FnMut(f64) -> Result<f64>,
    {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        let mut s = 0.0;
        for (x, w) in self.nodes.iter().zip(&self.weights) {
            s += w * f(mid + half * x)?;
        }
        Ok(s * half * weight_scale)
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Implicit QL on a symmetric tridiagonal matrix. On return `diag` holds the
/// eigenvalues and `first` the first components of the eigenvectors.
fn tridiagonal_ql(diag: &mut [f64], off: &mut [f64], first: &mut [f64]) -> Result<()> {
    let n = diag.len();
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut mm = l;
            while mm + 1 < n {
                let dd = diag[mm].abs() + diag[mm + 1].abs();
                if off[mm].abs() <= f64::EPSILON * dd {
                    break;
                }
                mm += 1;
            }
            if mm == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::no_convergence("tridiagonal QL", format!("eigenvalue {l}")));
            }
            let mut g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
            let mut r = g.hypot(1.0);
            g = diag[mm] - diag[l] + off[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            for i in (l..mm).rev() {
                let f = s * off[i];
                let b = c * off[i];
                r = f.hypot(g);
                off[i + 1] = r;
                if r == 0.0 {
                    diag[i + 1] -= p;
                    off[mm] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = diag[i + 1] - p;
                r = (diag[i] - g) * s + 2.0 * c * b;
                p = s * r;
                diag[i + 1] = g + p;
                g = c * r - b;
                let fz = first[i + 1];
                first[i + 1] = s * first[i] + c * fz;
                first[i] = c * first[i] - s * fz;
            }
            if deflated {
                continue;
            }
            diag[l] -= p;
            off[l] = g;
            off[mm] = 0.0;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn gk_smooth_integrand() {
        let r = adaptive_plain(|x| x.sin(), 0.0, PI, AdaptiveOptions::abs(1e-13)).unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-13);
        assert!(r.abs_error_estimate <= 1e-13);
    }

    #[test]
    fn gk_endpoint_singularity() {
        // ∫_0^1 x^{-1/2} dx = 2
        let r = adaptive_plain(|x| x.powf(-0.5), 0.0, 1.0, AdaptiveOptions::abs(1e-10)).unwrap();
        assert!((r.value - 2.0).abs() < 1e-9, "{r:?}");
        assert!((r.value - 2.0).abs() <= 5.0 * r.abs_error_estimate.max(1e-15));
    }

    #[test]
    fn half_line_gamma_integrals() {
        // ∫ x^{-1/2} e^{-x} = √π, ∫ x^3 e^{-x} = 6
        let r = half_line(|x| Ok(x.powf(-0.5) * (-x).exp()), 1e-11).unwrap();
        assert_relative_eq!(r.value, PI.sqrt(), max_relative = 1e-10);
        let r = half_line(|x| Ok(x.powi(3) * (-x).exp()), 1e-11).unwrap();
        assert_relative_eq!(r.value, 6.0, max_relative = 1e-11);
    }

    #[test]
    fn legendre_rule_is_exact_for_polynomials() {
        let rule = GaussRule::legendre(12);
        let v = rule.apply(0.0, 2.0, 1.0, |x| Ok(x.powi(23))).unwrap();
        assert_relative_eq!(v, 2f64.powi(24) / 24.0, max_relative = 1e-13);
        assert_relative_eq!(rule.weights.iter().sum::<f64>(), 2.0, max_relative = 1e-14);
    }

    #[test]
    fn jacobi_rule_moments() {
        // weight (1-x)^{-1/2}(1+x)^{-1/2}: Chebyshev, ∫ x^2 w = π/2
        let rule = GaussRule::jacobi(8, -0.5, -0.5).unwrap();
        let v = rule.apply(-1.0, 1.0, 1.0, |x| Ok(x * x)).unwrap();
        assert_relative_eq!(v, PI / 2.0, max_relative = 1e-13);
        // Chebyshev nodes are cos((2k-1)π/(2n))
        for (k, x) in rule.nodes.iter().rev().enumerate() {
            let expect = ((2 * k + 1) as f64 * PI / 16.0).cos();
            assert!((x - expect).abs() < 1e-13);
        }
        // weight (1-x)^{1.5}(1+x)^{0}: ∫_{-1}^{1} (1-x)^{1.5} x dx = -2^{2.5}·(2/5 - ... ) checked by GK
        let rule = GaussRule::jacobi(10, 1.5, 0.0).unwrap();
        let v = rule.apply(-1.0, 1.0, 1.0, Ok).unwrap();
        let gk = adaptive_plain(|x| (1.0 - x).powf(1.5) * x, -1.0, 1.0, AdaptiveOptions::abs(1e-14)).unwrap();
        assert_relative_eq!(v, gk.value, max_relative = 1e-12);
    }

    #[test]
    fn jacobi_rule_rejects_bad_exponents() {
        assert!(GaussRule::jacobi(5, -1.0, 0.0).is_err());
        assert!(GaussRule::jacobi(0, 0.0, 0.0).is_err());
    }

    #[test]
    fn tail_cutoff_bounds_the_tail() {
        let x = exp_tail_cutoff(7.5, 1e-11);
        assert!(x.powf(7.5) * (-x).exp() <= 1.0001e-11);
    }
}

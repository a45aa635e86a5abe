use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{rng_stream, SampleBatch, SampleMethod};
use crate::closed_form::EnsembleParams;
use crate::error::{Error, Result};

/// Chain settings; `burn_in` and `thinning` count full sweeps (one
/// proposal per coordinate).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McmcConfig {
    pub count: usize,
    pub burn_in: usize,
    pub thinning: usize,
    pub seed: u64,
    pub step_scale: f64,
}

impl McmcConfig {
    pub const DEFAULT_STEP: f64 = 0.35;
    pub const DEFAULT_THINNING: usize = 5;

    pub fn default_burn_in(m: usize) -> usize {
        10 * m * 1000
    }

    pub fn new(m: usize, count: usize, seed: u64) -> Self {
        McmcConfig {
            count,
            burn_in: Self::default_burn_in(m),
            thinning: Self::DEFAULT_THINNING,
            seed,
            step_scale: Self::DEFAULT_STEP,
        }
    }

    fn validate(&self) -> Result<()> {
        if self.count == 0 {
            return Err(Error::Parameter("count must be at least 1".into()));
        }
        if self.thinning == 0 {
            return Err(Error::Parameter("thinning must be at least 1".into()));
        }
        if !(self.step_scale > 0.0) || !self.step_scale.is_finite() {
            return Err(Error::Parameter(format!("step_scale = {} must be > 0", self.step_scale)));
        }
        Ok(())
    }
}

/// Change in the log-target when coordinate `i` moves from `x[i]` to `new`
/// (log-coordinates, so the Jacobian adds `α + 1` instead of `α`).
fn log_ratio(x: &[f64], i: usize, new: f64, alpha: f64) -> f64 {
    let old = x[i];
    let mut d = (alpha + 1.0) * (new / old).ln() - (new - old);
    for (j, &xj) in x.iter().enumerate() {
        if j == i {
            continue;
        }
        let gap_new = (new - xj).abs();
        if gap_new == 0.0 {
            return f64::NEG_INFINITY;
        }
        d += 2.0 * (gap_new / (old - xj).abs()).ln() - ((new + xj) / (old + xj)).ln();
    }
    d
}

/// Random-walk Metropolis in `u_i = ln x_i` targeting
/// `Π_{i<j} (x_i-x_j)²/(x_i+x_j) Π x_i^α e^{-x_i}`.
///
/// Each sweep updates the coordinates in turn; after `burn_in` sweeps one
/// state is kept every `thinning` sweeps. The acceptance rate covers the
/// kept phase only.
pub fn sample_unconstrained_mcmc(params: EnsembleParams, config: McmcConfig) -> Result<SampleBatch> {
    config.validate()?;
    let m = params.m;
    let mut rng = rng_stream(config.seed, 0);
    // distinct, O(1) starting point
    let mut x: Vec<f64> = (0..m).map(|i| 0.5 + i as f64).collect();
    let mut accepted = 0u64;
    let mut proposed = 0u64;
    let mut sweep = |x: &mut Vec<f64>, rng: &mut rand_chacha::ChaCha12Rng, tally: bool| {
        for i in 0..m {
            let z: f64 = rng.sample(StandardNormal);
            let new = x[i] * (config.step_scale * z).exp();
            let log_u: f64 = rng.random::<f64>().ln();
            let ok = new > 0.0 && new.is_finite() && log_u < log_ratio(x, i, new, params.alpha);
            if ok {
                x[i] = new;
            }
            if tally {
                proposed += 1;
                accepted += ok as u64;
            }
        }
    };
    for _ in 0..config.burn_in {
        sweep(&mut x, &mut rng, false);
    }
    let mut samples = Vec::with_capacity(config.count);
    for _ in 0..config.count {
        for _ in 0..config.thinning {
            sweep(&mut x, &mut rng, true);
        }
        samples.push(x.clone());
    }
    Ok(SampleBatch {
        params,
        samples,
        seed: config.seed,
        burn_in: config.burn_in,
        thinning: config.thinning,
        acceptance_rate: accepted as f64 / proposed as f64,
        method: SampleMethod::McmcUnconstrained,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::Statistic;

    #[test]
    fn deterministic_per_seed() {
        let p = EnsembleParams::new(3, 0.5).unwrap();
        let cfg = McmcConfig {
            count: 200,
            burn_in: 100,
            thinning: 2,
            seed: 11,
            step_scale: 0.35,
        };
        let a = sample_unconstrained_mcmc(p, cfg).unwrap();
        let b = sample_unconstrained_mcmc(p, cfg).unwrap();
        assert_eq!(a, b);
        let c = sample_unconstrained_mcmc(p, McmcConfig { seed: 12, ..cfg }).unwrap();
        assert_ne!(a.samples, c.samples);
        assert!(a.acceptance_rate > 0.05 && a.acceptance_rate < 0.95);
    }

    #[test]
    fn rejects_bad_config() {
        let p = EnsembleParams::new(2, 0.5).unwrap();
        let cfg = McmcConfig::new(2, 10, 1);
        assert!(sample_unconstrained_mcmc(p, McmcConfig { count: 0, ..cfg }).is_err());
        assert!(sample_unconstrained_mcmc(p, McmcConfig { thinning: 0, ..cfg }).is_err());
        assert!(sample_unconstrained_mcmc(p, McmcConfig { step_scale: 0.0, ..cfg }).is_err());
    }

    #[test]
    fn m1_targets_a_gamma_law() {
        for alpha in [-0.5, 0.0, 1.5] {
            let p = EnsembleParams::new(1, alpha).unwrap();
            let batch = sample_unconstrained_mcmc(p, McmcConfig::new(1, 40_000, 5)).unwrap();
            let mean = batch.entropy_stats(Statistic::TraceSum).unwrap();
            let second = batch.entropy_stats(Statistic::TP).unwrap();
            assert!((mean.mean - (alpha + 1.0)).abs() < 3.0 * mean.std_err, "{alpha}: {mean:?}");
            let expect = (alpha + 1.0) * (alpha + 2.0);
            assert!((second.mean - expect).abs() < 3.0 * second.std_err, "{alpha}: {second:?}");
        }
    }

    #[test]
    fn log_ratio_matches_full_density() {
        let log_target = |x: &[f64], alpha: f64| {
            let mut v = 0.0;
            for i in 0..x.len() {
                v += (alpha + 1.0) * x[i].ln() - x[i];
                for j in i + 1..x.len() {
                    v += 2.0 * (x[i] - x[j]).abs().ln() - (x[i] + x[j]).ln();
                }
            }
            v
        };
        let x = vec![0.4, 1.3, 2.9];
        let mut y = x.clone();
        y[1] = 0.9;
        let direct = log_target(&y, 0.5) - log_target(&x, 0.5);
        assert!((log_ratio(&x, 1, 0.9, 0.5) - direct).abs() < 1e-13);
        assert_eq!(log_ratio(&x, 1, 0.4, 0.5), f64::NEG_INFINITY);
    }
}

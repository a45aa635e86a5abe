//! Monte Carlo engines: a Metropolis sampler for the unconstrained
//! ensemble, the trace normalisation onto the simplex, entropy estimators,
//! and a matrix-model sampler built from random states.
//!
//! Every stream is a `ChaCha12Rng` (rand_chacha 0.9, pinned) seeded with
//! `seed_from_u64(seed)`; independent streams of one seed are selected with
//! `set_stream(index)`, so results do not depend on thread scheduling.

mod linalg;
mod matrix_model;
mod mcmc;
mod stats;

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use serde::{Deserialize, Serialize};

use crate::closed_form::EnsembleParams;
use crate::error::{Error, Result};

pub use linalg::{haar_unitary, hermitian_eigen, hermitian_eigenvalues, CMatrix, HermitianEigen};
pub use matrix_model::sample_bures_matrix_model;
pub use mcmc::{sample_unconstrained_mcmc, McmcConfig};
pub use stats::{
    correlation, estimate_entropy_stats, mean_with_error, ErrorModel, EntropyStats, SampleSet, Statistic,
    NUM_BATCHES,
};

/// Deterministic generator for stream `stream` of `seed`.
pub fn rng_stream(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Eigenvalues of the unconstrained ensemble: `m` positive reals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositiveSpectrum(Vec<f64>);

impl PositiveSpectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
            return Err(Error::Parameter("positive spectrum needs finite entries > 0".into()));
        }
        Ok(PositiveSpectrum(values))
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// Eigenvalues of a reduced density matrix: non-negative, summing to one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplexSpectrum(Vec<f64>);

impl SimplexSpectrum {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let sum: f64 = values.iter().sum();
        if values.is_empty() || values.iter().any(|&v| !(v >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!(
                "simplex spectrum needs entries >= 0 summing to 1 (sum = {sum})"
            )));
        }
        Ok(SimplexSpectrum(values))
    }

    /// Clamps round-off negatives to zero and rescales to unit sum.
    pub fn normalized(mut values: Vec<f64>) -> Result<Self> {
        for v in &mut values {
            *v = v.max(0.0);
        }
        let sum: f64 = values.iter().sum();
        if !(sum > 0.0) || !sum.is_finite() {
            return Err(Error::Parameter("cannot normalise a spectrum with zero trace".into()));
        }
        values.iter_mut().for_each(|v| *v /= sum);
        SimplexSpectrum::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    /// `Σ λ²`.
    pub fn purity(&self) -> f64 {
        self.0.iter().map(|l| l * l).sum()
    }

    /// `-Σ λ ln λ`, with `0 ln 0 = 0`.
    pub fn von_neumann(&self) -> f64 {
        -self.0.iter().filter(|&&l| l > 0.0).map(|l| l * l.ln()).sum::<f64>()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SampleMethod {
    McmcUnconstrained,
    MatrixModel,
}

impl SampleMethod {
    pub fn name(self) -> &'static str {
        match self {
            SampleMethod::McmcUnconstrained => "mcmc_unconstrained",
            SampleMethod::MatrixModel => "matrix_model",
        }
    }

    pub fn error_model(self) -> ErrorModel {
        match self {
            SampleMethod::McmcUnconstrained => ErrorModel::BatchMeans,
            SampleMethod::MatrixModel => ErrorModel::Independent,
        }
    }
}

/// Rows of eigenvalues from one sampler run.
///
/// MCMC rows are unconstrained (positive) spectra; matrix-model rows are
/// already on the simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub params: EnsembleParams,
    pub samples: Vec<Vec<f64>>,
    pub seed: u64,
    pub burn_in: usize,
    pub thinning: usize,
    pub acceptance_rate: f64,
    pub method: SampleMethod,
}

/// Metadata written next to a sample CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub params: EnsembleParams,
    pub count: usize,
    pub seed: u64,
    pub burn_in: usize,
    pub thinning: usize,
    pub acceptance_rate: f64,
    pub method: SampleMethod,
}

impl SampleBatch {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Unconstrained spectra; only MCMC batches have them.
    pub fn positive(&self) -> Result<Vec<PositiveSpectrum>> {
        if self.method != SampleMethod::McmcUnconstrained {
            return Err(Error::SampleKind {
                statistic: "unconstrained spectrum",
                samples: "matrix-model",
            });
        }
        self.samples.iter().map(|r| PositiveSpectrum::new(r.clone())).collect()
    }

    /// Simplex spectra: the trace-normalised MCMC rows, or matrix-model rows as is.
    pub fn simplex(&self) -> Result<Vec<SimplexSpectrum>> {
        match self.method {
            SampleMethod::McmcUnconstrained => Ok(constrain(self)?.0),
            SampleMethod::MatrixModel => self
                .samples
                .iter()
                .map(|r| SimplexSpectrum::normalized(r.clone()))
                .collect(),
        }
    }

    /// Estimates `statistic`, normalising onto the simplex when it needs to.
    pub fn entropy_stats(&self, statistic: Statistic) -> Result<EntropyStats> {
        let stats = if statistic.needs_simplex() {
            let s = self.simplex()?;
            estimate_entropy_stats(SampleSet::Simplex(&s), statistic, self.method.error_model())?
        } else {
            let p = self.positive()?;
            estimate_entropy_stats(SampleSet::Positive(&p), statistic, self.method.error_model())?
        };
        Ok(stats.with_origin(self.seed, self.method.name()))
    }

    pub fn meta(&self) -> SampleMeta {
        SampleMeta {
            params: self.params,
            count: self.len(),
            seed: self.seed,
            burn_in: self.burn_in,
            thinning: self.thinning,
            acceptance_rate: self.acceptance_rate,
            method: self.method,
        }
    }

    /// Sidecar path: `samples.csv` -> `samples.meta.json`.
    pub fn meta_path(csv: &Path) -> PathBuf {
        csv.with_extension("meta.json")
    }

    /// One row per sample, `m` columns, plus a JSON metadata sidecar.
    pub fn write_csv(&self, path: &Path) -> std::io::Result<PathBuf> {
        let m = self.params.m;
        let mut out = (1..=m).map(|i| format!("x{i}")).collect::<Vec<_>>().join(",");
        out.push('\n');
        for row in &self.samples {
            let line = row.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(",");
            out.push_str(&line);
            out.push('\n');
        }
        fs::write(path, out)?;
        let meta = Self::meta_path(path);
        let json = serde_json::to_string_pretty(&self.meta()).expect("metadata serialises");
        fs::write(&meta, json)?;
        Ok(meta)
    }
}

/// Maps each unconstrained row to `λ = x / θ`, `θ = Σ x_i`.
///
/// `λ` follows the constrained density and `θ ~ Gamma(m(m+2α+1)/2)`,
/// independently of `λ`.
pub fn constrain(batch: &SampleBatch) -> Result<(Vec<SimplexSpectrum>, Vec<f64>)> {
    if batch.method != SampleMethod::McmcUnconstrained {
        return Err(Error::SampleKind {
            statistic: "trace normalisation",
            samples: "matrix-model",
        });
    }
    let mut simplex = Vec::with_capacity(batch.len());
    let mut traces = Vec::with_capacity(batch.len());
    for row in &batch.samples {
        let theta: f64 = row.iter().sum();
        simplex.push(SimplexSpectrum::normalized(row.clone())?);
        traces.push(theta);
    }
    Ok((simplex, traces))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectrum_validation() {
        assert!(PositiveSpectrum::new(vec![1.0, 0.0]).is_err());
        assert!(PositiveSpectrum::new(vec![]).is_err());
        assert!(SimplexSpectrum::new(vec![0.5, 0.6]).is_err());
        assert!(SimplexSpectrum::new(vec![1.2, -0.2]).is_err());
        let s = SimplexSpectrum::normalized(vec![2.0, 2.0, -1e-18]).unwrap();
        assert_eq!(s.values(), &[0.5, 0.5, 0.0]);
    }

    #[test]
    fn entropies_of_extreme_states() {
        let sep = SimplexSpectrum::new(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(sep.von_neumann(), 0.0);
        assert_eq!(sep.purity(), 1.0);
        let mixed = SimplexSpectrum::new(vec![0.25; 4]).unwrap();
        assert!((mixed.purity() - 0.25).abs() < 1e-15);
        assert!((mixed.von_neumann() - 4f64.ln()).abs() < 1e-15);
    }

    #[test]
    fn constrain_m1_is_trivial() {
        let batch = SampleBatch {
            params: EnsembleParams::new(1, 0.0).unwrap(),
            samples: vec![vec![0.3], vec![2.5]],
            seed: 0,
            burn_in: 0,
            thinning: 1,
            acceptance_rate: 0.5,
            method: SampleMethod::McmcUnconstrained,
        };
        let (s, t) = constrain(&batch).unwrap();
        assert_eq!(t, vec![0.3, 2.5]);
        assert!(s.iter().all(|l| l.values() == [1.0]));
    }

    #[test]
    fn csv_and_sidecar() {
        let batch = SampleBatch {
            params: EnsembleParams::new(2, 0.5).unwrap(),
            samples: vec![vec![0.3, 1.0], vec![2.5, 0.1]],
            seed: 9,
            burn_in: 10,
            thinning: 2,
            acceptance_rate: 0.4,
            method: SampleMethod::McmcUnconstrained,
        };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("draws.csv");
        let meta = batch.write_csv(&path).unwrap();
        assert_eq!(meta, dir.path().join("draws.meta.json"));
        let csv = fs::read_to_string(&path).unwrap();
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.starts_with("x1,x2\n"));
        let back: SampleMeta = serde_json::from_str(&fs::read_to_string(meta).unwrap()).unwrap();
        assert_eq!(back, batch.meta());
    }

    #[test]
    fn streams_differ_and_repeat() {
        use rand::Rng;
        let a: u64 = rng_stream(1, 0).random();
        let b: u64 = rng_stream(1, 1).random();
        let c: u64 = rng_stream(1, 0).random();
        assert_ne!(a, b);
        assert_eq!(a, c);
    }
}

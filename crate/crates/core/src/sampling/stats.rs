use serde::{Deserialize, Serialize};

use super::{PositiveSpectrum, SimplexSpectrum};
use crate::error::{Error, Result};

/// Batches used for the batch-means standard error of correlated chains.
pub const NUM_BATCHES: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Statistic {
    /// Purity `Σ λ²` of a simplex spectrum.
    #[serde(rename = "S_P")]
    SP,
    /// von Neumann entropy `-Σ λ ln λ`.
    #[serde(rename = "S_vN")]
    SvN,
    /// Induced purity `Σ x²` of an unconstrained spectrum.
    #[serde(rename = "T_P")]
    TP,
    /// Induced entropy `Σ x ln x`.
    #[serde(rename = "T_vN")]
    TvN,
    /// `θ = Σ x`.
    #[serde(rename = "trace_sum")]
    TraceSum,
}

impl Statistic {
    pub fn name(self) -> &'static str {
        match self {
            Statistic::SP => "S_P",
            Statistic::SvN => "S_vN",
            Statistic::TP => "T_P",
            Statistic::TvN => "T_vN",
            Statistic::TraceSum => "trace_sum",
        }
    }

    pub fn needs_simplex(self) -> bool {
        matches!(self, Statistic::SP | Statistic::SvN)
    }
}

/// Samples to estimate from; entropies need simplex spectra, the induced
/// statistics need unconstrained ones.
#[derive(Debug, Clone, Copy)]
pub enum SampleSet<'a> {
    Simplex(&'a [SimplexSpectrum]),
    Positive(&'a [PositiveSpectrum]),
}

/// How the standard error accounts for correlation between samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ErrorModel {
    /// Independent draws: `sd / √n`.
    Independent,
    /// Markov chain output: spread of [`NUM_BATCHES`] contiguous batch means.
    BatchMeans,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyStats {
    pub statistic: Statistic,
    pub mean: f64,
    pub std_err: f64,
    pub count: usize,
    pub seed: Option<u64>,
    pub method: String,
}

impl EntropyStats {
    pub fn with_origin(mut self, seed: u64, method: &str) -> Self {
        self.seed = Some(seed);
        self.method = method.to_string();
        self
    }

    /// `|mean - reference| / std_err` (infinite for a zero error and a mismatch).
    pub fn sigma_distance(&self, reference: f64) -> f64 {
        let diff = (self.mean - reference).abs();
        if diff == 0.0 {
            0.0
        } else {
            diff / self.std_err
        }
    }
}

/// Mean of `values` and its standard error under `model`.
///
/// Batch means use `NUM_BATCHES` equal batches over the leading
/// `NUM_BATCHES * ⌊n / NUM_BATCHES⌋` values (all values for the mean); with
/// fewer values than batches the independent formula is used.
pub fn mean_with_error(values: &[f64], model: ErrorModel) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let batch = n / NUM_BATCHES;
    if model == ErrorModel::Independent || batch < 2 {
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        return (mean, (var / n as f64).sqrt());
    }
    let means: Vec<f64> = values
        .chunks_exact(batch)
        .take(NUM_BATCHES)
        .map(|c| c.iter().sum::<f64>() / batch as f64)
        .collect();
    let grand = means.iter().sum::<f64>() / NUM_BATCHES as f64;
    let var = means.iter().map(|v| (v - grand).powi(2)).sum::<f64>() / (NUM_BATCHES - 1) as f64;
    (mean, (var / NUM_BATCHES as f64).sqrt())
}

/// Pearson correlation of `a` and `b`, with a standard error from the
/// product of the standardised series under `model`.
pub fn correlation(a: &[f64], b: &[f64], model: ErrorModel) -> Result<(f64, f64)> {
    if a.len() != b.len() || a.len() < 3 {
        return Err(Error::Parameter("correlation needs two series of equal length >= 3".into()));
    }
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let sa = (a.iter().map(|v| (v - ma).powi(2)).sum::<f64>() / n).sqrt();
    let sb = (b.iter().map(|v| (v - mb).powi(2)).sum::<f64>() / n).sqrt();
    if sa == 0.0 || sb == 0.0 {
        return Err(Error::Parameter("correlation of a constant series".into()));
    }
    let products: Vec<f64> = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - ma) / sa * (y - mb) / sb)
        .collect();
    Ok(mean_with_error(&products, model))
}

fn evaluate(samples: SampleSet<'_>, statistic: Statistic) -> Result<Vec<f64>> {
    let kind_error = |samples: &'static str| Error::SampleKind {
        statistic: statistic.name(),
        samples,
    };
    match (samples, statistic) {
        (SampleSet::Simplex(s), Statistic::SP) => Ok(s.iter().map(|l| l.purity()).collect()),
        (SampleSet::Simplex(s), Statistic::SvN) => Ok(s.iter().map(|l| l.von_neumann()).collect()),
        (SampleSet::Simplex(_), _) => Err(kind_error("simplex")),
        (SampleSet::Positive(p), Statistic::TP) => Ok(p
            .iter()
            .map(|x| x.values().iter().map(|v| v * v).sum())
            .collect()),
        (SampleSet::Positive(p), Statistic::TvN) => Ok(p
            .iter()
            .map(|x| x.values().iter().map(|v| v * v.ln()).sum())
            .collect()),
        (SampleSet::Positive(p), Statistic::TraceSum) => Ok(p.iter().map(|x| x.trace()).collect()),
        (SampleSet::Positive(_), _) => Err(kind_error("unconstrained")),
    }
}

/// Mean and standard error of `statistic` over `samples`.
pub fn estimate_entropy_stats(
    samples: SampleSet<'_>,
    statistic: Statistic,
    model: ErrorModel,
) -> Result<EntropyStats> {
    let values = evaluate(samples, statistic)?;
    if values.is_empty() {
        return Err(Error::Parameter("no samples".into()));
    }
    let (mean, std_err) = mean_with_error(&values, model);
    Ok(EntropyStats {
        statistic,
        mean,
        std_err,
        count: values.len(),
        seed: None,
        method: match model {
            ErrorModel::Independent => "independent".into(),
            ErrorModel::BatchMeans => "batch_means".into(),
        },
    })
}

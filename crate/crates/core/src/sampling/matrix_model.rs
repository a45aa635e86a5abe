use rayon::prelude::*;

use super::linalg::{haar_unitary, hermitian_eigenvalues, CMatrix};
use super::{rng_stream, SampleBatch, SampleMethod, SimplexSpectrum};
use crate::closed_form::Dims;
use crate::error::{Error, Result};

/// Draws per RNG stream; fixed so output does not depend on thread count.
const CHUNK: usize = 1024;

fn draw(dims: Dims, rng: &mut rand_chacha::ChaCha12Rng) -> Result<Vec<f64>> {
    let z = CMatrix::ginibre(dims.m, dims.n, rng);
    let u = haar_unitary(dims.m, rng);
    let w = &CMatrix::identity(dims.m).add(&u) * &z;
    let rho = &w * &w.adjoint();
    let spectrum = SimplexSpectrum::normalized(hermitian_eigenvalues(&rho)?)?;
    Ok(spectrum.values().to_vec())
}

/// Independent reduced-density-matrix spectra from the random-state
/// construction `W = (I + U) Z`, `ρ_A = W W† / tr(W W†)`, with `Z` an
/// `m × n` complex Ginibre matrix and `U` an `m × m` Haar unitary.
///
/// Rows are eigenvalues in descending order. This reproduces the
/// Bures-Hall ensemble for `m = n`; for `m < n` the distribution of `U`
/// that would do so is not known, so those batches are experimental.
pub fn sample_bures_matrix_model(dims: Dims, count: usize, seed: u64) -> Result<SampleBatch> {
    if count == 0 {
        return Err(Error::Parameter("count must be at least 1".into()));
    }
    let chunks = count.div_ceil(CHUNK);
    let rows: Vec<Vec<Vec<f64>>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = rng_stream(seed, c as u64);
            let len = CHUNK.min(count - c * CHUNK);
            (0..len).map(|_| draw(dims, &mut rng)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    Ok(SampleBatch {
        params: dims.params(),
        samples: rows.into_iter().flatten().collect(),
        seed,
        burn_in: 0,
        thinning: 1,
        acceptance_rate: 1.0,
        method: SampleMethod::MatrixModel,
    })
}

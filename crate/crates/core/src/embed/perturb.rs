use rand_distr::{Distribution, Normal};

use super::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::rng::{stream_rng, Stream};

/// Multiplies every entry by `exp(ε)`, `ε ~ N(0, delta²)` i.i.d.; `delta`
/// is the standard deviation. Signs are preserved.
pub fn perturb_embeddings(x: &EmbeddingMatrix, delta: f64, seed: u64) -> Result<EmbeddingMatrix> {
    if !(delta >= 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "noise level {delta} must be >= 0"
        )));
    }
    if delta == 0.0 {
        return Ok(x.clone());
    }
    let normal = Normal::new(0.0, delta)
        .map_err(|e| Error::InvalidParameter(format!("noise distribution: {e}")))?;
    let mut rng = stream_rng(seed, Stream::Perturb);
    let mut values = x.values().clone();
    // row-major iteration fixes the draw order
    for v in values.iter_mut() {
        *v *= normal.sample(&mut rng).exp();
    }
    EmbeddingMatrix::new(values, x.node_ids().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array2;
    use rand::Rng;

    fn random_matrix(d: usize, n: usize, seed: u64) -> EmbeddingMatrix {
        let mut rng = stream_rng(seed, Stream::Init);
        EmbeddingMatrix::from_values(Array2::from_shape_fn((d, n), |_| {
            rng.random_range(-1.0..1.0)
        }))
        .unwrap()
    }

    #[test]
    fn zero_noise_is_identity() {
        let x = random_matrix(8, 20, 1);
        assert_eq!(perturb_embeddings(&x, 0.0, 3).unwrap(), x);
    }

    #[test]
    fn tiny_noise_converges_to_identity() {
        let x = random_matrix(8, 20, 1);
        let y = perturb_embeddings(&x, 1e-8, 3).unwrap();
        let max = (x.values() - y.values())
            .iter()
            .fold(0.0f64, |m, d| m.max(d.abs()));
        assert!(max < 1e-6);
    }

    #[test]
    fn signs_preserved() {
        let x = random_matrix(8, 50, 2);
        let y = perturb_embeddings(&x, 2.0, 4).unwrap();
        for (a, b) in x.values().iter().zip(y.values()) {
            assert_eq!(a.signum(), b.signum());
        }
    }

    #[test]
    fn log_ratio_is_half_normal() {
        // E|ε| = delta·sqrt(2/π) for ε ~ N(0, delta²)
        let delta = 0.5;
        let expected = delta * (2.0 / std::f64::consts::PI).sqrt();
        let mut total = 0.0;
        let mut count = 0.0;
        for seed in 0..10 {
            let x = random_matrix(8, 200, 100 + seed);
            let y = perturb_embeddings(&x, delta, seed).unwrap();
            for (a, b) in x.values().iter().zip(y.values()) {
                total += (b.abs().ln() - a.abs().ln()).abs();
                count += 1.0;
            }
        }
        let mean = total / count;
        assert!(
            (mean - expected).abs() < 0.05 * expected,
            "{mean} vs {expected}"
        );
    }

    #[test]
    fn negative_delta_rejected() {
        assert!(perturb_embeddings(&random_matrix(2, 2, 0), -0.1, 0).is_err());
    }
}

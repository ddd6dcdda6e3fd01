use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sha2::{Digest, Sha256};

use crate::scalar::squared_distance;
use crate::Scalar;

/// `n_samples` rows around `x`: row 0 is `x`, the rest add independent N(0, 1) noise per feature.
pub fn sample_perturbations<T: Scalar>(x: &[T], n_samples: usize, seed: u64) -> Vec<Vec<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n_samples);
    if n_samples == 0 {
        return out;
    }
    out.push(x.to_vec());
    for _ in 1..n_samples {
        out.push(
            x.iter()
                .map(|&v| {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    v + T::lit(e)
                })
                .collect(),
        );
    }
    out
}

/// Exponential kernel `exp(-d^2 / width^2)` on Euclidean distance to `x`.
pub fn kernel_weights<T: Scalar>(samples: &[Vec<T>], x: &[T], width: T) -> Vec<T> {
    let w2 = width * width;
    samples.iter().map(|s| (-squared_distance(s, x) / w2).exp()).collect()
}

/// Per-instance sampler seed, independent of the order instances are processed in.
pub fn instance_seed(seed: u64, scan_id: &str) -> u64 {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(scan_id.as_bytes());
    let digest = h.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}

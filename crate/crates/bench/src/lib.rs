//! Input fixtures shared by the benchmarks.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use sbp_core::{generate, Dataset, SyntheticKind, SyntheticSpec};

/// `n` standard-normal responses.
pub fn responses(n: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

/// Alternating ±1 labels.
pub fn labels(n: usize) -> Vec<f64> {
    (0..n).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect()
}

pub fn blobs(n: usize, dimension: usize, seed: u64) -> Dataset {
    generate(&SyntheticSpec {
        kind: SyntheticKind::TwoGaussians {
            separation: 2.0,
            noise_rate: 0.1,
        },
        n,
        dimension,
        seed,
    })
    .expect("valid synthetic spec")
}

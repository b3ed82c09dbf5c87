//! Random Fourier features for the Gaussian kernel.
//!
//! `P(x)_{2i} = cos(⟨v_i, x⟩/σ)/√k`, `P(x)_{2i+1} = sin(⟨v_i, x⟩/σ)/√k` with
//! `v_i ~ N(0, I)`, so `⟨P(x), P(x′)⟩` is an unbiased estimate of
//! `exp(−‖x − x′‖²/(2σ²))`. Cost is counted in `d`-dimensional inner
//! products: `k` per mapped example.

use std::sync::atomic::{AtomicU64, Ordering};

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::kernels::SparseExample;

/// Sampler used for the directions, recorded alongside results.
pub const DIRECTION_SAMPLER: &str = "rand_distr::StandardNormal over ChaCha8Rng::seed_from_u64";

#[derive(Debug)]
pub struct FourierMap {
    directions: Vec<f64>,
    k: usize,
    dimension: usize,
    inv_sigma: f64,
    inner_products: AtomicU64,
}

impl FourierMap {
    /// `k` direction pairs in `dimension` inputs for bandwidth `σ²`.
    pub fn new(seed: u64, k: usize, dimension: usize, sigma2: f64) -> Result<Self> {
        if k == 0 || dimension == 0 {
            return Err(Error::param("k and dimension must be >= 1"));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::param(format!("sigma2 must be > 0, got {sigma2}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let directions = (0..k * dimension)
            .map(|_| StandardNormal.sample(&mut rng))
            .collect();
        Ok(FourierMap {
            directions,
            k,
            dimension,
            inv_sigma: 1.0 / sigma2.sqrt(),
            inner_products: AtomicU64::new(0),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn output_dimension(&self) -> usize {
        2 * self.k
    }

    /// Inner products charged so far.
    pub fn inner_products(&self) -> u64 {
        self.inner_products.load(Ordering::Relaxed)
    }

    fn map(&self, x: &SparseExample) -> Result<Vec<f64>> {
        if x.dimension() > self.dimension {
            return Err(Error::Data(format!(
                "example has feature id {} beyond map dimension {}",
                x.dimension(),
                self.dimension
            )));
        }
        let scale = 1.0 / (self.k as f64).sqrt();
        let mut out = Vec::with_capacity(2 * self.k);
        for v in self.directions.chunks_exact(self.dimension) {
            let dot: f64 = x
                .indices()
                .iter()
                .zip(x.values())
                .map(|(&i, &val)| v[i as usize] * val)
                .sum();
            let (s, c) = (dot * self.inv_sigma).sin_cos();
            out.push(c * scale);
            out.push(s * scale);
        }
        Ok(out)
    }

    /// Feature vector of `x`; charges `k` inner products.
    pub fn features(&self, x: &SparseExample) -> Result<Vec<f64>> {
        let f = self.map(x)?;
        self.inner_products.fetch_add(self.k as u64, Ordering::Relaxed);
        Ok(f)
    }

    /// Maps every example (labels kept); charges `k·n` inner products.
    pub fn linearize(&self, data: &Dataset) -> Result<Dataset> {
        let mapped = data
            .examples()
            .par_iter()
            .map(|x| {
                let f = self.map(x)?;
                SparseExample::dense(&f, x.label())
            })
            .collect::<Result<Vec<_>>>()?;
        self.inner_products
            .fetch_add(self.k as u64 * data.len() as u64, Ordering::Relaxed);
        Ok(Dataset::new(mapped))
    }
}

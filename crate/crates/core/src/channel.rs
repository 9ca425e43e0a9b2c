//! The AWGN model `Y = Δ·X + N`, `N ~ CN(0, σ²)`.
//!
//! Random generation is seeded and split into fixed chunks of
//! [`CHUNK_LEN`] samples. Chunk `c` draws from a ChaCha8 generator keyed by
//! the user seed and a per-purpose domain tag, with stream number `c`, so the
//! output does not depend on how many threads process the chunks.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal, weighted::WeightedAliasIndex};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constellation::{Constellation, SymbolDistribution};
use crate::error::{invalid, Result};

/// Samples per generator stream.
pub const CHUNK_LEN: usize = 4096;

const DOMAIN_SYMBOLS: u64 = 0x5359_4d42;
const DOMAIN_NOISE: u64 = 0x4e4f_4953;

fn chunk_rng(seed: u64, domain: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain.wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(chunk as u64);
    rng
}

/// Model parameters `θ = (Δ, σ², p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelParams {
    delta: f64,
    sigma2: f64,
    dist: SymbolDistribution,
}

impl ChannelParams {
    pub fn new(delta: f64, sigma2: f64, dist: SymbolDistribution) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(invalid(format!("gain must be finite and > 0, got {delta}")));
        }
        if !(sigma2.is_finite() && sigma2 > 0.0) {
            return Err(invalid(format!("noise variance must be finite and > 0, got {sigma2}")));
        }
        Ok(Self { delta, sigma2, dist })
    }

    /// Parameters whose noise variance gives the requested SNR,
    /// `SNR = Δ² E[|X|²] / σ²`.
    pub fn from_snr_db(c: &Constellation, delta: f64, snr_db: f64, dist: SymbolDistribution) -> Result<Self> {
        let signal = delta * delta * dist.mean_energy(c);
        Self::new(delta, signal / 10f64.powf(snr_db / 10.0), dist)
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn dist(&self) -> &SymbolDistribution {
        &self.dist
    }

    pub fn snr_db(&self, c: &Constellation) -> f64 {
        10.0 * (self.delta * self.delta * self.dist.mean_energy(c) / self.sigma2).log10()
    }

    /// `p_{Y|X}(y|x)`.
    pub fn likelihood(&self, y: Complex64, x: Complex64) -> f64 {
        (-(y - self.delta * x).norm_sqr() / self.sigma2).exp() / (PI * self.sigma2)
    }

    /// `log p_{Y|X}(y|x) = -log(π σ²) - |y - Δx|² / σ²`.
    pub fn log_likelihood(&self, y: Complex64, x: Complex64) -> f64 {
        -(PI * self.sigma2).ln() - (y - self.delta * x).norm_sqr() / self.sigma2
    }
}

/// Channel observations, optionally paired with the transmitted symbols.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleBatch {
    pub symbols: Option<Vec<Complex64>>,
    pub observations: Vec<Complex64>,
    pub seed: Option<u64>,
}

impl SampleBatch {
    pub fn new(observations: Vec<Complex64>) -> Result<Self> {
        if observations.is_empty() {
            return Err(invalid("a sample batch needs at least one observation"));
        }
        Ok(Self {
            symbols: None,
            observations,
            seed: None,
        })
    }

    pub fn with_symbols(symbols: Vec<Complex64>, observations: Vec<Complex64>) -> Result<Self> {
        if symbols.len() != observations.len() {
            return Err(invalid(format!(
                "{} symbols for {} observations",
                symbols.len(),
                observations.len()
            )));
        }
        let mut batch = Self::new(observations)?;
        batch.symbols = Some(symbols);
        Ok(batch)
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Symbol indices into `c`; fails when symbols are absent or off-grid.
    pub fn symbol_indices(&self, c: &Constellation) -> Result<Vec<usize>> {
        let symbols = self
            .symbols
            .as_ref()
            .ok_or_else(|| invalid("data-aided processing requires transmitted symbols"))?;
        let index = c.index_map();
        symbols
            .iter()
            .enumerate()
            .map(|(i, &x)| {
                index
                    .get(x)
                    .ok_or_else(|| invalid(format!("symbol {i} ({x}) is not a constellation point")))
            })
            .collect()
    }

    /// Rounds every value to single precision, matching the binary file format.
    pub fn quantize_f32(&self) -> Self {
        let q = |v: &[Complex64]| -> Vec<Complex64> {
            v.iter()
                .map(|z| Complex64::new(z.re as f32 as f64, z.im as f32 as f64))
                .collect()
        };
        Self {
            symbols: self.symbols.as_deref().map(q),
            observations: q(&self.observations),
            seed: self.seed,
        }
    }

    pub fn mean_power(&self) -> f64 {
        self.observations.iter().map(|y| y.norm_sqr()).sum::<f64>() / self.len() as f64
    }
}

/// Draws `n` i.i.d. symbol indices from `d`.
pub fn draw_symbol_indices(d: &SymbolDistribution, n: usize, seed: u64) -> Result<Vec<usize>> {
    if n == 0 {
        return Err(invalid("cannot draw zero symbols"));
    }
    let alias = WeightedAliasIndex::new(d.pmf().to_vec()).map_err(|e| invalid(e.to_string()))?;
    let chunks: Vec<Vec<usize>> = (0..n.div_ceil(CHUNK_LEN))
        .into_par_iter()
        .map(|c| {
            let len = CHUNK_LEN.min(n - c * CHUNK_LEN);
            let mut rng = chunk_rng(seed, DOMAIN_SYMBOLS, c);
            (0..len).map(|_| alias.sample(&mut rng)).collect()
        })
        .collect();
    Ok(chunks.concat())
}

/// Draws `n` i.i.d. symbols from `d` over the points of `c`.
pub fn draw_symbols(c: &Constellation, d: &SymbolDistribution, n: usize, seed: u64) -> Result<Vec<Complex64>> {
    if d.len() != c.len() {
        return Err(invalid("distribution length does not match the constellation"));
    }
    Ok(draw_symbol_indices(d, n, seed)?
        .into_iter()
        .map(|k| c.points()[k])
        .collect())
}

/// Passes `x` through the channel: `y_i = Δ x_i + n_i`, each noise component
/// having variance `σ²/2`.
pub fn transmit(x: &[Complex64], params: &ChannelParams, seed: u64) -> Result<SampleBatch> {
    if x.is_empty() {
        return Err(invalid("cannot transmit an empty symbol list"));
    }
    let scale = (params.sigma2 / 2.0).sqrt();
    let observations: Vec<Complex64> = x
        .par_chunks(CHUNK_LEN)
        .enumerate()
        .flat_map_iter(|(c, chunk)| {
            let mut rng = chunk_rng(seed, DOMAIN_NOISE, c);
            chunk
                .iter()
                .map(|&xi| {
                    let re: f64 = rng.sample(StandardNormal);
                    let im: f64 = rng.sample(StandardNormal);
                    params.delta * xi + scale * Complex64::new(re, im)
                })
                .collect::<Vec<_>>()
        })
        .collect();
    let mut batch = SampleBatch::with_symbols(x.to_vec(), observations)?;
    batch.seed = Some(seed);
    Ok(batch)
}

/// Draws symbols from `params.dist` and transmits them. Symbols and noise use
/// separate generator domains of the same seed.
pub fn simulate(c: &Constellation, params: &ChannelParams, n: usize, seed: u64) -> Result<SampleBatch> {
    let x = draw_symbols(c, params.dist(), n, seed)?;
    transmit(&x, params, seed)
}

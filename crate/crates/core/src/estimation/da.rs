//! Data-aided reference estimator.

use crate::channel::{ChannelParams, SampleBatch};
use crate::constellation::{Constellation, SymbolDistribution};
use crate::error::{invalid, Error, Result};

use super::em::SIGMA2_MIN;

/// Supervised ML estimate from aligned `(x_i, y_i)` pairs.
///
/// The gain is the ratio of sums `Σ Re(y_i x_i*) / Σ |x_i|²`, the noise
/// variance the mean squared residual, and `p_j` the relative frequency of
/// point `j` among the transmitted symbols.
pub fn da_fit(batch: &SampleBatch, c: &Constellation) -> Result<ChannelParams> {
    if batch.symbols.is_none() {
        return Err(invalid("data-aided estimation requires transmitted symbols"));
    }
    let indices = batch.symbol_indices(c)?;
    let points = c.points();
    let (num, den) = batch
        .observations
        .iter()
        .zip(&indices)
        .fold((0.0, 0.0), |(n, d), (y, &k)| {
            (n + (y * points[k].conj()).re, d + points[k].norm_sqr())
        });
    if !(den > 0.0) {
        return Err(Error::NumericDegeneracy("transmitted symbols carry no energy".into()));
    }
    let delta = num / den;
    if !(delta > 0.0) {
        return Err(Error::NumericDegeneracy(format!("gain estimate {delta} is not positive")));
    }
    let n = batch.len() as f64;
    let sigma2 = batch
        .observations
        .iter()
        .zip(&indices)
        .map(|(y, &k)| (y - delta * points[k]).norm_sqr())
        .sum::<f64>()
        / n;
    let mut counts = vec![0.0; c.len()];
    indices.iter().for_each(|&k| counts[k] += 1.0);
    counts.iter_mut().for_each(|v| *v /= n);
    ChannelParams::new(delta, sigma2.max(SIGMA2_MIN), SymbolDistribution::from_pmf(&counts)?)
}

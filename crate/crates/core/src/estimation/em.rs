//! Expectation maximization for the shaped-QAM Gaussian mixture.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, SampleBatch};
use crate::constellation::{fit_mb_nu, Constellation, SymbolDistribution};
use crate::error::{invalid, Error, Result};
use crate::kernel::GridKernel;

use super::kmeans::kmeans_init;

/// Smallest noise variance an estimate may take; estimates of exactly zero
/// (noiseless data) are raised to this.
pub const SIGMA2_MIN: f64 = 1e-300;

/// Rows per reduction block; sums are formed per block and then added in
/// block order, so results do not depend on the thread count.
const BLOCK: usize = 1024;

/// E-step posteriors `Q_i(x_j)`, one row per observation.
///
/// Rows are computed in the log domain and stored normalized.
#[derive(Clone, Debug, PartialEq)]
pub struct PosteriorMatrix {
    q: Vec<f64>,
    width: usize,
}

impl PosteriorMatrix {
    /// Wraps explicit rows; each must be non-negative and sum to one within 1e-9.
    pub fn from_rows(q: Vec<f64>, width: usize) -> Result<Self> {
        if width == 0 || q.len() % width != 0 || q.is_empty() {
            return Err(invalid("posterior matrix has an inconsistent shape"));
        }
        for row in q.chunks_exact(width) {
            if row.iter().any(|v| !(*v >= 0.0)) || (row.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
                return Err(invalid("posterior rows must be probability vectors"));
            }
        }
        Ok(Self { q, width })
    }

    /// One-hot rows at the given point indices.
    pub fn one_hot(indices: &[usize], width: usize) -> Result<Self> {
        let mut q = vec![0.0; indices.len() * width];
        for (i, &k) in indices.iter().enumerate() {
            if k >= width {
                return Err(invalid("one-hot index out of range"));
            }
            q[i * width + k] = 1.0;
        }
        Self::from_rows(q, width)
    }

    pub fn rows(&self) -> usize {
        self.q.len() / self.width
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.q[i * self.width..(i + 1) * self.width]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.q[i * self.width + j]
    }

    /// Column means `(1/n) Σ_i Q_i(x_j)`.
    pub fn occupancy(&self) -> Vec<f64> {
        let partial: Vec<Vec<f64>> = self
            .q
            .par_chunks(BLOCK * self.width)
            .map(|block| {
                let mut acc = vec![0.0; self.width];
                for row in block.chunks_exact(self.width) {
                    acc.iter_mut().zip(row).for_each(|(a, v)| *a += v);
                }
                acc
            })
            .collect();
        let n = self.rows() as f64;
        let mut total = vec![0.0; self.width];
        for p in partial {
            total.iter_mut().zip(p).for_each(|(t, v)| *t += v);
        }
        total.iter_mut().for_each(|t| *t /= n);
        total
    }
}

/// How the symbol distribution is parameterized during estimation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionMode {
    /// One free probability per point.
    #[default]
    GeneralPmf,
    /// `p ∝ exp(-ν|x|²)`, one free parameter.
    MaxwellBoltzmann,
}

/// Starting point of an EM run.
#[derive(Clone, Debug, PartialEq)]
pub enum EmInit {
    Explicit(ChannelParams),
    /// Constrained K-Means on the `k` innermost points.
    KMeans(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmConfig {
    pub max_iters: usize,
    /// Stop when the relative log-likelihood increase drops below this.
    pub ll_rel_tol: f64,
    pub distribution_mode: DistributionMode,
    /// Lower bound applied to every probability after each M-step (general
    /// mode only). Zero permits exact zeros.
    pub prob_floor: f64,
    pub init: EmInit,
}

impl Default for EmConfig {
    fn default() -> Self {
        Self {
            max_iters: 100,
            ll_rel_tol: 1e-8,
            distribution_mode: DistributionMode::GeneralPmf,
            prob_floor: 0.0,
            init: EmInit::KMeans(64),
        }
    }
}

impl EmConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be at least 1"));
        }
        if !(self.ll_rel_tol > 0.0) {
            return Err(invalid("ll_rel_tol must be positive"));
        }
        if !(0.0..1.0).contains(&self.prob_floor) {
            return Err(invalid("prob_floor must lie in [0, 1)"));
        }
        Ok(())
    }
}

/// Outcome of one EM run.
#[derive(Clone, Debug, PartialEq)]
pub struct EmResult {
    pub params: ChannelParams,
    /// `L(θ)` of the initial point and of every M-step output, in order; the
    /// last entry belongs to `params`.
    pub log_likelihood_trace: Vec<f64>,
    /// Number of M-steps performed.
    pub iterations_used: usize,
    pub converged: bool,
    pub diagnostic: Option<String>,
}

impl EmResult {
    /// Largest decrease between consecutive trace entries (0 if monotone).
    pub fn worst_decrease(&self) -> f64 {
        self.log_likelihood_trace
            .windows(2)
            .map(|w| w[0] - w[1])
            .fold(0.0, f64::max)
    }
}

/// Posterior mean and spread `Σ_j q_j |x_j - x̄|²` of one row.
#[inline]
fn row_moments(row: &[f64], points: &[Complex64]) -> (Complex64, f64) {
    let mut mean = Complex64::new(0.0, 0.0);
    for (w, x) in row.iter().zip(points) {
        mean += w * x;
    }
    let mut spread = 0.0;
    for (w, x) in row.iter().zip(points) {
        spread += w * (x - mean).norm_sqr();
    }
    (mean, spread)
}

fn add_into(acc: &mut [f64], row: &[f64]) {
    acc.iter_mut().zip(row).for_each(|(a, v)| *a += v);
}

/// Per-observation posterior moments plus column sums: everything the
/// M-step needs from the posterior matrix.
#[derive(Clone, Debug)]
struct Moments {
    mean: Vec<Complex64>,
    spread: Vec<f64>,
    column_sums: Vec<f64>,
}

fn merge_blocks(blocks: Vec<(Vec<Complex64>, Vec<f64>, Vec<f64>)>, width: usize) -> Moments {
    let mut moments = Moments {
        mean: Vec::new(),
        spread: Vec::new(),
        column_sums: vec![0.0; width],
    };
    for (mean, spread, sums) in blocks {
        moments.mean.extend(mean);
        moments.spread.extend(spread);
        add_into(&mut moments.column_sums, &sums);
    }
    moments
}

fn kernel_for(c: &Constellation, params: &ChannelParams) -> Result<GridKernel> {
    if params.dist().len() != c.len() {
        return Err(invalid("distribution length does not match the constellation"));
    }
    Ok(GridKernel::new(c, params))
}

/// Posteriors `Q_i(x) ∝ p(y_i|x; θ) P(x; θ)` and the log-likelihood
/// `L(θ) = Σ_i log Σ_x p(y_i|x; θ) P(x; θ)`.
pub fn e_step(batch: &SampleBatch, c: &Constellation, params: &ChannelParams) -> Result<(PosteriorMatrix, f64)> {
    let kernel = kernel_for(c, params)?;
    let width = c.len();
    let log_norm = (PI * params.sigma2()).ln();
    let mut q = vec![0.0; batch.len() * width];
    let block_ll: Vec<f64> = q
        .par_chunks_mut(BLOCK * width)
        .zip(batch.observations.par_chunks(BLOCK))
        .map(|(qb, yb)| {
            let mut w = kernel.buffers();
            qb.chunks_exact_mut(width)
                .zip(yb)
                .map(|(row, &y)| {
                    kernel.fill(y, &mut w);
                    let inv = 1.0 / w.total;
                    for (k, q) in row.iter_mut().enumerate() {
                        *q = kernel.point_weight(&w, k) * inv;
                    }
                    w.log_sum() - log_norm
                })
                .sum::<f64>()
        })
        .collect();
    Ok((PosteriorMatrix { q, width }, block_ll.iter().sum()))
}

/// E-step that keeps only the posterior moments instead of the full matrix.
fn e_step_moments(batch: &SampleBatch, c: &Constellation, params: &ChannelParams) -> Result<(Moments, f64)> {
    let kernel = kernel_for(c, params)?;
    let width = c.len();
    let log_norm = (PI * params.sigma2()).ln();
    let blocks: Vec<((Vec<Complex64>, Vec<f64>, Vec<f64>), f64)> = batch
        .observations
        .par_chunks(BLOCK)
        .map(|yb| {
            let mut w = kernel.buffers();
            let mut cells = vec![0.0; kernel.cells()];
            let mut mean = Vec::with_capacity(yb.len());
            let mut spread = Vec::with_capacity(yb.len());
            let mut ll = 0.0;
            for &y in yb {
                kernel.fill(y, &mut w);
                ll += w.log_sum() - log_norm;
                let (mu, s) = kernel.moments(&w);
                mean.push(mu);
                spread.push(s);
                kernel.accumulate(&w, &mut cells);
            }
            let sums = kernel.to_points(&cells);
            ((mean, spread, sums), ll)
        })
        .collect();
    let ll = blocks.iter().map(|(_, l)| l).sum();
    Ok((merge_blocks(blocks.into_iter().map(|(b, _)| b).collect(), width), ll))
}

fn moments_of(q: &PosteriorMatrix, c: &Constellation) -> Moments {
    let width = q.width;
    let blocks = q
        .q
        .par_chunks(BLOCK * width)
        .map(|qb| {
            let mut sums = vec![0.0; width];
            let (mean, spread) = qb
                .chunks_exact(width)
                .map(|row| {
                    add_into(&mut sums, row);
                    row_moments(row, c.points())
                })
                .unzip();
            (mean, spread, sums)
        })
        .collect();
    merge_blocks(blocks, width)
}

/// Closed-form M-step: gain, then noise variance with the new gain, then the
/// distribution.
pub fn m_step(
    batch: &SampleBatch,
    c: &Constellation,
    q: &PosteriorMatrix,
    mode: DistributionMode,
) -> Result<ChannelParams> {
    if q.width() != c.len() || q.rows() != batch.len() {
        return Err(invalid("posterior matrix does not match the batch and constellation"));
    }
    m_step_moments(batch, c, &moments_of(q, c), mode)
}

fn m_step_moments(batch: &SampleBatch, c: &Constellation, moments: &Moments, mode: DistributionMode) -> Result<ChannelParams> {
    let n = batch.len() as f64;
    let energies = c.energies();
    // Σ_i Σ_j q_ij Re(y_i x_j*) = Σ_i Re(y_i x̄_i*)
    let numerator: f64 = batch
        .observations
        .iter()
        .zip(&moments.mean)
        .map(|(y, mu)| (y * mu.conj()).re)
        .sum();
    let denominator: f64 = moments.column_sums.iter().zip(&energies).map(|(o, e)| o * e).sum();
    if !(denominator > 0.0) {
        return Err(Error::NumericDegeneracy("posterior mass lies entirely on zero-energy points".into()));
    }
    let delta = numerator / denominator;
    if !(delta > 0.0) {
        return Err(Error::NumericDegeneracy(format!("gain estimate {delta} is not positive")));
    }
    // Σ_j q_ij |y_i - Δ x_j|² = |y_i - Δ x̄_i|² + Δ² spread_i
    let residual: f64 = batch
        .observations
        .iter()
        .zip(&moments.mean)
        .zip(&moments.spread)
        .map(|((y, mu), s)| (y - delta * mu).norm_sqr() + delta * delta * s)
        .sum();
    let sigma2 = (residual / n).max(SIGMA2_MIN);

    let occupancy: Vec<f64> = moments.column_sums.iter().map(|s| s / n).collect();
    let dist = match mode {
        DistributionMode::GeneralPmf => SymbolDistribution::from_pmf(&occupancy)?,
        DistributionMode::MaxwellBoltzmann => {
            let energy: f64 = occupancy.iter().zip(&energies).map(|(o, e)| o * e).sum();
            SymbolDistribution::maxwell_boltzmann(c, mb_nu_clamped(c, energy))?
        }
    };
    ChannelParams::new(delta, sigma2, dist)
}

/// Upper limit on ν when the target energy is at or below the innermost ring.
const NU_MAX: f64 = 1e3;

fn mb_nu_clamped(c: &Constellation, energy: f64) -> f64 {
    let e_min = c.min_energy();
    let e_uni = c.uniform_energy();
    if energy >= e_uni {
        0.0
    } else if energy <= e_min * (1.0 + 1e-12) {
        NU_MAX
    } else {
        fit_mb_nu(c, energy).map_or(NU_MAX, |nu| nu.min(NU_MAX))
    }
}

fn project_to_mb(c: &Constellation, params: ChannelParams) -> Result<ChannelParams> {
    if params.dist().nu().is_some() {
        return Ok(params);
    }
    let nu = mb_nu_clamped(c, params.dist().mean_energy(c));
    ChannelParams::new(params.delta(), params.sigma2(), SymbolDistribution::maxwell_boltzmann(c, nu)?)
}

fn apply_floor(params: ChannelParams, floor: f64) -> Result<ChannelParams> {
    if floor <= 0.0 {
        return Ok(params);
    }
    let raw: Vec<f64> = params.dist().pmf().iter().map(|p| p.max(floor)).collect();
    ChannelParams::new(params.delta(), params.sigma2(), SymbolDistribution::from_pmf(&raw)?)
}

/// Noise variance below this fraction of the mean observation power counts as
/// a collapsed component.
pub const COLLAPSE_RATIO: f64 = 1e-15;

/// Runs EM from the configured initialization until the relative increase of
/// `L(θ)` falls below `ll_rel_tol` or `max_iters` M-steps have run.
pub fn em_fit(batch: &SampleBatch, c: &Constellation, config: &EmConfig) -> Result<EmResult> {
    config.validate()?;
    if batch.is_empty() {
        return Err(invalid("empty batch"));
    }
    let mut params = match &config.init {
        EmInit::Explicit(p) => p.clone(),
        EmInit::KMeans(k) => kmeans_init(batch, c, *k)?,
    };
    if config.distribution_mode == DistributionMode::MaxwellBoltzmann {
        params = project_to_mb(c, params)?;
    }
    let power = batch.mean_power();
    let (mut moments, mut ll) = e_step_moments(batch, c, &params)?;
    let mut trace = vec![ll];
    let mut iterations_used = 0;
    let mut converged = false;
    let mut diagnostic = None;
    for it in 1..=config.max_iters {
        params = apply_floor(m_step_moments(batch, c, &moments, config.distribution_mode)?, match config.distribution_mode {
            DistributionMode::GeneralPmf => config.prob_floor,
            DistributionMode::MaxwellBoltzmann => 0.0,
        })?;
        iterations_used = it;
        if params.sigma2() < COLLAPSE_RATIO * power {
            diagnostic = Some(format!(
                "noise variance collapsed to {:e} (mean power {:e}) after {it} iterations",
                params.sigma2(),
                power
            ));
            break;
        }
        let prev = ll;
        (moments, ll) = e_step_moments(batch, c, &params)?;
        trace.push(ll);
        if (ll - prev) / prev.abs() < config.ll_rel_tol {
            converged = true;
            break;
        }
    }
    if diagnostic.is_none() && !converged {
        diagnostic = Some(format!("no convergence within {} iterations", config.max_iters));
    }
    Ok(EmResult {
        params,
        log_likelihood_trace: trace,
        iterations_used,
        converged,
        diagnostic,
    })
}

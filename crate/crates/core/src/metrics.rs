//! Bit-wise soft information and the rates it supports.
//!
//! LLRs are natural-log quantities; every reported uncertainty or rate is in
//! bits. Expectations are empirical means over the supplied `(x_i, y_i)`
//! pairs, so scoring needs the transmitted symbols even when the parameters
//! were estimated blindly.

use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{ChannelParams, SampleBatch};
use crate::constellation::Constellation;
use crate::error::{invalid, Error, Result};
use crate::kernel::GridKernel;
use crate::search::minimize_nonnegative;
use num_complex::Complex64;

/// Default LLR magnitude bound, in nats.
pub const DEFAULT_CLIP: f64 = 50.0;

/// Resolution of the search over the metric exponent `s`.
pub const S_TOL: f64 = 1e-5;

/// `n × m` matrix of clipped LLRs, row-major by sample.
#[derive(Clone, Debug, PartialEq)]
pub struct LlrFrame {
    llrs: Vec<f64>,
    bits_per_symbol: usize,
    clip: f64,
}

impl LlrFrame {
    pub fn new(llrs: Vec<f64>, bits_per_symbol: usize, clip: f64) -> Result<Self> {
        if bits_per_symbol == 0 || llrs.len() % bits_per_symbol != 0 {
            return Err(invalid("LLR count is not a multiple of the label width"));
        }
        if !(clip.is_finite() && clip > 0.0) {
            return Err(invalid("clip bound must be positive and finite"));
        }
        if llrs.iter().any(|l| !l.is_finite() || l.abs() > clip) {
            return Err(invalid("LLRs must be finite and within the clip bound"));
        }
        Ok(Self {
            llrs,
            bits_per_symbol,
            clip,
        })
    }

    pub fn len(&self) -> usize {
        self.llrs.len() / self.bits_per_symbol
    }

    pub fn is_empty(&self) -> bool {
        self.llrs.is_empty()
    }

    pub fn bits_per_symbol(&self) -> usize {
        self.bits_per_symbol
    }

    pub fn clip(&self) -> f64 {
        self.clip
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.llrs[i * self.bits_per_symbol + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.llrs[i * self.bits_per_symbol..(i + 1) * self.bits_per_symbol]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.llrs
    }

    /// Multiplies every LLR by `alpha > 0`, scaling the clip bound with it.
    pub fn scaled(&self, alpha: f64) -> Result<Self> {
        Self::new(
            self.llrs.iter().map(|l| alpha * l).collect(),
            self.bits_per_symbol,
            alpha * self.clip,
        )
    }
}

/// `n × m` matrix of transmitted label bits, row-major by sample.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    bits: Vec<u8>,
    bits_per_symbol: usize,
}

impl BitMatrix {
    pub fn new(bits: Vec<u8>, bits_per_symbol: usize) -> Result<Self> {
        if bits_per_symbol == 0 || bits.len() % bits_per_symbol != 0 || bits.iter().any(|&b| b > 1) {
            return Err(invalid("malformed bit matrix"));
        }
        Ok(Self { bits, bits_per_symbol })
    }

    /// Labels of the given point indices.
    pub fn from_indices(c: &Constellation, indices: &[usize]) -> Self {
        let m = c.bits_per_symbol();
        let bits = indices
            .iter()
            .flat_map(|&k| (0..m).map(move |j| c.label_bit(k, j)))
            .collect();
        Self {
            bits,
            bits_per_symbol: m,
        }
    }

    pub fn len(&self) -> usize {
        self.bits.len() / self.bits_per_symbol
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> u8 {
        self.bits[i * self.bits_per_symbol + j]
    }
}

/// `ln(1 + e^z)` without overflow.
#[inline]
fn softplus(z: f64) -> f64 {
    z.max(0.0) + (-z.abs()).exp().ln_1p()
}

/// Per-point log metric `log p_k - |y - Δx_k|²/σ²` (constant terms dropped),
/// `-∞` for points outside the support.
#[inline]
fn log_metrics(y: Complex64, c: &Constellation, params: &ChannelParams, log_p: &[f64], out: &mut [f64]) {
    let inv = 1.0 / params.sigma2();
    let delta = params.delta();
    for ((o, x), lp) in out.iter_mut().zip(c.points()).zip(log_p) {
        *o = if lp.is_finite() {
            lp - (y - delta * x).norm_sqr() * inv
        } else {
            f64::NEG_INFINITY
        };
    }
}

fn log_pmf(params: &ChannelParams) -> Vec<f64> {
    params
        .dist()
        .pmf()
        .iter()
        .map(|&p| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY })
        .collect()
}

fn check_model(c: &Constellation, params: &ChannelParams) -> Result<()> {
    if params.dist().len() != c.len() {
        return Err(Error::InvalidModel(format!(
            "distribution over {} points for a {}-point constellation",
            params.dist().len(),
            c.len()
        )));
    }
    Ok(())
}

/// Bit-wise LLRs `log(Σ_{X_j^0} p(y|x)P(x) / Σ_{X_j^1} p(y|x)P(x))`, clipped
/// to `±DEFAULT_CLIP`.
pub fn compute_llrs(batch: &SampleBatch, c: &Constellation, params: &ChannelParams) -> Result<LlrFrame> {
    compute_llrs_with_clip(batch, c, params, DEFAULT_CLIP)
}

pub fn compute_llrs_with_clip(
    batch: &SampleBatch,
    c: &Constellation,
    params: &ChannelParams,
    clip: f64,
) -> Result<LlrFrame> {
    check_model(c, params)?;
    let m = c.bits_per_symbol();
    let log_p = log_pmf(params);
    for j in 0..m {
        let populated = (0..c.len()).any(|k| log_p[k].is_finite());
        if !populated {
            return Err(Error::InvalidModel(format!("bit level {j} has no point with positive probability")));
        }
    }
    let kernel = GridKernel::new(c, params);
    let mut llrs = vec![0.0; batch.len() * m];
    llrs.par_chunks_mut(m)
        .zip(batch.observations.par_iter())
        .for_each_init(
            || (kernel.buffers(), vec![0.0; m], vec![0.0; m]),
            |(w, s0, s1), (row, &y)| {
                kernel.fill(y, w);
                kernel.bit_sums(w, s0, s1);
                for j in 0..m {
                    row[j] = match (s0[j] > 0.0, s1[j] > 0.0) {
                        (true, true) => (s0[j].ln() - s1[j].ln()).clamp(-clip, clip),
                        (true, false) => clip,
                        (false, true) => -clip,
                        (false, false) => unreachable!("at least one side holds the maximum"),
                    };
                }
            },
        );
    LlrFrame::new(llrs, m, clip)
}

/// Signed LLRs `(1 - 2b) l`, positive when the LLR favours the true bit.
fn signed_llrs(llrs: &LlrFrame, bits: &BitMatrix) -> Result<Vec<f64>> {
    if llrs.len() != bits.len() || llrs.bits_per_symbol() != bits.bits_per_symbol {
        return Err(invalid("LLR and bit matrices differ in shape"));
    }
    Ok(llrs
        .as_slice()
        .iter()
        .zip(&bits.bits)
        .map(|(l, &b)| if b == 0 { *l } else { -l })
        .collect())
}

fn per_bit_from_signed(signed: &[f64], m: usize, s: f64) -> Vec<f64> {
    let n = signed.len() / m;
    let mut acc = vec![0.0; m];
    for row in signed.chunks_exact(m) {
        for (a, v) in acc.iter_mut().zip(row) {
            *a += softplus(-s * v) / LN_2;
        }
    }
    acc.iter().map(|a| a / n as f64).collect()
}

/// Signed LLRs prepared for repeated evaluation of the total uncertainty:
/// entries at exactly `±clip` are counted instead of stored.
struct SearchObjective {
    interior: Vec<f64>,
    clip: f64,
    at_plus: f64,
    at_minus: f64,
    norm: f64,
}

impl SearchObjective {
    fn new(signed: &[f64], clip: f64, n: usize) -> Self {
        let mut interior = Vec::with_capacity(signed.len());
        let (mut at_plus, mut at_minus) = (0.0, 0.0);
        for &v in signed {
            if v == clip {
                at_plus += 1.0;
            } else if v == -clip {
                at_minus += 1.0;
            } else {
                interior.push(v);
            }
        }
        Self {
            interior,
            clip,
            at_plus,
            at_minus,
            norm: n as f64 * LN_2,
        }
    }

    fn total(&self, s: f64) -> f64 {
        let body: f64 = self.interior.iter().map(|v| softplus(-s * v)).sum();
        let edges = self.at_plus * softplus(-s * self.clip) + self.at_minus * softplus(s * self.clip);
        (body + edges) / self.norm
    }
}

fn search_s(llrs: &LlrFrame, signed: &[f64]) -> (f64, f64) {
    let objective = SearchObjective::new(signed, llrs.clip(), llrs.len());
    minimize_nonnegative(|s| objective.total(s), S_TOL)
}

/// Per-bit-level contributions to the uncertainty at a fixed exponent `s`.
pub fn per_bit_uncertainty(llrs: &LlrFrame, bits: &BitMatrix, s: f64) -> Result<Vec<f64>> {
    if !(s >= 0.0) {
        return Err(invalid("metric exponent must be >= 0"));
    }
    Ok(per_bit_from_signed(&signed_llrs(llrs, bits)?, llrs.bits_per_symbol(), s))
}

/// Empirical `(1/n) Σ_i Σ_j log2(1 + exp(-(1 - 2b_ij) s l_ij))`.
pub fn bit_uncertainty(llrs: &LlrFrame, bits: &BitMatrix, s: f64) -> Result<f64> {
    Ok(per_bit_uncertainty(llrs, bits, s)?.iter().sum())
}

/// Minimizes the bit-wise uncertainty over `s ≥ 0`; returns `(s_opt, u_s)`.
pub fn minimize_over_s(llrs: &LlrFrame, bits: &BitMatrix) -> Result<(f64, f64)> {
    let signed = signed_llrs(llrs, bits)?;
    let (s_opt, _) = search_s(llrs, &signed);
    let u_s = per_bit_from_signed(&signed, llrs.bits_per_symbol(), s_opt).iter().sum();
    Ok((s_opt, u_s))
}

/// Achievable-rate summary for one dataset and parameter set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub s_opt: f64,
    /// Bits per symbol.
    pub u_s: f64,
    pub r_abc: f64,
    /// Bits per channel use.
    pub r_a: f64,
    pub h_x: f64,
    pub per_bit_uncertainty: Vec<f64>,
}

impl MetricReport {
    fn assemble(s_opt: f64, per_bit: Vec<f64>, h_x: f64) -> Self {
        let m = per_bit.len() as f64;
        let u_s: f64 = per_bit.iter().sum();
        Self {
            s_opt,
            u_s,
            r_abc: 1.0 - u_s / m,
            r_a: (h_x - u_s).max(0.0),
            h_x,
            per_bit_uncertainty: per_bit,
        }
    }
}

/// Scores `params` on a batch with known transmitted symbols.
pub fn evaluate(batch: &SampleBatch, c: &Constellation, params: &ChannelParams) -> Result<MetricReport> {
    let indices = batch.symbol_indices(c)?;
    let llrs = compute_llrs(batch, c, params)?;
    let bits = BitMatrix::from_indices(c, &indices);
    Ok(evaluate_llrs(&llrs, &bits, params.dist().entropy())?)
}

/// Builds a report from precomputed LLRs and an input entropy.
pub fn evaluate_llrs(llrs: &LlrFrame, bits: &BitMatrix, h_x: f64) -> Result<MetricReport> {
    let signed = signed_llrs(llrs, bits)?;
    let m = llrs.bits_per_symbol();
    let (s_opt, _) = search_s(llrs, &signed);
    Ok(MetricReport::assemble(s_opt, per_bit_from_signed(&signed, m, s_opt), h_x))
}

/// Symbol-metric uncertainty with its optimal exponent.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolUncertainty {
    pub s_opt: f64,
    /// Bits per symbol; `+∞` when some transmitted point has zero model probability.
    pub u_s: f64,
    /// Samples whose transmitted point has zero model probability.
    pub zero_probability_samples: Vec<usize>,
}

/// Uncertainty of the symbol-wise metric `q(x, y) = p(y|x) P(x)`, minimized
/// over `s ≥ 0`.
pub fn symbol_uncertainty(batch: &SampleBatch, c: &Constellation, params: &ChannelParams) -> Result<SymbolUncertainty> {
    check_model(c, params)?;
    let indices = batch.symbol_indices(c)?;
    let log_p = log_pmf(params);
    let offending: Vec<usize> = indices
        .iter()
        .enumerate()
        .filter(|(_, &k)| !log_p[k].is_finite())
        .map(|(i, _)| i)
        .collect();
    if !offending.is_empty() {
        return Ok(SymbolUncertainty {
            s_opt: f64::NAN,
            u_s: f64::INFINITY,
            zero_probability_samples: offending,
        });
    }
    // metrics relative to the transmitted point's metric, support only
    let support: Vec<usize> = (0..c.len()).filter(|&k| log_p[k].is_finite()).collect();
    let mut rel = Vec::with_capacity(batch.len() * support.len());
    let mut t = vec![0.0; c.len()];
    for (y, &k) in batch.observations.iter().zip(&indices) {
        log_metrics(*y, c, params, &log_p, &mut t);
        rel.extend(support.iter().map(|&j| t[j] - t[k]));
    }
    let width = support.len();
    let n = batch.len() as f64;
    let objective = |s: f64| {
        rel.par_chunks(width)
            .map(|row| {
                let top = row.iter().fold(f64::NEG_INFINITY, |a, &v| a.max(s * v));
                top + row.iter().map(|&v| (s * v - top).exp()).sum::<f64>().ln()
            })
            .collect::<Vec<f64>>()
            .iter()
            .sum::<f64>()
            / (n * LN_2)
    };
    let (s_opt, u_s) = minimize_nonnegative(objective, S_TOL);
    Ok(SymbolUncertainty {
        s_opt,
        u_s,
        zero_probability_samples: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{simulate, ChannelParams};
    use crate::constellation::SymbolDistribution;

    fn qam(m: u32) -> Constellation {
        Constellation::square_qam(m).unwrap()
    }

    #[test]
    fn noiseless_llr_signs_match_labels() {
        let c = qam(6);
        let params = ChannelParams::new(1.3, 1e-30, SymbolDistribution::uniform(64)).unwrap();
        let ys: Vec<Complex64> = c.points().iter().map(|x| 1.3 * x).collect();
        let batch = SampleBatch::new(ys).unwrap();
        let llrs = compute_llrs(&batch, &c, &params).unwrap();
        for k in 0..64 {
            for j in 0..6 {
                let l = llrs.get(k, j);
                assert_eq!(l > 0.0, c.label_bit(k, j) == 0, "point {k} bit {j}");
                assert_eq!(l.abs(), DEFAULT_CLIP);
            }
        }
    }

    #[test]
    fn qpsk_llrs_match_two_point_form() {
        // 4-QAM: in-phase bit 0 sits at re = -1, so l = ((y_r - 1)^2 - (y_r + 1)^2)/σ² = -4 y_r/σ²
        let c = qam(2);
        let sigma2 = 0.8;
        let params = ChannelParams::new(1.0, sigma2, SymbolDistribution::uniform(4)).unwrap();
        let ys = vec![
            Complex64::new(0.3, -0.7),
            Complex64::new(-1.1, 0.2),
            Complex64::new(2.0, 1.5),
        ];
        let llrs = compute_llrs(&SampleBatch::new(ys.clone()).unwrap(), &c, &params).unwrap();
        for (i, y) in ys.iter().enumerate() {
            let two_point = |v: f64| {
                let a = (-(v + 1.0).powi(2) / sigma2).exp();
                let b = (-(v - 1.0).powi(2) / sigma2).exp();
                (a / b).ln()
            };
            assert!((llrs.get(i, 0) - two_point(y.re)).abs() < 1e-12);
            assert!((llrs.get(i, 0) + 4.0 * y.re / sigma2).abs() < 1e-12);
            assert!((llrs.get(i, 1) - two_point(y.im)).abs() < 1e-12);
        }
    }

    #[test]
    fn one_sided_support_saturates() {
        let c = qam(2);
        // only points whose first bit is 0
        let d = SymbolDistribution::uniform_on(4, &[0, 1]).unwrap();
        let params = ChannelParams::new(1.0, 1.0, d).unwrap();
        let llrs = compute_llrs(&SampleBatch::new(vec![Complex64::new(3.0, 0.0)]).unwrap(), &c, &params).unwrap();
        assert_eq!(llrs.get(0, 0), DEFAULT_CLIP);
        assert!(llrs.get(0, 1).abs() < DEFAULT_CLIP);
    }

    #[test]
    fn mismatched_model_rejected() {
        let c = qam(4);
        let params = ChannelParams::new(1.0, 1.0, SymbolDistribution::uniform(64)).unwrap();
        let batch = SampleBatch::new(vec![Complex64::new(0.0, 0.0)]).unwrap();
        assert!(matches!(compute_llrs(&batch, &c, &params), Err(Error::InvalidModel(_))));
    }

    #[test]
    fn zero_exponent_gives_m_bits() {
        let llrs = LlrFrame::new(vec![1.0, -3.0, 20.0, 0.5, -7.0, 2.0], 3, 50.0).unwrap();
        let bits = BitMatrix::new(vec![0, 1, 1, 0, 0, 1], 3).unwrap();
        assert_eq!(bit_uncertainty(&llrs, &bits, 0.0).unwrap(), 3.0);
    }

    #[test]
    fn confident_correct_llrs_give_no_uncertainty() {
        let llrs = LlrFrame::new(vec![50.0; 8], 2, 50.0).unwrap();
        let bits = BitMatrix::new(vec![0; 8], 2).unwrap();
        assert!(bit_uncertainty(&llrs, &bits, 1.0).unwrap() < 1e-20);
    }

    #[test]
    fn matches_unsimplified_expression() {
        let l = [0.7, -2.3, 4.1, 0.05, -0.9, 3.3];
        let b = [0u8, 1, 1, 0, 1, 0];
        let llrs = LlrFrame::new(l.to_vec(), 2, 50.0).unwrap();
        let bits = BitMatrix::new(b.to_vec(), 2).unwrap();
        for s in [0.3, 1.0, 1.7] {
            let direct: f64 = l
                .iter()
                .zip(&b)
                .map(|(&l, &b)| {
                    let num = ((1.0 - 2.0 * b as f64) * l * s / 2.0).exp();
                    let den = (-l * s / 2.0).exp() + (l * s / 2.0).exp();
                    -(num / den).log2()
                })
                .sum::<f64>()
                / 3.0;
            assert!((bit_uncertainty(&llrs, &bits, s).unwrap() - direct).abs() < 1e-12);
        }
    }

    #[test]
    fn all_zero_llrs_are_uninformative() {
        let llrs = LlrFrame::new(vec![0.0; 40], 4, 50.0).unwrap();
        let bits = BitMatrix::new((0..40).map(|i| (i % 3 == 0) as u8).collect(), 4).unwrap();
        let (_, u) = minimize_over_s(&llrs, &bits).unwrap();
        assert_eq!(u, 4.0);
        let report = evaluate_llrs(&llrs, &bits, 4.0).unwrap();
        assert_eq!(report.r_abc, 0.0);
        assert_eq!(report.r_a, 0.0);
    }

    #[test]
    fn uncertainty_at_zero_exponent_is_exactly_m() {
        let c = qam(6);
        let params = ChannelParams::from_snr_db(&c, 1.0, 12.0, SymbolDistribution::uniform(64)).unwrap();
        for n in [1, 7, 1000, 20_000] {
            let batch = simulate(&c, &params, n, n as u64).unwrap();
            let llrs = compute_llrs(&batch, &c, &params).unwrap();
            let bits = BitMatrix::from_indices(&c, &batch.symbol_indices(&c).unwrap());
            assert_eq!(bit_uncertainty(&llrs, &bits, 0.0).unwrap(), 6.0);
            assert!(per_bit_uncertainty(&llrs, &bits, 0.0).unwrap().iter().all(|&u| u == 1.0));
        }
    }

    #[test]
    fn scaling_llrs_rescales_s() {
        let c = qam(4);
        let params = ChannelParams::from_snr_db(&c, 1.0, 10.0, SymbolDistribution::uniform(16)).unwrap();
        let batch = simulate(&c, &params, 5000, 8).unwrap();
        let llrs = compute_llrs(&batch, &c, &params).unwrap();
        let bits = BitMatrix::from_indices(&c, &batch.symbol_indices(&c).unwrap());
        let (s1, u1) = minimize_over_s(&llrs, &bits).unwrap();
        let (s2, u2) = minimize_over_s(&llrs.scaled(2.0).unwrap(), &bits).unwrap();
        assert!((s2 - s1 / 2.0).abs() < 1e-4, "{s1} {s2}");
        assert!((u1 - u2).abs() < 1e-4);
        assert!(u1 <= bit_uncertainty(&llrs, &bits, 1.0).unwrap() + 1e-9);
    }

    #[test]
    fn noiseless_evaluation_is_perfect() {
        let c = qam(6);
        let params = ChannelParams::new(1.0, 1e-30, SymbolDistribution::uniform(64)).unwrap();
        let batch = simulate(&c, &params, 2000, 4).unwrap();
        let r = evaluate(&batch, &c, &params).unwrap();
        assert!(r.u_s < 1e-9);
        assert!((r.r_abc - 1.0).abs() < 1e-9);
        assert!((r.r_a - 6.0).abs() < 1e-9);
        let sym = symbol_uncertainty(&batch, &c, &params).unwrap();
        assert!(sym.u_s < 1e-9);
    }

    #[test]
    fn report_identities_hold_exactly() {
        let c = qam(4);
        let params = ChannelParams::from_snr_db(&c, 1.0, 8.0, SymbolDistribution::uniform(16)).unwrap();
        let batch = simulate(&c, &params, 3000, 2).unwrap();
        let r = evaluate(&batch, &c, &params).unwrap();
        assert_eq!(r.r_abc, 1.0 - r.u_s / 4.0);
        assert_eq!(r.r_a, (r.h_x - r.u_s).max(0.0));
        assert!((r.per_bit_uncertainty.iter().sum::<f64>() - r.u_s).abs() < 1e-9);
    }

    #[test]
    fn single_point_support_has_no_symbol_uncertainty() {
        let c = qam(4);
        let d = SymbolDistribution::one_hot(16, 5).unwrap();
        let params = ChannelParams::new(1.0, 2.0, d).unwrap();
        let batch = simulate(&c, &params, 100, 1).unwrap();
        let sym = symbol_uncertainty(&batch, &c, &params).unwrap();
        assert_eq!(sym.u_s, 0.0);
    }

    #[test]
    fn zero_probability_transmission_is_flagged() {
        let c = qam(2);
        let truth = ChannelParams::new(1.0, 0.5, SymbolDistribution::uniform(4)).unwrap();
        let batch = simulate(&c, &truth, 50, 3).unwrap();
        let model = ChannelParams::new(1.0, 0.5, SymbolDistribution::uniform_on(4, &[0, 1, 2]).unwrap()).unwrap();
        let sym = symbol_uncertainty(&batch, &c, &model).unwrap();
        assert_eq!(sym.u_s, f64::INFINITY);
        let idx = batch.symbol_indices(&c).unwrap();
        let expect: Vec<usize> = (0..50).filter(|&i| idx[i] == 3).collect();
        assert!(!expect.is_empty());
        assert_eq!(sym.zero_probability_samples, expect);
    }

    #[test]
    fn symbol_metric_beats_bit_metric() {
        let c = qam(2);
        let params = ChannelParams::from_snr_db(&c, 1.0, 8.0, SymbolDistribution::uniform(4)).unwrap();
        let batch = simulate(&c, &params, 20_000, 6).unwrap();
        let bitwise = evaluate(&batch, &c, &params).unwrap();
        let sym = symbol_uncertainty(&batch, &c, &params).unwrap();
        assert!(sym.u_s <= bitwise.u_s + 1e-6, "{} vs {}", sym.u_s, bitwise.u_s);
    }

    #[test]
    fn llr_frame_validation() {
        assert!(LlrFrame::new(vec![1.0, 2.0, 3.0], 2, 50.0).is_err());
        assert!(LlrFrame::new(vec![60.0, 2.0], 2, 50.0).is_err());
        assert!(LlrFrame::new(vec![f64::NAN, 2.0], 2, 50.0).is_err());
        assert!(BitMatrix::new(vec![0, 2], 2).is_err());
    }
}

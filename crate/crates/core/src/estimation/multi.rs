//! Multi-start EM over several K-Means cluster counts.

use rayon::prelude::*;

use crate::channel::SampleBatch;
use crate::constellation::Constellation;
use crate::error::{invalid, Error, Result};
use crate::metrics::{self, MetricReport};

use super::em::{em_fit, EmConfig, EmInit, EmResult, COLLAPSE_RATIO};

/// Cluster counts tried by default on 64-QAM.
pub const DEFAULT_KS: [usize; 4] = [4, 16, 36, 64];

/// Branch scores closer than this to the best one count as equal, and the
/// smallest such `k` is chosen. Matches the resolution of the s-search.
pub const SELECTION_TIE_TOL: f64 = 1e-4;

/// What the branches were ranked by (lower is better).
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SelectionScore {
    /// Bit-metric uncertainty `u_s` in bits, when transmitted symbols are known.
    Uncertainty(f64),
    /// `-L(θ)/n` in nats, when only observations are available.
    NegLogLikelihood(f64),
}

impl SelectionScore {
    pub fn value(&self) -> f64 {
        match *self {
            SelectionScore::Uncertainty(v) | SelectionScore::NegLogLikelihood(v) => v,
        }
    }
}

#[derive(Clone, Debug)]
pub struct BranchOutcome {
    pub k: usize,
    pub result: std::result::Result<EmResult, String>,
    pub score: Option<SelectionScore>,
    /// Metric report of the branch's parameters, when symbols were available.
    pub report: Option<MetricReport>,
}

#[derive(Clone, Debug)]
pub struct MultiStartResult {
    pub best: EmResult,
    pub chosen_k: usize,
    pub score: SelectionScore,
    pub report: Option<MetricReport>,
    pub branches: Vec<BranchOutcome>,
}

fn run_branch(batch: &SampleBatch, c: &Constellation, k: usize, config: &EmConfig) -> BranchOutcome {
    let cfg = EmConfig {
        init: EmInit::KMeans(k),
        ..config.clone()
    };
    let scored = em_fit(batch, c, &cfg).and_then(|r| {
        if r.params.sigma2() < COLLAPSE_RATIO * batch.mean_power() {
            return Err(Error::NumericDegeneracy(
                r.diagnostic.clone().unwrap_or_else(|| "collapsed".into()),
            ));
        }
        if batch.symbols.is_some() {
            let report = metrics::evaluate(batch, c, &r.params)?;
            Ok((r, SelectionScore::Uncertainty(report.u_s), Some(report)))
        } else {
            let ll = r.log_likelihood_trace.last().copied().unwrap_or(f64::NAN);
            Ok((r, SelectionScore::NegLogLikelihood(-ll / batch.len() as f64), None))
        }
    });
    match scored {
        Ok((r, score, report)) => BranchOutcome {
            k,
            result: Ok(r),
            score: Some(score),
            report,
        },
        Err(e) => BranchOutcome {
            k,
            result: Err(e.to_string()),
            score: None,
            report: None,
        },
    }
}

/// Runs EM once per cluster count in `ks` and keeps the parameter set with the
/// lowest score: the bit-metric uncertainty when the batch carries the
/// transmitted symbols, otherwise the negative log-likelihood per sample.
/// Scores within [`SELECTION_TIE_TOL`] of the best go to the smallest `k`.
pub fn multi_init_em(batch: &SampleBatch, c: &Constellation, ks: &[usize], config: &EmConfig) -> Result<MultiStartResult> {
    if ks.is_empty() {
        return Err(invalid("at least one cluster count is required"));
    }
    config.validate()?;
    let branches: Vec<BranchOutcome> = ks.par_iter().map(|&k| run_branch(batch, c, k, config)).collect();
    let best_value = branches
        .iter()
        .filter_map(|b| b.score.map(|s| s.value()))
        .fold(f64::INFINITY, f64::min);
    let chosen = branches
        .iter()
        .filter(|b| b.score.is_some_and(|s| s.value() <= best_value + SELECTION_TIE_TOL))
        .min_by_key(|b| b.k)
        .ok_or_else(|| {
            let reasons: Vec<String> = branches
                .iter()
                .map(|b| format!("k={}: {}", b.k, b.result.as_ref().err().map_or("unscored", |e| e.as_str())))
                .collect();
            Error::NumericDegeneracy(format!("every EM branch failed ({})", reasons.join("; ")))
        })?;
    let best = chosen.result.clone().expect("scored branches hold results");
    Ok(MultiStartResult {
        chosen_k: chosen.k,
        score: chosen.score.expect("filtered on score"),
        report: chosen.report.clone(),
        best,
        branches: branches.clone(),
    })
}

//! DA-versus-EM sweeps over shaping modes, SNR points and seeds.
//!
//! Every cell simulates its own batch, fits the data-aided reference and the
//! multi-start EM estimate, and scores both on the transmitted symbols.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{simulate, ChannelParams};
use crate::error::{invalid, Result};
use crate::estimation::{da_fit, multi_init_em, EmConfig, MultiStartResult};
use crate::metrics::{evaluate, MetricReport};
use crate::modes::{preset, ShapingMode};

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub modes: Vec<String>,
    /// Strictly increasing.
    pub snr_db: Vec<f64>,
    pub seeds: Vec<u64>,
    pub n: usize,
    pub ks: Vec<usize>,
    pub em: EmConfig,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<Vec<ShapingMode>> {
        if self.n == 0 {
            return Err(invalid("n must be at least 1"));
        }
        if self.snr_db.is_empty() || self.seeds.is_empty() || self.modes.is_empty() {
            return Err(invalid("a sweep needs at least one mode, SNR point and seed"));
        }
        if self.snr_db.iter().any(|s| !s.is_finite()) || self.snr_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("the SNR grid must be finite and strictly increasing"));
        }
        if self.ks.is_empty() {
            return Err(invalid("at least one cluster count is required"));
        }
        self.em.validate()?;
        self.modes.iter().map(|m| preset(m)).collect()
    }
}

/// Everything produced for one `(mode, snr, seed)` cell.
#[derive(Clone, Debug)]
pub struct CellResult {
    pub mode: String,
    pub snr_db: f64,
    pub seed: u64,
    pub truth: ChannelParams,
    pub da: MetricReport,
    pub em: MetricReport,
    pub multi: MultiStartResult,
}

/// One line of the sweep table; metric fields are empty when the cell failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub mode: String,
    pub snr_db: f64,
    pub seed: u64,
    pub r_a_da: Option<f64>,
    pub r_a_em: Option<f64>,
    pub r_abc_da: Option<f64>,
    pub r_abc_em: Option<f64>,
    pub em_iters: Option<usize>,
    pub chosen_k: Option<usize>,
    pub error: Option<String>,
}

impl CellResult {
    pub fn row(&self) -> SweepRow {
        SweepRow {
            mode: self.mode.clone(),
            snr_db: self.snr_db,
            seed: self.seed,
            r_a_da: Some(self.da.r_a),
            r_a_em: Some(self.em.r_a),
            r_abc_da: Some(self.da.r_abc),
            r_abc_em: Some(self.em.r_abc),
            em_iters: Some(self.multi.best.iterations_used),
            chosen_k: Some(self.multi.chosen_k),
            error: None,
        }
    }
}

/// Simulates one cell and scores the DA and EM estimates on it.
pub fn run_cell(mode: &ShapingMode, snr_db: f64, seed: u64, n: usize, ks: &[usize], em: &EmConfig) -> Result<CellResult> {
    let c = mode.constellation()?;
    let truth = ChannelParams::from_snr_db(&c, 1.0, snr_db, mode.distribution(&c)?)?;
    let batch = simulate(&c, &truth, n, seed)?;
    let da_params = da_fit(&batch, &c)?;
    let da = evaluate(&batch, &c, &da_params)?;
    let multi = multi_init_em(&batch, &c, ks, em)?;
    let em_report = match &multi.report {
        Some(r) => r.clone(),
        None => evaluate(&batch, &c, &multi.best.params)?,
    };
    Ok(CellResult {
        mode: mode.name.to_string(),
        snr_db,
        seed,
        truth,
        da,
        em: em_report,
        multi,
    })
}

/// Runs every cell, in parallel, and returns the rows sorted by mode (in
/// configured order), SNR and seed. Failed cells become rows with an
/// error tag.
pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<SweepRow>> {
    let modes = cfg.validate()?;
    let cells: Vec<(usize, usize, u64)> = (0..modes.len())
        .flat_map(|m| (0..cfg.snr_db.len()).flat_map(move |s| cfg.seeds.iter().map(move |&seed| (m, s, seed))))
        .collect();
    let mut rows: Vec<((usize, usize, u64), SweepRow)> = cells
        .par_iter()
        .map(|&(m, s, seed)| {
            let mode = &modes[m];
            let snr_db = cfg.snr_db[s];
            let row = match run_cell(mode, snr_db, seed, cfg.n, &cfg.ks, &cfg.em) {
                Ok(cell) => cell.row(),
                Err(e) => SweepRow {
                    mode: mode.name.to_string(),
                    snr_db,
                    seed,
                    r_a_da: None,
                    r_a_em: None,
                    r_abc_da: None,
                    r_abc_em: None,
                    em_iters: None,
                    chosen_k: None,
                    error: Some(e.to_string()),
                },
            };
            ((m, s, seed), row)
        })
        .collect();
    rows.sort_by_key(|(key, _)| *key);
    Ok(rows.into_iter().map(|(_, r)| r).collect())
}

/// Per-`(mode, snr)` means over the successful rows of a sweep.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    pub mode: String,
    pub snr_db: f64,
    pub runs: usize,
    pub failures: usize,
    pub mean_r_a_da: Option<f64>,
    pub mean_r_a_em: Option<f64>,
    pub mean_r_abc_da: Option<f64>,
    pub mean_r_abc_em: Option<f64>,
    /// `|mean r_a_em - mean r_a_da|`.
    pub abs_diff_r_a: Option<f64>,
    pub mean_em_iters: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

/// Aggregates rows that are grouped by `(mode, snr)`, as [`run_sweep`]
/// returns them.
pub fn aggregate(rows: &[SweepRow]) -> Vec<CellSummary> {
    rows.chunk_by(|a, b| a.mode == b.mode && a.snr_db == b.snr_db)
        .map(|group| {
            let ok: Vec<&SweepRow> = group.iter().filter(|r| r.error.is_none()).collect();
            let mean_of = |f: fn(&SweepRow) -> Option<f64>| mean(ok.iter().filter_map(|r| f(r)));
            let mean_r_a_da = mean_of(|r| r.r_a_da);
            let mean_r_a_em = mean_of(|r| r.r_a_em);
            CellSummary {
                mode: group[0].mode.clone(),
                snr_db: group[0].snr_db,
                runs: ok.len(),
                failures: group.len() - ok.len(),
                mean_r_a_da,
                mean_r_a_em,
                mean_r_abc_da: mean_of(|r| r.r_abc_da),
                mean_r_abc_em: mean_of(|r| r.r_abc_em),
                abs_diff_r_a: mean_r_a_em.zip(mean_r_a_da).map(|(e, d)| (e - d).abs()),
                mean_em_iters: mean_of(|r| r.em_iters.map(|i| i as f64)),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(modes: &[&str], snr: &[f64], seeds: &[u64]) -> SweepConfig {
        SweepConfig {
            modes: modes.iter().map(|s| s.to_string()).collect(),
            snr_db: snr.to_vec(),
            seeds: seeds.to_vec(),
            n: 2000,
            ks: vec![36, 64],
            em: EmConfig {
                max_iters: 20,
                ..EmConfig::default()
            },
        }
    }

    #[test]
    fn validation() {
        assert!(small(&["mode1"], &[10.0, 10.0], &[0]).validate().is_err());
        assert!(small(&["mode9"], &[10.0], &[0]).validate().is_err());
        assert!(small(&["mode1"], &[], &[0]).validate().is_err());
        let mut cfg = small(&["mode1"], &[10.0], &[0]);
        cfg.n = 0;
        assert!(cfg.validate().is_err());
        assert!(small(&["mode1", "mode4"], &[8.0, 12.0], &[0]).validate().is_ok());
    }

    #[test]
    fn rows_are_ordered_and_aggregated() {
        let cfg = small(&["mode4", "mode1"], &[12.0, 16.0], &[3, 1]);
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 8);
        let keys: Vec<(&str, f64, u64)> = rows.iter().map(|r| (r.mode.as_str(), r.snr_db, r.seed)).collect();
        assert_eq!(keys[0], ("mode4", 12.0, 1));
        assert_eq!(keys[1], ("mode4", 12.0, 3));
        assert_eq!(keys[4], ("mode1", 12.0, 1));
        assert!(rows.iter().all(|r| r.error.is_none()));
        let summary = aggregate(&rows);
        assert_eq!(summary.len(), 4);
        assert!(summary.iter().all(|s| s.runs == 2 && s.failures == 0));
        let expect = (rows[0].r_a_em.unwrap() + rows[1].r_a_em.unwrap()) / 2.0;
        assert_eq!(summary[0].mean_r_a_em, Some(expect));
    }

    #[test]
    fn failed_cells_are_tagged() {
        let mut cfg = small(&["mode1"], &[10.0], &[0]);
        cfg.ks = vec![9];
        let rows = run_sweep(&cfg).unwrap();
        assert_eq!(rows.len(), 1);
        assert!(rows[0].error.as_deref().unwrap().contains("every EM branch failed"));
        let summary = aggregate(&rows);
        assert_eq!((summary[0].runs, summary[0].failures), (0, 1));
        assert_eq!(summary[0].mean_r_a_em, None);
    }
}

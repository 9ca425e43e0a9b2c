//! Subcommand implementations and the mapping from errors to exit codes.

use std::fmt;
use std::path::{Path, PathBuf};

use pasem::channel::simulate as simulate_batch;
use pasem::estimation::{da_fit, multi_init_em, DistributionMode, EmConfig, EmInit};
use pasem::io::{self, EmReport, ParamsRecord, SampleFormat, Sidecar};
use pasem::metrics::evaluate as evaluate_params;
use pasem::modes::preset;
use pasem::sweep::{aggregate, run_sweep, SweepConfig};
use pasem::{ChannelParams, Constellation, Error, SampleBatch, SymbolDistribution};

use crate::{DataArgs, DistModeArg, EstimateArgs, EvaluateArgs, FormatArg, MethodArg, SimulateArgs, SweepArgs};

pub const EXIT_VALIDATION: u8 = 2;
pub const EXIT_IO: u8 = 3;
pub const EXIT_NUMERIC: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    fn validation(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_VALIDATION,
            message: message.into(),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::InvalidArgument(_) | Error::OutOfRange { .. } | Error::InvalidModel(_) => EXIT_VALIDATION,
            Error::NumericDegeneracy(_) => EXIT_NUMERIC,
            Error::Format(_) | Error::Io(_) | Error::Json(_) => EXIT_IO,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        Self {
            code: EXIT_IO,
            message: e.to_string(),
        }
    }
}

/// Attaches the offending path to I/O and parse failures.
fn at(path: &Path) -> impl FnOnce(Error) -> CliError + '_ {
    move |e| {
        let mut err = CliError::from(e);
        if err.code == EXIT_IO {
            err.message = format!("{}: {}", path.display(), err.message);
        }
        err
    }
}

type CliResult = Result<Summary, CliError>;

/// One-line report printed on success.
pub struct Summary(String);

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

fn sample_format(path: &Path, explicit: Option<FormatArg>) -> Result<SampleFormat, CliError> {
    match explicit {
        Some(FormatArg::Bin) => Ok(SampleFormat::Binary),
        Some(FormatArg::Csv) => Ok(SampleFormat::Csv),
        None => Ok(SampleFormat::from_path(path)?),
    }
}

/// `dir/stem.ext` to `dir/stem<suffix>`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}"))
}

pub fn simulate(a: SimulateArgs) -> CliResult {
    let (c, dist) = match &a.mode {
        Some(name) => {
            let mode = preset(name)?;
            if a.m.is_some_and(|m| m != mode.m) {
                return Err(CliError::validation(format!("{name} is defined on m = {}", mode.m)));
            }
            let c = mode.constellation()?;
            let dist = mode.distribution(&c)?;
            (c, dist)
        }
        None => {
            let c = Constellation::square_qam(a.m.unwrap_or(6))?;
            let dist = match (&a.pmf, a.nu) {
                (Some(pmf), _) => {
                    if pmf.len() != c.len() {
                        return Err(CliError::validation(format!(
                            "pmf has {} entries but the constellation has {} points",
                            pmf.len(),
                            c.len()
                        )));
                    }
                    SymbolDistribution::from_pmf(pmf)?
                }
                (None, Some(nu)) => SymbolDistribution::maxwell_boltzmann(&c, nu)?,
                (None, None) => SymbolDistribution::uniform(c.len()),
            };
            (c, dist)
        }
    };
    let params = match (a.sigma2, a.snr_db) {
        (Some(sigma2), _) => ChannelParams::new(a.delta, sigma2, dist)?,
        (None, Some(snr)) => ChannelParams::from_snr_db(&c, a.delta, snr, dist)?,
        (None, None) => return Err(CliError::validation("either --sigma2 or --snr-db is required")),
    };
    if a.n == 0 {
        return Err(CliError::validation("n must be at least 1"));
    }
    let format = sample_format(&a.out, a.format)?;
    let symbols_path = a
        .symbols
        .unwrap_or_else(|| sibling(&a.out, &format!(".sym.{}", format.extension())));
    let sidecar_path = a.params.unwrap_or_else(|| sibling(&a.out, ".json"));

    let batch = simulate_batch(&c, &params, a.n, a.seed)?;
    let symbols = batch.symbols.as_deref().expect("simulated batches carry symbols");
    io::write_samples(&a.out, &batch.observations, format).map_err(at(&a.out))?;
    io::write_samples(&symbols_path, symbols, format).map_err(at(&symbols_path))?;
    let sidecar = Sidecar {
        n: a.n,
        seed: a.seed,
        constellation: io::ConstellationRef {
            m: c.bits_per_symbol() as u32,
        },
        params: ParamsRecord::from_params(&params),
    };
    io::write_json(&sidecar_path, &sidecar).map_err(at(&sidecar_path))?;
    Ok(Summary(format!(
        "wrote {} samples to {}, symbols to {}, sidecar to {} (snr {:.3} dB, H(X) {:.4} bits)",
        a.n,
        a.out.display(),
        symbols_path.display(),
        sidecar_path.display(),
        params.snr_db(&c),
        params.dist().entropy()
    )))
}

/// Constellation of the data: `--m`, else the sidecar's, else 64-QAM.
fn data_constellation(d: &DataArgs) -> Result<Constellation, CliError> {
    let from_sidecar = match &d.sidecar {
        Some(path) => Some(io::read_json::<Sidecar>(path).map_err(at(path))?.constellation.m),
        None => None,
    };
    let m = match (d.m, from_sidecar) {
        (Some(m), Some(s)) if m != s => {
            return Err(CliError::validation(format!("--m {m} contradicts the sidecar's m = {s}")))
        }
        (Some(m), _) | (None, Some(m)) => m,
        (None, None) => 6,
    };
    Ok(Constellation::square_qam(m)?)
}

fn load_batch(d: &DataArgs) -> Result<SampleBatch, CliError> {
    let obs_format = sample_format(&d.input, d.format)?;
    let observations = io::read_samples(&d.input, obs_format).map_err(at(&d.input))?;
    match &d.symbols {
        Some(path) => {
            let symbols = io::read_samples(path, sample_format(path, d.format)?).map_err(at(path))?;
            if symbols.len() != observations.len() {
                return Err(CliError::validation(format!(
                    "{} holds {} symbols but {} holds {} observations",
                    path.display(),
                    symbols.len(),
                    d.input.display(),
                    observations.len()
                )));
            }
            Ok(SampleBatch::with_symbols(symbols, observations)?)
        }
        None => Ok(SampleBatch::new(observations)?),
    }
}

pub fn estimate(a: EstimateArgs) -> CliResult {
    if a.method == MethodArg::Da && a.data.symbols.is_none() {
        return Err(CliError::validation("data-aided estimation requires transmitted symbols"));
    }
    let c = data_constellation(&a.data)?;
    let batch = load_batch(&a.data)?;
    match a.method {
        MethodArg::Da => {
            let params = da_fit(&batch, &c)?;
            io::write_json(&a.out, &ParamsRecord::from_params(&params)).map_err(at(&a.out))?;
            Ok(Summary(format!(
                "da: delta={:.6} sigma2={:.6} H(X)={:.4} bits",
                params.delta(),
                params.sigma2(),
                params.dist().entropy()
            )))
        }
        MethodArg::Em => {
            let config = EmConfig {
                max_iters: a.em_max_iters,
                ll_rel_tol: a.em_tol,
                distribution_mode: match a.mode {
                    DistModeArg::General => DistributionMode::GeneralPmf,
                    DistModeArg::Mb => DistributionMode::MaxwellBoltzmann,
                },
                prob_floor: a.prob_floor,
                init: EmInit::KMeans(c.len()),
            };
            let multi = multi_init_em(&batch, &c, &a.ks, &config)?;
            let report = EmReport::from_result(&multi.best, Some(multi.chosen_k));
            io::write_json(&a.out, &report).map_err(at(&a.out))?;
            let p = &multi.best.params;
            Ok(Summary(format!(
                "em: delta={:.6} sigma2={:.6} H(X)={:.4} bits iterations={} converged={} chosen_k={}",
                p.delta(),
                p.sigma2(),
                p.dist().entropy(),
                multi.best.iterations_used,
                multi.best.converged,
                multi.chosen_k
            )))
        }
    }
}

pub fn evaluate(a: EvaluateArgs) -> CliResult {
    if a.data.symbols.is_none() {
        return Err(CliError::validation("evaluation requires transmitted symbols (--symbols)"));
    }
    let c = data_constellation(&a.data)?;
    let (record, params_m) = io::read_params_any(&a.params).map_err(at(&a.params))?;
    if let Some(pm) = params_m {
        if pm as usize != c.bits_per_symbol() {
            return Err(CliError::validation(format!(
                "parameters are for {}-QAM but the data uses {}-QAM",
                1u64 << pm,
                c.len()
            )));
        }
    }
    let params = record.to_params(&c)?;
    let batch = load_batch(&a.data)?;
    let report = evaluate_params(&batch, &c, &params)?;
    io::write_json(&a.out, &report).map_err(at(&a.out))?;
    Ok(Summary(format!(
        "u_s={:.6} bits r_abc={:.6} r_a={:.6} bits/cu (s={:.4}, H(X)={:.4})",
        report.u_s, report.r_abc, report.r_a, report.s_opt, report.h_x
    )))
}

pub fn sweep(a: SweepArgs) -> CliResult {
    let cfg = SweepConfig {
        modes: a.mode.clone(),
        snr_db: a.snr_db.clone(),
        seeds: (a.seed..a.seed.saturating_add(a.seeds)).collect(),
        n: a.n,
        ks: a.ks.clone(),
        em: EmConfig {
            max_iters: a.em_max_iters,
            ll_rel_tol: a.em_tol,
            ..EmConfig::default()
        },
    };
    let rows = run_sweep(&cfg)?;
    let summary = aggregate(&rows);
    let aggregate_path = a.aggregate.unwrap_or_else(|| sibling(&a.out, ".aggregate.csv"));

    let mut w = csv::Writer::from_path(&a.out)?;
    for row in &rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| at(&a.out)(e.into()))?;
    let mut w = csv::Writer::from_path(&aggregate_path)?;
    for cell in &summary {
        w.serialize(cell)?;
    }
    w.flush().map_err(|e| at(&aggregate_path)(e.into()))?;

    let failures = rows.iter().filter(|r| r.error.is_some()).count();
    let line = format!(
        "{} rows ({} failed) in {}, {} cells in {}",
        rows.len(),
        failures,
        a.out.display(),
        summary.len(),
        aggregate_path.display()
    );
    if failures == rows.len() {
        return Err(CliError {
            code: EXIT_NUMERIC,
            message: format!("every sweep cell failed; {line}"),
        });
    }
    Ok(Summary(line))
}

//! Sample files and JSON reports.
//!
//! Samples are stored either as headerless little-endian `f32` pairs
//! `(re, im)` or as CSV lines `re,im` with nine significant digits. The format
//! follows the file extension (`.bin` or `.csv`) unless given explicitly.

use std::fs;
use std::path::Path;

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::channel::ChannelParams;
use crate::constellation::{Constellation, DistributionKind, SymbolDistribution};
use crate::error::{invalid, Error, Result};
use crate::estimation::EmResult;

/// Significant digits written per CSV value.
pub const CSV_SIGNIFICANT_DIGITS: usize = 9;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SampleFormat {
    Binary,
    Csv,
}

impl SampleFormat {
    /// Format named by the file extension.
    pub fn from_path(path: &Path) -> Result<Self> {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) => Self::parse(ext),
            None => Err(invalid(format!(
                "cannot infer the sample format of {}: use a .bin or .csv extension",
                path.display()
            ))),
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "bin" | "binary" => Ok(Self::Binary),
            "csv" => Ok(Self::Csv),
            other => Err(invalid(format!("unknown sample format '{other}' (expected bin or csv)"))),
        }
    }

    pub fn extension(&self) -> &'static str {
        match self {
            Self::Binary => "bin",
            Self::Csv => "csv",
        }
    }
}

pub fn encode_binary(samples: &[Complex64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(samples.len() * 8);
    for z in samples {
        out.extend_from_slice(&(z.re as f32).to_le_bytes());
        out.extend_from_slice(&(z.im as f32).to_le_bytes());
    }
    out
}

pub fn decode_binary(bytes: &[u8]) -> Result<Vec<Complex64>> {
    if bytes.len() % 8 != 0 {
        return Err(Error::Format(format!(
            "binary sample file holds {} bytes, not a multiple of 8",
            bytes.len()
        )));
    }
    let value = |b: &[u8]| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64;
    bytes
        .chunks_exact(8)
        .enumerate()
        .map(|(i, c)| {
            let z = Complex64::new(value(&c[..4]), value(&c[4..]));
            if z.re.is_finite() && z.im.is_finite() {
                Ok(z)
            } else {
                Err(Error::Format(format!("sample {i} is not finite")))
            }
        })
        .collect()
}

/// Shortest decimal form of `v` rounded to [`CSV_SIGNIFICANT_DIGITS`].
fn csv_value(v: f64) -> String {
    let rounded: f64 = format!("{:.*e}", CSV_SIGNIFICANT_DIGITS - 1, v)
        .parse()
        .expect("formatted float parses");
    format!("{rounded}")
}

pub fn encode_csv(samples: &[Complex64]) -> String {
    let mut out = String::with_capacity(samples.len() * 24);
    for z in samples {
        out.push_str(&csv_value(z.re));
        out.push(',');
        out.push_str(&csv_value(z.im));
        out.push('\n');
    }
    out
}

pub fn decode_csv(text: &str) -> Result<Vec<Complex64>> {
    let mut samples = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let bad = || Error::Format(format!("line {}: expected 're,im', got '{line}'", line_no + 1));
        let (re, im) = line.split_once(',').ok_or_else(bad)?;
        let re: f64 = re.trim().parse().map_err(|_| bad())?;
        let im: f64 = im.trim().parse().map_err(|_| bad())?;
        if !(re.is_finite() && im.is_finite()) {
            return Err(bad());
        }
        samples.push(Complex64::new(re, im));
    }
    Ok(samples)
}

pub fn write_samples(path: &Path, samples: &[Complex64], format: SampleFormat) -> Result<()> {
    match format {
        SampleFormat::Binary => fs::write(path, encode_binary(samples))?,
        SampleFormat::Csv => fs::write(path, encode_csv(samples))?,
    }
    Ok(())
}

pub fn read_samples(path: &Path, format: SampleFormat) -> Result<Vec<Complex64>> {
    let samples = match format {
        SampleFormat::Binary => decode_binary(&fs::read(path)?)?,
        SampleFormat::Csv => decode_csv(&fs::read_to_string(path)?)?,
    };
    if samples.is_empty() {
        return Err(Error::Format(format!("{} holds no samples", path.display())));
    }
    Ok(samples)
}

/// `θ` as stored in JSON: the pmf, the MB parameter, or both.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub delta: f64,
    pub sigma2: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pmf: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
}

impl ParamsRecord {
    pub fn from_params(params: &ChannelParams) -> Self {
        Self {
            delta: params.delta(),
            sigma2: params.sigma2(),
            pmf: Some(params.dist().pmf().to_vec()),
            nu: params.dist().nu(),
        }
    }

    /// Label width implied by the pmf length, if a pmf is stored.
    pub fn bits_per_symbol(&self) -> Option<u32> {
        let len = self.pmf.as_ref()?.len();
        (len.is_power_of_two() && len > 1).then(|| len.trailing_zeros())
    }

    /// Parameters on `c`; the pmf must have one entry per point.
    pub fn to_params(&self, c: &Constellation) -> Result<ChannelParams> {
        let dist = match (&self.pmf, self.nu) {
            (Some(pmf), _) => {
                if pmf.len() != c.len() {
                    return Err(Error::InvalidModel(format!(
                        "parameters describe {} points but the data uses a {}-point constellation",
                        pmf.len(),
                        c.len()
                    )));
                }
                match self.nu {
                    Some(nu) if pmf_matches_mb(pmf, c, nu) => SymbolDistribution::maxwell_boltzmann(c, nu)?,
                    _ => SymbolDistribution::from_pmf(pmf)?,
                }
            }
            (None, Some(nu)) => SymbolDistribution::maxwell_boltzmann(c, nu)?,
            (None, None) => return Err(invalid("parameters need a pmf or an MB parameter nu")),
        };
        ChannelParams::new(self.delta, self.sigma2, dist)
    }
}

fn pmf_matches_mb(pmf: &[f64], c: &Constellation, nu: f64) -> bool {
    SymbolDistribution::maxwell_boltzmann(c, nu)
        .map(|d| d.pmf().iter().zip(pmf).all(|(a, b)| (a - b).abs() <= 1e-12))
        .unwrap_or(false)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstellationRef {
    /// Bits per label; the constellation is square `2^m`-QAM.
    pub m: u32,
}

/// Ground truth written next to simulated samples.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub n: usize,
    pub seed: u64,
    pub constellation: ConstellationRef,
    pub params: ParamsRecord,
}

/// EM outcome as written by the `estimate` command.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmReport {
    pub delta: f64,
    pub sigma2: f64,
    pub pmf: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nu: Option<f64>,
    pub log_likelihood_trace: Vec<f64>,
    pub iterations_used: usize,
    pub converged: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chosen_k: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub diagnostic: Option<String>,
}

impl EmReport {
    pub fn from_result(result: &EmResult, chosen_k: Option<usize>) -> Self {
        let p = &result.params;
        Self {
            delta: p.delta(),
            sigma2: p.sigma2(),
            pmf: p.dist().pmf().to_vec(),
            nu: match p.dist().kind() {
                DistributionKind::MaxwellBoltzmann { nu } => Some(nu),
                DistributionKind::General => None,
            },
            log_likelihood_trace: result.log_likelihood_trace.clone(),
            iterations_used: result.iterations_used,
            converged: result.converged,
            chosen_k,
            diagnostic: result.diagnostic.clone(),
        }
    }

    pub fn params_record(&self) -> ParamsRecord {
        ParamsRecord {
            delta: self.delta,
            sigma2: self.sigma2,
            pmf: Some(self.pmf.clone()),
            nu: self.nu,
        }
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
}

/// Parameters read from a sidecar, an EM report or a bare parameter record.
///
/// Returns the record and, when the file declares one, the label width of
/// the constellation it was written for.
pub fn read_params_any(path: &Path) -> Result<(ParamsRecord, Option<u32>)> {
    let value: serde_json::Value = read_json(path)?;
    let parse = |v: serde_json::Value| -> Result<ParamsRecord> {
        serde_json::from_value(v).map_err(|e| Error::Format(format!("{}: {e}", path.display())))
    };
    if value.get("params").is_some() {
        let sidecar: Sidecar =
            serde_json::from_value(value).map_err(|e| Error::Format(format!("{}: {e}", path.display())))?;
        return Ok((sidecar.params, Some(sidecar.constellation.m)));
    }
    let record = parse(value)?;
    let m = record.bits_per_symbol();
    Ok((record, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binary_round_trip_is_exact_for_f32_values() {
        let v = vec![Complex64::new(1.5, -0.25), Complex64::new(3.0e-7_f32 as f64, 12345.678_f32 as f64)];
        let bytes = encode_binary(&v);
        assert_eq!(bytes.len(), 16);
        assert_eq!(&bytes[..4], &1.5f32.to_le_bytes());
        assert_eq!(decode_binary(&bytes).unwrap(), v);
    }

    #[test]
    fn binary_rejects_partial_records() {
        assert!(matches!(decode_binary(&[0u8; 12]), Err(Error::Format(_))));
    }

    #[test]
    fn csv_keeps_nine_significant_digits() {
        assert_eq!(csv_value(0.123_456_789_49), "0.123456789");
        assert_eq!(csv_value(-1234.567_890_1), "-1234.56789");
        assert_eq!(csv_value(3.0), "3");
        let v = vec![Complex64::new(std::f64::consts::PI, -std::f64::consts::E)];
        let back = decode_csv(&encode_csv(&v)).unwrap();
        assert!(((back[0] - v[0]) / v[0].norm()).norm() < 1e-8);
    }

    #[test]
    fn csv_parse_errors_name_the_line() {
        let err = decode_csv("1,2\n\n3;4\n").unwrap_err().to_string();
        assert!(err.contains("line 3"), "{err}");
        assert_eq!(decode_csv(" 1 , -2 \n").unwrap(), vec![Complex64::new(1.0, -2.0)]);
    }

    #[test]
    fn format_follows_extension() {
        assert_eq!(SampleFormat::from_path(Path::new("a/b.BIN")).unwrap(), SampleFormat::Binary);
        assert_eq!(SampleFormat::from_path(Path::new("x.csv")).unwrap(), SampleFormat::Csv);
        assert!(SampleFormat::from_path(Path::new("x.txt")).is_err());
        assert!(SampleFormat::from_path(Path::new("noext")).is_err());
    }

    #[test]
    fn params_record_round_trip() {
        let c = Constellation::square_qam(4).unwrap();
        let d = SymbolDistribution::maxwell_boltzmann(&c, 0.1).unwrap();
        let p = ChannelParams::new(0.8, 0.3, d).unwrap();
        let rec = ParamsRecord::from_params(&p);
        let json = serde_json::to_string(&rec).unwrap();
        let back: ParamsRecord = serde_json::from_str(&json).unwrap();
        assert_eq!(back, rec);
        assert_eq!(back.to_params(&c).unwrap(), p);
        assert_eq!(back.bits_per_symbol(), Some(4));
        let c64 = Constellation::square_qam(6).unwrap();
        assert!(matches!(back.to_params(&c64), Err(Error::InvalidModel(_))));
        let nu_only = ParamsRecord {
            pmf: None,
            ..rec.clone()
        };
        assert_eq!(nu_only.to_params(&c).unwrap().dist().nu(), Some(0.1));
    }
}

//! QAM constellations, Gray labeling and symbol distributions.
//!
//! Square constellations live on the unnormalized odd-integer grid
//! `{±1, ±3, …} × {±1, ±3, …}`; the channel gain carries all scaling. Labels
//! are the per-dimension binary reflected Gray code with the in-phase bits
//! first, and points are ordered by their label value so that point `k` of a
//! complete constellation carries label `k`.

use std::collections::HashMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Probabilities below this are treated as exact zeros when a distribution is
/// built from raw numbers.
pub const PROB_EPS: f64 = 1e-12;

fn gray(i: u32) -> u32 {
    i ^ (i >> 1)
}

fn gray_inverse(mut g: u32) -> u32 {
    let mut i = g;
    while g > 0 {
        g >>= 1;
        i ^= g;
    }
    i
}

/// A QAM alphabet together with its binary labeling.
///
/// A constellation is either complete (`2^m` points) or a support-restricted
/// view of a complete one, in which case only the active points remain but
/// labels keep their full `m`-bit width.
#[derive(Clone, Debug, PartialEq)]
pub struct Constellation {
    bits: u32,
    points: Vec<Complex64>,
    labels: Vec<u32>,
    complete: bool,
}

impl Constellation {
    /// Square `2^m`-QAM on the odd-integer grid with per-dimension BRGC labels.
    pub fn square_qam(m: u32) -> Result<Self> {
        if m % 2 != 0 || !(2..=10).contains(&m) {
            return Err(invalid(format!(
                "square QAM needs an even number of bits in 2..=10, got {m}"
            )));
        }
        let half = m / 2;
        let side = 1u32 << half;
        let mask = side - 1;
        let amplitude = |label: u32| 2.0 * gray_inverse(label) as f64 - (side - 1) as f64;
        let mut points = Vec::with_capacity(1 << m);
        let mut labels = Vec::with_capacity(1 << m);
        for label in 0..(1u32 << m) {
            let re = amplitude(label >> half);
            let im = amplitude(label & mask);
            debug_assert_eq!(gray(gray_inverse(label >> half)), label >> half);
            points.push(Complex64::new(re, im));
            labels.push(label);
        }
        Ok(Self {
            bits: m,
            points,
            labels,
            complete: true,
        })
    }

    /// Keeps only the listed points. Metric computations over the result
    /// sum over the active points alone.
    pub fn restrict_support(&self, active: &[Complex64]) -> Result<Self> {
        if active.is_empty() {
            return Err(invalid("support restriction needs at least one point"));
        }
        let mut keep = vec![false; self.len()];
        for x in active {
            let k = self
                .index_of(*x)
                .ok_or_else(|| invalid(format!("point {x} is not in the constellation")))?;
            keep[k] = true;
        }
        Ok(self.filtered(&keep))
    }

    /// Keeps the points for which `pred` holds.
    pub fn restrict_support_by(&self, pred: impl Fn(Complex64) -> bool) -> Result<Self> {
        let keep: Vec<bool> = self.points.iter().map(|&x| pred(x)).collect();
        if !keep.iter().any(|&k| k) {
            return Err(invalid("support restriction selects no points"));
        }
        Ok(self.filtered(&keep))
    }

    fn filtered(&self, keep: &[bool]) -> Self {
        let (points, labels) = self
            .points
            .iter()
            .zip(&self.labels)
            .zip(keep)
            .filter(|(_, &k)| k)
            .map(|((&p, &l), _)| (p, l))
            .unzip();
        Self {
            bits: self.bits,
            points,
            labels,
            complete: keep.iter().all(|&k| k) && self.complete,
        }
    }

    /// Bits per label, `m`.
    pub fn bits_per_symbol(&self) -> usize {
        self.bits as usize
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Whether every one of the `2^m` labels is present.
    pub fn is_complete(&self) -> bool {
        self.complete
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn labels(&self) -> &[u32] {
        &self.labels
    }

    /// Bit `j` (0 = first, in-phase MSB) of the label of point `k`.
    #[inline]
    pub fn label_bit(&self, k: usize, j: usize) -> u8 {
        ((self.labels[k] >> (self.bits as usize - 1 - j)) & 1) as u8
    }

    /// Label of point `k` as a bit string, first bit leftmost.
    pub fn label_string(&self, k: usize) -> String {
        (0..self.bits_per_symbol())
            .map(|j| if self.label_bit(k, j) == 1 { '1' } else { '0' })
            .collect()
    }

    /// Position of `x` among the points, matching within 1e-6.
    pub fn index_of(&self, x: Complex64) -> Option<usize> {
        self.points.iter().position(|p| (p - x).norm_sqr() < 1e-12)
    }

    /// Lookup table from points to indices, for mapping long symbol streams.
    pub fn index_map(&self) -> PointIndex {
        PointIndex {
            map: self
                .points
                .iter()
                .enumerate()
                .map(|(k, p)| (key(*p), k))
                .collect(),
            points: self.points.clone(),
        }
    }

    /// `|x_k|^2` for every point.
    pub fn energies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.norm_sqr()).collect()
    }

    pub fn min_energy(&self) -> f64 {
        self.energies().into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Mean energy under the uniform distribution on the points.
    pub fn uniform_energy(&self) -> f64 {
        self.energies().iter().sum::<f64>() / self.len() as f64
    }

    /// Indices of the `side × side` innermost square, i.e. the points whose
    /// coordinates are bounded by `side - 1` in magnitude.
    pub fn inner_square(&self, side: usize) -> Vec<usize> {
        let bound = side as f64 - 1.0 + 1e-9;
        (0..self.len())
            .filter(|&k| self.points[k].re.abs() <= bound && self.points[k].im.abs() <= bound)
            .collect()
    }

    pub fn descriptor(&self) -> ConstellationDescriptor {
        ConstellationDescriptor {
            m: self.bits,
            points: self.points.iter().map(|p| [p.re, p.im]).collect(),
            labels: (0..self.len()).map(|k| self.label_string(k)).collect(),
        }
    }
}

fn key(p: Complex64) -> (i64, i64) {
    ((p.re * 1e6).round() as i64, (p.im * 1e6).round() as i64)
}

/// Hash lookup from constellation points to their indices.
#[derive(Clone, Debug)]
pub struct PointIndex {
    map: HashMap<(i64, i64), usize>,
    points: Vec<Complex64>,
}

impl PointIndex {
    pub fn get(&self, x: Complex64) -> Option<usize> {
        self.map
            .get(&key(x))
            .copied()
            .filter(|&k| (self.points[k] - x).norm_sqr() < 1e-12)
    }
}

/// JSON descriptor `{m, points: [[re, im], …], labels: ["010…", …]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstellationDescriptor {
    pub m: u32,
    pub points: Vec<[f64; 2]>,
    pub labels: Vec<String>,
}

/// How a [`SymbolDistribution`] was parameterized.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DistributionKind {
    General,
    MaxwellBoltzmann { nu: f64 },
}

/// Probability mass function over the points of a constellation.
#[derive(Clone, Debug, PartialEq)]
pub struct SymbolDistribution {
    pmf: Vec<f64>,
    kind: DistributionKind,
}

impl SymbolDistribution {
    /// Builds a general distribution from raw weights. Entries below
    /// [`PROB_EPS`] become exact zeros and the rest is renormalized.
    pub fn from_pmf(raw: &[f64]) -> Result<Self> {
        if raw.is_empty() {
            return Err(invalid("empty pmf"));
        }
        if raw.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(invalid("pmf entries must be finite and non-negative"));
        }
        let total: f64 = raw.iter().sum();
        if total <= 0.0 {
            return Err(invalid("pmf has no mass"));
        }
        let mut pmf: Vec<f64> = raw
            .iter()
            .map(|&p| if p / total < PROB_EPS { 0.0 } else { p })
            .collect();
        let total: f64 = pmf.iter().sum();
        pmf.iter_mut().for_each(|p| *p /= total);
        Ok(Self {
            pmf,
            kind: DistributionKind::General,
        })
    }

    pub fn uniform(len: usize) -> Self {
        Self {
            pmf: vec![1.0 / len as f64; len],
            kind: DistributionKind::General,
        }
    }

    /// Uniform on `support`, zero elsewhere.
    pub fn uniform_on(len: usize, support: &[usize]) -> Result<Self> {
        let mut raw = vec![0.0; len];
        for &k in support {
            *raw.get_mut(k).ok_or_else(|| invalid("support index out of range"))? = 1.0;
        }
        Self::from_pmf(&raw)
    }

    /// Point mass on point `k`.
    pub fn one_hot(len: usize, k: usize) -> Result<Self> {
        Self::uniform_on(len, &[k])
    }

    /// Maxwell–Boltzmann law `p_k ∝ exp(-ν |x_k|^2)`.
    pub fn maxwell_boltzmann(c: &Constellation, nu: f64) -> Result<Self> {
        if !nu.is_finite() || nu < 0.0 {
            return Err(invalid(format!("MB parameter must be finite and >= 0, got {nu}")));
        }
        let energies = c.energies();
        let e_min = energies.iter().copied().fold(f64::INFINITY, f64::min);
        let mut pmf: Vec<f64> = energies.iter().map(|e| (-nu * (e - e_min)).exp()).collect();
        let total: f64 = pmf.iter().sum();
        pmf.iter_mut().for_each(|p| *p /= total);
        Ok(Self {
            pmf,
            kind: DistributionKind::MaxwellBoltzmann { nu },
        })
    }

    /// MB distribution whose entropy equals `bits`, found by bisection on ν.
    pub fn maxwell_boltzmann_with_entropy(c: &Constellation, bits: f64) -> Result<Self> {
        let h_max = (c.len() as f64).log2();
        if !(bits > 0.0 && bits <= h_max) {
            return Err(Error::OutOfRange {
                value: bits,
                bound: format!("target entropy must lie in (0, {h_max}]"),
            });
        }
        let h = |nu: f64| Self::maxwell_boltzmann(c, nu).map(|d| d.entropy());
        let mut hi = 1.0;
        while h(hi)? > bits {
            hi *= 2.0;
            if hi > 1e6 {
                return Err(Error::OutOfRange {
                    value: bits,
                    bound: "entropy unreachable by MB shaping".into(),
                });
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if h(mid)? > bits {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        Self::maxwell_boltzmann(c, 0.5 * (lo + hi))
    }

    pub fn pmf(&self) -> &[f64] {
        &self.pmf
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    /// The MB parameter, if this is an MB distribution.
    pub fn nu(&self) -> Option<f64> {
        match self.kind {
            DistributionKind::MaxwellBoltzmann { nu } => Some(nu),
            DistributionKind::General => None,
        }
    }

    pub fn len(&self) -> usize {
        self.pmf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pmf.is_empty()
    }

    /// Entropy in bits, `0 log 0 = 0`.
    pub fn entropy(&self) -> f64 {
        -self
            .pmf
            .iter()
            .filter(|&&p| p > 0.0)
            .map(|p| p * p.log2())
            .sum::<f64>()
    }

    /// `Σ_k p_k |x_k|^2`.
    pub fn mean_energy(&self, c: &Constellation) -> f64 {
        self.pmf
            .iter()
            .zip(c.points())
            .map(|(p, x)| p * x.norm_sqr())
            .sum()
    }

    /// Indices of points with positive probability.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len()).filter(|&k| self.pmf[k] > 0.0).collect()
    }

    /// Total-variation distance to another pmf of the same length.
    pub fn total_variation(&self, other: &SymbolDistribution) -> f64 {
        0.5 * self
            .pmf
            .iter()
            .zip(&other.pmf)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
    }
}

/// Solves `mean_energy(MB(ν)) = target_energy` for `ν ≥ 0`.
///
/// The mean energy is strictly decreasing in ν, so the root is bracketed by
/// doubling and then bisected to a relative width of 1e-15.
pub fn fit_mb_nu(c: &Constellation, target_energy: f64) -> Result<f64> {
    let e_min = c.min_energy();
    let e_uni = c.uniform_energy();
    if !target_energy.is_finite() || target_energy <= e_min {
        return Err(Error::OutOfRange {
            value: target_energy,
            bound: format!("lower bound: target energy must exceed the minimum point energy {e_min}"),
        });
    }
    if target_energy > e_uni * (1.0 + 1e-12) {
        return Err(Error::OutOfRange {
            value: target_energy,
            bound: format!("upper bound: target energy must not exceed the uniform energy {e_uni}"),
        });
    }
    if target_energy >= e_uni {
        return Ok(0.0);
    }
    let energy = |nu: f64| mb_energy(c, nu);
    let mut hi = 1e-3;
    while energy(hi) > target_energy {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if energy(mid) > target_energy {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

fn mb_energy(c: &Constellation, nu: f64) -> f64 {
    let e_min = c.min_energy();
    let (num, den) = c.points().iter().fold((0.0, 0.0), |(n, d), x| {
        let e = x.norm_sqr();
        let w = (-nu * (e - e_min)).exp();
        (n + w * e, d + w)
    });
    num / den
}

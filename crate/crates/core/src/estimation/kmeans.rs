//! K-Means with centroids tied to a scaled constellation grid.
//!
//! Cluster centres are `Δ·x_j` for the `k` innermost points; a Lloyd
//! iteration assigns every observation to its nearest centre and then refits
//! only the scalar gain by least squares.

use num_complex::Complex64;

use crate::channel::{ChannelParams, SampleBatch};
use crate::constellation::{Constellation, SymbolDistribution};
use crate::error::{invalid, Error, Result};

use super::em::SIGMA2_MIN;

/// Probability given to points the clustering left empty, so that EM can
/// still move mass onto them.
pub const INIT_PROB_FLOOR: f64 = 1e-6;

const MAX_LLOYD_ITERS: usize = 100;

/// Result of the constrained clustering, before conversion to parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Clustering {
    pub delta: f64,
    /// Point index (into the constellation) of every observation.
    pub assignments: Vec<usize>,
    pub iterations: usize,
}

/// Active point indices for `k` clusters: the `√k × √k` inner square.
pub fn active_points(c: &Constellation, k: usize) -> Result<Vec<usize>> {
    let side = (k as f64).sqrt().round() as usize;
    if side * side != k || side % 2 != 0 || side == 0 {
        return Err(invalid(format!("unsupported cluster count {k}: must be the square of an even number")));
    }
    if k > c.len() {
        return Err(invalid(format!("{k} clusters exceed the {} constellation points", c.len())));
    }
    let active = c.inner_square(side);
    if active.len() != k {
        return Err(invalid(format!("constellation has no {side}x{side} inner square")));
    }
    Ok(active)
}

/// Nearest active point by per-axis slicing of the odd-integer grid.
struct Slicer {
    bound: f64,
    lookup: Vec<usize>,
    side: usize,
}

impl Slicer {
    fn new(c: &Constellation, active: &[usize]) -> Self {
        let side = (active.len() as f64).sqrt().round() as usize;
        let bound = side as f64 - 1.0;
        let mut lookup = vec![usize::MAX; side * side];
        for &k in active {
            let p = c.points()[k];
            lookup[Self::cell(p.re, bound) * side + Self::cell(p.im, bound)] = k;
        }
        Self { bound, lookup, side }
    }

    fn cell(v: f64, bound: f64) -> usize {
        let odd = (2.0 * ((v - 1.0) / 2.0).round() + 1.0).clamp(-bound, bound);
        ((odd + bound) / 2.0).round() as usize
    }

    fn nearest(&self, z: Complex64) -> usize {
        self.lookup[Self::cell(z.re, self.bound) * self.side + Self::cell(z.im, self.bound)]
    }
}

/// Constrained Lloyd iterations on the `k` innermost points.
pub fn constrained_kmeans(batch: &SampleBatch, c: &Constellation, k: usize) -> Result<Clustering> {
    let active = active_points(c, k)?;
    let energy_k = active.iter().map(|&j| c.points()[j].norm_sqr()).sum::<f64>() / k as f64;
    let power = batch.mean_power();
    if !(power > 0.0) {
        return Err(Error::NumericDegeneracy("observations carry no power".into()));
    }
    let mut delta = (power / energy_k).sqrt();
    let slicer = Slicer::new(c, &active);
    let mut assignments: Vec<usize> = Vec::new();
    let mut iterations = 0;
    for it in 1..=MAX_LLOYD_ITERS {
        iterations = it;
        let next: Vec<usize> = batch
            .observations
            .iter()
            .map(|y| slicer.nearest(y / delta))
            .collect();
        let (num, den) = batch.observations.iter().zip(&next).fold((0.0, 0.0), |(n, d), (y, &a)| {
            let x = c.points()[a];
            (n + (y * x.conj()).re, d + x.norm_sqr())
        });
        let refit = num / den;
        if !(refit > 0.0) {
            return Err(Error::NumericDegeneracy(format!("clustering gain {refit} is not positive")));
        }
        delta = refit;
        let stable = next == assignments;
        assignments = next;
        if stable {
            break;
        }
    }
    Ok(Clustering {
        delta,
        assignments,
        iterations,
    })
}

/// Initial `(Δ, σ², p)` from constrained K-Means with `k` clusters.
///
/// `σ²` is the mean squared residual to the assigned centres; `p` is the
/// cluster occupancy, floored at [`INIT_PROB_FLOOR`] and renormalized.
pub fn kmeans_init(batch: &SampleBatch, c: &Constellation, k: usize) -> Result<ChannelParams> {
    let clustering = constrained_kmeans(batch, c, k)?;
    let delta = clustering.delta;
    let n = batch.len() as f64;
    let sigma2 = (batch
        .observations
        .iter()
        .zip(&clustering.assignments)
        .map(|(y, &a)| (y - delta * c.points()[a]).norm_sqr())
        .sum::<f64>()
        / n)
        .max(SIGMA2_MIN);
    let mut counts = vec![0.0; c.len()];
    clustering.assignments.iter().for_each(|&a| counts[a] += 1.0);
    let raw: Vec<f64> = counts.iter().map(|&cnt| (cnt / n).max(INIT_PROB_FLOOR)).collect();
    ChannelParams::new(delta, sigma2, SymbolDistribution::from_pmf(&raw)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::simulate;

    fn qam(m: u32) -> Constellation {
        Constellation::square_qam(m).unwrap()
    }

    #[test]
    fn supported_cluster_counts() {
        let c = qam(6);
        for k in [4, 16, 36, 64] {
            assert_eq!(active_points(&c, k).unwrap().len(), k);
        }
        for k in [0, 1, 9, 25, 49, 100, 8] {
            assert!(active_points(&c, k).is_err(), "{k}");
        }
        assert!(active_points(&qam(4), 36).is_err());
    }

    #[test]
    fn slicer_agrees_with_brute_force() {
        let c = qam(6);
        for k in [4, 16, 36, 64] {
            let active = active_points(&c, k).unwrap();
            let s = Slicer::new(&c, &active);
            for a in -40..40 {
                for b in -40..40 {
                    let z = Complex64::new(a as f64 * 0.23 + 0.01, b as f64 * 0.19 - 0.02);
                    let brute = active
                        .iter()
                        .copied()
                        .min_by(|&u, &v| (z - c.points()[u]).norm_sqr().total_cmp(&(z - c.points()[v]).norm_sqr()))
                        .unwrap();
                    assert_eq!(s.nearest(z), brute);
                }
            }
        }
    }

    #[test]
    fn noiseless_qpsk_is_exact() {
        let c = qam(2);
        let ys: Vec<Complex64> = (0..400).map(|i| 1.7 * c.points()[i % 4]).collect();
        let p = kmeans_init(&SampleBatch::new(ys).unwrap(), &c, 4).unwrap();
        assert!((p.delta() - 1.7).abs() < 1e-14);
        for &v in p.dist().pmf() {
            assert!((v - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn scale_equivariance() {
        let c = qam(6);
        let d = SymbolDistribution::maxwell_boltzmann(&c, 0.03).unwrap();
        let truth = ChannelParams::from_snr_db(&c, 1.0, 17.0, d).unwrap();
        let batch = simulate(&c, &truth, 5000, 4).unwrap();
        let mut scaled = batch.clone();
        scaled.observations.iter_mut().for_each(|y| *y *= 2.0);
        for k in [16, 36, 64] {
            let a = constrained_kmeans(&batch, &c, k).unwrap();
            let b = constrained_kmeans(&scaled, &c, k).unwrap();
            assert_eq!(a.assignments, b.assignments);
            assert!((b.delta / a.delta - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn corners_start_at_floor_on_36_point_support() {
        let c = qam(6);
        let inner = c.inner_square(6);
        let d = SymbolDistribution::uniform_on(64, &inner).unwrap();
        let truth = ChannelParams::from_snr_db(&c, 1.0, 20.0, d).unwrap();
        let batch = simulate(&c, &truth, 20_000, 5).unwrap();
        let p = kmeans_init(&batch, &c, 36).unwrap();
        for k in 0..64 {
            if !inner.contains(&k) {
                assert!((p.dist().pmf()[k] - INIT_PROB_FLOOR).abs() < 1e-9);
            } else {
                assert!(p.dist().pmf()[k] > 0.01);
            }
        }
        assert!((p.delta() - 1.0).abs() < 0.02);
    }
}

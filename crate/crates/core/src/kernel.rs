//! Per-observation point weights `p_k exp(-|y - Δx_k|²/σ²)` on the product
//! grid of point coordinates.
//!
//! Square constellations (and supports cut out of them) sit on a grid of
//! distinct in-phase and quadrature values, so the Gaussian factor of every
//! point is a product of one in-phase and one quadrature term. A row then
//! needs one exponential per coordinate rather than one per point, and the
//! row and column sums of the weight grid give the posterior moments and,
//! when every label bit depends on a single coordinate, the bit-wise sums.

use num_complex::Complex64;

use crate::channel::ChannelParams;
use crate::constellation::Constellation;

/// Below this the factorized weights may have lost precision to underflow,
/// and the row is recomputed in the log domain.
const WEIGHT_UNDERFLOW: f64 = 1e-280;

/// Which coordinate a label bit depends on, with its value per grid index.
#[derive(Clone, Debug)]
enum BitSide {
    Re(Vec<u8>),
    Im(Vec<u8>),
}

pub(crate) struct GridKernel {
    delta: f64,
    inv_sigma2: f64,
    re_axis: Axis,
    im_axis: Axis,
    cell_pmf: Vec<f64>,
    cell_log_p: Vec<f64>,
    point_cell: Vec<usize>,
    labels: Vec<u32>,
    bits: usize,
    bit_sides: Option<Vec<BitSide>>,
}

/// Weights of one observation, unnormalized; `total` is their sum.
pub(crate) struct RowWeights {
    cell: Vec<f64>,
    re_sum: Vec<f64>,
    im_sum: Vec<f64>,
    er: Vec<f64>,
    ei: Vec<f64>,
    pub total: f64,
    /// `log Σ_k p_k exp(-|y - Δx_k|²/σ²) = log_scale + ln total`.
    pub log_scale: f64,
}

impl RowWeights {
    pub fn log_sum(&self) -> f64 {
        self.log_scale + self.total.ln()
    }
}

/// Distinct coordinate values in increasing order.
struct Axis {
    values: Vec<f64>,
    /// Common spacing, when the values are evenly spaced.
    step: Option<f64>,
}

impl Axis {
    fn len(&self) -> usize {
        self.values.len()
    }
}

fn axis_of(values: &[f64]) -> (Axis, Vec<usize>) {
    let mut axis = values.to_vec();
    axis.sort_by(f64::total_cmp);
    axis.dedup();
    let index = values
        .iter()
        .map(|v| axis.binary_search_by(|a| a.total_cmp(v)).expect("value is on the axis"))
        .collect();
    let step = match axis.len() {
        1 => Some(1.0),
        _ => {
            let h = axis[1] - axis[0];
            axis.windows(2).all(|w| w[1] - w[0] == h).then_some(h)
        }
    };
    (Axis { values: axis, step }, index)
}

/// Bit `j` as a function of one grid coordinate, if it is one.
fn bit_side(bits: &[u8], index: &[usize], len: usize) -> Option<Vec<u8>> {
    let mut side = vec![u8::MAX; len];
    for (&b, &a) in bits.iter().zip(index) {
        if side[a] == u8::MAX {
            side[a] = b;
        } else if side[a] != b {
            return None;
        }
    }
    Some(side)
}

/// `cell[a, b] = pmf[a, b] · er[a] · ei[b]` with row, column and grand sums.
#[inline]
fn outer_product(pmf: &[f64], nb: usize, w: &mut RowWeights) {
    let ei = &w.ei[..nb];
    let col = &mut w.im_sum[..nb];
    col.fill(0.0);
    let mut total = 0.0;
    for (a, (&ra, rs)) in w.er.iter().zip(w.re_sum.iter_mut()).enumerate() {
        let prow = &pmf[a * nb..(a + 1) * nb];
        let row = &mut w.cell[a * nb..(a + 1) * nb];
        for b in 0..nb {
            row[b] = prow[b] * ra * ei[b];
            col[b] += row[b];
        }
        let acc = row.iter().sum::<f64>();
        *rs = acc;
        total += acc;
    }
    w.total = total;
}

impl GridKernel {
    pub fn new(c: &Constellation, params: &ChannelParams) -> Self {
        let re: Vec<f64> = c.points().iter().map(|x| x.re).collect();
        let im: Vec<f64> = c.points().iter().map(|x| x.im).collect();
        let (re_axis, re_index) = axis_of(&re);
        let (im_axis, im_index) = axis_of(&im);
        let nb = im_axis.len();
        let cells = re_axis.len() * nb;
        let point_cell: Vec<usize> = re_index.iter().zip(&im_index).map(|(a, b)| a * nb + b).collect();
        let mut cell_pmf = vec![0.0; cells];
        for (k, &cell) in point_cell.iter().enumerate() {
            cell_pmf[cell] = params.dist().pmf()[k];
        }
        let cell_log_p = cell_pmf
            .iter()
            .map(|&p| if p > 0.0 { p.ln() } else { f64::NEG_INFINITY })
            .collect();
        let bits = c.bits_per_symbol();
        let bit_sides = (0..bits)
            .map(|j| {
                let column: Vec<u8> = (0..c.len()).map(|k| c.label_bit(k, j)).collect();
                bit_side(&column, &re_index, re_axis.len())
                    .map(BitSide::Re)
                    .or_else(|| bit_side(&column, &im_index, nb).map(BitSide::Im))
            })
            .collect();
        Self {
            delta: params.delta(),
            inv_sigma2: 1.0 / params.sigma2(),
            re_axis,
            im_axis,
            cell_pmf,
            cell_log_p,
            point_cell,
            labels: c.labels().to_vec(),
            bits,
            bit_sides,
        }
    }

    pub fn buffers(&self) -> RowWeights {
        RowWeights {
            cell: vec![0.0; self.cell_pmf.len()],
            re_sum: vec![0.0; self.re_axis.len()],
            im_sum: vec![0.0; self.im_axis.len()],
            er: vec![0.0; self.re_axis.len()],
            ei: vec![0.0; self.im_axis.len()],
            total: 0.0,
            log_scale: 0.0,
        }
    }

    pub fn cells(&self) -> usize {
        self.cell_pmf.len()
    }

    /// One axis: `out[a] = exp(-((v - Δ a)² - min)/σ²)`; returns `min`.
    #[inline]
    fn axis_factors(&self, v: f64, axis: &Axis, out: &mut [f64]) -> f64 {
        let Some(step) = axis.step else {
            let mut min = f64::INFINITY;
            for (o, a) in out.iter_mut().zip(&axis.values) {
                let d = v - self.delta * a;
                *o = d * d;
                min = min.min(*o);
            }
            for o in out.iter_mut() {
                *o = (-(*o - min) * self.inv_sigma2).exp();
            }
            return min;
        };
        // Evenly spaced values: moving away from the nearest one, the
        // exponent grows by a term that itself grows by 2(Δh)²/σ² per step.
        let last = out.len() - 1;
        let nearest = ((v / self.delta - axis.values[0]) / step).round().clamp(0.0, last as f64) as usize;
        let h = self.delta * step;
        let d = v - self.delta * axis.values[nearest];
        let growth = (-2.0 * h * h * self.inv_sigma2).exp();
        out[nearest] = 1.0;
        let mut ratio = (-(h * h - 2.0 * h * d) * self.inv_sigma2).min(0.0).exp();
        for j in nearest + 1..=last {
            out[j] = out[j - 1] * ratio;
            ratio *= growth;
        }
        let mut ratio = (-(h * h + 2.0 * h * d) * self.inv_sigma2).min(0.0).exp();
        for j in (0..nearest).rev() {
            out[j] = out[j + 1] * ratio;
            ratio *= growth;
        }
        d * d
    }

    #[inline]
    fn grid_sums(&self, w: &mut RowWeights) {
        let nb = self.im_axis.len();
        w.im_sum.fill(0.0);
        let mut total = 0.0;
        for (row, rs) in w.cell.chunks_exact(nb).zip(w.re_sum.iter_mut()) {
            let mut acc = 0.0;
            for (v, cs) in row.iter().zip(w.im_sum.iter_mut()) {
                acc += v;
                *cs += v;
            }
            *rs = acc;
            total += acc;
        }
        w.total = total;
    }

    /// Fills the weights of observation `y`.
    #[inline]
    pub fn fill(&self, y: Complex64, w: &mut RowWeights) {
        let nb = self.im_axis.len();
        let dr = self.axis_factors(y.re, &self.re_axis, &mut w.er);
        let di = self.axis_factors(y.im, &self.im_axis, &mut w.ei);
        outer_product(&self.cell_pmf, nb, w);
        w.log_scale = -(dr + di) * self.inv_sigma2;
        if w.total >= WEIGHT_UNDERFLOW {
            return;
        }
        let mut top = f64::NEG_INFINITY;
        for (i, (v, lp)) in w.cell.iter_mut().zip(&self.cell_log_p).enumerate() {
            let x = Complex64::new(self.re_axis.values[i / nb], self.im_axis.values[i % nb]);
            *v = lp - (y - self.delta * x).norm_sqr() * self.inv_sigma2;
            top = top.max(*v);
        }
        for v in w.cell.iter_mut() {
            *v = (*v - top).exp();
        }
        self.grid_sums(w);
        w.log_scale = top;
    }

    /// Unnormalized weight of point `k`.
    #[inline]
    pub fn point_weight(&self, w: &RowWeights, k: usize) -> f64 {
        w.cell[self.point_cell[k]]
    }

    /// Posterior mean and spread `Σ_k q_k |x_k - x̄|²` of the filled row.
    #[inline]
    pub fn moments(&self, w: &RowWeights) -> (Complex64, f64) {
        let inv = 1.0 / w.total;
        let mr = inv * w.re_sum.iter().zip(&self.re_axis.values).map(|(s, a)| s * a).sum::<f64>();
        let mi = inv * w.im_sum.iter().zip(&self.im_axis.values).map(|(s, b)| s * b).sum::<f64>();
        let sr: f64 = w.re_sum.iter().zip(&self.re_axis.values).map(|(s, a)| s * (a - mr) * (a - mr)).sum();
        let si: f64 = w.im_sum.iter().zip(&self.im_axis.values).map(|(s, b)| s * (b - mi) * (b - mi)).sum();
        (Complex64::new(mr, mi), inv * (sr + si))
    }

    /// Adds the normalized row to per-cell accumulators.
    #[inline]
    pub fn accumulate(&self, w: &RowWeights, acc: &mut [f64]) {
        let inv = 1.0 / w.total;
        acc.iter_mut().zip(&w.cell).for_each(|(a, v)| *a += v * inv);
    }

    /// Per-cell sums mapped back to point order.
    pub fn to_points(&self, cells: &[f64]) -> Vec<f64> {
        self.point_cell.iter().map(|&c| cells[c]).collect()
    }

    /// Weight mass on label bit `j = 0` and `j = 1`, for every `j`.
    #[inline]
    pub fn bit_sums(&self, w: &RowWeights, s0: &mut [f64], s1: &mut [f64]) {
        s0.fill(0.0);
        s1.fill(0.0);
        match &self.bit_sides {
            Some(sides) => {
                for (j, side) in sides.iter().enumerate() {
                    let (sums, values) = match side {
                        BitSide::Re(v) => (&w.re_sum, v),
                        BitSide::Im(v) => (&w.im_sum, v),
                    };
                    for (s, &b) in sums.iter().zip(values) {
                        match b {
                            0 => s0[j] += s,
                            1 => s1[j] += s,
                            _ => debug_assert_eq!(*s, 0.0),
                        }
                    }
                }
            }
            None => {
                let m = self.bits;
                for (&cell, &label) in self.point_cell.iter().zip(&self.labels) {
                    let v = w.cell[cell];
                    for j in 0..m {
                        if (label >> (m - 1 - j)) & 1 == 0 {
                            s0[j] += v;
                        } else {
                            s1[j] += v;
                        }
                    }
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constellation::SymbolDistribution;

    fn brute(y: Complex64, c: &Constellation, params: &ChannelParams) -> Vec<f64> {
        c.points()
            .iter()
            .zip(params.dist().pmf())
            .map(|(x, p)| p * (-(y - params.delta() * x).norm_sqr() / params.sigma2()).exp())
            .collect()
    }

    #[test]
    fn matches_direct_weights_and_bit_sums() {
        let c = Constellation::square_qam(6).unwrap();
        let d = SymbolDistribution::maxwell_boltzmann(&c, 0.04).unwrap();
        let params = ChannelParams::new(0.9, 2.5, d).unwrap();
        let kernel = GridKernel::new(&c, &params);
        assert!(kernel.bit_sides.as_ref().unwrap().len() == 6);
        let mut w = kernel.buffers();
        for y in [Complex64::new(0.3, -2.2), Complex64::new(7.5, 6.0), Complex64::new(-1.0, 0.1)] {
            kernel.fill(y, &mut w);
            let direct = brute(y, &c, &params);
            let scale = w.log_scale.exp();
            for k in 0..64 {
                let got = kernel.point_weight(&w, k) * scale;
                assert!((got - direct[k]).abs() <= 1e-12 * direct[k].max(1e-300), "{k}");
            }
            assert!((w.log_sum() - direct.iter().sum::<f64>().ln()).abs() < 1e-12);
            let (mut s0, mut s1) = (vec![0.0; 6], vec![0.0; 6]);
            kernel.bit_sums(&w, &mut s0, &mut s1);
            for j in 0..6 {
                let zero: f64 = (0..64).filter(|&k| c.label_bit(k, j) == 0).map(|k| direct[k]).sum();
                assert!((s0[j] * scale / zero - 1.0).abs() < 1e-12);
            }
            let mean: Complex64 = (0..64).map(|k| direct[k] * c.points()[k]).sum::<Complex64>() / direct.iter().sum::<f64>();
            let (mu, _) = kernel.moments(&w);
            assert!((mu - mean).norm() < 1e-12);
        }
    }

    #[test]
    fn underflowing_rows_fall_back_to_log_domain() {
        let c = Constellation::square_qam(4).unwrap();
        let inner = c.inner_square(2);
        let params = ChannelParams::new(1.0, 1e-4, SymbolDistribution::uniform_on(16, &inner).unwrap()).unwrap();
        let kernel = GridKernel::new(&c, &params);
        let mut w = kernel.buffers();
        // nearest grid point is a corner with zero probability
        kernel.fill(Complex64::new(3.0, 3.0), &mut w);
        assert!(w.total > 0.0 && w.total.is_finite());
        let best = inner
            .iter()
            .map(|&k| -(Complex64::new(3.0, 3.0) - c.points()[k]).norm_sqr() / 1e-4)
            .fold(f64::NEG_INFINITY, f64::max);
        assert!((w.log_sum() - (best + 0.25f64.ln())).abs() < 1e-9);
    }
}

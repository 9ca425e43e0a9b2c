//! Scalar minimization over a non-negative parameter.

const INV_PHI: f64 = 0.618_033_988_749_894_8;

/// Golden-section search for a minimum of `f` on `[a, b]`.
///
/// Returns `(x_min, f_min)`; stops once the bracket is narrower than `tol`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut a: f64, mut b: f64, tol: f64) -> (f64, f64) {
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    while (b - a).abs() > tol {
        if fc <= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
    }
    if fc <= fd {
        (c, fc)
    } else {
        (d, fd)
    }
}

/// Number of grid points in the pre-scan that locates the bracket.
pub const PRESCAN_POINTS: usize = 17;

/// Minimizes `f(s)` over `s ≥ 0`, assuming a unimodal objective.
///
/// The upper end of the search interval starts at 4 and doubles until the
/// grid minimizer is interior or the end reaches 64. A 17-point grid locates
/// the bracket, golden-section refines it to `s_tol`, and the best point ever
/// evaluated is returned.
pub fn minimize_nonnegative<F: FnMut(f64) -> f64>(mut f: F, s_tol: f64) -> (f64, f64) {
    let mut s_hi = 4.0;
    let mut best = (f64::NAN, f64::INFINITY);
    let consider = |s: f64, v: f64, best: &mut (f64, f64)| {
        if v < best.1 || (v == best.1 && s < best.0) {
            *best = (s, v);
        }
    };
    let (grid, values, i_min) = loop {
        let step = s_hi / (PRESCAN_POINTS - 1) as f64;
        let grid: Vec<f64> = (0..PRESCAN_POINTS).map(|i| i as f64 * step).collect();
        let values: Vec<f64> = grid.iter().map(|&s| f(s)).collect();
        let i_min = values
            .iter()
            .enumerate()
            .fold(0, |acc, (i, v)| if *v < values[acc] { i } else { acc });
        if i_min < PRESCAN_POINTS - 1 || s_hi >= 64.0 {
            break (grid, values, i_min);
        }
        s_hi *= 2.0;
    };
    for (s, v) in grid.iter().zip(&values) {
        consider(*s, *v, &mut best);
    }
    let lo = grid[i_min.saturating_sub(1)];
    let hi = grid[(i_min + 1).min(PRESCAN_POINTS - 1)];
    if hi > lo {
        let (s, v) = golden_section(&mut f, lo, hi, s_tol);
        consider(s, v, &mut best);
    }
    best
}

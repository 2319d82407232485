//! Small numerical kernels shared by the modules: finite-difference weights
//! on arbitrary grids, quintic Hermite interpolation, Gauss-Legendre nodes
//! and a straight-line least-squares fit.

use alloc::vec;
use alloc::vec::Vec;

/// Finite-difference weights (Fornberg's recursion) for derivatives of order
/// `0..=max_order` at `z` from samples at `xs`.
///
/// Returns `w[k][j]`, the weight of sample `j` in the `k`-th derivative.
pub fn fornberg_weights(z: f64, xs: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Index window of `width` consecutive samples centred on `i` and clamped
/// to `0..len`.
pub fn stencil_window(i: usize, len: usize, width: usize) -> core::ops::Range<usize> {
    let half = width / 2;
    let start = i.saturating_sub(half).min(len.saturating_sub(width));
    start..(start + width).min(len)
}

/// Value, first and second derivative data at one end of a Hermite interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub y: f64,
    pub d1: f64,
    pub d2: f64,
}

impl Jet {
    pub fn new(y: f64, d1: f64, d2: f64) -> Self {
        Self { y, d1, d2 }
    }
}

/// Quintic Hermite interpolant on `[x0, x0 + h]` at `x0 + t h`.
pub fn quintic_hermite(left: Jet, right: Jet, h: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let h00 = 1.0 - 10.0 * t3 + 15.0 * t4 - 6.0 * t5;
    let h01 = t - 6.0 * t3 + 8.0 * t4 - 3.0 * t5;
    let h02 = 0.5 * t2 - 1.5 * t3 + 1.5 * t4 - 0.5 * t5;
    let h10 = 10.0 * t3 - 15.0 * t4 + 6.0 * t5;
    let h11 = -4.0 * t3 + 7.0 * t4 - 3.0 * t5;
    let h12 = 0.5 * t3 - t4 + 0.5 * t5;
    h00 * left.y
        + h * h01 * left.d1
        + h * h * h02 * left.d2
        + h10 * right.y
        + h * h11 * right.d1
        + h * h * h12 * right.d2
}

/// `∫_{x0}^{x0 + t h}` of the quintic Hermite interpolant.
pub fn quintic_hermite_integral(left: Jet, right: Jet, h: f64, t: f64) -> f64 {
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t3 * t;
    let t5 = t4 * t;
    let t6 = t5 * t;
    let i00 = t - 2.5 * t4 + 3.0 * t5 - t6;
    let i01 = 0.5 * t2 - 1.5 * t4 + 1.6 * t5 - 0.5 * t6;
    let i02 = t3 / 6.0 - 0.375 * t4 + 0.3 * t5 - t6 / 12.0;
    let i10 = 2.5 * t4 - 3.0 * t5 + t6;
    let i11 = -t4 + 1.4 * t5 - 0.5 * t6;
    let i12 = 0.125 * t4 - 0.2 * t5 + t6 / 12.0;
    h * (i00 * left.y
        + h * i01 * left.d1
        + h * h * i02 * left.d2
        + i10 * right.y
        + h * i11 * right.d1
        + h * h * i12 * right.d2)
}

/// Five-point Gauss-Legendre nodes and weights on `[-1, 1]`.
pub const GAUSS5: [(f64, f64); 5] = [
    (-0.906_179_845_938_664, 0.236_926_885_056_189_08),
    (-0.538_469_310_105_683, 0.478_628_670_499_366_47),
    (0.0, 0.568_888_888_888_888_9),
    (0.538_469_310_105_683, 0.478_628_670_499_366_47),
    (0.906_179_845_938_664, 0.236_926_885_056_189_08),
];

/// Five-point Gauss-Legendre rule for `f` on `[a, b]`.
pub fn gauss5<F: FnMut(f64) -> f64>(a: f64, b: f64, mut f: F) -> f64 {
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    GAUSS5.iter().map(|&(x, w)| w * f(mid + half * x)).sum::<f64>() * half
}

/// Least-squares line `y ≈ intercept + slope x`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len();
    if n < 2 || ys.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    Some((my - slope * mx, slope))
}

/// Neville extrapolation of the polynomial through `(xs, ys)` to `x = 0`.
pub fn neville_at_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p: Vec<f64> = ys.to_vec();
    let n = xs.len();
    for m in 1..n {
        for i in 0..n - m {
            p[i] = (xs[i + m] * p[i] - xs[i] * p[i + 1]) / (xs[i + m] - xs[i]);
        }
    }
    p[0]
}

//! Quadrature rules and compensated summation.
//!
//! - adaptive Gauss-Kronrod (7/15 point pairs) for smooth real integrands,
//! - Gauss-Legendre nodes of arbitrary order for panel rules,
//! - uniform trapezoid grids,
//! - Neumaier summation so that reductions are reproducible and accurate.

use num_complex::Complex64;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];

// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_SUBDIVISIONS: usize = 2000;

/// One 15-point Kronrod panel: returns (integral, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += w * (f1 + f2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Adaptive Gauss-Kronrod integration of `f` over `[a, b]` to absolute
/// tolerance `abs_tol`. `breakpoints` (any order, may lie outside) seed the
/// initial partition, which makes piecewise-polynomial integrands exact.
///
/// Reversed limits give the negated integral.
pub fn integrate_adaptive<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    breakpoints: &[f64],
) -> Result<f64> {
    if a == b {
        return Ok(0.0);
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };

    let mut cuts: Vec<f64> = std::iter::once(lo)
        .chain(breakpoints.iter().copied().filter(|&x| x > lo && x < hi))
        .chain(std::iter::once(hi))
        .collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    // (a, b, value, error)
    let mut panels: Vec<(f64, f64, f64, f64)> = cuts
        .windows(2)
        .map(|w| {
            let (v, e) = gk15(&f, w[0], w[1]);
            (w[0], w[1], v, e)
        })
        .collect();

    for _ in 0..MAX_SUBDIVISIONS {
        let total_err: f64 = panels.iter().map(|p| p.3).sum();
        if total_err <= abs_tol {
            break;
        }
        let (idx, _) = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .expect("at least one panel");
        let (pa, pb, _, _) = panels[idx];
        let mid = 0.5 * (pa + pb);
        if mid <= pa || mid >= pb {
            break;
        }
        let (v1, e1) = gk15(&f, pa, mid);
        let (v2, e2) = gk15(&f, mid, pb);
        panels[idx] = (pa, mid, v1, e1);
        panels.push((mid, pb, v2, e2));
    }

    let total_err: f64 = panels.iter().map(|p| p.3).sum();
    if total_err > abs_tol.max(1e-10) {
        return Err(Error::QuadratureFailed { a, b, estimate: total_err });
    }
    panels.sort_by(|x, y| x.0.total_cmp(&y.0));
    let value = neumaier_sum(panels.iter().map(|p| p.2));
    Ok(sign * value)
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(order > 0, "Gauss-Legendre order must be positive");
    let n = order;
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Composite Gauss-Legendre rule: `panels` equal panels on `[a, b]`,
/// returning (nodes, weights).
pub fn composite_gauss_legendre(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut nodes = Vec::with_capacity(panels * order);
    let mut weights = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let c = a + (p as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            nodes.push(c + 0.5 * h * xi);
            weights.push(0.5 * h * wi);
        }
    }
    (nodes, weights)
}

/// `n` equispaced nodes on `[a, b]` with trapezoid weights.
pub fn trapezoid(a: f64, b: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if n < 2 || !(b > a) {
        return Err(Error::InvalidGrid(format!(
            "trapezoid grid needs n >= 2 and b > a (n = {n}, a = {a}, b = {b})"
        )));
    }
    let h = (b - a) / (n - 1) as f64;
    let nodes = (0..n).map(|i| a + i as f64 * h).collect();
    let weights = (0..n)
        .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
        .collect();
    Ok((nodes, weights))
}

/// Neumaier-compensated sum in iteration order.
pub fn neumaier_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Component-wise [`neumaier_sum`] for complex values.
pub fn neumaier_sum_complex<I: IntoIterator<Item = Complex64>>(values: I) -> Complex64 {
    let mut re = ComplexAccumulator::default();
    for v in values {
        re.add(v);
    }
    re.total()
}

/// Running compensated complex accumulator.
#[derive(Debug, Default, Clone, Copy)]
pub struct ComplexAccumulator {
    sum: Complex64,
    comp: Complex64,
}

impl ComplexAccumulator {
    pub fn add(&mut self, v: Complex64) {
        let (s, c) = two_sum(self.sum.re, v.re);
        self.sum.re = s;
        self.comp.re += c;
        let (s, c) = two_sum(self.sum.im, v.im);
        self.sum.im = s;
        self.comp.im += c;
    }

    pub fn total(&self) -> Complex64 {
        self.sum + self.comp
    }
}

fn two_sum(sum: f64, v: f64) -> (f64, f64) {
    let t = sum + v;
    let c = if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
    (t, c)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_integrates_polynomial_exactly() {
        let v = integrate_adaptive(|x| x.powi(6) - 3.0 * x, -1.0, 2.0, 1e-14, &[]).unwrap();
        let exact = (2f64.powi(7) + 1.0) / 7.0 - 1.5 * (4.0 - 1.0);
        assert!((v - exact).abs() < 1e-13);
    }

    #[test]
    fn gk_reversed_limits_negate() {
        let f = |x: f64| (x * x).exp();
        let a = integrate_adaptive(f, 0.0, 1.0, 1e-12, &[]).unwrap();
        let b = integrate_adaptive(f, 1.0, 0.0, 1e-12, &[]).unwrap();
        assert_eq!(a, -b);
    }

    #[test]
    fn gk_handles_sharp_peak() {
        let v = integrate_adaptive(|x| (-(x * x) / 2e-4).exp(), -3.0, 5.0, 1e-12, &[0.0]).unwrap();
        let exact = (2.0 * std::f64::consts::PI * 1e-4).sqrt();
        assert!((v - exact).abs() < 1e-11);
    }

    #[test]
    fn gauss_legendre_weights_and_moments() {
        for n in [1, 2, 5, 32] {
            let (x, w) = gauss_legendre(n);
            let total: f64 = w.iter().sum();
            assert!((total - 2.0).abs() < 1e-13, "n = {n}");
            // exact for degree 2n - 1
            let deg = 2 * n - 2;
            let m: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
            assert!((m - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn trapezoid_rejects_degenerate() {
        assert!(trapezoid(0.0, 1.0, 1).is_err());
        assert!(trapezoid(1.0, 1.0, 5).is_err());
    }

    #[test]
    fn neumaier_recovers_cancellation() {
        let v = neumaier_sum([1.0, 1e100, 1.0, -1e100]);
        assert_eq!(v, 2.0);
    }
}

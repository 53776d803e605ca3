//! Frequency content of the projector's scalar phase factor.
//!
//! The `s`-dependence of the kernel coefficient `a(s, s~)` is the phase factor
//! `exp(-i Phi(s~, s) / 4u)`. For a harmonic wave it is a superposition of
//! lines `exp(-i v_n s)` with `v_n = v0 + n Omega` and
//! `v0 = (k2^2 + k3^2 + lambda^2/2 + m^2) / (4u)`. Transforms use the kernel
//! `exp(+i v s)`, so a line at `v_n` appears as a peak at `v = v_n`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::modes::ModeParams;
use crate::potential::{phase, phase_integrand, PlaneWavePotential};
use crate::quadrature::{composite_gauss_legendre, neumaier_sum, neumaier_sum_complex, trapezoid};
use crate::special::bessel_j_upto;
use crate::{Error, Result};

/// One spectral line `amplitude * exp(-i v s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumLine {
    pub n: i64,
    pub v: f64,
    pub amplitude: Complex64,
}

/// Smooth test function `f(s)` used to localize transforms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum WindowFunction {
    /// `exp(-(s - center)^2 / (2 width^2))`, truncated at `TRUNCATION` widths.
    Gaussian { center: f64, width: f64 },
    /// `sin^2(pi (s - start) / (end - start))` on `[start, end]`.
    Hann { start: f64, end: f64 },
}

impl WindowFunction {
    /// Gaussian truncation radius in units of its width.
    pub const TRUNCATION: f64 = 10.0;

    pub fn validate(&self) -> Result<()> {
        match *self {
            WindowFunction::Gaussian { center, width } => {
                if !center.is_finite() || !(width > 0.0) || !width.is_finite() {
                    return Err(Error::InvalidArgument(format!("Gaussian window needs width > 0, got {width}")));
                }
            }
            WindowFunction::Hann { start, end } => {
                if !start.is_finite() || !end.is_finite() || !(end > start) {
                    return Err(Error::InvalidArgument(format!("Hann window needs start < end ({start}, {end})")));
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, s: f64) -> f64 {
        match *self {
            WindowFunction::Gaussian { center, width } => {
                let x = (s - center) / width;
                (-0.5 * x * x).exp()
            }
            WindowFunction::Hann { start, end } => {
                if s <= start || s >= end {
                    0.0
                } else {
                    (PI * (s - start) / (end - start)).sin().powi(2)
                }
            }
        }
    }

    /// Interval outside of which the window is treated as zero.
    pub fn support(&self) -> (f64, f64) {
        match *self {
            WindowFunction::Gaussian { center, width } => {
                (center - Self::TRUNCATION * width, center + Self::TRUNCATION * width)
            }
            WindowFunction::Hann { start, end } => (start, end),
        }
    }

    /// Smallest length scale of the window.
    fn scale(&self) -> f64 {
        match *self {
            WindowFunction::Gaussian { width, .. } => width,
            WindowFunction::Hann { start, end } => 0.25 * (end - start),
        }
    }
}

/// Carrier frequency `(k2^2 + k3^2 + lambda^2/2 + m^2) / (4u)` of a harmonic wave.
pub fn harmonic_carrier(mode: &ModeParams, lambda: f64) -> f64 {
    (mode.k2 * mode.k2 + mode.k3 * mode.k3 + 0.5 * lambda * lambda + mode.m * mode.m) / (4.0 * mode.u)
}

/// Lines `v0 + n Omega`, `|n| <= n_max`, of the harmonic phase factor with
/// amplitudes `c_n = sum_{n1 + 2 n2 = n} J_n1(z1) J_n2(z2)`,
/// `z1 = k2 lambda / (2 Omega u)`, `z2 = lambda^2 / (16 Omega u)`.
pub fn harmonic_sidebands_analytic(
    mode: &ModeParams,
    lambda: f64,
    omega: f64,
    n_max: i64,
) -> Result<Vec<SpectrumLine>> {
    mode.validate()?;
    if n_max < 0 {
        return Err(Error::InvalidArgument(format!("n_max must be non-negative, got {n_max}")));
    }
    if omega == 0.0 || !omega.is_finite() || !lambda.is_finite() {
        return Err(Error::InvalidPotential("sidebands need finite lambda and nonzero omega".into()));
    }
    let z1 = mode.k2 * lambda / (2.0 * omega * mode.u);
    let z2 = lambda * lambda / (16.0 * omega * mode.u);
    let k2_max = (z2.abs() + 30.0 + 5.0 * z2.abs().sqrt()).ceil() as i64;
    let k1_max = n_max + 2 * k2_max + (z1.abs() + 30.0) as i64;
    let j1 = bessel_j_upto(k1_max as usize, z1);
    let j2 = bessel_j_upto(k2_max as usize, z2);
    let jn = |table: &[f64], n: i64| -> f64 {
        let a = n.unsigned_abs() as usize;
        if a >= table.len() {
            return 0.0;
        }
        if n < 0 && a % 2 == 1 {
            -table[a]
        } else {
            table[a]
        }
    };
    let v0 = harmonic_carrier(mode, lambda);
    Ok((-n_max..=n_max)
        .map(|n| {
            let c = neumaier_sum((-k2_max..=k2_max).map(|n2| jn(&j1, n - 2 * n2) * jn(&j2, n2)));
            SpectrumLine { n, v: v0 + n as f64 * omega, amplitude: Complex64::new(c, 0.0) }
        })
        .collect())
}

/// `(2 pi)^4 a(s, s~) = exp(-i Phi(s~, s) / 4u)` at `s = s0 + j ds`, `j < n`.
pub fn phase_factor_samples(
    mode: &ModeParams,
    pot: &PlaneWavePotential,
    s_tilde: f64,
    s0: f64,
    ds: f64,
    n: usize,
) -> Result<Vec<Complex64>> {
    mode.validate()?;
    let q = mode.phase_query();
    (0..n)
        .into_par_iter()
        .map(|j| {
            let s = s0 + j as f64 * ds;
            let phi = phase(pot, &q, s_tilde, s)?;
            Ok(Complex64::from_polar(1.0, -phi / (4.0 * mode.u)))
        })
        .collect()
}

/// Where to look for lines in an FFT spectrum: `v0 + n omega`, `|n| <= n_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineProbe {
    pub v0: f64,
    pub omega: f64,
    pub n_max: i64,
}

/// Output of [`spectrum_fft`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FftSpectrum {
    pub lines: Vec<SpectrumLine>,
    /// Frequency of the bin nearest to each line before refinement.
    pub bin_frequencies: Vec<f64>,
    pub bin_width: f64,
    /// `(v, |X(v)|)` for every bin, ordered by `v`, normalized like the line amplitudes.
    pub bins: Vec<(f64, f64)>,
}

/// Windowed FFT of uniformly sampled `f(s0 + j ds)`.
///
/// Peaks near each probed line are refined by a three-point parabola on
/// `log |X|` (exact for Gaussian windows); the amplitude is the windowed
/// transform at the refined frequency divided by the window's coherent gain.
pub fn spectrum_fft(
    samples: &[Complex64],
    s0: f64,
    ds: f64,
    window: &WindowFunction,
    probe: &LineProbe,
) -> Result<FftSpectrum> {
    window.validate()?;
    let n = samples.len();
    if n < 8 || !(ds > 0.0) {
        return Err(Error::InvalidGrid(format!("need at least 8 samples and ds > 0 (n = {n}, ds = {ds})")));
    }
    if probe.n_max < 0 || probe.omega == 0.0 {
        return Err(Error::InvalidArgument("probe needs n_max >= 0 and omega != 0".into()));
    }
    let record = n as f64 * ds;
    let min_record = 16.0 * 2.0 * PI / probe.omega.abs();
    if record < min_record {
        return Err(Error::InvalidGrid(format!(
            "record of length {record} spans fewer than 16 periods ({min_record})"
        )));
    }
    let nyquist = PI / ds;
    let required = (-probe.n_max..=probe.n_max)
        .map(|k| (probe.v0 + k as f64 * probe.omega).abs())
        .fold(0.0, f64::max);
    if required >= nyquist {
        return Err(Error::Undersampled { nyquist, required });
    }

    let s_at = |j: usize| s0 + j as f64 * ds;
    let w: Vec<f64> = (0..n).map(|j| window.eval(s_at(j))).collect();
    let gain = neumaier_sum(w.iter().copied()) * ds;
    if !(gain > 0.0) {
        return Err(Error::InvalidArgument("window vanishes on the sample grid".into()));
    }
    let x: Vec<Complex64> = samples.iter().zip(&w).map(|(f, w)| f * *w).collect();
    let mut buf = x.clone();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    // Bin k carries sum_j x_j exp(-2 pi i j k / n), i.e. v_k = -2 pi k / (n ds).
    let bin_width = 2.0 * PI / record;
    let signed = |k: usize| if k <= n / 2 { k as i64 } else { k as i64 - n as i64 };
    let bin_v = |k: i64| -(k as f64) * bin_width;
    let mag = |k: i64| buf[k.rem_euclid(n as i64) as usize].norm();

    let dtft = |v: f64| -> Complex64 {
        neumaier_sum_complex(x.iter().enumerate().map(|(j, xj)| xj * Complex64::from_polar(1.0, v * s_at(j)))) * ds
            / gain
    };

    let mut lines = Vec::new();
    let mut bin_frequencies = Vec::new();
    for k in -probe.n_max..=probe.n_max {
        let target = probe.v0 + k as f64 * probe.omega;
        let mut kb = (-target / bin_width).round() as i64;
        for cand in [kb - 1, kb + 1] {
            if mag(cand) > mag(kb) {
                kb = cand;
            }
        }
        let (l, c, r) = (mag(kb - 1), mag(kb), mag(kb + 1));
        let delta = if l > 0.0 && c > 0.0 && r > 0.0 {
            let (ll, lc, lr) = (l.ln(), c.ln(), r.ln());
            let den = ll - 2.0 * lc + lr;
            if den < 0.0 {
                (0.5 * (ll - lr) / den).clamp(-0.5, 0.5)
            } else {
                0.0
            }
        } else {
            0.0
        };
        let v = -(kb as f64 + delta) * bin_width;
        bin_frequencies.push(bin_v(kb));
        lines.push(SpectrumLine { n: k, v, amplitude: dtft(v) });
    }

    let scale = ds / gain;
    let mut bins: Vec<(f64, f64)> = (0..n).map(|k| (bin_v(signed(k)), buf[k].norm() * scale)).collect();
    bins.sort_by(|a, b| a.0.total_cmp(&b.0));
    Ok(FftSpectrum { lines, bin_frequencies, bin_width, bins })
}

/// Quadrature grid for windowed transforms: Gauss-Legendre panels of
/// order 32 no wider than `2 pi / (8 f_max)` and twice the window scale.
fn transform_grid(window: &WindowFunction, f_max: f64) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = window.support();
    let width = (2.0 * PI / (8.0 * f_max.max(1e-3))).min(2.0 * window.scale());
    let panels = ((hi - lo) / width).ceil().max(1.0) as usize;
    composite_gauss_legendre(lo, hi, panels, 32)
}

fn max_rate(mode: &ModeParams, pot: &PlaneWavePotential, window: &WindowFunction) -> Result<f64> {
    let (lo, hi) = window.support();
    let q = mode.phase_query();
    let mut best: f64 = 0.0;
    for i in 0..=256 {
        let s = lo + (hi - lo) * i as f64 / 256.0;
        best = best.max(phase_integrand(pot, &q, s)?);
    }
    Ok(best / (4.0 * mode.u.abs()))
}

/// `F(v) = int f(s) exp(-i Phi(0, s) / 4u) exp(i v s) ds` at every `v`.
pub fn windowed_phase_transform(
    mode: &ModeParams,
    pot: &PlaneWavePotential,
    window: &WindowFunction,
    v_grid: &[f64],
) -> Result<Vec<Complex64>> {
    mode.validate()?;
    window.validate()?;
    if v_grid.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("v grid must be finite".into()));
    }
    let v_max = v_grid.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let f_max = v_max.max(max_rate(mode, pot, window)?);
    let (nodes, weights) = transform_grid(window, f_max);
    let q = mode.phase_query();
    let g: Vec<Complex64> = nodes
        .iter()
        .zip(&weights)
        .map(|(&s, &w)| {
            let phi = phase(pot, &q, 0.0, s)?;
            Ok(Complex64::from_polar(w * window.eval(s), -phi / (4.0 * mode.u)))
        })
        .collect::<Result<_>>()?;
    Ok(v_grid
        .par_iter()
        .map(|&v| neumaier_sum_complex(g.iter().zip(&nodes).map(|(gj, &s)| gj * Complex64::from_polar(1.0, v * s))))
        .collect())
}

/// Plancherel comparison for [`windowed_phase_transform`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlancherelReport {
    /// Trapezoid value of `int |F|^2 dv` over the v grid.
    pub transform_norm: f64,
    /// `2 pi int |f|^2 ds`.
    pub signal_norm: f64,
    pub relative_error: f64,
}

/// `int |F|^2 dv` on `[v_lo, v_hi]` (`n_v` trapezoid points) against `2 pi int |f|^2 ds`.
pub fn plancherel_check(
    mode: &ModeParams,
    pot: &PlaneWavePotential,
    window: &WindowFunction,
    v_lo: f64,
    v_hi: f64,
    n_v: usize,
) -> Result<PlancherelReport> {
    let (v, wv) = trapezoid(v_lo, v_hi, n_v)?;
    let f = windowed_phase_transform(mode, pot, window, &v)?;
    let transform_norm = neumaier_sum(f.iter().zip(&wv).map(|(x, w)| x.norm_sqr() * w));
    let (nodes, weights) = transform_grid(window, 1.0);
    let signal_norm = 2.0 * PI * neumaier_sum(nodes.iter().zip(&weights).map(|(&s, &w)| w * window.eval(s).powi(2)));
    Ok(PlancherelReport {
        transform_norm,
        signal_norm,
        relative_error: (transform_norm - signal_norm).abs() / signal_norm,
    })
}

/// Transform of a `u`-superposition,
/// `G(v) = sum_i w_i int f(s) exp(-i Phi(0, s) / 4u_i) exp(i v s) ds`,
/// with the other mode parameters shared.
pub fn smeared_phase_transform(
    base: &ModeParams,
    u_nodes: &[f64],
    u_weights: &[f64],
    pot: &PlaneWavePotential,
    window: &WindowFunction,
    v_grid: &[f64],
) -> Result<Vec<Complex64>> {
    if u_nodes.len() != u_weights.len() || u_nodes.is_empty() {
        return Err(Error::InvalidGrid("u nodes and weights must match and be non-empty".into()));
    }
    let modes: Vec<ModeParams> = u_nodes
        .iter()
        .map(|&u| ModeParams::new(base.k2, base.k3, u, base.m))
        .collect::<Result<_>>()?;
    window.validate()?;
    let v_max = v_grid.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    let mut f_max = v_max;
    for m in &modes {
        f_max = f_max.max(max_rate(m, pot, window)?);
    }
    let (nodes, weights) = transform_grid(window, f_max);
    let q = base.phase_query();
    let phis: Vec<f64> = nodes.iter().map(|&s| phase(pot, &q, 0.0, s)).collect::<Result<_>>()?;
    let g: Vec<Complex64> = nodes
        .iter()
        .enumerate()
        .map(|(j, &s)| {
            let fw = weights[j] * window.eval(s);
            neumaier_sum_complex(
                u_nodes
                    .iter()
                    .zip(u_weights)
                    .map(|(&u, &wu)| Complex64::from_polar(fw * wu, -phis[j] / (4.0 * u))),
            )
        })
        .collect();
    Ok(v_grid
        .par_iter()
        .map(|&v| neumaier_sum_complex(g.iter().zip(&nodes).map(|(gj, &s)| gj * Complex64::from_polar(1.0, v * s))))
        .collect())
}

/// `u`-nodes with uniform spacing in the frequency `w = 1 / (4|u|)` on
/// `[w_lo, w_hi]`, `u < 0`, and trapezoid weights for `du = dw / (4 w^2)`.
/// Such grids resolve the approach `u -> 0-` where the phase oscillates fastest.
pub fn inverse_u_grid(w_lo: f64, w_hi: f64, n: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    if !(w_lo > 0.0) {
        return Err(Error::InvalidGrid(format!("frequency grid must start above zero, got {w_lo}")));
    }
    let (w, dw) = trapezoid(w_lo, w_hi, n)?;
    let u = w.iter().map(|&w| -1.0 / (4.0 * w)).collect();
    let du = w.iter().zip(&dw).map(|(&w, &d)| d / (4.0 * w * w)).collect();
    Ok((u, du))
}

/// Decay orders of `|G(v)|` on `[v_lo, v_hi]` and on its mirror image.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AsymmetryReport {
    pub positive: DecayFit,
    pub negative: DecayFit,
    /// `positive.order - negative.order`.
    pub asymmetry: f64,
}

/// Fits the decay of a smeared transform for `v -> +inf` and `v -> -inf`.
pub fn frequency_asymmetry(
    base: &ModeParams,
    u_nodes: &[f64],
    u_weights: &[f64],
    pot: &PlaneWavePotential,
    window: &WindowFunction,
    v_lo: f64,
    v_hi: f64,
    n_v: usize,
) -> Result<AsymmetryReport> {
    if !(v_lo > 0.0) || !(v_hi > v_lo) || n_v < 8 {
        return Err(Error::DegenerateFit("need 0 < v_lo < v_hi and at least 8 points".into()));
    }
    let ratio = (v_hi / v_lo).powf(1.0 / (n_v - 1) as f64);
    let pos: Vec<f64> = (0..n_v).map(|i| v_lo * ratio.powi(i as i32)).collect();
    let grid: Vec<f64> = pos.iter().copied().chain(pos.iter().map(|v| -v)).collect();
    let g = smeared_phase_transform(base, u_nodes, u_weights, pot, window, &grid)?;
    let side = |offset: usize| -> Result<DecayFit> {
        let pts: Vec<(f64, f64)> = (0..n_v).map(|i| (pos[i], g[offset + i].norm())).collect();
        decay_order_fit(&pts, None)
    };
    let positive = side(0)?;
    let negative = side(n_v)?;
    let asymmetry = positive.order - negative.order;
    Ok(AsymmetryReport { positive, negative, asymmetry })
}

/// Least-squares fit of `|value| ~ C x^{-N}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Fitted order `N` over the whole range.
    pub order: f64,
    /// Root-mean-square residual of the fit in `log |value|`.
    pub residual: f64,
    /// Orders fitted separately on the lower and upper halves of the samples.
    pub lower_order: f64,
    pub upper_order: f64,
    /// The local order keeps growing with `x`: faster than any fixed power.
    pub superpolynomial: bool,
    pub samples: usize,
}

fn slope_fit(pts: &[(f64, f64)]) -> Result<(f64, f64)> {
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 1e-24) {
        return Err(Error::DegenerateFit("sample abscissae do not span a range".into()));
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let rms = (pts.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum::<f64>() / n).sqrt();
    Ok((slope, rms))
}

/// Fits `log |value| = c - N log x` on the samples with `x` inside `range`
/// (all samples when `None`). Needs at least 8 samples with `x > 0`.
pub fn decay_order_fit(samples: &[(f64, f64)], range: Option<(f64, f64)>) -> Result<DecayFit> {
    let mut pts: Vec<(f64, f64)> = Vec::with_capacity(samples.len());
    for &(x, y) in samples {
        if let Some((lo, hi)) = range {
            if x < lo || x > hi {
                continue;
            }
        }
        if !(x > 0.0) {
            return Err(Error::DegenerateFit(format!("abscissa {x} is not positive")));
        }
        if !(y > 0.0) || !y.is_finite() {
            return Err(Error::NonPositiveMagnitude(x));
        }
        pts.push((x.ln(), y.ln()));
    }
    if pts.len() < 8 {
        return Err(Error::DegenerateFit(format!("need at least 8 samples, got {}", pts.len())));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (slope, residual) = slope_fit(&pts)?;
    let half = pts.len() / 2;
    let lower = -slope_fit(&pts[..half])?.0;
    let upper = -slope_fit(&pts[pts.len() - half..])?.0;
    Ok(DecayFit {
        order: -slope,
        residual,
        lower_order: lower,
        upper_order: upper,
        superpolynomial: upper - lower > 0.5 + 0.2 * lower.abs(),
        samples: pts.len(),
    })
}

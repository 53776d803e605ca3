//! Green's functions of the separated Dirac system, the causal fundamental
//! solution and the fermionic projector in momentum space.
//!
//! Kernels are assembled from a scalar `a` and a matrix `b` as
//!
//! ```text
//! K = N- a + Pi- b + (1 / 2u) (Aslash(s) + m) (N+ b + Pi+ a)
//! ```
//!
//! Constants used by each operation:
//!
//! | quantity                     | prefactor                         |
//! |------------------------------|-----------------------------------|
//! | retarded / advanced `a`      | `-/+ i / (2 pi)^3`                |
//! | retarded / advanced `b`      | `-/+ (i / 4u) 2 / (2 pi)^3`       |
//! | delta term of `b`            | `(1 / 2u) 2 / (2 pi)^3 N+`        |
//! | causal kernel                | `(adv - ret) / (2 pi i)`          |
//! | projector `a`                | `1 / (2 pi)^4`                    |
//! | projector `b`                | `1 / (2u (2 pi)^4)`               |
//! | null scalar product          | `(2 pi)^4`                        |
//! | regulated spacetime pairing  | `4 pi^3 = (1/2) (2 pi)^3`         |
//! | smeared projector pairing    | `(2 pi)^6 / 4`                    |
//!
//! The step function takes the value `1/2` at the origin, so retarded and
//! advanced kernels are each discontinuous on the diagonal while their
//! difference is not.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{light_cone, spin_inner, transverse_slash, SpinMatrix, Spinor};
use crate::modes::{MassFamily, ModeParams};
use crate::potential::{phase, phase_integrand, PhaseQuery, PlaneWavePotential};
use crate::quadrature::{neumaier_sum_complex, trapezoid};
use crate::{Error, Result};

/// Retarded or advanced boundary condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Which {
    Retarded,
    Advanced,
}

/// Coefficients `(a, b)` of a Green's function kernel.
///
/// The distributional part `delta(s - s~) * delta_coefficient` of `b` is
/// carried symbolically and never sampled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreenAB {
    pub a: Complex64,
    pub b: SpinMatrix,
    pub delta_coefficient: SpinMatrix,
}

fn step(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        0.0
    } else {
        0.5
    }
}

fn two_pi() -> f64 {
    2.0 * PI
}

/// `exp(-i Phi(s~, s) / 4u)`.
fn propagation_phase(mode: &ModeParams, pot: &PlaneWavePotential, s: f64, s_tilde: f64) -> Result<Complex64> {
    let phi = phase(pot, &mode.phase_query(), s_tilde, s)?;
    Ok(Complex64::from_polar(1.0, -phi / (4.0 * mode.u)))
}

fn slash_plus_m(mode: &ModeParams, pot: &PlaneWavePotential, s: f64) -> Result<SpinMatrix> {
    let (a2, a3) = pot.components(s)?;
    Ok(transverse_slash(mode.k2, mode.k3, a2, a3) + SpinMatrix::identity().scale_real(mode.m))
}

/// Retarded or advanced `(a, b)` at `(s, s~)`.
pub fn green_ab(
    mode: &ModeParams,
    pot: &PlaneWavePotential,
    s: f64,
    s_tilde: f64,
    which: Which,
) -> Result<GreenAB> {
    mode.validate()?;
    let (theta, sign) = match which {
        Which::Retarded => (step(s - s_tilde), -1.0),
        Which::Advanced => (step(s_tilde - s), 1.0),
    };
    let delta_coefficient = light_cone().n_plus.scale_real(1.0 / (2.0 * mode.u) * 2.0 / two_pi().powi(3));
    if theta == 0.0 {
        return Ok(GreenAB { a: Complex64::new(0.0, 0.0), b: SpinMatrix::zero(), delta_coefficient });
    }
    let e = propagation_phase(mode, pot, s, s_tilde)?;
    let a = Complex64::new(0.0, sign / two_pi().powi(3)) * theta * e;
    let b_scale = Complex64::new(0.0, sign / (4.0 * mode.u) * 2.0 / two_pi().powi(3)) * theta * e;
    let b = slash_plus_m(mode, pot, s_tilde)?.scale(b_scale);
    Ok(GreenAB { a, b, delta_coefficient })
}

/// `N- a + Pi- b + (1 / 2u)(Aslash(s) + m)(N+ b + Pi+ a)`.
pub fn assemble_kernel(
    mode: &ModeParams,
    pot: &PlaneWavePotential,
    s: f64,
    a: Complex64,
    b: &SpinMatrix,
) -> Result<SpinMatrix> {
    let lc = light_cone();
    let c = slash_plus_m(mode, pot, s)?.scale_real(0.5 / mode.u);
    Ok(lc.n_minus.scale(a) + lc.pi_minus * *b + c * (lc.n_plus * *b + lc.pi_plus.scale(a)))
}

/// Regular part of a Green's kernel (the delta term excluded).
pub fn green_kernel(
    mode: &ModeParams,
    pot: &PlaneWavePotential,
    s: f64,
    s_tilde: f64,
    which: Which,
) -> Result<SpinMatrix> {
    let g = green_ab(mode, pot, s, s_tilde, which)?;
    assemble_kernel(mode, pot, s, g.a, &g.b)
}

/// Momentum-space kernel of the causal fundamental solution
/// `(advanced - retarded) / (2 pi i)`.
pub fn causal_fundamental_momentum(
    mode: &ModeParams,
    pot: &PlaneWavePotential,
    s: f64,
    s_tilde: f64,
) -> Result<SpinMatrix> {
    let adv = green_ab(mode, pot, s, s_tilde, Which::Advanced)?;
    let ret = green_ab(mode, pot, s, s_tilde, Which::Retarded)?;
    debug_assert_eq!(adv.delta_coefficient, ret.delta_coefficient);
    let inv = Complex64::new(0.0, -1.0 / two_pi());
    let a = (adv.a - ret.a) * inv;
    let b = (adv.b - ret.b).scale(inv);
    assemble_kernel(mode, pot, s, a, &b)
}

/// `d/ds` of [`causal_fundamental_momentum`].
pub fn causal_fundamental_derivative(
    mode: &ModeParams,
    pot: &PlaneWavePotential,
    s: f64,
    s_tilde: f64,
) -> Result<SpinMatrix> {
    mode.validate()?;
    let lc = light_cone();
    let e = propagation_phase(mode, pot, s, s_tilde)?;
    let a = e / two_pi().powi(4);
    let b = slash_plus_m(mode, pot, s_tilde)?.scale(e / (2.0 * mode.u * two_pi().powi(4)));
    let rate = Complex64::new(0.0, -phase_integrand(pot, &mode.phase_query(), s)? / (4.0 * mode.u));
    let da = a * rate;
    let db = b.scale(rate);
    let c = slash_plus_m(mode, pot, s)?.scale_real(0.5 / mode.u);
    let (d2, d3) = pot.derivatives(s)?;
    let dc = (lc.gamma[2].scale_real(d2) + lc.gamma[3].scale_real(d3)).scale_real(0.5 / mode.u);
    Ok(lc.n_minus.scale(da)
        + lc.pi_minus * db
        + dc * (lc.n_plus * b + lc.pi_plus.scale(a))
        + c * (lc.n_plus * db + lc.pi_plus.scale(da)))
}

/// Norm of `2i N+ K' + 2u N- K + (Aslash(s) - m) K` for the causal kernel,
/// i.e. the source-free separated Dirac system applied to its columns.
pub fn causal_residual(mode: &ModeParams, pot: &PlaneWavePotential, s: f64, s_tilde: f64) -> Result<f64> {
    let lc = light_cone();
    let k = causal_fundamental_momentum(mode, pot, s, s_tilde)?;
    let dk = causal_fundamental_derivative(mode, pot, s, s_tilde)?;
    let shifted = slash_plus_m(mode, pot, s)? - SpinMatrix::identity().scale_real(2.0 * mode.m);
    let r = (lc.n_plus * dk).scale(Complex64::new(0.0, 2.0))
        + (lc.n_minus * k).scale_real(2.0 * mode.u)
        + shifted * k;
    Ok(r.norm())
}

/// `u / |u|`.
pub fn signature_sign(u: f64) -> Result<f64> {
    if u == 0.0 {
        return Err(Error::ZeroNullMomentum);
    }
    if u.is_nan() {
        return Err(Error::InvalidArgument("u is NaN".into()));
    }
    Ok(u.signum())
}

/// Projector coefficients `(a, b)` at `(s, s~)` for `u < 0`.
pub fn fp_coefficients(
    mode: &ModeParams,
    pot: &PlaneWavePotential,
    s: f64,
    s_tilde: f64,
) -> Result<(Complex64, SpinMatrix)> {
    mode.validate()?;
    if mode.u >= 0.0 {
        return Err(Error::NonNegativeNullMomentum(mode.u));
    }
    let e = propagation_phase(mode, pot, s, s_tilde)?;
    let a = e / two_pi().powi(4);
    let b = slash_plus_m(mode, pot, s_tilde)?.scale(e / (2.0 * mode.u * two_pi().powi(4)));
    Ok((a, b))
}

/// Momentum-space kernel `P_{k2,k3,u}(s, s~)` of the fermionic projector (`u < 0`).
pub fn fp_kernel_momentum(
    mode: &ModeParams,
    pot: &PlaneWavePotential,
    s: f64,
    s_tilde: f64,
) -> Result<SpinMatrix> {
    let (a, b) = fp_coefficients(mode, pot, s, s_tilde)?;
    assemble_kernel(mode, pot, s, a, &b)
}

/// An evaluated projector kernel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KernelSample {
    pub mode: ModeParams,
    pub s: f64,
    pub s_tilde: f64,
    pub value: SpinMatrix,
}

/// Evaluates [`fp_kernel_momentum`] for every mode and every `(s, s~)` pair,
/// in mode-major order.
pub fn sample_fp_kernel(
    modes: &[ModeParams],
    pot: &PlaneWavePotential,
    points: &[(f64, f64)],
) -> Result<Vec<KernelSample>> {
    let jobs: Vec<(ModeParams, f64, f64)> = modes
        .iter()
        .flat_map(|m| points.iter().map(move |&(s, t)| (*m, s, t)))
        .collect();
    jobs.par_iter()
        .map(|&(mode, s, s_tilde)| {
            let value = fp_kernel_momentum(&mode, pot, s, s_tilde)?;
            if !value.is_finite() {
                return Err(Error::InvalidArgument(format!("non-finite kernel at s = {s}, s~ = {s_tilde}")));
            }
            Ok(KernelSample { mode, s, s_tilde, value })
        })
        .collect()
}

/// Settings for [`mass_oscillation_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MassOscillationConfig {
    /// Gaussian regulator values; extrapolated polynomially to zero.
    pub epsilons: Vec<f64>,
    /// Half width of the `s` grid; `None` picks `7 / sqrt(min epsilon)`.
    pub s_half_width: Option<f64>,
    /// Step of the trapezoid `s` grid; `None` resolves the fastest mass beat.
    pub s_step: Option<f64>,
}

impl Default for MassOscillationConfig {
    fn default() -> Self {
        MassOscillationConfig { epsilons: vec![0.1, 0.05, 0.025], s_half_width: None, s_step: None }
    }
}

/// Both sides of the mass-oscillation identity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassOscillationReport {
    pub epsilons: Vec<f64>,
    /// Regulated spacetime pairing for each epsilon.
    pub lhs_regulated: Vec<Complex64>,
    /// Extrapolation of `lhs_regulated` to epsilon = 0.
    pub lhs: Complex64,
    /// Signature-weighted null-surface pairing.
    pub rhs: Complex64,
    pub abs_gap: f64,
    /// `abs_gap / |rhs|` (infinite when `rhs` vanishes and `lhs` does not).
    pub relative_gap: f64,
}

/// Polynomial extrapolation of `(x_i, y_i)` to `x = 0` (Neville).
pub fn extrapolate_to_zero(xs: &[f64], ys: &[Complex64]) -> Result<Complex64> {
    if xs.is_empty() || xs.len() != ys.len() {
        return Err(Error::InvalidArgument("extrapolation needs matching, non-empty samples".into()));
    }
    let mut p = ys.to_vec();
    let n = xs.len();
    for k in 1..n {
        for i in 0..n - k {
            let (xi, xk) = (xs[i], xs[i + k]);
            if xi == xk {
                return Err(Error::InvalidArgument("extrapolation nodes must be distinct".into()));
            }
            p[i] = (p[i + 1] * xi - p[i] * xk) / (xi - xk);
        }
    }
    Ok(p[0])
}

/// Compares the regulated spacetime pairing `<p psi | p phi>` of two mass
/// families with `int dm (psi_m | S phi_m)` where `S` multiplies by `u / |u|`.
pub fn mass_oscillation_check(
    psi: &MassFamily,
    phi: &MassFamily,
    pot: &PlaneWavePotential,
    cfg: &MassOscillationConfig,
) -> Result<MassOscillationReport> {
    if !psi.same_grid(phi) {
        return Err(Error::GridMismatch("mass families must share mass and momentum grids".into()));
    }
    psi.check_smooth()?;
    phi.check_smooth()?;
    if cfg.epsilons.is_empty() || cfg.epsilons.iter().any(|&e| !(e > 0.0)) {
        return Err(Error::InvalidArgument("regulator values must be positive".into()));
    }

    let nodes = psi.packets()[0].nodes();
    let eps_min = cfg.epsilons.iter().copied().fold(f64::INFINITY, f64::min);
    let half = cfg.s_half_width.unwrap_or(7.0 / eps_min.sqrt());
    let (lo, hi) = psi.interval();
    let u_min = nodes.iter().map(|n| n.u.abs()).fold(f64::INFINITY, f64::min);
    let beat = (hi * hi - lo * lo) / (4.0 * u_min);
    let h = cfg.s_step.unwrap_or_else(|| 0.25f64.min(PI / (4.0 * beat)));
    let n_s = (2.0 * half / h).ceil() as usize + 1;
    let (s_nodes, s_weights) = trapezoid(-half, half, n_s)?;

    // Per s node: sum over momentum nodes of w * ≺p chi_psi | p chi_phi≻.
    let slices: Vec<Complex64> = s_nodes
        .par_iter()
        .map(|&s| -> Result<Complex64> {
            let a = psi.integrated_profiles(pot, s)?;
            let b = phi.integrated_profiles(pot, s)?;
            Ok(neumaier_sum_complex(
                a.iter().zip(&b).zip(nodes).map(|((x, y), n)| spin_inner(x, y) * n.quad_weight),
            ))
        })
        .collect::<Result<_>>()?;

    let pref = 4.0 * PI.powi(3);
    let lhs_regulated: Vec<Complex64> = cfg
        .epsilons
        .iter()
        .map(|&eps| {
            neumaier_sum_complex(
                slices
                    .iter()
                    .zip(s_nodes.iter().zip(&s_weights))
                    .map(|(v, (&s, &w))| *v * (w * (-eps * s * s).exp())),
            ) * pref
        })
        .collect();
    let lhs = extrapolate_to_zero(&cfg.epsilons, &lhs_regulated)?;

    let g0 = light_cone().gamma[0];
    let mut rhs_terms = Vec::with_capacity(psi.masses().len());
    for (i, (pa, pb)) in psi.packets().iter().zip(phi.packets()).enumerate() {
        let w = psi.mass_weights()[i] * psi.eta()[i] * phi.eta()[i];
        if w == 0.0 {
            continue;
        }
        let per_mass = neumaier_sum_complex(pa.nodes().iter().zip(pb.nodes()).map(|(x, y)| {
            let ax = x.chi0.chi0().scale(x.weight);
            let ay = y.chi0.chi0().scale(y.weight);
            spin_inner(&ax, &(g0 * ay)) * (x.quad_weight * x.u.signum())
        }));
        rhs_terms.push(per_mass * w);
    }
    let rhs = neumaier_sum_complex(rhs_terms) * two_pi().powi(4);
    let abs_gap = (lhs - rhs).norm();
    let relative_gap = if rhs.norm() > 0.0 {
        abs_gap / rhs.norm()
    } else if abs_gap == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(MassOscillationReport { epsilons: cfg.epsilons.clone(), lhs_regulated, lhs, rhs, abs_gap, relative_gap })
}

/// One `(u, k2, k3)` node of a smearing profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmearNode {
    pub k2: f64,
    pub k3: f64,
    pub u: f64,
    pub quad_weight: f64,
}

/// Momentum-space test profile `phi_hat(u, k2, k3; s)` sampled on an `s`
/// quadrature grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmearProfile {
    pub m: f64,
    pub nodes: Vec<SmearNode>,
    pub s_nodes: Vec<f64>,
    pub s_weights: Vec<f64>,
    /// `values[node][j]` is the profile at `s_nodes[j]`.
    pub values: Vec<Vec<Spinor>>,
}

impl SmearProfile {
    pub fn from_fn(
        m: f64,
        nodes: Vec<SmearNode>,
        s_nodes: Vec<f64>,
        s_weights: Vec<f64>,
        f: impl Fn(&SmearNode, f64) -> Spinor,
    ) -> Result<Self> {
        let values = nodes.iter().map(|n| s_nodes.iter().map(|&s| f(n, s)).collect()).collect();
        let p = SmearProfile { m, nodes, s_nodes, s_weights, values };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        PhaseQuery::new(0.0, 0.0, self.m)?;
        if self.s_nodes.len() != self.s_weights.len() || self.values.len() != self.nodes.len() {
            return Err(Error::InvalidGrid("profile arrays have inconsistent lengths".into()));
        }
        if self.values.iter().any(|v| v.len() != self.s_nodes.len()) {
            return Err(Error::InvalidGrid("profile values must cover every s node".into()));
        }
        for n in &self.nodes {
            if !(n.u < 0.0) {
                return Err(Error::NonNegativeNullMomentum(n.u));
            }
        }
        Ok(())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for row in &mut out.values {
            for v in row.iter_mut() {
                *v = v.scale(c);
            }
        }
        out
    }

    fn compatible(&self, other: &SmearProfile) -> bool {
        self.m == other.m
            && self.nodes == other.nodes
            && self.s_nodes == other.s_nodes
            && self.s_weights == other.s_weights
    }
}

/// Smeared pairing `<phi | P psi>` of two profiles through the projector kernel,
/// `(2 pi)^6 / 4 sum_nodes w int int ≺phi(s)| P(s, s~) psi(s~)≻ ds ds~`.
///
/// The kernel separates as `e(s) e(s~)^* [X(s) + Y(s) B(s~)]`, which reduces
/// the double `s` sum to two single sums per node.
pub fn fp_pair_smeared(phi: &SmearProfile, psi: &SmearProfile, pot: &PlaneWavePotential) -> Result<Complex64> {
    phi.validate()?;
    psi.validate()?;
    if !phi.compatible(psi) {
        return Err(Error::GridMismatch("profiles must share mass, momentum nodes and s grid".into()));
    }
    let lc = light_cone();
    let terms: Vec<Complex64> = phi
        .nodes
        .par_iter()
        .enumerate()
        .map(|(i, node)| -> Result<Complex64> {
            let mode = ModeParams::new(node.k2, node.k3, node.u, phi.m)?;
            let q = mode.phase_query();
            let inv2u = 0.5 / mode.u;
            let mut zeta = Vec::with_capacity(phi.s_nodes.len());
            let mut cmat = Vec::with_capacity(phi.s_nodes.len());
            for &s in &phi.s_nodes {
                zeta.push(phase(pot, &q, 0.0, s)?);
                cmat.push(slash_plus_m(&mode, pot, s)?.scale_real(inv2u));
            }
            let carrier = |j: usize| Complex64::from_polar(1.0, -zeta[j] / (4.0 * mode.u));
            let mut v0 = [Complex64::new(0.0, 0.0); 4];
            let mut v1 = [Complex64::new(0.0, 0.0); 4];
            for c in 0..4 {
                v0[c] = neumaier_sum_complex(
                    (0..psi.s_nodes.len()).map(|j| psi.values[i][j][c] * carrier(j).conj() * psi.s_weights[j]),
                );
                v1[c] = neumaier_sum_complex((0..psi.s_nodes.len()).map(|j| {
                    (cmat[j] * psi.values[i][j])[c] * carrier(j).conj() * psi.s_weights[j]
                }));
            }
            let (v0, v1) = (Spinor(v0), Spinor(v1));
            let total = neumaier_sum_complex((0..phi.s_nodes.len()).map(|j| {
                let x = lc.n_minus * v0 + cmat[j] * (lc.pi_plus * v0);
                let y = lc.pi_minus * v1 + cmat[j] * (lc.n_plus * v1);
                spin_inner(&phi.values[i][j], &(x + y)) * carrier(j) * phi.s_weights[j]
            }));
            Ok(total * (node.quad_weight / two_pi().powi(4)))
        })
        .collect::<Result<_>>()?;
    Ok(neumaier_sum_complex(terms) * (two_pi().powi(6) / 4.0))
}

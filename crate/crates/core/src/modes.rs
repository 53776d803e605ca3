//! Exact separated modes in a plane wave, wavepackets built from them and the
//! scalar products evaluated on null surfaces `s = const`.
//!
//! A mode is `exp(-i k2 y - i k3 z) exp(-i u l) chi(s)` where the `Pi-`
//! component of `chi` is a pure phase times its value at `s = 0`,
//!
//! ```text
//! Pi- chi(s) = exp(-i Phi(0, s) / (4u)) chi0,
//! Pi+ chi(s) = -(1 / 2u) N+ (Aslash(s) - m) Pi- chi(s).
//! ```

use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clifford::{light_cone, spin_inner, transverse_slash, SpinMatrix, Spinor};
use crate::potential::{phase, phase_integrand, PhaseQuery, PlaneWavePotential, PotentialSpec};
use crate::quadrature::neumaier_sum_complex;
use crate::spectral::{decay_order_fit, DecayFit};
use crate::{Error, Result};

/// Tolerance for membership in the range of `Pi-`, relative to the spinor norm.
pub const PI_MINUS_TOL: f64 = 1e-12;

/// Separation constants of a single mode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeParams {
    pub k2: f64,
    pub k3: f64,
    pub u: f64,
    pub m: f64,
}

impl ModeParams {
    pub fn new(k2: f64, k3: f64, u: f64, m: f64) -> Result<Self> {
        let p = ModeParams { k2, k3, u, m };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if self.u == 0.0 {
            return Err(Error::ZeroNullMomentum);
        }
        if !self.u.is_finite() {
            return Err(Error::InvalidArgument(format!("u must be finite, got {}", self.u)));
        }
        PhaseQuery::new(self.k2, self.k3, self.m)?;
        Ok(())
    }

    pub fn phase_query(&self) -> PhaseQuery {
        PhaseQuery { k2: self.k2, k3: self.k3, m: self.m }
    }

    /// Same transverse and null momenta, different mass.
    pub fn with_mass(&self, m: f64) -> Result<Self> {
        ModeParams::new(self.k2, self.k3, self.u, m)
    }
}

/// Initial data `Pi- chi(0)` on the reference surface `s = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Spinor", into = "Spinor")]
pub struct ModeAmplitude {
    chi0: Spinor,
}

impl ModeAmplitude {
    pub fn new(chi0: Spinor) -> Result<Self> {
        check_pi_minus(&chi0)?;
        Ok(ModeAmplitude { chi0 })
    }

    /// `c0 b0 + c1 b1` in the basis returned by [`crate::clifford::pi_minus_basis`].
    pub fn from_components(c: [Complex64; 2]) -> Self {
        let [b0, b1] = crate::clifford::pi_minus_basis();
        ModeAmplitude { chi0: b0.scale(c[0]) + b1.scale(c[1]) }
    }

    pub fn chi0(&self) -> Spinor {
        self.chi0
    }
}

impl TryFrom<Spinor> for ModeAmplitude {
    type Error = Error;
    fn try_from(s: Spinor) -> Result<Self> {
        ModeAmplitude::new(s)
    }
}

impl From<ModeAmplitude> for Spinor {
    fn from(a: ModeAmplitude) -> Spinor {
        a.chi0
    }
}

fn check_pi_minus(psi: &Spinor) -> Result<()> {
    let defect = (light_cone().pi_minus * *psi - *psi).norm();
    if defect > PI_MINUS_TOL * psi.norm().max(1.0) {
        return Err(Error::NotInPiMinusRange(defect));
    }
    Ok(())
}

/// A spacetime point in null coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullPoint {
    pub s: f64,
    pub l: f64,
    pub y: f64,
    pub z: f64,
}

impl NullPoint {
    pub fn new(s: f64, l: f64, y: f64, z: f64) -> Self {
        NullPoint { s, l, y, z }
    }

    /// `(t, x, y, z)` with `t = (s + l) / 2`, `x = (s - l) / 2`.
    pub fn cartesian(&self) -> [f64; 4] {
        [0.5 * (self.s + self.l), 0.5 * (self.s - self.l), self.y, self.z]
    }

    pub fn from_cartesian(x: [f64; 4]) -> Self {
        NullPoint { s: x[0] + x[1], l: x[0] - x[1], y: x[2], z: x[3] }
    }
}

fn evolution_factor(phi: f64, u: f64) -> Complex64 {
    Complex64::from_polar(1.0, -phi / (4.0 * u))
}

/// `Pi- chi(s)` from its value at `s = 0`.
pub fn evolve_pi_minus(
    amp: &ModeAmplitude,
    mode: &ModeParams,
    pot: &PlaneWavePotential,
    s: f64,
) -> Result<Spinor> {
    mode.validate()?;
    let phi = phase(pot, &mode.phase_query(), 0.0, s)?;
    Ok(amp.chi0.scale(evolution_factor(phi, mode.u)))
}

/// Transports `Pi- chi` known at `s_from` to `s_to`.
pub fn evolve_between(
    pi_minus_chi: &Spinor,
    mode: &ModeParams,
    pot: &PlaneWavePotential,
    s_from: f64,
    s_to: f64,
) -> Result<Spinor> {
    mode.validate()?;
    let phi = phase(pot, &mode.phase_query(), s_from, s_to)?;
    Ok(pi_minus_chi.scale(evolution_factor(phi, mode.u)))
}

/// `chi(s) = Pi- chi + Pi+ chi` with `Pi+ chi` fixed by the constraint
/// `2u N- chi + (Aslash - m) Pi- chi = 0`.
pub fn reconstruct_full(
    pi_minus_chi: &Spinor,
    mode: &ModeParams,
    pot: &PlaneWavePotential,
    s: f64,
) -> Result<Spinor> {
    mode.validate()?;
    check_pi_minus(pi_minus_chi)?;
    let slash = slash_at(mode, pot, s)?;
    Ok(complete(pi_minus_chi, &slash, mode))
}

fn complete(pm: &Spinor, slash: &SpinMatrix, mode: &ModeParams) -> Spinor {
    let lc = light_cone();
    let shifted = *slash - SpinMatrix::identity().scale_real(mode.m);
    let plus = (lc.n_plus * (shifted * *pm)).scale(Complex64::new(-0.5 / mode.u, 0.0));
    *pm + plus
}

fn slash_at(mode: &ModeParams, pot: &PlaneWavePotential, s: f64) -> Result<SpinMatrix> {
    let (a2, a3) = pot.components(s)?;
    Ok(transverse_slash(mode.k2, mode.k3, a2, a3))
}

fn plane_factor(mode: &ModeParams, p: &NullPoint) -> Complex64 {
    Complex64::from_polar(1.0, -mode.k2 * p.y - mode.k3 * p.z - mode.u * p.l)
}

/// The full spinor field of one mode at a point.
pub fn mode_wavefunction(
    amp: &ModeAmplitude,
    mode: &ModeParams,
    pot: &PlaneWavePotential,
    point: &NullPoint,
) -> Result<Spinor> {
    let pm = evolve_pi_minus(amp, mode, pot, point.s)?;
    let chi = reconstruct_full(&pm, mode, pot, point.s)?;
    Ok(chi.scale(plane_factor(mode, point)))
}

/// `|(i gamma^j d_j + gamma^2 A2 + gamma^3 A3 - m) psi|` at a point, using
/// analytic derivatives of the closed-form mode.
///
/// In separated form the operator acting on `chi` reads
/// `2i N+ chi' + 2u N- chi + (Aslash - m) chi`.
pub fn dirac_residual(
    amp: &ModeAmplitude,
    mode: &ModeParams,
    pot: &PlaneWavePotential,
    point: &NullPoint,
) -> Result<f64> {
    let lc = light_cone();
    let s = point.s;
    let pm = evolve_pi_minus(amp, mode, pot, s)?;
    let slash = slash_at(mode, pot, s)?;
    let chi = complete(&pm, &slash, mode);

    let q = phase_integrand(pot, &mode.phase_query(), s)?;
    let dpm = pm.scale(Complex64::new(0.0, -q / (4.0 * mode.u)));
    let (da2, da3) = pot.derivatives(s)?;
    let dslash = lc.gamma[2].scale_real(da2) + lc.gamma[3].scale_real(da3);
    let shifted = slash - SpinMatrix::identity().scale_real(mode.m);
    let dplus = (lc.n_plus * (dslash * pm + shifted * dpm)).scale(Complex64::new(-0.5 / mode.u, 0.0));
    let dchi = dpm + dplus;

    let r = (lc.n_plus * dchi).scale(Complex64::new(0.0, 2.0))
        + (lc.n_minus * chi).scale(Complex64::new(2.0 * mode.u, 0.0))
        + shifted * chi;
    Ok(r.scale(plane_factor(mode, point)).norm())
}

/// Central-difference stencil for [`dirac_residual_fd`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stencil {
    /// Three points, error `O(h^2)`.
    Second,
    /// Five points, error `O(h^4)`.
    Fourth,
}

/// Same residual with central differences of step `h` in `(t, x, y, z)`.
/// Independent of the analytic derivative: it only samples the mode.
pub fn dirac_residual_fd(
    amp: &ModeAmplitude,
    mode: &ModeParams,
    pot: &PlaneWavePotential,
    point: &NullPoint,
    h: f64,
    stencil: Stencil,
) -> Result<f64> {
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {h}")));
    }
    let lc = light_cone();
    let x0 = point.cartesian();
    let at = |j: usize, k: f64| {
        let mut x = x0;
        x[j] += k * h;
        mode_wavefunction(amp, mode, pot, &NullPoint::from_cartesian(x))
    };
    let mut acc = Spinor::zero();
    for j in 0..4 {
        let d = match stencil {
            Stencil::Second => (at(j, 1.0)? - at(j, -1.0)?).scale(Complex64::new(0.0, 0.5 / h)),
            Stencil::Fourth => {
                let near = at(j, 1.0)? - at(j, -1.0)?;
                let far = at(j, 2.0)? - at(j, -2.0)?;
                (8.0 * near - far).scale(Complex64::new(0.0, 1.0 / (12.0 * h)))
            }
        };
        acc += lc.gamma[j] * d;
    }
    let psi = mode_wavefunction(amp, mode, pot, point)?;
    let (a2, a3) = pot.components(point.s)?;
    let field = lc.gamma[2].scale_real(a2) + lc.gamma[3].scale_real(a3)
        - SpinMatrix::identity().scale_real(mode.m);
    Ok((acc + field * psi).norm())
}

/// One grid node of a wavepacket.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PacketNode {
    pub k2: f64,
    pub k3: f64,
    pub u: f64,
    /// Quadrature weight of the `(u, k2, k3)` rule at this node.
    pub quad_weight: f64,
    pub weight: Complex64,
    pub chi0: ModeAmplitude,
}

/// A discrete superposition of modes of a common mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawPacket")]
pub struct WavePacket {
    m: f64,
    nodes: Vec<PacketNode>,
}

#[derive(Deserialize)]
struct RawPacket {
    m: f64,
    nodes: Vec<PacketNode>,
}

impl TryFrom<RawPacket> for WavePacket {
    type Error = Error;
    fn try_from(r: RawPacket) -> Result<Self> {
        WavePacket::new(r.m, r.nodes)
    }
}

impl WavePacket {
    pub fn new(m: f64, nodes: Vec<PacketNode>) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::NonPositiveMass(m));
        }
        let mut seen = std::collections::HashSet::new();
        for n in &nodes {
            ModeParams::new(n.k2, n.k3, n.u, m)?;
            if !n.quad_weight.is_finite() || !n.weight.re.is_finite() || !n.weight.im.is_finite() {
                return Err(Error::InvalidGrid("packet weights must be finite".into()));
            }
            if !seen.insert((n.k2.to_bits(), n.k3.to_bits(), n.u.to_bits())) {
                return Err(Error::InvalidGrid(format!(
                    "duplicate node (k2 = {}, k3 = {}, u = {})",
                    n.k2, n.k3, n.u
                )));
            }
        }
        Ok(WavePacket { m, nodes })
    }

    /// Tensor-product packet over `u_grid x k2_grid x k3_grid`, each given as
    /// `(nodes, quadrature weights)`. `weight` and `chi0` are evaluated per node.
    pub fn tensor(
        m: f64,
        u_grid: (&[f64], &[f64]),
        k2_grid: (&[f64], &[f64]),
        k3_grid: (&[f64], &[f64]),
        mut weight: impl FnMut(f64, f64, f64) -> Complex64,
        mut chi0: impl FnMut(f64, f64, f64) -> ModeAmplitude,
    ) -> Result<Self> {
        for (name, g) in [("u", u_grid), ("k2", k2_grid), ("k3", k3_grid)] {
            if g.0.len() != g.1.len() || g.0.is_empty() {
                return Err(Error::InvalidGrid(format!("{name} grid nodes and weights differ in length")));
            }
        }
        let mut nodes = Vec::with_capacity(u_grid.0.len() * k2_grid.0.len() * k3_grid.0.len());
        for (&u, &wu) in u_grid.0.iter().zip(u_grid.1) {
            for (&k2, &w2) in k2_grid.0.iter().zip(k2_grid.1) {
                for (&k3, &w3) in k3_grid.0.iter().zip(k3_grid.1) {
                    nodes.push(PacketNode {
                        k2,
                        k3,
                        u,
                        quad_weight: wu * w2 * w3,
                        weight: weight(u, k2, k3),
                        chi0: chi0(u, k2, k3),
                    });
                }
            }
        }
        WavePacket::new(m, nodes)
    }

    /// Packet over a uniform `u` grid on `[u_lo, u_hi]` at fixed `(k2, k3)`
    /// with weights `exp(-(u - center)^2 / 2 width^2)` times a bump vanishing
    /// at both ends, so the weights are smooth and compactly supported.
    #[allow(clippy::too_many_arguments)]
    pub fn smooth_in_u(
        m: f64,
        k2: f64,
        k3: f64,
        (u_lo, u_hi): (f64, f64),
        n: usize,
        center: f64,
        width: f64,
        amp: ModeAmplitude,
    ) -> Result<Self> {
        if !(u_hi < 0.0 || u_lo > 0.0) {
            return Err(Error::InvalidGrid(format!("u range [{u_lo}, {u_hi}] must exclude zero")));
        }
        let (u, w) = crate::quadrature::trapezoid(u_lo, u_hi, n)?;
        let mid = 0.5 * (u_lo + u_hi);
        let half = 0.5 * (u_hi - u_lo);
        let nodes = u
            .iter()
            .zip(&w)
            .map(|(&u, &qw)| {
                let g = (-0.5 * ((u - center) / width).powi(2)).exp() * bump((u - mid) / half);
                PacketNode { k2, k3, u, quad_weight: qw, weight: Complex64::new(g, 0.0), chi0: amp }
            })
            .collect();
        WavePacket::new(m, nodes)
    }

    /// A packet with one node of unit quadrature weight.
    pub fn single(mode: &ModeParams, amp: ModeAmplitude, weight: Complex64) -> Result<Self> {
        WavePacket::new(
            mode.m,
            vec![PacketNode { k2: mode.k2, k3: mode.k3, u: mode.u, quad_weight: 1.0, weight, chi0: amp }],
        )
    }

    pub fn mass(&self) -> f64 {
        self.m
    }

    pub fn nodes(&self) -> &[PacketNode] {
        &self.nodes
    }

    pub fn mode(&self, i: usize) -> ModeParams {
        let n = &self.nodes[i];
        ModeParams { k2: n.k2, k3: n.k3, u: n.u, m: self.m }
    }

    /// Same grid, weights and initial data at another mass.
    pub fn with_mass(&self, m: f64) -> Result<Self> {
        WavePacket::new(m, self.nodes.clone())
    }

    /// Multiplies every node weight by `c`.
    pub fn scaled(&self, c: Complex64) -> Self {
        let mut out = self.clone();
        for n in &mut out.nodes {
            n.weight *= c;
        }
        out
    }

    /// True when both packets use the same `(u, k2, k3)` nodes and quadrature weights.
    pub fn same_grid(&self, other: &WavePacket) -> bool {
        self.nodes.len() == other.nodes.len()
            && self.nodes.iter().zip(&other.nodes).all(|(a, b)| {
                a.k2 == b.k2 && a.k3 == b.k3 && a.u == b.u && a.quad_weight == b.quad_weight
            })
    }

    /// `Phi(0, s)` at every node; nodes sharing `(k2, k3)` share the phase.
    pub fn node_phases(&self, pot: &PlaneWavePotential, s: f64) -> Result<Vec<f64>> {
        let mut cache: HashMap<(u64, u64), f64> = HashMap::new();
        self.nodes
            .iter()
            .map(|n| {
                let key = (n.k2.to_bits(), n.k3.to_bits());
                if let Some(&v) = cache.get(&key) {
                    return Ok(v);
                }
                let v = phase(pot, &PhaseQuery { k2: n.k2, k3: n.k3, m: self.m }, 0.0, s)?;
                cache.insert(key, v);
                Ok(v)
            })
            .collect()
    }

    /// `weight * Pi- chi(s)` per node (the transverse and `l` plane waves omitted).
    pub fn pi_minus_profiles(&self, pot: &PlaneWavePotential, s: f64) -> Result<Vec<Spinor>> {
        let phases = self.node_phases(pot, s)?;
        Ok(self
            .nodes
            .iter()
            .zip(&phases)
            .map(|(n, &phi)| n.chi0.chi0.scale(n.weight * evolution_factor(phi, n.u)))
            .collect())
    }

    /// `weight * chi(s)` per node.
    pub fn full_profiles(&self, pot: &PlaneWavePotential, s: f64) -> Result<Vec<Spinor>> {
        let pms = self.pi_minus_profiles(pot, s)?;
        let (a2, a3) = pot.components(s)?;
        Ok(self
            .nodes
            .iter()
            .zip(&pms)
            .map(|(n, pm)| {
                let mode = ModeParams { k2: n.k2, k3: n.k3, u: n.u, m: self.m };
                complete(pm, &transverse_slash(n.k2, n.k3, a2, a3), &mode)
            })
            .collect())
    }

    /// `Pi- psi(s, l, y, z)`: quadrature sum over the nodes.
    pub fn pi_minus_at(&self, pot: &PlaneWavePotential, point: &NullPoint) -> Result<Spinor> {
        let pms = self.pi_minus_profiles(pot, point.s)?;
        Ok(self.superpose(&pms, point))
    }

    /// `psi(s, l, y, z)`.
    pub fn wavefunction_at(&self, pot: &PlaneWavePotential, point: &NullPoint) -> Result<Spinor> {
        let chis = self.full_profiles(pot, point.s)?;
        Ok(self.superpose(&chis, point))
    }

    fn superpose(&self, profiles: &[Spinor], point: &NullPoint) -> Spinor {
        let mut out = Spinor::zero();
        for c in 0..4 {
            out.0[c] = neumaier_sum_complex(self.nodes.iter().zip(profiles).map(|(n, p)| {
                let mode = ModeParams { k2: n.k2, k3: n.k3, u: n.u, m: self.m };
                p.0[c] * plane_factor(&mode, point) * n.quad_weight
            }));
        }
        out
    }
}

/// A family of packets over a mass interval `I = (mL, mR)` with a smooth
/// weight `eta(m)`, representing `p psi = int_I eta(m) psi_m dm`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawFamily")]
pub struct MassFamily {
    interval: (f64, f64),
    masses: Vec<f64>,
    mass_weights: Vec<f64>,
    eta: Vec<f64>,
    packets: Vec<WavePacket>,
}

#[derive(Deserialize)]
struct RawFamily {
    interval: (f64, f64),
    masses: Vec<f64>,
    mass_weights: Vec<f64>,
    eta: Vec<f64>,
    packets: Vec<WavePacket>,
}

impl TryFrom<RawFamily> for MassFamily {
    type Error = Error;
    fn try_from(r: RawFamily) -> Result<Self> {
        MassFamily::new(r.interval, r.masses, r.mass_weights, r.eta, r.packets)
    }
}

/// Standard bump `exp(-1 / (1 - t^2))` on `(-1, 1)`, zero outside.
pub fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

impl MassFamily {
    pub fn new(
        interval: (f64, f64),
        masses: Vec<f64>,
        mass_weights: Vec<f64>,
        eta: Vec<f64>,
        packets: Vec<WavePacket>,
    ) -> Result<Self> {
        let (lo, hi) = interval;
        if !(lo > 0.0) || !(hi > lo) {
            return Err(Error::InvalidGrid(format!("mass interval ({lo}, {hi}) needs 0 < mL < mR")));
        }
        let n = masses.len();
        if n < 2 || mass_weights.len() != n || eta.len() != n || packets.len() != n {
            return Err(Error::InvalidGrid("mass grid, weights, eta and packets must have equal length >= 2".into()));
        }
        if masses.windows(2).any(|w| !(w[1] > w[0])) || masses[0] < lo || masses[n - 1] > hi {
            return Err(Error::InvalidGrid("masses must increase strictly inside the interval".into()));
        }
        for (p, &m) in packets.iter().zip(&masses) {
            if p.m != m {
                return Err(Error::GridMismatch(format!("packet mass {} differs from grid mass {m}", p.m)));
            }
            if !p.same_grid(&packets[0]) {
                return Err(Error::GridMismatch("packets of one family must share the (u, k2, k3) grid".into()));
            }
        }
        Ok(MassFamily { interval, masses, mass_weights, eta, packets })
    }

    /// Trapezoid mass grid of `n` points spanning the closed interval, weight
    /// `eta` given by the standard bump rescaled to the interval, and the same
    /// packet data (built at the first mass) copied to every mass.
    pub fn with_bump(interval: (f64, f64), n: usize, template: &WavePacket) -> Result<Self> {
        let (lo, hi) = interval;
        let (masses, weights) = crate::quadrature::trapezoid(lo, hi, n)?;
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let eta = masses.iter().map(|&m| bump((m - mid) / half)).collect();
        let packets = masses.iter().map(|&m| template.with_mass(m)).collect::<Result<Vec<_>>>()?;
        MassFamily::new(interval, masses, weights, eta, packets)
    }

    /// Like [`MassFamily::with_bump`] with the bump supported on `support`,
    /// a sub-interval of `interval`.
    pub fn with_bump_on(
        interval: (f64, f64),
        support: (f64, f64),
        n: usize,
        template: &WavePacket,
    ) -> Result<Self> {
        let mut fam = MassFamily::with_bump(interval, n, template)?;
        let mid = 0.5 * (support.0 + support.1);
        let half = 0.5 * (support.1 - support.0);
        fam.eta = fam.masses.iter().map(|&m| bump((m - mid) / half)).collect();
        Ok(fam)
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass_weights(&self) -> &[f64] {
        &self.mass_weights
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    pub fn packets(&self) -> &[WavePacket] {
        &self.packets
    }

    /// Combined weight `eta(m) * dm` per mass node.
    pub fn effective_weights(&self) -> Vec<f64> {
        self.eta.iter().zip(&self.mass_weights).map(|(e, w)| e * w).collect()
    }

    pub fn same_grid(&self, other: &MassFamily) -> bool {
        self.masses == other.masses
            && self.mass_weights == other.mass_weights
            && self.packets[0].same_grid(&other.packets[0])
    }

    /// Flags weights that do not vanish smoothly at the interval ends.
    pub fn check_smooth(&self) -> Result<()> {
        let max = self.eta.iter().fold(0.0f64, |a, &b| a.max(b.abs()));
        if max == 0.0 {
            return Err(Error::NonSmoothMassWeight("weight vanishes identically".into()));
        }
        let n = self.eta.len();
        let ends = self.eta[0].abs().max(self.eta[n - 1].abs());
        if ends > 1e-8 * max {
            return Err(Error::NonSmoothMassWeight(format!(
                "weight does not vanish at the interval ends ({ends:e} vs max {max:e})"
            )));
        }
        // every edge of the support must rise gradually from zero
        let floor = 1e-8 * max;
        for w in self.eta.windows(2) {
            let (a, b) = (w[0].abs(), w[1].abs());
            let edge = if a <= floor { b } else if b <= floor { a } else { 0.0 };
            if edge > 0.25 * max {
                return Err(Error::NonSmoothMassWeight(format!(
                    "weight jumps at a support edge ({edge:e} vs max {max:e})"
                )));
            }
        }
        Ok(())
    }

    /// `weight * chi(s)` of `p psi` per `(u, k2, k3)` node: the mass-integrated profile.
    pub fn integrated_profiles(&self, pot: &PlaneWavePotential, s: f64) -> Result<Vec<Spinor>> {
        let w = self.effective_weights();
        let mut out = vec![Spinor::zero(); self.packets[0].nodes.len()];
        for (p, &wm) in self.packets.iter().zip(&w) {
            if wm == 0.0 {
                continue;
            }
            for (o, c) in out.iter_mut().zip(p.full_profiles(pot, s)?) {
                *o += c.scale(Complex64::new(wm, 0.0));
            }
        }
        Ok(out)
    }
}

/// `(2 pi)^4 sum_nodes w ≺Pi- chi_psi(s) | gamma^0 Pi- chi_phi(s)≻`, the
/// scalar product evaluated on the null surface at `s`.
pub fn null_scalar_product(
    psi: &WavePacket,
    phi: &WavePacket,
    pot: &PlaneWavePotential,
    s: f64,
) -> Result<Complex64> {
    if psi.m != phi.m || !psi.same_grid(phi) {
        return Err(Error::GridMismatch("packets must share the mass and the (u, k2, k3) grid".into()));
    }
    let a = psi.pi_minus_profiles(pot, s)?;
    let b = phi.pi_minus_profiles(pot, s)?;
    let g0 = light_cone().gamma[0];
    let terms: Vec<Complex64> = a
        .par_iter()
        .zip(b.par_iter())
        .zip(psi.nodes.par_iter())
        .map(|((x, y), n)| spin_inner(x, &(g0 * *y)) * n.quad_weight)
        .collect();
    Ok(neumaier_sum_complex(terms) * (2.0 * PI).powi(4))
}

/// Two modes that differ only in their masses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassPair {
    pub k2: f64,
    pub k3: f64,
    pub u: f64,
    pub m: f64,
    pub m_prime: f64,
    pub chi0: ModeAmplitude,
    pub chi0_prime: ModeAmplitude,
}

/// Both sides of `2u ≺chi^m(s)|chi^m'(s)≻ = (m + m') e^{i(m^2 - m'^2)s/4u} ≺Pi- chi^m(0)|gamma^0 Pi- chi^m'(0)≻`,
/// each from its own code path.
pub fn mass_pairing_identity(
    pair: &MassPair,
    pot: &PlaneWavePotential,
    s: f64,
) -> Result<(Complex64, Complex64)> {
    let a = ModeParams::new(pair.k2, pair.k3, pair.u, pair.m)?;
    let b = a.with_mass(pair.m_prime)?;
    let chi_a = reconstruct_full(&evolve_pi_minus(&pair.chi0, &a, pot, s)?, &a, pot, s)?;
    let chi_b = reconstruct_full(&evolve_pi_minus(&pair.chi0_prime, &b, pot, s)?, &b, pot, s)?;
    let lhs = spin_inner(&chi_a, &chi_b) * (2.0 * pair.u);

    let g0 = light_cone().gamma[0];
    let init = spin_inner(&pair.chi0.chi0, &(g0 * pair.chi0_prime.chi0));
    let osc = Complex64::from_polar(1.0, (pair.m * pair.m - pair.m_prime * pair.m_prime) * s / (4.0 * pair.u));
    let rhs = init * osc * (pair.m + pair.m_prime);
    Ok((lhs, rhs))
}

/// Tail fits of `|Pi- psi(s, l)|` at one value of `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayRow {
    pub s: f64,
    /// Fit over `l > 0`.
    pub forward: DecayFit,
    /// Fit over `l < 0`, in `|l|`.
    pub backward: DecayFit,
    /// `(l, |Pi- psi|)` samples.
    pub samples: Vec<(f64, f64)>,
}

/// Result of [`null_decay_scan`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayReport {
    pub rows: Vec<DecayRow>,
    /// Smallest fitted order over all `s` and both directions.
    pub min_order: f64,
    /// False when the packet does not decay in `l` (`min_order` below
    /// [`DECAY_FLAG_ORDER`]).
    pub decaying: bool,
}

/// Fitted orders below this value mark a packet as non-decaying.
pub const DECAY_FLAG_ORDER: f64 = 1.0;

/// Magnitudes below this floor are treated as exhausted and left out of fits.
const DECAY_FLOOR: f64 = 1e-300;

/// Evaluates `|Pi- psi(s, l, 0, 0)|` for every `s` and `l`, and fits
/// `|l|^{-N}` separately for positive and negative `l`.
pub fn null_decay_scan(
    packet: &WavePacket,
    pot: &PlaneWavePotential,
    s_values: &[f64],
    l_values: &[f64],
) -> Result<DecayReport> {
    if s_values.is_empty() {
        return Err(Error::InvalidGrid("decay scan needs at least one s value".into()));
    }
    let mut rows = Vec::with_capacity(s_values.len());
    for &s in s_values {
        let profiles = packet.pi_minus_profiles(pot, s)?;
        let samples: Vec<(f64, f64)> = l_values
            .par_iter()
            .map(|&l| (l, packet.superpose(&profiles, &NullPoint::new(s, l, 0.0, 0.0)).norm()))
            .collect();
        let side = |sign: f64| -> Result<DecayFit> {
            let pts: Vec<(f64, f64)> = samples
                .iter()
                .filter(|(l, v)| l * sign > 0.0 && *v > DECAY_FLOOR)
                .map(|&(l, v)| (l.abs(), v))
                .collect();
            decay_order_fit(&pts, None)
        };
        rows.push(DecayRow { s, forward: side(1.0)?, backward: side(-1.0)?, samples });
    }
    let min_order = rows
        .iter()
        .flat_map(|r| [r.forward.order, r.backward.order])
        .fold(f64::INFINITY, f64::min);
    Ok(DecayReport { rows, min_order, decaying: min_order >= DECAY_FLAG_ORDER })
}

/// JSON document pairing a packet with the potential it lives in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketDocument {
    pub potential: PotentialSpec,
    pub packet: WavePacket,
}

/// JSON document pairing a mass family with its potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MassFamilyDocument {
    pub potential: PotentialSpec,
    pub family: MassFamily,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amp() -> ModeAmplitude {
        ModeAmplitude::from_components([Complex64::new(0.6, 0.1), Complex64::new(-0.3, 0.7)])
    }

    #[test]
    fn evolution_example() {
        let mode = ModeParams::new(0.0, 0.0, -0.5, 1.0).unwrap();
        let a = ModeAmplitude::from_components([Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)]);
        let v = evolve_pi_minus(&a, &mode, &PlaneWavePotential::Zero, PI).unwrap();
        let ratio = v[0] / a.chi0()[0];
        assert!((ratio - Complex64::i()).norm() < 1e-15);
    }

    #[test]
    fn amplitude_rejects_pi_plus_content() {
        assert!(matches!(ModeAmplitude::new(Spinor::basis(0)), Err(Error::NotInPiMinusRange(_))));
    }

    #[test]
    fn zero_null_momentum_rejected() {
        assert!(matches!(ModeParams::new(0.0, 0.0, 0.0, 1.0), Err(Error::ZeroNullMomentum)));
    }

    #[test]
    fn zero_potential_completion() {
        let mode = ModeParams::new(0.0, 0.0, -0.7, 1.3).unwrap();
        let pm = amp().chi0();
        let chi = reconstruct_full(&pm, &mode, &PlaneWavePotential::Zero, 1.0).unwrap();
        let lc = light_cone();
        let expect = (lc.n_plus * pm).scale(Complex64::new(mode.m / (2.0 * mode.u), 0.0));
        assert!((chi - pm - expect).norm() < 1e-15);
    }

    #[test]
    fn analytic_and_fd_residuals() {
        let pot = PlaneWavePotential::harmonic(0.2, 1.0).unwrap();
        let mode = ModeParams::new(0.3, -0.1, -0.5, 1.0).unwrap();
        let p = NullPoint::new(0.7, 1.1, 0.2, -0.4);
        assert!(dirac_residual(&amp(), &mode, &pot, &p).unwrap() < 1e-14);
        let r1 = dirac_residual_fd(&amp(), &mode, &pot, &p, 1e-2, Stencil::Second).unwrap();
        let r2 = dirac_residual_fd(&amp(), &mode, &pot, &p, 5e-3, Stencil::Second).unwrap();
        assert!(r1 < 1e-3 && (r1 / r2 - 4.0).abs() < 0.2, "{r1} {r2}");
    }

    #[test]
    fn bump_weights_pass_smoothness_check() {
        let mode = ModeParams::new(0.0, 0.0, -0.5, 0.8).unwrap();
        let pk = WavePacket::single(&mode, amp(), Complex64::new(1.0, 0.0)).unwrap();
        let fam = MassFamily::with_bump((0.8, 1.2), 21, &pk).unwrap();
        fam.check_smooth().unwrap();
        let mut eta = fam.eta().to_vec();
        eta.iter_mut().for_each(|e| *e = 1.0);
        let flat = MassFamily::new(
            fam.interval(),
            fam.masses().to_vec(),
            fam.mass_weights().to_vec(),
            eta,
            fam.packets().to_vec(),
        )
        .unwrap();
        assert!(matches!(flat.check_smooth(), Err(Error::NonSmoothMassWeight(_))));
    }

    #[test]
    fn duplicate_nodes_rejected() {
        let n = PacketNode {
            k2: 0.0,
            k3: 0.0,
            u: -1.0,
            quad_weight: 1.0,
            weight: Complex64::new(1.0, 0.0),
            chi0: amp(),
        };
        assert!(WavePacket::new(1.0, vec![n, n]).is_err());
    }
}

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use volkov_fp_core::export::{kernel_csv, spectrum_csv, table_csv, transform_csv};
use volkov_fp_core::modes::{
    dirac_residual, dirac_residual_fd, mass_pairing_identity, mode_wavefunction, null_decay_scan,
    null_scalar_product, MassFamily, MassPair, ModeAmplitude, ModeParams, NullPoint, Stencil, WavePacket,
    DECAY_FLAG_ORDER,
};
use volkov_fp_core::potential::PlaneWavePotential;
use volkov_fp_core::projector::{
    causal_fundamental_momentum, fp_coefficients, mass_oscillation_check, sample_fp_kernel, signature_sign,
    MassOscillationConfig,
};
use volkov_fp_core::quadrature::trapezoid;
use volkov_fp_core::spectral::{
    decay_order_fit, frequency_asymmetry, harmonic_carrier, harmonic_sidebands_analytic, inverse_u_grid,
    phase_factor_samples, plancherel_check, spectrum_fft, windowed_phase_transform, LineProbe, WindowFunction,
};

use crate::config::{check, LoadedConfig};
use crate::summary::{Assertion, Comparison, Summary};
use crate::{Outcome, RunError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Scenario {
    DiracResidual,
    NullProductInvariance,
    MassPairing,
    MassOscillation,
    DecayScan,
    FpKernelExport,
    Sidebands,
    WavefrontProbe,
}

impl Scenario {
    pub const ALL: [Scenario; 8] = [
        Scenario::DiracResidual,
        Scenario::NullProductInvariance,
        Scenario::MassPairing,
        Scenario::MassOscillation,
        Scenario::DecayScan,
        Scenario::FpKernelExport,
        Scenario::Sidebands,
        Scenario::WavefrontProbe,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scenario::DiracResidual => "dirac-residual",
            Scenario::NullProductInvariance => "null-product-invariance",
            Scenario::MassPairing => "mass-pairing",
            Scenario::MassOscillation => "mass-oscillation",
            Scenario::DecayScan => "decay-scan",
            Scenario::FpKernelExport => "fp-kernel-export",
            Scenario::Sidebands => "sidebands",
            Scenario::WavefrontProbe => "wavefront-probe",
        }
    }

    pub fn anchor(self) -> &'static str {
        match self {
            Scenario::DiracResidual => "closed-form Volkov-type modes solve the Dirac equation in the plane wave",
            Scenario::NullProductInvariance => "null-surface scalar product of wave packets is independent of s",
            Scenario::MassPairing => "null pairing of two masses evolves by the mass-squared beat phase",
            Scenario::MassOscillation => "spacetime pairing of mass families equals the u-sign weighted null pairing",
            Scenario::DecayScan => "smooth wave packets decay rapidly along the null direction l",
            Scenario::FpKernelExport => "projector kernel equals minus sign(u) times the causal fundamental solution",
            Scenario::Sidebands => "harmonic wave splits each mode into Bessel sidebands at v0 + n Omega",
            Scenario::WavefrontProbe => "windowed phase factor decays rapidly for positive frequencies",
        }
    }
}

pub fn run(scenario: Scenario, cfg: &LoadedConfig) -> Result<Outcome, RunError> {
    let (assertions, metrics, files) = match scenario {
        Scenario::DiracResidual => dirac_residual_scenario(cfg)?,
        Scenario::NullProductInvariance => null_product_scenario(cfg)?,
        Scenario::MassPairing => mass_pairing_scenario(cfg)?,
        Scenario::MassOscillation => mass_oscillation_scenario(cfg)?,
        Scenario::DecayScan => decay_scan_scenario(cfg)?,
        Scenario::FpKernelExport => fp_kernel_scenario(cfg)?,
        Scenario::Sidebands => sidebands_scenario(cfg)?,
        Scenario::WavefrontProbe => wavefront_scenario(cfg)?,
    };
    let summary = Summary {
        scenario: scenario.name().to_string(),
        anchor: scenario.anchor().to_string(),
        config_sha256: cfg.hash.clone(),
        seed: cfg.config.seed,
        passed: assertions.iter().all(|a| a.passed),
        assertions,
        metrics,
        files: files.iter().map(|(n, _)| n.clone()).collect(),
    };
    Ok(Outcome { summary, files })
}

type Parts = (Vec<Assertion>, BTreeMap<String, f64>, Vec<(String, String)>);

fn metrics<const N: usize>(pairs: [(&str, f64); N]) -> BTreeMap<String, f64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn rng(cfg: &LoadedConfig) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(cfg.config.seed)
}

fn range(name: &str, r: [f64; 2]) -> Result<(), RunError> {
    check(r[0].is_finite() && r[1].is_finite() && r[0] <= r[1], || format!("{name} must be an ordered finite pair"))
}

fn random_amp(rng: &mut ChaCha8Rng) -> ModeAmplitude {
    ModeAmplitude::from_components([
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
        Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
    ])
}

fn max_of(xs: impl IntoIterator<Item = f64>) -> f64 {
    xs.into_iter().fold(0.0, f64::max)
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DiracResidualParams {
    pub n_modes: usize,
    pub k_max: f64,
    /// Range of `|u|`; the sign is drawn at random.
    pub u_abs: [f64; 2],
    pub mass: [f64; 2],
    /// Points are drawn from `[-extent, extent]` in `s` and `l`.
    pub extent: f64,
    /// Relative tolerance; defaults to 1e-10 for closed-form phases and 1e-8 otherwise.
    pub tolerance: Option<f64>,
    pub fd_step: f64,
}

impl Default for DiracResidualParams {
    fn default() -> Self {
        DiracResidualParams {
            n_modes: 1000,
            k_max: 1.0,
            u_abs: [0.2, 2.0],
            mass: [0.3, 2.0],
            extent: 5.0,
            tolerance: None,
            fd_step: 2e-3,
        }
    }
}

fn dirac_residual_scenario(cfg: &LoadedConfig) -> Result<Parts, RunError> {
    let p: DiracResidualParams = cfg.params()?;
    check(p.n_modes > 0, || "n_modes must be positive".into())?;
    check(p.u_abs[0] > 0.0 && p.mass[0] > 0.0, || "u_abs and mass ranges must be positive".into())?;
    range("u_abs", p.u_abs)?;
    range("mass", p.mass)?;
    check(p.fd_step > 0.0, || "fd_step must be positive".into())?;
    let pot = &cfg.potential;
    let tol = p.tolerance.unwrap_or(if pot.uses_quadrature() { 1e-8 } else { 1e-10 });

    let mut r = rng(cfg);
    let draws: Vec<(ModeAmplitude, ModeParams, NullPoint)> = (0..p.n_modes)
        .map(|_| {
            let amp = random_amp(&mut r);
            let mag = r.gen_range(p.u_abs[0]..=p.u_abs[1]);
            let u = if r.gen_bool(0.5) { mag } else { -mag };
            let mode = ModeParams::new(
                r.gen_range(-p.k_max..=p.k_max),
                r.gen_range(-p.k_max..=p.k_max),
                u,
                r.gen_range(p.mass[0]..=p.mass[1]),
            );
            let pt = NullPoint::new(
                r.gen_range(-p.extent..=p.extent),
                r.gen_range(-p.extent..=p.extent),
                r.gen_range(-2.0..2.0),
                r.gen_range(-2.0..2.0),
            );
            mode.map(|m| (amp, m, pt))
        })
        .collect::<Result<_, _>>()?;

    let rows: Vec<Vec<f64>> = draws
        .par_iter()
        .map(|(amp, mode, pt)| -> volkov_fp_core::Result<Vec<f64>> {
            let norm = mode_wavefunction(amp, mode, pot, pt)?.norm();
            let res = dirac_residual(amp, mode, pot, pt)?;
            let fd = dirac_residual_fd(amp, mode, pot, pt, p.fd_step, Stencil::Fourth)?;
            Ok(vec![mode.k2, mode.k3, mode.u, mode.m, pt.s, pt.l, pt.y, pt.z, norm, res, res / norm, fd / norm])
        })
        .collect::<Result<_, _>>()?;

    let worst = max_of(rows.iter().map(|r| r[10]));
    let worst_fd = max_of(rows.iter().map(|r| r[11]));
    let csv = table_csv(
        &["k2", "k3", "u", "m", "s", "l", "y", "z", "norm", "residual", "relative", "fd_relative"],
        &rows,
        &cfg.hash,
    )?;
    Ok((
        vec![Assertion::at_most("max_relative_residual", worst, tol)],
        metrics([("max_fd_relative_residual", worst_fd), ("samples", rows.len() as f64)]),
        vec![("residuals.csv".into(), csv)],
    ))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NullProductParams {
    pub n_packets: usize,
    pub mass: f64,
    pub u_nodes: Vec<f64>,
    pub k_nodes: Vec<f64>,
    pub s_range: [f64; 2],
    pub n_s: usize,
    pub tolerance: f64,
}

impl Default for NullProductParams {
    fn default() -> Self {
        NullProductParams {
            n_packets: 50,
            mass: 1.0,
            u_nodes: vec![-1.3, -0.7, -0.3, 0.4, 0.9],
            k_nodes: vec![-0.5, 0.0, 0.5],
            s_range: [-10.0, 10.0],
            n_s: 21,
            tolerance: 1e-10,
        }
    }
}

fn random_packet(r: &mut ChaCha8Rng, m: f64, u: &[f64], k: &[f64]) -> volkov_fp_core::Result<WavePacket> {
    let uw = vec![1.0 / u.len() as f64; u.len()];
    let kw = vec![1.0 / k.len() as f64; k.len()];
    let mut weights = Vec::new();
    let mut amps = Vec::new();
    for _ in 0..u.len() * k.len() * k.len() {
        weights.push(Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0)));
        amps.push(random_amp(r));
    }
    let mut wi = weights.into_iter();
    let mut ai = amps.into_iter();
    WavePacket::tensor(m, (u, &uw), (k, &kw), (k, &kw), |_, _, _| wi.next().unwrap(), |_, _, _| ai.next().unwrap())
}

fn null_product_scenario(cfg: &LoadedConfig) -> Result<Parts, RunError> {
    let p: NullProductParams = cfg.params()?;
    check(p.n_packets > 0 && p.n_s >= 2, || "need n_packets > 0 and n_s >= 2".into())?;
    range("s_range", p.s_range)?;
    let pot = &cfg.potential;
    let mut r = rng(cfg);
    let pairs: Vec<(WavePacket, WavePacket)> = (0..p.n_packets)
        .map(|_| Ok((random_packet(&mut r, p.mass, &p.u_nodes, &p.k_nodes)?, random_packet(&mut r, p.mass, &p.u_nodes, &p.k_nodes)?)))
        .collect::<volkov_fp_core::Result<_>>()?;
    let (s_grid, _) = trapezoid(p.s_range[0], p.s_range[1], p.n_s)?;

    let per_packet: Vec<(Vec<Vec<f64>>, f64, f64)> = pairs
        .par_iter()
        .enumerate()
        .map(|(i, (psi, phi))| -> volkov_fp_core::Result<_> {
            let reference = null_scalar_product(psi, phi, pot, s_grid[0])?;
            let scale = reference.norm().max(f64::MIN_POSITIVE);
            let mut rows = Vec::with_capacity(s_grid.len());
            let mut worst = 0.0f64;
            for &s in &s_grid {
                let v = null_scalar_product(psi, phi, pot, s)?;
                let dev = (v - reference).norm() / scale;
                worst = worst.max(dev);
                rows.push(vec![i as f64, s, v.re, v.im, dev]);
            }
            let own = null_scalar_product(psi, psi, pot, 0.5 * (s_grid[0] + s_grid[s_grid.len() - 1]))?;
            Ok((rows, worst, own.re))
        })
        .collect::<Result<_, _>>()?;

    let worst = max_of(per_packet.iter().map(|x| x.1));
    let min_norm = per_packet.iter().map(|x| x.2).fold(f64::INFINITY, f64::min);
    let rows: Vec<Vec<f64>> = per_packet.into_iter().flat_map(|x| x.0).collect();
    let csv = table_csv(&["packet", "s", "re", "im", "relative_deviation"], &rows, &cfg.hash)?;
    Ok((
        vec![
            Assertion::at_most("max_relative_s_variation", worst, p.tolerance),
            Assertion::new("min_self_product", min_norm, Comparison::AtLeast, f64::MIN_POSITIVE),
        ],
        metrics([("packets", p.n_packets as f64)]),
        vec![("null_products.csv".into(), csv)],
    ))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MassPairingParams {
    pub n_draws: usize,
    pub mass: [f64; 2],
    pub k_max: f64,
    pub u_abs: [f64; 2],
    pub s_extent: f64,
    pub tolerance: f64,
}

impl Default for MassPairingParams {
    fn default() -> Self {
        MassPairingParams { n_draws: 200, mass: [0.5, 1.5], k_max: 1.0, u_abs: [0.2, 2.0], s_extent: 5.0, tolerance: 1e-10 }
    }
}

fn mass_pairing_scenario(cfg: &LoadedConfig) -> Result<Parts, RunError> {
    let p: MassPairingParams = cfg.params()?;
    check(p.n_draws > 0, || "n_draws must be positive".into())?;
    check(p.mass[0] > 0.0 && p.u_abs[0] > 0.0, || "mass and u_abs ranges must be positive".into())?;
    range("mass", p.mass)?;
    range("u_abs", p.u_abs)?;
    let pot = &cfg.potential;
    let mut r = rng(cfg);
    let draws: Vec<(MassPair, f64)> = (0..p.n_draws)
        .map(|_| {
            let mag = r.gen_range(p.u_abs[0]..=p.u_abs[1]);
            let pair = MassPair {
                k2: r.gen_range(-p.k_max..=p.k_max),
                k3: r.gen_range(-p.k_max..=p.k_max),
                u: if r.gen_bool(0.5) { mag } else { -mag },
                m: r.gen_range(p.mass[0]..=p.mass[1]),
                m_prime: r.gen_range(p.mass[0]..=p.mass[1]),
                chi0: random_amp(&mut r),
                chi0_prime: random_amp(&mut r),
            };
            (pair, r.gen_range(-p.s_extent..=p.s_extent))
        })
        .collect();
    let rows: Vec<Vec<f64>> = draws
        .par_iter()
        .map(|(pair, s)| -> volkov_fp_core::Result<Vec<f64>> {
            let (lhs, rhs) = mass_pairing_identity(pair, pot, *s)?;
            let rel = (lhs - rhs).norm() / rhs.norm().max(f64::MIN_POSITIVE);
            Ok(vec![pair.k2, pair.k3, pair.u, pair.m, pair.m_prime, *s, lhs.re, lhs.im, rhs.re, rhs.im, rel])
        })
        .collect::<Result<_, _>>()?;
    let worst = max_of(rows.iter().map(|r| r[10]));
    let csv = table_csv(
        &["k2", "k3", "u", "m", "m_prime", "s", "re_lhs", "im_lhs", "re_rhs", "im_rhs", "relative"],
        &rows,
        &cfg.hash,
    )?;
    Ok((
        vec![Assertion::at_most("max_relative_gap", worst, p.tolerance)],
        metrics([("draws", rows.len() as f64)]),
        vec![("mass_pairing.csv".into(), csv)],
    ))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MassOscillationParams {
    pub interval: [f64; 2],
    pub n_masses: usize,
    pub u_range: [f64; 2],
    pub n_u: usize,
    pub k_range: [f64; 2],
    pub n_k: usize,
    /// Mass where the two supports of the disjoint case meet.
    pub split: f64,
    pub regulator: MassOscillationConfig,
    pub tolerance: f64,
    pub null_ratio: f64,
}

impl Default for MassOscillationParams {
    fn default() -> Self {
        MassOscillationParams {
            interval: [0.8, 1.2],
            n_masses: 21,
            u_range: [-0.07, -0.03],
            n_u: 9,
            k_range: [-0.2, 0.2],
            n_k: 5,
            split: 1.0,
            regulator: MassOscillationConfig::default(),
            tolerance: 1e-2,
            null_ratio: 1e-3,
        }
    }
}

fn oscillation_template(p: &MassOscillationParams, r: &mut ChaCha8Rng) -> volkov_fp_core::Result<WavePacket> {
    let (u, uw) = trapezoid(p.u_range[0], p.u_range[1], p.n_u)?;
    let (k, kw) = trapezoid(p.k_range[0], p.k_range[1], p.n_k)?;
    let c: Vec<Complex64> = (0..4).map(|_| Complex64::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0))).collect();
    let u_mid = 0.5 * (p.u_range[0] + p.u_range[1]);
    let u_half = 0.5 * (p.u_range[1] - p.u_range[0]).max(f64::MIN_POSITIVE);
    let k_half = 0.5 * (p.k_range[1] - p.k_range[0]).max(f64::MIN_POSITIVE);
    WavePacket::tensor(
        p.interval[0],
        (&u, &uw),
        (&k, &kw),
        (&k, &kw),
        |u, k2, k3| {
            let t = (u - u_mid) / u_half;
            Complex64::new((-(k2 * k2 + k3 * k3) / (k_half * k_half)).exp() * (1.0 + 0.5 * t), 0.0)
        },
        |u, k2, k3| {
            let t = (u - u_mid) / u_half;
            ModeAmplitude::from_components([
                Complex64::new(1.0, 0.0) + c[0] * (k2 / k_half) * 0.3,
                c[1] * 0.5 + c[2] * (k3 / k_half) * 0.3 + c[3] * t * 0.3,
            ])
        },
    )
}

fn mass_oscillation_scenario(cfg: &LoadedConfig) -> Result<Parts, RunError> {
    let p: MassOscillationParams = cfg.params()?;
    check(p.interval[0] > 0.0 && p.interval[1] > p.interval[0], || "interval must satisfy 0 < lo < hi".into())?;
    check(p.split > p.interval[0] && p.split < p.interval[1], || "split must lie inside the interval".into())?;
    check(p.u_range[1] < 0.0, || "u_range must be negative".into())?;
    check(p.n_masses >= 5 && p.n_u >= 2 && p.n_k >= 1, || "grids too small".into())?;
    range("u_range", p.u_range)?;
    range("k_range", p.k_range)?;
    let pot = &cfg.potential;
    let template = oscillation_template(&p, &mut rng(cfg))?;
    let interval = (p.interval[0], p.interval[1]);
    let fam = MassFamily::with_bump(interval, p.n_masses, &template)?;
    let diag = mass_oscillation_check(&fam, &fam, pot, &p.regulator)?;
    let left = MassFamily::with_bump_on(interval, (p.interval[0], p.split), p.n_masses, &template)?;
    let right = MassFamily::with_bump_on(interval, (p.split, p.interval[1]), p.n_masses, &template)?;
    let off = mass_oscillation_check(&left, &right, pot, &p.regulator)?;

    let mut rows = Vec::new();
    for (case, rep) in [(0.0, &diag), (1.0, &off)] {
        for (e, v) in rep.epsilons.iter().zip(&rep.lhs_regulated) {
            rows.push(vec![case, *e, v.re, v.im]);
        }
        rows.push(vec![case, 0.0, rep.lhs.re, rep.lhs.im]);
    }
    let csv = table_csv(&["case", "epsilon", "re_lhs", "im_lhs"], &rows, &cfg.hash)?;
    let lhs_ratio = off.lhs.norm() / diag.lhs.norm().max(f64::MIN_POSITIVE);
    let rhs_ratio = off.rhs.norm() / diag.rhs.norm().max(f64::MIN_POSITIVE);
    Ok((
        vec![
            Assertion::at_most("relative_gap", diag.relative_gap, p.tolerance),
            Assertion::at_most("disjoint_lhs_ratio", lhs_ratio, p.null_ratio),
            Assertion::at_most("disjoint_rhs_ratio", rhs_ratio, p.null_ratio),
        ],
        metrics([
            ("lhs_re", diag.lhs.re),
            ("lhs_im", diag.lhs.im),
            ("rhs_re", diag.rhs.re),
            ("rhs_im", diag.rhs.im),
            ("disjoint_lhs_abs", off.lhs.norm()),
            ("disjoint_rhs_abs", off.rhs.norm()),
        ]),
        vec![("regulated_lhs.csv".into(), csv)],
    ))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DecayScanParams {
    pub mass: f64,
    pub k2: f64,
    pub k3: f64,
    pub u_range: [f64; 2],
    pub n_u: usize,
    pub center: f64,
    pub width: f64,
    pub s_values: Vec<f64>,
    pub l_range: [f64; 2],
    pub n_l: usize,
    pub single_u: f64,
    pub min_order: f64,
}

impl Default for DecayScanParams {
    fn default() -> Self {
        DecayScanParams {
            mass: 1.0,
            k2: 0.0,
            k3: 0.0,
            u_range: [-2.0, -0.2],
            n_u: 4001,
            center: -1.1,
            width: 0.15,
            s_values: vec![-5.0, 0.0, 5.0],
            l_range: [20.0, 200.0],
            n_l: 24,
            single_u: -0.8,
            min_order: 4.0,
        }
    }
}

fn decay_scan_scenario(cfg: &LoadedConfig) -> Result<Parts, RunError> {
    let p: DecayScanParams = cfg.params()?;
    check(p.l_range[0] > 0.0 && p.l_range[1] > p.l_range[0], || "l_range must satisfy 0 < lo < hi".into())?;
    check(p.n_l >= 8, || "n_l must be at least 8".into())?;
    check(!p.s_values.is_empty(), || "s_values must not be empty".into())?;
    range("u_range", p.u_range)?;
    let pot = &cfg.potential;
    let amp = ModeAmplitude::from_components([Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.5)]);
    let smooth = WavePacket::smooth_in_u(
        p.mass,
        p.k2,
        p.k3,
        (p.u_range[0], p.u_range[1]),
        p.n_u,
        p.center,
        p.width,
        amp,
    )?;
    let single = WavePacket::single(&ModeParams::new(p.k2, p.k3, p.single_u, p.mass)?, amp, Complex64::new(1.0, 0.0))?;

    let ratio = (p.l_range[1] / p.l_range[0]).powf(1.0 / (p.n_l - 1) as f64);
    let pos: Vec<f64> = (0..p.n_l).map(|i| p.l_range[0] * ratio.powi(i as i32)).collect();
    let l_values: Vec<f64> = pos.iter().copied().chain(pos.iter().map(|l| -l)).collect();

    let a = null_decay_scan(&smooth, pot, &p.s_values, &l_values)?;
    let b = null_decay_scan(&single, pot, &p.s_values, &l_values)?;
    let mut rows = Vec::new();
    for (which, rep) in [(0.0, &a), (1.0, &b)] {
        for row in &rep.rows {
            for &(l, mag) in &row.samples {
                rows.push(vec![which, row.s, l, mag]);
            }
        }
    }
    let csv = table_csv(&["packet", "s", "l", "magnitude"], &rows, &cfg.hash)?;
    Ok((
        vec![
            Assertion::at_least("smooth_min_order", a.min_order, p.min_order),
            Assertion::new("single_mode_order", b.min_order, Comparison::Below, DECAY_FLAG_ORDER),
        ],
        metrics([
            ("smooth_flagged_decaying", a.decaying as u8 as f64),
            ("single_flagged_decaying", b.decaying as u8 as f64),
        ]),
        vec![("decay_scan.csv".into(), csv)],
    ))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FpKernelParams {
    /// Explicit modes; when empty, `n_random` modes with `u < 0` are drawn.
    pub modes: Vec<ModeParams>,
    pub n_random: usize,
    pub s_values: Vec<f64>,
    pub tolerance: f64,
}

impl Default for FpKernelParams {
    fn default() -> Self {
        FpKernelParams { modes: Vec::new(), n_random: 8, s_values: vec![-3.0, -1.5, -0.5, 0.0, 0.7, 2.0, 3.0], tolerance: 1e-12 }
    }
}

fn fp_kernel_scenario(cfg: &LoadedConfig) -> Result<Parts, RunError> {
    let p: FpKernelParams = cfg.params()?;
    check(!p.s_values.is_empty(), || "s_values must not be empty".into())?;
    let pot = &cfg.potential;
    let modes: Vec<ModeParams> = if p.modes.is_empty() {
        let mut r = rng(cfg);
        (0..p.n_random)
            .map(|_| {
                ModeParams::new(r.gen_range(-1.0..1.0), r.gen_range(-1.0..1.0), -r.gen_range(0.2..2.0), r.gen_range(0.3..2.0))
            })
            .collect::<Result<_, _>>()?
    } else {
        p.modes.clone()
    };
    for m in &modes {
        m.validate()?;
        check(m.u < 0.0, || format!("projector kernels need u < 0, got {}", m.u))?;
    }
    let points: Vec<(f64, f64)> = p.s_values.iter().flat_map(|&s| p.s_values.iter().map(move |&t| (s, t))).collect();
    let samples = sample_fp_kernel(&modes, pot, &points)?;

    let checks: Vec<(f64, f64, f64)> = samples
        .par_iter()
        .map(|k| -> volkov_fp_core::Result<(f64, f64, f64)> {
            let scale = k.value.max_abs();
            let causal = causal_fundamental_momentum(&k.mode, pot, k.s, k.s_tilde)?;
            let relation = (k.value + causal.scale_real(signature_sign(k.mode.u)?)).max_abs() / scale;
            let swapped = volkov_fp_core::projector::fp_kernel_momentum(&k.mode, pot, k.s_tilde, k.s)?;
            let symmetry = (k.value.spin_adjoint() - swapped).max_abs() / scale;
            let diag = if k.s == k.s_tilde {
                let (a, _) = fp_coefficients(&k.mode, pot, k.s, k.s)?;
                (a * (2.0 * PI).powi(4) - Complex64::new(1.0, 0.0)).norm()
            } else {
                0.0
            };
            Ok((relation, symmetry, diag))
        })
        .collect::<Result<_, _>>()?;
    let csv = kernel_csv(&samples, &cfg.hash)?;
    Ok((
        vec![
            Assertion::at_most("max_sign_relation_deviation", max_of(checks.iter().map(|c| c.0)), p.tolerance),
            Assertion::at_most("max_spin_symmetry_deviation", max_of(checks.iter().map(|c| c.1)), p.tolerance),
            Assertion::at_most("diagonal_a_deviation", max_of(checks.iter().map(|c| c.2)), 0.0),
        ],
        metrics([("modes", modes.len() as f64), ("samples", samples.len() as f64)]),
        vec![("kernel.csv".into(), csv)],
    ))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SidebandParams {
    pub k2: f64,
    pub k3: f64,
    pub u: f64,
    pub m: f64,
    pub n_max: i64,
    pub n_samples: usize,
    pub record_length: f64,
    pub window_width: f64,
    pub amplitude_tolerance: f64,
    /// Lines weaker than this are below the leakage floor and not compared.
    pub amplitude_floor: f64,
    pub power_n_max: i64,
    pub power_tolerance: f64,
}

impl Default for SidebandParams {
    fn default() -> Self {
        SidebandParams {
            k2: 0.3,
            k3: 0.0,
            u: -0.5,
            m: 1.0,
            n_max: 3,
            n_samples: 2048,
            record_length: 160.0,
            window_width: 12.0,
            amplitude_tolerance: 1e-4,
            amplitude_floor: 1e-8,
            power_n_max: 40,
            power_tolerance: 1e-10,
        }
    }
}

fn sidebands_scenario(cfg: &LoadedConfig) -> Result<Parts, RunError> {
    let p: SidebandParams = cfg.params()?;
    let (lambda, omega) = match cfg.potential {
        PlaneWavePotential::Harmonic { lambda, omega } => (lambda, omega),
        PlaneWavePotential::Zero => (0.0, 1.0),
        _ => return Err(RunError::Config("sidebands need a harmonic or zero potential".into())),
    };
    check(p.n_samples >= 16 && p.record_length > 0.0 && p.window_width > 0.0, || {
        "need n_samples >= 16 and positive record_length and window_width".into()
    })?;
    let mode = ModeParams::new(p.k2, p.k3, p.u, p.m)?;
    let ds = p.record_length / p.n_samples as f64;
    let window = WindowFunction::Gaussian { center: 0.5 * p.record_length, width: p.window_width };
    let run_fft = |pot: &PlaneWavePotential, lambda: f64| -> volkov_fp_core::Result<_> {
        let samples = phase_factor_samples(&mode, pot, 0.0, 0.0, ds, p.n_samples)?;
        let probe = LineProbe { v0: harmonic_carrier(&mode, lambda), omega, n_max: p.n_max };
        spectrum_fft(&samples, 0.0, ds, &window, &probe)
    };
    let spec = run_fft(&cfg.potential, lambda)?;
    let analytic = harmonic_sidebands_analytic(&mode, lambda, omega, p.n_max)?;
    let power: f64 = harmonic_sidebands_analytic(&mode, lambda, omega, p.power_n_max)?
        .iter()
        .map(|l| l.amplitude.norm_sqr())
        .sum();

    let mut pos_err = 0.0f64;
    let mut amp_err = 0.0f64;
    for (got, want) in spec.lines.iter().zip(&analytic) {
        pos_err = pos_err.max((got.v - want.v).abs() / spec.bin_width);
        if want.amplitude.norm() >= p.amplitude_floor {
            amp_err = amp_err.max((got.amplitude - want.amplitude).norm() / want.amplitude.norm());
        }
    }

    // Without the wave the spectrum collapses to 4uv = k2^2 + k3^2 + m^2.
    let free = run_fft(&PlaneWavePotential::Zero, 0.0)?;
    let free_v0 = (p.k2 * p.k2 + p.k3 * p.k3 + p.m * p.m) / (4.0 * p.u);
    let peak = free.lines.iter().find(|l| l.n == 0).expect("probe always contains n = 0");
    let side = max_of(free.lines.iter().filter(|l| l.n != 0).map(|l| l.amplitude.norm()));
    let collapse = (peak.v - free_v0).abs() / free.bin_width;

    let bins: Vec<Vec<f64>> = spec.bins.iter().map(|&(v, m)| vec![v, m]).collect();
    Ok((
        vec![
            Assertion::at_most("line_position_in_bins", pos_err, 1.0),
            Assertion::at_most("max_relative_amplitude_error", amp_err, p.amplitude_tolerance),
            Assertion::at_most("power_sum_deviation", (power - 1.0).abs(), p.power_tolerance),
            Assertion::at_most("free_line_position_in_bins", collapse, 1.0),
            Assertion::at_most("free_sideband_amplitude", side, 1e-6),
        ],
        metrics([
            ("v0", harmonic_carrier(&mode, lambda)),
            ("bin_width", spec.bin_width),
            ("free_v0", free_v0),
            ("free_peak_amplitude", peak.amplitude.norm()),
        ]),
        vec![
            ("spectrum.csv".into(), spectrum_csv(&spec.lines, &cfg.hash)?),
            ("analytic.csv".into(), spectrum_csv(&analytic, &cfg.hash)?),
            ("bins.csv".into(), table_csv(&["v", "abs_amp"], &bins, &cfg.hash)?),
        ],
    ))
}

// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WavefrontParams {
    pub k2: f64,
    pub k3: f64,
    pub u: f64,
    pub m: f64,
    pub window: WindowFunction,
    pub v_range: [f64; 2],
    pub n_v: usize,
    pub min_order: f64,
    pub plancherel_range: [f64; 2],
    pub plancherel_points: usize,
    pub plancherel_tolerance: f64,
    /// Inverse-u grid `[w_lo, w_hi]` and node count of the reported asymmetry diagnostic.
    pub asymmetry_w: [f64; 2],
    pub asymmetry_nodes: usize,
    pub asymmetry_v: [f64; 2],
    pub asymmetry_points: usize,
}

impl Default for WavefrontParams {
    fn default() -> Self {
        WavefrontParams {
            k2: 0.3,
            k3: 0.0,
            u: -0.5,
            m: 1.0,
            window: WindowFunction::Gaussian { center: 0.0, width: 0.15 },
            v_range: [5.0, 50.0],
            n_v: 40,
            min_order: 6.0,
            plancherel_range: [-80.0, 80.0],
            plancherel_points: 3201,
            plancherel_tolerance: 1e-6,
            asymmetry_w: [0.25, 200.0],
            asymmetry_nodes: 800,
            asymmetry_v: [5.0, 40.0],
            asymmetry_points: 24,
        }
    }
}

fn wavefront_scenario(cfg: &LoadedConfig) -> Result<Parts, RunError> {
    let p: WavefrontParams = cfg.params()?;
    check(p.v_range[0] > 0.0 && p.v_range[1] > p.v_range[0] && p.n_v >= 8, || {
        "v_range must satisfy 0 < lo < hi with n_v >= 8".into()
    })?;
    range("plancherel_range", p.plancherel_range)?;
    let pot = &cfg.potential;
    let mode = ModeParams::new(p.k2, p.k3, p.u, p.m)?;
    let ratio = (p.v_range[1] / p.v_range[0]).powf(1.0 / (p.n_v - 1) as f64);
    let pos: Vec<f64> = (0..p.n_v).map(|i| p.v_range[0] * ratio.powi(i as i32)).collect();
    let v: Vec<f64> = pos.iter().rev().map(|x| -x).chain(pos.iter().copied()).collect();
    let f = windowed_phase_transform(&mode, pot, &p.window, &v)?;
    let fit = decay_order_fit(&pos.iter().zip(&f[p.n_v..]).map(|(&x, y)| (x, y.norm())).collect::<Vec<_>>(), None)?;
    let plan = plancherel_check(&mode, pot, &p.window, p.plancherel_range[0], p.plancherel_range[1], p.plancherel_points)?;
    let (un, uw) = inverse_u_grid(p.asymmetry_w[0], p.asymmetry_w[1], p.asymmetry_nodes)?;
    let asym = frequency_asymmetry(&mode, &un, &uw, pot, &p.window, p.asymmetry_v[0], p.asymmetry_v[1], p.asymmetry_points)?;
    Ok((
        vec![
            Assertion::at_least("positive_decay_order", fit.order, p.min_order),
            Assertion::at_most("plancherel_relative_error", plan.relative_error, p.plancherel_tolerance),
        ],
        metrics([
            ("positive_lower_order", fit.lower_order),
            ("positive_upper_order", fit.upper_order),
            ("positive_superpolynomial", fit.superpolynomial as u8 as f64),
            ("transform_norm", plan.transform_norm),
            ("signal_norm", plan.signal_norm),
            ("smeared_positive_order", asym.positive.order),
            ("smeared_negative_order", asym.negative.order),
            ("smeared_asymmetry", asym.asymmetry),
        ]),
        vec![("transform.csv".into(), transform_csv(&v, &f, &cfg.hash)?)],
    ))
}

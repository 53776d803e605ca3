//! Plane-wave potential profiles `s -> (A2(s), A3(s))` and their phase integrals.
//!
//! The longitudinal components are gauged away, so a profile is fully
//! described by its two transverse components as functions of `s = t + x`.
//! The phase integrand
//!
//! ```text
//! q(s) = (k2 + A2(s))^2 + (k3 + A3(s))^2 + m^2   >= m^2
//! ```
//!
//! integrates to the cumulative phase `Phi(s0, s1)`; `zeta(s) = Phi(0, s)`.
//! `Zero` and `Harmonic` use closed forms, `Pulse` and `Tabulated` use
//! adaptive Gauss-Kronrod quadrature at absolute tolerance [`PHASE_ABS_TOL`].

use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::quadrature::integrate_adaptive;
use crate::{Error, Result};

/// Absolute tolerance for quadrature-backed phases.
pub const PHASE_ABS_TOL: f64 = 1e-12;

/// Transverse momenta and mass for which the phase is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseQuery {
    pub k2: f64,
    pub k3: f64,
    pub m: f64,
}

impl PhaseQuery {
    pub fn new(k2: f64, k3: f64, m: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::NonPositiveMass(m));
        }
        if !k2.is_finite() || !k3.is_finite() {
            return Err(Error::InvalidArgument("transverse momenta must be finite".into()));
        }
        Ok(PhaseQuery { k2, k3, m })
    }
}

/// Natural cubic spline through strictly increasing knots.
#[derive(Debug, Clone, PartialEq)]
pub struct CubicSpline {
    x: Vec<f64>,
    y: Vec<f64>,
    second: Vec<f64>,
}

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 4 || y.len() != n {
            return Err(Error::InvalidPotential(format!(
                "cubic interpolation needs at least 4 samples, got {n}"
            )));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPotential("sample positions must be strictly increasing".into()));
        }
        if x.iter().chain(&y).any(|v| !v.is_finite()) {
            return Err(Error::InvalidPotential("samples must be finite".into()));
        }
        // Tridiagonal system for the interior second derivatives (Thomas algorithm).
        let mut second = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        let mut upper = vec![0.0; n];
        for i in 1..n - 1 {
            let h0 = x[i] - x[i - 1];
            let h1 = x[i + 1] - x[i];
            diag[i] = 2.0 * (h0 + h1);
            upper[i] = h1;
            rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            if i > 1 {
                let lower = h0;
                let w = lower / diag[i - 1];
                diag[i] -= w * upper[i - 1];
                rhs[i] -= w * rhs[i - 1];
            }
        }
        for i in (1..n - 1).rev() {
            second[i] = (rhs[i] - upper[i] * second[i + 1]) / diag[i];
        }
        Ok(CubicSpline { x, y, second })
    }

    pub fn range(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    pub fn knots(&self) -> &[f64] {
        &self.x
    }

    fn segment(&self, s: f64) -> Result<usize> {
        let (lo, hi) = self.range();
        if !(s >= lo && s <= hi) {
            return Err(Error::OutOfDomain { s, lo, hi });
        }
        let idx = self.x.partition_point(|&k| k <= s);
        Ok(idx.clamp(1, self.x.len() - 1) - 1)
    }

    /// Value and first derivative at `s`.
    pub fn eval(&self, s: f64) -> Result<(f64, f64)> {
        let i = self.segment(s)?;
        let h = self.x[i + 1] - self.x[i];
        let a = (self.x[i + 1] - s) / h;
        let b = (s - self.x[i]) / h;
        let (m0, m1) = (self.second[i], self.second[i + 1]);
        let value = a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let deriv = (self.y[i + 1] - self.y[i]) / h
            - (3.0 * a * a - 1.0) / 6.0 * h * m0
            + (3.0 * b * b - 1.0) / 6.0 * h * m1;
        Ok((value, deriv))
    }
}

/// Sampled profile `(s, a2, a3)` with cubic interpolation; no extrapolation.
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedProfile {
    a2: CubicSpline,
    a3: CubicSpline,
}

impl TabulatedProfile {
    pub fn from_samples(samples: &[[f64; 3]]) -> Result<Self> {
        let s: Vec<f64> = samples.iter().map(|r| r[0]).collect();
        let a2 = CubicSpline::new(s.clone(), samples.iter().map(|r| r[1]).collect())?;
        let a3 = CubicSpline::new(s, samples.iter().map(|r| r[2]).collect())?;
        Ok(TabulatedProfile { a2, a3 })
    }

    /// Reads `s, a2[, a3]` columns from a CSV file with a header row.
    /// Lines starting with `#` are ignored.
    pub fn from_csv_path(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::from_csv_reader(file)
    }

    pub fn from_csv_reader<R: std::io::Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(reader);
        let ncols = rdr.headers()?.len();
        if !(2..=3).contains(&ncols) {
            return Err(Error::InvalidPotential(format!(
                "tabulated potential needs 2 or 3 columns (s, a2[, a3]), header has {ncols}"
            )));
        }
        let mut samples = Vec::new();
        for rec in rdr.records() {
            let rec = rec?;
            let mut row = [0.0; 3];
            for (j, field) in rec.iter().enumerate().take(3) {
                row[j] = field.parse::<f64>().map_err(|e| {
                    Error::InvalidPotential(format!("bad number {field:?}: {e}"))
                })?;
            }
            samples.push(row);
        }
        Self::from_samples(&samples)
    }

    pub fn range(&self) -> (f64, f64) {
        self.a2.range()
    }

    pub fn samples(&self) -> Vec<[f64; 3]> {
        self.a2
            .x
            .iter()
            .zip(self.a2.y.iter().zip(&self.a3.y))
            .map(|(&s, (&a2, &a3))| [s, a2, a3])
            .collect()
    }
}

/// Serializable description of a potential.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum PotentialSpec {
    Zero,
    Harmonic {
        lambda: f64,
        omega: f64,
    },
    Pulse {
        lambda: f64,
        omega: f64,
        sigma: f64,
    },
    /// Either inline `samples` rows `[s, a2, a3]` or a CSV `path`
    /// (relative paths resolve against the referencing document).
    Tabulated {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        samples: Option<Vec<[f64; 3]>>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        path: Option<String>,
    },
}

/// A plane electromagnetic wave in the transverse gauge.
#[derive(Debug, Clone, PartialEq)]
pub enum PlaneWavePotential {
    Zero,
    /// `A2 = lambda cos(omega s)`, `A3 = 0`.
    Harmonic { lambda: f64, omega: f64 },
    /// `A2 = lambda exp(-s^2 / (2 sigma^2)) cos(omega s)`, `A3 = 0`.
    Pulse { lambda: f64, omega: f64, sigma: f64 },
    Tabulated(TabulatedProfile),
}

impl PlaneWavePotential {
    pub fn harmonic(lambda: f64, omega: f64) -> Result<Self> {
        let p = PlaneWavePotential::Harmonic { lambda, omega };
        p.validate()?;
        Ok(p)
    }

    pub fn pulse(lambda: f64, omega: f64, sigma: f64) -> Result<Self> {
        let p = PlaneWavePotential::Pulse { lambda, omega, sigma };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            PlaneWavePotential::Zero | PlaneWavePotential::Tabulated(_) => Ok(()),
            PlaneWavePotential::Harmonic { lambda, omega } => {
                if !lambda.is_finite() || !omega.is_finite() || omega == 0.0 {
                    return Err(Error::InvalidPotential(format!(
                        "harmonic wave needs finite lambda and nonzero finite omega (lambda = {lambda}, omega = {omega})"
                    )));
                }
                Ok(())
            }
            PlaneWavePotential::Pulse { lambda, omega, sigma } => {
                if !lambda.is_finite() || !omega.is_finite() || !(sigma > 0.0) || !sigma.is_finite() {
                    return Err(Error::InvalidPotential(format!(
                        "pulse needs finite lambda, omega and positive sigma (sigma = {sigma})"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn from_spec(spec: &PotentialSpec, base_dir: Option<&Path>) -> Result<Self> {
        let pot = match spec {
            PotentialSpec::Zero => PlaneWavePotential::Zero,
            &PotentialSpec::Harmonic { lambda, omega } => PlaneWavePotential::Harmonic { lambda, omega },
            &PotentialSpec::Pulse { lambda, omega, sigma } => {
                PlaneWavePotential::Pulse { lambda, omega, sigma }
            }
            PotentialSpec::Tabulated { samples, path } => match (samples, path) {
                (Some(rows), None) => {
                    PlaneWavePotential::Tabulated(TabulatedProfile::from_samples(rows)?)
                }
                (None, Some(p)) => {
                    let p = Path::new(p);
                    let full = match base_dir {
                        Some(dir) if p.is_relative() => dir.join(p),
                        _ => p.to_path_buf(),
                    };
                    PlaneWavePotential::Tabulated(TabulatedProfile::from_csv_path(&full)?)
                }
                _ => {
                    return Err(Error::InvalidPotential(
                        "tabulated potential needs exactly one of `samples` or `path`".into(),
                    ))
                }
            },
        };
        pot.validate()?;
        Ok(pot)
    }

    pub fn to_spec(&self) -> PotentialSpec {
        match self {
            PlaneWavePotential::Zero => PotentialSpec::Zero,
            &PlaneWavePotential::Harmonic { lambda, omega } => PotentialSpec::Harmonic { lambda, omega },
            &PlaneWavePotential::Pulse { lambda, omega, sigma } => {
                PotentialSpec::Pulse { lambda, omega, sigma }
            }
            PlaneWavePotential::Tabulated(t) => PotentialSpec::Tabulated {
                samples: Some(t.samples()),
                path: None,
            },
        }
    }

    /// Whether phases come from numerical quadrature rather than a closed form.
    pub fn uses_quadrature(&self) -> bool {
        matches!(self, PlaneWavePotential::Pulse { .. } | PlaneWavePotential::Tabulated(_))
    }

    /// `(A2(s), A3(s))`.
    pub fn components(&self, s: f64) -> Result<(f64, f64)> {
        Ok(match self {
            PlaneWavePotential::Zero => (0.0, 0.0),
            &PlaneWavePotential::Harmonic { lambda, omega } => (lambda * (omega * s).cos(), 0.0),
            &PlaneWavePotential::Pulse { lambda, omega, sigma } => {
                (lambda * (-s * s / (2.0 * sigma * sigma)).exp() * (omega * s).cos(), 0.0)
            }
            PlaneWavePotential::Tabulated(t) => (t.a2.eval(s)?.0, t.a3.eval(s)?.0),
        })
    }

    /// `(A2'(s), A3'(s))`.
    pub fn derivatives(&self, s: f64) -> Result<(f64, f64)> {
        Ok(match self {
            PlaneWavePotential::Zero => (0.0, 0.0),
            &PlaneWavePotential::Harmonic { lambda, omega } => {
                (-lambda * omega * (omega * s).sin(), 0.0)
            }
            &PlaneWavePotential::Pulse { lambda, omega, sigma } => {
                let env = (-s * s / (2.0 * sigma * sigma)).exp();
                let d = lambda
                    * env
                    * (-s / (sigma * sigma) * (omega * s).cos() - omega * (omega * s).sin());
                (d, 0.0)
            }
            PlaneWavePotential::Tabulated(t) => (t.a2.eval(s)?.1, t.a3.eval(s)?.1),
        })
    }

    fn check_domain(&self, s: f64) -> Result<()> {
        if let PlaneWavePotential::Tabulated(t) = self {
            let (lo, hi) = t.range();
            if !(s >= lo && s <= hi) {
                return Err(Error::OutOfDomain { s, lo, hi });
            }
        } else if !s.is_finite() {
            return Err(Error::InvalidArgument(format!("s must be finite, got {s}")));
        }
        Ok(())
    }
}

/// `(k2 + A2(s))^2 + (k3 + A3(s))^2 + m^2`.
pub fn phase_integrand(pot: &PlaneWavePotential, q: &PhaseQuery, s: f64) -> Result<f64> {
    let (a2, a3) = pot.components(s)?;
    Ok((q.k2 + a2).powi(2) + (q.k3 + a3).powi(2) + q.m * q.m)
}

/// `Phi(s_from, s_to)`, the integral of [`phase_integrand`] from `s_from` to `s_to`.
pub fn phase(pot: &PlaneWavePotential, q: &PhaseQuery, s_from: f64, s_to: f64) -> Result<f64> {
    pot.check_domain(s_from)?;
    pot.check_domain(s_to)?;
    let base = q.k2 * q.k2 + q.k3 * q.k3 + q.m * q.m;
    match pot {
        PlaneWavePotential::Zero => Ok(base * (s_to - s_from)),
        &PlaneWavePotential::Harmonic { lambda, omega } => {
            let lin = (base + 0.5 * lambda * lambda) * (s_to - s_from);
            let first = 2.0 * q.k2 * lambda / omega * ((omega * s_to).sin() - (omega * s_from).sin());
            let second = lambda * lambda / (4.0 * omega)
                * ((2.0 * omega * s_to).sin() - (2.0 * omega * s_from).sin());
            Ok(lin + first + second)
        }
        &PlaneWavePotential::Pulse { sigma, .. } => {
            let breaks: Vec<f64> = (-8..=8).map(|k| k as f64 * sigma).collect();
            integrate_adaptive(
                |s| phase_integrand(pot, q, s).unwrap_or(f64::NAN),
                s_from,
                s_to,
                PHASE_ABS_TOL,
                &breaks,
            )
        }
        PlaneWavePotential::Tabulated(t) => integrate_adaptive(
            |s| phase_integrand(pot, q, s).unwrap_or(f64::NAN),
            s_from,
            s_to,
            PHASE_ABS_TOL,
            t.a2.knots(),
        ),
    }
}

/// `zeta(s) = Phi(0, s)`, the curvilinear null coordinate.
pub fn zeta(pot: &PlaneWavePotential, q: &PhaseQuery, s: f64) -> Result<f64> {
    phase(pot, q, 0.0, s)
}

/// Period `2 pi / |omega|` of a harmonic wave.
pub fn harmonic_period(omega: f64) -> f64 {
    2.0 * PI / omega.abs()
}

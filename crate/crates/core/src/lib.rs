//! Exact Dirac mode solutions in a plane electromagnetic wave, the two-point
//! kernel of the fermionic projector built from them, and numerical checks of
//! the identities those objects satisfy.
//!
//! Coordinates follow the null splitting `s = t + x`, `l = t - x`; the wave
//! depends on `s` only and is gauged to transverse components `(A2, A3)`.
//! Modes are separated as `exp(-i k2 y - i k3 z) exp(-i u l) chi(s)`.
//!
//! Module map:
//! - [`clifford`]: Dirac matrices in the Dirac representation, light-cone
//!   operators and the spin inner product.
//! - [`potential`]: wave profiles and their phase integrals.
//! - [`modes`]: single modes, wavepackets, null-surface scalar products.
//! - [`projector`]: Green's functions, causal fundamental solution and the
//!   projector kernel.
//! - [`spectral`]: sideband spectra, windowed transforms and decay fits.

pub mod clifford;
mod error;
pub mod export;
pub mod modes;
pub mod potential;
pub mod projector;
pub mod quadrature;
pub mod special;
pub mod spectral;

pub use clifford::{SpinMatrix, Spinor};
pub use error::{Error, Result};
pub use modes::{MassFamily, ModeAmplitude, ModeParams, PacketNode, WavePacket};
pub use potential::{PhaseQuery, PlaneWavePotential, PotentialSpec};
pub use projector::KernelSample;
pub use spectral::{SpectrumLine, WindowFunction};

pub use num_complex::Complex64;

//! Floquet analysis and wavepacket dynamics of a one-dimensional tight-binding
//! lattice driven by a time-periodic, zero-mean, alternating-sign on-site term
//! `i (-1)^n Δ(t)`.
//!
//! A real amplitude `Δ₀` makes the drive a PT-symmetric gain/loss modulation;
//! an imaginary `Δ₀` makes it an ordinary (Hermitian) potential modulation.
//! All energies and frequencies are in units of the hopping rate `κ`.
//!
//! - [`drive`]: waveforms `Δ(t)` and their phase integral `Φ(t)`.
//! - [`floquet`]: one-period Bloch propagators and quasi-energy bands.
//! - [`phase`]: broken/unbroken classification, thresholds and phase maps.
//! - [`dynamics`]: real-space evolution, spreading observables and the
//!   high-frequency effective hopping.
//! - [`export`]: CSV/JSON tables with embedded run metadata.

pub mod drive;
pub mod dynamics;
pub mod error;
pub mod export;
pub mod fit;
pub mod floquet;
pub mod mat2;
pub mod phase;

pub use drive::{DriveWaveform, Shape};
pub use dynamics::{
    ballistic_velocity, effective_hopping, evolve, gaussian_excitation, observables,
    single_site_excitation, EffectiveHopping, EvolveOptions, LatticeState, Observables,
    Trajectory, VelocityFit,
};
pub use error::{Error, Result};
pub use floquet::{
    monodromy_analytic_square, monodromy_numeric, quasi_energies, spectrum, LatticeConfig,
    MonodromyMatrix, QuasiEnergy, QuasiEnergySpectrum,
};
pub use mat2::Mat2;
pub use phase::{
    is_unbroken, minimum_frequency, phase_map, threshold_amplitude, PhaseMap, PhaseOptions,
    PhasePoint, ThresholdCurve,
};

/// Crate version, embedded in exported metadata.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

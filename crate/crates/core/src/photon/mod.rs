//! Few-photon spectral amplitudes.

pub mod amplitude;
pub mod grid;
pub mod io;
pub mod nphoton;
pub mod time_domain;

pub use amplitude::{
    envelope_overlap, gaussian_envelope, product_amplitude, spdc_amplitude, theta_symmetrize, Photon,
    SpdcParameters, TwoModeState, TwoPhotonAmplitude,
};
pub use grid::{FrequencyGrid, TimeGrid};
pub use nphoton::{exchange_phase_amplitude, NPhotonAmplitude};
pub use time_domain::{
    to_time_domain, DeltaPulse, Envelope, GaussianPulse, SeparableAmplitude, SharedEnvelope, SpectralEnvelope,
};

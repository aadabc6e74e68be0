//! Information-rate bounds for bipolar (binary-valued) signaling over the
//! ideal bandlimited AWGN channel.
//!
//! The crate generates waveforms for four transition-time modulation
//! schemes, samples them through the brick-wall channel, evaluates their
//! autocorrelations and spectra, estimates output entropies through
//! Jacobian log-determinants, and assembles the resulting capacity bounds.

pub mod bounds;
pub mod channel_sampling;
pub mod entropy;
pub mod error;
pub mod linalg;
pub mod quadrature;
pub mod rng;
pub mod sign_mi;
pub mod signal_model;
pub mod special;
pub mod spectral;

pub use error::{Error, Result};
pub use signal_model::{ModulationParams, Realization, SchemeId};

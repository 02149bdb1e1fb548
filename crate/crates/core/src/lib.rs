//! Design and analysis toolkit for direct multi-qubit parity measurement by
//! microwave reflection in circuit QED.
//!
//! The qubits enter only through state-dependent resonance shifts, so every
//! question reduces to the reflection phase `θ_s(ω)` of a lossless one-port:
//!
//! - [`network`]: impedance, reflection coefficient and unwrapped phase sweeps.
//! - [`device`]: the n-qubit, m-mode parity device and its per-state phase curves.
//! - [`eraser`]: probe frequency and dispersive shift satisfying the eraser conditions.
//! - [`fidelity`]: overlaps of scattered Gaussian coherent pulses.
//! - [`cascade`]: the sequential one-cavity-per-qubit alternative, for comparison.
//! - [`estimates`]: Purcell T1, measurement time and probe power.
//! - [`config`]: JSON device descriptions and report schemas used by the CLI.

pub mod cascade;
pub mod config;
pub mod device;
pub mod eraser;
pub mod error;
pub mod estimates;
pub mod fidelity;
pub mod network;
pub mod units;

pub use error::{Error, Result};
pub use units::AngularFrequency;

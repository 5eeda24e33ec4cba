//! Design toolkit for cavity-enhanced quantum-dot single-photon sources.
//!
//! The crate models two emitter-cavity architectures — the classic
//! micropillar and an "hourglass" geometry built from two opposed cones with
//! the emitter at the narrow waist — and evaluates the two numbers that decide
//! whether a source is useful for photonic quantum computing:
//!
//! * collection efficiency `epsilon`: probability that a spontaneously
//!   emitted photon ends up in the collection lens, and
//! * indistinguishability `eta`: two-photon wave-packet overlap in the
//!   presence of phonon dephasing.
//!
//! The pipeline is: exact vector waveguide modes ([`modesolver`]) feed a 1D
//! transfer-matrix cavity model ([`axial`]) and an adiabatic-taper
//! mode-matching calculation ([`taper`]); far-field propagation and Gaussian
//! lens coupling live in [`farfield`]; the emitter rate model in [`emission`]
//! combines them into efficiencies, and a polaron-transformed master equation
//! ([`phonon`], [`quantum`]) yields the indistinguishability. [`sweep`]
//! drives full design-space scans behind the command-line interface.

pub mod axial;
pub mod bessel;
pub mod config;
pub mod emission;
pub mod error;
pub mod farfield;
pub mod geometry;
pub mod modesolver;
pub mod phonon;
pub mod plot;
pub mod quantum;
pub mod sweep;
pub mod taper;

pub use error::{Error, Result};
pub use geometry::{DeviceGeometry, Layer, Material};
pub use modesolver::{ModeFamily, ModeLabel, ModeSolution};

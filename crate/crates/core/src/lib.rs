//! Secure key rate engine for decoy-state quantum key distribution.
//!
//! The crate models three photon sources (weak coherent pulses, heralded
//! single photons, and heralded pair-coherent states) feeding the BB84 and
//! SARG04 protocols over a lossy fiber channel, and computes GLLP-style
//! secure key rates with per-distance signal-intensity optimization.
//!
//! Modules mirror the processing pipeline:
//!
//! * [`numerics`]: Bessel I0, binary entropy, series summation, scalar search.
//! * [`sources`]: photon-number distributions, with and without heralding.
//! * [`channel`]: fiber transmittance, per-photon-number yields, overall gains.
//! * [`decoy`]: finite decoy-state bounds on single- and two-photon yields
//!   and error rates, plus a soundness oracle for those bounds.
//! * [`rate`]: key rate formulas and intensity optimization.
//! * [`experiment`]: distance sweeps, threshold and crossover location,
//!   average-gain reports, CSV emission.
//! * [`config`]: key=value configuration files shared by the CLI.

pub mod channel;
pub mod config;
pub mod decoy;
pub mod error;
pub mod experiment;
pub mod numerics;
pub mod rate;
pub mod sources;

pub use error::{Error, Result};

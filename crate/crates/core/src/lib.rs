//! Modeling and spectroscopy toolkit for microwave photon-magnon systems
//! built around a double-post re-entrant cavity loaded with a YIG sphere.
//!
//! - [`cavity`]: lumped LC model of the dark and bright cavity modes, the
//!   two-post magnetic field map, filling and geometric factors.
//! - [`magnonics`]: Walker mode lines of the sphere and their fit.
//! - [`coupled`]: normal modes of two-mode, three-mode chain and
//!   counter-rotating (Bogoliubov) Hamiltonians.
//! - [`spectra`]: transmission response, density maps, noise, CSV/PGM output.
//! - [`estimators`]: peak finding, damped least-squares fits of Lorentzians
//!   and avoided crossings, cooperativity and derived figures of merit.
//! - [`config`] and [`commands`]: the configuration format and the
//!   operations behind the `magcav` binary.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cavity;
pub mod commands;
pub mod config;
pub mod coupled;
pub mod eigen;
pub mod error;
pub mod estimators;
pub mod magnonics;
pub mod model;
pub mod spectra;
pub mod units;

pub use error::{Error, Result};
pub use model::{CouplingStrength, HybridModel, ModeKind, OscillatorMode, SphereSample};

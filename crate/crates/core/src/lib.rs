//! Simulator for a two-terminal ferroelectric analog non-volatile memory.
//!
//! The crate is organised bottom-up:
//!
//! - [`conduction`]: forward current model of a single junction (Ohmic and
//!   Poole-Frenkel regimes with thermal activation) and the regression
//!   fitters that recover activation energy, barrier height and field
//!   lowering coefficient from I(V, T) sweeps.
//! - [`device`]: the analog state machine (DC hysteresis, pulse driven
//!   potentiation/depression, read resistance, write energy).
//! - [`stochastic`]: cycle-to-cycle and device-to-device variability,
//!   retention drift and seed splitting.
//! - [`crossbar`]: arrays of devices under a V/2 write scheme, analog
//!   vector-matrix reads, programming loops and sneak-path metrics.
//! - [`inference`]: differential weight mapping and MLP inference on
//!   programmed crossbars.
//! - [`config`], [`io`] and [`cli`]: the command line front end.

pub mod cli;
pub mod conduction;
pub mod config;
pub mod crossbar;
pub mod device;
pub mod error;
pub mod inference;
pub mod io;
pub mod regression;
pub mod stochastic;

pub use error::{Error, Result};

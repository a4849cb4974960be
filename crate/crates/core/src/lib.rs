//! Design and analysis toolkit for airbridge-based superconducting circuits.
//!
//! The crate is organised by task:
//!
//! * [`capnet`] builds Maxwell capacitance matrices from lumped networks and
//!   applies the floating-pair mode transform.
//! * [`quantize`] turns inverse-capacitance blocks and SQUID parameters into
//!   transmon frequencies, anharmonicities and couplings, with an exact
//!   charge-basis diagonalization to check the perturbative formulas.
//! * [`scaffold`] simulates photoresist scaffold profiles from edge profiles
//!   and detects the flat regions that make long bridges collapse.
//! * [`fitkit`] fits measurement data: resistance chains, loss per bridge,
//!   notch-resonator transmission and TLS power saturation.
//! * [`layout`] places airbridges along CPW center lines and checks clearances.
//!
//! Energies are frequencies (E/h) in GHz, capacitances are in fF and lengths
//! in micrometers unless a name says otherwise.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capnet;
pub mod error;
pub mod fitkit;
pub mod format;
pub mod layout;
pub mod quantize;
pub mod scaffold;
pub mod units;

pub use error::{Error, Result};

//! Beam-squint analysis and squint-free combining for wideband linear phased arrays.
//!
//! All quantities are normalized to the carrier: frequency is expressed as a
//! fraction of `f_o`, time in carrier cycles, and the per-element delay of a
//! steered array is `(d/λ₀)·sin θ₀` cycles. Only fractional bandwidths appear.
//!
//! The crate is split along the signal chain:
//!
//! - [`analytic`]: closed-form space factor, coherent bandwidth, null and
//!   tone-fade predictions, reduced-IDFT sizing.
//! - [`dsp`]: QAM, RRC pulse shaping, DFT, fractional delay, AWGN, EVM.
//! - [`wavefront`]: per-element received streams (group delay plus carrier
//!   rotation), phase-shifter alignment and per-channel noise.
//! - [`combine`]: phase-shifter sum, full spatial IDFT and reduced IDFT.
//! - [`txrx`]: end-to-end single-carrier and OFDM receive chains.
//! - [`sweep`]: data-parallel parameter sweeps with deterministic seeding.

pub mod analytic;
pub mod combine;
pub mod dsp;
mod error;
pub mod exec;
pub mod seed;
pub mod sweep;
pub mod txrx;
pub mod wavefront;

pub use error::{Error, Result};
pub use exec::Exec;

pub use num_complex::Complex64;

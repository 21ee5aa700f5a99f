//! Baseband signal-processing primitives.

mod delay;
mod fft;
mod metrics;
mod noise;
mod qam;
mod rrc;
mod signal;

pub use delay::{delay_ramp_frequency, fractional_delay};
pub(crate) use delay::apply_ramp;
pub use fft::{dft, idft, Transform};
pub use metrics::{measure_evm, EvmReport, EVM_FLOOR_DB};
pub(crate) use metrics::energy_ratio_db;
pub use noise::{add_complex_noise, awgn, db_to_power};
pub use qam::{qam_demap, qam_map, Constellation};
pub use rrc::{pulse_shape, rrc_taps, FirFilter};
pub use signal::{ComplexSignal, SignalSpec};

//! Spectrum of the Fibonacci Hamiltonian through the trace recursion.

pub mod bands;
pub mod bandset;
pub mod trace;
pub mod transfer;

pub use bands::{approximant_bands, escape_sweep, spectrum_cover, DEFAULT_ROOT_TOLERANCE};
pub use bandset::{band_measure, BandSet};
pub use trace::{escape_test, half_trace, trace_sequence, OrbitRecord, OrbitStatus, TraceSequence, TraceSequenceState};
pub use transfer::{half_trace_oracle, transfer_matrix, ALPHA};

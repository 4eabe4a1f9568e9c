//! FFT-free PAPR reduction for oversampled OFDM.
//!
//! The two solvers in [`admm`] (T-ADMM with a fixed l-inf threshold,
//! TCU-ADMM with a per-iteration threshold) reduce the peak-to-average power
//! ratio of a time-domain OFDM symbol with purely elementwise updates. The
//! remaining modules form the simulation chain used to evaluate them: symbol
//! synthesis, an ICF baseline, a Rapp amplifier, an AWGN channel and receiver,
//! and the CCDF / PSD metrics.

pub mod admm;
pub mod channel;
pub mod dft;
pub mod diagnostics;
pub mod error;
pub mod icf;
pub mod metrics;
pub mod pipeline;
pub mod rng;
pub mod signal;

pub use admm::{solve, solve_traced, AdmmState, SolveResult, SolverParams, Variant};
pub use channel::{ber_experiment, BerExperiment, BerRecord, SspaParams};
pub use diagnostics::{diagnose, DiagnosticsReport};
pub use error::{Error, Result};
pub use icf::{icf, IcfParams};
pub use metrics::{ccdf, ccdf_abscissa, oobe, psd, CcdfCurve, PsdAccumulator, PsdCurve};
pub use num_complex::Complex64;
pub use pipeline::{random_symbol, Method};
pub use signal::{map_bits, papr, papr_db, synthesize, FreqSymbol, OfdmConfig, Scheme, TimeSignal};

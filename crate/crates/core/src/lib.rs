//! Adaptive constellation multiple access (ACMA).
//!
//! Several users' QAM symbols are superposed on one resource with
//! per-user phase offsets chosen by grid search so the composite
//! constellation has the largest possible minimum distance. The crate
//! provides the constellation algebra, the offset search and lookup
//! tables, the ACMA, JD-NOMA, PD-NOMA (SIC) and single-user receivers,
//! a Rayleigh/AWGN channel and a deterministic parallel Monte Carlo SER
//! engine with throughput and analytic SER references.

pub mod analytic;
pub mod channel;
pub mod config;
pub mod constellation;
pub mod error;
pub mod optimizer;
pub mod report;
pub mod simulator;
pub mod transceivers;

pub use channel::{ChannelSpec, Fading, NoiseSpec};
pub use config::{OffsetMode, SystemConfig};
pub use constellation::{compose, make_qam, CompositeConstellation, Constellation};
pub use error::{Error, Result};
pub use optimizer::{
    build_lookup, min_squared_distance, optimize_offsets, sweep_offsets, GridKind, LookupTable,
    MinDistance, OffsetVector, SearchGrid,
};
pub use simulator::{
    run_alpha_sweep, run_ser, ser_upper_bound, throughput, ExperimentSpec, Scheme, SerResult,
    ThroughputResult,
};
pub use transceivers::{DetectionResult, RxObservation};

pub use num_complex::Complex64;

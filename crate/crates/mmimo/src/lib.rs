//! Numerical laboratory for the uplink of very large multiuser MIMO systems.
//!
//! A base station with `M` antennas serves `K` single-antenna users over a
//! flat Rayleigh channel with per-user large-scale gains `beta_k`. The crate
//! covers the full chain from channel generation to system-level tradeoffs:
//!
//! * [`channel`] - large-scale profiles (hexagonal geometry, log-normal
//!   shadowing), fast-fading draws, and the favorable-propagation diagnostic.
//! * [`estimation`] - pilot-based MMSE channel estimation, in explicit-pilot
//!   and statistically equivalent forms, plus the pilot-contaminated
//!   multicell estimate.
//! * [`detection`] - MRC/ZF/MMSE combiners and per-realization SINR for
//!   perfect and estimated channel knowledge.
//! * [`bounds`] - closed-form achievable-rate lower bounds for all six
//!   (detector, CSI) combinations, including the Gamma second-order fit for
//!   MMSE with its fixed-point solver.
//! * [`montecarlo`] - seeded, reproducible ergodic-rate estimation,
//!   power-scaling sweeps, and required-power inversion.
//! * [`tradeoff`] - spectral/energy-efficiency closed forms (single-cell and
//!   multicell), low-power laws, the single-antenna reference mode, and the
//!   joint (power, users, training) optimizer.
//!
//! All randomness flows through explicitly seeded generators; every
//! stochastic routine is bitwise reproducible for a fixed seed regardless of
//! thread count.

pub mod bounds;
pub mod channel;
pub mod config;
pub mod detection;
pub mod estimation;
pub mod linalg;
pub mod montecarlo;
pub mod tradeoff;

mod error;

pub use config::{CellGeometry, SystemConfig};
pub use channel::{ChannelSet, LargeScaleProfile};
pub use detection::{CsiMode, DetectorKind, SinrSample};
pub use error::{Error, Result};
pub use estimation::{ChannelEstimate, PilotMatrix};
pub use bounds::{BoundResult, GammaParams};
pub use montecarlo::RateEstimate;
pub use tradeoff::TradeoffPoint;

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;

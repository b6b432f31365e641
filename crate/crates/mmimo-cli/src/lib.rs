//! Experiment registry, parameter plumbing, and CSV emission on top of the
//! `mmimo` library, plus the geometric intercell-interference estimator and
//! the OFDM coherence-interval helper.

pub mod experiments;
pub mod intercell;
pub mod ofdm;
pub mod params;

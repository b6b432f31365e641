//! Coherence interval in symbols from OFDM timing parameters.

use anyhow::{bail, Result};

/// Number of symbols per coherence interval: the whole count of OFDM
/// symbols fitting in the coherence time, times the frequency-smoothness
/// factor `Tu/Tg` (guard interval `Tg = Ts - Tu`), each factor rounded to
/// the nearest integer. With `Ts = 71.4` us, `Tu = 66.7` us, and
/// `Tc = 1` ms this gives `14 * 14 = 196`.
pub fn coherence_interval_from_ofdm(ts_us: f64, tu_us: f64, tc_ms: f64) -> Result<usize> {
    if !(tu_us > 0.0 && ts_us > tu_us) {
        bail!("need Ts > Tu > 0 for a positive guard interval (Ts = {ts_us}, Tu = {tu_us})");
    }
    if !(tc_ms > 0.0) {
        bail!("coherence time must be positive (got {tc_ms})");
    }
    let tg_us = ts_us - tu_us;
    let symbols = (tc_ms * 1000.0 / ts_us).round();
    let smoothness = (tu_us / tg_us).round();
    Ok((symbols * smoothness) as usize)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lte_like_parameters_give_196() {
        assert_eq!(coherence_interval_from_ofdm(71.4, 66.7, 1.0).unwrap(), 196);
    }

    #[test]
    fn vanishing_guard_interval_is_rejected() {
        assert!(coherence_interval_from_ofdm(66.7, 66.7, 1.0).is_err());
        assert!(coherence_interval_from_ofdm(60.0, 66.7, 1.0).is_err());
    }

    #[test]
    fn unit_smoothness_factor_counts_symbols() {
        // Ts = 2 Tu makes Tg = Tu, so the smoothness factor is exactly 1.
        assert_eq!(coherence_interval_from_ofdm(100.0, 50.0, 1.4).unwrap(), 14);
    }
}

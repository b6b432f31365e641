use crate::{Error, Result};

/// Cell geometry and propagation parameters for the large-scale fading model.
///
/// Users are dropped uniformly in a hexagonal cell of radius `radius_m`
/// (center to vertex) and redrawn while closer than `r_h_m` to the base
/// station. The gain of a user at distance `r` is `z / (r / r_h)^nu` with
/// `10*log10(z) ~ Normal(0, shadow_sigma_db^2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGeometry {
    /// Cell radius, center to vertex, in meters.
    pub radius_m: f64,
    /// Exclusion radius around the base station in meters.
    pub r_h_m: f64,
    /// Log-normal shadowing standard deviation in dB.
    pub shadow_sigma_db: f64,
    /// Path-loss exponent.
    pub nu: f64,
}

impl CellGeometry {
    pub fn new(radius_m: f64, r_h_m: f64, shadow_sigma_db: f64, nu: f64) -> Result<Self> {
        let g = CellGeometry { radius_m, r_h_m, shadow_sigma_db, nu };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_h_m > 0.0 && self.r_h_m < self.radius_m) {
            return Err(Error::InvalidParameter(format!(
                "exclusion radius must satisfy 0 < r_h < radius (got r_h = {}, radius = {})",
                self.r_h_m, self.radius_m
            )));
        }
        if !(self.nu > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "path-loss exponent must be positive (got {})",
                self.nu
            )));
        }
        if !(self.shadow_sigma_db >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "shadowing sigma must be non-negative (got {})",
                self.shadow_sigma_db
            )));
        }
        Ok(())
    }
}

impl Default for CellGeometry {
    /// 1000 m cell, 100 m exclusion radius, 8 dB shadowing, exponent 3.8.
    fn default() -> Self {
        CellGeometry { radius_m: 1000.0, r_h_m: 100.0, shadow_sigma_db: 8.0, nu: 3.8 }
    }
}

/// Full single-cell (or simplified multicell) operating point.
///
/// `pu` is the normalized transmit SNR per user (linear, not dB). The pilot
/// power is always derived as `pp = tau * pu`, never set independently.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemConfig {
    /// Base-station antenna count.
    pub m: usize,
    /// Number of single-antenna users.
    pub k: usize,
    /// Pilot length in symbols; `k <= tau <= t`.
    pub tau: usize,
    /// Coherence interval in symbols.
    pub t: usize,
    /// Normalized per-user transmit SNR (linear).
    pub pu: f64,
    /// Cell count; 1 means single-cell.
    pub l: usize,
    /// Intercell interference factor in [0, 1].
    pub beta_inter: f64,
    /// Geometry for large-scale draws.
    pub geometry: CellGeometry,
}

impl SystemConfig {
    pub fn new(m: usize, k: usize, tau: usize, t: usize, pu: f64) -> Result<Self> {
        let c = SystemConfig {
            m,
            k,
            tau,
            t,
            pu,
            l: 1,
            beta_inter: 0.0,
            geometry: CellGeometry::default(),
        };
        c.validate()?;
        Ok(c)
    }

    /// Pilot power `pp = tau * pu`.
    pub fn pp(&self) -> f64 {
        self.tau as f64 * self.pu
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 1 || self.k < 1 {
            return Err(Error::InvalidParameter(format!(
                "need at least one antenna and one user (got M = {}, K = {})",
                self.m, self.k
            )));
        }
        if !(self.k <= self.tau && self.tau <= self.t) {
            return Err(Error::InvalidParameter(format!(
                "pilot length must satisfy K <= tau <= T (got K = {}, tau = {}, T = {})",
                self.k, self.tau, self.t
            )));
        }
        if !(self.pu > 0.0 && self.pu.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "transmit SNR must be positive and finite (got {})",
                self.pu
            )));
        }
        if self.l < 1 {
            return Err(Error::InvalidParameter("cell count must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.beta_inter) {
            return Err(Error::InvalidParameter(format!(
                "intercell factor must lie in [0, 1] (got {})",
                self.beta_inter
            )));
        }
        self.geometry.validate()
    }
}

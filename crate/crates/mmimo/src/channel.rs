//! Channel generation: large-scale fading profiles over a hexagonal cell,
//! i.i.d. Rayleigh fast fading, composite channel assembly, and the
//! favorable-propagation diagnostic.
//!
//! The composite channel is `G = H D^{1/2}`: `g_mk = h_mk * sqrt(beta_k)`,
//! with `h_mk` circularly-symmetric complex Gaussian of unit variance and
//! `beta_k` the large-scale gain of user `k`.

use ndarray::{Array2, ArrayView2};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::config::CellGeometry;
use crate::{C64, Error, Result};

/// Per-user large-scale power gains `beta_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct LargeScaleProfile {
    betas: Vec<f64>,
}

impl LargeScaleProfile {
    pub fn new(betas: Vec<f64>) -> Result<Self> {
        if betas.is_empty() {
            return Err(Error::InvalidParameter("profile needs at least one user".into()));
        }
        if let Some(b) = betas.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "large-scale gains must be positive and finite (got {b})"
            )));
        }
        Ok(LargeScaleProfile { betas })
    }

    /// All-ones profile (`D = I`), used by the efficiency closed forms.
    pub fn uniform(k: usize) -> Self {
        LargeScaleProfile { betas: vec![1.0; k] }
    }

    /// Constant profile with gain `beta` for every user.
    pub fn constant(k: usize, beta: f64) -> Result<Self> {
        Self::new(vec![beta; k])
    }

    pub fn k(&self) -> usize {
        self.betas.len()
    }

    pub fn betas(&self) -> &[f64] {
        &self.betas
    }
}

/// A fast-fading draw together with its profile and composite matrix.
#[derive(Debug, Clone)]
pub struct ChannelSet {
    /// M x K fast-fading matrix with unit-variance entries.
    pub h: Array2<C64>,
    /// Large-scale profile (diagonal of `D`).
    pub d: LargeScaleProfile,
    /// Composite M x K channel `G = H D^{1/2}`.
    pub g: Array2<C64>,
}

/// Channels from the users of several cells to one base station.
/// Index 0 is the station's own cell.
#[derive(Debug, Clone)]
pub struct ChannelFamily {
    pub cells: Vec<ChannelSet>,
}

/// Uniform point in a hexagon of the given center-to-vertex radius, centered
/// at the origin with two vertices on the x-axis. Rejection from the
/// bounding box; acceptance probability is about 0.65.
pub fn sample_hexagon<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> (f64, f64) {
    let half_height = radius * 3f64.sqrt() / 2.0;
    loop {
        let x = rng.gen_range(-radius..radius);
        let y = rng.gen_range(-half_height..half_height);
        // Inside iff below the slanted edges; the horizontal edges are the
        // box bounds themselves.
        if y.abs() <= 3f64.sqrt() * (radius - x.abs()) {
            return (x, y);
        }
    }
}

/// Draw a large-scale profile: each user lands uniformly in the hexagonal
/// cell (redrawn while closer than `r_h` to the station) and gets
/// `beta = z * (r / r_h)^(-nu)` with log-normal shadowing `z`.
pub fn draw_large_scale<R: Rng + ?Sized>(
    geometry: &CellGeometry,
    k: usize,
    rng: &mut R,
) -> Result<LargeScaleProfile> {
    geometry.validate()?;
    if k == 0 {
        return Err(Error::InvalidParameter("need at least one user".into()));
    }
    let ln10_over_10 = std::f64::consts::LN_10 / 10.0;
    let mut betas = Vec::with_capacity(k);
    for _ in 0..k {
        let r = loop {
            let (x, y) = sample_hexagon(geometry.radius_m, rng);
            let r = x.hypot(y);
            if r >= geometry.r_h_m {
                break r;
            }
        };
        let shadow_db: f64 = {
            let n: f64 = rng.sample(StandardNormal);
            n * geometry.shadow_sigma_db
        };
        let z = (shadow_db * ln10_over_10).exp();
        betas.push(z * (r / geometry.r_h_m).powf(-geometry.nu));
    }
    LargeScaleProfile::new(betas)
}

/// M x K matrix of i.i.d. circularly-symmetric complex Gaussians with unit
/// total variance (1/2 per component).
pub fn draw_fast_fading<R: Rng + ?Sized>(m: usize, k: usize, rng: &mut R) -> Array2<C64> {
    let scale = 0.5f64.sqrt();
    Array2::from_shape_simple_fn((m, k), || {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re * scale, im * scale)
    })
}

/// Combine fast fading and a large-scale profile into `G = H D^{1/2}`.
pub fn assemble_channel(h: Array2<C64>, d: LargeScaleProfile) -> Result<ChannelSet> {
    if h.ncols() != d.k() {
        return Err(Error::Dimension(format!(
            "H has {} columns but the profile has {} users",
            h.ncols(),
            d.k()
        )));
    }
    let mut g = h.clone();
    for (j, beta) in d.betas().iter().enumerate() {
        let s = beta.sqrt();
        for v in g.column_mut(j) {
            *v *= s;
        }
    }
    Ok(ChannelSet { h, d, g })
}

/// Draw a channel and composite matrix in one step.
pub fn draw_channel<R: Rng + ?Sized>(
    m: usize,
    d: &LargeScaleProfile,
    rng: &mut R,
) -> ChannelSet {
    let h = draw_fast_fading(m, d.k(), rng);
    assemble_channel(h, d.clone()).expect("profile length matches by construction")
}

/// Simplified multicell draw: the home cell has unit gains and each of the
/// `l - 1` interfering cells has constant gain `beta_inter` toward the home
/// station. A zero factor (or `l = 1`) carries no interference at all, so
/// the family collapses to the home cell alone; downstream consumers then
/// take the exact single-cell path.
pub fn draw_simplified_multicell<R: Rng + ?Sized>(
    m: usize,
    k: usize,
    l: usize,
    beta_inter: f64,
    rng: &mut R,
) -> Result<ChannelFamily> {
    if l < 1 {
        return Err(Error::InvalidParameter("cell count must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&beta_inter) {
        return Err(Error::InvalidParameter(format!(
            "intercell factor must lie in [0, 1] (got {beta_inter})"
        )));
    }
    let mut cells = Vec::with_capacity(l);
    cells.push(draw_channel(m, &LargeScaleProfile::uniform(k), rng));
    if beta_inter > 0.0 {
        for _ in 1..l {
            let d = LargeScaleProfile::constant(k, beta_inter)?;
            cells.push(draw_channel(m, &d, rng));
        }
    }
    Ok(ChannelFamily { cells })
}

/// Sum rate of the realized channel together with its two sandwich bounds.
///
/// Returns `(lower, upper, sum_rate)` where
/// `sum_rate = log2 det(I + pu * H^H H)` (equivalently the sum of
/// `log2(1 + pu * s^2)` over singular values `s` of `H`),
/// `lower = log2(1 + pu * ||H||_F^2)` and
/// `upper = sum_k log2(1 + pu * ||h_k||^2)`.
///
/// Both bounds hold for every realization; under favorable propagation
/// (orthogonal columns of equal norm `M`) they reduce to
/// `log2(1 + M K pu)` and `K log2(1 + M pu)`, and the upper bound is met
/// with equality.
pub fn favorable_propagation_bounds(
    h: &ArrayView2<C64>,
    pu: f64,
) -> Result<(f64, f64, f64)> {
    let (m, k) = h.dim();
    if m < k {
        return Err(Error::Regime(format!(
            "diagnostic expects at least as many antennas as users (M = {m}, K = {k})"
        )));
    }
    if !(pu > 0.0) {
        return Err(Error::InvalidParameter(format!("pu must be positive (got {pu})")));
    }
    let norms = crate::linalg::col_norms_sq(h);
    if norms.iter().all(|&n| n == 0.0) {
        return Err(Error::InvalidParameter("H must be nonzero".into()));
    }
    let lower = (1.0 + pu * norms.sum()).log2();
    let upper = norms.iter().map(|&n| (1.0 + pu * n).log2()).sum::<f64>();

    // I + pu * Gram is positive definite for every H, including
    // rank-deficient ones (zero singular values contribute zero rate).
    let mut shifted = crate::linalg::herm_gram(h);
    for v in shifted.iter_mut() {
        *v *= pu;
    }
    for i in 0..k {
        shifted[[i, i]] += 1.0;
    }
    let chol = crate::linalg::Cholesky::factor(&shifted.view())?;
    let sum_rate = chol.log2_det();
    Ok((lower, upper, sum_rate))
}

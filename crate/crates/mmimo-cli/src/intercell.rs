//! Geometric estimate of the intercell interference factor: the mean ratio
//! of the large-scale gains, toward the home base station, of a user in a
//! uniformly chosen nearest co-channel cell and a user in the home cell.

use anyhow::{bail, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use mmimo::channel::sample_hexagon;
use mmimo::CellGeometry;

/// Uniform position in the hexagonal cell, at least `r_h` from its center.
fn place<R: Rng + ?Sized>(geometry: &CellGeometry, rng: &mut R) -> (f64, f64) {
    loop {
        let (x, y) = sample_hexagon(geometry.radius_m, rng);
        if x.hypot(y) >= geometry.r_h_m {
            return (x, y);
        }
    }
}

/// Mean of `beta_2 / beta_1` over random user pairs, where user 1 sits in
/// the home cell and user 2 in one of the six nearest cells of the
/// co-channel tiling. Both gains are toward the home base station, each
/// `z * (r / r_h)^-nu` with log-normal shadowing `z`.
///
/// Reuse 1 places the co-channel ring at distance `sqrt(3) R` (the
/// edge-sharing neighbors); reuse 3 pushes it to `3 R`.
pub fn estimate_intercell_beta(
    geometry: &CellGeometry,
    nu: f64,
    shadow_sigma_db: f64,
    reuse: u32,
    samples: usize,
    seed: u64,
) -> Result<f64> {
    if samples == 0 {
        bail!("need at least one sample");
    }
    if !(nu > 0.0 && nu.is_finite()) {
        bail!("path-loss exponent must be positive (got {nu})");
    }
    if !(shadow_sigma_db >= 0.0 && shadow_sigma_db.is_finite()) {
        bail!("shadowing spread must be nonnegative (got {shadow_sigma_db})");
    }
    let (center_dist, first_angle) = match reuse {
        1 => (3f64.sqrt() * geometry.radius_m, 30f64.to_radians()),
        3 => (3.0 * geometry.radius_m, 0.0),
        other => bail!("unsupported reuse factor {other} (supported: 1, 3)"),
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sigma_nat = shadow_sigma_db * std::f64::consts::LN_10 / 10.0;
    let mut acc = 0.0;
    for _ in 0..samples {
        let (x1, y1) = place(geometry, &mut rng);
        let r1 = x1.hypot(y1);

        let sector = rng.gen_range(0u32..6);
        let angle = first_angle + f64::from(sector) * 60f64.to_radians();
        let (cx, cy) = (center_dist * angle.cos(), center_dist * angle.sin());
        let (x2, y2) = place(geometry, &mut rng);
        let r2 = (cx + x2).hypot(cy + y2);

        let n1: f64 = rng.sample(StandardNormal);
        let n2: f64 = rng.sample(StandardNormal);
        let shadow_ratio = (sigma_nat * (n2 - n1)).exp();
        acc += shadow_ratio * (r2 / r1).powf(-nu);
    }
    Ok(acc / samples as f64)
}

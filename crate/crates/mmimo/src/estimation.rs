//! Pilot-based MMSE channel estimation.
//!
//! The pilot phase sends `tau` orthonormal pilot symbols at power
//! `pp = tau * pu`; the estimate shrinks the matched-filtered observation
//! toward zero by the per-user factor `d_tilde_k = pp beta_k / (pp beta_k + 1)`.
//! Monte-Carlo loops use the statistically equivalent form
//! `G_hat = (G + W / sqrt(pp)) D_tilde`, which never materializes the
//! M x tau pilot block; the explicit pilot path exists so the equivalence
//! can be checked numerically.

use ndarray::{Array2, ArrayView2};

use crate::channel::{ChannelFamily, LargeScaleProfile};
use crate::linalg;
use crate::{C64, Error, Result};

/// Orthonormal pilot block: first K columns of the scaled tau x tau DFT.
#[derive(Debug, Clone)]
pub struct PilotMatrix {
    phi: Array2<C64>,
}

impl PilotMatrix {
    /// Build the pilot block from the unitary DFT matrix. Columns are
    /// exactly orthonormal in exact arithmetic; numerically `Phi^H Phi`
    /// matches the identity to well under 1e-12 per entry.
    pub fn dft(tau: usize, k: usize) -> Result<Self> {
        if tau == 0 || k == 0 {
            return Err(Error::InvalidParameter("pilot block needs tau >= k >= 1".into()));
        }
        if tau < k {
            return Err(Error::InvalidParameter(format!(
                "pilot length {tau} cannot serve {k} users"
            )));
        }
        let scale = 1.0 / (tau as f64).sqrt();
        let base = -2.0 * std::f64::consts::PI / tau as f64;
        let phi = Array2::from_shape_fn((tau, k), |(j, c)| {
            let angle = base * (j as f64) * (c as f64);
            C64::new(angle.cos() * scale, angle.sin() * scale)
        });
        Ok(PilotMatrix { phi })
    }

    pub fn tau(&self) -> usize {
        self.phi.nrows()
    }

    pub fn k(&self) -> usize {
        self.phi.ncols()
    }

    pub fn as_array(&self) -> ArrayView2<'_, C64> {
        self.phi.view()
    }
}

/// MMSE channel estimate with its per-user statistics.
#[derive(Debug, Clone)]
pub struct ChannelEstimate {
    /// M x K estimated channel.
    pub g_hat: Array2<C64>,
    /// Per-user estimation-error variance `beta_i / (pp beta_i + 1)`.
    pub error_vars: Vec<f64>,
    /// Per-user shrinkage factor, the diagonal of `D_tilde`.
    pub d_tilde: Vec<f64>,
}

fn check_pp(pp: f64) -> Result<()> {
    if !(pp > 0.0 && pp.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "pilot power must be positive and finite (got {pp})"
        )));
    }
    Ok(())
}

/// Received pilot block `Y_p = sqrt(pp) G Phi^T + N` with `N` an M x tau
/// noise matrix of unit-variance entries.
pub fn simulate_pilot_observation(
    g: &ArrayView2<C64>,
    phi: &PilotMatrix,
    pp: f64,
    n: &ArrayView2<C64>,
) -> Result<Array2<C64>> {
    check_pp(pp)?;
    let (m, k) = g.dim();
    if k != phi.k() {
        return Err(Error::Dimension(format!(
            "channel serves {k} users but the pilot block serves {}",
            phi.k()
        )));
    }
    if n.dim() != (m, phi.tau()) {
        return Err(Error::Dimension(format!(
            "noise must be {m} x {}, got {} x {}",
            phi.tau(),
            n.nrows(),
            n.ncols()
        )));
    }
    let phi_t = phi.as_array().reversed_axes();
    let mut y = linalg::matmul(g, &phi_t)?;
    let s = pp.sqrt();
    for (yv, nv) in y.iter_mut().zip(n.iter()) {
        *yv = *yv * s + nv;
    }
    Ok(y)
}

fn shrinkage(pp: f64, d: &LargeScaleProfile) -> (Vec<f64>, Vec<f64>) {
    let d_tilde: Vec<f64> = d.betas().iter().map(|b| pp * b / (pp * b + 1.0)).collect();
    let error_vars: Vec<f64> = d.betas().iter().map(|b| b / (pp * b + 1.0)).collect();
    (d_tilde, error_vars)
}

/// MMSE estimate from the explicit pilot observation:
/// `G_hat = (1/sqrt(pp)) Y_p Phi^* D_tilde`.
pub fn mmse_estimate(
    y_p: &ArrayView2<C64>,
    phi: &PilotMatrix,
    pp: f64,
    d: &LargeScaleProfile,
) -> Result<ChannelEstimate> {
    check_pp(pp)?;
    if d.k() != phi.k() {
        return Err(Error::Dimension(format!(
            "profile covers {} users but the pilot block serves {}",
            d.k(),
            phi.k()
        )));
    }
    if y_p.ncols() != phi.tau() {
        return Err(Error::Dimension(format!(
            "observation has {} columns but the pilot length is {}",
            y_p.ncols(),
            phi.tau()
        )));
    }
    let phi_conj = phi.as_array().mapv(|x| x.conj());
    let mut g_hat = linalg::matmul(y_p, &phi_conj.view())?;
    let (d_tilde, error_vars) = shrinkage(pp, d);
    let inv_s = 1.0 / pp.sqrt();
    for (j, dt) in d_tilde.iter().enumerate() {
        let f = inv_s * dt;
        for v in g_hat.column_mut(j) {
            *v *= f;
        }
    }
    Ok(ChannelEstimate { g_hat, error_vars, d_tilde })
}

/// Statistically equivalent estimate `G_hat = (G + W/sqrt(pp)) D_tilde`
/// from an M x K noise draw; the form every Monte-Carlo loop uses.
pub fn mmse_estimate_equivalent(
    g: &ArrayView2<C64>,
    w: &ArrayView2<C64>,
    pp: f64,
    d: &LargeScaleProfile,
) -> Result<ChannelEstimate> {
    check_pp(pp)?;
    if g.dim() != w.dim() {
        return Err(Error::Dimension(format!(
            "channel is {} x {} but noise is {} x {}",
            g.nrows(),
            g.ncols(),
            w.nrows(),
            w.ncols()
        )));
    }
    if g.ncols() != d.k() {
        return Err(Error::Dimension(format!(
            "channel serves {} users but the profile covers {}",
            g.ncols(),
            d.k()
        )));
    }
    let (d_tilde, error_vars) = shrinkage(pp, d);
    let inv_s = 1.0 / pp.sqrt();
    let (m, k) = g.dim();
    let mut g_hat = Array2::<C64>::zeros((m, k));
    for j in 0..k {
        let dt = d_tilde[j];
        for i in 0..m {
            g_hat[[i, j]] = (g[[i, j]] + w[[i, j]] * inv_s) * dt;
        }
    }
    Ok(ChannelEstimate { g_hat, error_vars, d_tilde })
}

/// Pilot-contaminated estimate of the home-cell channel when the same
/// pilot block is reused in every cell of the family:
/// `G_hat = (sum_i G_i + W/sqrt(pp)) D_tilde` with
/// `d_tilde_k = beta_0k / (sum_i beta_ik + 1/pp)`.
///
/// A family with a single cell takes the single-cell code path, so the
/// result is then bitwise identical to [`mmse_estimate_equivalent`].
pub fn multicell_mmse_estimate(
    family: &ChannelFamily,
    w: &ArrayView2<C64>,
    pp: f64,
) -> Result<ChannelEstimate> {
    let home = family
        .cells
        .first()
        .ok_or_else(|| Error::InvalidParameter("family has no cells".into()))?;
    if family.cells.len() == 1 {
        return mmse_estimate_equivalent(&home.g.view(), w, pp, &home.d);
    }
    check_pp(pp)?;
    let (m, k) = home.g.dim();
    if w.dim() != (m, k) {
        return Err(Error::Dimension(format!(
            "noise must be {m} x {k}, got {} x {}",
            w.nrows(),
            w.ncols()
        )));
    }
    for cell in &family.cells {
        if cell.g.dim() != (m, k) {
            return Err(Error::Dimension("family cells must share dimensions".into()));
        }
    }
    let mut beta_sums = vec![0.0f64; k];
    for cell in &family.cells {
        for (s, b) in beta_sums.iter_mut().zip(cell.d.betas()) {
            *s += b;
        }
    }
    let d_tilde: Vec<f64> = home
        .d
        .betas()
        .iter()
        .zip(&beta_sums)
        .map(|(b, s)| b / (s + 1.0 / pp))
        .collect();
    // Marginal error variance toward the home channel, contamination
    // included: beta_k (1 - d_tilde_k).
    let error_vars: Vec<f64> = home
        .d
        .betas()
        .iter()
        .zip(&d_tilde)
        .map(|(b, dt)| b * (1.0 - dt))
        .collect();
    let inv_s = 1.0 / pp.sqrt();
    let mut g_hat = Array2::<C64>::zeros((m, k));
    for cell in &family.cells {
        g_hat += &cell.g;
    }
    for j in 0..k {
        let dt = d_tilde[j];
        for i in 0..m {
            g_hat[[i, j]] = (g_hat[[i, j]] + w[[i, j]] * inv_s) * dt;
        }
    }
    Ok(ChannelEstimate { g_hat, error_vars, d_tilde })
}

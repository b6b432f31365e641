//! Spectral/energy-efficiency closed forms with training overhead, their
//! low-power Taylor laws, the simplified multicell extension, asymptotic
//! multicell SINRs, the single-antenna reference mode, and the joint
//! (pu, K, tau) energy-efficiency optimizer.
//!
//! All efficiency closed forms assume unit large-scale gains for every
//! user and estimated channels with pilot length tau; spectral efficiency
//! carries the `(T - tau)/T` training penalty and sums over users.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use rayon::prelude::*;

use crate::detection::{CsiMode, DetectorKind};
use crate::{Error, Result};

/// One operating point of the efficiency tradeoff.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffPoint {
    /// Sum spectral efficiency, bits per channel use.
    pub se: f64,
    /// Energy efficiency `se / pu`.
    pub ee: f64,
    pub pu: f64,
    pub k: usize,
    pub tau: usize,
    pub detector: DetectorKind,
}

impl TradeoffPoint {
    /// Package a point so that `ee * pu == se` holds bitwise: `se` is
    /// re-derived from the rounded ratio.
    pub fn new(se: f64, pu: f64, k: usize, tau: usize, detector: DetectorKind) -> Self {
        let ee = se / pu;
        let se = ee * pu;
        TradeoffPoint { se, ee, pu, k, tau, detector }
    }
}

fn validate_cell(kind: DetectorKind, m: usize, k: usize, tau: usize, t: usize, pu: f64) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidParameter("need at least one user".into()));
    }
    if tau < k || tau > t {
        return Err(Error::Regime(format!(
            "pilot length must satisfy K <= tau <= T (K = {k}, tau = {tau}, T = {t})"
        )));
    }
    if !(pu > 0.0 && pu.is_finite()) {
        return Err(Error::InvalidParameter(format!("pu must be positive (got {pu})")));
    }
    match kind {
        DetectorKind::Mrc => {
            if m < 2 {
                return Err(Error::Regime(format!("MRC needs M >= 2 (got {m})")));
            }
        }
        DetectorKind::Zf => {
            if m < k + 1 {
                return Err(Error::Regime(format!(
                    "ZF needs M >= K + 1 (got M = {m}, K = {k})"
                )));
            }
        }
        DetectorKind::Mmse => {
            return Err(Error::InvalidParameter(
                "efficiency closed forms cover MRC and ZF only".into(),
            ));
        }
    }
    Ok(())
}

/// Sum spectral efficiency with estimated channels and unit gains:
/// `((T - tau)/T) K log2(1 + SINR)` with the effective SINR
/// `tau (M-1) pu^2 / (tau (K-1) pu^2 + (K + tau) pu + 1)` for MRC and
/// `tau (M-K) pu^2 / ((K + tau) pu + 1)` for ZF.
pub fn se_single_cell(
    kind: DetectorKind,
    m: usize,
    k: usize,
    tau: usize,
    pu: f64,
    t: usize,
) -> Result<f64> {
    validate_cell(kind, m, k, tau, t, pu)?;
    let tauf = tau as f64;
    let kf = k as f64;
    let sinr = match kind {
        DetectorKind::Mrc => {
            let num = tauf * ((m - 1) as f64) * pu * pu;
            let den = tauf * (kf - 1.0) * pu * pu + (kf + tauf) * pu + 1.0;
            num / den
        }
        DetectorKind::Zf => {
            let num = tauf * ((m - k) as f64) * pu * pu;
            let den = (kf + tauf) * pu + 1.0;
            num / den
        }
        DetectorKind::Mmse => unreachable!("rejected by validate_cell"),
    };
    Ok((t - tau) as f64 / t as f64 * kf * (1.0 + sinr).log2())
}

/// The same operating point packaged with its energy efficiency.
pub fn ee_single_cell(
    kind: DetectorKind,
    m: usize,
    k: usize,
    tau: usize,
    pu: f64,
    t: usize,
) -> Result<TradeoffPoint> {
    let se = se_single_cell(kind, m, k, tau, pu, t)?;
    Ok(TradeoffPoint::new(se, pu, k, tau, kind))
}

/// Low-power Taylor law: spectral efficiency
/// `se ~ ((T - tau)/T) K log2(e) tau (M-1) pu^2` (ZF replaces `M-1` by
/// `M-K`), and the induced power-free relation `ee = sqrt(c se)` with `c`
/// the same leading coefficient. Returns `(se_approx, ee_from_se)`.
pub fn low_power_laws(
    kind: DetectorKind,
    m: usize,
    k: usize,
    tau: usize,
    t: usize,
    pu: f64,
) -> Result<(f64, f64)> {
    validate_cell(kind, m, k, tau, t, pu)?;
    let gain = match kind {
        DetectorKind::Mrc => (m - 1) as f64,
        DetectorKind::Zf => (m - k) as f64,
        DetectorKind::Mmse => unreachable!("rejected by validate_cell"),
    };
    let c = (t - tau) as f64 / t as f64
        * k as f64
        * std::f64::consts::LOG2_E
        * tau as f64
        * gain;
    let se_approx = c * pu * pu;
    let ee = (c * se_approx).sqrt();
    Ok((se_approx, ee))
}

/// Sum spectral efficiency in the symmetric multicell model: `L` cells
/// reuse the same pilots and every cross gain is `beta_inter`. `L = 1` or
/// `beta_inter = 0` takes the single-cell code path, so the reduction is
/// exact to the bit.
pub fn se_multicell(
    kind: DetectorKind,
    m: usize,
    k: usize,
    tau: usize,
    pu: f64,
    t: usize,
    l: usize,
    beta_inter: f64,
) -> Result<f64> {
    if l < 1 {
        return Err(Error::InvalidParameter("cell count must be at least 1".into()));
    }
    if !(0.0..=1.0).contains(&beta_inter) {
        return Err(Error::InvalidParameter(format!(
            "intercell factor must lie in [0, 1] (got {beta_inter})"
        )));
    }
    if l == 1 || beta_inter == 0.0 {
        return se_single_cell(kind, m, k, tau, pu, t);
    }
    validate_cell(kind, m, k, tau, t, pu)?;
    let tauf = tau as f64;
    let kf = k as f64;
    // Aggregate contamination gain over the pilot-sharing cells.
    let lb = (l - 1) as f64 * beta_inter + 1.0;
    let sinr = match kind {
        DetectorKind::Mrc => {
            let num = tauf * ((m - 1) as f64) * pu * pu;
            let den = tauf
                * (kf * lb * lb - 1.0 + beta_inter * (lb - 1.0) * ((m - 2) as f64))
                * pu
                * pu
                + lb * (kf + tauf) * pu
                + 1.0;
            num / den
        }
        DetectorKind::Zf => {
            let num = tauf * ((m - k) as f64) * pu * pu;
            let den = tauf * kf * (lb * lb - lb * beta_inter + beta_inter - 1.0) * pu * pu
                + lb * (kf + tauf) * pu
                + 1.0;
            num / den
        }
        DetectorKind::Mmse => unreachable!("rejected by validate_cell"),
    };
    Ok((t - tau) as f64 / t as f64 * kf * (1.0 + sinr).log2())
}

/// Limiting per-user SINR as the antenna count grows without bound, under
/// the matching power-scaling law. With known channels (`pu = Eu/M`) only
/// the own-cell gain survives; with estimated channels (`pu = Eu/sqrt(M)`)
/// pilot contamination from same-pilot interferers remains.
pub fn multicell_asymptotic_sinr(
    csi: CsiMode,
    eu: f64,
    tau: usize,
    beta_home: f64,
    interferer_betas: &[f64],
) -> Result<f64> {
    if !(eu > 0.0 && eu.is_finite()) {
        return Err(Error::InvalidParameter(format!("Eu must be positive (got {eu})")));
    }
    if !(beta_home > 0.0 && beta_home.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "home gain must be positive (got {beta_home})"
        )));
    }
    match csi {
        CsiMode::Perfect => Ok(beta_home * eu),
        CsiMode::Imperfect => {
            if tau < 1 {
                return Err(Error::InvalidParameter("tau must be at least 1".into()));
            }
            let tauf = tau as f64;
            let num = tauf * beta_home * beta_home * eu * eu;
            let den = tauf
                * interferer_betas.iter().map(|b| b * b).sum::<f64>()
                * eu
                * eu
                + 1.0;
            Ok(num / den)
        }
    }
}

/// Single-antenna, single-user baseline: sweep the pilot length and return
/// the best `(se, ee, tau_opt)` where
/// `se(tau) = ((T - tau)/T) E log2(1 + tau pu^2 z / (1 + pu (1 + tau)))`
/// with `z` standard-exponential (the squared magnitude of a unit complex
/// Gaussian channel). One shared sample set serves every tau.
pub fn reference_mode(t: usize, pu: f64, trials: usize, seed: u64) -> Result<(f64, f64, usize)> {
    if t < 2 {
        return Err(Error::InvalidParameter(format!(
            "coherence interval must be at least 2 (got {t})"
        )));
    }
    if !(pu > 0.0 && pu.is_finite()) {
        return Err(Error::InvalidParameter(format!("pu must be positive (got {pu})")));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one sample".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let z: Vec<f64> = (0..trials).map(|_| rng.sample(Exp1)).collect();

    let curve: Vec<(usize, f64)> = (1..t)
        .into_par_iter()
        .map(|tau| {
            let c = tau as f64 * pu * pu / (1.0 + pu * (1.0 + tau as f64));
            let mean =
                z.iter().map(|&x| (1.0 + c * x).log2()).sum::<f64>() / trials as f64;
            (tau, (t - tau) as f64 / t as f64 * mean)
        })
        .collect();

    let mut best = (0usize, f64::NEG_INFINITY);
    for (tau, se) in curve {
        if se > best.1 {
            best = (tau, se);
        }
    }
    let (tau_opt, se) = best;
    Ok((se, se / pu, tau_opt))
}

/// Search ranges for the joint optimizer.
#[derive(Debug, Clone, Copy)]
pub struct OptimizerGrids {
    pub k_min: usize,
    pub k_max: usize,
    pub pu_lo: f64,
    pub pu_hi: f64,
}

impl Default for OptimizerGrids {
    fn default() -> Self {
        OptimizerGrids { k_min: 1, k_max: 80, pu_lo: 1e-6, pu_hi: 1e6 }
    }
}

fn optimize_generic<F>(
    se_fn: F,
    t: usize,
    se_target: f64,
    grids: OptimizerGrids,
    detector: DetectorKind,
) -> Result<TradeoffPoint>
where
    F: Fn(usize, usize, f64) -> Option<f64> + Sync,
{
    if !(se_target > 0.0 && se_target.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "target spectral efficiency must be positive (got {se_target})"
        )));
    }
    if grids.k_min < 1 || grids.k_min > grids.k_max || !(grids.pu_lo > 0.0) || grids.pu_lo >= grids.pu_hi {
        return Err(Error::InvalidParameter("degenerate optimizer grids".into()));
    }

    // One best point per K (cells within a K are scanned in tau order);
    // the final fold runs in K order so ties resolve to the lowest K, then
    // the lowest tau.
    let per_k: Vec<(Option<TradeoffPoint>, f64)> = (grids.k_min..=grids.k_max)
        .into_par_iter()
        .map(|k| {
            let mut best: Option<TradeoffPoint> = None;
            let mut ceiling = f64::NEG_INFINITY;
            for tau in k..t {
                let Some(se_hi) = se_fn(k, tau, grids.pu_hi) else { continue };
                ceiling = ceiling.max(se_hi);
                if se_hi < se_target {
                    continue;
                }
                // Power meeting the target exactly, by log-domain bisection
                // on the monotone closed form.
                let mut llo = grids.pu_lo.ln();
                let mut lhi = grids.pu_hi.ln();
                if se_fn(k, tau, grids.pu_lo).is_none() {
                    continue;
                }
                for _ in 0..200 {
                    let mid = 0.5 * (llo + lhi);
                    match se_fn(k, tau, mid.exp()) {
                        Some(se) if se >= se_target => lhi = mid,
                        Some(_) => llo = mid,
                        None => break,
                    }
                }
                let pu = lhi.exp();
                let Some(se) = se_fn(k, tau, pu) else { continue };
                let point = TradeoffPoint::new(se, pu, k, tau, detector);
                if best.map_or(true, |b| point.ee > b.ee) {
                    best = Some(point);
                }
            }
            (best, ceiling)
        })
        .collect();

    let mut best: Option<TradeoffPoint> = None;
    let mut ceiling = f64::NEG_INFINITY;
    for (candidate, c) in per_k {
        ceiling = ceiling.max(c);
        if let Some(p) = candidate {
            if best.map_or(true, |b| p.ee > b.ee) {
                best = Some(p);
            }
        }
    }
    best.ok_or(Error::Unattainable { target: se_target, ceiling })
}

/// Maximize energy efficiency subject to a fixed sum spectral efficiency,
/// jointly over the user count, pilot length, and transmit power.
pub fn optimize_tradeoff(
    kind: DetectorKind,
    m: usize,
    t: usize,
    se_target: f64,
    grids: OptimizerGrids,
) -> Result<TradeoffPoint> {
    optimize_generic(
        |k, tau, pu| se_single_cell(kind, m, k, tau, pu, t).ok(),
        t,
        se_target,
        grids,
        kind,
    )
}

/// The multicell counterpart of [`optimize_tradeoff`].
pub fn optimize_tradeoff_multicell(
    kind: DetectorKind,
    m: usize,
    t: usize,
    se_target: f64,
    grids: OptimizerGrids,
    l: usize,
    beta_inter: f64,
) -> Result<TradeoffPoint> {
    optimize_generic(
        |k, tau, pu| se_multicell(kind, m, k, tau, pu, t, l, beta_inter).ok(),
        t,
        se_target,
        grids,
        kind,
    )
}

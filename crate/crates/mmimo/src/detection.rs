//! Linear detectors (MRC, ZF, MMSE) and per-realization SINR evaluation
//! for true and estimated channels.
//!
//! Rates never sample data symbols or receiver noise: every rate term is an
//! SINR expression conditioned on the channel realization, which is the same
//! quantity the closed-form bounds average.

use ndarray::{Array2, ArrayView2};

use crate::channel::LargeScaleProfile;
use crate::estimation::ChannelEstimate;
use crate::linalg;
use crate::{C64, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DetectorKind {
    Mrc,
    Zf,
    Mmse,
}

impl DetectorKind {
    pub fn label(self) -> &'static str {
        match self {
            DetectorKind::Mrc => "mrc",
            DetectorKind::Zf => "zf",
            DetectorKind::Mmse => "mmse",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CsiMode {
    Perfect,
    Imperfect,
}

impl CsiMode {
    pub fn label(self) -> &'static str {
        match self {
            CsiMode::Perfect => "perfect",
            CsiMode::Imperfect => "imperfect",
        }
    }
}

/// Per-user instantaneous SINR values for one channel realization.
#[derive(Debug, Clone)]
pub struct SinrSample {
    pub values: Vec<f64>,
    pub csi: CsiMode,
}

impl SinrSample {
    /// Sum of per-user rate terms `log2(1 + sinr_k)` for this realization.
    pub fn sum_rate(&self) -> f64 {
        self.values.iter().map(|s| (1.0 + s).log2()).sum()
    }
}

/// Total estimation-error power entering both the imperfect-CSI MMSE
/// regularizer and the imperfect SINR denominator:
/// `sum_i beta_i / (tau pu beta_i + 1)`.
pub fn estimation_error_power(pu: f64, tau: usize, d: &LargeScaleProfile) -> f64 {
    let pp = tau as f64 * pu;
    d.betas().iter().map(|b| b / (pp * b + 1.0)).sum()
}

/// Regularizer for the MMSE detector: `1/pu` when the channel is known,
/// plus the total estimation-error power when it is estimated.
pub fn mmse_noise_scale(csi: CsiMode, pu: f64, tau: usize, d: &LargeScaleProfile) -> f64 {
    match csi {
        CsiMode::Perfect => 1.0 / pu,
        CsiMode::Imperfect => estimation_error_power(pu, tau, d) + 1.0 / pu,
    }
}

/// Detector matrix for the given channel (true or estimated).
///
/// MRC returns the channel itself; ZF returns `G (G^H G)^-1`; MMSE returns
/// `G (G^H G + noise_scale I_K)^-1`. The K x K shared-Gram MMSE form has
/// columns collinear with the per-user `(sum_{i != k} g_i g_i^H + noise_scale
/// I_M)^-1 g_k` direction, so the two give identical SINR values.
pub fn detector_matrix(
    kind: DetectorKind,
    channel: &ArrayView2<C64>,
    pu: f64,
    noise_scale: f64,
) -> Result<Array2<C64>> {
    if !(pu > 0.0 && pu.is_finite()) {
        return Err(Error::InvalidParameter(format!("pu must be positive (got {pu})")));
    }
    let (m, k) = channel.dim();
    match kind {
        DetectorKind::Mrc => Ok(channel.to_owned()),
        DetectorKind::Zf => {
            if m < k {
                return Err(Error::Regime(format!(
                    "zero forcing needs M >= K (got M = {m}, K = {k})"
                )));
            }
            let gram = linalg::herm_gram(channel);
            let chol = linalg::Cholesky::factor(&gram.view())?;
            let inv = chol.inverse();
            linalg::matmul(channel, &inv.view())
        }
        DetectorKind::Mmse => {
            if !(noise_scale > 0.0 && noise_scale.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "MMSE noise scale must be positive (got {noise_scale})"
                )));
            }
            let mut gram = linalg::herm_gram(channel);
            for i in 0..k {
                gram[[i, i]] += noise_scale;
            }
            let chol = linalg::Cholesky::factor(&gram.view())?;
            let inv = chol.inverse();
            linalg::matmul(channel, &inv.view())
        }
    }
}

fn detector_norms(a: &ArrayView2<C64>) -> Result<Vec<f64>> {
    let norms = linalg::col_norms_sq(a);
    if let Some(k) = norms.iter().position(|n| *n == 0.0) {
        return Err(Error::InvalidParameter(format!("detector column {k} is zero")));
    }
    Ok(norms.to_vec())
}

/// Instantaneous per-user SINR with the channel known exactly:
/// `pu |a_k^H g_k|^2 / (pu sum_{i != k} |a_k^H g_i|^2 + ||a_k||^2)`.
pub fn sinr_perfect(a: &ArrayView2<C64>, g: &ArrayView2<C64>, pu: f64) -> Result<SinrSample> {
    if !(pu > 0.0 && pu.is_finite()) {
        return Err(Error::InvalidParameter(format!("pu must be positive (got {pu})")));
    }
    if a.dim() != g.dim() {
        return Err(Error::Dimension(format!(
            "detector is {} x {} but channel is {} x {}",
            a.nrows(),
            a.ncols(),
            g.nrows(),
            g.ncols()
        )));
    }
    let k = a.ncols();
    let cross = linalg::herm_cross(a, g)?;
    let norms = detector_norms(a)?;
    let mut values = Vec::with_capacity(k);
    for u in 0..k {
        let sig = pu * cross[[u, u]].norm_sqr();
        let mut interf = 0.0;
        for i in 0..k {
            if i != u {
                interf += cross[[u, i]].norm_sqr();
            }
        }
        values.push(sig / (pu * interf + norms[u]));
    }
    Ok(SinrSample { values, csi: CsiMode::Perfect })
}

/// Instantaneous per-user SINR when the detector works on the estimate:
/// the denominator adds the estimation-error power of all K users
/// (including user k) scaled by `pu ||a_k||^2`.
pub fn sinr_imperfect(
    a_hat: &ArrayView2<C64>,
    estimate: &ChannelEstimate,
    pu: f64,
    tau: usize,
    d: &LargeScaleProfile,
) -> Result<SinrSample> {
    if !(pu > 0.0 && pu.is_finite()) {
        return Err(Error::InvalidParameter(format!("pu must be positive (got {pu})")));
    }
    let g_hat = &estimate.g_hat;
    if a_hat.dim() != g_hat.dim() {
        return Err(Error::Dimension(format!(
            "detector is {} x {} but estimate is {} x {}",
            a_hat.nrows(),
            a_hat.ncols(),
            g_hat.nrows(),
            g_hat.ncols()
        )));
    }
    if d.k() != g_hat.ncols() {
        return Err(Error::Dimension(format!(
            "profile covers {} users but the estimate has {}",
            d.k(),
            g_hat.ncols()
        )));
    }
    let err_power = estimation_error_power(pu, tau, d);
    let k = a_hat.ncols();
    let cross = linalg::herm_cross(a_hat, &g_hat.view())?;
    let norms = detector_norms(a_hat)?;
    let mut values = Vec::with_capacity(k);
    for u in 0..k {
        let sig = pu * cross[[u, u]].norm_sqr();
        let mut interf = 0.0;
        for i in 0..k {
            if i != u {
                interf += cross[[u, i]].norm_sqr();
            }
        }
        let den = pu * interf + pu * norms[u] * err_power + norms[u];
        values.push(sig / den);
    }
    Ok(SinrSample { values, csi: CsiMode::Imperfect })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::draw_fast_fading;
    use crate::estimation::mmse_estimate_equivalent;
    use ndarray::Array2;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    #[test]
    fn mrc_returns_channel_exactly() {
        let g = draw_fast_fading(8, 3, &mut rng(1));
        let a = detector_matrix(DetectorKind::Mrc, &g.view(), 1.0, 1.0).unwrap();
        assert_eq!(a, g);
    }

    #[test]
    fn zf_satisfies_pseudo_inverse_property() {
        let g = draw_fast_fading(32, 8, &mut rng(2));
        let a = detector_matrix(DetectorKind::Zf, &g.view(), 1.0, 1.0).unwrap();
        let prod = linalg::herm_cross(&a.view(), &g.view()).unwrap();
        let mut max_dev = 0.0f64;
        for i in 0..8 {
            for j in 0..8 {
                let want = if i == j { 1.0 } else { 0.0 };
                max_dev = max_dev.max((prod[[i, j]] - C64::new(want, 0.0)).norm());
            }
        }
        assert!(max_dev < 1e-8, "max deviation {max_dev}");
    }

    #[test]
    fn zf_rejects_wide_channel() {
        let g = draw_fast_fading(3, 5, &mut rng(3));
        assert!(detector_matrix(DetectorKind::Zf, &g.view(), 1.0, 1.0).is_err());
    }

    #[test]
    fn single_user_mmse_is_matched_filter_direction() {
        let g = draw_fast_fading(16, 1, &mut rng(4));
        let a = detector_matrix(DetectorKind::Mmse, &g.view(), 1.0, 1.0).unwrap();
        let num = linalg::herm_cross(&a.view(), &g.view()).unwrap()[[0, 0]].norm();
        let den = linalg::col_norms_sq(&a.view())[0].sqrt() * linalg::col_norms_sq(&g.view())[0].sqrt();
        assert!(num / den > 1.0 - 1e-10);
    }

    #[test]
    fn low_power_mmse_approaches_mrc_direction() {
        let g = draw_fast_fading(16, 4, &mut rng(5));
        let pu = 1e-8;
        let a = detector_matrix(DetectorKind::Mmse, &g.view(), pu, 1.0 / pu).unwrap();
        let cross = linalg::herm_cross(&a.view(), &g.view()).unwrap();
        let an = linalg::col_norms_sq(&a.view());
        let gn = linalg::col_norms_sq(&g.view());
        for k in 0..4 {
            let coll = cross[[k, k]].norm() / (an[k].sqrt() * gn[k].sqrt());
            assert!(coll > 1.0 - 1e-6, "column {k} collinearity {coll}");
        }
    }

    #[test]
    fn single_user_mrc_sinr_is_received_power() {
        let g = draw_fast_fading(64, 1, &mut rng(6));
        let pu = 0.37;
        let s = sinr_perfect(&g.view(), &g.view(), pu).unwrap();
        let want = pu * linalg::col_norms_sq(&g.view())[0];
        assert!((s.values[0] - want).abs() / want < 1e-12);
    }

    #[test]
    fn zf_sinr_matches_gram_inverse_diagonal() {
        let g = draw_fast_fading(24, 6, &mut rng(7));
        let pu = 2.0;
        let a = detector_matrix(DetectorKind::Zf, &g.view(), pu, 1.0 / pu).unwrap();
        let s = sinr_perfect(&a.view(), &g.view(), pu).unwrap();
        let gram = linalg::herm_gram(&g.view());
        let inv = linalg::Cholesky::factor(&gram.view()).unwrap().inverse();
        for k in 0..6 {
            let want = pu / inv[[k, k]].re;
            assert!(
                (s.values[k] - want).abs() / want < 1e-8,
                "user {k}: {} vs {want}",
                s.values[k]
            );
        }
    }

    #[test]
    fn mmse_dominates_other_detectors_per_user() {
        let mut r = rng(8);
        let pu = 1.5;
        for _ in 0..1000 {
            let g = draw_fast_fading(16, 4, &mut r);
            let mrc = sinr_perfect(&g.view(), &g.view(), pu).unwrap();
            let zf_a = detector_matrix(DetectorKind::Zf, &g.view(), pu, 1.0 / pu).unwrap();
            let zf = sinr_perfect(&zf_a.view(), &g.view(), pu).unwrap();
            let mm_a = detector_matrix(DetectorKind::Mmse, &g.view(), pu, 1.0 / pu).unwrap();
            let mm = sinr_perfect(&mm_a.view(), &g.view(), pu).unwrap();
            for k in 0..4 {
                let m = mm.values[k];
                assert!(m >= mrc.values[k] * (1.0 - 1e-9), "user {k} vs MRC");
                assert!(m >= zf.values[k] * (1.0 - 1e-9), "user {k} vs ZF");
            }
        }
    }

    #[test]
    fn sinr_is_invariant_to_detector_scaling() {
        let g = draw_fast_fading(12, 3, &mut rng(9));
        let pu = 0.8;
        let a = detector_matrix(DetectorKind::Mmse, &g.view(), pu, 1.0 / pu).unwrap();
        let base = sinr_perfect(&a.view(), &g.view(), pu).unwrap();
        let scaled_mat = a.mapv(|x| x * C64::new(3.7, -1.2));
        let scaled = sinr_perfect(&scaled_mat.view(), &g.view(), pu).unwrap();
        for k in 0..3 {
            let rel = (base.values[k] - scaled.values[k]).abs() / base.values[k];
            assert!(rel < 1e-12, "user {k} relative drift {rel}");
        }
    }

    #[test]
    fn zero_detector_column_is_an_error() {
        let g = draw_fast_fading(4, 2, &mut rng(10));
        let mut a = g.clone();
        for v in a.column_mut(1) {
            *v = C64::new(0.0, 0.0);
        }
        assert!(sinr_perfect(&a.view(), &g.view(), 1.0).is_err());
    }

    #[test]
    fn imperfect_sinr_approaches_perfect_with_clean_estimates() {
        let mut r = rng(11);
        let g = draw_fast_fading(32, 4, &mut r);
        let w = draw_fast_fading(32, 4, &mut r);
        let d = LargeScaleProfile::uniform(4);
        let pu = 1.0;
        let tau = 1_000_000_000usize;
        let pp = tau as f64 * pu;
        let est = mmse_estimate_equivalent(&g.view(), &w.view(), pp, &d).unwrap();
        let s_imp = sinr_imperfect(&est.g_hat.view(), &est, pu, tau, &d).unwrap();
        let s_per = sinr_perfect(&est.g_hat.view(), &est.g_hat.view(), pu).unwrap();
        for k in 0..4 {
            let rel = (s_imp.values[k] - s_per.values[k]).abs() / s_per.values[k];
            assert!(rel < 1e-3, "user {k}: {rel}");
        }
    }

    #[test]
    fn imperfect_single_user_mrc_specialization() {
        let mut r = rng(12);
        let g = draw_fast_fading(16, 1, &mut r);
        let w = draw_fast_fading(16, 1, &mut r);
        let beta = 0.6;
        let d = LargeScaleProfile::new(vec![beta]).unwrap();
        let pu = 2.0;
        let tau = 3usize;
        let pp = tau as f64 * pu;
        let est = mmse_estimate_equivalent(&g.view(), &w.view(), pp, &d).unwrap();
        let s = sinr_imperfect(&est.g_hat.view(), &est, pu, tau, &d).unwrap();
        let gn = linalg::col_norms_sq(&est.g_hat.view())[0];
        let err = beta / (tau as f64 * pu * beta + 1.0);
        let want = pu * gn * gn / (pu * gn * err + gn);
        assert!((s.values[0] - want).abs() / want < 1e-10);
    }

    #[test]
    fn imperfect_mmse_dominates_other_detectors() {
        let mut r = rng(13);
        let d = LargeScaleProfile::new(vec![1.0, 0.5, 0.25, 2.0]).unwrap();
        let pu = 1.0;
        let tau = 4usize;
        let pp = tau as f64 * pu;
        for _ in 0..1000 {
            let g = crate::channel::draw_channel(16, &d, &mut r);
            let w = draw_fast_fading(16, 4, &mut r);
            let est = mmse_estimate_equivalent(&g.g.view(), &w.view(), pp, &d).unwrap();
            let gh = est.g_hat.view();
            let ns = mmse_noise_scale(CsiMode::Imperfect, pu, tau, &d);
            let mrc = sinr_imperfect(&gh, &est, pu, tau, &d).unwrap();
            let zf_a = detector_matrix(DetectorKind::Zf, &gh, pu, ns).unwrap();
            let zf = sinr_imperfect(&zf_a.view(), &est, pu, tau, &d).unwrap();
            let mm_a = detector_matrix(DetectorKind::Mmse, &gh, pu, ns).unwrap();
            let mm = sinr_imperfect(&mm_a.view(), &est, pu, tau, &d).unwrap();
            for k in 0..4 {
                assert!(mm.values[k] >= mrc.values[k] * (1.0 - 1e-9));
                assert!(mm.values[k] >= zf.values[k] * (1.0 - 1e-9));
            }
        }
    }

    #[test]
    fn shared_gram_mmse_matches_per_user_regularized_filter() {
        // The K x K form G (G^H G + ns I_K)^-1 must give the same SINR as
        // the per-user M x M filter (sum_{i != k} g_i g_i^H + ns I_M)^-1 g_k.
        let mut r = rng(14);
        let (m, k) = (6, 3);
        let d = LargeScaleProfile::new(vec![1.0, 0.4, 1.5]).unwrap();
        let pu = 0.9;
        let tau = 3usize;
        let pp = tau as f64 * pu;
        let ch = crate::channel::draw_channel(m, &d, &mut r);
        let w = draw_fast_fading(m, k, &mut r);
        let est = mmse_estimate_equivalent(&ch.g.view(), &w.view(), pp, &d).unwrap();
        let ns = mmse_noise_scale(CsiMode::Imperfect, pu, tau, &d);

        let shared = detector_matrix(DetectorKind::Mmse, &est.g_hat.view(), pu, ns).unwrap();
        let s_shared = sinr_imperfect(&shared.view(), &est, pu, tau, &d).unwrap();

        let mut per_user = Array2::<C64>::zeros((m, k));
        for u in 0..k {
            let mut lambda = Array2::<C64>::zeros((m, m));
            for i in 0..k {
                if i == u {
                    continue;
                }
                for a in 0..m {
                    for b in 0..m {
                        lambda[[a, b]] += est.g_hat[[a, i]] * est.g_hat[[b, i]].conj();
                    }
                }
            }
            for a in 0..m {
                lambda[[a, a]] += ns;
            }
            let chol = linalg::Cholesky::factor(&lambda.view()).unwrap();
            let mut col: Vec<C64> = est.g_hat.column(u).to_vec();
            chol.solve_in_place(&mut col);
            for a in 0..m {
                per_user[[a, u]] = col[a];
            }
        }
        let s_direct = sinr_imperfect(&per_user.view(), &est, pu, tau, &d).unwrap();
        for u in 0..k {
            let rel = (s_shared.values[u] - s_direct.values[u]).abs() / s_direct.values[u];
            assert!(rel < 1e-10, "user {u} relative gap {rel}");
        }
    }

    #[test]
    fn error_power_helper_matches_sum() {
        let d = LargeScaleProfile::new(vec![1.0, 0.5]).unwrap();
        let pu = 2.0;
        let tau = 5usize;
        let want = 1.0 / (10.0 * 1.0 + 1.0) + 0.5 / (10.0 * 0.5 + 1.0);
        assert!((estimation_error_power(pu, tau, &d) - want).abs() < 1e-15);
        let ns = mmse_noise_scale(CsiMode::Imperfect, pu, tau, &d);
        assert!((ns - (want + 0.5)).abs() < 1e-15);
        let ns_p = mmse_noise_scale(CsiMode::Perfect, pu, tau, &d);
        assert!((ns_p - 0.5).abs() < 1e-15);
    }
}

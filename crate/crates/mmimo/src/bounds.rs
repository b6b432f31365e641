//! Closed-form per-user rate lower bounds for the six (detector, CSI)
//! combinations, the Gamma-approximation fixed point behind the MMSE
//! bounds, asymptotic power-scaling limits, and the square-root power
//! control rule.
//!
//! All bounds are in bits per channel use for one user. The MRC and ZF
//! forms are exact Jensen-style lower bounds; the MMSE forms pass through
//! a two-parameter Gamma fit of the SINR distribution.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::detection::{CsiMode, DetectorKind};
use crate::{Error, Result};

/// Shape/scale of the fitted SINR distribution together with the
/// fixed-point auxiliaries that produced them.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaParams {
    pub alpha: f64,
    pub theta: f64,
    pub mu: f64,
    pub kappa: f64,
}

/// One closed-form bound value tagged with its originating combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundResult {
    /// Per-user achievable-rate lower bound, bits per channel use.
    pub rate: f64,
    pub detector: DetectorKind,
    pub csi: CsiMode,
}

fn validate_inputs(m: usize, pu: f64, betas: &[f64], user: usize) -> Result<()> {
    if betas.is_empty() {
        return Err(Error::InvalidParameter("need at least one user".into()));
    }
    if user >= betas.len() {
        return Err(Error::InvalidParameter(format!(
            "user index {user} out of range for {} users",
            betas.len()
        )));
    }
    if let Some(b) = betas.iter().find(|b| !(**b > 0.0 && b.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "large-scale gains must be positive (got {b})"
        )));
    }
    if !(pu > 0.0 && pu.is_finite()) {
        return Err(Error::InvalidParameter(format!("pu must be positive (got {pu})")));
    }
    if m == 0 {
        return Err(Error::InvalidParameter("antenna count must be positive".into()));
    }
    Ok(())
}

fn validate_tau(tau: usize, k: usize) -> Result<()> {
    if tau < k {
        return Err(Error::Regime(format!(
            "pilot length {tau} cannot serve {k} users"
        )));
    }
    Ok(())
}

/// MRC bound with the channel known:
/// `log2(1 + pu (M-1) beta_k / (pu sum_{i != k} beta_i + 1))`.
pub fn mrc_bound_perfect(m: usize, pu: f64, betas: &[f64], user: usize) -> Result<f64> {
    validate_inputs(m, pu, betas, user)?;
    if m < 2 {
        return Err(Error::Regime(format!("MRC bound needs M >= 2 (got {m})")));
    }
    let interf: f64 = betas
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != user)
        .map(|(_, b)| b)
        .sum();
    let num = pu * ((m - 1) as f64) * betas[user];
    let den = pu * interf + 1.0;
    Ok((1.0 + num / den).log2())
}

/// ZF bound with the channel known: `log2(1 + pu (M-K) beta_k)`.
pub fn zf_bound_perfect(m: usize, pu: f64, betas: &[f64], user: usize) -> Result<f64> {
    validate_inputs(m, pu, betas, user)?;
    let k = betas.len();
    if m < k + 1 {
        return Err(Error::Regime(format!(
            "ZF bound needs M >= K + 1 (got M = {m}, K = {k})"
        )));
    }
    let arg = pu * ((m - k) as f64) * betas[user];
    Ok((1.0 + arg).log2())
}

/// Solve the coupled (mu, kappa) equations behind the Gamma fit.
///
/// `products` holds one effective SNR-gain product per user (`pu beta_i`
/// for the known-channel case); sums run over every user except `user`.
/// mu is found by damped Picard iteration (damping 0.5, start 0.5,
/// tolerance 1e-12, cap 1e4); kappa then follows from its equation, which
/// is linear in kappa once mu is fixed.
pub fn solve_fixed_point(m: usize, products: &[f64], user: usize) -> Result<(f64, f64)> {
    let k = products.len();
    if k == 0 {
        return Err(Error::InvalidParameter("need at least one user".into()));
    }
    if user >= k {
        return Err(Error::InvalidParameter(format!(
            "user index {user} out of range for {k} users"
        )));
    }
    if let Some(p) = products.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
        return Err(Error::InvalidParameter(format!(
            "effective products must be positive (got {p})"
        )));
    }
    if m < k {
        return Err(Error::Regime(format!(
            "fixed point needs M >= K (got M = {m}, K = {k})"
        )));
    }
    if k == 1 {
        // Empty interference sums.
        return Ok((0.0, 0.0));
    }

    let mf = m as f64;
    let km1 = (k - 1) as f64;
    let others: Vec<f64> = products
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != user)
        .map(|(_, p)| *p)
        .collect();
    // t(mu) = 1 - (K-1)/M + (K-1) mu / M, the common damping factor in
    // every denominator.
    let t = |mu: f64| 1.0 - km1 / mf + km1 * mu / mf;
    let map = |mu: f64| -> f64 {
        let tv = t(mu);
        others.iter().map(|p| 1.0 / (mf * p * tv + 1.0)).sum::<f64>() / km1
    };

    let mut mu = 0.5;
    let mut residual = f64::INFINITY;
    let mut converged = false;
    for _ in 0..10_000 {
        let f = map(mu);
        residual = (f - mu).abs();
        if residual < 1e-12 {
            mu = f;
            converged = true;
            break;
        }
        mu = 0.5 * (mu + f);
    }
    if !converged {
        return Err(Error::NoConvergence { residual, iterations: 10_000 });
    }

    let tv = t(mu);
    let mut num = 0.0;
    let mut den = 1.0;
    for p in &others {
        let d = mf * p * tv + 1.0;
        let d2 = d * d;
        num += (p * mu + 1.0) / d2;
        den += p / d2;
    }
    Ok((mu, num / den))
}

fn gamma_bound(
    m: usize,
    products: &[f64],
    user: usize,
    detector: DetectorKind,
    csi: CsiMode,
) -> Result<(BoundResult, GammaParams)> {
    let k = products.len();
    let (mu, kappa) = solve_fixed_point(m, products, user)?;
    let base = (m - k) as f64 + 1.0;
    let km1 = (k - 1) as f64;
    let with_mu = base + km1 * mu;
    let with_kappa = base + km1 * kappa;
    let alpha = with_mu * with_mu / with_kappa;
    let theta = with_kappa / with_mu * products[user];
    if !(alpha > 1.0) {
        return Err(Error::Regime(format!(
            "Gamma shape {alpha} <= 1: bound undefined at M = {m}, K = {k}"
        )));
    }
    let rate = (1.0 + (alpha - 1.0) * theta).log2();
    Ok((
        BoundResult { rate, detector, csi },
        GammaParams { alpha, theta, mu, kappa },
    ))
}

/// MMSE bound with the channel known, via the Gamma fit with effective
/// products `pu beta_i`.
pub fn mmse_bound_perfect(
    m: usize,
    pu: f64,
    betas: &[f64],
    user: usize,
) -> Result<(BoundResult, GammaParams)> {
    validate_inputs(m, pu, betas, user)?;
    let products: Vec<f64> = betas.iter().map(|b| pu * b).collect();
    gamma_bound(m, &products, user, DetectorKind::Mmse, CsiMode::Perfect)
}

/// MRC bound with an estimated channel:
/// `log2(1 + tau pu^2 (M-1) beta_k^2 / (pu (tau pu beta_k + 1)
/// sum_{i != k} beta_i + (tau + 1) pu beta_k + 1))`.
pub fn mrc_bound_imperfect(
    m: usize,
    pu: f64,
    tau: usize,
    betas: &[f64],
    user: usize,
) -> Result<f64> {
    validate_inputs(m, pu, betas, user)?;
    validate_tau(tau, betas.len())?;
    if m < 2 {
        return Err(Error::Regime(format!("MRC bound needs M >= 2 (got {m})")));
    }
    let bk = betas[user];
    let tauf = tau as f64;
    let interf: f64 = betas
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != user)
        .map(|(_, b)| b)
        .sum();
    let num = tauf * pu * pu * ((m - 1) as f64) * bk * bk;
    let den = pu * (tauf * pu * bk + 1.0) * interf + (tauf + 1.0) * pu * bk + 1.0;
    Ok((1.0 + num / den).log2())
}

/// ZF bound with an estimated channel:
/// `log2(1 + tau pu^2 (M-K) beta_k^2 / ((tau pu beta_k + 1)
/// sum_i pu beta_i / (tau pu beta_i + 1) + tau pu beta_k + 1))`.
/// The error-power sum runs over every user, including `user`.
pub fn zf_bound_imperfect(
    m: usize,
    pu: f64,
    tau: usize,
    betas: &[f64],
    user: usize,
) -> Result<f64> {
    validate_inputs(m, pu, betas, user)?;
    let k = betas.len();
    validate_tau(tau, k)?;
    if m < k + 1 {
        return Err(Error::Regime(format!(
            "ZF bound needs M >= K + 1 (got M = {m}, K = {k})"
        )));
    }
    let bk = betas[user];
    let tauf = tau as f64;
    let err_sum: f64 = betas.iter().map(|b| pu * b / (tauf * pu * b + 1.0)).sum();
    let num = tauf * pu * pu * ((m - k) as f64) * bk * bk;
    let den = (tauf * pu * bk + 1.0) * err_sum + tauf * pu * bk + 1.0;
    Ok((1.0 + num / den).log2())
}

/// Effective post-estimation SNR weight: `omega = (sum_i beta_i /
/// (tau pu beta_i + 1) + 1/pu)^-1`.
pub fn omega(pu: f64, tau: usize, betas: &[f64]) -> f64 {
    let tauf = tau as f64;
    let s: f64 = betas.iter().map(|b| b / (tauf * pu * b + 1.0)).sum();
    1.0 / (s + 1.0 / pu)
}

/// Variance of the channel estimate for one user:
/// `beta_hat = tau pu beta^2 / (tau pu beta + 1)`.
pub fn beta_hat(pu: f64, tau: usize, beta: f64) -> f64 {
    let tp = tau as f64 * pu;
    tp * beta * beta / (tp * beta + 1.0)
}

/// MMSE bound with an estimated channel: the Gamma fit applied to the
/// effective products `omega * beta_hat_i`.
pub fn mmse_bound_imperfect(
    m: usize,
    pu: f64,
    tau: usize,
    betas: &[f64],
    user: usize,
) -> Result<(BoundResult, GammaParams)> {
    validate_inputs(m, pu, betas, user)?;
    validate_tau(tau, betas.len())?;
    let w = omega(pu, tau, betas);
    let products: Vec<f64> = betas.iter().map(|b| w * beta_hat(pu, tau, *b)).collect();
    gamma_bound(m, &products, user, DetectorKind::Mmse, CsiMode::Imperfect)
}

/// One dispatcher over all six (detector, CSI) closed forms.
pub fn closed_form_bound(
    detector: DetectorKind,
    csi: CsiMode,
    m: usize,
    pu: f64,
    tau: usize,
    betas: &[f64],
    user: usize,
) -> Result<BoundResult> {
    let rate = match (detector, csi) {
        (DetectorKind::Mrc, CsiMode::Perfect) => mrc_bound_perfect(m, pu, betas, user)?,
        (DetectorKind::Zf, CsiMode::Perfect) => zf_bound_perfect(m, pu, betas, user)?,
        (DetectorKind::Mmse, CsiMode::Perfect) => {
            return Ok(mmse_bound_perfect(m, pu, betas, user)?.0)
        }
        (DetectorKind::Mrc, CsiMode::Imperfect) => {
            mrc_bound_imperfect(m, pu, tau, betas, user)?
        }
        (DetectorKind::Zf, CsiMode::Imperfect) => {
            zf_bound_imperfect(m, pu, tau, betas, user)?
        }
        (DetectorKind::Mmse, CsiMode::Imperfect) => {
            return Ok(mmse_bound_imperfect(m, pu, tau, betas, user)?.0)
        }
    };
    Ok(BoundResult { rate, detector, csi })
}

/// Rate limit under power scaling: `pu = Eu/M` with the channel known
/// gives `log2(1 + beta Eu)`; `pu = Eu/sqrt(M)` with an estimated channel
/// gives `log2(1 + tau beta^2 Eu^2)`.
pub fn asymptotic_limit(csi: CsiMode, eu: f64, tau: usize, beta_k: f64) -> Result<f64> {
    if !(eu > 0.0 && eu.is_finite()) {
        return Err(Error::InvalidParameter(format!("Eu must be positive (got {eu})")));
    }
    if !(beta_k > 0.0 && beta_k.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "beta must be positive (got {beta_k})"
        )));
    }
    match csi {
        CsiMode::Perfect => Ok((1.0 + beta_k * eu).log2()),
        CsiMode::Imperfect => {
            if tau < 1 {
                return Err(Error::InvalidParameter("tau must be at least 1".into()));
            }
            Ok((1.0 + tau as f64 * beta_k * beta_k * eu * eu).log2())
        }
    }
}

/// Per-user transmit power equalizing estimated-channel rates:
/// `pu_k = sqrt(Eu / (M tau beta_k))`.
pub fn power_control_imperfect(eu: f64, m: usize, tau: usize, beta_k: f64) -> Result<f64> {
    if !(eu > 0.0 && eu.is_finite()) || m == 0 || tau == 0 || !(beta_k > 0.0) {
        return Err(Error::InvalidParameter(
            "power control needs positive Eu, M, tau, beta".into(),
        ));
    }
    Ok((eu / (m as f64 * tau as f64 * beta_k)).sqrt())
}

/// Monte-Carlo check of `E tr((H^H H)^-1) = m/(n - m)` for an n x m
/// standard complex Gaussian H. Returns `(empirical, analytic)`.
pub fn wishart_trace_identity_check(
    m: usize,
    n: usize,
    trials: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if m == 0 || n <= m {
        return Err(Error::InvalidParameter(format!(
            "identity needs n > m >= 1 (got m = {m}, n = {n})"
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut acc = 0.0;
    for _ in 0..trials {
        let h = crate::channel::draw_fast_fading(n, m, &mut rng);
        let gram = crate::linalg::herm_gram(&h.view());
        let chol = crate::linalg::Cholesky::factor(&gram.view())?;
        let inv = chol.inverse();
        for i in 0..m {
            acc += inv[[i, i]].re;
        }
    }
    Ok((acc / trials as f64, m as f64 / (n - m) as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mrc_perfect_single_user_has_no_interference() {
        let b = mrc_bound_perfect(64, 0.5, &[0.8], 0).unwrap();
        assert!((b - (1.0f64 + 0.5 * 63.0 * 0.8).log2()).abs() < 1e-15);
    }

    #[test]
    fn mrc_perfect_matches_direct_evaluation() {
        let b = mrc_bound_perfect(100, 10.0, &[1.0; 10], 0).unwrap();
        let want = (1.0f64 + 990.0 / 91.0).log2();
        assert!((b - want).abs() < 1e-12);
        assert!((b - 3.5704).abs() < 5e-4);
    }

    #[test]
    fn mrc_perfect_reaches_power_scaling_limit() {
        // pu = Eu/M at huge M approaches log2(1 + beta Eu).
        let m = 1_000_000;
        let eu = 100.0;
        let b = mrc_bound_perfect(m, eu / m as f64, &[1.0], 0).unwrap();
        assert!((b - 101f64.log2()).abs() < 1e-3);
    }

    #[test]
    fn mrc_needs_two_antennas() {
        assert!(mrc_bound_perfect(1, 1.0, &[1.0], 0).is_err());
    }

    #[test]
    fn zf_perfect_matches_direct_evaluation() {
        let b = zf_bound_perfect(100, 10.0, &[1.0; 10], 0).unwrap();
        assert!((b - 901f64.log2()).abs() < 1e-12);
        assert!((b - 9.8154).abs() < 5e-4);
    }

    #[test]
    fn zf_equals_mrc_for_single_user() {
        for (m, pu, beta) in [(2usize, 0.1, 1.0), (64, 3.0, 0.4), (1000, 1e-3, 2.5)] {
            let z = zf_bound_perfect(m, pu, &[beta], 0).unwrap();
            let r = mrc_bound_perfect(m, pu, &[beta], 0).unwrap();
            assert_eq!(z, r, "M {m}");
        }
    }

    #[test]
    fn zf_perfect_reaches_power_scaling_limit() {
        let m = 1_000_000;
        let eu = 100.0;
        let b = zf_bound_perfect(m, eu / m as f64, &[1.0; 10], 0).unwrap();
        assert!((b - 101f64.log2()).abs() < 1e-3);
    }

    #[test]
    fn zf_needs_antenna_margin() {
        assert!(zf_bound_perfect(10, 1.0, &[1.0; 10], 0).is_err());
        assert!(zf_bound_perfect(11, 1.0, &[1.0; 10], 0).is_ok());
    }

    #[test]
    fn fixed_point_single_user_is_zero() {
        assert_eq!(solve_fixed_point(8, &[3.0], 0).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn fixed_point_mu_stays_in_unit_interval() {
        for (m, prods) in [
            (10usize, vec![0.01, 5.0, 100.0]),
            (100, vec![10.0; 10]),
            (4, vec![1e-6, 1e6]),
        ] {
            let (mu, kappa) = solve_fixed_point(m, &prods, 0).unwrap();
            assert!(mu > 0.0 && mu < 1.0, "mu {mu}");
            assert!(kappa.is_finite() && kappa >= 0.0, "kappa {kappa}");
        }
    }

    #[test]
    fn fixed_point_matches_bisection_oracle() {
        // Independent method: bisection on the mu-equation, then the same
        // linear kappa solve.
        let m = 100usize;
        let prods = [10.0f64; 10];
        let (mu, kappa) = solve_fixed_point(m, &prods, 0).unwrap();

        let k = prods.len();
        let mf = m as f64;
        let km1 = (k - 1) as f64;
        let f = |mu: f64| {
            let t = 1.0 - km1 / mf + km1 * mu / mf;
            prods
                .iter()
                .skip(1)
                .map(|p| 1.0 / (mf * p * t + 1.0))
                .sum::<f64>()
                / km1
        };
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if f(mid) - mid > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mu_oracle = 0.5 * (lo + hi);
        assert!((mu - mu_oracle).abs() < 1e-8, "{mu} vs {mu_oracle}");

        let t = 1.0 - km1 / mf + km1 * mu_oracle / mf;
        let mut num = 0.0;
        let mut den = 1.0;
        for p in prods.iter().skip(1) {
            let d = mf * p * t + 1.0;
            num += (p * mu_oracle + 1.0) / (d * d);
            den += p / (d * d);
        }
        assert!((kappa - num / den).abs() < 1e-8);

        // Frozen solution for this grid point.
        assert!((mu - 1.0975758281637e-3).abs() < 1e-9);
        assert!((kappa - 1.0959865779657e-5).abs() < 1e-9);
    }

    #[test]
    fn fixed_point_residuals_are_small() {
        let m = 40usize;
        let prods = [0.3, 1.7, 22.0, 0.04, 5.0];
        let (mu, kappa) = solve_fixed_point(m, &prods, 2).unwrap();
        let mf = m as f64;
        let km1 = (prods.len() - 1) as f64;
        let t = 1.0 - km1 / mf + km1 * mu / mf;
        let others: Vec<f64> = prods
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != 2)
            .map(|(_, p)| *p)
            .collect();
        let f: f64 = others.iter().map(|p| 1.0 / (mf * p * t + 1.0)).sum::<f64>() / km1;
        assert!((f - mu).abs() < 1e-10, "mu residual {}", (f - mu).abs());
        let mut lhs = 1.0;
        let mut rhs = 0.0;
        for p in &others {
            let d = mf * p * t + 1.0;
            lhs += p / (d * d);
            rhs += (p * mu + 1.0) / (d * d);
        }
        assert!((kappa * lhs - rhs).abs() < 1e-10, "kappa residual");
    }

    #[test]
    fn fixed_point_is_permutation_invariant() {
        let m = 50usize;
        let prods = [0.2, 3.0, 11.0, 0.9];
        let (mu_a, kap_a) = solve_fixed_point(m, &prods, 0).unwrap();
        let permuted = [0.2, 11.0, 0.9, 3.0];
        let (mu_b, kap_b) = solve_fixed_point(m, &permuted, 0).unwrap();
        assert!((mu_a - mu_b).abs() < 1e-10);
        assert!((kap_a - kap_b).abs() < 1e-10);
    }

    #[test]
    fn mmse_perfect_single_user_collapses() {
        let (b, g) = mmse_bound_perfect(64, 0.25, &[0.8], 0).unwrap();
        assert!((g.alpha - 64.0).abs() < 1e-12);
        assert!((g.theta - 0.2).abs() < 1e-15);
        let want = (1.0f64 + 63.0 * 0.25 * 0.8).log2();
        assert!((b.rate - want).abs() < 1e-12);
    }

    #[test]
    fn mmse_perfect_matches_frozen_grid_point() {
        let (b, g) = mmse_bound_perfect(100, 10.0, &[1.0; 10], 0).unwrap();
        assert!((b.rate - 9.8155431785284).abs() < 1e-9, "rate {}", b.rate);
        assert!(g.alpha > 1.0 && g.theta > 0.0);
        // Dominates the ZF closed form at the same point.
        let z = zf_bound_perfect(100, 10.0, &[1.0; 10], 0).unwrap();
        assert!(b.rate >= z);
    }

    #[test]
    fn mmse_perfect_rejects_wide_system() {
        assert!(mmse_bound_perfect(4, 1.0, &[1.0; 5], 0).is_err());
    }

    #[test]
    fn mrc_imperfect_matches_direct_evaluation() {
        let b = mrc_bound_imperfect(100, 10.0, 10, &[1.0; 10], 0).unwrap();
        let want = (1.0f64 + 99_000.0 / 9_201.0).log2();
        assert!((b - want).abs() < 1e-12);
        assert!((b - 3.5558).abs() < 5e-4);
    }

    #[test]
    fn mrc_imperfect_reaches_root_m_limit() {
        let m = 100_000_000usize;
        let eu = 10f64.sqrt();
        let pu = eu / (m as f64).sqrt();
        let b = mrc_bound_imperfect(m, pu, 10, &[1.0], 0).unwrap();
        assert!((b - 101f64.log2()).abs() < 1e-2);
    }

    #[test]
    fn mrc_imperfect_low_power_slope() {
        // bound / pu^2 approaches log2(e) tau (M-1) beta^2 as pu vanishes.
        let (m, tau, beta) = (64usize, 8usize, 0.9f64);
        let pu = 1e-4;
        let b = mrc_bound_imperfect(m, pu, tau, &[beta], 0).unwrap();
        let slope = std::f64::consts::LOG2_E * tau as f64 * 63.0 * beta * beta;
        let ratio = b / (pu * pu) / slope;
        assert!((ratio - 1.0).abs() < 0.01, "ratio {ratio}");
    }

    #[test]
    fn zf_imperfect_matches_direct_evaluation() {
        let b = zf_bound_imperfect(100, 10.0, 10, &[1.0; 10], 0).unwrap();
        let want = (1.0f64 + 90_000.0 / 201.0).log2();
        assert!((b - want).abs() < 1e-12);
        assert!((b - 8.8097).abs() < 5e-4);
    }

    #[test]
    fn zf_imperfect_single_user_collapse() {
        let (m, pu, beta) = (32usize, 1.7f64, 0.6f64);
        let b = zf_bound_imperfect(m, pu, 1, &[beta], 0).unwrap();
        let pb = pu * beta;
        let want = (1.0 + pu * pu * 31.0 * beta * beta / (2.0 * pb + 1.0)).log2();
        assert!((b - want).abs() < 1e-12);
    }

    #[test]
    fn zf_imperfect_reaches_root_m_limit() {
        let m = 100_000_000usize;
        let eu = 10f64.sqrt();
        let pu = eu / (m as f64).sqrt();
        let b = zf_bound_imperfect(m, pu, 10, &[1.0], 0).unwrap();
        assert!((b - 101f64.log2()).abs() < 1e-2);
    }

    #[test]
    fn mmse_imperfect_single_user_collapses() {
        let (m, pu, tau, beta) = (128usize, 2.0f64, 4usize, 0.7f64);
        let (b, g) = mmse_bound_imperfect(m, pu, tau, &[beta], 0).unwrap();
        let w = omega(pu, tau, &[beta]);
        let bh = beta_hat(pu, tau, beta);
        let want = (1.0 + 127.0 * w * bh).log2();
        assert!((b.rate - want).abs() < 1e-12);
        assert!((g.alpha - 128.0).abs() < 1e-10);
    }

    #[test]
    fn mmse_imperfect_matches_frozen_grid_point() {
        let (b, _) = mmse_bound_imperfect(100, 10.0, 10, &[1.0; 10], 0).unwrap();
        assert!((b.rate - 8.8101246768631).abs() < 1e-9, "rate {}", b.rate);
        let z = zf_bound_imperfect(100, 10.0, 10, &[1.0; 10], 0).unwrap();
        assert!(b.rate >= z);
    }

    #[test]
    fn bounds_monotone_in_antennas_and_gain() {
        let betas = [1.0, 0.5, 0.25];
        let mut last = [0.0f64; 4];
        for m in [4usize, 8, 32, 128, 1024] {
            let vals = [
                mrc_bound_perfect(m, 1.0, &betas, 0).unwrap(),
                zf_bound_perfect(m, 1.0, &betas, 0).unwrap(),
                mrc_bound_imperfect(m, 1.0, 3, &betas, 0).unwrap(),
                zf_bound_imperfect(m, 1.0, 3, &betas, 0).unwrap(),
            ];
            for (v, l) in vals.iter().zip(last.iter()) {
                assert!(v >= l);
            }
            last = vals;
        }
        // And in the served user's gain.
        let mut prev = 0.0;
        for b in [0.1, 0.5, 1.0, 2.0] {
            let v = mrc_bound_perfect(64, 1.0, &[b, 0.5, 0.5], 0).unwrap();
            assert!(v > prev);
            prev = v;
        }
    }

    #[test]
    fn closed_forms_monotone_in_power() {
        for bound in [
            |pu: f64| mrc_bound_perfect(32, pu, &[1.0; 4], 0).unwrap(),
            |pu: f64| zf_bound_perfect(32, pu, &[1.0; 4], 0).unwrap(),
            |pu: f64| mrc_bound_imperfect(32, pu, 4, &[1.0; 4], 0).unwrap(),
            |pu: f64| zf_bound_imperfect(32, pu, 4, &[1.0; 4], 0).unwrap(),
        ] {
            let mut prev = -1.0;
            for e in -4..=4 {
                let v = bound(10f64.powi(e));
                assert!(v >= prev);
                prev = v;
            }
        }
    }

    #[test]
    fn dispatcher_covers_all_six_cells() {
        let betas = [1.0; 5];
        for det in [DetectorKind::Mrc, DetectorKind::Zf, DetectorKind::Mmse] {
            for csi in [CsiMode::Perfect, CsiMode::Imperfect] {
                let b = closed_form_bound(det, csi, 50, 1.0, 5, &betas, 0).unwrap();
                assert_eq!(b.detector, det);
                assert_eq!(b.csi, csi);
                assert!(b.rate > 0.0 && b.rate.is_finite());
            }
        }
    }

    #[test]
    fn asymptotic_limits_match_quoted_values() {
        let p = asymptotic_limit(CsiMode::Perfect, 100.0, 1, 1.0).unwrap();
        assert!((p - 101f64.log2()).abs() < 1e-12);
        assert!((p - 6.6582).abs() < 5e-4);
        let ip = asymptotic_limit(CsiMode::Imperfect, 10f64.sqrt(), 10, 1.0).unwrap();
        assert!((ip - 101f64.log2()).abs() < 1e-9);
        for csi in [CsiMode::Perfect, CsiMode::Imperfect] {
            let v = asymptotic_limit(csi, 1e-9, 4, 1.0).unwrap();
            assert!(v < 1e-8);
        }
    }

    #[test]
    fn power_control_normalization_and_scaling() {
        let (m, tau, beta) = (25usize, 4usize, 0.5f64);
        let eu = m as f64 * tau as f64 * beta;
        assert!((power_control_imperfect(eu, m, tau, beta).unwrap() - 1.0).abs() < 1e-15);
        let p1 = power_control_imperfect(10.0, 100, tau, beta).unwrap();
        let p4 = power_control_imperfect(10.0, 400, tau, beta).unwrap();
        assert!((p1 / p4 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn power_control_recovers_reference_rate() {
        // At pu_k = sqrt(Eu/(M tau beta_k)) the single-user estimated-channel
        // MRC rate approaches log2(1 + beta Eu), the matched baseline rate
        // for a single antenna at power Eu.
        let (m, tau, beta, eu) = (100_000_000usize, 5usize, 0.7f64, 20.0f64);
        let pu = power_control_imperfect(eu, m, tau, beta).unwrap();
        let b = mrc_bound_imperfect(m, pu, tau, &[beta], 0).unwrap();
        assert!((b - (1.0 + beta * eu).log2()).abs() < 1e-2);
    }

    #[test]
    fn wishart_scalar_case_is_exact_analytically() {
        let (emp, ana) = wishart_trace_identity_check(1, 2, 20_000, 7).unwrap();
        assert_eq!(ana, 1.0);
        assert!((emp - 1.0).abs() < 0.05, "empirical {emp}");
    }

    #[test]
    fn wishart_identity_holds_in_bulk() {
        let (emp, ana) = wishart_trace_identity_check(10, 100, 10_000, 11).unwrap();
        assert!((ana - 1.0 / 9.0).abs() < 1e-15);
        assert!((emp - ana).abs() / ana < 0.02, "empirical {emp} vs {ana}");
    }

    #[test]
    fn wishart_identity_near_threshold() {
        let (emp, ana) = wishart_trace_identity_check(5, 6, 100_000, 13).unwrap();
        assert_eq!(ana, 5.0);
        assert!((emp - ana).abs() / ana < 0.10, "empirical {emp} vs {ana}");
    }

    #[test]
    fn wishart_rejects_degenerate_shapes() {
        assert!(wishart_trace_identity_check(5, 5, 10, 1).is_err());
        assert!(wishart_trace_identity_check(0, 3, 10, 1).is_err());
    }
}

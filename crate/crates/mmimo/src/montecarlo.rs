//! Monte-Carlo ergodic rates, power-scaling sweeps, and required-power
//! inversion.
//!
//! Reproducibility contract: trial `i` draws from a dedicated generator
//! stream derived from `(seed, i)`, and per-trial results are reduced in
//! trial order, so a run is bitwise identical no matter how many worker
//! threads execute it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::bounds::{self, BoundResult};
use crate::channel::{assemble_channel, draw_fast_fading, LargeScaleProfile};
use crate::config::SystemConfig;
use crate::detection::{self, CsiMode, DetectorKind};
use crate::estimation::mmse_estimate_equivalent;
use crate::linalg;
use crate::{Error, Result};

/// Gram matrices with a worse condition estimate than this abort the trial;
/// the trial is redrawn from the same stream.
const COND_LIMIT: f64 = 1e10;
const MAX_REDRAWS: usize = 1000;

/// Monte-Carlo ergodic rate for one user, paired with its closed-form bound.
#[derive(Debug, Clone)]
pub struct RateEstimate {
    /// Mean of `log2(1 + SINR)` over trials, bits per channel use.
    pub mean_rate: f64,
    /// 95% normal-approximation confidence half-width (0 for one trial).
    pub ci_halfwidth: f64,
    pub trials: usize,
    /// Ill-conditioned draws discarded and redrawn across all trials.
    pub rejected_trials: usize,
    pub bound: BoundResult,
}

/// Default trial count used by the experiment registry: 1e4 up to M = 128,
/// 1e3 above.
pub fn default_trials(m: usize) -> usize {
    if m <= 128 {
        10_000
    } else {
        1_000
    }
}

/// One trial: per-user rate terms `log2(1 + SINR_k)` plus the number of
/// rejected redraws it took to get a well-conditioned realization.
fn run_trial(
    config: &SystemConfig,
    kind: DetectorKind,
    csi: CsiMode,
    profile: &LargeScaleProfile,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<f64>, usize)> {
    let m = config.m;
    let k = config.k;
    let pu = config.pu;
    let noise_scale = detection::mmse_noise_scale(csi, pu, config.tau, profile);
    let mut rejected = 0usize;
    loop {
        let h = draw_fast_fading(m, k, rng);
        let channel = assemble_channel(h, profile.clone())?;
        let estimate = match csi {
            CsiMode::Perfect => None,
            CsiMode::Imperfect => {
                let w = draw_fast_fading(m, k, rng);
                Some(mmse_estimate_equivalent(
                    &channel.g.view(),
                    &w.view(),
                    config.pp(),
                    profile,
                )?)
            }
        };
        let working = match &estimate {
            Some(est) => est.g_hat.view(),
            None => channel.g.view(),
        };

        // Conditioning gate for the detectors that invert a Gram matrix.
        if matches!(kind, DetectorKind::Zf | DetectorKind::Mmse) {
            let gram = linalg::herm_gram(&working);
            let well_conditioned = match linalg::Cholesky::factor(&gram.view()) {
                Ok(chol) => linalg::cond_estimate_hpd(&gram.view(), &chol) <= COND_LIMIT,
                Err(_) => false,
            };
            if !well_conditioned {
                rejected += 1;
                if rejected > MAX_REDRAWS {
                    return Err(Error::Regime(format!(
                        "persistent ill-conditioning after {MAX_REDRAWS} redraws"
                    )));
                }
                continue;
            }
        }

        let a = detection::detector_matrix(kind, &working, pu, noise_scale)?;
        let sample = match &estimate {
            Some(est) => detection::sinr_imperfect(&a.view(), est, pu, config.tau, profile)?,
            None => detection::sinr_perfect(&a.view(), &channel.g.view(), pu)?,
        };
        let rates = sample.values.iter().map(|s| (1.0 + s).log2()).collect();
        return Ok((rates, rejected));
    }
}

/// Ergodic per-user rates with confidence intervals, one estimate per user,
/// each paired with the matching closed-form bound.
pub fn ergodic_rate(
    config: &SystemConfig,
    kind: DetectorKind,
    csi: CsiMode,
    profile: &LargeScaleProfile,
    trials: usize,
    seed: u64,
) -> Result<Vec<RateEstimate>> {
    config.validate()?;
    if profile.k() != config.k {
        return Err(Error::Dimension(format!(
            "profile covers {} users but the configuration has {}",
            profile.k(),
            config.k
        )));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }

    let per_trial: Vec<Result<(Vec<f64>, usize)>> = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(t as u64);
            run_trial(config, kind, csi, profile, &mut rng)
        })
        .collect();

    let k = config.k;
    let mut samples: Vec<Vec<f64>> = vec![Vec::with_capacity(trials); k];
    let mut rejected = 0usize;
    for r in per_trial {
        let (rates, rej) = r?;
        rejected += rej;
        for (j, v) in rates.into_iter().enumerate() {
            samples[j].push(v);
        }
    }

    let n = trials as f64;
    let mut out = Vec::with_capacity(k);
    for (user, user_samples) in samples.iter().enumerate() {
        let mean = user_samples.iter().sum::<f64>() / n;
        let ci = if trials > 1 {
            let var = user_samples.iter().map(|x| (x - mean).powi(2)).sum::<f64>()
                / (n - 1.0);
            1.96 * (var / n).sqrt()
        } else {
            0.0
        };
        let bound = bounds::closed_form_bound(
            kind,
            csi,
            config.m,
            config.pu,
            config.tau,
            profile.betas(),
            user,
        )?;
        out.push(RateEstimate {
            mean_rate: mean,
            ci_halfwidth: ci,
            trials,
            rejected_trials: rejected,
            bound,
        });
    }
    Ok(out)
}

/// Which root of M divides Eu in a power-scaling sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalingExponent {
    /// `pu = Eu / M`.
    Full,
    /// `pu = Eu / sqrt(M)`.
    Sqrt,
}

impl ScalingExponent {
    pub fn apply(self, eu: f64, m: usize) -> f64 {
        match self {
            ScalingExponent::Full => eu / m as f64,
            ScalingExponent::Sqrt => eu / (m as f64).sqrt(),
        }
    }
}

/// Sum spectral efficiency over users at each antenna count, with the
/// transmit power scaled down as `Eu / M^exponent`.
pub fn power_scaling_sweep(
    kind: DetectorKind,
    csi: CsiMode,
    eu: f64,
    exponent: ScalingExponent,
    m_list: &[usize],
    k: usize,
    tau: usize,
    profile: &LargeScaleProfile,
    trials: Option<usize>,
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    if !(eu > 0.0 && eu.is_finite()) {
        return Err(Error::InvalidParameter(format!("Eu must be positive (got {eu})")));
    }
    let mut curve = Vec::with_capacity(m_list.len());
    for &m in m_list {
        let pu = exponent.apply(eu, m);
        // The sweep has no payload/training split; T is set to tau to keep
        // the configuration self-consistent.
        let config = SystemConfig::new(m, k, tau, tau.max(k), pu)?;
        let t = trials.unwrap_or_else(|| default_trials(m));
        let estimates = ergodic_rate(&config, kind, csi, profile, t, seed)?;
        let sum: f64 = estimates.iter().map(|e| e.mean_rate).sum();
        curve.push((m, sum));
    }
    Ok(curve)
}

/// Smallest pu whose closed-form bound meets a per-user rate target,
/// found by bisection (the bounds are monotone in pu). Uses the first
/// user's bound; with a uniform profile every user agrees.
pub fn required_power(
    kind: DetectorKind,
    csi: CsiMode,
    target_rate_per_user: f64,
    m: usize,
    tau: usize,
    betas: &[f64],
) -> Result<f64> {
    if !(target_rate_per_user > 0.0 && target_rate_per_user.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "target rate must be positive (got {target_rate_per_user})"
        )));
    }
    let eval = |pu: f64| -> Result<f64> {
        Ok(bounds::closed_form_bound(kind, csi, m, pu, tau, betas, 0)?.rate)
    };
    let (mut lo, mut hi) = (1e-12f64, 1e12f64);
    let ceiling = eval(hi)?;
    if ceiling < target_rate_per_user {
        return Err(Error::Unattainable { target: target_rate_per_user, ceiling });
    }
    if eval(lo)? >= target_rate_per_user {
        return Ok(lo);
    }
    // Bisection in the log domain until the bracket is relatively tight.
    let mut llo = lo.ln();
    let mut lhi = hi.ln();
    for _ in 0..200 {
        let mid = 0.5 * (llo + lhi);
        let pu = mid.exp();
        if eval(pu)? >= target_rate_per_user {
            lhi = mid;
            hi = pu;
        } else {
            llo = mid;
            lo = pu;
        }
        if hi / lo - 1.0 < 1e-6 {
            break;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand_distr::Gamma;

    fn uniform_config(m: usize, k: usize, pu: f64) -> (SystemConfig, LargeScaleProfile) {
        let tau = k;
        (SystemConfig::new(m, k, tau, 196, pu).unwrap(), LargeScaleProfile::uniform(k))
    }

    #[test]
    fn single_trial_mean_is_one_realization() {
        let (config, profile) = uniform_config(16, 3, 1.0);
        let est = ergodic_rate(&config, DetectorKind::Mrc, CsiMode::Perfect, &profile, 1, 5)
            .unwrap();
        // Reconstruct trial 0 directly from its stream.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        rng.set_stream(0);
        let (rates, _) =
            run_trial(&config, DetectorKind::Mrc, CsiMode::Perfect, &profile, &mut rng)
                .unwrap();
        for (e, r) in est.iter().zip(rates.iter()) {
            assert_eq!(e.mean_rate, *r);
            assert_eq!(e.ci_halfwidth, 0.0);
            assert_eq!(e.trials, 1);
        }
    }

    #[test]
    fn single_user_mrc_matches_scalar_oracle() {
        // K = 1 MRC with the channel known: rate = E log2(1 + pu ||g||^2)
        // where ||g||^2 is a sum of M unit-mean exponentials. The oracle
        // draws that scalar directly.
        let m = 16;
        let pu = 1.0;
        let (config, profile) = uniform_config(m, 1, pu);
        let est = ergodic_rate(
            &config,
            DetectorKind::Mrc,
            CsiMode::Perfect,
            &profile,
            10_000,
            42,
        )
        .unwrap();

        let mut rng = ChaCha8Rng::seed_from_u64(987_654);
        let gamma = Gamma::new(m as f64, 1.0).unwrap();
        let n = 1_000_000;
        let mut acc = 0.0;
        let mut acc2 = 0.0;
        for _ in 0..n {
            let x: f64 = rng.sample(gamma);
            let v = (1.0 + pu * x).log2();
            acc += v;
            acc2 += v * v;
        }
        let oracle = acc / n as f64;
        let oracle_se = ((acc2 / n as f64 - oracle * oracle) / n as f64).sqrt();
        let diff = (est[0].mean_rate - oracle).abs();
        assert!(
            diff < est[0].ci_halfwidth + 3.0 * oracle_se,
            "mc {} vs oracle {oracle} (ci {})",
            est[0].mean_rate,
            est[0].ci_halfwidth
        );
    }

    #[test]
    fn mc_mean_dominates_bound_for_all_detectors() {
        let (config, profile) = uniform_config(128, 10, 10.0);
        for kind in [DetectorKind::Mrc, DetectorKind::Zf, DetectorKind::Mmse] {
            let est =
                ergodic_rate(&config, kind, CsiMode::Perfect, &profile, 1500, 7).unwrap();
            for (user, e) in est.iter().enumerate() {
                assert!(
                    e.bound.rate <= e.mean_rate + e.ci_halfwidth,
                    "{kind:?} user {user}: bound {} vs mc {} + {}",
                    e.bound.rate,
                    e.mean_rate,
                    e.ci_halfwidth
                );
            }
        }
    }

    #[test]
    fn identical_inputs_reproduce_bitwise() {
        let (config, profile) = uniform_config(32, 4, 2.0);
        let a = ergodic_rate(&config, DetectorKind::Zf, CsiMode::Imperfect, &profile, 64, 9)
            .unwrap();
        let b = ergodic_rate(&config, DetectorKind::Zf, CsiMode::Imperfect, &profile, 64, 9)
            .unwrap();
        for (x, y) in a.iter().zip(b.iter()) {
            assert_eq!(x.mean_rate, y.mean_rate);
            assert_eq!(x.ci_halfwidth, y.ci_halfwidth);
        }
    }

    #[test]
    fn thread_count_does_not_change_results() {
        let (config, profile) = uniform_config(24, 3, 1.0);
        let run = || {
            ergodic_rate(&config, DetectorKind::Mmse, CsiMode::Perfect, &profile, 50, 3)
                .unwrap()
        };
        let serial = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(run);
        let parallel = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(run);
        for (x, y) in serial.iter().zip(parallel.iter()) {
            assert_eq!(x.mean_rate, y.mean_rate);
            assert_eq!(x.ci_halfwidth, y.ci_halfwidth);
        }
    }

    #[test]
    fn ci_shrinks_with_trials() {
        let (config, profile) = uniform_config(16, 2, 1.0);
        let small = ergodic_rate(&config, DetectorKind::Mrc, CsiMode::Perfect, &profile, 500, 21)
            .unwrap();
        let large =
            ergodic_rate(&config, DetectorKind::Mrc, CsiMode::Perfect, &profile, 2000, 21)
                .unwrap();
        let ratio = small[0].ci_halfwidth / large[0].ci_halfwidth;
        assert!((ratio - 2.0).abs() < 0.4, "ci ratio {ratio}");
    }

    #[test]
    fn perfect_full_scaling_approaches_constant() {
        let profile = LargeScaleProfile::uniform(2);
        let curve = power_scaling_sweep(
            DetectorKind::Zf,
            CsiMode::Perfect,
            100.0,
            ScalingExponent::Full,
            &[512],
            2,
            2,
            &profile,
            Some(400),
            11,
        )
        .unwrap();
        let want = 2.0 * 101f64.log2();
        let got = curve[0].1;
        assert!((got - want).abs() / want < 0.05, "{got} vs {want}");
    }

    #[test]
    fn imperfect_full_scaling_collapses() {
        // With estimated channels, pu = Eu/M drives the rate to zero; at a
        // modest Eu the M = 512 value is already far below the M = 64 one.
        let profile = LargeScaleProfile::uniform(2);
        let curve = power_scaling_sweep(
            DetectorKind::Mrc,
            CsiMode::Imperfect,
            1.0,
            ScalingExponent::Full,
            &[64, 512],
            2,
            2,
            &profile,
            Some(1000),
            13,
        )
        .unwrap();
        let (m64, m512) = (curve[0].1, curve[1].1);
        assert!(m512 < 0.25 * m64, "m64 {m64} m512 {m512}");
    }

    #[test]
    fn imperfect_sqrt_scaling_approaches_limit() {
        let profile = LargeScaleProfile::uniform(1);
        let eu = 10f64.sqrt();
        let curve = power_scaling_sweep(
            DetectorKind::Mrc,
            CsiMode::Imperfect,
            eu,
            ScalingExponent::Sqrt,
            &[64, 256, 1024],
            1,
            1,
            &profile,
            Some(800),
            17,
        )
        .unwrap();
        let limit = (1.0f64 + 10.0).log2();
        // Monotone approach from below (small slack for MC noise).
        assert!(curve[0].1 < curve[1].1 + 0.02);
        assert!(curve[1].1 < curve[2].1 + 0.02);
        let last = curve[2].1;
        assert!((limit - last) / limit < 0.10, "last {last} vs limit {limit}");
    }

    #[test]
    fn required_power_inverts_zf_closed_form() {
        let pu = required_power(
            DetectorKind::Zf,
            CsiMode::Perfect,
            1.0,
            100,
            10,
            &[1.0; 10],
        )
        .unwrap();
        // log2(1 + 90 pu) = 1 at pu = 1/90.
        assert!((pu - 1.0 / 90.0).abs() / (1.0 / 90.0) < 1e-5, "pu {pu}");

        let pu200 = required_power(
            DetectorKind::Zf,
            CsiMode::Perfect,
            1.0,
            200,
            10,
            &[1.0; 10],
        )
        .unwrap();
        let drop_db = 10.0 * (pu / pu200).log10();
        let want = 10.0 * (190f64 / 90.0).log10();
        assert!((drop_db - want).abs() < 1e-3, "{drop_db} vs {want}");
        assert!((want - 3.2446).abs() < 1e-3);
    }

    #[test]
    fn required_power_reports_interference_ceiling() {
        // MRC with the channel known saturates at log2(1 + (M-1)/(K-1)).
        let err = required_power(
            DetectorKind::Mrc,
            CsiMode::Perfect,
            5.0,
            100,
            10,
            &[1.0; 10],
        )
        .unwrap_err();
        match err {
            Error::Unattainable { target, ceiling } => {
                assert_eq!(target, 5.0);
                let want = (1.0f64 + 99.0 / 9.0).log2();
                assert!((ceiling - want).abs() < 1e-6, "ceiling {ceiling}");
            }
            other => panic!("expected unattainable, got {other:?}"),
        }
    }

    #[test]
    fn required_power_monotone_in_antennas() {
        for kind in [DetectorKind::Mrc, DetectorKind::Zf] {
            let mut prev = f64::INFINITY;
            for m in [50usize, 100, 200, 400] {
                let pu = required_power(kind, CsiMode::Perfect, 1.0, m, 10, &[1.0; 10])
                    .unwrap();
                assert!(pu <= prev, "{kind:?} at M = {m}");
                prev = pu;
            }
        }
    }

    #[test]
    fn default_trials_split_at_128() {
        assert_eq!(default_trials(128), 10_000);
        assert_eq!(default_trials(129), 1_000);
    }
}

//! Experiment registry: every figure-level dataset the binary can emit,
//! plus the scalar subcommands. Each experiment declares its own default
//! parameters, runs its sweep (points in parallel, output in sweep order),
//! and writes one self-describing CSV.

use std::io::Write;
use std::path::PathBuf;

use anyhow::{anyhow, bail, Context, Result};
use rayon::prelude::*;

use mmimo::bounds::closed_form_bound;
use mmimo::detection::{CsiMode, DetectorKind};
use mmimo::montecarlo::{default_trials, ergodic_rate, power_scaling_sweep, required_power, ScalingExponent};
use mmimo::tradeoff::{
    optimize_tradeoff, optimize_tradeoff_multicell, reference_mode, OptimizerGrids,
    TradeoffPoint,
};
use mmimo::{CellGeometry, LargeScaleProfile, SystemConfig};

use crate::intercell::estimate_intercell_beta;
use crate::params::{db, Params};

pub const EXPERIMENTS: &[&str] = &[
    "fig1", "fig2", "fig3", "fig4", "fig5", "fig6", "fig7", "fig8", "table1",
    "beta-intercell", "reference-mode",
];

#[derive(Debug)]
pub struct ExperimentSpec {
    pub name: String,
    pub params: Params,
    pub seed: u64,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
}

pub fn parse_detector(s: &str) -> Result<DetectorKind> {
    match s {
        "mrc" => Ok(DetectorKind::Mrc),
        "zf" => Ok(DetectorKind::Zf),
        "mmse" => Ok(DetectorKind::Mmse),
        other => bail!("unknown detector '{other}' (choose mrc, zf, or mmse)"),
    }
}

pub fn parse_csi(s: &str) -> Result<CsiMode> {
    match s {
        "perfect" => Ok(CsiMode::Perfect),
        "imperfect" => Ok(CsiMode::Imperfect),
        other => bail!("unknown CSI mode '{other}' (choose perfect or imperfect)"),
    }
}

/// Default parameter set for a registered experiment.
pub fn default_params(name: &str) -> Result<Params> {
    let p = match name {
        "fig1" => Params::new(&[
            ("m_list", "16,32,64,128,256"),
            ("k", "10"),
            ("tau", "10"),
            ("pu_db", "10"),
            ("beta", "1"),
        ]),
        "fig2" => Params::new(&[
            ("m_list", "16,32,64,128,256,512"),
            ("k", "10"),
            ("tau", "10"),
            ("eu_db", "20"),
            ("beta", "1"),
        ]),
        "fig3" => Params::new(&[
            ("m_list", "16,32,64,128,256,512,1024"),
            ("k", "10"),
            ("tau", "10"),
            ("eu_db", "20"),
            ("beta", "1"),
        ]),
        "fig4" | "fig5" => Params::new(&[
            ("m_list", "16,32,64,128,256,512"),
            ("k", "10"),
            ("tau", "10"),
            ("target", "1"),
            ("beta", "1"),
        ]),
        "fig6" => Params::new(&[
            ("m_list", "50,100"),
            ("t", "196"),
            ("se_list", "1,2,5,10,20,30,40,50,60,70,80"),
            ("k1_m", "100"),
            ("k1_se_list", "0.25,0.5,1,1.5,2,2.5,3,4,5,6,8"),
            ("ref_pu_db_list", "-10,-7.5,-5,-2.5,0,2.5,5,7.5,10,12.5,15,17.5,20"),
            ("ref_trials", "100000"),
            ("k_max", "80"),
        ]),
        "fig7" => Params::new(&[
            ("m", "100"),
            ("t", "196"),
            ("se_list", "1,2,5,10,15,20,30,40,50,60,70,80,90"),
            ("k_max", "80"),
        ]),
        "fig8" => Params::new(&[
            ("m", "100"),
            ("t", "196"),
            ("l", "7"),
            ("beta_list", "0.32,0.11,0.04"),
            ("se_list", "1,2,5,10,15,20,25,30,40,50"),
            ("ref_pu_db_list", "-10,-7.5,-5,-2.5,0,2.5,5,7.5,10,12.5,15,17.5,20"),
            ("ref_trials", "100000"),
            ("k_max", "80"),
        ]),
        "table1" => Params::new(&[
            ("m", "100"),
            ("k", "10"),
            ("tau", "10"),
            ("pu_db", "10"),
            ("beta", "1"),
        ]),
        "beta-intercell" => Params::new(&[
            ("cases", "3.8:1,3.0:1,3.8:3"),
            ("shadow_sigma_db", "8"),
            ("samples", "1000000"),
            ("radius_m", "1000"),
            ("r_h_m", "100"),
        ]),
        "reference-mode" => Params::new(&[("t", "196"), ("pu_db", "10")]),
        other => bail!(
            "unknown experiment '{other}' (known: {})",
            EXPERIMENTS.join(", ")
        ),
    };
    Ok(p)
}

/// CSV writer to the requested path, or stdout when none is given.
fn open_writer(out: &Option<PathBuf>) -> Result<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match out {
        Some(path) => Box::new(
            std::fs::File::create(path)
                .with_context(|| format!("cannot create output file {}", path.display()))?,
        ),
        None => Box::new(std::io::stdout()),
    };
    Ok(csv::Writer::from_writer(sink))
}

/// Full round-trip decimal representation.
fn fmt(v: f64) -> String {
    format!("{v}")
}

fn progress(line: &str) {
    eprintln!("# {line}");
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<()> {
    let mut w = open_writer(&spec.out)?;
    match spec.name.as_str() {
        "fig1" => fig1(spec, &mut w),
        "fig2" => power_scaling(spec, &mut w, CsiMode::Perfect, ScalingExponent::Full),
        "fig3" => power_scaling(spec, &mut w, CsiMode::Imperfect, ScalingExponent::Sqrt),
        "fig4" => required_power_sweep(spec, &mut w, CsiMode::Perfect),
        "fig5" => required_power_sweep(spec, &mut w, CsiMode::Imperfect),
        "fig6" => fig6(spec, &mut w),
        "fig7" => fig7(spec, &mut w),
        "fig8" => fig8(spec, &mut w),
        "table1" => table1(spec, &mut w),
        "beta-intercell" => beta_intercell(spec, &mut w),
        "reference-mode" => reference_mode_rows(spec, &mut w),
        other => bail!("unknown experiment '{other}'"),
    }?;
    w.flush()?;
    Ok(())
}

/// Closed-form bounds against Monte-Carlo means for every detector and CSI
/// mode over an antenna sweep.
fn fig1(spec: &ExperimentSpec, w: &mut csv::Writer<Box<dyn Write>>) -> Result<()> {
    let p = &spec.params;
    let m_list = p.get_usize_list("m_list")?;
    let k = p.get_usize("k")?;
    let tau = p.get_usize("tau")?;
    let pu = p.get_db_as_linear("pu_db")?;
    let pu_db = p.get_f64("pu_db")?;
    let beta = p.get_f64("beta")?;
    let profile = LargeScaleProfile::constant(k, beta).map_err(|e| anyhow!(e))?;

    let detectors = [DetectorKind::Mrc, DetectorKind::Zf, DetectorKind::Mmse];
    let csis = [CsiMode::Perfect, CsiMode::Imperfect];
    let mut cells: Vec<(usize, DetectorKind, CsiMode)> = Vec::new();
    for &m in &m_list {
        for &d in &detectors {
            for &c in &csis {
                cells.push((m, d, c));
            }
        }
    }

    let rows: Vec<Result<Vec<String>>> = cells
        .par_iter()
        .map(|&(m, kind, csi)| {
            let trials = spec.trials.unwrap_or_else(|| default_trials(m));
            let config = SystemConfig::new(m, k, tau, tau, pu).map_err(|e| anyhow!(e))?;
            let est = ergodic_rate(&config, kind, csi, &profile, trials, spec.seed)
                .map_err(|e| anyhow!(e))?;
            let kf = k as f64;
            let bound = est.iter().map(|e| e.bound.rate).sum::<f64>() / kf;
            let mc = est.iter().map(|e| e.mean_rate).sum::<f64>() / kf;
            // Triangle-inequality bound for the averaged estimate, so it is
            // conservative regardless of cross-user correlation.
            let ci = est.iter().map(|e| e.ci_halfwidth).sum::<f64>() / kf;
            Ok(vec![
                m.to_string(),
                kind.label().to_string(),
                csi.label().to_string(),
                k.to_string(),
                tau.to_string(),
                fmt(pu_db),
                trials.to_string(),
                spec.seed.to_string(),
                fmt(bound),
                fmt(mc),
                fmt(ci),
            ])
        })
        .collect();

    w.write_record([
        "m", "detector", "csi", "k", "tau", "pu_db", "trials", "seed", "bound", "mc_mean",
        "ci",
    ])?;
    for (cell, row) in cells.iter().zip(rows) {
        let row = row?;
        w.write_record(&row)?;
        progress(&format!(
            "fig1 m={} detector={} csi={}",
            cell.0,
            cell.1.label(),
            cell.2.label()
        ));
    }
    Ok(())
}

/// Sum-rate sweeps under the power-scaling laws (full exponent with known
/// channels, square-root with estimated ones).
fn power_scaling(
    spec: &ExperimentSpec,
    w: &mut csv::Writer<Box<dyn Write>>,
    csi: CsiMode,
    exponent: ScalingExponent,
) -> Result<()> {
    let p = &spec.params;
    let m_list = p.get_usize_list("m_list")?;
    let k = p.get_usize("k")?;
    let tau = p.get_usize("tau")?;
    let eu = p.get_db_as_linear("eu_db")?;
    let eu_db = p.get_f64("eu_db")?;
    let beta = p.get_f64("beta")?;
    let profile = LargeScaleProfile::constant(k, beta).map_err(|e| anyhow!(e))?;
    let detectors = [DetectorKind::Mrc, DetectorKind::Zf, DetectorKind::Mmse];

    let sweeps: Vec<Result<Vec<(usize, f64)>>> = detectors
        .par_iter()
        .map(|&kind| {
            power_scaling_sweep(
                kind, csi, eu, exponent, &m_list, k, tau, &profile, spec.trials, spec.seed,
            )
            .map_err(|e| anyhow!(e))
        })
        .collect();

    let exp_label = match exponent {
        ScalingExponent::Full => "full",
        ScalingExponent::Sqrt => "sqrt",
    };
    w.write_record([
        "m", "detector", "csi", "exponent", "eu_db", "k", "tau", "trials", "seed",
        "sum_rate",
    ])?;
    for (kind, sweep) in detectors.iter().zip(sweeps) {
        let sweep = sweep?;
        for (m, sum_rate) in sweep {
            let trials = spec.trials.unwrap_or_else(|| default_trials(m));
            w.write_record([
                m.to_string(),
                kind.label().to_string(),
                csi.label().to_string(),
                exp_label.to_string(),
                fmt(eu_db),
                k.to_string(),
                tau.to_string(),
                trials.to_string(),
                spec.seed.to_string(),
                fmt(sum_rate),
            ])?;
            progress(&format!(
                "power-scaling m={m} detector={} csi={}",
                kind.label(),
                csi.label()
            ));
        }
    }
    Ok(())
}

/// Transmit power required for a fixed per-user rate, by inverting the
/// closed-form bounds.
fn required_power_sweep(
    spec: &ExperimentSpec,
    w: &mut csv::Writer<Box<dyn Write>>,
    csi: CsiMode,
) -> Result<()> {
    let p = &spec.params;
    let m_list = p.get_usize_list("m_list")?;
    let k = p.get_usize("k")?;
    let tau = p.get_usize("tau")?;
    let target = p.get_f64("target")?;
    let beta = p.get_f64("beta")?;
    let betas = vec![beta; k];
    let detectors = [DetectorKind::Mrc, DetectorKind::Zf, DetectorKind::Mmse];

    w.write_record([
        "m", "detector", "csi", "k", "tau", "target_rate", "pu_required", "pu_required_db",
    ])?;
    for &m in &m_list {
        for &kind in &detectors {
            let pu = required_power(kind, csi, target, m, tau, &betas).map_err(|e| anyhow!(e))?;
            w.write_record([
                m.to_string(),
                kind.label().to_string(),
                csi.label().to_string(),
                k.to_string(),
                tau.to_string(),
                fmt(target),
                fmt(pu),
                fmt(db(pu)),
            ])?;
            progress(&format!(
                "required-power m={m} detector={} csi={}",
                kind.label(),
                csi.label()
            ));
        }
    }
    Ok(())
}

struct EfficiencyRow {
    family: String,
    detector: String,
    m: String,
    k: String,
    tau: String,
    pu_db: String,
    se_target: String,
    se: f64,
    ee: f64,
}

fn efficiency_header() -> [&'static str; 10] {
    [
        "family", "detector", "m", "k", "tau", "pu_db", "se_target", "se", "ee", "ee_rel",
    ]
}

fn write_efficiency_rows(
    w: &mut csv::Writer<Box<dyn Write>>,
    rows: &[EfficiencyRow],
    ee_ref: f64,
) -> Result<()> {
    w.write_record(efficiency_header())?;
    for r in rows {
        w.write_record([
            r.family.clone(),
            r.detector.clone(),
            r.m.clone(),
            r.k.clone(),
            r.tau.clone(),
            r.pu_db.clone(),
            r.se_target.clone(),
            fmt(r.se),
            fmt(r.ee),
            fmt(r.ee / ee_ref),
        ])?;
        progress(&format!(
            "tradeoff family={} detector={} se={:.4}",
            r.family, r.detector, r.se
        ));
    }
    Ok(())
}

fn point_row(family: &str, detector: &str, m: usize, target: f64, pt: &TradeoffPoint) -> EfficiencyRow {
    EfficiencyRow {
        family: family.to_string(),
        detector: detector.to_string(),
        m: m.to_string(),
        k: pt.k.to_string(),
        tau: pt.tau.to_string(),
        pu_db: fmt(db(pt.pu)),
        se_target: fmt(target),
        se: pt.se,
        ee: pt.ee,
    }
}

/// Single-antenna reference curve over a power sweep: spectral and energy
/// efficiency with the pilot length optimized per point.
fn reference_curve(
    t: usize,
    pu_db_list: &[f64],
    trials: usize,
    seed: u64,
) -> Result<Vec<EfficiencyRow>> {
    let points: Vec<Result<EfficiencyRow>> = pu_db_list
        .par_iter()
        .map(|&pu_db| {
            let pu = 10f64.powf(pu_db / 10.0);
            let (se, ee, tau_opt) = reference_mode(t, pu, trials, seed).map_err(|e| anyhow!(e))?;
            Ok(EfficiencyRow {
                family: "reference".into(),
                detector: "all".into(),
                m: "1".into(),
                k: "1".into(),
                tau: tau_opt.to_string(),
                pu_db: fmt(pu_db),
                se_target: String::new(),
                se,
                ee,
            })
        })
        .collect();
    points.into_iter().collect()
}

/// Normalization constant: energy efficiency of the reference mode at
/// 10 dB.
fn reference_ee(t: usize, trials: usize, seed: u64) -> Result<f64> {
    let (_, ee, _) = reference_mode(t, 10.0f64.powf(1.0), trials, seed).map_err(|e| anyhow!(e))?;
    Ok(ee)
}

/// Energy efficiency against spectral efficiency: the single-antenna
/// reference curve, the single-user curve, and the jointly optimized
/// multiuser curves.
fn fig6(spec: &ExperimentSpec, w: &mut csv::Writer<Box<dyn Write>>) -> Result<()> {
    let p = &spec.params;
    let m_list = p.get_usize_list("m_list")?;
    let t = p.get_usize("t")?;
    let se_list = p.get_f64_list("se_list")?;
    let k1_m = p.get_usize("k1_m")?;
    let k1_se_list = p.get_f64_list("k1_se_list")?;
    let ref_pu = p.get_f64_list("ref_pu_db_list")?;
    let ref_trials = spec.trials.unwrap_or(p.get_usize("ref_trials")?);
    let k_max = p.get_usize("k_max")?;

    let ee_ref = reference_ee(t, ref_trials, spec.seed)?;
    let mut rows = reference_curve(t, &ref_pu, ref_trials, spec.seed)?;

    let k1_grids = OptimizerGrids { k_min: 1, k_max: 1, ..OptimizerGrids::default() };
    let free_grids = OptimizerGrids { k_max, ..OptimizerGrids::default() };
    for kind in [DetectorKind::Mrc, DetectorKind::Zf] {
        let k1_rows: Vec<Option<EfficiencyRow>> = k1_se_list
            .par_iter()
            .map(|&target| {
                optimize_tradeoff(kind, k1_m, t, target, k1_grids)
                    .ok()
                    .map(|pt| point_row("single-user", kind.label(), k1_m, target, &pt))
            })
            .collect();
        rows.extend(k1_rows.into_iter().flatten());

        for &m in &m_list {
            let opt_rows: Vec<Option<EfficiencyRow>> = se_list
                .par_iter()
                .map(|&target| {
                    optimize_tradeoff(kind, m, t, target, free_grids)
                        .ok()
                        .map(|pt| point_row("optimized", kind.label(), m, target, &pt))
                })
                .collect();
            rows.extend(opt_rows.into_iter().flatten());
        }
    }
    write_efficiency_rows(w, &rows, ee_ref)
}

/// Optimal user count and pilot length along the tradeoff curve.
fn fig7(spec: &ExperimentSpec, w: &mut csv::Writer<Box<dyn Write>>) -> Result<()> {
    let p = &spec.params;
    let m = p.get_usize("m")?;
    let t = p.get_usize("t")?;
    let se_list = p.get_f64_list("se_list")?;
    let k_max = p.get_usize("k_max")?;
    let grids = OptimizerGrids { k_max, ..OptimizerGrids::default() };

    w.write_record([
        "detector", "m", "t", "se_target", "k_opt", "tau_opt", "pu_db", "se", "ee",
    ])?;
    for kind in [DetectorKind::Mrc, DetectorKind::Zf] {
        let points: Vec<Option<TradeoffPoint>> = se_list
            .par_iter()
            .map(|&target| optimize_tradeoff(kind, m, t, target, grids).ok())
            .collect();
        for (&target, pt) in se_list.iter().zip(points) {
            let Some(pt) = pt else {
                progress(&format!(
                    "fig7 detector={} se_target={target} unattainable, skipped",
                    kind.label()
                ));
                continue;
            };
            w.write_record([
                kind.label().to_string(),
                m.to_string(),
                t.to_string(),
                fmt(target),
                pt.k.to_string(),
                pt.tau.to_string(),
                fmt(db(pt.pu)),
                fmt(pt.se),
                fmt(pt.ee),
            ])?;
            progress(&format!(
                "fig7 detector={} se_target={target} k={} tau={}",
                kind.label(),
                pt.k,
                pt.tau
            ));
        }
    }
    Ok(())
}

/// Multicell tradeoff curves for a range of intercell interference
/// factors, against the same single-antenna reference.
fn fig8(spec: &ExperimentSpec, w: &mut csv::Writer<Box<dyn Write>>) -> Result<()> {
    let p = &spec.params;
    let m = p.get_usize("m")?;
    let t = p.get_usize("t")?;
    let l = p.get_usize("l")?;
    let beta_list = p.get_f64_list("beta_list")?;
    let se_list = p.get_f64_list("se_list")?;
    let ref_pu = p.get_f64_list("ref_pu_db_list")?;
    let ref_trials = spec.trials.unwrap_or(p.get_usize("ref_trials")?);
    let k_max = p.get_usize("k_max")?;
    let grids = OptimizerGrids { k_max, ..OptimizerGrids::default() };

    let ee_ref = reference_ee(t, ref_trials, spec.seed)?;
    let mut rows = reference_curve(t, &ref_pu, ref_trials, spec.seed)?;

    for kind in [DetectorKind::Mrc, DetectorKind::Zf] {
        for &beta in &beta_list {
            let family = format!("beta={beta}");
            let pts: Vec<Option<EfficiencyRow>> = se_list
                .par_iter()
                .map(|&target| {
                    optimize_tradeoff_multicell(kind, m, t, target, grids, l, beta)
                        .ok()
                        .map(|pt| point_row(&family, kind.label(), m, target, &pt))
                })
                .collect();
            rows.extend(pts.into_iter().flatten());
        }
    }
    write_efficiency_rows(w, &rows, ee_ref)
}

/// The six closed-form per-user rate bounds at one operating point.
fn table1(spec: &ExperimentSpec, w: &mut csv::Writer<Box<dyn Write>>) -> Result<()> {
    let p = &spec.params;
    let m = p.get_usize("m")?;
    let k = p.get_usize("k")?;
    let tau = p.get_usize("tau")?;
    let pu = p.get_db_as_linear("pu_db")?;
    let pu_db = p.get_f64("pu_db")?;
    let beta = p.get_f64("beta")?;
    let betas = vec![beta; k];

    w.write_record(["detector", "csi", "m", "k", "tau", "pu_db", "beta", "rate"])?;
    for kind in [DetectorKind::Mrc, DetectorKind::Zf, DetectorKind::Mmse] {
        for csi in [CsiMode::Perfect, CsiMode::Imperfect] {
            let b = closed_form_bound(kind, csi, m, pu, tau, &betas, 0).map_err(|e| anyhow!(e))?;
            w.write_record([
                kind.label().to_string(),
                csi.label().to_string(),
                m.to_string(),
                k.to_string(),
                tau.to_string(),
                fmt(pu_db),
                fmt(beta),
                fmt(b.rate),
            ])?;
        }
    }
    Ok(())
}

/// The geometric intercell-factor estimate over a list of
/// (path-loss exponent, reuse factor) cases.
fn beta_intercell(spec: &ExperimentSpec, w: &mut csv::Writer<Box<dyn Write>>) -> Result<()> {
    let p = &spec.params;
    let sigma = p.get_f64("shadow_sigma_db")?;
    let samples = spec.trials.unwrap_or(p.get_usize("samples")?);
    let geometry = CellGeometry {
        radius_m: p.get_f64("radius_m")?,
        r_h_m: p.get_f64("r_h_m")?,
        ..CellGeometry::default()
    };
    let cases: Vec<(f64, u32)> = p
        .get_str("cases")?
        .split(',')
        .map(|c| {
            let (nu, reuse) = c
                .trim()
                .split_once(':')
                .ok_or_else(|| anyhow!("case entry is not 'nu:reuse': {c:?}"))?;
            Ok((nu.trim().parse::<f64>()?, reuse.trim().parse::<u32>()?))
        })
        .collect::<Result<_>>()?;

    let estimates: Vec<Result<f64>> = cases
        .par_iter()
        .map(|&(nu, reuse)| estimate_intercell_beta(&geometry, nu, sigma, reuse, samples, spec.seed))
        .collect();

    w.write_record([
        "nu", "shadow_sigma_db", "reuse", "samples", "seed", "beta_estimate",
    ])?;
    for (&(nu, reuse), est) in cases.iter().zip(estimates) {
        let est = est?;
        w.write_record([
            fmt(nu),
            fmt(sigma),
            reuse.to_string(),
            samples.to_string(),
            spec.seed.to_string(),
            fmt(est),
        ])?;
        progress(&format!("beta-intercell nu={nu} reuse={reuse} beta={est:.4}"));
    }
    Ok(())
}

/// Single-antenna, single-user baseline with the pilot length optimized.
fn reference_mode_rows(spec: &ExperimentSpec, w: &mut csv::Writer<Box<dyn Write>>) -> Result<()> {
    let p = &spec.params;
    let t = p.get_usize("t")?;
    let pu = p.get_db_as_linear("pu_db")?;
    let pu_db = p.get_f64("pu_db")?;
    let trials = spec.trials.unwrap_or(1_000_000);
    let (se, ee, tau_opt) = reference_mode(t, pu, trials, spec.seed).map_err(|e| anyhow!(e))?;
    w.write_record(["t", "pu_db", "trials", "seed", "tau_opt", "se", "ee"])?;
    w.write_record([
        t.to_string(),
        fmt(pu_db),
        trials.to_string(),
        spec.seed.to_string(),
        tau_opt.to_string(),
        fmt(se),
        fmt(ee),
    ])?;
    Ok(())
}

/// Defaults for the `bounds` subcommand.
pub fn bounds_params() -> Params {
    Params::new(&[
        ("m", "100"),
        ("k", "10"),
        ("tau", "10"),
        ("pu_db", "10"),
        ("beta", "1"),
        ("betas", ""),
    ])
}

/// `bounds <detector> <csi>`: per-user closed-form rate bounds.
pub fn run_bounds(
    detector: DetectorKind,
    csi: CsiMode,
    params: &Params,
    out: &Option<PathBuf>,
) -> Result<()> {
    let m = params.get_usize("m")?;
    let k = params.get_usize("k")?;
    let tau = params.get_usize("tau")?;
    let pu = params.get_db_as_linear("pu_db")?;
    let pu_db = params.get_f64("pu_db")?;
    let betas_raw = params.get_str("betas")?;
    let betas = if betas_raw.trim().is_empty() {
        vec![params.get_f64("beta")?; k]
    } else {
        params.get_f64_list("betas")?
    };

    let mut w = open_writer(out)?;
    w.write_record(["detector", "csi", "m", "k", "tau", "pu_db", "user", "beta", "rate"])?;
    for user in 0..betas.len() {
        let b = closed_form_bound(detector, csi, m, pu, tau, &betas, user).map_err(|e| anyhow!(e))?;
        w.write_record([
            detector.label().to_string(),
            csi.label().to_string(),
            m.to_string(),
            betas.len().to_string(),
            tau.to_string(),
            fmt(pu_db),
            user.to_string(),
            fmt(betas[user]),
            fmt(b.rate),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Defaults for the `required-power` subcommand.
pub fn required_power_params() -> Params {
    Params::new(&[
        ("detector", "zf"),
        ("csi", "perfect"),
        ("m_list", "100"),
        ("k", "10"),
        ("tau", "10"),
        ("target", "1"),
        ("beta", "1"),
    ])
}

/// `required-power`: invert the rate bound for the power meeting a target.
pub fn run_required_power(params: &Params, out: &Option<PathBuf>) -> Result<()> {
    let detector = parse_detector(&params.get_str("detector")?)?;
    let csi = parse_csi(&params.get_str("csi")?)?;
    let m_list = params.get_usize_list("m_list")?;
    let k = params.get_usize("k")?;
    let tau = params.get_usize("tau")?;
    let target = params.get_f64("target")?;
    let betas = vec![params.get_f64("beta")?; k];

    let mut w = open_writer(out)?;
    w.write_record([
        "m", "detector", "csi", "k", "tau", "target_rate", "pu_required", "pu_required_db",
    ])?;
    for &m in &m_list {
        let pu = required_power(detector, csi, target, m, tau, &betas).map_err(|e| anyhow!(e))?;
        w.write_record([
            m.to_string(),
            detector.label().to_string(),
            csi.label().to_string(),
            k.to_string(),
            tau.to_string(),
            fmt(target),
            fmt(pu),
            fmt(db(pu)),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Defaults for the `tradeoff` subcommand.
pub fn tradeoff_params() -> Params {
    Params::new(&[
        ("detector", "mrc"),
        ("m", "100"),
        ("t", "196"),
        ("se_target", "20"),
        ("l", "1"),
        ("beta_inter", "0"),
        ("k_min", "1"),
        ("k_max", "80"),
        ("pu_lo", "1e-6"),
        ("pu_hi", "1e6"),
    ])
}

/// `tradeoff`: one jointly optimized operating point.
pub fn run_tradeoff(params: &Params, out: &Option<PathBuf>) -> Result<()> {
    let detector = parse_detector(&params.get_str("detector")?)?;
    let m = params.get_usize("m")?;
    let t = params.get_usize("t")?;
    let target = params.get_f64("se_target")?;
    let l = params.get_usize("l")?;
    let beta_inter = params.get_f64("beta_inter")?;
    let grids = OptimizerGrids {
        k_min: params.get_usize("k_min")?,
        k_max: params.get_usize("k_max")?,
        pu_lo: params.get_f64("pu_lo")?,
        pu_hi: params.get_f64("pu_hi")?,
    };
    let pt = if l > 1 && beta_inter > 0.0 {
        optimize_tradeoff_multicell(detector, m, t, target, grids, l, beta_inter)
    } else {
        optimize_tradeoff(detector, m, t, target, grids)
    }
    .map_err(|e| anyhow!(e))?;

    let mut w = open_writer(out)?;
    w.write_record([
        "detector", "m", "t", "l", "beta_inter", "se_target", "k_opt", "tau_opt", "pu",
        "pu_db", "se", "ee",
    ])?;
    w.write_record([
        detector.label().to_string(),
        m.to_string(),
        t.to_string(),
        l.to_string(),
        fmt(beta_inter),
        fmt(target),
        pt.k.to_string(),
        pt.tau.to_string(),
        fmt(pt.pu),
        fmt(db(pt.pu)),
        fmt(pt.se),
        fmt(pt.ee),
    ])?;
    w.flush()?;
    Ok(())
}

//! One function per scenario. Each validates its section, runs the core
//! operations and hands its reports to [`Artifacts`].

use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use rmwalk::collapse::{
    born_report, deviation_growth, detection_residuals, lifetime_histogram, reduced_plane_walk, renewal_cycle,
    run_born_ensemble, sparre_andersen_exact, BornExperiment, GrowthFit, PlaneWalkConfig, RenewalParams,
    StepDistribution, SurvivalReport,
};
use rmwalk::dynamics::{
    alternating_evolve, newtonian_reference, velocity_decomposition, ClassicalState, EvolutionConfig,
    FreeHamiltonian, Potential, VelocityDecomposition,
};
use rmwalk::ensembles::{calibrate_step, sample_gue, semicircle_cdf, KickConfig};
use rmwalk::estimates::{estimate_report, EnvironmentParams, EstimateInputs, EstimateReport};
use rmwalk::geometry::{isometry_check, overlap_lattice, FoliationPoint, IsometryReport, OverlapLatticeReport};
use rmwalk::rng::stream;
use rmwalk::stats::{ks_one_sample, ks_standard_normal, mean_and_sem, KsResult};
use rmwalk::{Error, Grid, PacketParams, PhysicalConstants};
use serde::Serialize;

use crate::config::{RunConfig, Scenario};
use crate::output::Artifacts;
use crate::{CliError, RunStatus};

/// Stream index reserved for kick calibration; run streams count up from 0.
const CALIBRATION_STREAM: u64 = u64::MAX;
const PLANE_WALK_STREAM: u64 = u64::MAX - 1;
/// Walks per random stream in the survival scenario.
const SURVIVAL_CHUNK: usize = 10_000;

pub(crate) fn run(cfg: &RunConfig, art: &mut Artifacts) -> Result<RunStatus, CliError> {
    match cfg.scenario {
        Scenario::Born => born(cfg, art),
        Scenario::Survival => survival(cfg, art),
        Scenario::Trajectory => trajectory(cfg, art),
        Scenario::Renewal => renewal(cfg, art),
        Scenario::GeometryCheck => geometry(cfg, art),
        Scenario::VelocityDecomposition => velocity(cfg, art),
        Scenario::GueStats => gue(cfg, art),
        Scenario::Estimate => estimate(cfg, art),
    }
}

/// Attributes a core error to a key of `section`.
fn core_error(section: &str, err: Error) -> CliError {
    let key = match &err {
        Error::InvalidParameter { name, .. } => (*name).to_string(),
        Error::InvalidGrid(_) => "n_points".into(),
        Error::WidthUnresolvable { .. } | Error::ScaledBelowResolution { .. } | Error::NotLocalized { .. } => {
            "sigma".into()
        }
        Error::PacketTouchesBoundary { .. } | Error::DetectorOverlap(..) => "centers".into(),
        Error::LeakageDetected { .. } => "length".into(),
        Error::CalibrationDiverged(_) => "step_length".into(),
        Error::TimeoutFractionExceeded { .. } => "n_steps_max".into(),
        _ => return CliError::invalid(section, err.to_string()),
    };
    CliError::invalid(format!("{section}.{key}"), err.to_string())
}

fn require(ok: bool, key: &str, reason: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::invalid(key, reason))
    }
}

fn positive(x: f64, key: &str) -> Result<(), CliError> {
    require(x.is_finite() && x > 0.0, key, "must be a positive finite number")
}

#[derive(Serialize)]
struct SpreadSummary {
    min: f64,
    median: f64,
    max: f64,
}

#[derive(Serialize)]
struct BornSummary {
    weights: Vec<f64>,
    centers: Vec<f64>,
    sigma: f64,
    kick_scale: f64,
    theta: f64,
    n_runs: usize,
    runs_completed: usize,
    counts: Vec<u64>,
    frequencies: Vec<f64>,
    /// (count − n·w) / √(n·w·(1 − w)) over completed runs.
    z_scores: Vec<f64>,
    timeouts: usize,
    allowed_timeouts: usize,
    aborted: bool,
    valid: bool,
    chi2: Option<f64>,
    chi2_p: Option<f64>,
    min_spread: SpreadSummary,
}

fn born(cfg: &RunConfig, art: &mut Artifacts) -> Result<RunStatus, CliError> {
    let b = &cfg.born;
    require(!b.weights.is_empty(), "born.weights", "need at least one weight")?;
    require(
        b.weights.iter().all(|w| w.is_finite() && *w >= 0.0),
        "born.weights",
        "weights must be non-negative",
    )?;
    let total: f64 = b.weights.iter().sum();
    require((total - 1.0).abs() <= 1e-9, "born.weights", &format!("weights sum to {total}, expected 1"))?;
    require(
        b.phases.is_empty() || b.phases.len() == b.weights.len(),
        "born.phases",
        "give one phase per weight or none",
    )?;
    require(b.centers.len() == b.weights.len(), "born.centers", "give one center per weight")?;
    require(b.n_runs > 0, "born.n_runs", "must be positive")?;
    require(b.n_steps_max > 0, "born.n_steps_max", "must be positive")?;
    positive(b.length, "born.length")?;
    positive(b.sigma, "born.sigma")?;
    positive(b.step_length, "born.step_length")?;

    let grid = Grid::centered(b.n_points, b.length).map_err(|e| core_error("born", e))?;
    let scale = calibrate_step(b.n_points, b.step_length, 1.0, &mut stream(cfg.master_seed, CALIBRATION_STREAM))
        .map_err(|e| core_error("born", e))?;
    let amplitudes = b
        .weights
        .iter()
        .enumerate()
        .map(|(i, &w)| Complex64::from_polar(w.sqrt(), b.phases.get(i).copied().unwrap_or(0.0)))
        .collect();
    let exp = BornExperiment {
        grid,
        amplitudes,
        centers: b.centers.clone(),
        sigma: b.sigma,
        kick: KickConfig::new(b.n_points, scale, 1.0).with_method(b.kick_method),
        n_steps_max: b.n_steps_max,
        n_runs: b.n_runs,
        master_seed: cfg.master_seed,
        edge_margin: b.edge_margin,
    };
    art.log(format!("calibrated kick scale {scale} for mean step {}", b.step_length));
    let ens = run_born_ensemble(&exp).map_err(|e| core_error("born", e))?;
    let report = born_report(&exp, &ens);
    let counts = ens.counts();
    let completed = ens.records.len();
    let n = completed as f64;
    let mut spreads: Vec<f64> = ens.records.iter().map(|r| r.min_spread).collect();
    spreads.sort_by(f64::total_cmp);
    let summary = BornSummary {
        weights: ens.weights.clone(),
        centers: b.centers.clone(),
        sigma: b.sigma,
        kick_scale: scale,
        theta: exp.kick.theta(),
        n_runs: b.n_runs,
        runs_completed: completed,
        frequencies: counts.iter().map(|&c| c as f64 / n).collect(),
        z_scores: counts
            .iter()
            .zip(&ens.weights)
            .map(|(&c, &w)| {
                let sd = (n * w * (1.0 - w)).sqrt();
                if sd > 0.0 {
                    (c as f64 - n * w) / sd
                } else {
                    0.0
                }
            })
            .collect(),
        counts: counts.clone(),
        timeouts: ens.timeouts(),
        allowed_timeouts: exp.allowed_timeouts(),
        aborted: ens.aborted,
        valid: report.is_ok(),
        chi2: report.as_ref().ok().map(|r| r.chi2),
        chi2_p: report.as_ref().ok().map(|r| r.chi2_p),
        min_spread: SpreadSummary {
            min: spreads[0],
            median: spreads[spreads.len() / 2],
            max: spreads[spreads.len() - 1],
        },
    };
    art.log(format!(
        "{completed} runs, counts {counts:?}, {} timeouts (allowed {})",
        summary.timeouts, summary.allowed_timeouts
    ));
    art.json("born.json", &summary)?;
    if art.format.json() {
        let mut lines = Vec::new();
        ens.write_records(&mut lines).expect("writing to memory");
        art.write("runs.jsonl", &lines)?;
    }
    art.csv("born_counts.csv", |w| {
        writeln!(w, "outcome,center,weight,count,frequency")?;
        for (i, ((c, wt), f)) in counts.iter().zip(&summary.weights).zip(&summary.frequencies).enumerate() {
            writeln!(w, "{i},{},{wt},{c},{f}", b.centers[i])?;
        }
        Ok(())
    })?;
    art.csv("born_runs.csv", |w| {
        writeln!(w, "run_index,outcome,hitting_step,timeout,min_spread")?;
        for r in &ens.records {
            let outcome = r.outcome.map(|o| o.to_string()).unwrap_or_default();
            let step = r.hitting_step.map(|s| s.to_string()).unwrap_or_default();
            writeln!(w, "{},{outcome},{step},{},{}", r.run_index, r.timeout, r.min_spread)?;
        }
        Ok(())
    })?;
    Ok(match report {
        Ok(_) => RunStatus::Ok,
        Err(e) => RunStatus::Invalidated {
            key: "born.n_steps_max".into(),
            reason: e.to_string(),
        },
    })
}

#[derive(Serialize)]
struct TailPoint {
    n: u64,
    exact: f64,
}

#[derive(Serialize)]
struct SurvivalSummary<'a> {
    step: StepDistribution,
    n_walks: usize,
    #[serde(flatten)]
    report: &'a SurvivalReport,
    tail: Vec<TailPoint>,
}

fn survival(cfg: &RunConfig, art: &mut Artifacts) -> Result<RunStatus, CliError> {
    let s = &cfg.survival;
    require(s.n_walks > 0, "survival.n_walks", "must be positive")?;
    require(s.n_max > 0, "survival.n_max", "must be positive")?;
    let chunks = s.n_walks.div_ceil(SURVIVAL_CHUNK);
    let histograms: Vec<Vec<u64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let walks = SURVIVAL_CHUNK.min(s.n_walks - c * SURVIVAL_CHUNK);
            lifetime_histogram(s.step, walks, s.n_max, &mut stream(cfg.master_seed, c as u64))
        })
        .collect();
    let mut total = vec![0u64; s.n_max + 1];
    for h in &histograms {
        for (t, x) in total.iter_mut().zip(h) {
            *t += x;
        }
    }
    let report = SurvivalReport::from_lifetimes(&total);
    art.log(format!("{} walks, max deviation from exact law {}", s.n_walks, report.max_abs_deviation));
    let summary = SurvivalSummary {
        step: s.step,
        n_walks: s.n_walks,
        report: &report,
        tail: s
            .tail_n
            .iter()
            .map(|&n| TailPoint {
                n,
                exact: sparre_andersen_exact(n),
            })
            .collect(),
    };
    art.json("survival.json", &summary)?;
    art.csv("survival.csv", |w| report.write_csv(w))?;
    Ok(RunStatus::Ok)
}

#[derive(Serialize)]
struct Checkpoint {
    t: f64,
    mean_tau: f64,
    sem_tau: f64,
    newton_a: f64,
    /// (mean τ − a) / sem.
    z: f64,
    mean_s: f64,
}

#[derive(Serialize)]
struct TrajectorySummary {
    kick_scale: f64,
    theta: f64,
    n_seeds: usize,
    checkpoints: Vec<Checkpoint>,
    max_abs_z: f64,
    within_3_sem: bool,
}

fn trajectory(cfg: &RunConfig, art: &mut Artifacts) -> Result<RunStatus, CliError> {
    let t = &cfg.trajectory;
    require(t.n_seeds >= 2, "trajectory.n_seeds", "need at least two seeds")?;
    positive(t.t_final, "trajectory.t_final")?;
    positive(t.step_length, "trajectory.step_length")?;
    require(t.dt_free.is_finite() && t.dt_free >= 0.0, "trajectory.dt_free", "must be non-negative")?;
    let consts = PhysicalConstants::new(t.hbar, t.mass).map_err(|e| core_error("trajectory", e))?;
    let grid = Grid::centered(t.n_points, t.length).map_err(|e| core_error("trajectory", e))?;
    let h = FreeHamiltonian::new(consts, t.potential);
    let params = PacketParams::new(t.center, t.sigma).with_momentum(t.momentum);
    let psi = rmwalk::statespace::make_packet(params, grid, consts).map_err(|e| core_error("trajectory", e))?;
    let scale = calibrate_step(t.n_points, t.step_length, 1.0, &mut stream(cfg.master_seed, CALIBRATION_STREAM))
        .map_err(|e| core_error("trajectory", e))?;
    let evo = EvolutionConfig {
        dt_free: t.dt_free,
        n_free_substeps: t.n_free_substeps,
        kick: KickConfig::new(t.n_points, scale, 1.0).with_method(t.kick_method),
    };
    let clock = if evo.window() > 0.0 { evo.window() } else { evo.kick.dt };
    art.log(format!("calibrated kick scale {scale}, window {clock}"));
    let runs = (0..t.n_seeds)
        .into_par_iter()
        .map(|i| alternating_evolve(&psi, &h, &evo, t.t_final, &mut stream(cfg.master_seed, i as u64)))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| core_error("trajectory", e))?;
    let newton = newtonian_reference(
        ClassicalState {
            a: t.center,
            p: t.momentum,
        },
        &h,
        t.t_final,
        clock,
    );
    let checkpoints: Vec<Checkpoint> = newton
        .iter()
        .enumerate()
        .map(|(k, reference)| {
            let taus: Vec<f64> = runs.iter().map(|r| r.points[k].tau).collect();
            let ss: Vec<f64> = runs.iter().map(|r| r.points[k].s).collect();
            let (mean_tau, sem_tau) = mean_and_sem(&taus);
            let (mean_s, _) = mean_and_sem(&ss);
            // identical runs (t = 0) leave only rounding in the mean
            let z = if sem_tau > 1e-12 * (1.0 + reference.a.abs()) {
                (mean_tau - reference.a) / sem_tau
            } else {
                0.0
            };
            Checkpoint {
                t: runs[0].points[k].t,
                mean_tau,
                sem_tau,
                newton_a: reference.a,
                z,
                mean_s,
            }
        })
        .collect();
    let max_abs_z = checkpoints.iter().map(|c| c.z.abs()).fold(0.0, f64::max);
    art.log(format!("{} seeds, max |z| {max_abs_z}", t.n_seeds));
    art.csv("trajectory_mean.csv", |w| {
        writeln!(w, "t,mean_tau,sem_tau,newton_a,z,mean_s")?;
        for c in &checkpoints {
            writeln!(w, "{},{},{},{},{},{}", c.t, c.mean_tau, c.sem_tau, c.newton_a, c.z, c.mean_s)?;
        }
        Ok(())
    })?;
    art.csv("trajectory_run0.csv", |w| runs[0].write_csv(w))?;
    art.json(
        "trajectory.json",
        &TrajectorySummary {
            kick_scale: scale,
            theta: evo.kick.theta(),
            n_seeds: t.n_seeds,
            checkpoints,
            max_abs_z,
            within_3_sem: max_abs_z <= 3.0,
        },
    )?;
    Ok(RunStatus::Ok)
}

#[derive(Serialize)]
struct ChainSummary {
    cycles: usize,
    truncated: usize,
    rms_displacement: f64,
    final_deviation: f64,
}

#[derive(Serialize)]
struct PlaneSummary {
    steps: usize,
    detections: usize,
    residuals: usize,
    normality: Option<KsResult>,
}

#[derive(Serialize)]
struct RenewalSummary {
    params: RenewalParams,
    cap: u64,
    nominal_displacement: f64,
    chain: ChainSummary,
    growth: GrowthFit,
    plane: PlaneSummary,
}

fn renewal(cfg: &RunConfig, art: &mut Artifacts) -> Result<RunStatus, CliError> {
    let r = &cfg.renewal;
    require(r.n_cycles > 0, "renewal.n_cycles", "must be positive")?;
    require(r.n_chains > 0, "renewal.n_chains", "must be positive")?;
    let params = RenewalParams {
        diffusion: r.diffusion,
        dt: r.dt,
        quantile: r.quantile,
    };
    params.validate().map_err(|e| core_error("renewal", e))?;
    // chain 0 of the growth fit, kept in full
    let chain = renewal_cycle(&params, r.n_cycles, &mut stream(cfg.master_seed, 0)).map_err(|e| core_error("renewal", e))?;
    let growth = deviation_growth(&params, r.n_chains, r.n_cycles, cfg.master_seed).map_err(|e| core_error("renewal", e))?;
    art.log(format!("{} chains x {} cycles, growth exponent {}", r.n_chains, r.n_cycles, growth.exponent));

    let plane_cfg = PlaneWalkConfig {
        start: FoliationPoint { tau: 0.0, s: 0.0 },
        drift_tau: r.plane_drift_tau,
        drift_s: r.plane_drift_s,
        std_tau: r.plane_std_tau,
        std_s: r.plane_std_s,
        detect_s: r.plane_detect_s,
        n_max: r.plane_n_max,
    };
    let walk = reduced_plane_walk(&plane_cfg, &mut stream(cfg.master_seed, PLANE_WALK_STREAM))
        .map_err(|e| match e {
            Error::InvalidParameter { name, reason } => CliError::invalid(format!("renewal.plane_{name}"), reason),
            other => core_error("renewal", other),
        })?;
    let residuals = detection_residuals(&plane_cfg, &walk);
    let normality = (residuals.len() >= 2).then(|| ks_standard_normal(&residuals));
    art.log(format!("plane walk: {} detections", walk.detections.len()));

    art.json(
        "renewal.json",
        &RenewalSummary {
            params,
            cap: params.cap(),
            nominal_displacement: params.nominal_displacement(),
            chain: ChainSummary {
                cycles: r.n_cycles,
                truncated: chain.truncated,
                rms_displacement: chain.rms_displacement,
                final_deviation: chain.cumulative.last().copied().unwrap_or(0.0),
            },
            growth: growth.clone(),
            plane: PlaneSummary {
                steps: r.plane_n_max,
                detections: walk.detections.len(),
                residuals: residuals.len(),
                normality,
            },
        },
    )?;
    art.csv("renewal_chain.csv", |w| {
        writeln!(w, "cycle,return_steps,displacement,cumulative")?;
        for (i, ((n, d), c)) in chain
            .return_steps
            .iter()
            .zip(&chain.displacements)
            .zip(&chain.cumulative)
            .enumerate()
        {
            writeln!(w, "{},{n},{d},{c}", i + 1)?;
        }
        Ok(())
    })?;
    art.csv("renewal_growth.csv", |w| {
        writeln!(w, "cycles,rms_deviation")?;
        for (c, d) in growth.checkpoints.iter().zip(&growth.rms_deviation) {
            writeln!(w, "{c},{d}")?;
        }
        Ok(())
    })?;
    art.csv("plane_walk.csv", |w| {
        writeln!(w, "step,tau,s,detect_s")?;
        for (i, p) in walk.trace.iter().take(r.plane_trace_rows).enumerate() {
            writeln!(w, "{i},{},{},{}", p.tau, p.s, r.plane_detect_s)?;
        }
        Ok(())
    })?;
    art.csv("plane_detections.csv", |w| {
        writeln!(w, "step,tau,residual")?;
        for (i, d) in walk.detections.iter().enumerate() {
            let res = residuals.get(i).map(|x| x.to_string()).unwrap_or_default();
            writeln!(w, "{},{},{res}", d.step, d.tau)?;
        }
        Ok(())
    })?;
    Ok(RunStatus::Ok)
}

#[derive(Serialize)]
struct GeometrySummary<'a> {
    isometry: &'a IsometryReport,
    overlap_lattice: OverlapLatticeReport,
}

fn geometry(cfg: &RunConfig, art: &mut Artifacts) -> Result<RunStatus, CliError> {
    let g = &cfg.geometry;
    positive(g.sigma, "geometry.sigma")?;
    positive(g.max_separation, "geometry.max_separation")?;
    require(g.n_separations > 0, "geometry.n_separations", "must be positive")?;
    require(g.lattice_size > 0, "geometry.lattice_size", "must be positive")?;
    let grid = Grid::centered(g.n_points, g.length).map_err(|e| core_error("geometry", e))?;
    let iso = isometry_check(grid, g.sigma, g.n_separations, g.max_separation * g.sigma)
        .map_err(|e| core_error("geometry", e))?;
    let lattice = overlap_lattice(
        grid,
        g.sigma,
        PhysicalConstants::natural(),
        g.lattice_size,
        g.lattice_max_da * g.sigma,
        g.lattice_max_dp,
    )
    .map_err(|e| core_error("geometry", e))?;
    art.log(format!(
        "isometry max error {}, overlap lattice max error {}",
        iso.max_abs_error, lattice.max_abs_error
    ));
    art.json(
        "geometry.json",
        &GeometrySummary {
            isometry: &iso,
            overlap_lattice: lattice,
        },
    )?;
    art.csv("isometry.csv", |w| iso.write_csv(w))?;
    Ok(RunStatus::Ok)
}

#[derive(Serialize)]
struct VelocityRow {
    momentum: f64,
    slope: f64,
    #[serde(flatten)]
    result: VelocityDecomposition,
}

#[derive(Serialize)]
struct VelocitySummary<'a> {
    sigma: f64,
    rows: &'a [VelocityRow],
    max_relative_error: f64,
}

fn velocity(cfg: &RunConfig, art: &mut Artifacts) -> Result<RunStatus, CliError> {
    let v = &cfg.velocity;
    positive(v.sigma, "velocity.sigma")?;
    let consts = PhysicalConstants::new(v.hbar, v.mass).map_err(|e| core_error("velocity", e))?;
    let mut rows = Vec::new();
    for &momentum in &v.momenta {
        for &slope in &v.slopes {
            let potential = if slope == 0.0 { Potential::Free } else { Potential::Linear { slope } };
            let result = velocity_decomposition(
                PacketParams::new(0.0, v.sigma).with_momentum(momentum),
                &FreeHamiltonian::new(consts, potential),
            )
            .map_err(|e| core_error("velocity", e))?;
            rows.push(VelocityRow {
                momentum,
                slope,
                result,
            });
        }
    }
    let max_relative_error = rows.iter().map(|r| r.result.relative_error).fold(0.0, f64::max);
    art.log(format!("{} cases, max relative error {max_relative_error}", rows.len()));
    art.json(
        "velocity.json",
        &VelocitySummary {
            sigma: v.sigma,
            rows: &rows,
            max_relative_error,
        },
    )?;
    art.csv("velocity.csv", |w| {
        writeln!(
            w,
            "momentum,slope,v_term,w_term,spread_term,total_sq,numeric_sq,relative_error,precondition_ok"
        )?;
        for r in &rows {
            let d = &r.result;
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                r.momentum,
                r.slope,
                d.v_term,
                d.w_term,
                d.spread_term,
                d.total_sq,
                d.numeric_sq,
                d.relative_error,
                d.precondition_ok
            )?;
        }
        Ok(())
    })?;
    Ok(RunStatus::Ok)
}

#[derive(Serialize)]
struct GueSummary {
    dimension: usize,
    scale: f64,
    n_matrices: usize,
    radius: f64,
    hermiticity_error: f64,
    semicircle: KsResult,
}

fn gue(cfg: &RunConfig, art: &mut Artifacts) -> Result<RunStatus, CliError> {
    let g = &cfg.gue;
    require(g.n_matrices > 0, "gue.n_matrices", "must be positive")?;
    positive(g.scale, "gue.scale")?;
    let samples = (0..g.n_matrices)
        .into_par_iter()
        .map(|m| {
            let h = sample_gue(g.dimension, g.scale, &mut stream(cfg.master_seed, m as u64))?;
            Ok((h.hermiticity_error(), h.eigenvalues()))
        })
        .collect::<Result<Vec<_>, Error>>()
        .map_err(|e| match e {
            Error::InvalidParameter { .. } => CliError::invalid("gue.dimension", e.to_string()),
            other => core_error("gue", other),
        })?;
    let radius = 2.0 * (g.dimension as f64).sqrt() * g.scale;
    let pooled: Vec<f64> = samples.iter().flat_map(|(_, ev)| ev.iter().copied()).collect();
    let semicircle = ks_one_sample(&pooled, |x| semicircle_cdf(x, radius));
    let hermiticity_error = samples.iter().map(|(e, _)| *e).fold(0.0, f64::max);
    art.log(format!("{} eigenvalues, Kolmogorov distance {}", pooled.len(), semicircle.statistic));
    art.json(
        "gue.json",
        &GueSummary {
            dimension: g.dimension,
            scale: g.scale,
            n_matrices: g.n_matrices,
            radius,
            hermiticity_error,
            semicircle,
        },
    )?;
    art.csv("gue_eigenvalues.csv", |w| {
        writeln!(w, "matrix,index,eigenvalue,semicircle_cdf")?;
        for (m, (_, ev)) in samples.iter().enumerate() {
            for (i, x) in ev.iter().enumerate() {
                writeln!(w, "{m},{i},{x},{}", semicircle_cdf(*x, radius))?;
            }
        }
        Ok(())
    })?;
    Ok(RunStatus::Ok)
}

#[derive(Serialize)]
struct EstimateRow {
    name: &'static str,
    value: f64,
    unit: &'static str,
}

#[derive(Serialize)]
struct EstimateSummary<'a> {
    environment: &'a EnvironmentParams,
    inputs: &'a EstimateInputs,
    report: &'a EstimateReport,
    rows: Vec<EstimateRow>,
}

fn estimate(cfg: &RunConfig, art: &mut Artifacts) -> Result<RunStatus, CliError> {
    let e = &cfg.estimate;
    let report = estimate_report(&e.environment, &e.inputs).map_err(|err| match err {
        Error::InvalidParameter { name, reason } => {
            let section = if e.environment.validate().is_err() { "environment" } else { "inputs" };
            CliError::invalid(format!("estimate.{section}.{name}"), reason)
        }
        other => core_error("estimate", other),
    })?;
    art.log(format!("T_spr = {} s", report.t_spr.0));
    let rows: Vec<EstimateRow> = report
        .rows()
        .into_iter()
        .map(|(name, value, unit)| EstimateRow { name, value, unit })
        .collect();
    art.json(
        "estimate.json",
        &EstimateSummary {
            environment: &e.environment,
            inputs: &e.inputs,
            report: &report,
            rows,
        },
    )?;
    art.write("estimate.txt", report.to_table().as_bytes())?;
    art.csv("estimate.csv", |w| {
        writeln!(w, "name,value,unit")?;
        for (name, value, unit) in report.rows() {
            writeln!(w, "{name},{value},{unit}")?;
        }
        Ok(())
    })?;
    Ok(RunStatus::Ok)
}

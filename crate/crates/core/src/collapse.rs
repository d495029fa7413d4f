//! First-passage collapse under repeated random kicks, Born statistics,
//! Sparre Andersen return times, the reduced (τ, s)-plane walk and the
//! stroboscopic renewal cycle.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ensembles::{kick_unchecked, KickConfig};
use crate::error::{Error, Result};
use crate::geometry::{ClassSpec, FoliationPoint};
use crate::rng::stream;
use crate::statespace::{make_packet_with_margin, moments, Grid, GridState, PacketParams, PhysicalConstants};

/// Minimum detector separation in resolutions.
pub const DETECTOR_SEPARATION: f64 = 6.0;
/// Fraction of timed-out runs that invalidates a Born report.
pub const MAX_TIMEOUT_FRACTION: f64 = 0.05;
/// Runs are scheduled in fixed chunks of this size; the timeout budget is
/// checked between chunks, so early termination does not depend on the
/// number of workers.
pub const RUN_CHUNK: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseRun {
    pub seed: u64,
    pub n_steps_max: usize,
    pub outcome: Option<usize>,
    /// Step at which the first detector fired, if any.
    pub hitting_step: Option<usize>,
    pub steps_executed: usize,
    /// Smallest δ_z seen along the run.
    pub min_spread: f64,
    /// (τ, s) after every step, starting with the initial state. Empty
    /// unless tracing was requested.
    pub foliation_trace: Vec<FoliationPoint>,
}

impl CollapseRun {
    pub fn timed_out(&self) -> bool {
        self.outcome.is_none()
    }
}

/// Line-delimited JSON record for one run.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub seed: u64,
    pub run_index: u64,
    pub outcome: Option<usize>,
    pub hitting_step: Option<usize>,
    pub timeout: bool,
    pub min_spread: f64,
}

fn check_detectors(detectors: &[ClassSpec]) -> Result<()> {
    if detectors.is_empty() {
        return Err(Error::param("detectors", "need at least one detector"));
    }
    for (i, a) in detectors.iter().enumerate() {
        for b in &detectors[i + 1..] {
            let need = DETECTOR_SEPARATION * a.resolution.max(b.resolution);
            if (a.center - b.center).abs() < need {
                return Err(Error::DetectorOverlap(a.center, b.center));
            }
        }
    }
    Ok(())
}

fn detect(state: &GridState, detectors: &[ClassSpec]) -> (Option<usize>, f64, f64) {
    let (mu, delta) = moments(state);
    let hit = detectors
        .iter()
        .position(|d| d.contains(mu, delta, d.default_mu_tol()));
    (hit, mu, delta)
}

/// Kicks `initial` until it enters one of the detector classes or
/// `n_steps_max` kicks have been applied.
pub fn run_collapse<R: Rng + ?Sized>(
    initial: &GridState,
    detectors: &[ClassSpec],
    kick: &KickConfig,
    n_steps_max: usize,
    rng: &mut R,
) -> Result<CollapseRun> {
    collapse_impl(initial, detectors, kick, n_steps_max, false, 0, rng)
}

/// As [`run_collapse`], also recording the foliation trace.
pub fn run_collapse_traced<R: Rng + ?Sized>(
    initial: &GridState,
    detectors: &[ClassSpec],
    kick: &KickConfig,
    n_steps_max: usize,
    rng: &mut R,
) -> Result<CollapseRun> {
    collapse_impl(initial, detectors, kick, n_steps_max, true, 0, rng)
}

fn collapse_impl<R: Rng + ?Sized>(
    initial: &GridState,
    detectors: &[ClassSpec],
    kick: &KickConfig,
    n_steps_max: usize,
    trace: bool,
    seed: u64,
    rng: &mut R,
) -> Result<CollapseRun> {
    check_detectors(detectors)?;
    initial.check_normalized()?;
    if kick.dimension != initial.len() {
        return Err(Error::DimensionMismatch {
            kick: kick.dimension,
            state: initial.len(),
        });
    }
    kick.validate()?;
    let mut foliation_trace = Vec::new();
    let mut state = initial.clone();
    let (mut hit, mu, delta) = detect(&state, detectors);
    let mut min_spread = delta;
    if trace {
        foliation_trace.push(FoliationPoint { tau: mu, s: delta.ln() });
    }
    let mut step = 0;
    while hit.is_none() && step < n_steps_max && kick.theta() > 0.0 {
        state = kick_unchecked(&state, kick, rng);
        step += 1;
        let (h, mu, delta) = detect(&state, detectors);
        hit = h;
        min_spread = min_spread.min(delta);
        if trace {
            foliation_trace.push(FoliationPoint { tau: mu, s: delta.ln() });
        }
    }
    Ok(CollapseRun {
        seed,
        n_steps_max,
        outcome: hit,
        hitting_step: hit.map(|_| step),
        steps_executed: step,
        min_spread,
        foliation_trace,
    })
}

/// A superposition of equal-width Gaussians with detectors at their centers.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BornExperiment {
    pub grid: Grid,
    pub amplitudes: Vec<Complex64>,
    pub centers: Vec<f64>,
    pub sigma: f64,
    pub kick: KickConfig,
    pub n_steps_max: usize,
    pub n_runs: usize,
    pub master_seed: u64,
    /// Edge margin, in widths, for the component packets.
    pub edge_margin: f64,
}

impl BornExperiment {
    pub fn weights(&self) -> Result<Vec<f64>> {
        let w: Vec<f64> = self.amplitudes.iter().map(|c| c.norm_sqr()).collect();
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::param("amplitudes", format!("Σ|c_i|² = {total}, expected 1")));
        }
        Ok(w)
    }

    pub fn detectors(&self) -> Result<Vec<ClassSpec>> {
        self.centers.iter().map(|&c| ClassSpec::new(c, self.sigma)).collect()
    }

    pub fn initial_state(&self) -> Result<GridState> {
        if self.amplitudes.len() != self.centers.len() {
            return Err(Error::param("amplitudes", "one amplitude per center required"));
        }
        let consts = PhysicalConstants::natural();
        let packets = self
            .centers
            .iter()
            .map(|&c| make_packet_with_margin(PacketParams::new(c, self.sigma), self.grid, consts, self.edge_margin))
            .collect::<Result<Vec<_>>>()?;
        let terms: Vec<(Complex64, &GridState)> = self.amplitudes.iter().copied().zip(packets.iter()).collect();
        GridState::superpose(&terms)
    }

    /// Largest number of timeouts that keeps the report valid.
    pub fn allowed_timeouts(&self) -> usize {
        (MAX_TIMEOUT_FRACTION * self.n_runs as f64).floor() as usize
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BornReport {
    pub weights: Vec<f64>,
    pub counts: Vec<u64>,
    pub n_runs: usize,
    pub timeouts: usize,
    pub chi2: f64,
    pub chi2_p: f64,
}

/// Everything an ensemble produced, including an early stop.
#[derive(Clone, Debug, PartialEq)]
pub struct BornEnsemble {
    pub weights: Vec<f64>,
    pub records: Vec<RunRecord>,
    /// Set when the timeout budget was exhausted before all runs finished.
    pub aborted: bool,
}

impl BornEnsemble {
    pub fn counts(&self) -> Vec<u64> {
        let mut counts = vec![0u64; self.weights.len()];
        for r in &self.records {
            if let Some(i) = r.outcome {
                counts[i] += 1;
            }
        }
        counts
    }

    pub fn timeouts(&self) -> usize {
        self.records.iter().filter(|r| r.timeout).count()
    }

    pub fn write_records<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            writeln!(w)?;
        }
        Ok(())
    }
}

/// Runs the ensemble in fixed chunks, run `i` drawing from stream
/// `(master_seed, i)`. Stops after the first chunk that pushes the timeout
/// count past the allowed fraction.
pub fn run_born_ensemble(exp: &BornExperiment) -> Result<BornEnsemble> {
    let weights = exp.weights()?;
    let detectors = exp.detectors()?;
    check_detectors(&detectors)?;
    let initial = exp.initial_state()?;
    if exp.kick.dimension != initial.len() {
        return Err(Error::DimensionMismatch {
            kick: exp.kick.dimension,
            state: initial.len(),
        });
    }
    exp.kick.validate()?;
    let allowed = exp.allowed_timeouts();
    let mut records = Vec::with_capacity(exp.n_runs);
    let mut timeouts = 0;
    let mut aborted = false;
    for start in (0..exp.n_runs).step_by(RUN_CHUNK) {
        let end = (start + RUN_CHUNK).min(exp.n_runs);
        let chunk: Vec<RunRecord> = (start..end)
            .into_par_iter()
            .map(|i| {
                let mut rng = stream(exp.master_seed, i as u64);
                let run = collapse_impl(&initial, &detectors, &exp.kick, exp.n_steps_max, false, exp.master_seed, &mut rng)
                    .expect("inputs validated above");
                RunRecord {
                    seed: exp.master_seed,
                    run_index: i as u64,
                    outcome: run.outcome,
                    hitting_step: run.hitting_step,
                    timeout: run.timed_out(),
                    min_spread: run.min_spread,
                }
            })
            .collect();
        timeouts += chunk.iter().filter(|r| r.timeout).count();
        records.extend(chunk);
        if timeouts > allowed {
            aborted = end < exp.n_runs;
            break;
        }
    }
    Ok(BornEnsemble {
        weights,
        records,
        aborted,
    })
}

/// Outcome frequencies and a chi-square test against the Born weights.
pub fn born_statistics(exp: &BornExperiment) -> Result<BornReport> {
    let ens = run_born_ensemble(exp)?;
    born_report(exp, &ens)
}

pub fn born_report(exp: &BornExperiment, ens: &BornEnsemble) -> Result<BornReport> {
    let timeouts = ens.timeouts();
    if timeouts > exp.allowed_timeouts() {
        return Err(Error::TimeoutFractionExceeded {
            timeouts,
            runs: ens.records.len(),
            allowed: exp.allowed_timeouts(),
        });
    }
    let counts = ens.counts();
    let (chi2, chi2_p) = crate::stats::chi_square_gof(&counts, &ens.weights)?;
    Ok(BornReport {
        weights: ens.weights.clone(),
        counts,
        n_runs: exp.n_runs,
        timeouts,
        chi2,
        chi2_p,
    })
}

/// Largest n evaluated by direct product.
const EXACT_PRODUCT_MAX: u64 = 64;

/// P(τ > n) = C(2n, n) / 4ⁿ.
pub fn sparre_andersen_exact(n: u64) -> f64 {
    if n <= EXACT_PRODUCT_MAX {
        (1..=n).fold(1.0, |acc, k| acc * (2 * k - 1) as f64 / (2 * k) as f64)
    } else {
        sparre_andersen_ln(n).exp()
    }
}

/// ln P(τ > n) from the asymptotic series of Γ(n+½)/(√π Γ(n+1)).
fn sparre_andersen_ln(n: u64) -> f64 {
    let x = n as f64;
    let x2 = x * x;
    -0.5 * (std::f64::consts::PI * x).ln() - 1.0 / (8.0 * x) + 1.0 / (192.0 * x * x2)
        - 1.0 / (640.0 * x * x2 * x2)
        + 17.0 / (14336.0 * x * x2 * x2 * x2)
}

/// P(N_n = k) where N_n counts the positive partial sums among the first n
/// steps of a symmetric continuous walk (discrete arcsine law).
pub fn arcsine_pmf(n: u64, k: u64) -> f64 {
    sparre_andersen_exact(k) * sparre_andersen_exact(n - k)
}

/// Draws a return time from P(τ > n) = u_n by inverse CDF, capped at
/// `cap`. Returns the time and whether it was capped.
pub fn sample_return_time<R: Rng + ?Sized>(cap: u64, rng: &mut R) -> (u64, bool) {
    let u: f64 = 1.0 - rng.random::<f64>();
    if u < sparre_andersen_exact(cap) {
        return (cap, true);
    }
    // τ = min{n ≥ 1 : u_n ≤ U}, bracketed by 1/√(π(n+½)) ≤ u_n ≤ 1/√(π(n+¼))
    let x = 1.0 / (std::f64::consts::PI * u * u);
    let mut n = ((x - 0.5).ceil().max(1.0)) as u64;
    while n > 1 && sparre_andersen_exact(n - 1) <= u {
        n -= 1;
    }
    while sparre_andersen_exact(n) > u {
        n += 1;
    }
    (n.min(cap), false)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepDistribution {
    Gaussian,
    /// ±1 with ties to the start broken by an infinitesimal continuous
    /// perturbation, so the walk behaves as a continuous one.
    PlusMinusOne,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalReport {
    pub n_values: Vec<u64>,
    pub empirical_survival: Vec<f64>,
    pub exact_survival: Vec<f64>,
    pub max_abs_deviation: f64,
}

impl SurvivalReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "n,empirical,exact")?;
        for ((n, e), x) in self.n_values.iter().zip(&self.empirical_survival).zip(&self.exact_survival) {
            writeln!(w, "{n},{e},{x}")?;
        }
        Ok(())
    }
}

/// Fraction of walks whose partial sums stay strictly above the start for
/// n = 1..=n_max steps.
pub fn survival_simulation<R: Rng + ?Sized>(
    step: StepDistribution,
    n_walks: usize,
    n_max: usize,
    rng: &mut R,
) -> SurvivalReport {
    SurvivalReport::from_lifetimes(&lifetime_histogram(step, n_walks, n_max, rng))
}

/// Entry `k` counts walks that survived exactly `k` steps (capped at n_max).
/// Histograms from independent streams add.
pub fn lifetime_histogram<R: Rng + ?Sized>(
    step: StepDistribution,
    n_walks: usize,
    n_max: usize,
    rng: &mut R,
) -> Vec<u64> {
    let mut alive = vec![0u64; n_max + 1];
    for _ in 0..n_walks {
        let lifetime = match step {
            StepDistribution::Gaussian => {
                let mut s = 0.0;
                let mut life = 0;
                for n in 1..=n_max {
                    s += rng.sample::<f64, _>(StandardNormal);
                    if s <= 0.0 {
                        break;
                    }
                    life = n;
                }
                life
            }
            StepDistribution::PlusMinusOne => {
                let (mut lattice, mut jitter) = (0i64, 0.0f64);
                let mut life = 0;
                for n in 1..=n_max {
                    lattice += if rng.random::<bool>() { 1 } else { -1 };
                    jitter += rng.sample::<f64, _>(StandardNormal);
                    if lattice < 0 || (lattice == 0 && jitter <= 0.0) {
                        break;
                    }
                    life = n;
                }
                life
            }
        };
        alive[lifetime] += 1;
    }
    alive
}

impl SurvivalReport {
    pub fn from_lifetimes(alive: &[u64]) -> Self {
        let n_max = alive.len().saturating_sub(1);
        let n_walks: u64 = alive.iter().sum();
        // survivors past n = walks with lifetime ≥ n
        let mut survivors = vec![0u64; n_max + 1];
        let mut acc = 0;
        for n in (0..=n_max).rev() {
            acc += alive[n];
            survivors[n] = acc;
        }
        let n_values: Vec<u64> = (1..=n_max as u64).collect();
        let empirical_survival: Vec<f64> = n_values
            .iter()
            .map(|&n| survivors[n as usize] as f64 / n_walks.max(1) as f64)
            .collect();
        let exact_survival: Vec<f64> = n_values.iter().map(|&n| sparre_andersen_exact(n)).collect();
        let max_abs_deviation = empirical_survival
            .iter()
            .zip(&exact_survival)
            .map(|(e, x)| (e - x).abs())
            .fold(0.0, f64::max);
        SurvivalReport {
            n_values,
            empirical_survival,
            exact_survival,
            max_abs_deviation,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneWalkConfig {
    pub start: FoliationPoint,
    pub drift_tau: f64,
    #[serde(default)]
    pub drift_s: f64,
    pub std_tau: f64,
    pub std_s: f64,
    pub detect_s: f64,
    pub n_max: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub step: usize,
    pub tau: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PlaneWalk {
    pub trace: Vec<FoliationPoint>,
    pub detections: Vec<Detection>,
}

impl PlaneWalk {
    pub fn write_trace_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "step,tau,s")?;
        for (k, p) in self.trace.iter().enumerate() {
            writeln!(w, "{k},{},{}", p.tau, p.s)?;
        }
        Ok(())
    }
}

/// Random walk on the (τ, s) plane with drift on τ. Whenever s ≤ detect_s
/// a detection of the current τ is recorded and s restarts from its
/// starting value; τ carries on from the recorded value.
pub fn reduced_plane_walk<R: Rng + ?Sized>(cfg: &PlaneWalkConfig, rng: &mut R) -> Result<PlaneWalk> {
    if !(cfg.std_tau >= 0.0 && cfg.std_s >= 0.0) {
        return Err(Error::param("step_std", "components must be non-negative"));
    }
    if cfg.start.s <= cfg.detect_s {
        return Err(Error::param("start", "s must start above detect_s"));
    }
    let mut trace = Vec::with_capacity(cfg.n_max + 1);
    let mut detections = Vec::new();
    let FoliationPoint { mut tau, mut s } = cfg.start;
    trace.push(cfg.start);
    for step in 1..=cfg.n_max {
        tau += cfg.drift_tau + cfg.std_tau * rng.sample::<f64, _>(StandardNormal);
        s += cfg.drift_s + cfg.std_s * rng.sample::<f64, _>(StandardNormal);
        if s <= cfg.detect_s {
            detections.push(Detection { step, tau });
            s = cfg.start.s;
        }
        trace.push(FoliationPoint { tau, s });
    }
    Ok(PlaneWalk { trace, detections })
}

/// Increments of τ between consecutive detections, standardized by the
/// drift line and the diffusion over the elapsed steps. Independent
/// standard normals when the walk is Gaussian.
pub fn detection_residuals(cfg: &PlaneWalkConfig, walk: &PlaneWalk) -> Vec<f64> {
    let mut prev = Detection {
        step: 0,
        tau: cfg.start.tau,
    };
    walk.detections
        .iter()
        .map(|d| {
            let gap = (d.step - prev.step) as f64;
            let r = (d.tau - prev.tau - cfg.drift_tau * gap) / (cfg.std_tau * gap.sqrt());
            prev = *d;
            r
        })
        .collect()
}

/// Return-time quantile the renewal picture reasons at.
pub const RENEWAL_QUANTILE: f64 = 0.999968;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenewalParams {
    /// Positional diffusion coefficient D_a (m²/s).
    pub diffusion: f64,
    /// Duration of one walk step (s).
    pub dt: f64,
    /// Return times beyond this quantile are capped.
    pub quantile: f64,
}

impl RenewalParams {
    pub fn new(diffusion: f64, dt: f64) -> Self {
        Self {
            diffusion,
            dt,
            quantile: RENEWAL_QUANTILE,
        }
    }

    /// Step count at the truncation quantile: ⌈1/(π(1−q)²)⌉.
    pub fn cap(&self) -> u64 {
        let tail = 1.0 - self.quantile;
        (1.0 / (std::f64::consts::PI * tail * tail)).ceil() as u64
    }

    /// sqrt(D_a · T) at the truncation quantile.
    pub fn nominal_displacement(&self) -> f64 {
        (self.diffusion * self.cap() as f64 * self.dt).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.diffusion >= 0.0 && self.diffusion.is_finite()) {
            return Err(Error::param("diffusion", "must be non-negative"));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::param("dt", "must be positive"));
        }
        if !(self.quantile > 0.0 && self.quantile < 1.0) {
            return Err(Error::param("quantile", "must lie in (0, 1)"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RenewalStats {
    pub return_steps: Vec<u64>,
    pub displacements: Vec<f64>,
    /// Running sum of displacements: deviation from the drift line.
    pub cumulative: Vec<f64>,
    pub truncated: usize,
    pub nominal_displacement: f64,
    pub rms_displacement: f64,
}

/// One chain of spread–detect–reset cycles. Each cycle lasts a Sparre
/// Andersen return time and adds a Gaussian displacement of standard
/// deviation sqrt(D_a · T_cycle).
pub fn renewal_cycle<R: Rng + ?Sized>(params: &RenewalParams, n_cycles: usize, rng: &mut R) -> Result<RenewalStats> {
    params.validate()?;
    let cap = params.cap();
    let mut return_steps = Vec::with_capacity(n_cycles);
    let mut displacements = Vec::with_capacity(n_cycles);
    let mut cumulative = Vec::with_capacity(n_cycles);
    let mut truncated = 0;
    let mut total = 0.0;
    for _ in 0..n_cycles {
        let (n, capped) = sample_return_time(cap, rng);
        truncated += capped as usize;
        let z: f64 = rng.sample(StandardNormal);
        let d = (params.diffusion * n as f64 * params.dt).sqrt() * z;
        total += d;
        return_steps.push(n);
        displacements.push(d);
        cumulative.push(total);
    }
    let rms_displacement = if n_cycles > 0 {
        (displacements.iter().map(|d| d * d).sum::<f64>() / n_cycles as f64).sqrt()
    } else {
        0.0
    };
    Ok(RenewalStats {
        return_steps,
        displacements,
        cumulative,
        truncated,
        nominal_displacement: params.nominal_displacement(),
        rms_displacement,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrowthFit {
    pub checkpoints: Vec<usize>,
    pub rms_deviation: Vec<f64>,
    pub exponent: f64,
}

/// RMS over independent chains of the cumulative deviation at log-spaced
/// checkpoints, and the fitted log–log growth exponent. Chain `i` uses
/// stream `(master_seed, i)`.
pub fn deviation_growth(params: &RenewalParams, n_chains: usize, n_cycles: usize, master_seed: u64) -> Result<GrowthFit> {
    params.validate()?;
    let mut checkpoints = Vec::new();
    let mut c = 100usize.min(n_cycles);
    while c < n_cycles {
        checkpoints.push(c);
        c = ((c as f64) * 10f64.powf(0.25)).round() as usize;
    }
    checkpoints.push(n_cycles);
    let sums: Vec<Vec<f64>> = (0..n_chains)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream(master_seed, i as u64);
            let stats = renewal_cycle(params, n_cycles, &mut rng).expect("validated");
            checkpoints.iter().map(|&c| stats.cumulative[c - 1].powi(2)).collect()
        })
        .collect();
    let rms_deviation: Vec<f64> = (0..checkpoints.len())
        .map(|j| (sums.iter().map(|s| s[j]).sum::<f64>() / n_chains as f64).sqrt())
        .collect();
    let x: Vec<f64> = checkpoints.iter().map(|&c| (c as f64).ln()).collect();
    let y: Vec<f64> = rms_deviation.iter().map(|r| r.ln()).collect();
    let exponent = crate::stats::linear_fit(&x, &y).slope;
    Ok(GrowthFit {
        checkpoints,
        rms_deviation,
        exponent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_values_and_recursion() {
        assert_eq!(sparre_andersen_exact(0), 1.0);
        assert_eq!(sparre_andersen_exact(1), 0.5);
        assert_eq!(sparre_andersen_exact(2), 0.375);
        for n in [1u64, 10, 63, 64, 65, 1000, 123_456] {
            let ratio = sparre_andersen_exact(n + 1) / sparre_andersen_exact(n);
            let want = (2 * n + 1) as f64 / (2 * n + 2) as f64;
            assert!((ratio - want).abs() < 1e-14, "n = {n}");
        }
    }

    #[test]
    fn series_continues_product() {
        let mut p = sparre_andersen_exact(EXACT_PRODUCT_MAX);
        for n in EXACT_PRODUCT_MAX + 1..5000 {
            p *= (2 * n - 1) as f64 / (2 * n) as f64;
            assert!((sparre_andersen_exact(n) / p - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn return_time_inverse_cdf_is_exact_at_boundaries() {
        let mut rng = stream(9, 0);
        for _ in 0..2000 {
            let (n, capped) = sample_return_time(1_000_000, &mut rng);
            assert!(n >= 1);
            if !capped {
                assert!(n <= 1_000_000);
            }
        }
    }

    #[test]
    fn detectors_must_be_separated() {
        let a = ClassSpec::new(0.0, 1.0).unwrap();
        let b = ClassSpec::new(5.0, 1.0).unwrap();
        assert!(matches!(check_detectors(&[a, b]), Err(Error::DetectorOverlap(..))));
    }

    #[test]
    fn plane_walk_rejects_start_inside_band() {
        let cfg = PlaneWalkConfig {
            start: FoliationPoint { tau: 0.0, s: 0.0 },
            drift_tau: 0.0,
            drift_s: 0.0,
            std_tau: 1.0,
            std_s: 1.0,
            detect_s: 0.0,
            n_max: 10,
        };
        assert!(reduced_plane_walk(&cfg, &mut stream(0, 0)).is_err());
    }
}

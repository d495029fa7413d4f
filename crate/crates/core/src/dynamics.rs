//! Free Schrödinger evolution, its alternation with random kicks, and the
//! classical reference dynamics.

use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::ensembles::{kick_unchecked, sample_gue, KickConfig, KickOperator};
use crate::error::{Error, Result};
use crate::geometry::foliation_coords;
use crate::spectral::Spectral;
use crate::statespace::{
    fs_distance_unchecked, make_packet, mean_momentum, moments, Grid, GridState, PacketParams,
    PhysicalConstants,
};

/// Time-independent external potential.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Potential {
    #[default]
    Free,
    /// V(z) = slope·z
    Linear { slope: f64 },
    /// V(z) = ½·stiffness·(z − center)²
    Harmonic { stiffness: f64, center: f64 },
}

impl Potential {
    pub fn value(&self, z: f64) -> f64 {
        match *self {
            Potential::Free => 0.0,
            Potential::Linear { slope } => slope * z,
            Potential::Harmonic { stiffness, center } => 0.5 * stiffness * (z - center).powi(2),
        }
    }

    pub fn gradient(&self, z: f64) -> f64 {
        match *self {
            Potential::Free => 0.0,
            Potential::Linear { slope } => slope,
            Potential::Harmonic { stiffness, center } => stiffness * (z - center),
        }
    }

    pub fn curvature(&self) -> f64 {
        match *self {
            Potential::Harmonic { stiffness, .. } => stiffness,
            _ => 0.0,
        }
    }
}

/// `−ħ²/2m ∂² + V(z)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FreeHamiltonian {
    pub consts: PhysicalConstants,
    #[serde(default)]
    pub potential: Potential,
}

impl FreeHamiltonian {
    pub fn new(consts: PhysicalConstants, potential: Potential) -> Self {
        Self { consts, potential }
    }

    pub fn free(consts: PhysicalConstants) -> Self {
        Self::new(consts, Potential::Free)
    }

    /// V sampled on the grid.
    pub fn potential_values(&self, grid: &Grid) -> Vec<f64> {
        grid.points().map(|z| self.potential.value(z)).collect()
    }
}

/// Strang split-step propagator for a fixed grid and time step.
#[derive(Clone, Debug)]
pub struct FreePropagator {
    grid: Grid,
    spectral: Spectral,
    half_potential: Option<Vec<Complex64>>,
    kinetic: Vec<Complex64>,
}

impl FreePropagator {
    pub fn new(grid: Grid, h: &FreeHamiltonian, dt: f64) -> Self {
        let spectral = Spectral::new(&grid);
        let PhysicalConstants { hbar, mass } = h.consts;
        let kinetic = spectral
            .wavenumbers()
            .iter()
            .map(|&k| Complex64::from_polar(1.0, -hbar * k * k * dt / (2.0 * mass)))
            .collect();
        let half_potential = match h.potential {
            Potential::Free => None,
            _ => Some(
                h.potential_values(&grid)
                    .into_iter()
                    .map(|v| Complex64::from_polar(1.0, -v * dt / (2.0 * hbar)))
                    .collect(),
            ),
        };
        Self {
            grid,
            spectral,
            half_potential,
            kinetic,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn step_in_place(&self, psi: &mut [Complex64]) {
        if let Some(v) = &self.half_potential {
            psi.iter_mut().zip(v).for_each(|(a, p)| *a *= p);
        }
        self.spectral.forward(psi);
        psi.iter_mut().zip(&self.kinetic).for_each(|(a, p)| *a *= p);
        self.spectral.inverse(psi);
        if let Some(v) = &self.half_potential {
            psi.iter_mut().zip(v).for_each(|(a, p)| *a *= p);
        }
    }

    /// `n` steps without leakage checks.
    pub fn evolve(&self, state: &GridState, n: usize) -> GridState {
        let mut psi = state.amplitudes().to_vec();
        for _ in 0..n {
            self.step_in_place(&mut psi);
        }
        GridState::from_parts(self.grid, psi)
    }
}

/// One split-step of length `dt`. The state must be free of edge leakage
/// before and after.
pub fn free_step(state: &GridState, h: &FreeHamiltonian, dt: f64) -> Result<GridState> {
    state.check_normalized()?;
    state.check_leakage()?;
    let out = FreePropagator::new(*state.grid(), h, dt).evolve(state, 1);
    out.check_leakage()?;
    Ok(out)
}

/// ⟨ĥ⟩ with the kinetic term evaluated spectrally.
pub fn energy(state: &GridState, h: &FreeHamiltonian) -> f64 {
    let grid = state.grid();
    let spectral = Spectral::new(grid);
    let mut hat = state.amplitudes().to_vec();
    spectral.forward(&mut hat);
    let PhysicalConstants { hbar, mass } = h.consts;
    let total_hat: f64 = hat.iter().map(|c| c.norm_sqr()).sum();
    let kinetic: f64 = hat
        .iter()
        .zip(spectral.wavenumbers())
        .map(|(c, &k)| c.norm_sqr() * hbar * hbar * k * k / (2.0 * mass))
        .sum::<f64>()
        / total_hat;
    let norm = state.norm_sqr();
    let potential: f64 = grid
        .points()
        .zip(state.density())
        .map(|(z, p)| h.potential.value(z) * p)
        .sum::<f64>()
        * grid.dx()
        / norm;
    kinetic + potential
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    pub a: f64,
    pub p: f64,
}

/// Kick–drift–kick leapfrog for `da/dt = p/m`, `dp/dt = −V′(a)`. Returns
/// the state at every step, starting with `init`.
pub fn newtonian_reference(init: ClassicalState, h: &FreeHamiltonian, t_final: f64, dt: f64) -> Vec<ClassicalState> {
    let steps = (t_final / dt).round() as usize;
    let m = h.consts.mass;
    let mut out = Vec::with_capacity(steps + 1);
    let ClassicalState { mut a, mut p } = init;
    out.push(init);
    for _ in 0..steps {
        p -= 0.5 * dt * h.potential.gradient(a);
        a += dt * p / m;
        p -= 0.5 * dt * h.potential.gradient(a);
        out.push(ClassicalState { a, p });
    }
    out
}

pub fn classical_energy(s: ClassicalState, h: &FreeHamiltonian) -> f64 {
    s.p * s.p / (2.0 * h.consts.mass) + h.potential.value(s.a)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VelocityDecomposition {
    pub v_term: f64,
    pub w_term: f64,
    pub spread_term: f64,
    pub total_sq: f64,
    pub numeric_sq: f64,
    pub relative_error: f64,
    /// |V″|σ² / (|V′|σ + ħ²/mσ²); the local-linearity condition wants this small.
    pub precondition_ratio: f64,
    pub precondition_ok: bool,
}

/// Step used for the FS speed finite difference; Richardson pairs it with half of it.
pub const SPEED_STEP: f64 = 0.01;

/// Squared FS speed of a packet at t = 0: analytic three-term sum versus
/// `(ρ(φ(0), φ(δt))/δt)²` extrapolated to δt → 0. The packet lives on a
/// 512-point grid spanning 40 widths around its center.
pub fn velocity_decomposition(params: PacketParams, h: &FreeHamiltonian) -> Result<VelocityDecomposition> {
    let sigma = params.width;
    let grid = Grid::new(512, 40.0 * sigma, params.center - 20.0 * sigma)?;
    let PhysicalConstants { hbar, mass } = h.consts;
    let phi = make_packet(params, grid, h.consts)?;

    let v = params.momentum / mass;
    let w = -h.potential.gradient(params.center) / mass;
    let v_term = v * v / (4.0 * sigma * sigma);
    let w_term = mass * mass * w * w * sigma * sigma / (hbar * hbar);
    let spread_term = hbar * hbar / (32.0 * sigma.powi(4) * mass * mass);
    let total_sq = v_term + w_term + spread_term;

    let speed_sq = |dt: f64| {
        let out = FreePropagator::new(grid, h, dt).evolve(&phi, 1);
        (fs_distance_unchecked(&phi, &out) / dt).powi(2)
    };
    let coarse = speed_sq(SPEED_STEP);
    let fine = speed_sq(0.5 * SPEED_STEP);
    let numeric_sq = (4.0 * fine - coarse) / 3.0;

    let curvature = h.potential.curvature().abs();
    let precondition_ratio = curvature * sigma * sigma
        / (h.potential.gradient(params.center).abs() * sigma + hbar * hbar / (mass * sigma * sigma));
    Ok(VelocityDecomposition {
        v_term,
        w_term,
        spread_term,
        total_sq,
        numeric_sq,
        relative_error: (numeric_sq - total_sq).abs() / total_sq,
        precondition_ratio,
        precondition_ok: precondition_ratio < 0.1,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CommutatorEstimate {
    pub tau: f64,
    pub measured: f64,
    pub analytic_bound: f64,
}

/// `vτ/σ + τ/T_spr` with `T_spr = mσ²/ħ`.
pub fn analytic_epsilon(speed: f64, tau: f64, sigma: f64, mass: f64, hbar: f64) -> f64 {
    speed * tau / sigma + tau * hbar / (mass * sigma * sigma)
}

/// Splits a free evolution of duration `tau` into steps no longer than this.
pub const COMMUTATOR_MAX_SUBSTEP: f64 = 1e-3;

/// ‖(U_free U_kick − U_kick U_free) φ‖ for a fixed kick operator, where
/// `U_free = exp(−iĥτ/ħ)` and `U_kick = exp(−iθH)`.
pub fn commutator_with(
    state: &GridState,
    h: &FreeHamiltonian,
    kick: &KickOperator,
    theta: f64,
    tau: f64,
) -> Result<f64> {
    if tau == 0.0 || theta == 0.0 {
        return Ok(0.0);
    }
    let grid = *state.grid();
    let substeps = match h.potential {
        Potential::Free => 1,
        _ => (tau.abs() / COMMUTATOR_MAX_SUBSTEP).ceil().max(1.0) as usize,
    };
    let prop = FreePropagator::new(grid, h, tau / substeps as f64);
    let free_then_kick = kick.apply(&prop.evolve(state, substeps), theta)?;
    let kick_then_free = prop.evolve(&kick.apply(state, theta)?, substeps);
    let diff: f64 = free_then_kick
        .amplitudes()
        .iter()
        .zip(kick_then_free.amplitudes())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum::<f64>()
        * grid.dx();
    Ok(diff.sqrt())
}

/// Draws one kick operator and measures the commutator at free duration
/// `tau`. The state must be localized at `resolution`.
pub fn commutator_epsilon<R: Rng + ?Sized>(
    state: &GridState,
    h: &FreeHamiltonian,
    kick: &KickConfig,
    tau: f64,
    resolution: f64,
    rng: &mut R,
) -> Result<CommutatorEstimate> {
    state.check_normalized()?;
    if kick.dimension != state.len() {
        return Err(Error::DimensionMismatch {
            kick: kick.dimension,
            state: state.len(),
        });
    }
    kick.validate()?;
    let (_, spread) = moments(state);
    if spread > resolution {
        return Err(Error::NotLocalized {
            spread,
            sigma: resolution,
        });
    }
    let op = KickOperator::from_sample(&sample_gue(kick.dimension, 1.0, rng)?);
    let measured = commutator_with(state, h, &op, kick.theta(), tau)?;
    let speed = mean_momentum(state, h.consts)?.abs() / h.consts.mass;
    Ok(CommutatorEstimate {
        tau,
        measured,
        analytic_bound: analytic_epsilon(speed, tau, resolution, h.consts.mass, h.consts.hbar),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    pub dt_free: f64,
    pub n_free_substeps: usize,
    pub kick: KickConfig,
}

impl EvolutionConfig {
    /// Free time per kick window.
    pub fn window(&self) -> f64 {
        self.dt_free * self.n_free_substeps as f64
    }

    /// Number of windows covering `t_final`. A schedule without free time
    /// uses the kick's own `dt` as its clock.
    pub fn windows_for(&self, t_final: f64) -> usize {
        let w = self.window();
        let w = if w > 0.0 { w } else { self.kick.dt };
        if w > 0.0 {
            (t_final / w).round() as usize
        } else {
            0
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub t: f64,
    pub tau: f64,
    pub s: f64,
    pub norm: f64,
    pub energy: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Trajectory {
    pub final_state: GridState,
    pub points: Vec<TrajectoryPoint>,
}

impl Trajectory {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,tau,s,norm,energy")?;
        for p in &self.points {
            writeln!(w, "{},{},{},{},{}", p.t, p.tau, p.s, p.norm, p.energy)?;
        }
        Ok(())
    }
}

/// Sequential schedule: each window is `n_free_substeps` split-steps of
/// `dt_free` followed by one kick. Records (t, τ, s) at t = 0 and after
/// every window.
///
/// Only the initial state is checked for edge leakage: a kick of any
/// nonzero strength spreads some mass over the whole grid.
pub fn alternating_evolve<R: Rng + ?Sized>(
    state: &GridState,
    h: &FreeHamiltonian,
    cfg: &EvolutionConfig,
    t_final: f64,
    rng: &mut R,
) -> Result<Trajectory> {
    state.check_normalized()?;
    state.check_leakage()?;
    if cfg.kick.dimension != state.len() {
        return Err(Error::DimensionMismatch {
            kick: cfg.kick.dimension,
            state: state.len(),
        });
    }
    cfg.kick.validate()?;
    if !(cfg.dt_free.is_finite() && cfg.dt_free >= 0.0) {
        return Err(Error::param("dt_free", "must be non-negative"));
    }
    let grid = *state.grid();
    let prop = FreePropagator::new(grid, h, cfg.dt_free);
    let windows = cfg.windows_for(t_final);
    let clock = if cfg.window() > 0.0 { cfg.window() } else { cfg.kick.dt };

    let record = |t: f64, s: &GridState| -> Result<TrajectoryPoint> {
        let norm = s.norm();
        let f = foliation_coords(s)?;
        Ok(TrajectoryPoint {
            t,
            tau: f.tau,
            s: f.s,
            norm,
            energy: energy(s, h),
        })
    };
    let mut points = Vec::with_capacity(windows + 1);
    points.push(record(0.0, state)?);
    let mut psi = state.amplitudes().to_vec();
    for w in 0..windows {
        for _ in 0..cfg.n_free_substeps {
            prop.step_in_place(&mut psi);
        }
        let kicked = kick_unchecked(&GridState::from_parts(grid, psi), &cfg.kick, rng);
        points.push(record((w + 1) as f64 * clock, &kicked)?);
        psi = kicked.into_amplitudes();
    }
    Ok(Trajectory {
        final_state: GridState::from_parts(grid, psi),
        points,
    })
}

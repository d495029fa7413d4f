//! Order-of-magnitude estimates for a macroscopic body monitored by its
//! environment (gas collisions and ambient radiation).
//!
//! Quantities carry their unit in the type, so passing a length where a
//! time is expected does not compile.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::collapse::RENEWAL_QUANTILE;
use crate::error::{Error, Result};

macro_rules! unit {
    ($(#[$doc:meta])* $name:ident, $symbol:literal) => {
        $(#[$doc])*
        #[derive(Clone, Copy, Debug, Default, PartialEq, PartialOrd, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub f64);

        impl $name {
            pub const SYMBOL: &'static str = $symbol;

            pub fn value(self) -> f64 {
                self.0
            }
        }

        impl Add for $name {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                Self(self.0 + rhs.0)
            }
        }

        impl Sub for $name {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                Self(self.0 - rhs.0)
            }
        }

        impl Mul<f64> for $name {
            type Output = Self;
            fn mul(self, rhs: f64) -> Self {
                Self(self.0 * rhs)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{:.3e} {}", self.0, $symbol)
            }
        }
    };
}

unit!(Meters, "m");
unit!(Seconds, "s");
unit!(Kilograms, "kg");
unit!(MetersPerSecond, "m/s");
unit!(PerSecond, "1/s");
unit!(PerCubicMeter, "1/m^3");
unit!(
    /// Particle flux through a surface.
    Flux,
    "1/(m^2 s)"
);
unit!(Momentum, "kg m/s");
unit!(JouleSeconds, "J s");
unit!(
    /// Momentum diffusion coefficient Γ·p².
    MomentumDiffusion,
    "kg^2 m^2/s^3"
);
unit!(
    /// Position diffusion coefficient, taken as D_p/M².
    PositionDiffusion,
    "m^2/s"
);

/// ħ rounded the way the order-of-magnitude arithmetic uses it.
pub const HBAR_ROUNDED: JouleSeconds = JouleSeconds(1e-34);
/// CODATA 2018 reduced Planck constant.
pub const HBAR_CODATA: JouleSeconds = JouleSeconds(1.054_571_817e-34);
pub const SPEED_OF_LIGHT: MetersPerSecond = MetersPerSecond(299_792_458.0);
/// Atomic mass unit.
pub const DALTON: Kilograms = Kilograms(1.660_539_066_60e-27);

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EnvironmentParams {
    pub gas_number_density: PerCubicMeter,
    pub thermal_velocity: MetersPerSecond,
    pub interaction_range: Meters,
    pub body_radius: Meters,
    pub body_mass: Kilograms,
    pub body_speed: MetersPerSecond,
    pub resolution: Meters,
    pub gas_particle_mass: Kilograms,
    pub hbar: JouleSeconds,
}

impl EnvironmentParams {
    /// Air at standard conditions around a 1 mg, 1 mm body moving at 1 m/s,
    /// resolved at 1 µm.
    pub fn air_defaults() -> Self {
        Self {
            gas_number_density: PerCubicMeter(2.4e25),
            thermal_velocity: MetersPerSecond(5e2),
            interaction_range: Meters(1e-9),
            body_radius: Meters(1e-3),
            body_mass: Kilograms(1e-6),
            body_speed: MetersPerSecond(1.0),
            resolution: Meters(1e-6),
            gas_particle_mass: Kilograms(29.0 * DALTON.0),
            hbar: HBAR_ROUNDED,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("gas_number_density", self.gas_number_density.0),
            ("thermal_velocity", self.thermal_velocity.0),
            ("interaction_range", self.interaction_range.0),
            ("body_radius", self.body_radius.0),
            ("body_mass", self.body_mass.0),
            ("body_speed", self.body_speed.0),
            ("resolution", self.resolution.0),
            ("gas_particle_mass", self.gas_particle_mass.0),
            ("hbar", self.hbar.0),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::param(name, format!("must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

impl Default for EnvironmentParams {
    fn default() -> Self {
        Self::air_defaults()
    }
}

/// ℓ / v_rel.
pub fn collision_window(range: Meters, v_rel: MetersPerSecond) -> Seconds {
    Seconds(range.0 / v_rel.0)
}

/// n·v_th/4.
pub fn particle_flux(n: PerCubicMeter, v_th: MetersPerSecond) -> Flux {
    Flux(n.0 * v_th.0 / 4.0)
}

/// Flux times the cross-section πR².
pub fn collision_rate(n: PerCubicMeter, v_th: MetersPerSecond, radius: Meters) -> PerSecond {
    PerSecond(particle_flux(n, v_th).0 * std::f64::consts::PI * radius.0 * radius.0)
}

/// Momentum transferred per collision, m_gas·v_th.
pub fn kick_momentum(env: &EnvironmentParams) -> Momentum {
    Momentum(env.gas_particle_mass.0 * env.thermal_velocity.0)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Diffusion {
    pub n_kicks: f64,
    pub d_p: MomentumDiffusion,
    pub d_a: PositionDiffusion,
}

/// N = Γ·dt, D_p = Γ·p_kick², D_a = D_p/M².
///
/// D_p/M² actually has dimension m²/s³; the result is labeled m²/s as the
/// estimate uses it.
pub fn diffusion_coefficients(env: &EnvironmentParams, dt: Seconds) -> Diffusion {
    let gamma = collision_rate(env.gas_number_density, env.thermal_velocity, env.body_radius);
    let p = kick_momentum(env);
    let d_p = MomentumDiffusion(gamma.0 * p.0 * p.0);
    Diffusion {
        n_kicks: gamma.0 * dt.0,
        d_p,
        d_a: PositionDiffusion(d_p.0 / (env.body_mass.0 * env.body_mass.0)),
    }
}

/// p_kick·√N / (M·v).
pub fn kick_to_momentum_ratio(env: &EnvironmentParams, dt: Seconds) -> f64 {
    let n = diffusion_coefficients(env, dt).n_kicks;
    kick_momentum(env).0 * n.sqrt() / (env.body_mass.0 * env.body_speed.0)
}

/// T_spr = Mσ²/ħ.
pub fn spreading_time(mass: Kilograms, sigma: Meters, hbar: JouleSeconds) -> Seconds {
    Seconds(mass.0 * sigma.0 * sigma.0 / hbar.0)
}

/// vτ/σ + τ/T_spr.
pub fn epsilon_bound(env: &EnvironmentParams, tau: Seconds) -> f64 {
    let t_spr = spreading_time(env.body_mass, env.resolution, env.hbar);
    env.body_speed.0 * tau.0 / env.resolution.0 + tau.0 / t_spr.0
}

/// n = ⌈1/(π(1−q)²)⌉ steps and T = n·dt.
pub fn return_time(q: f64, dt: Seconds) -> Result<(u64, Seconds)> {
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::param("q", format!("must lie in (0, 1), got {q}")));
    }
    let tail = 1.0 - q;
    let n = (1.0 / (std::f64::consts::PI * tail * tail)).ceil() as u64;
    Ok((n, Seconds(n as f64 * dt.0)))
}

/// sqrt(D_a·T).
pub fn displacement_per_cycle(d_a: PositionDiffusion, t: Seconds) -> Meters {
    Meters((d_a.0 * t.0).sqrt())
}

/// Width gained by a free Gaussian over `t`:
/// sqrt(σ² + (ħt/2Mσ)²) − σ, evaluated without cancellation.
pub fn spreading_increment(sigma: Meters, mass: Kilograms, hbar: JouleSeconds, t: Seconds) -> Meters {
    let x = hbar.0 * t.0 / (2.0 * mass.0 * sigma.0);
    Meters(x * x / ((sigma.0 * sigma.0 + x * x).sqrt() + sigma.0))
}

/// Inputs beyond the environment itself.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EstimateInputs {
    /// Coarse-grained walk step.
    pub dt: Seconds,
    /// Interaction range for scattered radiation.
    pub photon_range: Meters,
    pub photon_speed: MetersPerSecond,
    /// Upper bounds on the interaction windows used in τ/T_spr.
    pub air_window: Seconds,
    pub radiation_window: Seconds,
    pub return_quantile: f64,
    /// Position diffusion coefficient used for the renewal-cycle
    /// displacement. `None` uses the value derived from the environment.
    pub cycle_diffusion: Option<PositionDiffusion>,
}

impl Default for EstimateInputs {
    fn default() -> Self {
        Self {
            dt: Seconds(1e-12),
            photon_range: Meters(1e-6),
            photon_speed: MetersPerSecond(3e8),
            air_window: Seconds(1e-12),
            radiation_window: Seconds(1e-15),
            return_quantile: RENEWAL_QUANTILE,
            cycle_diffusion: Some(PositionDiffusion(1e-12)),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub tau_collision: Seconds,
    pub tau_photon: Seconds,
    pub flux: Flux,
    pub gamma: PerSecond,
    pub n_kicks: f64,
    pub p_kick: Momentum,
    pub d_p: MomentumDiffusion,
    pub d_a: PositionDiffusion,
    pub momentum_ratio: f64,
    pub t_spr: Seconds,
    pub tau_over_t_spr_air: f64,
    pub tau_over_t_spr_radiation: f64,
    pub epsilon: f64,
    pub epsilon_radiation: f64,
    pub n_return: u64,
    pub t_return: Seconds,
    pub da_cycle: Meters,
    pub spreading_increment: Meters,
}

pub fn estimate_report(env: &EnvironmentParams, inputs: &EstimateInputs) -> Result<EstimateReport> {
    env.validate()?;
    let tau_collision = collision_window(env.interaction_range, env.thermal_velocity);
    let tau_photon = collision_window(inputs.photon_range, inputs.photon_speed);
    let diff = diffusion_coefficients(env, inputs.dt);
    let t_spr = spreading_time(env.body_mass, env.resolution, env.hbar);
    let (n_return, t_return) = return_time(inputs.return_quantile, inputs.dt)?;
    let cycle_d = inputs.cycle_diffusion.unwrap_or(diff.d_a);
    Ok(EstimateReport {
        tau_collision,
        tau_photon,
        flux: particle_flux(env.gas_number_density, env.thermal_velocity),
        gamma: collision_rate(env.gas_number_density, env.thermal_velocity, env.body_radius),
        n_kicks: diff.n_kicks,
        p_kick: kick_momentum(env),
        d_p: diff.d_p,
        d_a: diff.d_a,
        momentum_ratio: kick_to_momentum_ratio(env, inputs.dt),
        t_spr,
        tau_over_t_spr_air: inputs.air_window.0 / t_spr.0,
        tau_over_t_spr_radiation: inputs.radiation_window.0 / t_spr.0,
        epsilon: epsilon_bound(env, tau_collision),
        epsilon_radiation: epsilon_bound(env, tau_photon),
        n_return,
        t_return,
        da_cycle: displacement_per_cycle(cycle_d, t_return),
        spreading_increment: spreading_increment(env.resolution, env.body_mass, env.hbar, t_return),
    })
}

impl EstimateReport {
    /// (name, value, unit) rows in a fixed order.
    pub fn rows(&self) -> Vec<(&'static str, f64, &'static str)> {
        vec![
            ("tau_collision", self.tau_collision.0, Seconds::SYMBOL),
            ("tau_photon", self.tau_photon.0, Seconds::SYMBOL),
            ("flux", self.flux.0, Flux::SYMBOL),
            ("gamma", self.gamma.0, PerSecond::SYMBOL),
            ("n_kicks", self.n_kicks, ""),
            ("p_kick", self.p_kick.0, Momentum::SYMBOL),
            ("d_p", self.d_p.0, MomentumDiffusion::SYMBOL),
            ("d_a", self.d_a.0, PositionDiffusion::SYMBOL),
            ("momentum_ratio", self.momentum_ratio, ""),
            ("t_spr", self.t_spr.0, Seconds::SYMBOL),
            ("tau_over_t_spr_air", self.tau_over_t_spr_air, ""),
            ("tau_over_t_spr_radiation", self.tau_over_t_spr_radiation, ""),
            ("epsilon", self.epsilon, ""),
            ("epsilon_radiation", self.epsilon_radiation, ""),
            ("n_return", self.n_return as f64, ""),
            ("t_return", self.t_return.0, Seconds::SYMBOL),
            ("da_cycle", self.da_cycle.0, Meters::SYMBOL),
            ("spreading_increment", self.spreading_increment.0, Meters::SYMBOL),
        ]
    }

    /// Aligned plain-text table.
    pub fn to_table(&self) -> String {
        let rows = self.rows();
        let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
        let mut out = String::new();
        for (name, value, unit) in rows {
            out.push_str(&format!("{name:<width$}  {value:>12.4e}  {unit}\n"));
        }
        out
    }
}

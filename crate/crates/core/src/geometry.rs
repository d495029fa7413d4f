//! Detector equivalence classes, distances between them, and the
//! translation–scaling orbit of a state with its (τ, s) coordinates.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Spectral;
use crate::statespace::{
    fs_distance_unchecked, make_packet, moments, Grid, GridState, PacketParams, PhysicalConstants,
    LEAKAGE_BOUND, MIN_WIDTH_SPACINGS,
};

/// Relative slack on the δ_z ≤ σ membership test, absorbing discretization
/// noise for a representative whose spread is exactly σ.
pub const SPREAD_SLACK: f64 = 1e-6;

/// The class {φ : μ_z(φ) = c, δ_z(φ) ≤ σ}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    pub center: f64,
    pub resolution: f64,
}

impl ClassSpec {
    pub fn new(center: f64, resolution: f64) -> Result<Self> {
        if !(resolution.is_finite() && resolution > 0.0) {
            return Err(Error::param("resolution", format!("must be positive, got {resolution}")));
        }
        if !center.is_finite() {
            return Err(Error::param("center", "must be finite"));
        }
        Ok(Self { center, resolution })
    }

    /// Detection bin half-width used when none is given: σ/2.
    pub fn default_mu_tol(&self) -> f64 {
        0.5 * self.resolution
    }

    /// Membership test from precomputed moments.
    pub fn contains(&self, mu: f64, delta: f64, mu_tol: f64) -> bool {
        (mu - self.center).abs() <= mu_tol && delta <= self.resolution * (1.0 + SPREAD_SLACK)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FoliationPoint {
    pub tau: f64,
    pub s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsometryRow {
    pub separation: f64,
    pub cos2_numeric: f64,
    pub cos2_closed_form: f64,
    pub abs_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IsometryReport {
    pub max_abs_error: f64,
    pub samples: usize,
    /// fs_distance / (Δa/2σ) at Δa = σ/100.
    pub local_metric_ratio: f64,
    pub rows: Vec<IsometryRow>,
}

impl IsometryReport {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "separation,cos2_numeric,cos2_closed_form,abs_error")?;
        for r in &self.rows {
            writeln!(
                w,
                "{},{},{},{}",
                r.separation, r.cos2_numeric, r.cos2_closed_form, r.abs_error
            )?;
        }
        Ok(())
    }
}

pub fn class_membership(state: &GridState, spec: ClassSpec, mu_tol: f64) -> Result<bool> {
    state.check_normalized()?;
    let (mu, delta) = moments(state);
    Ok(spec.contains(mu, delta, mu_tol))
}

/// Diagnostic only, not a metric: `max(0, |μ_z − c| − mu_tol) / σ`.
pub fn surrogate_distance(state: &GridState, spec: ClassSpec, mu_tol: f64) -> Result<f64> {
    state.check_normalized()?;
    let (mu, _) = moments(state);
    Ok(((mu - spec.center).abs() - mu_tol).max(0.0) / spec.resolution)
}

/// `arccos(exp(−(c−d)²/8σ²))`.
pub fn class_distance(spec1: ClassSpec, spec2: ClassSpec) -> Result<f64> {
    if spec1.resolution != spec2.resolution {
        return Err(Error::MixedResolutions(spec1.resolution, spec2.resolution));
    }
    let d = spec1.center - spec2.center;
    let s = spec1.resolution;
    Ok((-(d * d) / (8.0 * s * s)).exp().acos())
}

/// cos²ρ between two equal-width packets:
/// `exp(−(a−b)²/4σ² − (p−q)²σ²/ħ²)`.
pub fn phase_space_overlap(p1: PacketParams, p2: PacketParams, consts: PhysicalConstants) -> Result<f64> {
    if p1.width != p2.width {
        return Err(Error::MixedWidths(p1.width, p2.width));
    }
    let s = p1.width;
    let da = p1.center - p2.center;
    let dp = p1.momentum - p2.momentum;
    Ok((-(da * da) / (4.0 * s * s) - dp * dp * s * s / (consts.hbar * consts.hbar)).exp())
}

/// `φ_{τ,λ}(z) = √λ φ(λ(z − μ_z − τ) + μ_z)`, resampled onto the same grid
/// with a natural cubic spline and renormalized.
pub fn scale_translate(state: &GridState, tau: f64, lambda: f64) -> Result<GridState> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::param("lambda", format!("must be positive, got {lambda}")));
    }
    if !tau.is_finite() {
        return Err(Error::param("tau", "must be finite"));
    }
    state.check_normalized()?;
    let grid = *state.grid();
    let (mu, delta) = moments(state);
    let min = MIN_WIDTH_SPACINGS * grid.dx();
    if delta / lambda < min {
        return Err(Error::ScaledBelowResolution {
            spread: delta / lambda,
            min,
        });
    }
    let re: Vec<f64> = state.amplitudes().iter().map(|a| a.re).collect();
    let im: Vec<f64> = state.amplitudes().iter().map(|a| a.im).collect();
    let spline_re = NaturalSpline::new(grid, &re);
    let spline_im = NaturalSpline::new(grid, &im);
    let amps = grid
        .points()
        .map(|z| {
            let x = lambda * (z - mu - tau) + mu;
            Complex64::new(spline_re.eval(x), spline_im.eval(x))
        })
        .collect();
    let out = GridState::from_parts(grid, amps).normalized()?;
    let leakage = out.leakage();
    if leakage >= LEAKAGE_BOUND {
        return Err(Error::TranslatedOffGrid { leakage });
    }
    Ok(out)
}

pub fn foliation_coords(state: &GridState) -> Result<FoliationPoint> {
    state.check_normalized()?;
    let (mu, delta) = moments(state);
    check_spread(delta, state.grid())?;
    Ok(FoliationPoint {
        tau: mu,
        s: delta.ln(),
    })
}

fn check_spread(delta: f64, grid: &Grid) -> Result<()> {
    if delta < 2.0 * grid.dx() {
        Err(Error::DegenerateSpread { spread: delta })
    } else {
        Ok(())
    }
}

/// Finite-difference step used for the orbit tangents.
pub const TANGENT_STEP: f64 = 1e-4;

/// Normalized |⟨∂_τφ, ∂_sφ⟩| of horizontally projected orbit tangents,
/// obtained by central differences along the translation–scaling orbit.
/// Off-grid samples come from the trigonometric interpolant.
pub fn tangent_orthogonality(state: &GridState) -> Result<f64> {
    state.check_normalized()?;
    let grid = *state.grid();
    let (mu, delta) = moments(state);
    check_spread(delta, &grid)?;
    let spectral = Spectral::new(&grid);
    let h = TANGENT_STEP;
    let orbit = |tau: f64, lambda: f64| -> Vec<Complex64> {
        let xs: Vec<f64> = grid.points().map(|z| lambda * (z - mu - tau) + mu).collect();
        let scale = lambda.sqrt();
        spectral
            .evaluate(&grid, state.amplitudes(), &xs)
            .into_iter()
            .map(|a| a * scale)
            .collect()
    };
    let diff = |plus: Vec<Complex64>, minus: Vec<Complex64>| -> Vec<Complex64> {
        plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect()
    };
    let t_tau = diff(orbit(h, 1.0), orbit(-h, 1.0));
    let t_s = diff(orbit(0.0, h.exp()), orbit(0.0, (-h).exp()));

    let dx = grid.dx();
    let inner = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum::<Complex64>() * dx
    };
    let phi = state.amplitudes();
    let horizontal = |t: Vec<Complex64>| -> Vec<Complex64> {
        let c = inner(phi, &t);
        t.iter().zip(phi).map(|(v, p)| v - c * p).collect()
    };
    let a = horizontal(t_tau);
    let b = horizontal(t_s);
    let na = inner(&a, &a).re.sqrt();
    let nb = inner(&b, &b).re.sqrt();
    Ok(inner(&a, &b).norm() / (na * nb))
}

/// Compares grid quadrature of cos²ρ between two Gaussians of width `sigma`
/// against the closed form at `n_samples` separations in (0, max_sep].
pub fn isometry_check(grid: Grid, sigma: f64, n_samples: usize, max_sep: f64) -> Result<IsometryReport> {
    if n_samples == 0 {
        return Err(Error::param("n_samples", "must be positive"));
    }
    if !(max_sep.is_finite() && max_sep > 0.0) {
        return Err(Error::param("max_sep", "must be positive"));
    }
    let consts = PhysicalConstants::natural();
    let mid = grid.midpoint();
    let pair = |sep: f64| -> Result<f64> {
        let a = make_packet(PacketParams::new(mid - 0.5 * sep, sigma), grid, consts)?;
        let b = make_packet(PacketParams::new(mid + 0.5 * sep, sigma), grid, consts)?;
        Ok(fs_distance_unchecked(&a, &b))
    };
    let mut rows = Vec::with_capacity(n_samples);
    for i in 1..=n_samples {
        let separation = max_sep * i as f64 / n_samples as f64;
        let cos2_numeric = pair(separation)?.cos().powi(2);
        let cos2_closed_form = (-(separation * separation) / (4.0 * sigma * sigma)).exp();
        rows.push(IsometryRow {
            separation,
            cos2_numeric,
            cos2_closed_form,
            abs_error: (cos2_numeric - cos2_closed_form).abs(),
        });
    }
    let da = sigma / 100.0;
    let local_metric_ratio = pair(da)? / (da / (2.0 * sigma));
    Ok(IsometryReport {
        max_abs_error: rows.iter().map(|r| r.abs_error).fold(0.0, f64::max),
        samples: n_samples,
        local_metric_ratio,
        rows,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OverlapLatticeReport {
    pub max_abs_error: f64,
    pub points: usize,
}

/// Quadrature |⟨φ,ψ⟩|² against [`phase_space_overlap`] on an `n × n`
/// lattice of (Δa, Δp) in `[0, max_da] × [0, max_dp]`.
pub fn overlap_lattice(
    grid: Grid,
    sigma: f64,
    consts: PhysicalConstants,
    n: usize,
    max_da: f64,
    max_dp: f64,
) -> Result<OverlapLatticeReport> {
    let mid = grid.midpoint();
    let step = |i: usize, max: f64| if n > 1 { max * i as f64 / (n - 1) as f64 } else { 0.0 };
    let mut max_abs_error: f64 = 0.0;
    for i in 0..n {
        let da = step(i, max_da);
        for j in 0..n {
            let dp = step(j, max_dp);
            let p1 = PacketParams::new(mid - 0.5 * da, sigma).with_momentum(-0.5 * dp);
            let p2 = PacketParams::new(mid + 0.5 * da, sigma).with_momentum(0.5 * dp);
            let a = make_packet(p1, grid, consts)?;
            let b = make_packet(p2, grid, consts)?;
            let numeric = a.inner_unchecked(&b).norm_sqr();
            let closed = phase_space_overlap(p1, p2, consts)?;
            max_abs_error = max_abs_error.max((numeric - closed).abs());
        }
    }
    Ok(OverlapLatticeReport {
        max_abs_error,
        points: n * n,
    })
}

/// Natural cubic spline through grid samples; zero outside the grid.
struct NaturalSpline {
    grid: Grid,
    y: Vec<f64>,
    m: Vec<f64>,
}

impl NaturalSpline {
    fn new(grid: Grid, y: &[f64]) -> Self {
        let n = y.len();
        let h = grid.dx();
        // tridiagonal system for second derivatives, m_0 = m_{n-1} = 0
        let mut m = vec![0.0; n];
        let inner = n - 2;
        let mut c_prime = vec![0.0; inner];
        let mut d_prime = vec![0.0; inner];
        for i in 0..inner {
            let rhs = 6.0 * (y[i + 2] - 2.0 * y[i + 1] + y[i]) / (h * h);
            let (a, b, c) = (1.0, 4.0, 1.0);
            if i == 0 {
                c_prime[i] = c / b;
                d_prime[i] = rhs / b;
            } else {
                let denom = b - a * c_prime[i - 1];
                c_prime[i] = c / denom;
                d_prime[i] = (rhs - a * d_prime[i - 1]) / denom;
            }
        }
        for i in (0..inner).rev() {
            let next = if i + 1 < inner { m[i + 2] } else { 0.0 };
            m[i + 1] = d_prime[i] - c_prime[i] * next;
        }
        Self {
            grid,
            y: y.to_vec(),
            m,
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let h = self.grid.dx();
        let u = (x - self.grid.origin()) / h;
        let n = self.y.len();
        if u < 0.0 || u > (n - 1) as f64 {
            return 0.0;
        }
        let i = (u.floor() as usize).min(n - 2);
        let t = u - i as f64;
        let s = 1.0 - t;
        let (y0, y1, m0, m1) = (self.y[i], self.y[i + 1], self.m[i], self.m[i + 1]);
        s * y0 + t * y1 + h * h / 6.0 * ((s * s * s - s) * m0 + (t * t * t - t) * m1)
    }
}

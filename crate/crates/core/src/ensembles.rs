//! GUE sampling and single random-Hamiltonian kicks `exp(−iHdt/ħ)`.
//!
//! Convention: off-diagonal entries are complex Gaussian with
//! `E|H_jk|² = scale²`, diagonal entries are real `N(0, scale²)`. The
//! semicircle radius is then `2√N·scale`.
//!
//! Three interchangeable kick paths are provided:
//!
//! * [`KickMethod::Eigen`]: materialize `H`, diagonalize, exponentiate.
//! * [`KickMethod::Series`]: materialize `H`, apply the exponential to the
//!   state vector by a Taylor series.
//! * [`KickMethod::Krylov`]: draw the Krylov-space representation of `H`
//!   seeded at the state directly. By unitary invariance, the tridiagonal
//!   Lanczos matrix of a GUE matrix has independent entries
//!   `α_k ~ N(0, scale²)`, `β_k = scale·√Gamma(N−k, 1)`, and its Lanczos
//!   frame is Haar-distributed among orthonormal frames starting at the
//!   state. Drawing those gives the same output law as the other two paths
//!   at O(N) cost per kick instead of O(N³).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statespace::GridState;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const SERIES_TOL: f64 = 1e-18;

#[derive(Clone, Debug, PartialEq)]
pub struct GueSample {
    scale: f64,
    matrix: DMatrix<Complex64>,
}

impl GueSample {
    pub fn dimension(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// max |H − H†|.
    pub fn hermiticity_error(&self) -> f64 {
        let m = &self.matrix;
        (m - m.adjoint()).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Sorted eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut ev: Vec<f64> = self.matrix.clone().symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(f64::total_cmp);
        ev
    }
}

/// Fresh GUE draw. Entries are consumed row by row over the upper triangle.
pub fn sample_gue<R: Rng + ?Sized>(n: usize, scale: f64, rng: &mut R) -> Result<GueSample> {
    if n < 2 {
        return Err(Error::param("dimension", format!("need N >= 2, got {n}")));
    }
    if !(scale.is_finite() && scale >= 0.0) {
        return Err(Error::param("scale", format!("must be non-negative, got {scale}")));
    }
    let off = scale * std::f64::consts::FRAC_1_SQRT_2;
    let mut m = DMatrix::from_element(n, n, ZERO);
    for j in 0..n {
        let d: f64 = rng.sample(StandardNormal);
        m[(j, j)] = Complex64::new(scale * d, 0.0);
        for k in j + 1..n {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let z = Complex64::new(off * re, off * im);
            m[(j, k)] = z;
            m[(k, j)] = z.conj();
        }
    }
    Ok(GueSample { scale, matrix: m })
}

/// CDF of the semicircle law on `[−radius, radius]`.
pub fn semicircle_cdf(x: f64, radius: f64) -> f64 {
    if x <= -radius {
        0.0
    } else if x >= radius {
        1.0
    } else {
        let u = x / radius;
        0.5 + (u * (1.0 - u * u).sqrt() + u.asin()) / std::f64::consts::PI
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KickMethod {
    #[default]
    Eigen,
    Series,
    Krylov,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KickConfig {
    pub dt: f64,
    pub scale: f64,
    pub dimension: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "one")]
    pub hbar: f64,
    #[serde(default)]
    pub method: KickMethod,
}

fn one() -> f64 {
    1.0
}

impl KickConfig {
    pub fn new(dimension: usize, scale: f64, dt: f64) -> Self {
        Self {
            dt,
            scale,
            dimension,
            seed: 0,
            hbar: 1.0,
            method: KickMethod::Eigen,
        }
    }

    pub fn with_method(mut self, method: KickMethod) -> Self {
        self.method = method;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Dimensionless kick strength `scale·dt/ħ`.
    pub fn theta(&self) -> f64 {
        self.scale * self.dt / self.hbar
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt >= 0.0) {
            return Err(Error::param("dt", format!("must be non-negative, got {}", self.dt)));
        }
        if !(self.scale.is_finite() && self.scale >= 0.0) {
            return Err(Error::param("scale", format!("must be non-negative, got {}", self.scale)));
        }
        if !(self.hbar.is_finite() && self.hbar > 0.0) {
            return Err(Error::param("hbar", "must be positive"));
        }
        if self.dimension < 2 {
            return Err(Error::param("dimension", "need N >= 2"));
        }
        Ok(())
    }
}

/// One random-Hamiltonian kick of `state`.
pub fn rm_kick<R: Rng + ?Sized>(state: &GridState, cfg: &KickConfig, rng: &mut R) -> Result<GridState> {
    if cfg.dimension != state.len() {
        return Err(Error::DimensionMismatch {
            kick: cfg.dimension,
            state: state.len(),
        });
    }
    cfg.validate()?;
    state.check_normalized()?;
    Ok(kick_unchecked(state, cfg, rng))
}

pub(crate) fn kick_unchecked<R: Rng + ?Sized>(state: &GridState, cfg: &KickConfig, rng: &mut R) -> GridState {
    let theta = cfg.theta();
    if theta == 0.0 {
        return state.clone();
    }
    let psi = state.amplitudes();
    let out = match cfg.method {
        KickMethod::Eigen => {
            let h = sample_gue(cfg.dimension, 1.0, rng).expect("validated dimension");
            KickOperator::from_sample(&h).apply_slice(psi, theta)
        }
        KickMethod::Series => {
            let h = sample_gue(cfg.dimension, 1.0, rng).expect("validated dimension");
            series_apply(h.matrix(), psi, theta)
        }
        KickMethod::Krylov => krylov_kick(psi, theta, rng),
    };
    GridState::from_parts(*state.grid(), out)
}

/// Diagonalized Hamiltonian that can be exponentiated repeatedly.
#[derive(Clone, Debug)]
pub struct KickOperator {
    eigenvalues: Vec<f64>,
    eigenvectors: DMatrix<Complex64>,
}

impl KickOperator {
    pub fn from_sample(sample: &GueSample) -> Self {
        let eig = sample.matrix.clone().symmetric_eigen();
        Self {
            eigenvalues: eig.eigenvalues.iter().copied().collect(),
            eigenvectors: eig.eigenvectors,
        }
    }

    pub fn dimension(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `exp(−iθH)` as a dense matrix.
    pub fn unitary(&self, theta: f64) -> DMatrix<Complex64> {
        let v = &self.eigenvectors;
        let phases = DVector::from_iterator(
            self.eigenvalues.len(),
            self.eigenvalues.iter().map(|&l| Complex64::from_polar(1.0, -theta * l)),
        );
        let mut vd = v.clone();
        for (j, mut col) in vd.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        vd * v.adjoint()
    }

    pub fn apply(&self, state: &GridState, theta: f64) -> Result<GridState> {
        if state.len() != self.dimension() {
            return Err(Error::DimensionMismatch {
                kick: self.dimension(),
                state: state.len(),
            });
        }
        Ok(GridState::from_parts(
            *state.grid(),
            self.apply_slice(state.amplitudes(), theta),
        ))
    }

    fn apply_slice(&self, psi: &[Complex64], theta: f64) -> Vec<Complex64> {
        let v = &self.eigenvectors;
        let x = DVector::from_column_slice(psi);
        let mut c = v.ad_mul(&x);
        for (cj, &l) in c.iter_mut().zip(&self.eigenvalues) {
            *cj *= Complex64::from_polar(1.0, -theta * l);
        }
        (v * c).iter().copied().collect()
    }
}

/// Taylor action of `exp(−iθH)` on a vector, split into substeps so that
/// each substep has `θ‖H‖ ≤ 1`.
fn series_apply(h: &DMatrix<Complex64>, psi: &[Complex64], theta: f64) -> Vec<Complex64> {
    let bound = h
        .row_iter()
        .map(|r| r.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let steps = (theta * bound).ceil().max(1.0) as usize;
    let dtheta = theta / steps as f64;
    let mut x = DVector::from_column_slice(psi);
    let scale = x.norm();
    let factor = Complex64::new(0.0, -dtheta);
    for _ in 0..steps {
        let mut term = x.clone();
        let mut sum = x.clone();
        for k in 1.. {
            term = (h * &term) * (factor / k as f64);
            sum += &term;
            if term.norm() < SERIES_TOL * scale {
                break;
            }
        }
        x = sum;
    }
    x.iter().copied().collect()
}

/// Random tridiagonal representation of a unit-scale GUE matrix in its
/// Lanczos basis. `alpha` has N entries, `beta` has N−1.
#[derive(Clone, Debug)]
pub(crate) struct Tridiagonal {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Tridiagonal {
    pub fn sample<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let alpha = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let beta = (1..n)
            .map(|k| {
                let g = Gamma::new((n - k) as f64, 1.0).expect("positive shape");
                g.sample(rng).sqrt()
            })
            .collect();
        Self { alpha, beta }
    }

    fn row_bound(&self) -> f64 {
        let n = self.alpha.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.beta[i - 1] } else { 0.0 };
                let right = if i + 1 < n { self.beta[i] } else { 0.0 };
                self.alpha[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    /// `exp(−iθT) e₀` by substepped Taylor series.
    pub fn exp_first_column(&self, theta: f64) -> Vec<Complex64> {
        let n = self.alpha.len();
        let steps = (theta * self.row_bound()).ceil().max(1.0) as usize;
        let factor = Complex64::new(0.0, -theta / steps as f64);
        let mut x = vec![ZERO; n];
        x[0] = Complex64::new(1.0, 0.0);
        let mut support = 1;
        let mut term = vec![ZERO; n];
        let mut next = vec![ZERO; n];
        for _ in 0..steps {
            term[..support].copy_from_slice(&x[..support]);
            let mut sum = x.clone();
            for k in 1.. {
                let width = (support + 1).min(n);
                for i in 0..width {
                    let mut acc = self.alpha[i] * term[i];
                    if i > 0 {
                        acc += self.beta[i - 1] * term[i - 1];
                    }
                    if i + 1 < support {
                        acc += self.beta[i] * term[i + 1];
                    }
                    next[i] = acc * (factor / k as f64);
                }
                support = width;
                std::mem::swap(&mut term, &mut next);
                let mut mag = 0.0;
                for i in 0..support {
                    sum[i] += term[i];
                    mag += term[i].norm_sqr();
                }
                if mag.sqrt() < SERIES_TOL {
                    break;
                }
            }
            x = sum;
            term.iter_mut().for_each(|t| *t = ZERO);
        }
        let last = x.iter().rposition(|c| c.norm() > SERIES_TOL).unwrap_or(0);
        x.truncate(last + 1);
        x
    }
}

fn krylov_kick<R: Rng + ?Sized>(psi: &[Complex64], theta: f64, rng: &mut R) -> Vec<Complex64> {
    let n = psi.len();
    let t = Tridiagonal::sample(n, rng);
    let coeffs = t.exp_first_column(theta);
    let norm = psi.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let mut frame: Vec<Vec<Complex64>> = Vec::with_capacity(coeffs.len());
    frame.push(psi.iter().map(|a| a / norm).collect());
    while frame.len() < coeffs.len() {
        frame.push(haar_complement_vector(&frame, n, rng));
    }
    let mut out = vec![ZERO; n];
    for (c, q) in coeffs.iter().zip(&frame) {
        let c = c * norm;
        for (o, qi) in out.iter_mut().zip(q) {
            *o += c * qi;
        }
    }
    out
}

/// A unit vector drawn uniformly from the orthogonal complement of `frame`
/// (Gram–Schmidt of a complex Gaussian vector, applied twice).
fn haar_complement_vector<R: Rng + ?Sized>(frame: &[Vec<Complex64>], n: usize, rng: &mut R) -> Vec<Complex64> {
    let mut v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    for _ in 0..2 {
        for q in frame {
            let c: Complex64 = q.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, qi) in v.iter_mut().zip(q) {
                *vi -= c * qi;
            }
        }
    }
    let nv = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|a| *a /= nv);
    v
}

/// FS length `arccos|⟨ψ, e^{−iθH}ψ⟩|` of one kick, drawn from its exact
/// law (independent of ψ by unitary invariance).
pub fn sample_step_length<R: Rng + ?Sized>(n: usize, theta: f64, rng: &mut R) -> f64 {
    let t = Tridiagonal::sample(n, rng);
    step_length(&t, theta)
}

fn step_length(t: &Tridiagonal, theta: f64) -> f64 {
    let c = t.exp_first_column(theta);
    let perp = c[1..].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    perp.atan2(c[0].norm())
}

/// Minimum number of trial kicks used by calibration.
pub const CALIBRATION_TRIALS: usize = 2000;

/// Kick strength θ = scale·dt/ħ whose mean FS step length equals
/// `target_eps`. Bisection on common random numbers.
pub fn calibrate_theta<R: Rng + ?Sized>(n: usize, target_eps: f64, trials: usize, rng: &mut R) -> Result<f64> {
    if !(target_eps > 0.0 && target_eps < 0.5) {
        return Err(Error::param("target_eps", format!("must lie in (0, 0.5), got {target_eps}")));
    }
    if n < 2 {
        return Err(Error::param("dimension", "need N >= 2"));
    }
    let trials = trials.max(1000);
    let samples: Vec<Tridiagonal> = (0..trials).map(|_| Tridiagonal::sample(n, rng)).collect();
    let mean = |theta: f64| samples.iter().map(|t| step_length(t, theta)).sum::<f64>() / trials as f64;

    // small-step estimate ρ ≈ θ·√(N−1) seeds the bracket
    let mut hi = 2.0 * target_eps / ((n - 1) as f64).sqrt();
    let mut lo = 0.0;
    let mut doublings = 0;
    while mean(hi) < target_eps {
        lo = hi;
        hi *= 2.0;
        doublings += 1;
        if doublings > 60 {
            return Err(Error::CalibrationDiverged(format!(
                "mean step never reached {target_eps}"
            )));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mean(mid) < target_eps {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// GUE scale giving mean kick length `target_eps` at time step `dt`,
/// in units with ħ = 1.
pub fn calibrate_step<R: Rng + ?Sized>(n: usize, target_eps: f64, dt: f64, rng: &mut R) -> Result<f64> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::param("dt", format!("must be positive, got {dt}")));
    }
    Ok(calibrate_theta(n, target_eps, CALIBRATION_TRIALS, rng)? / dt)
}

//! Discretized single-particle Hilbert space on a uniform 1D grid.
//!
//! The inner product is the rectangle rule `Σ conj(φ_k) ψ_k dx`. Observables
//! treat the grid as a truncated interval (no wraparound); the edge-leakage
//! check guards operations that would be spoiled by mass near the ends.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::Spectral;

pub const MIN_POINTS: usize = 64;
/// Fraction of the grid, at each end, that counts as the edge band.
pub const EDGE_FRACTION: f64 = 0.05;
pub const LEAKAGE_BOUND: f64 = 1e-8;
pub const NORM_TOLERANCE: f64 = 1e-6;
/// Minimum packet width in grid spacings.
pub const MIN_WIDTH_SPACINGS: f64 = 4.0;
/// Minimum distance, in packet widths, from a packet center to either edge.
pub const EDGE_MARGIN_WIDTHS: f64 = 8.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n_points: usize,
    length: f64,
    origin: f64,
}

impl Grid {
    /// Points are `origin + k·dx` for `k = 0..n_points`, with `dx = length / n_points`.
    pub fn new(n_points: usize, length: f64, origin: f64) -> Result<Self> {
        if n_points < MIN_POINTS {
            return Err(Error::InvalidGrid(format!(
                "n_points = {n_points}, need at least {MIN_POINTS}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::InvalidGrid(format!("length = {length}")));
        }
        if !origin.is_finite() {
            return Err(Error::InvalidGrid(format!("origin = {origin}")));
        }
        Ok(Self {
            n_points,
            length,
            origin,
        })
    }

    /// Grid covering `[-length/2, length/2)`.
    pub fn centered(n_points: usize, length: f64) -> Result<Self> {
        Self::new(n_points, length, -0.5 * length)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn origin(&self) -> f64 {
        self.origin
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_points as f64
    }

    pub fn z(&self, k: usize) -> f64 {
        self.origin + k as f64 * self.dx()
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |k| self.z(k))
    }

    /// Left and right ends of the represented interval.
    pub fn bounds(&self) -> (f64, f64) {
        (self.origin, self.origin + self.length)
    }

    pub fn midpoint(&self) -> f64 {
        self.origin + 0.5 * (self.n_points - 1) as f64 * self.dx()
    }

    /// Number of points in each edge band.
    pub fn edge_band(&self) -> usize {
        (EDGE_FRACTION * self.n_points as f64).ceil() as usize
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub hbar: f64,
    pub mass: f64,
}

impl PhysicalConstants {
    pub fn new(hbar: f64, mass: f64) -> Result<Self> {
        if !(hbar.is_finite() && hbar > 0.0) {
            return Err(Error::param("hbar", format!("must be positive, got {hbar}")));
        }
        if !(mass.is_finite() && mass > 0.0) {
            return Err(Error::param("mass", format!("must be positive, got {mass}")));
        }
        Ok(Self { hbar, mass })
    }

    /// ħ = m = 1.
    pub const fn natural() -> Self {
        Self {
            hbar: 1.0,
            mass: 1.0,
        }
    }
}

impl Default for PhysicalConstants {
    fn default() -> Self {
        Self::natural()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PacketParams {
    pub center: f64,
    pub width: f64,
    #[serde(default)]
    pub momentum: f64,
}

impl PacketParams {
    pub const fn new(center: f64, width: f64) -> Self {
        Self {
            center,
            width,
            momentum: 0.0,
        }
    }

    pub const fn with_momentum(mut self, momentum: f64) -> Self {
        self.momentum = momentum;
        self
    }

    /// Continuum amplitude g_{a,σ}(z) e^{ipz/ħ}.
    pub fn amplitude(&self, z: f64, hbar: f64) -> Complex64 {
        let s2 = self.width * self.width;
        let envelope = (2.0 * PI * s2).powf(-0.25) * (-(z - self.center).powi(2) / (4.0 * s2)).exp();
        Complex64::from_polar(envelope, self.momentum * z / hbar)
    }
}

/// Complex amplitudes on a grid. Immutable once built; operations return
/// new states.
#[derive(Clone, Debug, PartialEq)]
pub struct GridState {
    grid: Grid,
    amplitudes: Vec<Complex64>,
}

impl GridState {
    pub fn new(grid: Grid, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                got: amplitudes.len(),
            });
        }
        if amplitudes.iter().any(|a| !a.is_finite()) {
            return Err(Error::param("amplitudes", "non-finite entry"));
        }
        Ok(Self { grid, amplitudes })
    }

    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Self {
        let amplitudes = grid.points().map(f).collect();
        Self { grid, amplitudes }
    }

    /// Normalized indicator of grid point `k`.
    pub fn basis(grid: Grid, k: usize) -> Result<Self> {
        if k >= grid.n_points() {
            return Err(Error::param("k", format!("index {k} outside grid")));
        }
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); grid.n_points()];
        amplitudes[k] = Complex64::new(grid.dx().sqrt().recip(), 0.0);
        Ok(Self { grid, amplitudes })
    }

    pub(crate) fn from_parts(grid: Grid, amplitudes: Vec<Complex64>) -> Self {
        debug_assert_eq!(grid.n_points(), amplitudes.len());
        Self { grid, amplitudes }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> Vec<Complex64> {
        self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.grid.dx()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let norm = self.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::NotNormalized { norm });
        }
        let inv = norm.recip();
        for a in &mut self.amplitudes {
            *a *= inv;
        }
        Ok(self)
    }

    pub fn inner(&self, other: &GridState) -> Result<Complex64> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        Ok(self.inner_unchecked(other))
    }

    pub(crate) fn inner_unchecked(&self, other: &GridState) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            * self.grid.dx()
    }

    pub fn density(&self) -> impl Iterator<Item = f64> + '_ {
        self.amplitudes.iter().map(|a| a.norm_sqr())
    }

    /// Probability mass in the outer edge bands.
    pub fn leakage(&self) -> f64 {
        let band = self.grid.edge_band();
        let n = self.amplitudes.len();
        let edge: f64 = self.amplitudes[..band]
            .iter()
            .chain(&self.amplitudes[n - band..])
            .map(|a| a.norm_sqr())
            .sum();
        edge * self.grid.dx()
    }

    pub fn check_leakage(&self) -> Result<()> {
        let leakage = self.leakage();
        if leakage < LEAKAGE_BOUND {
            Ok(())
        } else {
            Err(Error::LeakageDetected {
                leakage,
                bound: LEAKAGE_BOUND,
            })
        }
    }

    pub fn check_normalized(&self) -> Result<()> {
        let norm = self.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            Err(Error::NotNormalized { norm })
        } else {
            Ok(())
        }
    }

    pub fn with_global_phase(&self, alpha: f64) -> Self {
        let w = Complex64::from_polar(1.0, alpha);
        self.map(|_, a| a * w)
    }

    /// Multiplies by e^{ipz/ħ}.
    pub fn boosted(&self, momentum: f64, hbar: f64) -> Self {
        self.map(|z, a| a * Complex64::from_polar(1.0, momentum * z / hbar))
    }

    fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let amplitudes = self
            .grid
            .points()
            .zip(&self.amplitudes)
            .map(|(z, &a)| f(z, a))
            .collect();
        Self {
            grid: self.grid,
            amplitudes,
        }
    }

    /// Normalized linear combination `Σ c_i state_i`.
    pub fn superpose(terms: &[(Complex64, &GridState)]) -> Result<Self> {
        let (_, first) = terms
            .first()
            .ok_or_else(|| Error::param("terms", "empty superposition"))?;
        let grid = first.grid;
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); grid.n_points()];
        for (c, state) in terms {
            if state.grid != grid {
                return Err(Error::GridMismatch);
            }
            for (acc, a) in amplitudes.iter_mut().zip(&state.amplitudes) {
                *acc += c * a;
            }
        }
        Self { grid, amplitudes }.normalized()
    }

    /// Writes `index,z,re,im` rows under a `#`-prefixed metadata line.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "# n_points={} length={} origin={}",
            self.grid.n_points, self.grid.length, self.grid.origin
        )?;
        writeln!(w, "index,z,re,im")?;
        for (k, a) in self.amplitudes.iter().enumerate() {
            writeln!(w, "{},{},{},{}", k, self.grid.z(k), a.re, a.im)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut lines = r.lines();
        let mut next = || -> Result<String> {
            lines
                .next()
                .ok_or_else(|| Error::Parse("unexpected end of file".into()))?
                .map_err(|e| Error::Parse(e.to_string()))
        };
        let meta = next()?;
        let meta = meta
            .strip_prefix('#')
            .ok_or_else(|| Error::Parse("missing grid metadata line".into()))?;
        let (mut n, mut length, mut origin) = (None, None, None);
        for field in meta.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("bad metadata field `{field}`")))?;
            let bad = || Error::Parse(format!("bad value for `{key}`"));
            match key {
                "n_points" => n = Some(value.parse::<usize>().map_err(|_| bad())?),
                "length" => length = Some(value.parse::<f64>().map_err(|_| bad())?),
                "origin" => origin = Some(value.parse::<f64>().map_err(|_| bad())?),
                _ => return Err(Error::Parse(format!("unknown metadata key `{key}`"))),
            }
        }
        let missing = |k: &str| Error::Parse(format!("metadata lacks `{k}`"));
        let grid = Grid::new(
            n.ok_or_else(|| missing("n_points"))?,
            length.ok_or_else(|| missing("length"))?,
            origin.ok_or_else(|| missing("origin"))?,
        )?;
        if next()?.trim() != "index,z,re,im" {
            return Err(Error::Parse("expected header `index,z,re,im`".into()));
        }
        let mut amplitudes = Vec::with_capacity(grid.n_points());
        for (row, line) in lines.enumerate() {
            let line = line.map_err(|e| Error::Parse(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(Error::Parse(format!("row {row}: expected 4 columns")));
            }
            let idx: usize = cols[0]
                .parse()
                .map_err(|_| Error::Parse(format!("row {row}: bad index")))?;
            if idx != amplitudes.len() {
                return Err(Error::Parse(format!("row {row}: index {idx} out of order")));
            }
            let re: f64 = cols[2]
                .parse()
                .map_err(|_| Error::Parse(format!("row {row}: bad re")))?;
            let im: f64 = cols[3]
                .parse()
                .map_err(|_| Error::Parse(format!("row {row}: bad im")))?;
            amplitudes.push(Complex64::new(re, im));
        }
        GridState::new(grid, amplitudes)
    }
}

/// Realizes a Gaussian packet with the default edge margin of 8 widths.
pub fn make_packet(params: PacketParams, grid: Grid, consts: PhysicalConstants) -> Result<GridState> {
    make_packet_with_margin(params, grid, consts, EDGE_MARGIN_WIDTHS)
}

/// As [`make_packet`] with a caller-chosen edge margin (in widths).
pub fn make_packet_with_margin(
    params: PacketParams,
    grid: Grid,
    consts: PhysicalConstants,
    margin: f64,
) -> Result<GridState> {
    let PacketParams { center, width, .. } = params;
    if !(width.is_finite() && width > 0.0) {
        return Err(Error::param("width", format!("must be positive, got {width}")));
    }
    if !center.is_finite() || !params.momentum.is_finite() {
        return Err(Error::param("center", "non-finite packet parameter"));
    }
    let dx = grid.dx();
    if width < MIN_WIDTH_SPACINGS * dx {
        return Err(Error::WidthUnresolvable { sigma: width, dx });
    }
    let (lo, hi) = grid.bounds();
    if center - lo < margin * width || hi - center < margin * width {
        return Err(Error::PacketTouchesBoundary {
            center,
            sigma: width,
            margin,
        });
    }
    GridState::from_fn(grid, |z| params.amplitude(z, consts.hbar)).normalized()
}

/// Position expectation Σ z_k |φ_k|² dx.
pub fn mu_z(state: &GridState) -> Result<f64> {
    state.check_normalized()?;
    Ok(moments(state).0)
}

/// Position standard deviation.
pub fn delta_z(state: &GridState) -> Result<f64> {
    state.check_normalized()?;
    Ok(moments(state).1)
}

/// (μ_z, δ_z) in one pass over a normalized state, without the norm check.
pub(crate) fn moments(state: &GridState) -> (f64, f64) {
    let grid = state.grid();
    let dx = grid.dx();
    let mid = grid.midpoint();
    // accumulate about the grid midpoint to keep the variance well conditioned
    let (mut m0, mut m1, mut m2) = (0.0, 0.0, 0.0);
    for (k, a) in state.amplitudes().iter().enumerate() {
        let p = a.norm_sqr();
        let u = grid.z(k) - mid;
        m0 += p;
        m1 += p * u;
        m2 += p * u * u;
    }
    m0 *= dx;
    m1 *= dx;
    m2 *= dx;
    let mean = m1 / m0;
    let var = (m2 / m0 - mean * mean).max(0.0);
    (mid + mean, var.sqrt())
}

/// Fubini–Study distance `arccos |⟨φ,ψ⟩|`, evaluated as
/// `atan2(‖ψ − ⟨φ,ψ⟩φ‖, |⟨φ,ψ⟩|)` so that small angles keep full precision.
/// Inputs are normalized internally.
pub fn fs_distance(phi: &GridState, psi: &GridState) -> Result<f64> {
    if phi.grid() != psi.grid() {
        return Err(Error::GridMismatch);
    }
    Ok(fs_distance_unchecked(phi, psi))
}

pub(crate) fn fs_distance_unchecked(phi: &GridState, psi: &GridState) -> f64 {
    let dx = phi.grid().dx();
    let np = phi.norm();
    let nq = psi.norm();
    let c = phi.inner_unchecked(psi) / (np * nq);
    let perp: f64 = phi
        .amplitudes()
        .iter()
        .zip(psi.amplitudes())
        .map(|(a, b)| (b / nq - c * a / np).norm_sqr())
        .sum::<f64>()
        * dx;
    perp.sqrt().atan2(c.norm())
}

/// ⟨φ| −iħ ∂_z |φ⟩ with a spectral derivative.
pub fn mean_momentum(state: &GridState, consts: PhysicalConstants) -> Result<f64> {
    state.check_normalized()?;
    let spectral = Spectral::new(state.grid());
    let d = spectral.derivative(state.amplitudes());
    let v = state
        .amplitudes()
        .iter()
        .zip(&d)
        .map(|(a, da)| a.conj() * da)
        .sum::<Complex64>()
        * state.grid().dx();
    // −iħ ⟨φ|φ'⟩
    Ok((Complex64::new(0.0, -consts.hbar) * v).re)
}

//! FFT plumbing shared by the free propagator, spectral derivatives and
//! band-limited resampling.

use std::f64::consts::TAU;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::statespace::Grid;

/// Forward/inverse FFT pair for one grid, plus its angular wavenumbers in
/// standard FFT ordering.
#[derive(Clone)]
pub struct Spectral {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    wavenumbers: Vec<f64>,
}

impl fmt::Debug for Spectral {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Spectral")
            .field("len", &self.wavenumbers.len())
            .finish()
    }
}

impl Spectral {
    pub fn new(grid: &Grid) -> Self {
        let n = grid.n_points();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let dk = TAU / grid.length();
        let wavenumbers = (0..n)
            .map(|j| {
                let signed = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                signed * dk
            })
            .collect();
        Self {
            forward,
            inverse,
            wavenumbers,
        }
    }

    pub fn len(&self) -> usize {
        self.wavenumbers.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wavenumbers.is_empty()
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.wavenumbers
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    /// Inverse transform including the 1/n normalization.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
        let scale = 1.0 / data.len() as f64;
        for x in data.iter_mut() {
            *x *= scale;
        }
    }

    /// d/dz of a periodic band-limited sequence. The Nyquist mode is zeroed
    /// so the derivative of a real signal stays real.
    pub fn derivative(&self, values: &[Complex64]) -> Vec<Complex64> {
        let n = values.len();
        let mut buf = values.to_vec();
        self.forward(&mut buf);
        for (j, (x, &k)) in buf.iter_mut().zip(&self.wavenumbers).enumerate() {
            if n % 2 == 0 && j == n / 2 {
                *x = Complex64::new(0.0, 0.0);
            } else {
                *x *= Complex64::new(0.0, k);
            }
        }
        self.inverse(&mut buf);
        buf
    }

    /// Trigonometric interpolant of `values` translated by `shift`:
    /// returns f(z_k - shift).
    pub fn shifted(&self, values: &[Complex64], shift: f64) -> Vec<Complex64> {
        let n = values.len();
        let mut buf = values.to_vec();
        self.forward(&mut buf);
        for (j, (x, &k)) in buf.iter_mut().zip(&self.wavenumbers).enumerate() {
            if n % 2 == 0 && j == n / 2 {
                *x *= Complex64::new((k * shift).cos(), 0.0);
            } else {
                *x *= Complex64::from_polar(1.0, -k * shift);
            }
        }
        self.inverse(&mut buf);
        buf
    }

    /// Evaluates the trigonometric interpolant of `values` at arbitrary
    /// positions. Direct summation, O(n) per point.
    pub fn evaluate(&self, grid: &Grid, values: &[Complex64], xs: &[f64]) -> Vec<Complex64> {
        let n = values.len();
        let mut coeffs = values.to_vec();
        self.forward(&mut coeffs);
        let inv_n = 1.0 / n as f64;
        xs.iter()
            .map(|&x| {
                let u = x - grid.origin();
                coeffs
                    .iter()
                    .zip(&self.wavenumbers)
                    .enumerate()
                    .map(|(j, (c, &k))| {
                        if n % 2 == 0 && j == n / 2 {
                            c * (k * u).cos()
                        } else {
                            c * Complex64::from_polar(1.0, k * u)
                        }
                    })
                    .sum::<Complex64>()
                    * inv_n
            })
            .collect()
    }
}

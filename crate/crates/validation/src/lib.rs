//! Shared pieces of the acceptance gate: per-criterion reporting and the
//! real-symmetric (GOE) contrast sampler used by the isotropy check.

use std::fmt::Write as _;
use std::io::Write as _;
use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rmwalk::GridState;

/// Collects the checks of one criterion and prints a single verdict line.
pub struct Criterion {
    name: &'static str,
    started: Instant,
    checks: Vec<(bool, String)>,
    notes: Vec<String>,
}

impl Criterion {
    pub fn new(name: &'static str) -> Self {
        Self {
            name,
            started: Instant::now(),
            checks: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn check(&mut self, ok: bool, detail: impl Into<String>) -> &mut Self {
        self.checks.push((ok, detail.into()));
        self
    }

    /// Diagnostic detail that does not affect the verdict.
    pub fn note(&mut self, detail: impl Into<String>) -> &mut Self {
        self.notes.push(detail.into());
        self
    }

    /// `value` within a factor `factor` of `golden`.
    pub fn within_factor(&mut self, label: &str, value: f64, golden: f64, factor: f64) -> &mut Self {
        let ok = value > golden / factor && value < golden * factor;
        self.check(ok, format!("{label} {value:.3e} vs {golden:.1e} (x{factor})"))
    }

    pub fn runtime_below(&mut self, seconds: f64) -> &mut Self {
        let t = self.started.elapsed().as_secs_f64();
        self.check(t < seconds, format!("runtime {t:.2} s (< {seconds} s)"))
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|(ok, _)| *ok)
    }

    /// Prints the verdict line straight to stderr (bypassing test capture)
    /// and returns it.
    pub fn report(&self) -> String {
        let mut line = format!("[{}] {}:", if self.passed() { "PASS" } else { "FAIL" }, self.name);
        for (ok, detail) in &self.checks {
            let mark = if *ok { "" } else { "!! " };
            let _ = write!(line, " {mark}{detail};");
        }
        for note in &self.notes {
            let _ = write!(line, " ({note});");
        }
        line.pop();
        let _ = writeln!(std::io::stderr(), "ACCEPTANCE {line}");
        line
    }

    /// Reports, then fails the calling test if any check failed.
    pub fn finish(&self) {
        let line = self.report();
        assert!(self.passed(), "{line}");
    }
}

/// `exp(−iθH)ψ` for H drawn from the Gaussian orthogonal ensemble with
/// off-diagonal variance 1 and diagonal variance 2.
pub fn goe_kick<R: Rng + ?Sized>(psi: &GridState, theta: f64, rng: &mut R) -> GridState {
    let n = psi.len();
    let mut h = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        h[(j, j)] = rng.sample::<f64, _>(StandardNormal) * std::f64::consts::SQRT_2;
        for k in j + 1..n {
            let x: f64 = rng.sample(StandardNormal);
            h[(j, k)] = x;
            h[(k, j)] = x;
        }
    }
    let eig = h.symmetric_eigen();
    let v = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    let mut c = v.ad_mul(&DVector::from_column_slice(psi.amplitudes()));
    for (cj, &l) in c.iter_mut().zip(eig.eigenvalues.iter()) {
        *cj *= Complex64::from_polar(1.0, -theta * l);
    }
    GridState::new(*psi.grid(), (v * c).iter().copied().collect()).expect("same grid")
}

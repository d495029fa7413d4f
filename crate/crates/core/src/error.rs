use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("packet width {sigma} is below 4 grid spacings ({dx})")]
    WidthUnresolvable { sigma: f64, dx: f64 },

    #[error("packet centered at {center} with width {sigma} lies within {margin} widths of the grid edge")]
    PacketTouchesBoundary { center: f64, sigma: f64, margin: f64 },

    #[error("state is not normalized (norm = {norm})")]
    NotNormalized { norm: f64 },

    #[error("states live on different grids")]
    GridMismatch,

    #[error("amplitude count {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("class resolutions differ ({0} vs {1})")]
    MixedResolutions(f64, f64),

    #[error("packet widths differ ({0} vs {1})")]
    MixedWidths(f64, f64),

    #[error("scaled spread {spread} falls below the resolvable width {min}")]
    ScaledBelowResolution { spread: f64, min: f64 },

    #[error("translated state leaves the grid (edge mass {leakage:e})")]
    TranslatedOffGrid { leakage: f64 },

    #[error("spread {spread} is below two grid spacings; the state is effectively a grid delta")]
    DegenerateSpread { spread: f64 },

    #[error("kick dimension {kick} does not match state dimension {state}")]
    DimensionMismatch { kick: usize, state: usize },

    #[error("step calibration did not converge: {0}")]
    CalibrationDiverged(String),

    #[error("edge-band probability {leakage:e} exceeds the leakage bound {bound:e}")]
    LeakageDetected { leakage: f64, bound: f64 },

    #[error("state spread {spread} exceeds the resolution {sigma}; not localized")]
    NotLocalized { spread: f64, sigma: f64 },

    #[error("detectors at {0} and {1} are closer than six resolutions")]
    DetectorOverlap(f64, f64),

    #[error("{timeouts} of {runs} runs timed out (allowed {allowed}); report invalidated")]
    TimeoutFractionExceeded {
        timeouts: usize,
        runs: usize,
        allowed: usize,
    },

    #[error("failed to parse state file: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

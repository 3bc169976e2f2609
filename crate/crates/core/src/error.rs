use thiserror::Error;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("coupling constant must be finite and positive, got {0}")]
    InvalidCoupling(f64),
    #[error("tilt must be finite and non-negative, got {0}")]
    InvalidTilt(f64),
    #[error("propagation distance must be finite and non-negative, got {0}")]
    InvalidDistance(f64),
    #[error("integration step must be finite and positive, got {0}")]
    InvalidStep(f64),
    #[error("window half width must be at least 1")]
    InvalidHalfWidth,
    #[error("z grid needs z_min >= 0, z_max > z_min and at least 2 samples")]
    InvalidGrid,
    #[error("infinite period: Bloch period is undefined for zero tilt")]
    InfinitePeriod,
    #[error("window half width {half_width} too small, need at least {required}")]
    WindowTooSmall { half_width: usize, required: usize },
    #[error("site {0} lies outside the lattice window")]
    SiteOutsideWindow(i64),
    #[error("edge leakage {leakage:e} exceeds threshold {threshold:e}; enlarge the window")]
    EdgeLeakage { leakage: f64, threshold: f64 },
    #[error("NOON state needs at least one photon")]
    NoPhotons,
    #[error("NOON state input sites must differ, both are {0}")]
    EqualInputSites(i64),
    #[error("photon split p={p} outside [0, {n}]")]
    SplitOutOfRange { p: u32, n: u32 },
    #[error("branches merge at z={z} (|zeta| < 1); coincidence ratio undefined")]
    DegenerateBranches { z: f64 },
    #[error("distinguishable-photon probability at sites ({x}, {y}) below floor at z={z}")]
    DenominatorUnderflow { z: f64, x: i64, y: i64 },
    #[error("no dominant spectral peak (peak/median = {ratio:.3} < 5)")]
    NoDominantPeak { ratio: f64 },
    #[error("trace too short or too coarse for estimated period {period}")]
    InsufficientSampling { period: f64 },
}

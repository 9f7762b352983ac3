//! Spherical analysis, wave kernels, and discrete-group orbit sums on real
//! hyperbolic space `H^n`, plus the exponent arithmetic for the associated
//! Strichartz/well-posedness theory.
//!
//! The crate is organized bottom-up:
//!
//! * [`geometry`] — hyperboloid model: points, distances, Lorentz isometries;
//! * [`special`] — complex log-Gamma and reciprocal Gamma;
//! * [`quad`] — Gauss–Legendre panels and adaptive refinement;
//! * [`spherical`] — spherical functions `φ_λ`, Plancherel density, transforms;
//! * [`kernels`] — low/high frequency wave kernels on `H^n` and decay fits;
//! * [`groups`] — cyclic and Schottky groups, orbit enumeration, Poincaré series;
//! * [`locsym`] — summed kernels and convolution-bound quantities on quotients;
//! * [`strichartz`] — admissibility regions, `σ(p,q)`, GWP thresholds.
//!
//! Everything is a pure function of its inputs; no global mutable state beyond
//! memoized quadrature nodes and calibration constants.

pub mod geometry;
pub mod groups;
pub mod kernels;
pub mod locsym;
pub mod quad;
pub mod special;
pub mod spherical;
pub mod strichartz;

/// Crate-wide error type.
#[derive(Debug, Clone, thiserror::Error)]
pub enum Error {
    #[error("dimension must be at least {min}, got {got}")]
    BadDimension { got: usize, min: usize },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("axis {axis} out of range 1..={n}")]
    AxisOutOfRange { axis: usize, n: usize },

    #[error("{what}: invariant defect {defect:.3e} exceeds tolerance {tol:.3e}")]
    InvariantViolation { what: &'static str, defect: f64, tol: f64 },

    #[error("quadrature did not converge: last refinement changed by {achieved:.3e} (requested {requested:.3e})")]
    QuadratureNonConvergent { achieved: f64, requested: f64 },

    #[error("point (t={t}, r={r}) lies in the light-cone exclusion band |r-|t|| < {band}")]
    LightConeBand { t: f64, r: f64, band: f64 },

    #[error("Re sigma = {re_sigma} outside the admissible strip [0, {max}]")]
    SigmaOutsideStrip { re_sigma: f64, max: f64 },

    #[error("divergent tail: {detail}")]
    DivergentTail { detail: String },

    #[error("insufficient samples: got {got}, need at least {need}")]
    InsufficientSamples { got: usize, need: usize },

    #[error("orbit enumeration exceeded the cap of {cap} samples at radius {radius}; reduce the radius")]
    OrbitCapExceeded { cap: usize, radius: f64 },

    #[error("ping-pong certificate failed: margin {margin:.4} below threshold {threshold}")]
    PingPongFailed { margin: f64, threshold: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short machine-readable tag, used by the CLI's diagnostic JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::BadDimension { .. } => "bad_dimension",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::AxisOutOfRange { .. } => "axis_out_of_range",
            Error::InvariantViolation { .. } => "invariant_violation",
            Error::QuadratureNonConvergent { .. } => "quadrature_non_convergent",
            Error::LightConeBand { .. } => "light_cone_band",
            Error::SigmaOutsideStrip { .. } => "sigma_outside_strip",
            Error::DivergentTail { .. } => "divergent_tail",
            Error::InsufficientSamples { .. } => "insufficient_samples",
            Error::OrbitCapExceeded { .. } => "orbit_cap_exceeded",
            Error::PingPongFailed { .. } => "ping_pong_failed",
            Error::InvalidParameter(_) => "invalid_parameter",
        }
    }
}

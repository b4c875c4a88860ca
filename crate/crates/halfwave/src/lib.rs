//! Pseudospectral laboratory for the nonlinear half-wave equation
//!
//! ```text
//!     i du/dt + delta * Lambda u = -mu |u|^(nu-1) u,      Lambda = sqrt(-Laplace),
//! ```
//!
//! discretized on a periodic box `[-L/2, L/2)^d` with `d <= 3`. The crate
//! provides the Fourier multiplier calculus for `Lambda` (powers, Bessel
//! weights, the propagator `exp(it*delta*Lambda)`), Littlewood-Paley blocks
//! with Sobolev/Besov/weighted norms, the exponent algebra of the scaling
//! analysis (critical index, Strichartz admissibility, sub/super-critical
//! thresholds), a Strang split-step solver cross-checked by a Picard
//! (Duhamel) iterator, and a set of scripted experiments that measure the
//! constructive small-dispersion and ill-posedness mechanisms at desk scale:
//! slow-dispersion closeness, initial-norm scaling of rescaled families,
//! norm inflation, phase decoherence, negative-order growth, and empirical
//! ratio probes for the Strichartz, Leibniz and chain-rule inequalities.
//!
//! Conventions, fixed once and used everywhere:
//!
//! * the Fourier transform is unitary (`(2*pi)^(-d/2)` on both sides), so the
//!   discrete Plancherel identity is an equality, not a proportionality;
//! * the frequency lattice is `(2*pi/L) * {-n/2, ..., n/2-1}^d`, stored in
//!   wrapped FFT order;
//! * `|xi|^s` maps the zero mode to 0 for `s > 0`, is the identity for
//!   `s = 0`, and is undefined on a nonzero mean for `s < 0` (an error unless
//!   suppression is requested);
//! * the phase of the nonlinear flow is chosen so that the zero-dispersion
//!   formula, the Duhamel integral and the conserved energy all solve the
//!   *same* equation (the displayed one above). All reported quantities are
//!   invariant under the conjugate convention.

pub mod evolution;
pub mod exponents;
pub mod experiments;
pub mod grid;
pub mod io;
pub mod norms;
pub mod spectral;

pub use grid::{Field, GridSpec, Space};

use std::fmt;

/// Everything that can go wrong inside the library.
///
/// Messages carry the measured quantity that violated a guard (aliasing
/// energy, boundary ratio, mean size, ...) so a failed precondition is
/// diagnosable from the error alone.
#[derive(Debug)]
pub enum Error {
    /// Invalid grid construction or incompatible grids in a binary op.
    Grid(String),
    /// Operation received a field in the wrong representation.
    Space { expected: Space, found: Space },
    /// NaN or infinity encountered where finite data is required.
    NonFinite(&'static str),
    /// Parameter outside the mathematical domain of an operation.
    Domain(String),
    /// Homogeneous symbol with negative power applied to a field whose
    /// mean is not numerically zero.
    ZeroMode { power: f64, mean: f64 },
    /// Band-limit guard tripped: `fraction` of the spectral energy sits
    /// above the cutoff, exceeding `limit`.
    BandLimit { fraction: f64, limit: f64 },
    /// Spatial decay guard tripped (boundary values too large, or the box
    /// too small for the requested profile).
    Decay(String),
    /// Littlewood-Paley block index outside the grid's resolvable range.
    Block { j: i32, lo: i32, hi: i32 },
    /// A monitored norm crossed the blow-up ceiling during evolution.
    Ceiling { t: f64, gamma: f64, value: f64, ceiling: f64 },
    /// Picard iteration failed to contract within the allowed iterations.
    NoConvergence { iterations: usize, factors: Vec<f64> },
    /// Config file rejected; `line` is 1-based.
    Config { line: usize, message: String },
    /// Malformed binary field file.
    Format(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Grid(msg) => write!(f, "grid error: {msg}"),
            Error::Space { expected, found } => {
                write!(f, "expected a {expected:?}-space field, got {found:?}")
            }
            Error::NonFinite(what) => write!(f, "non-finite values in {what}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::ZeroMode { power, mean } => write!(
                f,
                "|xi|^{power} is undefined on the zero mode: field has nonzero mean \
                 (|mean coefficient| = {mean:.3e}); subtract the mean or request suppression"
            ),
            Error::BandLimit { fraction, limit } => write!(
                f,
                "band-limit guard: {fraction:.3e} of the spectral energy lies above \
                 the cutoff (limit {limit:.1e})"
            ),
            Error::Decay(msg) => write!(f, "decay guard: {msg}"),
            Error::Block { j, lo, hi } => write!(
                f,
                "dyadic block 2^{j} outside the grid's resolvable range 2^{lo}..2^{hi}"
            ),
            Error::Ceiling { t, gamma, value, ceiling } => write!(
                f,
                "norm ceiling exceeded at t = {t:.6}: H^{gamma} norm {value:.6e} > {ceiling:.6e}"
            ),
            Error::NoConvergence { iterations, factors } => {
                write!(
                    f,
                    "no contraction after {iterations} iterations; increment factors {:?} \
                     (T is likely outside the contraction regime)",
                    factors
                )
            }
            Error::Config { line, message } => write!(f, "config line {line}: {message}"),
            Error::Format(msg) => write!(f, "field file: {msg}"),
            Error::Io(e) => write!(f, "io: {e}"),
        }
    }
}

impl std::error::Error for Error {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        match self {
            Error::Io(e) => Some(e),
            _ => None,
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}

pub type Result<T> = std::result::Result<T, Error>;

//! Unitary Fourier transforms and the multiplier calculus of Lambda.
//!
//! The transform pair is the unitary convention restricted to the box:
//!
//! ```text
//!   F[k]  = (2*pi)^(-d/2) * h^d     * sum_j f(x_j) exp(-i k . x_j)
//!   f(x_j) = (2*pi)^(-d/2) * dk^d   * sum_k F[k]  exp(+i k . x_j)
//! ```
//!
//! with `h = L/n`, `dk = 2*pi/L`, `x_j = -L/2 + j*h`. Spectral values
//! approximate the continuum transform itself, so they are independent of
//! the grid that carries them; Plancherel
//! `h^d * sum |f|^2 = dk^d * sum |F|^2` holds exactly. The centered box
//! turns into a `(-1)^(m_1 + ... + m_d)` checkerboard on the spectral side
//! of a plain FFT, applied symmetrically in both directions.

use crate::grid::{Field, GridSpec, Space};
use crate::{Error, Result};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::{Fft, FftDirection, FftPlanner};
use std::cell::RefCell;
use std::f64::consts::PI;
use std::sync::Arc;

/// Relative size below which a zero-mode coefficient counts as zero mean.
pub const ZERO_MEAN_TOL: f64 = 1e-12;

/// Maximum fraction of spectral energy allowed above the half-lattice
/// cutoff when resampling.
pub const ALIAS_ENERGY_TOL: f64 = 1e-10;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn plan(n: usize, direction: FftDirection) -> Arc<dyn Fft<f64>> {
    PLANNER.with(|p| match direction {
        FftDirection::Forward => p.borrow_mut().plan_fft_forward(n),
        FftDirection::Inverse => p.borrow_mut().plan_fft_inverse(n),
    })
}

/// Unnormalized DFT along every axis, in place.
fn dft_axes(values: &mut [Complex64], grid: GridSpec, direction: FftDirection) {
    let n = grid.points_per_axis();
    let d = grid.dim();
    let fft = plan(n, direction);
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    // Contiguous axis first: plain chunked passes.
    for line in values.chunks_exact_mut(n) {
        fft.process_with_scratch(line, &mut scratch);
    }
    // Remaining axes: gather a strided line, transform, scatter back.
    let mut line = vec![Complex64::new(0.0, 0.0); n];
    for axis in (0..d.saturating_sub(1)).rev() {
        let stride = n.pow((d - 1 - axis) as u32);
        let block = stride * n;
        for base in (0..values.len()).step_by(block) {
            for offset in 0..stride {
                let start = base + offset;
                for j in 0..n {
                    line[j] = values[start + j * stride];
                }
                fft.process_with_scratch(&mut line, &mut scratch);
                for j in 0..n {
                    values[start + j * stride] = line[j];
                }
            }
        }
    }
}

/// The centered-box phase `(-1)^(m_1 + ... + m_d)`, its own inverse.
fn apply_checkerboard(values: &mut [Complex64], grid: GridSpec) {
    for (flat, z) in values.iter_mut().enumerate() {
        let idx = grid.axis_indices(flat);
        if (idx[0] + idx[1] + idx[2]) & 1 == 1 {
            *z = -*z;
        }
    }
}

/// Physical samples -> spectral coefficients.
pub fn forward_transform(f: &Field) -> Result<Field> {
    f.expect_space(Space::Physical)?;
    let grid = f.grid();
    let mut values = f.values().to_vec();
    dft_axes(&mut values, grid, FftDirection::Forward);
    apply_checkerboard(&mut values, grid);
    let scale = (2.0 * PI).powf(-0.5 * grid.dim() as f64) * grid.cell();
    for z in &mut values {
        *z *= scale;
    }
    Field::new(grid, Space::Spectral, values)
}

/// Spectral coefficients -> physical samples.
pub fn inverse_transform(f: &Field) -> Result<Field> {
    f.expect_space(Space::Spectral)?;
    let grid = f.grid();
    let mut values = f.values().to_vec();
    apply_checkerboard(&mut values, grid);
    dft_axes(&mut values, grid, FftDirection::Inverse);
    let scale = (2.0 * PI).powf(-0.5 * grid.dim() as f64) * grid.freq_cell();
    for z in &mut values {
        *z *= scale;
    }
    Field::new(grid, Space::Physical, values)
}

/// The field in spectral form (clone if already there).
pub fn to_spectral(f: &Field) -> Result<Field> {
    match f.space() {
        Space::Spectral => Ok(f.clone()),
        Space::Physical => forward_transform(f),
    }
}

/// The field in physical form (clone if already there).
pub fn to_physical(f: &Field) -> Result<Field> {
    match f.space() {
        Space::Physical => Ok(f.clone()),
        Space::Spectral => inverse_transform(f),
    }
}

/// Radial Fourier multipliers of the half-wave calculus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Symbol {
    /// `|xi|^s`. Zero mode: 0 for `s > 0`, identity for `s = 0`; for
    /// `s < 0` the zero mode is undefined and a nonzero mean is an error
    /// (see [`apply_symbol_suppressing_mean`]).
    HomogeneousPower(f64),
    /// `(1 + |xi|^2)^(s/2)`, the Bessel weight `<Lambda>^s`.
    InhomogeneousPower(f64),
    /// `exp(i t delta |xi|)`, the linear propagator.
    HalfwavePhase { t: f64, delta: f64 },
}

fn multiplier_at(symbol: Symbol, k_sq: f64) -> Complex64 {
    match symbol {
        Symbol::HomogeneousPower(s) => {
            if s == 0.0 {
                Complex64::new(1.0, 0.0)
            } else if k_sq == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(k_sq.powf(0.5 * s), 0.0)
            }
        }
        Symbol::InhomogeneousPower(s) => Complex64::new((1.0 + k_sq).powf(0.5 * s), 0.0),
        Symbol::HalfwavePhase { t, delta } => Complex64::from_polar(1.0, t * delta * k_sq.sqrt()),
    }
}

fn apply_symbol_inner(f: &Field, symbol: Symbol, suppress_mean: bool) -> Result<Field> {
    if let Symbol::HomogeneousPower(s) = symbol {
        if !s.is_finite() {
            return Err(Error::Domain(format!("symbol power must be finite, got {s}")));
        }
    }
    let mut spec = to_spectral(f)?;
    if let Symbol::HomogeneousPower(s) = symbol {
        if s < 0.0 && !suppress_mean {
            let mean = spec.values()[0].norm();
            let peak = spec.max_abs();
            if mean > ZERO_MEAN_TOL * peak {
                return Err(Error::ZeroMode { power: s, mean });
            }
        }
    }
    let grid = spec.grid();
    for flat in 0..grid.sites() {
        let m = multiplier_at(symbol, grid.freq_sq(flat));
        spec.values_mut()[flat] *= m;
    }
    // `|xi|^s` with s < 0 leaves a 0 * inf = NaN on the zero mode; the mean
    // was verified (or declared) zero, so the limit is 0.
    if let Symbol::HomogeneousPower(s) = symbol {
        if s < 0.0 {
            spec.values_mut()[0] = Complex64::new(0.0, 0.0);
        }
    }
    spec.check_finite("symbol output")?;
    match f.space() {
        Space::Spectral => Ok(spec),
        Space::Physical => inverse_transform(&spec),
    }
}

/// Multiply the spectrum pointwise by `symbol`; the result comes back in
/// the same representation the input was in.
pub fn apply_symbol(f: &Field, symbol: Symbol) -> Result<Field> {
    apply_symbol_inner(f, symbol, false)
}

/// Same as [`apply_symbol`], but a homogeneous power with `s < 0` treats
/// the mean as zero instead of rejecting it. Callers opt in explicitly.
pub fn apply_symbol_suppressing_mean(f: &Field, symbol: Symbol) -> Result<Field> {
    apply_symbol_inner(f, symbol, true)
}

/// Apply `exp(i t delta Lambda)`: the free flow for dispersion `delta`.
pub fn propagate_linear(f: &Field, t: f64, delta: f64) -> Result<Field> {
    if !t.is_finite() || !delta.is_finite() {
        return Err(Error::Domain(format!("propagator needs finite (t, delta), got ({t}, {delta})")));
    }
    apply_symbol(f, Symbol::HalfwavePhase { t, delta })
}

/// Fraction of spectral energy at or above half the lattice extent on some
/// axis (the part that is not safe to relabel dyadically).
fn upper_band_fraction(spec: &Field) -> f64 {
    let grid = spec.grid();
    let quarter = grid.points_per_axis() / 4;
    let mut upper = 0.0;
    let mut total = 0.0;
    for (flat, z) in spec.values().iter().enumerate() {
        let e = z.norm_sqr();
        total += e;
        let idx = grid.axis_indices(flat);
        let outside = (0..grid.dim())
            .any(|a| grid.signed_mode(idx[a]).unsigned_abs() as usize >= quarter);
        if outside {
            upper += e;
        }
    }
    if total == 0.0 {
        0.0
    } else {
        upper / total
    }
}

/// Represent `f(2^-m .)` on the box of side `2^m L` with the same `n`.
///
/// On the lattice this is exact: sample values are reused verbatim and
/// each spectral index keeps its coefficient up to the Jacobian `2^(m d)`,
/// with its frequency relabeled to `2^-m k`. The guard requires `f` to be
/// band-limited to the lower half of the spectrum (energy above the cutoff
/// at most [`ALIAS_ENERGY_TOL`] of the total) so that resampled fields keep
/// resolution headroom for later nonlinear work.
pub fn resample_dyadic(f: &Field, m: i32) -> Result<Field> {
    if m == 0 {
        return Ok(f.clone());
    }
    if m.abs() > 64 {
        return Err(Error::Domain(format!("dyadic shift 2^{m} overflows the scale range")));
    }
    let spec = to_spectral(f)?;
    let fraction = upper_band_fraction(&spec);
    if fraction > ALIAS_ENERGY_TOL {
        return Err(Error::BandLimit { fraction, limit: ALIAS_ENERGY_TOL });
    }
    let new_grid = f.grid().scaled_box(m);
    match f.space() {
        Space::Physical => {
            let mut out = f.clone();
            out.set_grid(new_grid);
            Ok(out)
        }
        Space::Spectral => {
            let jacobian = (2.0f64).powi(m * f.grid().dim() as i32);
            let mut out = f.scaled(Complex64::new(jacobian, 0.0));
            out.set_grid(new_grid);
            Ok(out)
        }
    }
}

/// Closed-form initial data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Recipe {
    /// `a * exp(-|x - c|^2 / (2 sigma^2))`.
    Gaussian { sigma: f64, amplitude: f64, center: [f64; 3] },
    /// `a * exp(i k0 . x)` with `k0` given by signed lattice integers.
    PlaneWave { modes: [i64; 3], amplitude: Complex64 },
    /// `Laplacian^order` of the unit Gaussian: real data whose spectrum
    /// `(-1)^order |k|^(2 order) exp(-|k|^2 / 2)` vanishes to order
    /// `2*order` at the origin.
    MomentGaussian { order: u32 },
}

/// Sample a recipe on the grid (physical space).
pub fn synthesize(grid: GridSpec, recipe: Recipe) -> Result<Field> {
    match recipe {
        Recipe::Gaussian { sigma, amplitude, center } => {
            if !(sigma.is_finite() && sigma > 0.0) {
                return Err(Error::Domain(format!("gaussian width must be positive, got {sigma}")));
            }
            if !amplitude.is_finite() {
                return Err(Error::Domain("gaussian amplitude must be finite".into()));
            }
            let max_off = (0..grid.dim()).map(|a| center[a].abs()).fold(0.0, f64::max);
            let needed = 14.0 * sigma + 2.0 * max_off;
            if grid.length() < needed {
                return Err(Error::Decay(format!(
                    "box of side {} cannot hold a gaussian with sigma {} centered {} off axis; \
                     need at least {:.3}",
                    grid.length(),
                    sigma,
                    max_off,
                    needed
                )));
            }
            let coords = grid.axis_coords();
            let inv = 1.0 / (2.0 * sigma * sigma);
            let mut values = Vec::with_capacity(grid.sites());
            for flat in 0..grid.sites() {
                let idx = grid.axis_indices(flat);
                let mut r_sq = 0.0;
                for a in 0..grid.dim() {
                    let dx = coords[idx[a]] - center[a];
                    r_sq += dx * dx;
                }
                values.push(Complex64::new(amplitude * (-r_sq * inv).exp(), 0.0));
            }
            Field::new(grid, Space::Physical, values)
        }
        Recipe::PlaneWave { modes, amplitude } => {
            if !(amplitude.re.is_finite() && amplitude.im.is_finite()) {
                return Err(Error::Domain("plane wave amplitude must be finite".into()));
            }
            let mut freqs = [0.0; 3];
            for a in 0..grid.dim() {
                freqs[a] = grid.freq_step() * grid.wrap_mode(modes[a])? as f64;
            }
            let coords = grid.axis_coords();
            let mut values = Vec::with_capacity(grid.sites());
            for flat in 0..grid.sites() {
                let idx = grid.axis_indices(flat);
                let mut phase = 0.0;
                for a in 0..grid.dim() {
                    phase += freqs[a] * coords[idx[a]];
                }
                values.push(amplitude * Complex64::from_polar(1.0, phase));
            }
            Field::new(grid, Space::Physical, values)
        }
        Recipe::MomentGaussian { order } => {
            if !(1..=8).contains(&order) {
                return Err(Error::Domain(format!(
                    "moment order must be between 1 and 8, got {order}"
                )));
            }
            let base = synthesize(
                grid,
                Recipe::Gaussian { sigma: 1.0, amplitude: 1.0, center: [0.0; 3] },
            )?;
            let mut spec = forward_transform(&base)?;
            let sign = if order % 2 == 0 { 1.0 } else { -1.0 };
            for flat in 0..grid.sites() {
                let k_sq = grid.freq_sq(flat);
                spec.values_mut()[flat] *= sign * k_sq.powi(order as i32);
            }
            inverse_transform(&spec)
        }
    }
}

/// Padding factor that dealiases `|u|^(nu-1) u`: the minimal exact factor
/// is `ceil((nu+1)/2)` for integer `nu`, rounded up to the next power of
/// two so the refined lattice is itself a valid grid; 2 otherwise
/// (non-polynomial nonlinearities have no exact factor; 2 is the working
/// rule).
pub fn pad_factor(nu: f64) -> usize {
    if (nu - nu.round()).abs() < 1e-12 {
        ((((nu.round() + 1.0) / 2.0).ceil() as usize).max(1)).next_power_of_two()
    } else {
        2
    }
}

/// Band-limited interpolation onto a grid refined by `factor`.
pub(crate) fn padded_physical(f: &Field, factor: usize) -> Result<Field> {
    if factor <= 1 {
        return to_physical(f);
    }
    let spec = to_spectral(f)?;
    let coarse = f.grid();
    let fine = coarse.refined(factor)?;
    let mut values = vec![Complex64::new(0.0, 0.0); fine.sites()];
    for (flat, z) in spec.values().iter().enumerate() {
        let idx = coarse.axis_indices(flat);
        let mut fine_idx = [0usize; 3];
        for a in 0..coarse.dim() {
            let m = coarse.signed_mode(idx[a]);
            fine_idx[a] = fine.wrap_mode(m).expect("coarse lattice embeds in fine lattice");
        }
        values[fine.flat_index(fine_idx)] = *z;
    }
    inverse_transform(&Field::new(fine, Space::Spectral, values)?)
}

/// Spectral truncation of a fine-grid field back to `coarse`.
pub(crate) fn truncate_to(f: &Field, coarse: GridSpec) -> Result<Field> {
    let spec = to_spectral(f)?;
    let fine = f.grid();
    let mut values = vec![Complex64::new(0.0, 0.0); coarse.sites()];
    let half = (coarse.points_per_axis() / 2) as i64;
    for (flat, z) in spec.values().iter().enumerate() {
        let idx = fine.axis_indices(flat);
        let mut coarse_idx = [0usize; 3];
        let mut inside = true;
        for a in 0..fine.dim() {
            let m = fine.signed_mode(idx[a]);
            if m < -half || m >= half {
                inside = false;
                break;
            }
            coarse_idx[a] = coarse.wrap_mode(m).expect("mode verified in range");
        }
        if inside {
            values[coarse.flat_index(coarse_idx)] = *z;
        }
    }
    inverse_transform(&Field::new(coarse, Space::Spectral, values)?)
}

/// `|u|^(nu-1) u` evaluated on a padded grid and truncated back, so the
/// polynomial part of the product does not alias.
pub fn nonlinear_power(u: &Field, nu: f64) -> Result<Field> {
    if nu <= 1.0 {
        return Err(Error::Domain(format!("nonlinearity exponent must exceed 1, got {nu}")));
    }
    let fine = padded_physical(u, pad_factor(nu))?;
    let mut w = fine;
    for z in w.values_mut() {
        let r = z.norm();
        *z = if r == 0.0 { Complex64::new(0.0, 0.0) } else { *z * r.powf(nu - 1.0) };
    }
    truncate_to(&w, u.grid())
}

/// Pointwise product `u * v` on a 2x padded grid, truncated back.
pub fn dealiased_product(u: &Field, v: &Field) -> Result<Field> {
    if u.grid() != v.grid() {
        return Err(Error::Grid("product factors live on different grids".into()));
    }
    let uf = padded_physical(u, 2)?;
    let vf = padded_physical(v, 2)?;
    let mut w = uf;
    for (z, b) in w.values_mut().iter_mut().zip(vf.values()) {
        *z *= b;
    }
    truncate_to(&w, u.grid())
}

/// Quadrature of `g(|u|)` over the box on a grid refined by `factor`.
pub(crate) fn padded_abs_quadrature(
    u: &Field,
    factor: usize,
    g: impl Fn(f64) -> f64,
) -> Result<f64> {
    let fine = padded_physical(u, factor)?;
    let cell = fine.grid().cell();
    Ok(fine.values().iter().map(|z| g(z.norm())).sum::<f64>() * cell)
}

/// Maximum of `|u|` sampled on a grid refined by `factor`.
pub(crate) fn padded_max_abs(u: &Field, factor: usize) -> Result<f64> {
    Ok(padded_physical(u, factor)?.max_abs())
}

/// Zero-mean random field, band-limited to axis modes `|m| <= frac * n/2`,
/// with smoothly decaying Gaussian spectral amplitudes and L2 norm
/// `target_l2`. Deterministic in `(grid, seed, frac)`; probe input.
pub fn random_band_limited(grid: GridSpec, seed: u64, frac: f64, target_l2: f64) -> Result<Field> {
    if !(0.0 < frac && frac <= 1.0) {
        return Err(Error::Domain(format!("band fraction must lie in (0, 1], got {frac}")));
    }
    if !(target_l2.is_finite() && target_l2 > 0.0) {
        return Err(Error::Domain("target norm must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cutoff = (frac * (grid.points_per_axis() / 2) as f64).floor().max(1.0);
    let k_cut = cutoff * grid.freq_step();
    let mut values = vec![Complex64::new(0.0, 0.0); grid.sites()];
    for (flat, slot) in values.iter_mut().enumerate() {
        let idx = grid.axis_indices(flat);
        let in_band = (0..grid.dim())
            .all(|a| (grid.signed_mode(idx[a]).unsigned_abs() as f64) <= cutoff);
        // Draw unconditionally so the stream is independent of the band.
        let u1: f64 = rng.random();
        let u2: f64 = rng.random();
        if !in_band || flat == 0 {
            continue;
        }
        let r = (-2.0 * (1.0 - u1).ln()).sqrt();
        let g = Complex64::from_polar(r, 2.0 * PI * u2);
        let envelope = (-2.0 * grid.freq_sq(flat) / (k_cut * k_cut)).exp();
        *slot = g * envelope;
    }
    let spec = Field::new(grid, Space::Spectral, values)?;
    let norm = (spec.sum_sq() * grid.freq_cell()).sqrt();
    if norm == 0.0 {
        return Err(Error::Domain("random field degenerated to zero".into()));
    }
    Ok(spec.scaled(Complex64::new(target_l2 / norm, 0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel_err(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn gaussian_spectrum_matches_closed_form() {
        // Unit gaussian in the unitary convention is its own transform.
        let grid = GridSpec::new(1, 512, 40.0).unwrap();
        let f = synthesize(
            grid,
            Recipe::Gaussian { sigma: 1.0, amplitude: 1.0, center: [0.0; 3] },
        )
        .unwrap();
        let spec = forward_transform(&f).unwrap();
        let mut worst = 0.0f64;
        for flat in 0..grid.sites() {
            let k = grid.freq(flat);
            let expected = (-0.5 * k * k).exp();
            let got = spec.values()[flat];
            worst = worst.max((got - Complex64::new(expected, 0.0)).norm());
        }
        assert!(worst <= 1e-10, "max abs spectrum error {worst:.3e} exceeds 1e-10");
    }

    #[test]
    fn roundtrip_is_identity() {
        let grid = GridSpec::new(2, 32, 20.0).unwrap();
        let f = random_band_limited(grid, 7, 0.9, 2.5).unwrap();
        let phys = to_physical(&f).unwrap();
        let back = inverse_transform(&forward_transform(&phys).unwrap()).unwrap();
        let diff = phys.sub(&back).unwrap();
        let rel = (diff.sum_sq() / phys.sum_sq()).sqrt();
        assert!(rel <= 1e-12, "roundtrip relative error {rel:.3e}");
    }

    #[test]
    fn plancherel_is_an_equality() {
        for d in 1..=3usize {
            let n = if d == 3 { 16 } else { 64 };
            let grid = GridSpec::new(d, n, 17.0).unwrap();
            let f = random_band_limited(grid, 99 + d as u64, 1.0, 1.0).unwrap();
            let phys = to_physical(&f).unwrap();
            let phys_sq = phys.sum_sq() * grid.cell();
            let spec_sq = f.sum_sq() * grid.freq_cell();
            assert!(
                rel_err(phys_sq, spec_sq) <= 1e-12,
                "Plancherel mismatch in d={d}: {phys_sq} vs {spec_sq}"
            );
        }
    }

    #[test]
    fn plane_wave_has_single_spectral_line() {
        let grid = GridSpec::new(1, 64, 10.0).unwrap();
        let f = synthesize(
            grid,
            Recipe::PlaneWave { modes: [5, 0, 0], amplitude: Complex64::new(2.0, 0.0) },
        )
        .unwrap();
        let spec = forward_transform(&f).unwrap();
        for flat in 0..grid.sites() {
            let v = spec.values()[flat].norm();
            if flat == 5 {
                assert!(v > 1.0, "carrier line missing");
            } else {
                assert!(v <= 1e-12 * spec.max_abs(), "spurious line at {flat}: {v:.3e}");
            }
        }
    }

    #[test]
    fn symbol_powers_compose_and_identity_holds() {
        let grid = GridSpec::new(1, 128, 25.0).unwrap();
        let f = random_band_limited(grid, 3, 0.5, 1.0).unwrap();
        let a = apply_symbol(&f, Symbol::HomogeneousPower(0.7)).unwrap();
        let ab = apply_symbol(&a, Symbol::HomogeneousPower(0.3)).unwrap();
        let direct = apply_symbol(&f, Symbol::HomogeneousPower(1.0)).unwrap();
        let diff = ab.sub(&direct).unwrap();
        assert!(
            diff.sum_sq().sqrt() <= 1e-12 * direct.sum_sq().sqrt(),
            "power composition violated"
        );
        let id = apply_symbol(&f, Symbol::HomogeneousPower(0.0)).unwrap();
        let diff = id.sub(&f).unwrap();
        assert_eq!(diff.sum_sq(), 0.0, "|xi|^0 must be the identity");
        let id2 = apply_symbol(&f, Symbol::InhomogeneousPower(0.0)).unwrap();
        let diff2 = id2.sub(&f).unwrap();
        assert_eq!(diff2.sum_sq(), 0.0, "<xi>^0 must be the identity");
    }

    #[test]
    fn negative_power_rejects_nonzero_mean() {
        let grid = GridSpec::new(1, 64, 20.0).unwrap();
        let f = synthesize(
            grid,
            Recipe::Gaussian { sigma: 1.0, amplitude: 1.0, center: [0.0; 3] },
        )
        .unwrap();
        let err = apply_symbol(&f, Symbol::HomogeneousPower(-0.5));
        assert!(matches!(err, Err(Error::ZeroMode { .. })), "mean must be rejected");
        let ok = apply_symbol_suppressing_mean(&f, Symbol::HomogeneousPower(-0.5));
        assert!(ok.is_ok(), "suppression must be honored");
        let spec = forward_transform(&ok.unwrap()).unwrap();
        assert!(spec.values()[0].norm() <= 1e-14, "suppressed zero mode must stay zero");
    }

    #[test]
    fn propagator_is_unitary_and_inverts() {
        let grid = GridSpec::new(1, 128, 30.0).unwrap();
        let f = random_band_limited(grid, 11, 0.8, 3.0).unwrap();
        let forward = propagate_linear(&f, 0.7, 0.3).unwrap();
        assert!(
            rel_err(forward.sum_sq(), f.sum_sq()) <= 1e-13,
            "propagator must preserve the L2 norm"
        );
        let back = propagate_linear(&forward, -0.7, 0.3).unwrap();
        let diff = back.sub(&f).unwrap();
        assert!(diff.sum_sq().sqrt() <= 1e-12 * f.sum_sq().sqrt(), "propagator must invert");
    }

    #[test]
    fn resample_relabels_gaussian_exactly() {
        let grid = GridSpec::new(1, 256, 40.0).unwrap();
        let f = synthesize(
            grid,
            Recipe::Gaussian { sigma: 1.0, amplitude: 1.0, center: [0.0; 3] },
        )
        .unwrap();
        let wide = resample_dyadic(&f, 1).unwrap();
        assert_eq!(wide.grid().length(), 80.0);
        // Samples of exp(-x^2/8) on the doubled box, exactly the old values.
        let mut worst = 0.0f64;
        for j in 0..wide.grid().points_per_axis() {
            let x = wide.grid().coord(j);
            let expected = (-x * x / 8.0).exp();
            worst = worst.max((wide.values()[j].re - expected).abs());
        }
        assert!(worst <= 1e-8, "dilated gaussian error {worst:.3e}");
        let back = resample_dyadic(&wide, -1).unwrap();
        let diff = back.sub(&f).unwrap();
        assert!(diff.sum_sq() == 0.0, "resample roundtrip must be exact");
    }

    #[test]
    fn resample_guards_against_full_band_content() {
        let grid = GridSpec::new(1, 64, 10.0).unwrap();
        // A line at 3/4 of the lattice extent sits above the half cutoff.
        let f = synthesize(
            grid,
            Recipe::PlaneWave { modes: [24, 0, 0], amplitude: Complex64::new(1.0, 0.0) },
        )
        .unwrap();
        let err = resample_dyadic(&f, 1);
        assert!(matches!(err, Err(Error::BandLimit { .. })), "aliasing must be reported");
    }

    #[test]
    fn moment_gaussian_spectrum_vanishes_quadratically() {
        // Box chosen so the lowest decade of frequencies has k^2 << 1 and the
        // log-log slope of |k|^2 exp(-k^2/2) is 2 up to that correction.
        let grid = GridSpec::new(1, 1024, 320.0).unwrap();
        let f = synthesize(grid, Recipe::MomentGaussian { order: 1 }).unwrap();
        let spec = forward_transform(&f).unwrap();
        assert!(spec.values()[0].norm() <= 1e-14, "zero mode must vanish");
        let k1 = grid.freq_step();
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for j in 1..grid.points_per_axis() / 2 {
            let k = grid.freq(j);
            if k <= 10.0 * k1 {
                xs.push(k.ln());
                ys.push(spec.values()[j].norm().ln());
            }
        }
        let npts = xs.len() as f64;
        let xm = xs.iter().sum::<f64>() / npts;
        let ym = ys.iter().sum::<f64>() / npts;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - xm) * (y - ym)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - xm) * (x - xm)).sum();
        let slope = sxy / sxx;
        assert!(
            (slope - 2.0).abs() <= 0.05,
            "low-frequency slope {slope:.4} should be 2 +- 0.05"
        );
        // Closed form at a representative point.
        let j = 40;
        let k = grid.freq(j);
        let expected = k * k * (-0.5 * k * k).exp();
        assert!(
            (spec.values()[j].norm() - expected).abs() <= 1e-8,
            "spectrum must match k^2 exp(-k^2/2)"
        );
    }

    #[test]
    fn gaussian_decay_guard_names_the_needed_box() {
        let grid = GridSpec::new(1, 64, 10.0).unwrap();
        let err = synthesize(
            grid,
            Recipe::Gaussian { sigma: 1.0, amplitude: 1.0, center: [0.0; 3] },
        );
        assert!(matches!(err, Err(Error::Decay(_))), "10 < 14 sigma must be rejected");
    }

    #[test]
    fn dealiased_cube_matches_closed_form() {
        // (e^{ikx})^3 = e^{3ikx}: cubing a lattice line lands on a lattice line.
        let grid = GridSpec::new(1, 64, 10.0).unwrap();
        let f = synthesize(
            grid,
            Recipe::PlaneWave { modes: [5, 0, 0], amplitude: Complex64::new(0.5, 0.0) },
        )
        .unwrap();
        let cube = nonlinear_power(&f, 3.0).unwrap();
        let expected = synthesize(
            grid,
            Recipe::PlaneWave { modes: [5, 0, 0], amplitude: Complex64::new(0.125, 0.0) },
        )
        .unwrap();
        let diff = cube.sub(&expected).unwrap();
        assert!(
            diff.sum_sq().sqrt() <= 1e-12,
            "|u|^2 u of a plane wave must be the amplitude-cubed line"
        );
    }

    #[test]
    fn pad_factor_follows_the_rule() {
        assert_eq!(pad_factor(3.0), 2);
        assert_eq!(pad_factor(5.0), 4);
        assert_eq!(pad_factor(7.0), 4);
        assert_eq!(pad_factor(2.0), 2);
        assert_eq!(pad_factor(2.5), 2);
        assert_eq!(pad_factor(4.2), 2);
    }
}

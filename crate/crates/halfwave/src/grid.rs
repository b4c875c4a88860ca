//! Periodic grids and sampled fields.
//!
//! A `GridSpec` is the box `[-L/2, L/2)^d`, `d <= 3`, sampled at `n` points
//! per axis (`n` a power of two). Physical samples live at
//! `x_j = -L/2 + j*h`, `h = L/n`; spectral coefficients live on the lattice
//! `k = (2*pi/L) * m` with signed integers `m in {-n/2, ..., n/2-1}` stored
//! in wrapped FFT order (index `j` holds `m = j` for `j < n/2`, else
//! `m = j - n`). Arrays are flattened in row-major order: the last axis is
//! contiguous, so `flat = (i0*n + i1)*n + i2` in three dimensions.

use crate::{Error, Result};
use num_complex::Complex64;

/// Box geometry and resolution. Cheap to copy; carried by every `Field`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    d: usize,
    n: usize,
    length: f64,
    log2n: u32,
}

impl GridSpec {
    /// A `d`-dimensional grid with `n` points per axis on a box of side
    /// `length`. Requires `1 <= d <= 3`, `n` a power of two with `n >= 8`,
    /// and a positive finite `length`.
    pub fn new(d: usize, n: usize, length: f64) -> Result<Self> {
        if !(1..=3).contains(&d) {
            return Err(Error::Grid(format!("dimension must be 1, 2 or 3, got {d}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::Grid(format!(
                "points per axis must be a power of two >= 8, got {n}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(Error::Grid(format!("box length must be positive, got {length}")));
        }
        let sites = (n as u128).pow(d as u32);
        if sites > (1u128 << 34) {
            return Err(Error::Grid(format!(
                "grid with {n}^{d} sites is too large to allocate"
            )));
        }
        Ok(GridSpec { d, n, length, log2n: n.trailing_zeros() })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn points_per_axis(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// Total number of sites, `n^d`.
    pub fn sites(&self) -> usize {
        self.n.pow(self.d as u32)
    }

    /// Sample spacing `h = L/n`.
    pub fn spacing(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Physical volume element `h^d` (the quadrature weight).
    pub fn cell(&self) -> f64 {
        self.spacing().powi(self.d as i32)
    }

    /// Frequency lattice spacing `2*pi/L`.
    pub fn freq_step(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.length
    }

    /// Spectral volume element `(2*pi/L)^d` (Plancherel weight).
    pub fn freq_cell(&self) -> f64 {
        self.freq_step().powi(self.d as i32)
    }

    /// Largest axis frequency magnitude, `(2*pi/L) * n/2`.
    pub fn k_max_axis(&self) -> f64 {
        self.freq_step() * (self.n / 2) as f64
    }

    /// Largest lattice frequency magnitude, `k_max_axis * sqrt(d)`.
    pub fn k_max(&self) -> f64 {
        self.k_max_axis() * (self.d as f64).sqrt()
    }

    /// Smallest nonzero lattice frequency magnitude, `2*pi/L`.
    pub fn k_min(&self) -> f64 {
        self.freq_step()
    }

    /// Physical coordinate of axis index `j`.
    pub fn coord(&self, j: usize) -> f64 {
        -0.5 * self.length + j as f64 * self.spacing()
    }

    /// Signed spectral integer of wrapped axis index `j`.
    pub fn signed_mode(&self, j: usize) -> i64 {
        if j < self.n / 2 {
            j as i64
        } else {
            j as i64 - self.n as i64
        }
    }

    /// Frequency of wrapped axis index `j`.
    pub fn freq(&self, j: usize) -> f64 {
        self.freq_step() * self.signed_mode(j) as f64
    }

    /// Wrapped axis index of a signed spectral integer.
    pub fn wrap_mode(&self, m: i64) -> Result<usize> {
        let half = (self.n / 2) as i64;
        if m < -half || m >= half {
            return Err(Error::Grid(format!(
                "mode {m} outside the lattice [-{half}, {half})"
            )));
        }
        Ok(if m >= 0 { m as usize } else { (m + self.n as i64) as usize })
    }

    /// Decompose a flat index into per-axis indices (unused axes read 0).
    #[inline]
    pub fn axis_indices(&self, flat: usize) -> [usize; 3] {
        let mask = self.n - 1;
        let b = self.log2n;
        match self.d {
            1 => [flat, 0, 0],
            2 => [flat >> b, flat & mask, 0],
            _ => [flat >> (2 * b), (flat >> b) & mask, flat & mask],
        }
    }

    /// Flat index of per-axis indices.
    #[inline]
    pub fn flat_index(&self, idx: [usize; 3]) -> usize {
        let b = self.log2n;
        match self.d {
            1 => idx[0],
            2 => (idx[0] << b) | idx[1],
            _ => (idx[0] << (2 * b)) | (idx[1] << b) | idx[2],
        }
    }

    /// Per-axis coordinates (length `n`).
    pub(crate) fn axis_coords(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.coord(j)).collect()
    }

    /// |k|^2 at a flat spectral index.
    #[inline]
    pub fn freq_sq(&self, flat: usize) -> f64 {
        let idx = self.axis_indices(flat);
        let mut s = 0.0;
        for axis in 0..self.d {
            let k = self.freq(idx[axis]);
            s += k * k;
        }
        s
    }

    /// Grid with the same resolution on a box scaled by `2^m`.
    pub(crate) fn scaled_box(&self, m: i32) -> GridSpec {
        GridSpec { length: self.length * (2.0f64).powi(m), ..*self }
    }

    /// Grid with `factor * n` points per axis on the same box.
    pub(crate) fn refined(&self, factor: usize) -> Result<GridSpec> {
        GridSpec::new(self.d, self.n * factor, self.length)
    }
}

/// Which representation a `Field`'s values are in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Space {
    Physical,
    Spectral,
}

/// A complex scalar field sampled on a grid, in physical or spectral form.
///
/// Invariants: the value count is exactly `grid.sites()` and every value is
/// finite; both are checked on construction (and thus after each transform,
/// which builds a fresh `Field`).
#[derive(Debug, Clone)]
pub struct Field {
    grid: GridSpec,
    space: Space,
    values: Vec<Complex64>,
}

impl Field {
    pub fn new(grid: GridSpec, space: Space, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.sites() {
            return Err(Error::Grid(format!(
                "value count {} does not match grid with {} sites",
                values.len(),
                grid.sites()
            )));
        }
        let field = Field { grid, space, values };
        field.check_finite("field values")?;
        Ok(field)
    }

    pub fn zeros(grid: GridSpec, space: Space) -> Self {
        Field { grid, space, values: vec![Complex64::new(0.0, 0.0); grid.sites()] }
    }

    /// Skips the finiteness scan; for internal steps whose output is finite
    /// by construction (unit-modulus phases, truncations of checked data).
    pub(crate) fn from_parts(grid: GridSpec, space: Space, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.sites());
        Field { grid, space, values }
    }

    pub fn grid(&self) -> GridSpec {
        self.grid
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub(crate) fn set_grid(&mut self, grid: GridSpec) {
        debug_assert_eq!(grid.sites(), self.values.len());
        self.grid = grid;
    }

    pub fn check_finite(&self, what: &'static str) -> Result<()> {
        if self.values.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite(what))
        }
    }

    pub fn expect_space(&self, expected: Space) -> Result<()> {
        if self.space == expected {
            Ok(())
        } else {
            Err(Error::Space { expected, found: self.space })
        }
    }

    fn expect_same_layout(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(Error::Grid("fields live on different grids".into()));
        }
        if self.space != other.space {
            return Err(Error::Space { expected: self.space, found: other.space });
        }
        Ok(())
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.expect_same_layout(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Field::from_parts(self.grid, self.space, values))
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.expect_same_layout(other)?;
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Field::from_parts(self.grid, self.space, values))
    }

    pub fn scaled(&self, c: Complex64) -> Field {
        let values = self.values.iter().map(|z| z * c).collect();
        Field::from_parts(self.grid, self.space, values)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Unweighted squared two-norm of the raw values.
    pub(crate) fn sum_sq(&self) -> f64 {
        self.values.iter().map(|z| z.norm_sqr()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_rejects_bad_parameters() {
        assert!(GridSpec::new(0, 16, 1.0).is_err(), "d = 0 must be rejected");
        assert!(GridSpec::new(4, 16, 1.0).is_err(), "d = 4 must be rejected");
        assert!(GridSpec::new(1, 12, 1.0).is_err(), "non power of two rejected");
        assert!(GridSpec::new(1, 4, 1.0).is_err(), "n < 8 rejected");
        assert!(GridSpec::new(1, 16, 0.0).is_err(), "zero length rejected");
        assert!(GridSpec::new(2, 256, 60.0).is_ok());
    }

    #[test]
    fn frequency_lattice_is_wrapped() {
        let g = GridSpec::new(1, 8, 2.0 * std::f64::consts::PI).unwrap();
        // 2*pi/L = 1, so frequencies are the signed integers themselves.
        let freqs: Vec<f64> = (0..8).map(|j| g.freq(j)).collect();
        assert_eq!(freqs, vec![0.0, 1.0, 2.0, 3.0, -4.0, -3.0, -2.0, -1.0]);
        assert_eq!(g.wrap_mode(-1).unwrap(), 7);
        assert_eq!(g.wrap_mode(3).unwrap(), 3);
        assert!(g.wrap_mode(4).is_err(), "n/2 is not on the lattice");
    }

    #[test]
    fn flat_index_roundtrip() {
        let g = GridSpec::new(3, 8, 1.0).unwrap();
        for flat in [0usize, 1, 7, 8, 63, 64, 511] {
            assert_eq!(g.flat_index(g.axis_indices(flat)), flat);
        }
        let g2 = GridSpec::new(2, 16, 1.0).unwrap();
        assert_eq!(g2.axis_indices(16 * 3 + 5), [3, 5, 0]);
    }

    #[test]
    fn field_construction_guards() {
        let g = GridSpec::new(1, 8, 1.0).unwrap();
        assert!(Field::new(g, Space::Physical, vec![Complex64::new(0.0, 0.0); 7]).is_err());
        let mut vals = vec![Complex64::new(1.0, 0.0); 8];
        vals[3] = Complex64::new(f64::NAN, 0.0);
        assert!(Field::new(g, Space::Physical, vals).is_err(), "NaN must be rejected");
    }

    #[test]
    fn coords_span_the_centered_box() {
        let g = GridSpec::new(1, 8, 4.0).unwrap();
        assert_eq!(g.coord(0), -2.0);
        assert_eq!(g.coord(4), 0.0);
        assert_eq!(g.coord(7), 1.5);
        assert!((g.spacing() - 0.5).abs() < 1e-15);
    }
}

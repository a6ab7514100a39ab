//! Periodic-box grids, discrete Fourier transforms, frequency lattices, the
//! fractional-Laplacian symbol and grid-quadrature norms.
//!
//! Conventions, fixed once for the whole crate:
//!
//! - Physical points are `x_j = j L/N` per axis, `j = 0..N`.
//! - The frequency lattice is `ξ_k = 2πk/L` with `k` in the symmetric integer
//!   range `{0, 1, .., N/2-1, -N/2, .., -1}` (exactly one zero mode).
//! - Forward coefficients are the Riemann-sum approximation of the
//!   angular-frequency Fourier transform: `c_k = ΔV Σ_x u(x) e^{-i ξ_k·x}`
//!   with `ΔV = (L/N)^n`, so a field that is well resolved and well localized
//!   has coefficients close to its whole-space transform.
//! - With that scaling, Parseval holds with the physical grid measure:
//!   `Σ_x |u|² ΔV = (2π)^{-n} Σ_k |c_k|² Δξ`, `Δξ = (2π/L)^n`, which is what
//!   [`sobolev_seminorm`] evaluates at `κ = 0`.

use num_complex::Complex64;
use thiserror::Error;

use crate::fft;
use crate::par;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("field values must all be finite")]
    NonFinite,
    #[error(
        "spectral coefficients are not conjugate-symmetric (max asymmetry {max_asym:.3e} \
         vs scale {scale:.3e}); a real inverse transform is not defined"
    )]
    NotConjugateSymmetric { max_asym: f64, scale: f64 },
}

/// A periodic box `[0, L)^n` sampled with `N` points per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    n: usize,
    points_per_axis: usize,
    box_length: f64,
}

impl GridSpec {
    /// Dimension must be 1, 2 or 3; `points_per_axis` even and at least 8.
    pub fn new(n: usize, points_per_axis: usize, box_length: f64) -> Result<Self, SpectralError> {
        if !(1..=3).contains(&n) {
            return Err(SpectralError::InvalidGrid(format!(
                "dimension must be 1, 2 or 3, got {n}"
            )));
        }
        if points_per_axis < 8 || points_per_axis % 2 != 0 {
            return Err(SpectralError::InvalidGrid(format!(
                "points_per_axis must be an even integer >= 8, got {points_per_axis}"
            )));
        }
        if !(box_length.is_finite() && box_length > 0.0) {
            return Err(SpectralError::InvalidGrid(format!(
                "box_length must be a positive real, got {box_length}"
            )));
        }
        Ok(Self { n, points_per_axis, box_length })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn points_per_axis(&self) -> usize {
        self.points_per_axis
    }

    pub fn box_length(&self) -> f64 {
        self.box_length
    }

    /// Total number of grid points / lattice modes.
    pub fn num_points(&self) -> usize {
        self.points_per_axis.pow(self.n as u32)
    }

    /// Physical cell volume `ΔV = (L/N)^n`.
    pub fn cell_volume(&self) -> f64 {
        (self.box_length / self.points_per_axis as f64).powi(self.n as i32)
    }

    /// Box volume `L^n`.
    pub fn volume(&self) -> f64 {
        self.box_length.powi(self.n as i32)
    }

    pub fn dims(&self) -> Vec<usize> {
        vec![self.points_per_axis; self.n]
    }

    /// Signed integer wavenumber for axis index `i` in `0..N`.
    #[inline]
    pub fn k_of_index(&self, i: usize) -> i64 {
        let np = self.points_per_axis;
        if i < np / 2 {
            i as i64
        } else {
            i as i64 - np as i64
        }
    }

    /// Decompose a linear (row-major) index into per-axis indices.
    #[inline]
    pub fn axis_indices(&self, idx: usize) -> [usize; 3] {
        let np = self.points_per_axis;
        let mut out = [0usize; 3];
        let mut rem = idx;
        for a in (0..self.n).rev() {
            out[a] = rem % np;
            rem /= np;
        }
        out
    }

    /// Frequency vector `ξ` of a lattice mode.
    #[inline]
    pub fn xi(&self, idx: usize) -> [f64; 3] {
        let ix = self.axis_indices(idx);
        let base = 2.0 * std::f64::consts::PI / self.box_length;
        let mut out = [0.0; 3];
        for a in 0..self.n {
            out[a] = base * self.k_of_index(ix[a]) as f64;
        }
        out
    }

    /// Frequency magnitude `|ξ|` of a lattice mode.
    #[inline]
    pub fn xi_norm(&self, idx: usize) -> f64 {
        let xi = self.xi(idx);
        (xi[0] * xi[0] + xi[1] * xi[1] + xi[2] * xi[2]).sqrt()
    }

    /// Largest `|ξ|` on the lattice (at the Nyquist corner).
    pub fn xi_max(&self) -> f64 {
        let base = 2.0 * std::f64::consts::PI / self.box_length;
        let kmax = (self.points_per_axis / 2) as f64;
        base * kmax * (self.n as f64).sqrt()
    }

    /// Physical coordinates of grid point `idx`.
    #[inline]
    pub fn point(&self, idx: usize) -> [f64; 3] {
        let ix = self.axis_indices(idx);
        let dx = self.box_length / self.points_per_axis as f64;
        let mut out = [0.0; 3];
        for a in 0..self.n {
            out[a] = dx * ix[a] as f64;
        }
        out
    }

    /// Linear index of the mode whose per-axis indices are given.
    #[inline]
    pub fn linear_index(&self, ix: &[usize]) -> usize {
        let np = self.points_per_axis;
        let mut idx = 0usize;
        for a in 0..self.n {
            idx = idx * np + ix[a];
        }
        idx
    }
}

/// Real-valued samples over the grid points.
#[derive(Debug, Clone)]
pub struct RealField {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl RealField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, values: vec![0.0; grid.num_points()] }
    }

    /// Sample `f(x)` at every grid point.
    pub fn from_fn<F>(grid: GridSpec, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync + Send,
    {
        let values = par::map_range(grid.num_points(), |idx| {
            let x = grid.point(idx);
            f(&x[..grid.dim()])
        });
        Self { grid, values }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        par::max_range(self.values.len(), |i| self.values[i].abs())
    }

    /// Spatial mean `(1/L^n) ∫ u dx`.
    pub fn mean(&self) -> f64 {
        par::sum_range(self.values.len(), |i| self.values[i]) / self.values.len() as f64
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|v| c * v).collect() }
    }

    /// Pointwise `a + c·b`; the grids must match.
    pub fn add_scaled(&self, c: f64, other: &RealField) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let values = self
            .values
            .iter()
            .zip(other.values.iter())
            .map(|(a, b)| a + c * b)
            .collect();
        Self { grid: self.grid, values }
    }
}

/// Complex Fourier coefficients over the frequency lattice.
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub grid: GridSpec,
    pub coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: GridSpec) -> Self {
        Self { grid, coeffs: vec![Complex64::new(0.0, 0.0); grid.num_points()] }
    }

    /// Coefficient of the `ξ = 0` mode.
    pub fn zero_mode(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Largest deviation from conjugate symmetry `c_{-k} = conj(c_k)`.
    pub fn max_conjugate_asymmetry(&self) -> f64 {
        let grid = self.grid;
        par::max_range(self.coeffs.len(), |idx| {
            let ix = grid.axis_indices(idx);
            let np = grid.points_per_axis();
            let mut partner = [0usize; 3];
            for a in 0..grid.dim() {
                partner[a] = (np - ix[a]) % np;
            }
            let pidx = grid.linear_index(&partner[..grid.dim()]);
            (self.coeffs[idx] - self.coeffs[pidx].conj()).norm()
        })
    }

    pub fn max_abs(&self) -> f64 {
        par::max_range(self.coeffs.len(), |i| self.coeffs[i].norm())
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self { grid: self.grid, coeffs: self.coeffs.iter().map(|z| c * z).collect() }
    }

    pub fn add_scaled(&self, c: f64, other: &SpectralField) -> Self {
        assert_eq!(self.grid, other.grid, "grid mismatch");
        let coeffs = self
            .coeffs
            .iter()
            .zip(other.coeffs.iter())
            .map(|(a, b)| a + c * b)
            .collect();
        Self { grid: self.grid, coeffs }
    }
}

/// Forward DFT with the measure-weighted normalization described at module
/// level. Total on finite inputs.
pub fn forward_transform(u: &RealField) -> SpectralField {
    let grid = u.grid;
    let mut data: Vec<Complex64> =
        u.values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    fft::fft_nd(&mut data, &grid.dims(), false);
    let dv = grid.cell_volume();
    par::for_each_indexed(&mut data, |_, z| *z *= dv);
    SpectralField { grid, coeffs: data }
}

/// Inverse of [`forward_transform`]. Rejects coefficient arrays that are not
/// conjugate-symmetric (up to roundoff), since those have no real preimage.
pub fn inverse_transform(uhat: &SpectralField) -> Result<RealField, SpectralError> {
    let scale = uhat.max_abs();
    let asym = uhat.max_conjugate_asymmetry();
    if asym > 1e-8 * scale.max(f64::MIN_POSITIVE) {
        return Err(SpectralError::NotConjugateSymmetric { max_asym: asym, scale });
    }
    Ok(inverse_transform_unchecked(uhat))
}

/// Inverse transform that takes the real part without the symmetry check.
/// Used on fields that are transforms of real data by construction.
pub fn inverse_transform_unchecked(uhat: &SpectralField) -> RealField {
    let grid = uhat.grid;
    let mut data = uhat.coeffs.clone();
    fft::fft_nd(&mut data, &grid.dims(), true);
    let inv_vol = 1.0 / grid.volume();
    let values = par::map_range(data.len(), |i| data[i].re * inv_vol);
    RealField { grid, values }
}

/// Multiplier array of the fractional Laplacian `(-Δ)^s`: entry `|ξ|^{2s}`.
///
/// The zero mode is 0 for `s > 0` (the operator annihilates constants) and 1
/// for `s = 0` (the identity), matching the operator limit rather than the
/// literal `0^0`.
pub fn frac_symbol(grid: &GridSpec, s: f64) -> Vec<f64> {
    assert!(s >= 0.0, "fractional order must be nonnegative");
    let g = *grid;
    par::map_range(g.num_points(), |idx| {
        let r = g.xi_norm(idx);
        if r == 0.0 {
            if s == 0.0 {
                1.0
            } else {
                0.0
            }
        } else {
            r.powf(2.0 * s)
        }
    })
}

/// Grid realization of the `L^m` norm: `(Σ |u|^m ΔV)^{1/m}`, or the max for
/// `m = ∞`.
pub fn grid_norm(u: &RealField, m: f64) -> f64 {
    assert!(m >= 1.0, "L^m norms need m >= 1");
    if m.is_infinite() {
        return u.max_abs();
    }
    let dv = u.grid.cell_volume();
    let vals = &u.values;
    let total = if m == 2.0 {
        par::sum_range(vals.len(), |i| vals[i] * vals[i])
    } else if m == 1.0 {
        par::sum_range(vals.len(), |i| vals[i].abs())
    } else {
        par::sum_range(vals.len(), |i| vals[i].abs().powf(m))
    };
    (total * dv).powf(1.0 / m)
}

/// Homogeneous Sobolev seminorm `|U|_{Ḣ^κ}` in Plancherel form:
/// `((2π)^{-n} Σ |ξ|^{2κ} |c_k|² Δξ)^{1/2}`. At `κ = 0` this equals
/// [`grid_norm`] with `m = 2` up to roundoff.
pub fn sobolev_seminorm(uhat: &SpectralField, kappa: f64) -> f64 {
    assert!(kappa >= 0.0, "Sobolev order must be nonnegative");
    let grid = uhat.grid;
    let n = grid.dim() as i32;
    let measure = (2.0 * std::f64::consts::PI).powi(-n)
        * (2.0 * std::f64::consts::PI / grid.box_length()).powi(n);
    let coeffs = &uhat.coeffs;
    let total = par::sum_range(coeffs.len(), |i| {
        let w = if kappa == 0.0 {
            1.0
        } else {
            let r = grid.xi_norm(i);
            if r == 0.0 {
                0.0
            } else {
                r.powf(2.0 * kappa)
            }
        };
        w * coeffs[i].norm_sqr()
    });
    (total * measure).sqrt()
}

/// Spectral gradient components `∂_a u`, computed through the `iξ_a`
/// multipliers. The Nyquist mode is zeroed per axis (its derivative has no
/// real representation on the grid).
pub fn gradient(u: &RealField) -> Vec<RealField> {
    let uhat = forward_transform(u);
    let grid = u.grid;
    let np = grid.points_per_axis();
    (0..grid.dim())
        .map(|axis| {
            let mut dh = uhat.clone();
            par::for_each_indexed(&mut dh.coeffs, |idx, c| {
                let ix = grid.axis_indices(idx);
                if ix[axis] == np / 2 {
                    *c = Complex64::new(0.0, 0.0);
                } else {
                    let xi = grid.xi(idx);
                    *c *= Complex64::new(0.0, xi[axis]);
                }
            });
            inverse_transform_unchecked(&dh)
        })
        .collect()
}

/// Pointwise Euclidean magnitude of the gradient, `|∇u|(x)`.
pub fn gradient_magnitude(u: &RealField) -> RealField {
    let comps = gradient(u);
    let mut out = RealField::zeros(u.grid);
    for c in &comps {
        for (o, v) in out.values.iter_mut().zip(c.values.iter()) {
            *o += v * v;
        }
    }
    for o in out.values.iter_mut() {
        *o = o.sqrt();
    }
    out
}

/// Pointwise Frobenius magnitude of the Hessian, `|∇²u|(x)`, through the
/// `-ξ_a ξ_b` multipliers.
pub fn hessian_magnitude(u: &RealField) -> RealField {
    let uhat = forward_transform(u);
    let grid = u.grid;
    let np = grid.points_per_axis();
    let mut out = RealField::zeros(grid);
    for a in 0..grid.dim() {
        for b in a..grid.dim() {
            let mut dh = uhat.clone();
            par::for_each_indexed(&mut dh.coeffs, |idx, c| {
                let ix = grid.axis_indices(idx);
                if ix[a] == np / 2 || ix[b] == np / 2 {
                    *c = Complex64::new(0.0, 0.0);
                } else {
                    let xi = grid.xi(idx);
                    *c *= -xi[a] * xi[b];
                }
            });
            let comp = inverse_transform_unchecked(&dh);
            // off-diagonal entries appear twice in the Frobenius sum
            let mult = if a == b { 1.0 } else { 2.0 };
            for (o, v) in out.values.iter_mut().zip(comp.values.iter()) {
                *o += mult * v * v;
            }
        }
    }
    for o in out.values.iter_mut() {
        *o = o.sqrt();
    }
    out
}

/// Zero every mode with any axis wavenumber above `N/3` (the two-thirds
/// dealiasing rule). Idempotent.
pub fn apply_two_thirds(uhat: &mut SpectralField) {
    let grid = uhat.grid;
    let keep = (grid.points_per_axis() / 3) as i64;
    par::for_each_indexed(&mut uhat.coeffs, |idx, c| {
        let ix = grid.axis_indices(idx);
        for a in 0..grid.dim() {
            if grid.k_of_index(ix[a]).abs() > keep {
                *c = Complex64::new(0.0, 0.0);
                return;
            }
        }
    });
}

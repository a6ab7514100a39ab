//! Initial-data presets: realization of configured data on the grid and as
//! radial oracle profiles.

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use num_complex::Complex64;

use crate::config::{DataConfig, DataKind};
use crate::radial::RadialProfile;
use crate::spectral::{inverse_transform_unchecked, GridSpec, RealField, SpectralField};

/// Warnings produced while realizing data (for example Gaussian tails above
/// the boundary bound).
pub type Warnings = Vec<String>;

fn center_of(grid: &GridSpec, cfg: &DataConfig) -> [f64; 3] {
    let mut c = [grid.box_length() / 2.0; 3];
    if let Some(xs) = &cfg.center {
        for (i, &x) in xs.iter().take(3).enumerate() {
            c[i] = x;
        }
    }
    c
}

/// Minimum-image displacement on the periodic box.
#[inline]
fn wrapped(d: f64, len: f64) -> f64 {
    let mut d = d % len;
    if d > len / 2.0 {
        d -= len;
    } else if d < -len / 2.0 {
        d += len;
    }
    d
}

/// Sample a preset on the grid. `seed` feeds the random preset only.
pub fn realize(grid: &GridSpec, cfg: &DataConfig, seed: u64) -> (RealField, Warnings) {
    let mut warnings = Vec::new();
    let center = center_of(grid, cfg);
    let len = grid.box_length();
    let field = match cfg.kind {
        DataKind::Zero => RealField::zeros(*grid),
        DataKind::Gaussian { amplitude, width } => {
            // boundary tail check: the data should be compact "for grid
            // purposes" inside the box
            let tail = (-(len / 2.0) * (len / 2.0) / (2.0 * width * width)).exp();
            if tail > 1e-10 {
                warnings.push(format!(
                    "gaussian tail at the boundary is {tail:.2e} (above 1e-10); \
                     enlarge the box or shrink the width"
                ));
            }
            RealField::from_fn(*grid, move |x| {
                let mut r2 = 0.0;
                for (a, &xa) in x.iter().enumerate() {
                    let d = wrapped(xa - center[a], len);
                    r2 += d * d;
                }
                amplitude * (-r2 / (2.0 * width * width)).exp()
            })
        }
        DataKind::Bump { amplitude, radius } => {
            if radius >= len / 2.0 {
                warnings.push(format!(
                    "bump radius {radius} does not fit strictly inside the box (length {len})"
                ));
            }
            RealField::from_fn(*grid, move |x| {
                let mut r2 = 0.0;
                for (a, &xa) in x.iter().enumerate() {
                    let d = wrapped(xa - center[a], len);
                    r2 += d * d;
                }
                let s = r2 / (radius * radius);
                if s >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / (1.0 - s)).exp()
                }
            })
        }
        DataKind::BandLimitedRandom { amplitude, max_mode } => {
            band_limited_random(grid, amplitude, max_mode, seed)
        }
    };
    (field, warnings)
}

/// Random field supported on modes with every `|k_a| ≤ max_mode`, scaled so
/// its max-norm equals `amplitude`. Deterministic in `seed`.
fn band_limited_random(grid: &GridSpec, amplitude: f64, max_mode: usize, seed: u64) -> RealField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut hat = SpectralField::zeros(*grid);
    let np = grid.points_per_axis();
    let band = max_mode as i64;
    // iterate modes in index order; assign each conjugate pair once, from
    // its lower linear index, so the draw sequence is reproducible
    for idx in 0..grid.num_points() {
        let ix = grid.axis_indices(idx);
        let in_band = (0..grid.dim()).all(|a| grid.k_of_index(ix[a]).abs() <= band);
        if !in_band || idx == 0 {
            continue;
        }
        let mut partner = [0usize; 3];
        for a in 0..grid.dim() {
            partner[a] = (np - ix[a]) % np;
        }
        let pidx = grid.linear_index(&partner[..grid.dim()]);
        if pidx < idx {
            continue;
        }
        let re = rng.gen_range(-1.0..1.0);
        let im = if pidx == idx { 0.0 } else { rng.gen_range(-1.0..1.0) };
        hat.coeffs[idx] = Complex64::new(re, im);
        hat.coeffs[pidx] = Complex64::new(re, -im);
    }
    let mut field = inverse_transform_unchecked(&hat);
    let peak = field.max_abs();
    if peak > 0.0 {
        let s = amplitude / peak;
        for v in field.values.iter_mut() {
            *v *= s;
        }
    }
    field
}

/// Radial oracle profile of a preset. Only presets with a closed-form radial
/// transform qualify: `zero` and `gaussian` (interpreted as the physical
/// Gaussian whose transform is again Gaussian).
pub fn oracle_profile(
    n: usize,
    cfg: &DataConfig,
    r_max_override: Option<f64>,
) -> Result<RadialProfile, String> {
    let mut profile = match cfg.kind {
        DataKind::Zero => RadialProfile::zero(),
        DataKind::Gaussian { amplitude, width } => {
            RadialProfile::from_physical_gaussian(n, amplitude, width)
        }
        _ => {
            return Err(
                "oracle mode supports zero and gaussian presets only (radial closed form)".into()
            )
        }
    };
    if let Some(r_max) = r_max_override {
        if !profile.is_zero() {
            profile.tail_bound = profile.eval(r_max).abs()
                / profile.eval(0.0).abs().max(f64::MIN_POSITIVE);
            profile.r_max = r_max;
        }
    }
    Ok(profile)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{forward_transform, grid_norm};

    fn grid() -> GridSpec {
        GridSpec::new(2, 32, 20.0).unwrap()
    }

    #[test]
    fn gaussian_centered_and_positive() {
        let cfg = DataConfig { kind: DataKind::Gaussian { amplitude: 2.0, width: 1.2 }, center: None };
        let (f, warns) = realize(&grid(), &cfg, 0);
        assert!(warns.is_empty());
        assert!(f.values.iter().all(|&v| v >= 0.0));
        assert!((f.max_abs() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn gaussian_tail_warning() {
        let cfg = DataConfig { kind: DataKind::Gaussian { amplitude: 1.0, width: 8.0 }, center: None };
        let (_, warns) = realize(&grid(), &cfg, 0);
        assert!(!warns.is_empty());
    }

    #[test]
    fn bump_is_compact_and_smooth_spectrum() {
        let cfg = DataConfig { kind: DataKind::Bump { amplitude: 3.0, radius: 4.0 }, center: None };
        let (f, warns) = realize(&grid(), &cfg, 0);
        assert!(warns.is_empty());
        // compact support strictly inside: boundary row is zero
        let g = grid();
        for i in 0..g.points_per_axis() {
            let idx = g.linear_index(&[0, i]);
            assert_eq!(f.values[idx], 0.0);
        }
        assert!((f.max_abs() - 3.0).abs() < 1e-9);
        assert!(f.values.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn band_limited_random_is_deterministic_and_band_limited() {
        let g = grid();
        let cfg = DataConfig {
            kind: DataKind::BandLimitedRandom { amplitude: 1.0, max_mode: 3 },
            center: None,
        };
        let (f1, _) = realize(&g, &cfg, 42);
        let (f2, _) = realize(&g, &cfg, 42);
        assert_eq!(f1.values, f2.values);
        let (f3, _) = realize(&g, &cfg, 43);
        assert_ne!(f1.values, f3.values);
        assert!((f1.max_abs() - 1.0).abs() < 1e-12);
        // no energy beyond the band
        let hat = forward_transform(&f1);
        for idx in 0..g.num_points() {
            let ix = g.axis_indices(idx);
            let out = (0..2).any(|a| g.k_of_index(ix[a]).abs() > 3);
            if out {
                assert!(hat.coeffs[idx].norm() < 1e-10 * grid_norm(&f1, 2.0));
            }
        }
    }

    #[test]
    fn oracle_profile_rules() {
        let cfg = DataConfig { kind: DataKind::Gaussian { amplitude: 1.0, width: 2.0 }, center: None };
        let p = oracle_profile(2, &cfg, None).unwrap();
        assert!(!p.is_zero());
        let bump = DataConfig { kind: DataKind::Bump { amplitude: 1.0, radius: 1.0 }, center: None };
        assert!(oracle_profile(2, &bump, None).is_err());
        let with_r = oracle_profile(2, &cfg, Some(3.0)).unwrap();
        assert_eq!(with_r.r_max, 3.0);
    }
}

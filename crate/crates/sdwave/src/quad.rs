//! Adaptive Gauss-Kronrod quadrature on a finite interval.
//!
//! A 7-point Gauss / 15-point Kronrod pair supplies the per-panel value and
//! error estimate; panels are kept in a worst-first heap and bisected until
//! the accumulated error estimate drops below the requested relative
//! tolerance. Callers can seed the subdivision with breakpoints, which is
//! essential for integrands concentrated in a tiny sub-interval (the radial
//! decay integrals peak near the origin at large times).

use thiserror::Error;

use crate::par;

/// Kronrod abscissae on [0, 1] side (symmetric), G7K15.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
/// Kronrod weights matching `XGK`.
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
/// Gauss weights for the odd-index Kronrod nodes.
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

#[derive(Debug, Error)]
pub enum QuadError {
    #[error(
        "adaptive quadrature stalled at {panels} panels: value {value:.6e}, \
         error estimate {error:.3e} above tolerance {tol:.3e}"
    )]
    NonConvergence { value: f64, error: f64, panels: usize, tol: f64 },
    #[error("integrand returned a non-finite value at x = {x}")]
    NonFinite { x: f64 },
}

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    /// Accumulated Kronrod-minus-Gauss error estimate.
    pub error: f64,
    pub panels: usize,
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Result<Panel, QuadError> {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let mut kron = 0.0;
    let mut gauss = 0.0;
    for (i, (&x, &wk)) in XGK.iter().zip(WGK.iter()).enumerate() {
        let (x1, x2) = (mid - half * x, mid + half * x);
        let f1 = f(x1);
        if !f1.is_finite() {
            return Err(QuadError::NonFinite { x: x1 });
        }
        let fsum = if x == 0.0 {
            f1
        } else {
            let f2 = f(x2);
            if !f2.is_finite() {
                return Err(QuadError::NonFinite { x: x2 });
            }
            f1 + f2
        };
        kron += wk * fsum;
        if i % 2 == 1 {
            gauss += WG[i / 2] * fsum;
        }
    }
    let value = kron * half;
    let error = ((kron - gauss) * half).abs();
    Ok(Panel { a, b, value, error })
}

/// Integrate `f` over `[a, b]` to relative tolerance `rel_tol`.
///
/// `breakpoints` are interior seed points (unsorted duplicates tolerated);
/// refinement always bisects the panel with the largest error estimate, with
/// ties broken by position so the subdivision sequence is deterministic.
pub fn integrate<F>(
    f: &F,
    a: f64,
    b: f64,
    breakpoints: &[f64],
    rel_tol: f64,
    max_panels: usize,
) -> Result<QuadResult, QuadError>
where
    F: Fn(f64) -> f64 + Sync,
{
    assert!(b > a, "empty integration interval");
    let mut edges: Vec<f64> = breakpoints
        .iter()
        .copied()
        .filter(|x| *x > a && *x < b)
        .chain([a, b])
        .collect();
    edges.sort_by(|p, q| p.partial_cmp(q).unwrap());
    edges.dedup();

    let seeds: Vec<Result<Panel, QuadError>> =
        par::map_range(edges.len() - 1, |i| gk15(f, edges[i], edges[i + 1]));
    let mut panels = Vec::with_capacity(seeds.len());
    for s in seeds {
        panels.push(s?);
    }

    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let err: f64 = panels.iter().map(|p| p.error).sum();
        let tol = rel_tol * total.abs().max(f64::MIN_POSITIVE);
        if err <= tol {
            return Ok(QuadResult { value: total, error: err, panels: panels.len() });
        }
        if panels.len() >= max_panels {
            return Err(QuadError::NonConvergence {
                value: total,
                error: err,
                panels: panels.len(),
                tol,
            });
        }
        // split the worst panel (ties -> leftmost, for determinism)
        let mut worst = 0;
        for (i, p) in panels.iter().enumerate() {
            if p.error > panels[worst].error
                || (p.error == panels[worst].error && p.a < panels[worst].a)
            {
                worst = i;
            }
        }
        let p = panels.swap_remove(worst);
        let mid = 0.5 * (p.a + p.b);
        if mid <= p.a || mid >= p.b {
            // panel at floating-point resolution; give up on refining it
            return Err(QuadError::NonConvergence {
                value: panels.iter().map(|q| q.value).sum::<f64>() + p.value,
                error: panels.iter().map(|q| q.error).sum::<f64>() + p.error,
                panels: panels.len() + 1,
                tol: rel_tol,
            });
        }
        panels.push(gk15(f, p.a, mid)?);
        panels.push(gk15(f, mid, p.b)?);
    }
}

/// Geometric seed points `hi·ratio^k` descending from `hi` toward `lo_floor`,
/// for integrands concentrated near zero.
pub fn geometric_breakpoints(hi: f64, lo_floor: f64, ratio: f64) -> Vec<f64> {
    assert!(hi > 0.0 && ratio > 0.0 && ratio < 1.0);
    let mut out = Vec::new();
    let mut x = hi * ratio;
    while x > lo_floor {
        out.push(x);
        x *= ratio;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn polynomial_is_exact() {
        // K15 integrates degree-29 polynomials exactly; x^7 is child's play
        let r = integrate(&|x: f64| x.powi(7), 0.0, 1.0, &[], 1e-12, 100).unwrap();
        assert_relative_eq!(r.value, 0.125, max_relative = 1e-14);
    }

    #[test]
    fn gaussian_matches_closed_form() {
        let r = integrate(&|x: f64| (-x * x).exp(), 0.0, 10.0, &[], 1e-10, 1000).unwrap();
        assert_relative_eq!(r.value, std::f64::consts::PI.sqrt() / 2.0, max_relative = 1e-10);
    }

    #[test]
    fn narrow_spike_needs_breakpoints() {
        // spike of width 1e-6 near the origin inside [0, 1]
        let f = |x: f64| (-(x / 1e-6).powi(2)).exp();
        let exact = std::f64::consts::PI.sqrt() / 2.0 * 1e-6;
        let seeds = geometric_breakpoints(1.0, 1e-9, 0.25);
        let r = integrate(&f, 0.0, 1.0, &seeds, 1e-8, 4000).unwrap();
        assert_relative_eq!(r.value, exact, max_relative = 1e-8);
    }

    #[test]
    fn oscillatory_integrand_converges() {
        // ∫₀^1 sin(200x)² dx = 1/2 - sin(400)/800
        let f = |x: f64| (200.0 * x).sin().powi(2);
        let exact = 0.5 - (400.0f64).sin() / 800.0;
        let r = integrate(&f, 0.0, 1.0, &[], 1e-10, 4000).unwrap();
        assert_relative_eq!(r.value, exact, max_relative = 1e-10);
    }

    #[test]
    fn reports_nonconvergence() {
        // |x - 1/3|^{-1/2} is integrable but the panel cap is tiny
        let f = |x: f64| (x - 1.0 / 3.0).abs().sqrt().recip().min(1e12);
        let err = integrate(&f, 0.0, 1.0, &[], 1e-12, 8);
        assert!(matches!(err, Err(QuadError::NonConvergence { .. })));
    }
}

//! Closed-form calculators: critical exponents, admissible `(m, p)` ranges,
//! blow-up thresholds, predicted decay-rate tables, Gagliardo-Nirenberg
//! exponents and the blow-up data-sign functional.
//!
//! Thresholds and rate exponents are computed in exact rational arithmetic
//! (`σ` and `m` enter as rationals), so golden values like `3/(3-m)` or
//! `{2}` at boundary dimensions are reproduced exactly instead of through
//! float comparisons. Unbounded interval ends are represented explicitly.
//!
//! The four damping regimes are
//!
//! - `σ = 1/2` (critical case, `L^m` framework available),
//! - `σ = 1` (visco-elastic),
//! - `σ ∈ (0, 1/2)` (parabolic-like),
//! - `σ ∈ (1/2, 1)` (hyperbolic-like).

use num_rational::Ratio;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::kernels::ModelSpec;
use crate::spectral::{
    forward_transform, grid_norm, gradient_magnitude, hessian_magnitude, sobolev_seminorm,
    RealField,
};

/// Exact rational scalar used by every calculator in this module.
pub type Q = Ratio<i64>;

/// Shorthand for `a/b`.
pub fn q(a: i64, b: i64) -> Q {
    Ratio::new(a, b)
}

#[derive(Debug, Error)]
pub enum ExponentError {
    #[error("argument outside domain: {0}")]
    Domain(String),
    #[error("outside theorem hypotheses: {0}")]
    Hypothesis(String),
}

/// Damping-order regime.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaRegime {
    /// `σ = 1/2`
    Half,
    /// `σ = 1`
    Visco,
    /// `σ ∈ (0, 1/2)`
    Parabolic,
    /// `σ ∈ (1/2, 1)`
    Hyperbolic,
}

impl SigmaRegime {
    pub fn label(&self) -> &'static str {
        match self {
            SigmaRegime::Half => "half",
            SigmaRegime::Visco => "visco",
            SigmaRegime::Parabolic => "parabolic_like",
            SigmaRegime::Hyperbolic => "hyperbolic_like",
        }
    }
}

/// Classify `σ ∈ (0, 1]`.
pub fn sigma_regime(sigma: Q) -> Result<SigmaRegime, ExponentError> {
    if sigma <= Q::zero() || sigma > Q::one() {
        return Err(ExponentError::Domain(format!("sigma must lie in (0,1], got {sigma}")));
    }
    let half = q(1, 2);
    Ok(if sigma == half {
        SigmaRegime::Half
    } else if sigma == Q::one() {
        SigmaRegime::Visco
    } else if sigma < half {
        SigmaRegime::Parabolic
    } else {
        SigmaRegime::Hyperbolic
    })
}

fn check_m(m: Q) -> Result<(), ExponentError> {
    if m <= Q::one() || m > q(2, 1) {
        return Err(ExponentError::Domain(format!("m must lie in (1,2], got {m}")));
    }
    Ok(())
}

/// Global-existence threshold formula per regime, without the per-theorem
/// dimension hypotheses. Needs `n ≥ 2`.
fn threshold_formula(sigma: Q, n: u32) -> Result<Q, ExponentError> {
    let regime = sigma_regime(sigma)?;
    if n < 2 {
        return Err(ExponentError::Domain(format!("n must be at least 2, got {n}")));
    }
    let nq = q(n as i64, 1);
    Ok(match regime {
        SigmaRegime::Half => Q::one() + q(2, 1) / (nq - Q::one()),
        SigmaRegime::Visco => Q::one() + q(3, 1) / (nq - Q::one()),
        SigmaRegime::Parabolic => Q::one() + q(2, 1) / (nq - q(2, 1) * sigma),
        SigmaRegime::Hyperbolic => {
            Q::one() + (Q::one() + q(2, 1) * sigma) / (nq - Q::one())
        }
    })
}

/// Strict lower bound for `p` in the four global-existence theorems.
///
/// Rejects dimensions outside the corresponding theorem hypotheses:
/// `n ∈ {2,3,4}` for `σ = 1/2` and `σ ∈ (0,1/2)`, `n ≥ 2` otherwise. `m`
/// enters only at `σ = 1/2`; the other regimes are `m = 2` statements.
pub fn existence_threshold(sigma: Q, n: u32, m: Q) -> Result<Q, ExponentError> {
    check_m(m)?;
    let regime = sigma_regime(sigma)?;
    match regime {
        SigmaRegime::Half if !(2..=4).contains(&n) => {
            return Err(ExponentError::Hypothesis(format!(
                "sigma = 1/2 requires n in {{2,3,4}}, got n = {n}"
            )));
        }
        SigmaRegime::Parabolic if !(2..=4).contains(&n) => {
            return Err(ExponentError::Hypothesis(format!(
                "sigma in (0,1/2) requires n in {{2,3,4}}, got n = {n}"
            )));
        }
        SigmaRegime::Visco | SigmaRegime::Hyperbolic if n < 2 => {
            return Err(ExponentError::Hypothesis(format!(
                "sigma in (1/2,1] requires n >= 2, got n = {n}"
            )));
        }
        _ => {}
    }
    threshold_formula(sigma, n)
}

/// Nonexistence threshold, with both branch values where defined.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlowupThreshold {
    pub value: Q,
    /// `1 + 2/(n - 2σ)`, defined for `σ ∈ (0, 1/2]`.
    pub parabolic_branch: Option<Q>,
    /// `1 + 2/(n - 1)`, defined for `σ ∈ [1/2, 1]`.
    pub hyperbolic_branch: Option<Q>,
    /// `Some(true)` exactly at `σ = 1/2`, where both branches coincide.
    pub branches_agree: Option<bool>,
}

/// Blow-up exponent bound: no global solution exists for `1 < p ≤ value`
/// under the positive-data condition.
pub fn blowup_threshold(sigma: Q, n: u32) -> Result<BlowupThreshold, ExponentError> {
    let regime = sigma_regime(sigma)?;
    if n < 2 {
        return Err(ExponentError::Domain(format!("n must be at least 2, got {n}")));
    }
    let nq = q(n as i64, 1);
    let half = q(1, 2);
    let parabolic = if sigma <= half {
        Some(Q::one() + q(2, 1) / (nq - q(2, 1) * sigma))
    } else {
        None
    };
    let hyperbolic = if sigma >= half {
        Some(Q::one() + q(2, 1) / (nq - Q::one()))
    } else {
        None
    };
    let value = match regime {
        SigmaRegime::Parabolic | SigmaRegime::Half => parabolic.unwrap(),
        _ => hyperbolic.unwrap(),
    };
    let branches_agree = if sigma == half {
        Some(parabolic == hyperbolic)
    } else {
        None
    };
    Ok(BlowupThreshold { value, parabolic_branch: parabolic, hyperbolic_branch: hyperbolic, branches_agree })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GapReport {
    pub existence: Q,
    pub blowup: Q,
    /// `existence - blowup`: zero for `σ ≤ 1/2`, `(2σ-1)/(n-1)` above.
    pub gap: Q,
}

/// Width of the gap between the existence and nonexistence thresholds.
pub fn gap_report(sigma: Q, n: u32) -> Result<GapReport, ExponentError> {
    let existence = threshold_formula(sigma, n)?;
    let blowup = blowup_threshold(sigma, n)?.value;
    Ok(GapReport { existence, blowup, gap: existence - blowup })
}

/// One end of a `p`-interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PBound {
    Finite(Q),
    Unbounded,
}

/// An interval of admissible powers with explicit end openness.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PInterval {
    pub lo: Q,
    pub lo_closed: bool,
    pub hi: PBound,
    /// Meaningful only when `hi` is finite.
    pub hi_closed: bool,
}

/// A set of admissible powers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PSet {
    Empty,
    Point(Q),
    Range(PInterval),
}

impl std::fmt::Display for PSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            PSet::Empty => write!(f, "empty"),
            PSet::Point(p) => write!(f, "{{{p}}}"),
            PSet::Range(iv) => {
                write!(f, "{}{}, ", if iv.lo_closed { '[' } else { '(' }, iv.lo)?;
                match iv.hi {
                    PBound::Finite(h) => write!(f, "{}{}", h, if iv.hi_closed { ']' } else { ')' }),
                    PBound::Unbounded => write!(f, "inf)"),
                }
            }
        }
    }
}

/// Admissible exponents for one `(σ, n, m)` triple.
#[derive(Debug, Clone)]
pub struct RangeReport {
    pub sigma: Q,
    pub n: u32,
    pub m: Q,
    pub existence_threshold: Q,
    /// The Gagliardo-Nirenberg integrability constraint, a closed interval
    /// (possibly unbounded above or empty) before the threshold is applied.
    pub integrability: PSet,
    /// `integrability ∩ {p > existence_threshold}`.
    pub admissible: PSet,
    pub regime: SigmaRegime,
}

/// Intersect the regime's integrability interval with the strict existence
/// threshold. Accepts any `n ≥ 2`; dimensions beyond the theorem hypotheses
/// simply produce empty sets.
pub fn admissible_range(sigma: Q, n: u32, m: Q) -> Result<RangeReport, ExponentError> {
    check_m(m)?;
    let regime = sigma_regime(sigma)?;
    if n < 2 {
        return Err(ExponentError::Domain(format!("n must be at least 2, got {n}")));
    }
    if regime != SigmaRegime::Half && m != q(2, 1) {
        return Err(ExponentError::Hypothesis(format!(
            "m = {m} is only available at sigma = 1/2; the other regimes fix m = 2"
        )));
    }
    let nq = q(n as i64, 1);
    // lower GN endpoint and the product k·m of derivative order and base
    // integrability, which decides boundedness of the GN window
    let (lo, km) = match regime {
        SigmaRegime::Half => (m, m),                         // k = 1
        SigmaRegime::Visco => (q(2, 1), q(4, 1)),            // k = 2, m = 2
        SigmaRegime::Parabolic => (q(2, 1), q(2, 1)),        // k = 1, m = 2
        SigmaRegime::Hyperbolic => (q(2, 1), q(4, 1) * sigma), // κ = 2σ, m = 2
    };
    let integrability = if nq <= km {
        PSet::Range(PInterval { lo, lo_closed: true, hi: PBound::Unbounded, hi_closed: false })
    } else {
        // q = mp must stay inside the GN window q ≤ nm/(n-km), so p ≤ n/(n-km)
        let hi = nq / (nq - km);
        if hi < lo {
            PSet::Empty
        } else if hi == lo {
            PSet::Point(lo)
        } else {
            PSet::Range(PInterval { lo, lo_closed: true, hi: PBound::Finite(hi), hi_closed: true })
        }
    };
    let threshold = threshold_formula(sigma, n)?;
    let admissible = intersect_above(integrability, threshold);
    Ok(RangeReport {
        sigma,
        n,
        m,
        existence_threshold: threshold,
        integrability,
        admissible,
        regime,
    })
}

/// `set ∩ {p > threshold}` (strict).
fn intersect_above(set: PSet, threshold: Q) -> PSet {
    match set {
        PSet::Empty => PSet::Empty,
        PSet::Point(p) => {
            if p > threshold {
                PSet::Point(p)
            } else {
                PSet::Empty
            }
        }
        PSet::Range(iv) => {
            let (lo, lo_closed) = if threshold >= iv.lo {
                (threshold, false)
            } else {
                (iv.lo, iv.lo_closed)
            };
            match iv.hi {
                PBound::Unbounded => {
                    PSet::Range(PInterval { lo, lo_closed, hi: PBound::Unbounded, hi_closed: false })
                }
                PBound::Finite(hi) => {
                    if lo > hi || (lo == hi && !(lo_closed && iv.hi_closed)) {
                        PSet::Empty
                    } else if lo == hi {
                        PSet::Point(lo)
                    } else {
                        PSet::Range(PInterval { lo, lo_closed, hi: PBound::Finite(hi), hi_closed: iv.hi_closed })
                    }
                }
            }
        }
    }
}

/// Gagliardo-Nirenberg interpolation exponent `θ_k(q) = (n/k)(1/m - 1/q)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GnTheta {
    pub theta: Q,
    /// True iff `m ≤ q ≤ nm/(n - km)` (upper constraint void when `n ≤ km`)
    /// and `θ ≤ 1`.
    pub admissible: bool,
}

pub fn gn_theta(n: u32, k: Q, m: Q, q_exp: Q) -> Result<GnTheta, ExponentError> {
    if k <= Q::zero() {
        return Err(ExponentError::Domain("derivative order k must be positive".into()));
    }
    if m < Q::one() || m > q(2, 1) {
        return Err(ExponentError::Domain(format!("m must lie in [1,2], got {m}")));
    }
    if q_exp < m {
        return Err(ExponentError::Domain(format!("q must satisfy q >= m, got q = {q_exp}")));
    }
    let nq = q(n as i64, 1);
    let theta = nq / k * (m.recip() - q_exp.recip());
    let upper_ok = nq <= k * m || q_exp <= nq * m / (nq - k * m);
    Ok(GnTheta { theta, admissible: upper_ok && theta <= Q::one() })
}

/// Data class `D_m^k = (L¹ ∩ H^{k,m}) × (L¹ ∩ L^m)`; `k = 0` is plain
/// `L¹ ∩ L^m` on both components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DataClass {
    pub m: Q,
    pub k: Q,
}

impl std::fmt::Display for DataClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.k.is_zero() {
            write!(f, "L1 cap L{}", self.m)
        } else {
            write!(f, "D_{}^{}", self.m, self.k)
        }
    }
}

/// One row of a predicted-rate table: the solution norm decays like
/// `(1+t)^exponent` (times `log(e+t)` when `log_flag` is set) for data in
/// the stated class.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateEntry {
    pub exponent: Q,
    pub log_flag: bool,
    pub data_class: DataClass,
}

/// Predicted linear decay rates for one `(σ, n, m)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RateTable {
    pub sigma: Q,
    pub n: u32,
    pub m: Q,
    /// `‖u‖_{L^m}`
    pub u: RateEntry,
    /// `‖u_t‖_{L^m}`
    pub ut: RateEntry,
    /// `‖∇u‖_{L^m}`
    pub grad: RateEntry,
    /// `‖∇²u‖_{L²}` (visco-elastic case only)
    pub grad2: Option<RateEntry>,
    /// `‖u‖_{Ḣ^{2σ}}` (hyperbolic-like case only)
    pub hdot2sigma: Option<RateEntry>,
}

/// Transcription of the four linear decay theorems.
pub fn predicted_rates(sigma: Q, n: u32, m: Q) -> Result<RateTable, ExponentError> {
    check_m(m)?;
    let regime = sigma_regime(sigma)?;
    if regime != SigmaRegime::Half {
        if m != q(2, 1) {
            return Err(ExponentError::Hypothesis(format!(
                "m = {m} is only available at sigma = 1/2; the decay tables for sigma != 1/2 are L2 based"
            )));
        }
        if n < 2 {
            return Err(ExponentError::Hypothesis(format!(
                "the decay tables for sigma != 1/2 require n >= 2, got n = {n}"
            )));
        }
    } else if n < 1 {
        return Err(ExponentError::Hypothesis("n must be at least 1".into()));
    }
    let nq = q(n as i64, 1);
    let one = Q::one();
    let entry = |exponent: Q, log_flag: bool, k: Q, mm: Q| RateEntry {
        exponent,
        log_flag,
        data_class: DataClass { m: mm, k },
    };
    let table = match regime {
        SigmaRegime::Half => {
            let decay = nq * (one - m.recip());
            RateTable {
                sigma,
                n,
                m,
                u: entry(one - decay, false, q(0, 1), m),
                ut: entry(-decay, false, q(1, 1), m),
                grad: entry(-decay, false, q(1, 1), m),
                grad2: None,
                hdot2sigma: None,
            }
        }
        SigmaRegime::Visco => RateTable {
            sigma,
            n,
            m,
            u: entry(-(nq - q(2, 1)) / q(4, 1), n == 2, q(0, 1), m),
            ut: entry(-nq / q(4, 1), false, q(0, 1), m),
            grad: entry(-nq / q(4, 1), false, q(1, 1), m),
            grad2: Some(entry(-(nq + q(2, 1)) / q(4, 1), false, q(2, 1), m)),
            hdot2sigma: None,
        },
        SigmaRegime::Parabolic => {
            let scale = (one - sigma).recip();
            RateTable {
                sigma,
                n,
                m,
                u: entry(-(nq / q(4, 1) - sigma) * scale, false, q(0, 1), m),
                ut: entry(-(nq / q(4, 1) - sigma) * scale - one, false, q(1, 1), m),
                grad: entry(-((nq + q(2, 1)) / q(4, 1) - sigma) * scale, false, q(1, 1), m),
                grad2: None,
                hdot2sigma: None,
            }
        }
        SigmaRegime::Hyperbolic => {
            let four_sigma = q(4, 1) * sigma;
            RateTable {
                sigma,
                n,
                m,
                u: entry(-(nq - q(2, 1)) / four_sigma, n == 2, q(0, 1), m),
                ut: entry(-nq / four_sigma, false, q(2, 1) * (one - sigma), m),
                grad: entry(-nq / four_sigma, false, q(1, 1), m),
                grad2: None,
                hdot2sigma: Some(entry(
                    -(nq - q(2, 1)) / four_sigma - one,
                    false,
                    q(2, 1) * sigma,
                    m,
                )),
            }
        }
    };
    Ok(table)
}

/// Quantities entering the weighted `X(t)` norm of the fixed-point argument.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum XtQuantity {
    U,
    Ut,
    Grad,
    Grad2,
    /// `Ḣ^{2σ}` seminorm.
    Hdot2Sigma,
}

/// Positive weight powers `e_q` of the `X(t)` norm,
/// `‖w‖_X = sup_τ Σ_q (1+τ)^{e_q} ‖w‖_q(τ)`, as used by the global-existence
/// arguments (the `n = 2` logarithmic factor is dropped). Note the `u_t`
/// weight in the parabolic-like regime is `1`, not the linear-table rate:
/// the Duhamel bookkeeping loses one power there.
pub fn xt_weight_exponents(sigma: f64, n: u32, m: f64) -> Vec<(XtQuantity, f64)> {
    assert!(sigma > 0.0 && sigma <= 1.0);
    let nf = n as f64;
    if (sigma - 0.5).abs() < 1e-12 {
        let d = nf * (1.0 - 1.0 / m);
        vec![(XtQuantity::U, d - 1.0), (XtQuantity::Grad, d), (XtQuantity::Ut, d)]
    } else if (sigma - 1.0).abs() < 1e-12 {
        vec![
            (XtQuantity::U, (nf - 2.0) / 4.0),
            (XtQuantity::Grad, nf / 4.0),
            (XtQuantity::Grad2, (nf + 2.0) / 4.0),
            (XtQuantity::Ut, nf / 4.0),
        ]
    } else if sigma < 0.5 {
        let scale = 1.0 / (1.0 - sigma);
        vec![
            (XtQuantity::U, (nf / 4.0 - sigma) * scale),
            (XtQuantity::Grad, ((nf + 2.0) / 4.0 - sigma) * scale),
            (XtQuantity::Ut, 1.0),
        ]
    } else {
        let four_sigma = 4.0 * sigma;
        vec![
            (XtQuantity::U, (nf - 2.0) / four_sigma),
            (XtQuantity::Grad, nf / four_sigma),
            (XtQuantity::Ut, nf / four_sigma),
            (XtQuantity::Hdot2Sigma, (nf - 2.0) / four_sigma + 1.0),
        ]
    }
}

/// Grid quadrature of `∫ (u₁ + μ(-Δ)^σ u₀) dx`.
///
/// On the torus the fractional term has zero spatial mean (its zero-mode
/// multiplier vanishes), so the value reduces to `∫ u₁ dx`; the whole-space
/// sign condition is honored by keeping data supported well inside the box.
pub fn blowdata_value(model: &ModelSpec, u0: &RealField, u1: &RealField) -> f64 {
    assert_eq!(u0.grid, u1.grid, "fields must share one grid");
    let _ = model.mu; // the (-Δ)^σ u₀ term integrates to zero exactly
    u1.grid.cell_volume() * crate::par::sum_range(u1.values.len(), |i| u1.values[i])
}

/// Data norm `‖(u₀,u₁)‖_{D_m^k} = ‖u₀‖_{L¹} + ‖u₀‖_{H^{k,m}} + ‖u₁‖_{L¹} + ‖u₁‖_{L^m}`
/// with `‖·‖_{H^{k,m}} = ‖·‖_{L^m} + ‖∇^k ·‖_{L^m}`.
///
/// Integer `k` is realized through gradient/Hessian multipliers for any `m`;
/// fractional `k` only has a grid realization at `m = 2` (Plancherel) and is
/// rejected otherwise.
pub fn dm_norm(u0: &RealField, u1: &RealField, m: f64, k: f64) -> Result<f64, ExponentError> {
    assert_eq!(u0.grid, u1.grid, "fields must share one grid");
    if !(m > 1.0 && m <= 2.0) {
        return Err(ExponentError::Domain(format!("m must lie in (1,2], got {m}")));
    }
    if k < 0.0 {
        return Err(ExponentError::Domain(format!("k must be nonnegative, got {k}")));
    }
    let is_integer = k.fract() == 0.0;
    if !is_integer && (m - 2.0).abs() > 1e-12 {
        return Err(ExponentError::Domain(format!(
            "fractional k = {k} requires m = 2 (no grid realization otherwise)"
        )));
    }
    let deriv = if k == 0.0 {
        0.0
    } else if is_integer {
        match k as u32 {
            1 => grid_norm(&gradient_magnitude(u0), m),
            2 => grid_norm(&hessian_magnitude(u0), m),
            other => {
                return Err(ExponentError::Domain(format!(
                    "integer derivative order {other} not supported (max 2)"
                )))
            }
        }
    } else {
        sobolev_seminorm(&forward_transform(u0), k)
    };
    Ok(grid_norm(u0, 1.0) + grid_norm(u0, m) + deriv + grid_norm(u1, 1.0) + grid_norm(u1, m))
}

/// Float value of a rational, for handing exact tables to f64 pipelines.
pub fn to_f64(x: Q) -> f64 {
    *x.numer() as f64 / *x.denom() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::GridSpec;
    use approx::assert_relative_eq;

    #[test]
    fn threshold_examples() {
        assert_eq!(existence_threshold(q(1, 2), 2, q(2, 1)).unwrap(), q(3, 1));
        assert_eq!(existence_threshold(q(1, 1), 3, q(2, 1)).unwrap(), q(5, 2));
        assert_eq!(existence_threshold(q(1, 4), 3, q(2, 1)).unwrap(), q(9, 5)); // 1 + 2/2.5
        assert!(existence_threshold(q(1, 4), 5, q(2, 1)).is_err());
        assert!(existence_threshold(q(3, 2), 3, q(2, 1)).is_err());
    }

    #[test]
    fn threshold_continuity_at_half() {
        // both branch formulas at σ = 1/2 ± 1e-9 straddle the σ = 1/2 value
        let n = 3u32;
        let eps = q(1, 1_000_000_000);
        let below = threshold_formula(q(1, 2) - eps, n).unwrap();
        let at = threshold_formula(q(1, 2), n).unwrap();
        let above = threshold_formula(q(1, 2) + eps, n).unwrap();
        assert!((to_f64(below) - to_f64(at)).abs() < 1e-8);
        assert!((to_f64(above) - to_f64(at)).abs() < 1e-8);
        // and at σ = 1 the hyperbolic formula matches the visco-elastic one
        assert_eq!(threshold_formula(Q::one(), 4).unwrap(), q(2, 1));
    }

    #[test]
    fn blowup_threshold_examples() {
        let b = blowup_threshold(q(1, 2), 2).unwrap();
        assert_eq!(b.value, q(3, 1));
        assert_eq!(b.branches_agree, Some(true));
        assert_eq!(blowup_threshold(Q::one(), 4).unwrap().value, q(5, 3));
        assert_eq!(blowup_threshold(q(1, 4), 2).unwrap().value, q(7, 3)); // 1 + 2/1.5
    }

    #[test]
    fn optimality_for_parabolic_like() {
        // existence and blow-up thresholds coincide exactly for σ ≤ 1/2
        for num in 1..=8i64 {
            let sigma = Ratio::new(num, 16);
            for n in 2..=4u32 {
                let g = gap_report(sigma, n).unwrap();
                assert_eq!(g.gap, Q::zero());
                assert_eq!(g.existence, g.blowup);
            }
        }
    }

    #[test]
    fn gap_examples() {
        assert_eq!(gap_report(q(1, 2), 3).unwrap().gap, Q::zero());
        let g = gap_report(Q::one(), 2).unwrap();
        assert_eq!(g.existence, q(4, 1));
        assert_eq!(g.blowup, q(3, 1));
        assert_eq!(g.gap, Q::one());
        assert_eq!(gap_report(q(3, 4), 3).unwrap().gap, q(1, 4));
        // general formula (2σ-1)/(n-1) for σ > 1/2
        for &(num, den) in &[(5i64, 8i64), (3, 4), (7, 8), (1, 1)] {
            let sigma = Ratio::new(num, den);
            for n in 2..=6u32 {
                let g = gap_report(sigma, n).unwrap();
                assert_eq!(g.gap, (q(2, 1) * sigma - Q::one()) / q(n as i64 - 1, 1));
            }
        }
    }

    fn range(sigma: Q, n: u32, m: Q) -> PSet {
        admissible_range(sigma, n, m).unwrap().admissible
    }

    #[test]
    fn golden_rows_sigma_half() {
        // n=2: m ∈ (4/3, 2), p ∈ (3, 2/(2-m)]; at m = 2 the GN window is
        // unbounded and the set becomes (3, ∞)
        for &(mn, md) in &[(3i64, 2i64), (7, 4)] {
            let m = Ratio::new(mn, md);
            let expect_hi = q(2, 1) / (q(2, 1) - m);
            assert_eq!(
                range(q(1, 2), 2, m),
                PSet::Range(PInterval {
                    lo: q(3, 1),
                    lo_closed: false,
                    hi: PBound::Finite(expect_hi),
                    hi_closed: true
                })
            );
        }
        assert_eq!(
            range(q(1, 2), 2, q(2, 1)),
            PSet::Range(PInterval {
                lo: q(3, 1),
                lo_closed: false,
                hi: PBound::Unbounded,
                hi_closed: false
            })
        );
        // below m = 4/3 the window closes
        assert_eq!(range(q(1, 2), 2, q(13, 10)), PSet::Empty);
        assert_eq!(range(q(1, 2), 2, q(4, 3)), PSet::Empty);

        // n=3: m ∈ (3/2, 2], p ∈ (2, 3/(3-m)]
        let m = q(7, 4);
        assert_eq!(
            range(q(1, 2), 3, m),
            PSet::Range(PInterval {
                lo: q(2, 1),
                lo_closed: false,
                hi: PBound::Finite(q(3, 1) / (q(3, 1) - m)),
                hi_closed: true
            })
        );
        assert_eq!(range(q(1, 2), 3, q(3, 2)), PSet::Empty);

        // n=4, m ∈ (5/3, 2]: p ∈ [m, 4/(4-m)]
        let m = q(9, 5);
        assert_eq!(
            range(q(1, 2), 4, m),
            PSet::Range(PInterval {
                lo: m,
                lo_closed: true,
                hi: PBound::Finite(q(4, 1) / (q(4, 1) - m)),
                hi_closed: true
            })
        );
        // n=4, m ∈ (8/5, 5/3]: p ∈ (5/3, 4/(4-m)]
        let m = q(5, 3);
        assert_eq!(
            range(q(1, 2), 4, m),
            PSet::Range(PInterval {
                lo: q(5, 3),
                lo_closed: false,
                hi: PBound::Finite(q(4, 1) / (q(4, 1) - m)),
                hi_closed: true
            })
        );
        // n=4, m = 8/5 exactly: 4/(4-m) = 5/3 = threshold, open above -> empty
        assert_eq!(range(q(1, 2), 4, q(8, 5)), PSet::Empty);

        // n=5: empty for every admissible m
        for &(mn, md) in &[(11i64, 10i64), (4, 3), (3, 2), (7, 4), (2, 1)] {
            assert_eq!(range(q(1, 2), 5, Ratio::new(mn, md)), PSet::Empty);
        }
    }

    #[test]
    fn golden_rows_sigma_one() {
        let two = q(2, 1);
        let open_above = |lo: Q| {
            PSet::Range(PInterval { lo, lo_closed: false, hi: PBound::Unbounded, hi_closed: false })
        };
        let closed = |lo: Q, hi: Q| {
            PSet::Range(PInterval { lo, lo_closed: true, hi: PBound::Finite(hi), hi_closed: true })
        };
        assert_eq!(range(Q::one(), 2, two), open_above(q(4, 1)));
        assert_eq!(range(Q::one(), 3, two), open_above(q(5, 2)));
        assert_eq!(range(Q::one(), 4, two), open_above(q(2, 1)));
        assert_eq!(range(Q::one(), 5, two), closed(q(2, 1), q(5, 1)));
        assert_eq!(range(Q::one(), 6, two), closed(q(2, 1), q(3, 1)));
        assert_eq!(range(Q::one(), 7, two), closed(q(2, 1), q(7, 3)));
        assert_eq!(range(Q::one(), 8, two), PSet::Point(q(2, 1)));
        for n in 9..=12 {
            assert_eq!(range(Q::one(), n, two), PSet::Empty);
        }
    }

    #[test]
    fn golden_rows_sigma_parabolic() {
        let two = q(2, 1);
        for &(sn, sd) in &[(1i64, 4i64), (1, 3), (3, 8)] {
            let sigma = Ratio::new(sn, sd);
            // n=2: (1 + 1/(1-σ), ∞)
            assert_eq!(
                range(sigma, 2, two),
                PSet::Range(PInterval {
                    lo: Q::one() + (Q::one() - sigma).recip(),
                    lo_closed: false,
                    hi: PBound::Unbounded,
                    hi_closed: false
                })
            );
            // n=3: [2, 3]
            assert_eq!(
                range(sigma, 3, two),
                PSet::Range(PInterval {
                    lo: two,
                    lo_closed: true,
                    hi: PBound::Finite(q(3, 1)),
                    hi_closed: true
                })
            );
            // n=4: {2}
            assert_eq!(range(sigma, 4, two), PSet::Point(two));
            // n >= 5: empty
            for n in 5..=8 {
                assert_eq!(range(sigma, n, two), PSet::Empty);
            }
        }
    }

    #[test]
    fn golden_rows_sigma_hyperbolic() {
        let two = q(2, 1);
        // n=2: (2+2σ, ∞)
        for &(sn, sd) in &[(5i64, 8i64), (3, 4), (7, 8)] {
            let sigma = Ratio::new(sn, sd);
            assert_eq!(
                range(sigma, 2, two),
                PSet::Range(PInterval {
                    lo: q(2, 1) + q(2, 1) * sigma,
                    lo_closed: false,
                    hi: PBound::Unbounded,
                    hi_closed: false
                })
            );
        }
        // n=3, σ ∈ [3/4, 1): ((3+2σ)/2, ∞)
        let sigma = q(4, 5);
        assert_eq!(
            range(sigma, 3, two),
            PSet::Range(PInterval {
                lo: (q(3, 1) + q(2, 1) * sigma) / q(2, 1),
                lo_closed: false,
                hi: PBound::Unbounded,
                hi_closed: false
            })
        );
        // n=3, σ ∈ (1/2, 3/4): ((3+2σ)/2, 3/(3-4σ)]
        let sigma = q(5, 8);
        assert_eq!(
            range(sigma, 3, two),
            PSet::Range(PInterval {
                lo: (q(3, 1) + q(2, 1) * sigma) / q(2, 1),
                lo_closed: false,
                hi: PBound::Finite(q(3, 1) / (q(3, 1) - q(4, 1) * sigma)),
                hi_closed: true
            })
        );
        // n=4: [2, 1/(1-σ)]
        let sigma = q(3, 4);
        assert_eq!(
            range(sigma, 4, two),
            PSet::Range(PInterval {
                lo: two,
                lo_closed: true,
                hi: PBound::Finite((Q::one() - sigma).recip()),
                hi_closed: true
            })
        );
        // n=5 needs σ > 5/8; n=6 needs σ > 3/4; n=7 needs σ > 7/8
        assert_eq!(
            range(q(3, 4), 5, two),
            PSet::Range(PInterval {
                lo: two,
                lo_closed: true,
                hi: PBound::Finite(q(5, 1) / (q(5, 1) - q(3, 1))),
                hi_closed: true
            })
        );
        assert_eq!(range(q(9, 16), 5, two), PSet::Empty);
        assert_eq!(
            range(q(7, 8), 6, two),
            PSet::Range(PInterval {
                lo: two,
                lo_closed: true,
                hi: PBound::Finite(q(3, 1) / (q(3, 1) - q(7, 4))),
                hi_closed: true
            })
        );
        assert_eq!(range(q(5, 8), 6, two), PSet::Empty);
        assert_eq!(
            range(q(15, 16), 7, two),
            PSet::Range(PInterval {
                lo: two,
                lo_closed: true,
                hi: PBound::Finite(q(7, 1) / (q(7, 1) - q(15, 4))),
                hi_closed: true
            })
        );
        // n >= 8: empty for every σ ∈ (1/2, 1)
        for &(sn, sd) in &[(5i64, 8i64), (3, 4), (7, 8), (15, 16)] {
            for n in 8..=10 {
                assert_eq!(range(Ratio::new(sn, sd), n, two), PSet::Empty);
            }
        }
    }

    #[test]
    fn gn_theta_examples() {
        // q = m -> θ = 0
        let g = gn_theta(3, Q::one(), q(2, 1), q(2, 1)).unwrap();
        assert_eq!(g.theta, Q::zero());
        assert!(g.admissible);
        // n=2, k=1, m=2, q=4 -> θ = 1/2
        let g = gn_theta(2, Q::one(), q(2, 1), q(4, 1)).unwrap();
        assert_eq!(g.theta, q(1, 2));
        assert!(g.admissible);
        // n=3, k=1, m=2: upper admissible endpoint q = 6 gives θ = 1 exactly
        let g = gn_theta(3, Q::one(), q(2, 1), q(6, 1)).unwrap();
        assert_eq!(g.theta, Q::one());
        assert!(g.admissible);
        // beyond it: inadmissible
        let g = gn_theta(3, Q::one(), q(2, 1), q(7, 1)).unwrap();
        assert!(!g.admissible);
        // n ≤ km: unbounded in q, θ ≤ 1 still required
        let g = gn_theta(2, Q::one(), q(2, 1), q(100, 1)).unwrap();
        assert!(g.admissible);
    }

    #[test]
    fn rate_table_examples() {
        // σ=1, n=3: u -> -1/4, ut -> -3/4, grad2 -> -5/4
        let t = predicted_rates(Q::one(), 3, q(2, 1)).unwrap();
        assert_eq!(t.u.exponent, q(-1, 4));
        assert!(!t.u.log_flag);
        assert_eq!(t.ut.exponent, q(-3, 4));
        assert_eq!(t.grad.exponent, q(-3, 4));
        assert_eq!(t.grad2.unwrap().exponent, q(-5, 4));
        assert_eq!(t.grad2.unwrap().data_class.k, q(2, 1));

        // σ=1/4, n=2: u -> -1/3
        let t = predicted_rates(q(1, 4), 2, q(2, 1)).unwrap();
        assert_eq!(t.u.exponent, q(-1, 3));
        assert_eq!(t.ut.exponent, q(-4, 3));
        assert_eq!(t.grad.exponent, q(-1, 1));

        // σ=3/4, n=2: log case for u
        let t = predicted_rates(q(3, 4), 2, q(2, 1)).unwrap();
        assert!(t.u.log_flag);
        assert_eq!(t.u.exponent, Q::zero());
        assert_eq!(t.hdot2sigma.unwrap().exponent, -Q::one());
        assert_eq!(t.hdot2sigma.unwrap().data_class.k, q(3, 2));

        // out-of-hypothesis queries are rejected with the condition named
        assert!(predicted_rates(q(3, 4), 2, q(3, 2)).is_err());
    }

    #[test]
    fn rate_table_continuity_at_half() {
        // σ → 1/2 from both sides agrees with the σ = 1/2, m = 2 table
        let eps = q(1, 1_000_000);
        for n in 2..=4u32 {
            let half = predicted_rates(q(1, 2), n, q(2, 1)).unwrap();
            let below = predicted_rates(q(1, 2) - eps, n, q(2, 1)).unwrap();
            let above = predicted_rates(q(1, 2) + eps, n, q(2, 1)).unwrap();
            for (a, b) in [
                (half.u.exponent, below.u.exponent),
                (half.grad.exponent, below.grad.exponent),
                (half.u.exponent, above.u.exponent),
                (half.grad.exponent, above.grad.exponent),
                (half.ut.exponent, above.ut.exponent),
            ] {
                assert!((to_f64(a) - to_f64(b)).abs() < 1e-5);
            }
        }
    }

    #[test]
    fn blowdata_and_dm_norm() {
        let g = GridSpec::new(2, 32, 20.0).unwrap();
        let model = ModelSpec::new(2, 0.5, 2.0).unwrap();
        let u0 = RealField::from_fn(g, |x| ((x[0] - 10.0) * 0.7).sin() + 0.3);
        let zero = RealField::zeros(g);
        // u1 = 0: the fractional term integrates to zero on the torus
        assert_eq!(blowdata_value(&model, &u0, &zero), 0.0);
        // positive u1 -> positive value
        let u1 = RealField::from_fn(g, |x| {
            let dx = x[0] - 10.0;
            let dy = x[1] - 10.0;
            2.0 * (-(dx * dx + dy * dy)).exp()
        });
        assert!(blowdata_value(&model, &u0, &u1) > 0.0);
        // spectral identity: value equals the zero-mode coefficient of u1
        let c0 = forward_transform(&u1).zero_mode().re;
        assert_relative_eq!(blowdata_value(&model, &u0, &u1), c0, max_relative = 1e-12);

        // dm_norm: zero data -> 0, homogeneity, componentwise reassembly
        assert_eq!(dm_norm(&zero, &zero, 2.0, 1.0).unwrap(), 0.0);
        let d1 = dm_norm(&u1, &u0, 2.0, 1.0).unwrap();
        let d3 = dm_norm(&u1.scaled(-3.0), &u0.scaled(-3.0), 2.0, 1.0).unwrap();
        assert_relative_eq!(d3, 3.0 * d1, max_relative = 1e-12);
        let assembled = grid_norm(&u1, 1.0)
            + grid_norm(&u1, 2.0)
            + grid_norm(&gradient_magnitude(&u1), 2.0)
            + grid_norm(&u0, 1.0)
            + grid_norm(&u0, 2.0);
        assert_relative_eq!(d1, assembled, max_relative = 1e-10);
        // fractional k with m != 2 rejected
        assert!(dm_norm(&u1, &u0, 1.5, 0.5).is_err());
        assert!(dm_norm(&u1, &u0, 2.0, 0.5).is_ok());
    }
}

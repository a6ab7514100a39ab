//! Semilinear evolution `u_tt - Δu + μ(-Δ)^σ u_t = f(u)` on the periodic
//! grid: exponential time differencing built on the exact kernels, the
//! Duhamel fixed-point (Picard) iteration, and blow-up detection.
//!
//! The ETD step freezes `f` over one step and applies the closed-form
//! Duhamel weights per mode:
//!
//! ```text
//! û     <- K0 û + K1 û_t + (∫₀^dt K1) f̂(u)
//! û_t   <- ∂tK0 û + ∂tK1 û_t + K1(dt) f̂(u)
//! ```
//!
//! so the linear part is advanced exactly and the only error is the
//! first-order freezing of the nonlinearity. With `f ≡ 0` a step reproduces
//! the exact propagator to roundoff.

use num_complex::Complex64;
use thiserror::Error;

use crate::analysis::{Quantity, SeriesMode, TimeSeries};
use crate::exponents::{xt_weight_exponents, XtQuantity};
use crate::kernels::{kernel_values, ModelSpec};
use crate::linear::State;
use crate::par;
use crate::spectral::{
    apply_two_thirds, forward_transform, inverse_transform_unchecked, sobolev_seminorm,
    GridSpec, RealField, SpectralField,
};

#[derive(Debug, Error)]
pub enum SemilinearError {
    #[error("nonlinearity produced a non-finite value at t = {time}")]
    NonFinite { time: f64 },
    #[error("max_steps = {max_steps} exhausted at t = {time} before reaching the horizon")]
    MaxStepsExceeded { time: f64, max_steps: usize },
    #[error("blow-up threshold {threshold} must exceed the initial max-norm {initial}")]
    ThresholdBelowData { threshold: f64, initial: f64 },
    #[error("invalid stepper setting: {0}")]
    InvalidConfig(String),
    #[error(
        "Picard iteration is not contracting (X-norm diff ratios stayed above 1); \
         diffs = {diffs:?}"
    )]
    PicardDiverged { diffs: Vec<f64> },
}

/// Source term `f(u)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Nonlinearity {
    pub p: f64,
    pub variant: NonlinearityKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonlinearityKind {
    /// `f(u) = |u|^p`
    AbsPower,
    /// `f(u) = |u|^{p-1} u`
    SignedPower,
}

impl Nonlinearity {
    pub fn new(p: f64, variant: NonlinearityKind) -> Result<Self, SemilinearError> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(SemilinearError::InvalidConfig(format!("p must exceed 1, got {p}")));
        }
        Ok(Self { p, variant })
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        match self.variant {
            NonlinearityKind::AbsPower => u.abs().powf(self.p),
            NonlinearityKind::SignedPower => u.abs().powf(self.p - 1.0) * u,
        }
    }

    /// Default two-thirds dealiasing policy: on for `p ≤ 3`, and always on
    /// for non-polynomial pointwise powers.
    pub fn default_dealias(&self) -> bool {
        self.p <= 3.0
            || (self.variant == NonlinearityKind::AbsPower && self.p.fract() != 0.0)
            || (self.variant == NonlinearityKind::SignedPower && self.p.fract() != 0.0)
    }
}

/// Fixed-step ETD configuration.
#[derive(Debug, Clone, Copy)]
pub struct StepperConfig {
    pub dt: f64,
    pub dealias: bool,
    /// Absolute max-norm level that triggers blow-up handling.
    pub blowup_threshold: f64,
    pub max_steps: usize,
    /// Scaling of the nonlinear term; 0 disables it (linear consistency
    /// hook), 1 is the physical equation.
    pub coupling: f64,
}

impl StepperConfig {
    pub fn new(dt: f64, dealias: bool, blowup_threshold: f64, max_steps: usize) -> Self {
        assert!(dt > 0.0 && blowup_threshold > 0.0 && max_steps > 0);
        Self { dt, dealias, blowup_threshold, max_steps, coupling: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Completed,
    BlowupDetected,
}

/// Result of a semilinear run.
#[derive(Debug)]
pub struct RunOutcome {
    pub status: RunStatus,
    pub final_time: f64,
    /// Present iff `status == BlowupDetected`: the threshold crossing lies in
    /// this bracket, of width at most `dt/8`.
    pub blowup_time_bracket: Option<(f64, f64)>,
    /// Recorded histories: `u_L2`, `L∞`, energy and the X(t)-weighted sum.
    pub series: Vec<TimeSeries>,
    pub final_state: State,
}

/// Per-mode kernel weights at a fixed step size.
struct KernelTable {
    k0: Vec<f64>,
    k1: Vec<f64>,
    dtk0: Vec<f64>,
    dtk1: Vec<f64>,
    int_k1: Vec<f64>,
}

impl KernelTable {
    fn build(model: &ModelSpec, grid: GridSpec, dt: f64) -> Self {
        let rows: Vec<[f64; 5]> = par::map_range(grid.num_points(), |idx| {
            let kv = kernel_values(model, grid.xi_norm(idx), dt, dt);
            [kv.k0, kv.k1, kv.dtk0, kv.dtk1, kv.int_k1]
        });
        let mut t = KernelTable {
            k0: Vec::with_capacity(rows.len()),
            k1: Vec::with_capacity(rows.len()),
            dtk0: Vec::with_capacity(rows.len()),
            dtk1: Vec::with_capacity(rows.len()),
            int_k1: Vec::with_capacity(rows.len()),
        };
        for r in rows {
            t.k0.push(r[0]);
            t.k1.push(r[1]);
            t.dtk0.push(r[2]);
            t.dtk1.push(r[3]);
            t.int_k1.push(r[4]);
        }
        t
    }
}

/// Evaluate `coupling · f(u)` pointwise and transform it, dealiasing if
/// requested. `None` signals a non-finite value (blow-up candidate).
fn nonlinear_hat(
    nl: &Nonlinearity,
    u_phys: &RealField,
    coupling: f64,
    dealias: bool,
) -> Option<SpectralField> {
    if coupling == 0.0 {
        return Some(SpectralField::zeros(u_phys.grid));
    }
    let mut fu = RealField::zeros(u_phys.grid);
    let vals = &u_phys.values;
    let mut finite = true;
    for (o, &v) in fu.values.iter_mut().zip(vals.iter()) {
        let f = coupling * nl.eval(v);
        if !f.is_finite() {
            finite = false;
            break;
        }
        *o = f;
    }
    if !finite {
        return None;
    }
    let mut fhat = forward_transform(&fu);
    if dealias {
        apply_two_thirds(&mut fhat);
    }
    Some(fhat)
}

fn etd_apply(
    table: &KernelTable,
    uhat: &SpectralField,
    uthat: &SpectralField,
    fhat: &SpectralField,
) -> (SpectralField, SpectralField) {
    let grid = uhat.grid;
    let pairs: Vec<(Complex64, Complex64)> = par::map_range(grid.num_points(), |i| {
        let (a, b, f) = (uhat.coeffs[i], uthat.coeffs[i], fhat.coeffs[i]);
        (
            table.k0[i] * a + table.k1[i] * b + table.int_k1[i] * f,
            table.dtk0[i] * a + table.dtk1[i] * b + table.k1[i] * f,
        )
    });
    let mut nu = SpectralField::zeros(grid);
    let mut nut = SpectralField::zeros(grid);
    for (i, (a, b)) in pairs.into_iter().enumerate() {
        nu.coeffs[i] = a;
        nut.coeffs[i] = b;
    }
    (nu, nut)
}

/// One ETD step of length `cfg.dt` on a physical-space state.
pub fn etd_step(
    model: &ModelSpec,
    nl: &Nonlinearity,
    s: &State,
    cfg: &StepperConfig,
) -> Result<State, SemilinearError> {
    let table = KernelTable::build(model, s.grid(), cfg.dt);
    let uhat = forward_transform(&s.u);
    let uthat = forward_transform(&s.ut);
    let fhat = nonlinear_hat(nl, &s.u, cfg.coupling, cfg.dealias)
        .ok_or(SemilinearError::NonFinite { time: s.time })?;
    let (nu, nut) = etd_apply(&table, &uhat, &uthat, &fhat);
    Ok(State {
        u: inverse_transform_unchecked(&nu),
        ut: inverse_transform_unchecked(&nut),
        time: s.time + cfg.dt,
    })
}

/// Norms entering the recorded histories.
fn record_norms(
    model: &ModelSpec,
    uhat: &SpectralField,
    uthat: &SpectralField,
    u_phys: &RealField,
    xt_weights: &[(XtQuantity, f64)],
    t: f64,
) -> [f64; 4] {
    let l2 = sobolev_seminorm(uhat, 0.0);
    let linf = u_phys.max_abs();
    let ut2 = sobolev_seminorm(uthat, 0.0);
    let gr = sobolev_seminorm(uhat, 1.0);
    let energy = ut2 * ut2 + gr * gr;
    let mut weighted = 0.0;
    for (q, e) in xt_weights {
        let v = match q {
            XtQuantity::U => l2,
            XtQuantity::Ut => ut2,
            XtQuantity::Grad => gr,
            XtQuantity::Grad2 => sobolev_seminorm(uhat, 2.0),
            XtQuantity::Hdot2Sigma => sobolev_seminorm(uhat, 2.0 * model.sigma),
        };
        weighted += (1.0 + t).powf(*e) * v;
    }
    [l2, linf, energy, weighted]
}

/// Step the semilinear equation to `t_end`, or detect blow-up on the way.
///
/// Blow-up is operationalized as the max-norm crossing
/// `cfg.blowup_threshold` (or `f(u)` overflowing); the crossing is then
/// bracketed by step bisection to width `dt/8`. A run that exhausts
/// `cfg.max_steps` is an error, distinct from blow-up.
pub fn run(
    model: &ModelSpec,
    nl: &Nonlinearity,
    initial: &State,
    cfg: &StepperConfig,
    t_end: f64,
) -> Result<RunOutcome, SemilinearError> {
    if t_end <= initial.time {
        return Err(SemilinearError::InvalidConfig(format!(
            "horizon {t_end} must exceed the initial time {}",
            initial.time
        )));
    }
    let init_max = initial.u.max_abs();
    if cfg.blowup_threshold <= init_max {
        return Err(SemilinearError::ThresholdBelowData {
            threshold: cfg.blowup_threshold,
            initial: init_max,
        });
    }
    let grid = initial.grid();
    let table = KernelTable::build(model, grid, cfg.dt);
    let weights = xt_weight_exponents(model.sigma, model.n as u32, 2.0);

    let mut uhat = forward_transform(&initial.u);
    let mut uthat = forward_transform(&initial.ut);
    let mut u_phys = initial.u.clone();
    let mut t = initial.time;
    let mut times = Vec::new();
    let mut hist: [Vec<f64>; 4] = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
    let mut record = |t: f64, norms: [f64; 4]| {
        if t > 0.0 {
            times.push(t);
            for (h, v) in hist.iter_mut().zip(norms.iter()) {
                h.push(*v);
            }
        }
    };
    record(t, record_norms(model, &uhat, &uthat, &u_phys, &weights, t));

    let mut steps = 0usize;
    while t < t_end - 0.5 * cfg.dt {
        if steps >= cfg.max_steps {
            return Err(SemilinearError::MaxStepsExceeded { time: t, max_steps: cfg.max_steps });
        }
        let fhat = nonlinear_hat(nl, &u_phys, cfg.coupling, cfg.dealias);
        let over = match fhat {
            None => true,
            Some(fhat) => {
                let (nu, nut) = etd_apply(&table, &uhat, &uthat, &fhat);
                let nu_phys = inverse_transform_unchecked(&nu);
                let m = nu_phys.max_abs();
                if !m.is_finite() || m > cfg.blowup_threshold {
                    true
                } else {
                    uhat = nu;
                    uthat = nut;
                    u_phys = nu_phys;
                    t += cfg.dt;
                    steps += 1;
                    record(t, record_norms(model, &uhat, &uthat, &u_phys, &weights, t));
                    false
                }
            }
        };
        if over {
            // crossing lies in (t, t + dt]; bisect the step three times
            let bracket = bisect_crossing(model, nl, cfg, &uhat, &uthat, &u_phys, t);
            let series = assemble_series(times, hist);
            return Ok(RunOutcome {
                status: RunStatus::BlowupDetected,
                final_time: bracket.1,
                blowup_time_bracket: Some(bracket),
                series,
                final_state: State {
                    u: u_phys,
                    ut: inverse_transform_unchecked(&uthat),
                    time: t,
                },
            });
        }
    }
    let series = assemble_series(times, hist);
    Ok(RunOutcome {
        status: RunStatus::Completed,
        final_time: t,
        blowup_time_bracket: None,
        series,
        final_state: State { u: u_phys, ut: inverse_transform_unchecked(&uthat), time: t },
    })
}

/// Narrow the threshold crossing inside `(t0, t0 + dt]` to width `dt/8` by
/// re-stepping from the last sub-threshold state with halved steps.
fn bisect_crossing(
    model: &ModelSpec,
    nl: &Nonlinearity,
    cfg: &StepperConfig,
    uhat: &SpectralField,
    uthat: &SpectralField,
    u_phys: &RealField,
    t0: f64,
) -> (f64, f64) {
    let grid = uhat.grid;
    let mut lo = t0;
    let mut hi = t0 + cfg.dt;
    let mut base = (uhat.clone(), uthat.clone(), u_phys.clone());
    let mut h = cfg.dt / 2.0;
    for _ in 0..3 {
        let table = KernelTable::build(model, grid, h);
        let fhat = nonlinear_hat(nl, &base.2, cfg.coupling, cfg.dealias);
        match fhat {
            None => {
                // already overflowing at the bracket base: crossing is at lo
                hi = lo + h;
            }
            Some(fhat) => {
                let (nu, nut) = etd_apply(&table, &base.0, &base.1, &fhat);
                let nu_phys = inverse_transform_unchecked(&nu);
                let m = nu_phys.max_abs();
                if !m.is_finite() || m > cfg.blowup_threshold {
                    hi = lo + h;
                } else {
                    lo += h;
                    base = (nu, nut, nu_phys);
                }
            }
        }
        h /= 2.0;
    }
    (lo, hi)
}

fn assemble_series(times: Vec<f64>, hist: [Vec<f64>; 4]) -> Vec<TimeSeries> {
    let quantities =
        [Quantity::U(2.0), Quantity::LInf, Quantity::Energy, Quantity::XtWeighted];
    let mut out = Vec::new();
    if times.is_empty() {
        return out;
    }
    for (q, values) in quantities.into_iter().zip(hist.into_iter()) {
        out.push(
            TimeSeries::new(times.clone(), values, q, SeriesMode::Grid)
                .expect("strictly increasing step times"),
        );
    }
    out
}

/// One Picard iterate step record.
#[derive(Debug, Clone, Copy)]
pub struct PicardStep {
    pub index: usize,
    /// `‖u_j - u_{j-1}‖_{X(T)}`.
    pub xnorm_diff: f64,
    /// `diff_j / diff_{j-1}`; 0 once the iteration has hit the roundoff
    /// floor (`converged` set).
    pub ratio: Option<f64>,
    pub converged: bool,
}

#[derive(Debug)]
pub struct PicardReport {
    pub steps: Vec<PicardStep>,
    /// The last iterate at the horizon.
    pub final_state: State,
}

/// Picard iteration `u_{-1} = 0`, `u_j = N(u_{j-1})` of the Duhamel operator,
/// evaluated on a uniform snapshot grid with composite-trapezoid quadrature
/// of the integral term. Returns the X(T)-norm differences of successive
/// iterates; persistent ratios above 1 are reported as an error.
pub fn picard_iterate(
    model: &ModelSpec,
    nl: &Nonlinearity,
    initial: &State,
    t_end: f64,
    j_max: usize,
    quadrature_points: usize,
) -> Result<PicardReport, SemilinearError> {
    if !(t_end > 0.0) || quadrature_points < 2 || j_max < 2 {
        return Err(SemilinearError::InvalidConfig(
            "picard needs t_end > 0, quadrature_points >= 2, j_max >= 2".into(),
        ));
    }
    let grid = initial.grid();
    let nmodes = grid.num_points();
    let q = quadrature_points;
    let dt = t_end / q as f64;
    let dealias = nl.default_dealias();
    let weights = xt_weight_exponents(model.sigma, model.n as u32, 2.0);

    // kernel rows at τ_j = j·dt for every mode
    let tables: Vec<KernelTable> =
        (0..=q).map(|j| KernelTable::build(model, grid, j as f64 * dt)).collect();

    let uhat0 = forward_transform(&initial.u);
    let uthat0 = forward_transform(&initial.ut);

    // linear part L(t_i) = K0(t_i) û0 + K1(t_i) û1 (this is N(0))
    let linear: Vec<(SpectralField, SpectralField)> = (0..=q)
        .map(|i| {
            let tb = &tables[i];
            let mut lu = SpectralField::zeros(grid);
            let mut lut = SpectralField::zeros(grid);
            for k in 0..nmodes {
                let (a, b) = (uhat0.coeffs[k], uthat0.coeffs[k]);
                lu.coeffs[k] = tb.k0[k] * a + tb.k1[k] * b;
                lut.coeffs[k] = tb.dtk0[k] * a + tb.dtk1[k] * b;
            }
            (lu, lut)
        })
        .collect();

    let xnorm_of = |du: &[SpectralField], dut: &[SpectralField]| -> f64 {
        let mut sup = 0.0f64;
        for i in 0..=q {
            let t = i as f64 * dt;
            let mut acc = 0.0;
            for (wq, e) in &weights {
                let v = match wq {
                    XtQuantity::U => sobolev_seminorm(&du[i], 0.0),
                    XtQuantity::Ut => sobolev_seminorm(&dut[i], 0.0),
                    XtQuantity::Grad => sobolev_seminorm(&du[i], 1.0),
                    XtQuantity::Grad2 => sobolev_seminorm(&du[i], 2.0),
                    XtQuantity::Hdot2Sigma => sobolev_seminorm(&du[i], 2.0 * model.sigma),
                };
                acc += (1.0 + t).powf(*e) * v;
            }
            sup = sup.max(acc);
        }
        sup
    };

    let zero_snap = || -> Vec<SpectralField> { (0..=q).map(|_| SpectralField::zeros(grid)).collect() };

    let mut prev_u = zero_snap();
    let mut prev_ut = zero_snap();
    let mut steps: Vec<PicardStep> = Vec::with_capacity(j_max);
    let mut prev_diff: Option<f64> = None;
    let mut converged = false;

    for j in 0..j_max {
        // f̂(u_{j-1}(t_k)) on the snapshot grid
        let fhats: Vec<SpectralField> = (0..=q)
            .map(|k| {
                let u_phys = inverse_transform_unchecked(&prev_u[k]);
                nonlinear_hat(nl, &u_phys, 1.0, dealias)
                    .ok_or(SemilinearError::NonFinite { time: k as f64 * dt })
            })
            .collect::<Result<_, _>>()?;

        let new: Vec<(SpectralField, SpectralField)> = par::map_range(q + 1, |i| {
            let mut nu = linear[i].0.clone();
            let mut nut = linear[i].1.clone();
            for k in 0..=i {
                let w = if k == 0 || k == i { 0.5 * dt } else { dt };
                if w == 0.0 || (k == 0 && i == 0) {
                    continue;
                }
                let tb = &tables[i - k];
                let f = &fhats[k];
                for mode in 0..nmodes {
                    nu.coeffs[mode] += w * tb.k1[mode] * f.coeffs[mode];
                    nut.coeffs[mode] += w * tb.dtk1[mode] * f.coeffs[mode];
                }
            }
            (nu, nut)
        });
        let (new_u, new_ut): (Vec<_>, Vec<_>) = new.into_iter().unzip();

        let du: Vec<SpectralField> = (0..=q)
            .map(|i| new_u[i].add_scaled(-1.0, &prev_u[i]))
            .collect();
        let dut: Vec<SpectralField> = (0..=q)
            .map(|i| new_ut[i].add_scaled(-1.0, &prev_ut[i]))
            .collect();
        let diff = xnorm_of(&du, &dut);
        let scale = xnorm_of(&new_u, &new_ut);
        let at_floor = diff <= 100.0 * f64::EPSILON * scale;
        converged = converged || at_floor;
        let ratio = match prev_diff {
            None => None,
            Some(p) if p == 0.0 => Some(0.0),
            Some(p) => Some(if converged { 0.0 } else { diff / p }),
        };
        steps.push(PicardStep { index: j, xnorm_diff: diff, ratio, converged });
        prev_diff = Some(diff);
        prev_u = new_u;
        prev_ut = new_ut;
    }

    // persistent expansion = last three defined ratios all above 1
    let ratios: Vec<f64> = steps.iter().filter_map(|s| s.ratio).collect();
    if ratios.len() >= 3 && ratios.iter().rev().take(3).all(|&r| r > 1.0) {
        return Err(SemilinearError::PicardDiverged {
            diffs: steps.iter().map(|s| s.xnorm_diff).collect(),
        });
    }

    let final_state = State {
        u: inverse_transform_unchecked(&prev_u[q]),
        ut: inverse_transform_unchecked(&prev_ut[q]),
        time: t_end,
    };
    Ok(PicardReport { steps, final_state })
}

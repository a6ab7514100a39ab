//! Time-series post-processing: log-log decay-rate regression, logarithmic
//! growth detection, weighted `X(t)` norms and theory-vs-measurement
//! verdicts.

use thiserror::Error;

use crate::exponents::{xt_weight_exponents, XtQuantity};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("window [{0}, {1}] contains {2} points, need at least {3}")]
    TooFewPoints(f64, f64, usize, usize),
    #[error("series contains nonpositive values inside the window")]
    NonPositiveValues,
    #[error("series bundle is missing quantity '{0}' required by the X(t) norm")]
    MissingQuantity(String),
    #[error("series in the bundle do not share one time grid")]
    MismatchedTimes,
    #[error("invalid series: {0}")]
    InvalidSeries(String),
}

/// What a series measures.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quantity {
    /// `‖u‖_{L^m}`
    U(f64),
    /// `‖u_t‖_{L^m}`
    Ut(f64),
    /// `‖∇u‖_{L^m}`
    Grad(f64),
    /// Combined first-order energy norm `‖(∇u, u_t)‖_{L^m}`.
    GradUt(f64),
    /// `‖∇²u‖_{L²}`
    Grad2L2,
    /// `‖u‖_{Ḣ^κ}`
    Hdot(f64),
    /// `‖u‖_{L^∞}`
    LInf,
    /// `‖u_t‖_{L²}² + ‖∇u‖_{L²}²`
    Energy,
    /// Instantaneous weighted sum entering the `X(t)` norm.
    XtWeighted,
}

fn fmt_m(m: f64) -> String {
    if m == m.trunc() && m.is_finite() {
        format!("{}", m as i64)
    } else if m.is_infinite() {
        "inf".to_string()
    } else {
        format!("{m}")
    }
}

impl Quantity {
    /// Stable label used in CSV columns and file names.
    pub fn label(&self) -> String {
        match self {
            Quantity::U(m) => format!("u_L{}", fmt_m(*m)),
            Quantity::Ut(m) => format!("ut_L{}", fmt_m(*m)),
            Quantity::Grad(m) => format!("grad_L{}", fmt_m(*m)),
            Quantity::GradUt(m) => format!("grad_ut_L{}", fmt_m(*m)),
            Quantity::Grad2L2 => "grad2_L2".to_string(),
            Quantity::Hdot(k) => format!("hdot_{k}"),
            Quantity::LInf => "linf".to_string(),
            Quantity::Energy => "energy".to_string(),
            Quantity::XtWeighted => "xt_weighted".to_string(),
        }
    }

    /// Parse a label produced by [`Quantity::label`].
    pub fn parse(s: &str) -> Option<Quantity> {
        let m_of = |rest: &str| -> Option<f64> {
            if rest == "inf" {
                Some(f64::INFINITY)
            } else {
                rest.parse::<f64>().ok().filter(|m| *m >= 1.0)
            }
        };
        match s {
            "grad2_L2" => Some(Quantity::Grad2L2),
            "linf" => Some(Quantity::LInf),
            "energy" => Some(Quantity::Energy),
            "xt_weighted" => Some(Quantity::XtWeighted),
            _ => {
                if let Some(rest) = s.strip_prefix("grad_ut_L") {
                    m_of(rest).map(Quantity::GradUt)
                } else if let Some(rest) = s.strip_prefix("grad_L") {
                    m_of(rest).map(Quantity::Grad)
                } else if let Some(rest) = s.strip_prefix("ut_L") {
                    m_of(rest).map(Quantity::Ut)
                } else if let Some(rest) = s.strip_prefix("u_L") {
                    m_of(rest).map(Quantity::U)
                } else if let Some(rest) = s.strip_prefix("hdot_") {
                    rest.parse::<f64>().ok().filter(|k| *k >= 0.0).map(Quantity::Hdot)
                } else {
                    None
                }
            }
        }
    }
}

/// Where a series came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeriesMode {
    Grid,
    Oracle,
}

impl SeriesMode {
    pub fn label(&self) -> &'static str {
        match self {
            SeriesMode::Grid => "grid",
            SeriesMode::Oracle => "oracle",
        }
    }
}

/// A sampled norm history.
#[derive(Debug, Clone)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub quantity: Quantity,
    pub mode: SeriesMode,
}

impl TimeSeries {
    /// Times must be strictly increasing and positive; lengths must match.
    pub fn new(
        times: Vec<f64>,
        values: Vec<f64>,
        quantity: Quantity,
        mode: SeriesMode,
    ) -> Result<Self, AnalysisError> {
        if times.len() != values.len() {
            return Err(AnalysisError::InvalidSeries(format!(
                "length mismatch: {} times vs {} values",
                times.len(),
                values.len()
            )));
        }
        if times.first().is_some_and(|&t| t <= 0.0) {
            return Err(AnalysisError::InvalidSeries("times must be positive".into()));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(AnalysisError::InvalidSeries("times must be strictly increasing".into()));
        }
        Ok(Self { times, values, quantity, mode })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Fitted power of `(1+t)` over a window.
#[derive(Debug, Clone, Copy)]
pub struct RateFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub points: usize,
}

/// Default fit window: the last two decades of the series.
pub fn default_window(series: &TimeSeries) -> (f64, f64) {
    let hi = *series.times.last().unwrap_or(&1.0);
    (hi / 100.0, hi)
}

/// Least-squares line of `log(value)` against `log(1+t)` over the window.
pub fn fit_rate(series: &TimeSeries, window: (f64, f64)) -> Result<RateFit, AnalysisError> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for (&t, &v) in series.times.iter().zip(series.values.iter()) {
        if t < window.0 || t > window.1 {
            continue;
        }
        if v <= 0.0 {
            return Err(AnalysisError::NonPositiveValues);
        }
        xs.push((1.0 + t).ln());
        ys.push(v.ln());
    }
    let npts = xs.len();
    if npts < 5 {
        return Err(AnalysisError::TooFewPoints(window.0, window.1, npts, 5));
    }
    let nf = npts as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(ys.iter()) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if sxx == 0.0 {
        return Err(AnalysisError::InvalidSeries("degenerate window: one time point".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res = (syy - slope * sxy).max(0.0);
    // a (numerically) constant series is a perfect line of slope 0; the
    // floor absorbs summation roundoff in the centered moments
    let floor = (1e-13 * (1.0 + my.abs())).powi(2) * nf;
    let r_squared = if syy <= floor { 1.0 } else { 1.0 - ss_res / syy };
    Ok(RateFit { slope, intercept, r_squared, window, points: npts })
}

/// Result of the `value / log(e+t)` boundedness probe.
#[derive(Debug, Clone, Copy)]
pub struct LogGrowthCheck {
    pub ratio_min: f64,
    pub ratio_max: f64,
    /// True iff `ratio_max / ratio_min ≤ 2` over the window.
    pub bounded: bool,
}

pub fn log_growth_check(
    series: &TimeSeries,
    window: (f64, f64),
) -> Result<LogGrowthCheck, AnalysisError> {
    let mut ratio_min = f64::INFINITY;
    let mut ratio_max = 0.0f64;
    let mut count = 0;
    for (&t, &v) in series.times.iter().zip(series.values.iter()) {
        if t < window.0 || t > window.1 {
            continue;
        }
        if v <= 0.0 {
            return Err(AnalysisError::NonPositiveValues);
        }
        let ratio = v / (std::f64::consts::E + t).ln();
        ratio_min = ratio_min.min(ratio);
        ratio_max = ratio_max.max(ratio);
        count += 1;
    }
    if count < 2 {
        return Err(AnalysisError::TooFewPoints(window.0, window.1, count, 2));
    }
    Ok(LogGrowthCheck { ratio_min, ratio_max, bounded: ratio_max <= 2.0 * ratio_min })
}

/// Weighted sup-norm `‖·‖_{X(t)}` of a series bundle: the quantities the
/// `σ`-regime requires, each multiplied by its inverse predicted decay and
/// summed per time, then maximized over the stored times.
pub fn xt_norm(
    bundle: &[TimeSeries],
    sigma: f64,
    n: u32,
    m: f64,
) -> Result<f64, AnalysisError> {
    let weights = xt_weight_exponents(sigma, n, m);
    let mut picked: Vec<(&TimeSeries, f64)> = Vec::with_capacity(weights.len());
    for (wq, e) in &weights {
        let want = match wq {
            XtQuantity::U => Quantity::U(m),
            XtQuantity::Ut => Quantity::Ut(m),
            XtQuantity::Grad => Quantity::Grad(m),
            XtQuantity::Grad2 => Quantity::Grad2L2,
            XtQuantity::Hdot2Sigma => Quantity::Hdot(2.0 * sigma),
        };
        let found = bundle
            .iter()
            .find(|s| s.quantity == want)
            .ok_or_else(|| AnalysisError::MissingQuantity(want.label()))?;
        picked.push((found, *e));
    }
    let times = &picked[0].0.times;
    if picked.iter().any(|(s, _)| s.times != *times) {
        return Err(AnalysisError::MismatchedTimes);
    }
    let mut sup = 0.0f64;
    for (i, &t) in times.iter().enumerate() {
        let mut acc = 0.0;
        for (s, e) in &picked {
            acc += (1.0 + t).powf(*e) * s.values[i];
        }
        sup = sup.max(acc);
    }
    Ok(sup)
}

/// One theory-vs-measurement comparison.
#[derive(Debug, Clone)]
pub struct Verdict {
    pub quantity: String,
    pub predicted: f64,
    pub measured: f64,
    pub tol: f64,
    pub pass: bool,
    pub window: (f64, f64),
}

/// Pass iff `|fit.slope - predicted| ≤ tol`.
pub fn compare(fit: &RateFit, predicted: f64, tol: f64, quantity: &str) -> Verdict {
    assert!(tol > 0.0);
    Verdict {
        quantity: quantity.to_string(),
        predicted,
        measured: fit.slope,
        tol,
        pass: (fit.slope - predicted).abs() <= tol,
        window: fit.window,
    }
}

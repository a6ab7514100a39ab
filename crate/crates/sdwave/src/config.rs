//! Experiment configuration: a flat `section.key = value` text format.
//!
//! Grammar: one assignment per line, `#` starts a comment, keys have exactly
//! one dot, values are scalars, `a/b` rationals, or comma lists. Unknown
//! keys are rejected, and validation collects every violation instead of
//! stopping at the first. The resolved configuration (defaults included) can
//! be re-serialized as a manifest that parses back to the same experiment.

use std::collections::BTreeMap;

use num_rational::Ratio;
use thiserror::Error;

use crate::exponents::{to_f64, Q};

#[derive(Debug, Error)]
#[error("configuration rejected:\n{}", violations.join("\n"))]
pub struct ConfigError {
    pub violations: Vec<String>,
}

/// Initial-data preset for one component.
#[derive(Debug, Clone, PartialEq)]
pub enum DataKind {
    Zero,
    Gaussian { amplitude: f64, width: f64 },
    Bump { amplitude: f64, radius: f64 },
    BandLimitedRandom { amplitude: f64, max_mode: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct DataConfig {
    pub kind: DataKind,
    /// Absolute center coordinates; `None` = box center.
    pub center: Option<Vec<f64>>,
}

impl DataConfig {
    pub fn zero() -> Self {
        Self { kind: DataKind::Zero, center: None }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunMode {
    Grid,
    Oracle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DealiasChoice {
    Auto,
    On,
    Off,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spacing {
    Log,
    Linear,
}

/// Fully resolved experiment configuration.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub n: usize,
    pub sigma: Q,
    pub mu: f64,
    pub mode: RunMode,
    pub seed: u64,
    pub grid_points: usize,
    pub box_length: f64,
    /// `None` = choose by profile tail bound.
    pub oracle_r_max: Option<f64>,
    pub u0: DataConfig,
    pub u1: DataConfig,
    pub p: Option<f64>,
    pub signed_power: bool,
    pub dt: f64,
    pub t_end: f64,
    pub dealias: DealiasChoice,
    pub blowup_factor: f64,
    pub max_steps: usize,
    pub coupling: f64,
    pub times_start: f64,
    pub times_stop: f64,
    pub times_count: usize,
    pub times_spacing: Spacing,
    /// `None` = last two decades of the series.
    pub fit_window: Option<(f64, f64)>,
    pub fit_tol: f64,
    pub quantities: Option<Vec<String>>,
    pub picard_iterates: usize,
    pub picard_quadrature_points: usize,
    pub exponents_m: Q,
    pub exponents_n_list: Vec<u32>,
    pub compare_tol: f64,
}

impl ExperimentConfig {
    pub fn sigma_f64(&self) -> f64 {
        to_f64(self.sigma)
    }

    /// Evaluation times implied by the `times.*` section.
    pub fn times(&self) -> Vec<f64> {
        let (a, b, count) = (self.times_start, self.times_stop, self.times_count);
        (0..count)
            .map(|i| {
                let f = i as f64 / (count - 1) as f64;
                match self.times_spacing {
                    Spacing::Log => (a.ln() + f * (b.ln() - a.ln())).exp(),
                    Spacing::Linear => a + f * (b - a),
                }
            })
            .collect()
    }

    /// Serialize the resolved configuration; parsing the result reproduces
    /// this config.
    pub fn manifest(&self) -> String {
        let mut lines: Vec<String> = Vec::new();
        lines.push(format!("model.n = {}", self.n));
        lines.push(format!("model.sigma = {}", self.sigma));
        lines.push(format!("model.mu = {}", fmt_f64(self.mu)));
        lines.push(format!(
            "run.mode = {}",
            match self.mode {
                RunMode::Grid => "grid",
                RunMode::Oracle => "oracle",
            }
        ));
        lines.push(format!("run.seed = {}", self.seed));
        lines.push(format!("grid.points = {}", self.grid_points));
        lines.push(format!("grid.box_length = {}", fmt_f64(self.box_length)));
        match self.oracle_r_max {
            None => lines.push("oracle.r_max = auto".to_string()),
            Some(v) => lines.push(format!("oracle.r_max = {}", fmt_f64(v))),
        }
        push_data_lines(&mut lines, "u0", &self.u0);
        push_data_lines(&mut lines, "u1", &self.u1);
        if let Some(p) = self.p {
            lines.push(format!("nonlinearity.p = {}", fmt_f64(p)));
            lines.push(format!(
                "nonlinearity.variant = {}",
                if self.signed_power { "signed_power" } else { "abs_power" }
            ));
        }
        lines.push(format!("stepper.dt = {}", fmt_f64(self.dt)));
        lines.push(format!("stepper.t_end = {}", fmt_f64(self.t_end)));
        lines.push(format!(
            "stepper.dealias = {}",
            match self.dealias {
                DealiasChoice::Auto => "auto",
                DealiasChoice::On => "on",
                DealiasChoice::Off => "off",
            }
        ));
        lines.push(format!("stepper.blowup_factor = {}", fmt_f64(self.blowup_factor)));
        lines.push(format!("stepper.max_steps = {}", self.max_steps));
        lines.push(format!("stepper.coupling = {}", fmt_f64(self.coupling)));
        lines.push(format!("times.start = {}", fmt_f64(self.times_start)));
        lines.push(format!("times.stop = {}", fmt_f64(self.times_stop)));
        lines.push(format!("times.count = {}", self.times_count));
        lines.push(format!(
            "times.spacing = {}",
            match self.times_spacing {
                Spacing::Log => "log",
                Spacing::Linear => "linear",
            }
        ));
        match self.fit_window {
            None => lines.push("fit.window = auto".to_string()),
            Some((lo, hi)) => {
                lines.push(format!("fit.window_lo = {}", fmt_f64(lo)));
                lines.push(format!("fit.window_hi = {}", fmt_f64(hi)));
            }
        }
        lines.push(format!("fit.tol = {}", fmt_f64(self.fit_tol)));
        if let Some(qs) = &self.quantities {
            lines.push(format!("series.quantities = {}", qs.join(",")));
        }
        lines.push(format!("picard.iterates = {}", self.picard_iterates));
        lines.push(format!("picard.quadrature_points = {}", self.picard_quadrature_points));
        lines.push(format!("exponents.m = {}", self.exponents_m));
        lines.push(format!(
            "exponents.n_list = {}",
            self.exponents_n_list.iter().map(|n| n.to_string()).collect::<Vec<_>>().join(",")
        ));
        lines.push(format!("compare.tol = {}", fmt_f64(self.compare_tol)));
        lines.sort();
        let mut out = String::from("# resolved configuration (defaults included)\n");
        out.push_str(&lines.join("\n"));
        out.push('\n');
        out
    }
}

fn fmt_f64(v: f64) -> String {
    if v == v.trunc() && v.abs() < 1e15 {
        format!("{:.1}", v)
    } else {
        format!("{v:e}")
    }
}

fn push_data_lines(lines: &mut Vec<String>, section: &str, d: &DataConfig) {
    match &d.kind {
        DataKind::Zero => lines.push(format!("{section}.kind = zero")),
        DataKind::Gaussian { amplitude, width } => {
            lines.push(format!("{section}.kind = gaussian"));
            lines.push(format!("{section}.amplitude = {}", fmt_f64(*amplitude)));
            lines.push(format!("{section}.width = {}", fmt_f64(*width)));
        }
        DataKind::Bump { amplitude, radius } => {
            lines.push(format!("{section}.kind = bump"));
            lines.push(format!("{section}.amplitude = {}", fmt_f64(*amplitude)));
            lines.push(format!("{section}.radius = {}", fmt_f64(*radius)));
        }
        DataKind::BandLimitedRandom { amplitude, max_mode } => {
            lines.push(format!("{section}.kind = band_limited_random"));
            lines.push(format!("{section}.amplitude = {}", fmt_f64(*amplitude)));
            lines.push(format!("{section}.max_mode = {max_mode}"));
        }
    }
    if let Some(c) = &d.center {
        lines.push(format!(
            "{section}.center = {}",
            c.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(",")
        ));
    }
}

const KNOWN_KEYS: &[&str] = &[
    "model.n",
    "model.sigma",
    "model.mu",
    "run.mode",
    "run.seed",
    "grid.points",
    "grid.box_length",
    "oracle.r_max",
    "u0.kind",
    "u0.amplitude",
    "u0.width",
    "u0.radius",
    "u0.max_mode",
    "u0.center",
    "u1.kind",
    "u1.amplitude",
    "u1.width",
    "u1.radius",
    "u1.max_mode",
    "u1.center",
    "nonlinearity.p",
    "nonlinearity.variant",
    "stepper.dt",
    "stepper.t_end",
    "stepper.dealias",
    "stepper.blowup_factor",
    "stepper.max_steps",
    "stepper.coupling",
    "times.start",
    "times.stop",
    "times.count",
    "times.spacing",
    "fit.window",
    "fit.window_lo",
    "fit.window_hi",
    "fit.tol",
    "series.quantities",
    "picard.iterates",
    "picard.quadrature_points",
    "exponents.m",
    "exponents.n_list",
    "compare.tol",
];

/// Parse a rational from `a/b` or decimal notation.
pub fn parse_rational(s: &str) -> Option<Q> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let num: i64 = a.trim().parse().ok()?;
        let den: i64 = b.trim().parse().ok()?;
        if den == 0 {
            return None;
        }
        Some(Ratio::new(num, den))
    } else {
        let v: f64 = s.parse().ok()?;
        Ratio::approximate_float(v)
    }
}

struct Raw {
    map: BTreeMap<String, String>,
    violations: Vec<String>,
}

impl Raw {
    fn take(&mut self, key: &str) -> Option<String> {
        self.map.remove(key)
    }

    fn violation(&mut self, msg: String) {
        self.violations.push(msg);
    }

    fn f64_or(&mut self, key: &str, default: f64, check: impl Fn(f64) -> Option<String>) -> f64 {
        match self.take(key) {
            None => default,
            Some(raw) => match raw.parse::<f64>() {
                Ok(v) => {
                    if let Some(msg) = check(v) {
                        self.violation(format!("{key}: {msg} (got {raw})"));
                        default
                    } else {
                        v
                    }
                }
                Err(_) => {
                    self.violation(format!("{key}: expected a number, got '{raw}'"));
                    default
                }
            },
        }
    }

    fn usize_or(
        &mut self,
        key: &str,
        default: usize,
        check: impl Fn(usize) -> Option<String>,
    ) -> usize {
        match self.take(key) {
            None => default,
            Some(raw) => match raw.parse::<usize>() {
                Ok(v) => {
                    if let Some(msg) = check(v) {
                        self.violation(format!("{key}: {msg} (got {raw})"));
                        default
                    } else {
                        v
                    }
                }
                Err(_) => {
                    self.violation(format!("{key}: expected a nonnegative integer, got '{raw}'"));
                    default
                }
            },
        }
    }
}

fn parse_data_section(raw: &mut Raw, section: &str) -> DataConfig {
    let kind_str = raw.take(&format!("{section}.kind")).unwrap_or_else(|| "zero".into());
    let amplitude = raw.f64_or(&format!("{section}.amplitude"), 1.0, |v| {
        (!v.is_finite()).then(|| "amplitude must be finite".into())
    });
    let width = raw.f64_or(&format!("{section}.width"), 1.0, |v| {
        (v <= 0.0).then(|| "width must be positive".into())
    });
    let radius = raw.f64_or(&format!("{section}.radius"), 1.0, |v| {
        (v <= 0.0).then(|| "radius must be positive".into())
    });
    let max_mode = raw.usize_or(&format!("{section}.max_mode"), 4, |v| {
        (v == 0).then(|| "max_mode must be at least 1".into())
    });
    let center = match raw.take(&format!("{section}.center")) {
        None => None,
        Some(raw_c) => {
            let parts: Result<Vec<f64>, _> =
                raw_c.split(',').map(|p| p.trim().parse::<f64>()).collect();
            match parts {
                Ok(v) => Some(v),
                Err(_) => {
                    raw.violation(format!(
                        "{section}.center: expected comma-separated coordinates"
                    ));
                    None
                }
            }
        }
    };
    let kind = match kind_str.as_str() {
        "zero" => DataKind::Zero,
        "gaussian" => DataKind::Gaussian { amplitude, width },
        "bump" => DataKind::Bump { amplitude, radius },
        "band_limited_random" => DataKind::BandLimitedRandom { amplitude, max_mode },
        other => {
            raw.violation(format!(
                "{section}.kind: unknown preset '{other}' \
                 (expected zero | gaussian | bump | band_limited_random)"
            ));
            DataKind::Zero
        }
    };
    DataConfig { kind, center }
}

/// Parse and validate a configuration. Every violation is collected; the
/// error lists all of them.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut map = BTreeMap::new();
    let mut violations = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let stripped = match line.find('#') {
            Some(i) => &line[..i],
            None => line,
        }
        .trim();
        if stripped.is_empty() {
            continue;
        }
        let Some((key, value)) = stripped.split_once('=') else {
            violations
                .push(format!("line {}: expected 'key = value', got '{stripped}'", lineno + 1));
            continue;
        };
        let key = key.trim().to_string();
        if !KNOWN_KEYS.contains(&key.as_str()) {
            violations.push(format!("line {}: unknown key '{key}'", lineno + 1));
            continue;
        }
        if map.insert(key.clone(), value.trim().to_string()).is_some() {
            violations.push(format!("line {}: duplicate key '{key}'", lineno + 1));
        }
    }
    let mut raw = Raw { map, violations };

    let n = raw.usize_or("model.n", 2, |v| {
        (!(1..=3).contains(&v)).then(|| "dimension must be 1, 2 or 3".into())
    });
    let sigma = match raw.take("model.sigma") {
        None => {
            raw.violation("model.sigma is required".into());
            Ratio::new(1, 2)
        }
        Some(s) => match parse_rational(&s) {
            Some(v) if v > Ratio::new(0, 1) && v <= Ratio::new(1, 1) => v,
            Some(_) => {
                raw.violation(format!("model.sigma must lie in (0,1], got {s}"));
                Ratio::new(1, 2)
            }
            None => {
                raw.violation(format!("model.sigma: expected a rational or decimal, got '{s}'"));
                Ratio::new(1, 2)
            }
        },
    };
    let mu = raw.f64_or("model.mu", 1.0, |v| {
        (!(v > 0.0 && v.is_finite())).then(|| "mu must be a positive real".into())
    });
    let mode = match raw.take("run.mode").as_deref() {
        None | Some("grid") => RunMode::Grid,
        Some("oracle") => RunMode::Oracle,
        Some(other) => {
            raw.violation(format!("run.mode: expected grid | oracle, got '{other}'"));
            RunMode::Grid
        }
    };
    let seed = match raw.take("run.seed") {
        None => 0,
        Some(s) => s.parse::<u64>().unwrap_or_else(|_| {
            raw.violation(format!("run.seed: expected an unsigned integer, got '{s}'"));
            0
        }),
    };
    let default_points = match n {
        1 => 1024,
        2 => 512,
        _ => 128,
    };
    let grid_points = raw.usize_or("grid.points", default_points, |v| {
        (v < 8 || v % 2 != 0).then(|| "points must be an even integer >= 8".into())
    });
    let box_length = raw.f64_or("grid.box_length", 200.0, |v| {
        (!(v > 0.0 && v.is_finite())).then(|| "box_length must be a positive real".into())
    });
    let oracle_r_max = match raw.take("oracle.r_max") {
        None => None,
        Some(s) if s == "auto" => None,
        Some(s) => match s.parse::<f64>() {
            Ok(v) if v > 0.0 => Some(v),
            _ => {
                raw.violation(format!(
                    "oracle.r_max: expected 'auto' or a positive real, got '{s}'"
                ));
                None
            }
        },
    };
    let u0 = parse_data_section(&mut raw, "u0");
    let u1 = parse_data_section(&mut raw, "u1");
    let p = match raw.take("nonlinearity.p") {
        None => None,
        Some(s) => match s.parse::<f64>() {
            Ok(v) if v > 1.0 => Some(v),
            _ => {
                raw.violation(format!("nonlinearity.p must exceed 1, got '{s}'"));
                None
            }
        },
    };
    let signed_power = match raw.take("nonlinearity.variant").as_deref() {
        None | Some("abs_power") => false,
        Some("signed_power") => true,
        Some(other) => {
            raw.violation(format!(
                "nonlinearity.variant: expected abs_power | signed_power, got '{other}'"
            ));
            false
        }
    };
    let dt = raw.f64_or("stepper.dt", 0.01, |v| (v <= 0.0).then(|| "dt must be positive".into()));
    let t_end =
        raw.f64_or("stepper.t_end", 10.0, |v| (v <= 0.0).then(|| "t_end must be positive".into()));
    let dealias = match raw.take("stepper.dealias").as_deref() {
        None | Some("auto") => DealiasChoice::Auto,
        Some("on") => DealiasChoice::On,
        Some("off") => DealiasChoice::Off,
        Some(other) => {
            raw.violation(format!("stepper.dealias: expected auto | on | off, got '{other}'"));
            DealiasChoice::Auto
        }
    };
    let blowup_factor = raw.f64_or("stepper.blowup_factor", 1e6, |v| {
        (v <= 1.0).then(|| "blowup_factor must exceed 1".into())
    });
    let max_steps = raw.usize_or("stepper.max_steps", 1_000_000, |v| {
        (v == 0).then(|| "max_steps must be positive".into())
    });
    let coupling = raw.f64_or("stepper.coupling", 1.0, |v| {
        (!v.is_finite()).then(|| "coupling must be finite".into())
    });
    let times_start =
        raw.f64_or("times.start", 1.0, |v| (v <= 0.0).then(|| "start must be positive".into()));
    let times_stop =
        raw.f64_or("times.stop", 1e4, |v| (v <= 0.0).then(|| "stop must be positive".into()));
    if times_stop <= times_start {
        raw.violation(format!(
            "times.stop must exceed times.start (got {times_start} .. {times_stop})"
        ));
    }
    let times_count =
        raw.usize_or("times.count", 40, |v| (v < 2).then(|| "count must be at least 2".into()));
    let times_spacing = match raw.take("times.spacing").as_deref() {
        None | Some("log") => Spacing::Log,
        Some("linear") => Spacing::Linear,
        Some(other) => {
            raw.violation(format!("times.spacing: expected log | linear, got '{other}'"));
            Spacing::Log
        }
    };
    let fit_window = {
        let _auto = matches!(raw.take("fit.window").as_deref(), Some("auto") | None);
        let lo = raw.take("fit.window_lo");
        let hi = raw.take("fit.window_hi");
        match (lo, hi) {
            (None, None) => None,
            (Some(lo), Some(hi)) => match (lo.parse::<f64>(), hi.parse::<f64>()) {
                (Ok(a), Ok(b)) if a < b && a > 0.0 => Some((a, b)),
                _ => {
                    raw.violation("fit.window_lo/window_hi must be positive with lo < hi".into());
                    None
                }
            },
            _ => {
                raw.violation("fit.window_lo and fit.window_hi must be given together".into());
                None
            }
        }
    };
    let fit_tol =
        raw.f64_or("fit.tol", 0.05, |v| (v <= 0.0).then(|| "tol must be positive".into()));
    let quantities = raw
        .take("series.quantities")
        .map(|s| s.split(',').map(|x| x.trim().to_string()).collect::<Vec<_>>());
    if let Some(qs) = &quantities {
        for label in qs {
            if crate::analysis::Quantity::parse(label).is_none() {
                raw.violation(format!("series.quantities: unknown quantity '{label}'"));
            }
        }
    }
    let picard_iterates = raw
        .usize_or("picard.iterates", 8, |v| (v < 2).then(|| "iterates must be at least 2".into()));
    let picard_quadrature_points = raw.usize_or("picard.quadrature_points", 40, |v| {
        (v < 2).then(|| "quadrature_points must be at least 2".into())
    });
    let exponents_m = match raw.take("exponents.m") {
        None => Ratio::new(2, 1),
        Some(s) => match parse_rational(&s) {
            Some(v) if v > Ratio::new(1, 1) && v <= Ratio::new(2, 1) => v,
            _ => {
                raw.violation(format!("exponents.m must lie in (1,2], got '{s}'"));
                Ratio::new(2, 1)
            }
        },
    };
    let exponents_n_list = match raw.take("exponents.n_list") {
        None => vec![2, 3, 4, 5, 6, 7, 8],
        Some(s) => {
            let parsed: Result<Vec<u32>, _> = s.split(',').map(|x| x.trim().parse()).collect();
            match parsed {
                Ok(v) if !v.is_empty() && v.iter().all(|&n| n >= 2) => v,
                _ => {
                    raw.violation(format!(
                        "exponents.n_list: expected comma-separated integers >= 2, got '{s}'"
                    ));
                    vec![2, 3, 4]
                }
            }
        }
    };
    let compare_tol =
        raw.f64_or("compare.tol", 1e-4, |v| (v <= 0.0).then(|| "tol must be positive".into()));

    let violations = raw.violations;
    if !violations.is_empty() {
        return Err(ConfigError { violations });
    }
    Ok(ExperimentConfig {
        n,
        sigma,
        mu,
        mode,
        seed,
        grid_points,
        box_length,
        oracle_r_max,
        u0,
        u1,
        p,
        signed_power,
        dt,
        t_end,
        dealias,
        blowup_factor,
        max_steps,
        coupling,
        times_start,
        times_stop,
        times_count,
        times_spacing,
        fit_window,
        fit_tol,
        quantities,
        picard_iterates,
        picard_quadrature_points,
        exponents_m,
        exponents_n_list,
        compare_tol,
    })
}

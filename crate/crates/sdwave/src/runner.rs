//! Experiment runner behind the CLI: builds models and data from an
//! [`ExperimentConfig`], drives the engines, and persists results.
//!
//! Every run writes into its output directory:
//!
//! - `manifest.cfg` — the fully resolved configuration (re-parseable);
//! - `report.txt` — the human-readable outcome;
//! - `series_<quantity>.csv` — norm histories (`t,value,quantity,mode`);
//! - `verdicts.csv` — comparisons (`quantity,predicted,measured,tol,pass`);
//! - per-subcommand extras (`exponents.csv`, `picard.csv`, `compare.csv`).
//!
//! Exit codes: 0 all verdicts pass, 1 a verdict failed, 2 configuration
//! error, 3 runtime error (quadrature non-convergence, overflow,
//! max-steps). Identical configurations produce byte-identical CSV output:
//! floats are printed with 17 significant digits and all reductions are
//! order-deterministic.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::analysis::{
    compare, default_window, fit_rate, log_growth_check, Quantity, SeriesMode, TimeSeries,
    Verdict,
};
use crate::config::{
    parse_config, DataKind, DealiasChoice, ExperimentConfig, RunMode,
};
use crate::exponents::{
    admissible_range, blowup_threshold, gap_report, predicted_rates, to_f64, PBound, PSet,
    RateEntry, RateTable,
};
use crate::kernels::ModelSpec;
use crate::linear::{decay_series, State};
use crate::presets;
use crate::radial::RadialProfile;
use crate::semilinear::{
    picard_iterate, run, Nonlinearity, NonlinearityKind, RunStatus, SemilinearError,
    StepperConfig,
};
use crate::spectral::GridSpec;

pub const EXIT_PASS: i32 = 0;
pub const EXIT_VERDICT_FAILURE: i32 = 1;
pub const EXIT_CONFIG_ERROR: i32 = 2;
pub const EXIT_RUNTIME_ERROR: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    LinearDecay,
    Semilinear,
    BlowupProbe,
    Picard,
    Exponents,
    OracleCompare,
}

impl Subcommand {
    pub fn name(&self) -> &'static str {
        match self {
            Subcommand::LinearDecay => "linear-decay",
            Subcommand::Semilinear => "semilinear",
            Subcommand::BlowupProbe => "blowup-probe",
            Subcommand::Picard => "picard",
            Subcommand::Exponents => "exponents",
            Subcommand::OracleCompare => "oracle-compare",
        }
    }
}

/// 17-significant-digit float formatting used in every CSV.
pub fn fmt_float(v: f64) -> String {
    format!("{v:.16e}")
}

enum RunnerError {
    Config(Vec<String>),
    Runtime(String),
}

impl From<SemilinearError> for RunnerError {
    fn from(e: SemilinearError) -> Self {
        match e {
            SemilinearError::InvalidConfig(_) | SemilinearError::ThresholdBelowData { .. } => {
                RunnerError::Config(vec![e.to_string()])
            }
            other => RunnerError::Runtime(other.to_string()),
        }
    }
}

struct Output {
    report: String,
    quiet: bool,
}

impl Output {
    fn line(&mut self, s: &str) {
        if !self.quiet {
            println!("{s}");
        }
        self.report.push_str(s);
        self.report.push('\n');
    }
}

/// Run one subcommand against a configuration text. Returns the process
/// exit code.
pub fn execute(
    sub: Subcommand,
    cfg_text: &str,
    out_dir: &Path,
    quiet: bool,
    seed_override: Option<u64>,
) -> i32 {
    let mut cfg = match parse_config(cfg_text) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("{e}");
            return EXIT_CONFIG_ERROR;
        }
    };
    if let Some(seed) = seed_override {
        cfg.seed = seed;
    }
    if let Err(e) = fs::create_dir_all(out_dir) {
        eprintln!("cannot create output directory {}: {e}", out_dir.display());
        return EXIT_RUNTIME_ERROR;
    }
    if let Err(e) = fs::write(out_dir.join("manifest.cfg"), cfg.manifest()) {
        eprintln!("cannot write manifest: {e}");
        return EXIT_RUNTIME_ERROR;
    }
    let mut out = Output { report: String::new(), quiet };
    out.line(&format!("subcommand: {}", sub.name()));
    let result = match sub {
        Subcommand::LinearDecay => run_linear_decay(&cfg, out_dir, &mut out),
        Subcommand::Semilinear => run_semilinear(&cfg, out_dir, &mut out, false),
        Subcommand::BlowupProbe => run_semilinear(&cfg, out_dir, &mut out, true),
        Subcommand::Picard => run_picard(&cfg, out_dir, &mut out),
        Subcommand::Exponents => run_exponents(&cfg, out_dir, &mut out),
        Subcommand::OracleCompare => run_oracle_compare(&cfg, out_dir, &mut out),
    };
    let code = match result {
        Ok(true) => EXIT_PASS,
        Ok(false) => {
            out.line("verdict: FAIL");
            EXIT_VERDICT_FAILURE
        }
        Err(RunnerError::Config(violations)) => {
            for v in &violations {
                eprintln!("config: {v}");
                out.report.push_str(&format!("config error: {v}\n"));
            }
            EXIT_CONFIG_ERROR
        }
        Err(RunnerError::Runtime(msg)) => {
            eprintln!("runtime error: {msg}");
            out.report.push_str(&format!("runtime error: {msg}\n"));
            EXIT_RUNTIME_ERROR
        }
    };
    if let Err(e) = fs::write(out_dir.join("report.txt"), &out.report) {
        eprintln!("cannot write report: {e}");
        return EXIT_RUNTIME_ERROR;
    }
    code
}

fn build_model(cfg: &ExperimentConfig) -> Result<ModelSpec, RunnerError> {
    ModelSpec::new(cfg.n, cfg.sigma_f64(), cfg.mu)
        .map_err(|e| RunnerError::Config(vec![e.to_string()]))
}

fn build_grid(cfg: &ExperimentConfig) -> Result<GridSpec, RunnerError> {
    GridSpec::new(cfg.n, cfg.grid_points, cfg.box_length)
        .map_err(|e| RunnerError::Config(vec![e.to_string()]))
}

fn build_state(
    cfg: &ExperimentConfig,
    grid: &GridSpec,
    out: &mut Output,
) -> (State, Vec<String>) {
    let (u0, w0) = presets::realize(grid, &cfg.u0, cfg.seed);
    let (u1, w1) = presets::realize(grid, &cfg.u1, cfg.seed.wrapping_add(1));
    let mut warnings = w0;
    warnings.extend(w1);
    for w in &warnings {
        out.line(&format!("warning: {w}"));
    }
    (State::new(u0, u1, 0.0), warnings)
}

fn build_profiles(
    cfg: &ExperimentConfig,
) -> Result<(RadialProfile, RadialProfile), RunnerError> {
    let v0 = presets::oracle_profile(cfg.n, &cfg.u0, cfg.oracle_r_max)
        .map_err(|e| RunnerError::Config(vec![format!("u0: {e}")]))?;
    let v1 = presets::oracle_profile(cfg.n, &cfg.u1, cfg.oracle_r_max)
        .map_err(|e| RunnerError::Config(vec![format!("u1: {e}")]))?;
    Ok((v0, v1))
}

fn write_series_csv(dir: &Path, series: &TimeSeries) -> Result<(), RunnerError> {
    let mut s = String::from("t,value,quantity,mode\n");
    for (t, v) in series.times.iter().zip(series.values.iter()) {
        let _ = writeln!(
            s,
            "{},{},{},{}",
            fmt_float(*t),
            fmt_float(*v),
            series.quantity.label(),
            series.mode.label()
        );
    }
    let name = format!("series_{}.csv", series.quantity.label());
    fs::write(dir.join(name), s).map_err(|e| RunnerError::Runtime(e.to_string()))
}

fn write_verdicts_csv(dir: &Path, verdicts: &[Verdict]) -> Result<(), RunnerError> {
    let mut s = String::from("quantity,predicted,measured,tol,pass\n");
    for v in verdicts {
        let _ = writeln!(
            s,
            "{},{},{},{},{}",
            v.quantity,
            fmt_float(v.predicted),
            fmt_float(v.measured),
            fmt_float(v.tol),
            v.pass
        );
    }
    fs::write(dir.join("verdicts.csv"), s).map_err(|e| RunnerError::Runtime(e.to_string()))
}

/// Predicted decay entry for one series quantity, if the tables cover it.
fn prediction_for(table: &RateTable, q: &Quantity) -> Option<RateEntry> {
    match q {
        Quantity::U(_) => Some(table.u),
        Quantity::Ut(_) => Some(table.ut),
        Quantity::Grad(_) => Some(table.grad),
        // the pair decays at the slower of its two component rates
        Quantity::GradUt(_) => {
            let e = if table.grad.exponent >= table.ut.exponent { table.grad } else { table.ut };
            Some(e)
        }
        Quantity::Grad2L2 => table.grad2,
        Quantity::Hdot(k) => {
            let entry = table.hdot2sigma?;
            let two_sigma = to_f64(table.sigma) * 2.0;
            ((k - two_sigma).abs() < 1e-12).then_some(entry)
        }
        _ => None,
    }
}

fn run_linear_decay(
    cfg: &ExperimentConfig,
    dir: &Path,
    out: &mut Output,
) -> Result<bool, RunnerError> {
    let model = build_model(cfg)?;
    let times = cfg.times();
    let quantity_labels: Vec<String> = match &cfg.quantities {
        Some(qs) => qs.clone(),
        None => match cfg.mode {
            RunMode::Oracle => {
                vec!["u_L2".into(), "ut_L2".into(), "grad_L2".into()]
            }
            RunMode::Grid => vec!["u_L2".into(), "grad_ut_L2".into()],
        },
    };
    let (state, profiles) = match cfg.mode {
        RunMode::Grid => {
            let grid = build_grid(cfg)?;
            let (s, _) = build_state(cfg, &grid, out);
            (Some(s), None)
        }
        RunMode::Oracle => (None, Some(build_profiles(cfg)?)),
    };
    let mode = match cfg.mode {
        RunMode::Grid => SeriesMode::Grid,
        RunMode::Oracle => SeriesMode::Oracle,
    };

    let rate_table = predicted_rates(cfg.sigma, cfg.n as u32, cfg.exponents_m).ok();
    let mut verdicts: Vec<Verdict> = Vec::new();
    for label in &quantity_labels {
        let q = Quantity::parse(label)
            .ok_or_else(|| RunnerError::Config(vec![format!("unknown quantity '{label}'")]))?;
        let series = decay_series(
            &model,
            mode,
            state.as_ref(),
            profiles.as_ref().map(|(a, b)| (a, b)),
            &times,
            q,
            true,
        )
        .map_err(|e| RunnerError::Runtime(e.to_string()))?;
        write_series_csv(dir, &series)?;
        if series.values.iter().all(|&v| v == 0.0) {
            out.line(&format!("{label}: degenerate series (identically zero); no fit"));
            continue;
        }
        let window = cfg.fit_window.unwrap_or_else(|| default_window(&series));
        let entry = rate_table.as_ref().and_then(|t| prediction_for(t, &q));
        match entry {
            None => {
                out.line(&format!("{label}: no predicted rate for this quantity; series only"));
            }
            Some(entry) if entry.log_flag => {
                let chk = log_growth_check(&series, window)
                    .map_err(|e| RunnerError::Runtime(e.to_string()))?;
                let measured = chk.ratio_max / chk.ratio_min;
                let v = Verdict {
                    quantity: format!("{label}_log"),
                    predicted: 2.0,
                    measured,
                    tol: 0.0,
                    pass: chk.bounded,
                    window,
                };
                out.line(&format!(
                    "{label}: log-bounded check over [{:.3e}, {:.3e}]: ratio_max/ratio_min = \
                     {measured:.4} (bound 2) -> {}",
                    window.0,
                    window.1,
                    if v.pass { "pass" } else { "FAIL" }
                ));
                verdicts.push(v);
            }
            Some(entry) => {
                let predicted = to_f64(entry.exponent);
                let fit = fit_rate(&series, window)
                    .map_err(|e| RunnerError::Runtime(e.to_string()))?;
                let v = compare(&fit, predicted, cfg.fit_tol, label);
                out.line(&format!(
                    "{label}: slope {:.4} vs predicted {predicted:.4} (tol {}) over \
                     [{:.3e}, {:.3e}], r2 = {:.6} -> {}",
                    fit.slope,
                    cfg.fit_tol,
                    window.0,
                    window.1,
                    fit.r_squared,
                    if v.pass { "pass" } else { "FAIL" }
                ));
                verdicts.push(v);
            }
        }
    }
    write_verdicts_csv(dir, &verdicts)?;
    Ok(verdicts.iter().all(|v| v.pass))
}

fn build_nonlinearity(cfg: &ExperimentConfig) -> Result<Nonlinearity, RunnerError> {
    let p = cfg.p.ok_or_else(|| {
        RunnerError::Config(vec!["nonlinearity.p is required for this subcommand".into()])
    })?;
    let variant =
        if cfg.signed_power { NonlinearityKind::SignedPower } else { NonlinearityKind::AbsPower };
    Nonlinearity::new(p, variant).map_err(|e| RunnerError::Config(vec![e.to_string()]))
}

fn resolve_stepper(cfg: &ExperimentConfig, nl: &Nonlinearity, initial_max: f64) -> StepperConfig {
    let dealias = match cfg.dealias {
        DealiasChoice::Auto => nl.default_dealias(),
        DealiasChoice::On => true,
        DealiasChoice::Off => false,
    };
    let threshold =
        if initial_max > 0.0 { cfg.blowup_factor * initial_max } else { cfg.blowup_factor };
    let mut sc = StepperConfig::new(cfg.dt, dealias, threshold, cfg.max_steps);
    sc.coupling = cfg.coupling;
    sc
}

fn run_semilinear(
    cfg: &ExperimentConfig,
    dir: &Path,
    out: &mut Output,
    probe: bool,
) -> Result<bool, RunnerError> {
    let model = build_model(cfg)?;
    let grid = build_grid(cfg)?;
    let nl = build_nonlinearity(cfg)?;
    let (state, _) = build_state(cfg, &grid, out);

    let bound = blowup_threshold(cfg.sigma, cfg.n as u32)
        .map_err(|e| RunnerError::Config(vec![e.to_string()]))?;
    let bound_f = to_f64(bound.value);
    if probe {
        let data_value = crate::exponents::blowdata_value(&model, &state.u, &state.ut);
        out.line(&format!("blow-up data functional: integral(u1 + mu (-lap)^sigma u0) = {data_value:.6e}"));
        if data_value <= 0.0 {
            return Err(RunnerError::Config(vec![format!(
                "blowup-probe requires a positive data functional \
                 (integral of u1 + mu(-lap)^sigma u0), got {data_value:.6e}"
            )]));
        }
    }
    if nl.p <= bound_f {
        out.line(&format!(
            "warning: p = {} is at or below the nonexistence bound {} ({}); \
             global solutions with positive data are not expected",
            nl.p,
            bound.value,
            if to_f64(cfg.sigma) <= 0.5 { "1 + 2/(n-2*sigma)" } else { "1 + 2/(n-1)" },
        ));
    }
    let sc = resolve_stepper(cfg, &nl, state.u.max_abs());
    out.line(&format!(
        "stepper: dt = {}, dealias = {}, blow-up threshold = {:.3e}, coupling = {}",
        sc.dt, sc.dealias, sc.blowup_threshold, sc.coupling
    ));
    let outcome = run(&model, &nl, &state, &sc, cfg.t_end)?;
    for s in &outcome.series {
        write_series_csv(dir, s)?;
    }
    match outcome.status {
        RunStatus::Completed => {
            out.line(&format!(
                "status: completed through t = {} (final max-norm {:.6e})",
                outcome.final_time,
                outcome.final_state.u.max_abs()
            ));
        }
        RunStatus::BlowupDetected => {
            let (lo, hi) = outcome.blowup_time_bracket.unwrap();
            out.line(&format!(
                "status: blowup_detected; threshold crossing bracketed in [{lo:.6}, {hi:.6}] \
                 (width {:.2e} <= dt/8)",
                hi - lo
            ));
        }
    }
    Ok(true)
}

fn run_picard(cfg: &ExperimentConfig, dir: &Path, out: &mut Output) -> Result<bool, RunnerError> {
    let model = build_model(cfg)?;
    let grid = build_grid(cfg)?;
    let nl = build_nonlinearity(cfg)?;
    let (state, _) = build_state(cfg, &grid, out);
    let report = match picard_iterate(
        &model,
        &nl,
        &state,
        cfg.t_end,
        cfg.picard_iterates,
        cfg.picard_quadrature_points,
    ) {
        Ok(r) => r,
        Err(SemilinearError::PicardDiverged { diffs }) => {
            out.line(&format!("picard iteration diverged; diffs = {diffs:?}"));
            return Ok(false);
        }
        Err(e) => return Err(e.into()),
    };
    let mut csv = String::from("iterate,xnorm_diff,ratio,converged\n");
    for s in &report.steps {
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            s.index,
            fmt_float(s.xnorm_diff),
            s.ratio.map(fmt_float).unwrap_or_default(),
            s.converged
        );
    }
    fs::write(dir.join("picard.csv"), csv).map_err(|e| RunnerError::Runtime(e.to_string()))?;
    let mut pass = true;
    for s in &report.steps {
        let ratio_txt =
            s.ratio.map(|r| format!("{r:.3e}")).unwrap_or_else(|| "-".to_string());
        out.line(&format!(
            "iterate {}: X-norm diff {:.6e}, ratio {}{}",
            s.index,
            s.xnorm_diff,
            ratio_txt,
            if s.converged { " (converged)" } else { "" }
        ));
        if s.index >= 3 {
            if let Some(r) = s.ratio {
                if r > 0.5 {
                    pass = false;
                }
            }
        }
    }
    out.line(&format!(
        "contraction (ratios <= 1/2 from iterate 3): {}",
        if pass { "pass" } else { "FAIL" }
    ));
    Ok(pass)
}

fn pset_bounds(set: &PSet) -> (String, String) {
    match set {
        PSet::Empty => ("empty".into(), "empty".into()),
        PSet::Point(p) => (p.to_string(), p.to_string()),
        PSet::Range(iv) => {
            let hi = match iv.hi {
                PBound::Finite(h) => h.to_string(),
                PBound::Unbounded => "inf".into(),
            };
            (iv.lo.to_string(), hi)
        }
    }
}

fn run_exponents(cfg: &ExperimentConfig, dir: &Path, out: &mut Output) -> Result<bool, RunnerError> {
    let sigma = cfg.sigma;
    let m = cfg.exponents_m;
    let mut csv = String::from("sigma,n,m,threshold,lo,hi,regime\n");
    out.line(&format!(
        "{:>6} {:>3} {:>5} {:>10} {:>24} {:>12}",
        "sigma", "n", "m", "threshold", "admissible p", "regime"
    ));
    for &n in &cfg.exponents_n_list {
        let report = admissible_range(sigma, n, m)
            .map_err(|e| RunnerError::Config(vec![e.to_string()]))?;
        let (lo, hi) = pset_bounds(&report.admissible);
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{},{}",
            sigma,
            n,
            m,
            report.existence_threshold,
            lo,
            hi,
            report.regime.label()
        );
        out.line(&format!(
            "{:>6} {:>3} {:>5} {:>10} {:>24} {:>12}",
            sigma.to_string(),
            n,
            m.to_string(),
            report.existence_threshold.to_string(),
            report.admissible.to_string(),
            report.regime.label()
        ));
        if n >= 2 {
            let b = blowup_threshold(sigma, n).map_err(|e| RunnerError::Config(vec![e.to_string()]))?;
            let g = gap_report(sigma, n).map_err(|e| RunnerError::Config(vec![e.to_string()]))?;
            out.line(&format!(
                "        blow-up bound {} | existence-vs-blow-up gap {}",
                b.value, g.gap
            ));
        }
    }
    fs::write(dir.join("exponents.csv"), csv).map_err(|e| RunnerError::Runtime(e.to_string()))?;
    Ok(true)
}

fn run_oracle_compare(
    cfg: &ExperimentConfig,
    dir: &Path,
    out: &mut Output,
) -> Result<bool, RunnerError> {
    let model = build_model(cfg)?;
    let grid = build_grid(cfg)?;
    let (state, _) = build_state(cfg, &grid, out);
    let (v0, v1) = build_profiles(cfg)?;
    // heuristic wrap time: unit group speed, data extent ~5 widths
    let width = [&cfg.u0.kind, &cfg.u1.kind]
        .iter()
        .filter_map(|k| match k {
            DataKind::Gaussian { width, .. } => Some(*width),
            _ => None,
        })
        .fold(1.0f64, f64::max);
    let t_wrap = (cfg.box_length / 2.0 - 5.0 * width).max(0.0);
    out.line(&format!("wrap criterion: comparisons require t <= {t_wrap:.3} (recorded)"));

    let times = cfg.times();
    let quantities = [Quantity::U(2.0), Quantity::Ut(2.0), Quantity::Grad(2.0)];
    let mut csv = String::from("t,quantity,grid,oracle,rel_diff,pre_wrap\n");
    let mut pass = true;
    let mut worst: f64 = 0.0;
    for q in quantities {
        let gs = decay_series(&model, SeriesMode::Grid, Some(&state), None, &times, q, false)
            .map_err(|e| RunnerError::Runtime(e.to_string()))?;
        let os = decay_series(&model, SeriesMode::Oracle, None, Some((&v0, &v1)), &times, q, false)
            .map_err(|e| RunnerError::Runtime(e.to_string()))?;
        write_series_csv(dir, &os)?;
        for i in 0..times.len() {
            let (g, o) = (gs.values[i], os.values[i]);
            let rel = (g - o).abs() / o.abs().max(f64::MIN_POSITIVE);
            let pre = times[i] <= t_wrap;
            if pre {
                worst = worst.max(rel);
                if rel > cfg.compare_tol {
                    pass = false;
                }
            }
            let _ = writeln!(
                csv,
                "{},{},{},{},{},{}",
                fmt_float(times[i]),
                q.label(),
                fmt_float(g),
                fmt_float(o),
                fmt_float(rel),
                pre
            );
        }
    }
    fs::write(dir.join("compare.csv"), csv).map_err(|e| RunnerError::Runtime(e.to_string()))?;
    out.line(&format!(
        "grid/oracle agreement: worst pre-wrap relative difference {worst:.3e} \
         (tolerance {}) -> {}",
        cfg.compare_tol,
        if pass { "pass" } else { "FAIL" }
    ));
    Ok(pass)
}

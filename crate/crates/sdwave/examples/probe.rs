// scratch calibration probe; removed before shipping
use sdwave::analysis::{fit_rate, log_growth_check, Quantity, SeriesMode};
use sdwave::exponents::dm_norm;
use sdwave::kernels::{ode_residual, ModelSpec};
use sdwave::linear::{decay_series, State};
use sdwave::radial::{oracle_series, radial_norm, RadialProfile};
use sdwave::semilinear::{picard_iterate, run, Nonlinearity, NonlinearityKind, StepperConfig};
use sdwave::spectral::{grid_norm, GridSpec, RealField};

fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp()).collect()
}

fn gaussian(grid: GridSpec, amp: f64, w: f64) -> RealField {
    let c = grid.box_length() / 2.0;
    RealField::from_fn(grid, move |x| {
        let mut r2 = 0.0;
        for &xi in x {
            r2 += (xi - c) * (xi - c);
        }
        amp * (-r2 / (2.0 * w * w)).exp()
    })
}

fn bump(grid: GridSpec, amp: f64, radius: f64) -> RealField {
    let c = grid.box_length() / 2.0;
    RealField::from_fn(grid, move |x| {
        let mut r2 = 0.0;
        for &xi in x {
            r2 += (xi - c) * (xi - c);
        }
        let s = r2 / (radius * radius);
        if s >= 1.0 {
            0.0
        } else {
            amp * (1.0 - 1.0 / (1.0 - s)).exp()
        }
    })
}

fn main() {
    let which = std::env::args().nth(1).unwrap_or_else(|| "agree".into());
    match which.as_str() {
        "agree" => {
            // grid vs oracle, sigma=1/2 mu=2 n=2
            let grid = GridSpec::new(2, 256, 100.0).unwrap();
            let m = ModelSpec::new(2, 0.5, 2.0).unwrap();
            let w = 2.0;
            let state = State::new(RealField::zeros(grid), gaussian(grid, 1.0, w), 0.0);
            let z = RadialProfile::zero();
            let v1 = RadialProfile::from_physical_gaussian(2, 1.0, w);
            for t in [0.5, 2.0, 10.0, 30.0] {
                for (q, j, k) in
                    [(Quantity::U(2.0), 0, 0.0), (Quantity::Ut(2.0), 1, 0.0), (Quantity::Grad(2.0), 0, 1.0)]
                {
                    let g = decay_series(&m, SeriesMode::Grid, Some(&state), None, &[t], q, false)
                        .unwrap()
                        .values[0];
                    let o = radial_norm(&m, j, k, &z, &v1, t).unwrap();
                    println!("t={t} {}: grid {g:.9e} oracle {o:.9e} rel {:.2e}", q.label(), (g - o).abs() / o);
                }
            }
        }
        "sweep" => {
            // criterion 5 sweep shape
            let t0 = std::time::Instant::now();
            let mut count = 0usize;
            let mut worst = 0.0f64;
            let mut worst_at = String::new();
            for &sigma in &[0.25, 0.4, 0.5, 0.55, 0.75, 1.0] {
                for &mu in &[0.5, 1.0, 2.0, 3.0] {
                    let m = ModelSpec::new(2, sigma, mu).unwrap();
                    let mut rs = logspace(1e-3, 10.0, 8);
                    if let Some(rstar) = m.degenerate_radius() {
                        if rstar < 50.0 {
                            // points with |discriminant| < 1e-6
                            rs.push(rstar * (1.0 + 1e-9));
                            rs.push(rstar * (1.0 - 1e-9));
                        }
                    }
                    for &r in &rs {
                        for &t in &[0.1, 0.5, 1.0, 2.0] {
                            let res = ode_residual(&m, r, t, 1e-4);
                            count += 1;
                            if res > worst {
                                worst = res;
                                worst_at = format!("sigma={sigma} mu={mu} r={r:.4} t={t}");
                            }
                        }
                    }
                }
            }
            println!("{count} points, worst residual {worst:.3e} at {worst_at}, elapsed {:?}", t0.elapsed());
        }
        "blowup" => {
            let grid = GridSpec::new(2, 128, 40.0).unwrap();
            let m = ModelSpec::new(2, 0.5, 2.0).unwrap();
            let u1 = bump(grid, 5.0, 3.0);
            println!("bump integral = {:.4}", grid.cell_volume() * u1.values.iter().sum::<f64>());
            let s = State::new(RealField::zeros(grid), u1, 0.0);
            let nl2 = Nonlinearity::new(2.0, NonlinearityKind::AbsPower).unwrap();
            let cfg = StepperConfig::new(0.02, true, 1e6, 200_000);
            let t0 = std::time::Instant::now();
            let out = run(&m, &nl2, &s, &cfg, 50.0).unwrap();
            println!("p=2: status {:?} bracket {:?} elapsed {:?}", out.status, out.blowup_time_bracket, t0.elapsed());

            let u1s = bump(grid, 0.01, 3.0);
            let init_max = u1s.max_abs();
            let s = State::new(RealField::zeros(grid), u1s, 0.0);
            let nl4 = Nonlinearity::new(4.0, NonlinearityKind::AbsPower).unwrap();
            let cfg = StepperConfig::new(0.05, true, 1e6, 200_000);
            let t0 = std::time::Instant::now();
            let out = run(&m, &nl4, &s, &cfg, 50.0).unwrap();
            let peak = out
                .series
                .iter()
                .find(|s| s.quantity == Quantity::LInf)
                .map(|s| s.values.iter().cloned().fold(0.0, f64::max))
                .unwrap();
            println!(
                "p=4 small: status {:?} final max {:.4e} (initial data max {init_max:.4e}, peak {peak:.4e}) elapsed {:?}",
                out.status,
                out.final_state.u.max_abs(),
                t0.elapsed()
            );
        }
        "picard" => {
            let grid = GridSpec::new(2, 48, 28.0).unwrap();
            let m = ModelSpec::new(2, 0.5, 2.0).unwrap();
            let u0 = gaussian(grid, 2e-4, 2.0);
            let u1 = gaussian(grid, 1e-4, 2.0);
            println!("dm_norm = {:.4e}", dm_norm(&u0, &u1, 2.0, 1.0).unwrap());
            let s = State::new(u0, u1, 0.0);
            let nl = Nonlinearity::new(4.0, NonlinearityKind::AbsPower).unwrap();
            let t0 = std::time::Instant::now();
            let rep = picard_iterate(&m, &nl, &s, 10.0, 8, 40).unwrap();
            for st in &rep.steps {
                println!(
                    "iter {}: diff {:.6e} ratio {:?} converged {}",
                    st.index, st.xnorm_diff, st.ratio, st.converged
                );
            }
            println!("picard elapsed {:?}", t0.elapsed());
            let cfg = StepperConfig::new(10.0 / 400.0, true, 1.0, 100_000);
            let t0 = std::time::Instant::now();
            let etd = run(&m, &nl, &s, &cfg, 10.0).unwrap();
            let diff = rep.final_state.u.add_scaled(-1.0, &etd.final_state.u);
            println!(
                "picard vs etd L2 distance {:.3e} (etd elapsed {:?})",
                grid_norm(&diff, 2.0),
                t0.elapsed()
            );
        }
        "logcase" => {
            let m = ModelSpec::new(2, 0.75, 5.0).unwrap();
            let z = RadialProfile::zero();
            let v1 = RadialProfile::from_physical_gaussian(2, 1.0, 1.0);
            let times = logspace(10.0, 1e4, 30);
            let s = oracle_series(&m, &z, &v1, &times, Quantity::U(2.0)).unwrap();
            let chk = log_growth_check(&s, (10.0, 1e4)).unwrap();
            println!("mu=5: ratio {:.4} bounded {}", chk.ratio_max / chk.ratio_min, chk.bounded);
            let fit = fit_rate(&s, (10.0, 1e4)).unwrap();
            println!("apparent slope {:.4}", fit.slope);
        }
        other => eprintln!("unknown probe {other}"),
    }
}

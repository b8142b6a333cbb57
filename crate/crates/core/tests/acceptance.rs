//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use traffic_multiscale::coupling::multiscale_step;
use traffic_multiscale::lwr::{godunov_flux, lwr_step};
use traffic_multiscale::scenario::{
    benchmark_cpu, build_scenario, fundamental_diagram, mean_bin_spread, run, run_ring,
    RingConfig, RunLog, ScenarioConfig, Scheme,
};
use traffic_multiscale::{BoundaryMode, Grid1D, MacroField, ScalingParams, VelocityLaw};

struct Outcome {
    pass: bool,
    detail: String,
}

impl Outcome {
    fn new(pass: bool, detail: impl Into<String>) -> Self {
        Self {
            pass,
            detail: detail.into(),
        }
    }
}

/// Per-run maximum of vehicles through one interface in one step.
#[derive(Default)]
struct Crossings(Vec<(String, u32)>);

impl Crossings {
    fn note(&mut self, log: &RunLog) {
        self.0.push((log.name.clone(), log.max_crossings));
    }
}

fn full_run(config: &ScenarioConfig, crossings: &mut Crossings) -> RunLog {
    let mut state = build_scenario(config).expect("scenario builds");
    let log = run(&mut state, config).expect("run completes");
    crossings.note(&log);
    log
}

fn mass_conservation(c: &mut Crossings) -> Outcome {
    let mut worst = 0.0_f64;
    let mut parts = Vec::new();
    for cfg in [
        ScenarioConfig::t1(),
        ScenarioConfig::t2(),
        ScenarioConfig::t3(),
        ScenarioConfig::t4(),
    ] {
        let log = full_run(&cfg, c);
        worst = worst.max(log.mass_drift());
        parts.push(format!("{} {:.1e}", cfg.name, log.mass_drift()));
    }
    Outcome::new(worst <= 1e-10, format!("max relative drift: {} (tol 1e-10)", parts.join(", ")))
}

fn theta_one_reduction(_: &mut Crossings) -> Outcome {
    let cfg = ScenarioConfig {
        theta: 1.0,
        ..ScenarioConfig::t1()
    };
    let params = cfg.coupling_params().unwrap();
    let mut state = build_scenario(&cfg).unwrap();
    let mut reference = state.field.clone();
    let mut vehicles_seen = 0;
    for n in 0..cfg.n_t {
        multiscale_step(&mut state, &params).unwrap();
        vehicles_seen = vehicles_seen.max(state.vehicles.len());
        reference = lwr_step(&reference, &state.grid, &params.scaling, &params.law).unwrap();
        let same = state
            .field
            .rho()
            .iter()
            .zip(reference.rho())
            .all(|(a, b)| a.to_bits() == b.to_bits());
        if !same {
            return Outcome::new(false, format!("densities differ after step {}", n + 1));
        }
    }
    Outcome::new(
        true,
        format!("{} steps bitwise equal, up to {vehicles_seen} vehicles active", cfg.n_t),
    )
}

fn godunov_oracle(_: &mut Crossings) -> Outcome {
    // demand and supply of f(r) = r (1 - r), critical density 1/2
    let f = |r: f64| r * (1.0 - r);
    let demand = |r: f64| if r <= 0.5 { f(r) } else { 0.25 };
    let supply = |r: f64| if r >= 0.5 { f(r) } else { 0.25 };
    let law = VelocityLaw::linear(1.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst = 0.0_f64;
    for _ in 0..10_000 {
        let a: f64 = rng.gen_range(0.0..=1.0);
        let b: f64 = rng.gen_range(0.0..=1.0);
        let g = godunov_flux(a, b, &law).unwrap();
        worst = worst.max((g - demand(a).min(supply(b))).abs());
    }
    Outcome::new(worst <= 1e-15, format!("max |G - min(D, S)| = {worst:.1e} over 10^4 pairs (tol 1e-15)"))
}

/// Mean over `[a, b]` of the exact solution for data (1, 0) jumping at `x0`.
fn exact_cell_average(a: f64, b: f64, x0: f64, t: f64) -> f64 {
    // antiderivative of the fan, piecewise
    let prim = |x: f64| {
        let s = x - x0;
        if s <= -t {
            s
        } else if s >= t {
            0.0
        } else {
            -t + ((s + t) - (s * s - t * t) / (2.0 * t)) / 2.0
        }
    };
    (prim(b) - prim(a)) / (b - a)
}

fn rarefaction_accuracy(_: &mut Crossings) -> Outcome {
    let started = Instant::now();
    let law = VelocityLaw::linear(1.0, 1.0).unwrap();
    let t_end = 1.0;
    // the fan covers [x0 - 1, x0 + 1] at t = 1; pad it by half its width
    let (length, x0) = (4.0, 2.0);
    let mut points = Vec::new();
    for n_x in [100usize, 200, 400] {
        let grid = Grid1D::over_road(length, n_x, BoundaryMode::FreeOutflow).unwrap();
        let dx = grid.dx();
        // dt / dx = 1/2
        let n_t = 2 * n_x / length as usize;
        let dt = t_end / n_t as f64;
        let scaling = ScalingParams::new(&grid, dt, 20, &law).unwrap();
        let mut field = MacroField::from_profile(&grid, |x| if x < x0 { 1.0 } else { 0.0 }).unwrap();
        for _ in 0..n_t {
            field = lwr_step(&field, &grid, &scaling, &law).unwrap();
        }
        let err: f64 = (0..n_x)
            .map(|j| {
                let (a, b) = (grid.edge(j as i64), grid.edge(j as i64 + 1));
                (field.rho()[j] - exact_cell_average(a, b, x0, t_end)).abs() * dx
            })
            .sum();
        points.push((dx, err));
    }
    // least-squares slope of log(err) against log(dx)
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let order = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let c = points.iter().map(|(dx, e)| e / dx).fold(0.0, f64::max);
    let secs = started.elapsed().as_secs_f64();
    let errs: Vec<String> = points.iter().map(|(dx, e)| format!("dx={dx} e={e:.2e}")).collect();
    Outcome::new(
        order >= 0.7 && secs < 5.0,
        format!("{}; fitted order {order:.3} (min 0.7), C = {c:.3}, {secs:.2}s", errs.join(", ")),
    )
}

fn t1_activation(c: &mut Crossings) -> Outcome {
    let cfg = ScenarioConfig::t1();
    let log = full_run(&cfg, c);
    let windows = [13..=16usize, 28..=31, 53..=56];
    let cells_at = |step: u64| -> Vec<usize> {
        log.vehicles
            .iter()
            .filter(|r| r.step == step)
            .map(|r| r.cell)
            .collect()
    };
    // first recorded step and the hundredth one
    let first = cells_at(0);
    let inside = first.iter().all(|j| windows.iter().any(|w| w.contains(j)));
    let each = windows.iter().all(|w| first.iter().any(|j| w.contains(j)));
    let later = cells_at(99);
    let first_empty = !later.iter().any(|j| windows[0].contains(j));
    let others = later
        .iter()
        .any(|j| windows[1..].iter().any(|w| w.contains(j)));
    Outcome::new(
        inside && each && first_empty && others,
        format!(
            "step 1: {} vehicles, all in windows {inside}, every window used {each}; \
             step 100: {} vehicles, first window empty {first_empty}, another occupied {others}",
            first.len(),
            later.len()
        ),
    )
}

fn t2_scatter(c: &mut Crossings) -> Outcome {
    let spread = |tau: f64, c: &mut Crossings| {
        let cfg = ScenarioConfig {
            tau,
            name: format!("t2-tau{tau}"),
            ..ScenarioConfig::t2()
        };
        let log = full_run(&cfg, c);
        mean_bin_spread(&fundamental_diagram(&log), 10, cfg.rho_max)
    };
    let fast = spread(0.01, c);
    let slow = spread(3.0, c);
    let ratio = slow / fast;
    Outcome::new(
        ratio >= 2.0,
        format!("mean bin std: tau=0.01 {fast:.4e}, tau=3 {slow:.4e}, ratio {ratio:.2} (min 2)"),
    )
}

fn t3_self_sustained(c: &mut Crossings) -> Outcome {
    let cfg = ScenarioConfig::t3();
    let log = full_run(&cfg, c);
    let reference = full_run(
        &ScenarioConfig {
            scheme: Scheme::Lwr,
            name: "t3-lwr".into(),
            ..cfg.clone()
        },
        c,
    );
    let peak = |l: &RunLog| {
        l.snapshots
            .iter()
            .find(|s| s.step == 441)
            .map(|s| s.rho.iter().copied().fold(f64::MIN, f64::max))
            .unwrap()
    };
    let excess = peak(&log) - peak(&reference);
    let started = log.active.iter().position(|&a| a > 0);
    let vanished = started.and_then(|s| log.active[s..].iter().position(|&a| a == 0).map(|k| s + k));
    let in_window = vanished.is_some_and(|n| (800..=1100).contains(&n));
    Outcome::new(
        excess >= 0.02 && in_window,
        format!(
            "step 441 max rho excess {excess:.4} (min 0.02); vehicles gone at step {} (want 800..=1100)",
            vanished.map_or("never".to_string(), |n| n.to_string())
        ),
    )
}

fn ring_stop_and_go(_: &mut Crossings) -> Outcome {
    let started = Instant::now();
    let cfg = RingConfig::default();
    let log = run_ring(&cfg).unwrap();
    let n = cfg.n_vehicles as i64;
    let late: Vec<_> = log.samples.iter().filter(|s| s.time > 100.0).collect();
    let stop_and_go = late.iter().any(|s| {
        s.vel.iter().any(|&v| v < 0.05) && s.vel.iter().any(|&v| v > 0.9)
    });

    // follow the slowest vehicle over t in [100, 150], one sample per time unit
    let per_unit = (1.0 / cfg.dt).round() as usize;
    let window: Vec<_> = log
        .samples
        .iter()
        .filter(|s| s.time >= 100.0 && s.time <= 150.0 && s.step % per_unit == 0)
        .collect();
    let mut drift = 0i64;
    let mut prev: Option<i64> = None;
    for s in &window {
        let vmin = s.vel.iter().copied().fold(f64::MAX, f64::min);
        let slowest = (0..n).filter(|&k| s.vel[k as usize] <= vmin + 1e-12);
        let k = match prev {
            None => slowest.min().unwrap(),
            Some(p) => slowest
                .min_by_key(|&k| {
                    let d = (k - p).rem_euclid(n);
                    d.min(n - d)
                })
                .unwrap(),
        };
        if let Some(p) = prev {
            let mut d = (k - p).rem_euclid(n);
            if d > n / 2 {
                d -= n;
            }
            drift += d;
        }
        prev = Some(k);
    }
    let secs = started.elapsed().as_secs_f64();
    Outcome::new(
        stop_and_go && drift < 0 && secs < 5.0,
        format!(
            "v<0.05 and v>0.9 together after t=100: {stop_and_go}; slowest-vehicle index drift over \
             t in [100, 150]: {drift}; {secs:.2}s"
        ),
    )
}

fn r_squared(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    sxy * sxy / (sxx * syy)
}

fn cpu_benchmark(c: &mut Crossings) -> Outcome {
    let started = Instant::now();
    let lengths = [20.0, 40.0, 80.0, 160.0];
    let rows = benchmark_cpu(&lengths, &ScenarioConfig::t1(), 5).unwrap();
    for r in &rows {
        c.0.push((format!("bench-L{}", r.length), r.max_crossings));
    }
    let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
    let faster = rows
        .iter()
        .filter(|r| r.length >= 40.0)
        .all(|r| r.t_multiscale < r.t_micro);
    let multi: Vec<f64> = rows.iter().map(|r| ms(r.t_multiscale)).collect();
    let micro: Vec<f64> = rows.iter().map(|r| ms(r.t_micro)).collect();
    let (r2_multi, r2_micro) = (r_squared(&lengths, &multi), r_squared(&lengths, &micro));
    let peaks: Vec<f64> = rows.iter().map(|r| r.peak_multiscale as f64).collect();
    let lo = peaks.iter().copied().fold(f64::MAX, f64::min);
    let hi = peaks.iter().copied().fold(f64::MIN, f64::max);
    let variation = (hi - lo) / lo;
    let secs = started.elapsed().as_secs_f64();
    let table: Vec<String> = rows
        .iter()
        .map(|r| format!("L={} {:.2}/{:.2}ms", r.length, ms(r.t_multiscale), ms(r.t_micro)))
        .collect();
    Outcome::new(
        faster && r2_multi >= 0.9 && r2_micro >= 0.9 && variation <= 0.2 && secs < 60.0,
        format!(
            "{}; multiscale faster for L>=40 {faster}; R^2 {r2_multi:.3}/{r2_micro:.3} (min 0.9); \
             peak vehicles {peaks:?}, variation {:.1}% (max 20%); {secs:.1}s",
            table.join(", "),
            variation * 100.0
        ),
    )
}

type Criterion = (u32, &'static str, fn(&mut Crossings) -> Outcome);

fn main() -> ExitCode {
    let mut crossings = Crossings::default();
    let criteria: [Criterion; 9] = [
        (1, "mass conservation", mass_conservation),
        (2, "theta = 1 reduction", theta_one_reduction),
        (3, "Godunov oracle", godunov_oracle),
        (4, "LWR rarefaction accuracy", rarefaction_accuracy),
        (5, "Test-1 activation", t1_activation),
        (6, "Test-2 scatter growth", t2_scatter),
        (7, "Test-3 self-sustainment", t3_self_sustained),
        (8, "ring stop & go", ring_stop_and_go),
        (9, "CPU benchmark", cpu_benchmark),
    ];
    let mut failed = 0;
    for (id, name, check) in criteria {
        let out = check(&mut crossings);
        failed += usize::from(!out.pass);
        println!(
            "criterion {id} [{name}]: {} ({})",
            if out.pass { "PASS" } else { "FAIL" },
            out.detail
        );
    }
    let worst = crossings.0.iter().map(|(_, c)| *c).max().unwrap_or(0);
    let offenders: Vec<&str> = crossings
        .0
        .iter()
        .filter(|(_, c)| *c > 1)
        .map(|(n, _)| n.as_str())
        .collect();
    let pass = worst <= 1;
    failed += usize::from(!pass);
    println!(
        "criterion 10 [CFL crossing]: {} (max count {worst} over {} runs; offenders {offenders:?})",
        if pass { "PASS" } else { "FAIL" },
        crossings.0.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

use std::thread;
use std::time::Duration;

use super::config::{ScenarioConfig, Scheme};
use super::run::{build_scenario, run, RunLog};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub length: f64,
    pub t_multiscale: Duration,
    pub t_micro: Duration,
    pub peak_multiscale: usize,
    pub peak_micro: usize,
    /// Largest per-interface crossing count over all runs of this row.
    pub max_crossings: u32,
}

/// Times the multi-scale scheme against the complete-information scheme
/// (`θ = 0`, vehicles everywhere) on `template` scaled to each length.
/// Every run happens on a fresh thread after one warm-up run; reported times
/// are medians over `reps` runs.
pub fn benchmark_cpu(lengths: &[f64], template: &ScenarioConfig, reps: usize) -> Result<Vec<BenchRow>> {
    if reps == 0 {
        return Err(Error::InvalidParameter("need at least one repetition".into()));
    }
    let mut rows = Vec::with_capacity(lengths.len());
    for &length in lengths {
        let mut multi = template.scaled_to(length);
        multi.scheme = Scheme::Multiscale;
        multi.record_vehicles = false;
        multi.snapshot_stride = usize::MAX;
        let micro = ScenarioConfig {
            scheme: Scheme::CompleteInfo,
            theta: 0.0,
            ..multi.clone()
        };
        let (t_multiscale, peak_multiscale, c1) = timed(&multi, reps)?;
        let (t_micro, peak_micro, c2) = timed(&micro, reps)?;
        rows.push(BenchRow {
            length,
            t_multiscale,
            t_micro,
            peak_multiscale,
            peak_micro,
            max_crossings: c1.max(c2),
        });
    }
    Ok(rows)
}

fn timed(config: &ScenarioConfig, reps: usize) -> Result<(Duration, usize, u32)> {
    let mut times = Vec::with_capacity(reps);
    let mut peak = 0;
    let mut crossings = 0;
    for i in 0..=reps {
        let log = on_thread(config.clone())?;
        if i > 0 {
            times.push(log.wall_time);
        }
        peak = log.peak_vehicles();
        crossings = crossings.max(log.max_crossings);
    }
    times.sort();
    Ok((times[times.len() / 2], peak, crossings))
}

fn on_thread(config: ScenarioConfig) -> Result<RunLog> {
    thread::spawn(move || {
        let mut state = build_scenario(&config)?;
        run(&mut state, &config)
    })
    .join()
    .map_err(|_| Error::InvalidParameter("benchmark thread panicked".into()))?
}

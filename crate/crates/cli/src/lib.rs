//! `msim` command-line front end: configuration resolution, dispatch and
//! CSV output.

mod args;
mod output;

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use thiserror::Error;
use traffic_multiscale::scenario::{
    benchmark_cpu, build_scenario, run_ring, RingConfig, ScenarioConfig,
};

pub use args::{parse_args, Action, Command, RingOptions, Source, OUT_DIR_ENV};
pub use output::{emit_outputs, num, summary};

#[derive(Debug, Error)]
pub enum CliError {
    /// Help or version text; not a failure.
    #[error("{0}")]
    Display(String),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Config(traffic_multiscale::Error),
    #[error("{0}")]
    Numeric(traffic_multiscale::Error),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    pub fn io(path: &Path, source: io::Error) -> Self {
        CliError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Display(_) => 0,
            CliError::Io { .. } => 1,
            CliError::Usage(_) => 2,
            CliError::Config(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

/// Reads the source and applies overrides in order.
pub fn resolve_config(source: &Source, overrides: &[(String, String)]) -> Result<ScenarioConfig, CliError> {
    let mut cfg = match source {
        Source::Preset(name) => ScenarioConfig::preset(name).map_err(CliError::Config)?,
        Source::File(path) => {
            let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
            ScenarioConfig::parse(&text).map_err(CliError::Config)?
        }
    };
    for (k, v) in overrides {
        cfg.set(k, v).map_err(CliError::Config)?;
    }
    Ok(cfg)
}

/// Runs a parsed command. Text meant for stdout is returned.
pub fn execute(cmd: &Command) -> Result<String, CliError> {
    match &cmd.verb {
        Action::Validate(source) => {
            let cfg = resolve_config(source, &cmd.overrides)?;
            let d = cfg.validate().map_err(CliError::Config)?;
            Ok(format!(
                "{name}: ok\ndx = {dx}\ndt = {dt}\nlambda = {l}\ncfl bound = {b}\nell_N = {ell}\nsigma = {s}\nmin active steps = {m}\n",
                name = cfg.name,
                dx = d.dx,
                dt = d.dt,
                l = d.lambda,
                b = d.cfl_bound,
                ell = d.ell_n,
                s = d.sigma,
                m = d.min_active_steps,
            ))
        }
        Action::Run(source) | Action::Fd(source) => {
            let cfg = resolve_config(source, &cmd.overrides)?;
            let mut state = build_scenario(&cfg).map_err(CliError::Config)?;
            let log = traffic_multiscale::scenario::run(&mut state, &cfg).map_err(CliError::Numeric)?;
            if matches!(cmd.verb, Action::Run(_)) {
                emit_outputs(&log, &cfg, &cmd.out)?;
            } else {
                output::write_fd(&log, &cmd.out)?;
            }
            Ok(format!(
                "{}: {} steps, peak {} vehicles, mass drift {:e}, written to {}\n",
                log.name,
                log.steps(),
                log.peak_vehicles(),
                log.mass_drift(),
                cmd.out.display()
            ))
        }
        Action::Ring(o) => {
            let cfg = RingConfig {
                n_vehicles: o.n,
                length: o.length,
                alpha: o.alpha,
                delta_min: o.delta_min,
                tau: o.tau,
                v_max: o.v_max,
                dt: o.dt,
                steps: o.steps,
                stride: o.stride,
            };
            let log = run_ring(&cfg).map_err(CliError::Config)?;
            output::write_ring(&log, &cmd.out)?;
            Ok(format!(
                "ring: {} vehicles, {} steps, {} clamps, {} collisions\n",
                o.n, o.steps, log.clamps, log.collisions
            ))
        }
        Action::Bench {
            template,
            lengths,
            reps,
        } => {
            let source = match template {
                Some(p) => Source::File(p.clone()),
                None => Source::Preset("t1".into()),
            };
            let cfg = resolve_config(&source, &cmd.overrides)?;
            cfg.validate().map_err(CliError::Config)?;
            let rows = benchmark_cpu(lengths, &cfg, *reps).map_err(CliError::Numeric)?;
            output::write_bench(&rows, &cmd.out)?;
            let mut text = String::new();
            for r in &rows {
                text.push_str(&format!(
                    "L = {}: multiscale {:.3} ms, micro {:.3} ms\n",
                    r.length,
                    r.t_multiscale.as_secs_f64() * 1e3,
                    r.t_micro.as_secs_f64() * 1e3
                ));
            }
            Ok(text)
        }
    }
}

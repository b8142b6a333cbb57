use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::CliError;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "MSIM_OUT";
const FALLBACK_OUT: &str = "out";

#[derive(Debug, Parser)]
#[command(name = "msim", version, about = "Multi-scale traffic simulator")]
struct Cli {
    #[command(subcommand)]
    verb: Verb,
}

#[derive(Debug, Subcommand)]
enum Verb {
    /// Run a scenario and write density, vehicle, event, FD and mass CSVs.
    Run(ScenarioArgs),
    /// Standalone Zhao-Zhang ring road.
    Ring(RingArgs),
    /// Run a scenario and write its fundamental diagram only.
    Fd(ScenarioArgs),
    /// Time the multi-scale scheme against the fully microscopic one.
    Bench(BenchArgs),
    /// Check a configuration and print derived quantities.
    Validate(ScenarioArgs),
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    /// Scenario file (`key = value` lines).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in scenario: t1, t2, t3 or t4.
    #[arg(long, conflicts_with = "config")]
    preset: Option<String>,
    #[command(flatten)]
    common: Common,
}

#[derive(Debug, Args)]
struct Common {
    /// Output directory (default: $MSIM_OUT, else `out`).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override one configuration key, repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Debug, Args)]
struct RingArgs {
    #[arg(long, default_value_t = 34)]
    n: usize,
    #[arg(long = "L", default_value_t = 314.0)]
    length: f64,
    #[arg(long, default_value_t = 0.6)]
    alpha: f64,
    #[arg(long, default_value_t = 7.89)]
    dmin: f64,
    #[arg(long, default_value_t = 4.86)]
    tau: f64,
    #[arg(long, default_value_t = 1.0)]
    vmax: f64,
    #[arg(long, default_value_t = 0.125)]
    dt: f64,
    #[arg(long, default_value_t = 4000)]
    steps: usize,
    /// Record every `stride` steps.
    #[arg(long, default_value_t = 1)]
    stride: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct BenchArgs {
    /// Road lengths, comma separated.
    #[arg(long, value_delimiter = ',', default_values_t = [20.0, 40.0, 80.0, 160.0])]
    lengths: Vec<f64>,
    #[arg(long, default_value_t = 3)]
    reps: usize,
    /// Template scenario (default: t1).
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    common: Common,
}

/// Where a scenario configuration comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum Source {
    File(PathBuf),
    Preset(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RingOptions {
    pub n: usize,
    pub length: f64,
    pub alpha: f64,
    pub delta_min: f64,
    pub tau: f64,
    pub v_max: f64,
    pub dt: f64,
    pub steps: usize,
    pub stride: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Action {
    Run(Source),
    Fd(Source),
    Validate(Source),
    Ring(RingOptions),
    Bench {
        template: Option<PathBuf>,
        lengths: Vec<f64>,
        reps: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Command {
    pub verb: Action,
    pub out: PathBuf,
    /// `(key, value)` pairs applied over the file values, in order.
    pub overrides: Vec<(String, String)>,
}

/// Parses `argv` (program name first). Help and version requests come back
/// as [`CliError::Display`].
pub fn parse_args<I, T>(argv: I) -> Result<Command, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| {
        use clap::error::ErrorKind;
        match e.kind() {
            ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => CliError::Display(e.to_string()),
            _ => CliError::Usage(e.to_string()),
        }
    })?;
    let default_out = || {
        std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(FALLBACK_OUT))
    };
    let scenario = |a: ScenarioArgs| -> Result<(Source, Common), CliError> {
        let source = match (a.config, a.preset) {
            (Some(path), None) => Source::File(path),
            (None, Some(name)) => Source::Preset(name),
            _ => return Err(CliError::Usage("one of --config or --preset is required".into())),
        };
        Ok((source, a.common))
    };
    let (verb, common) = match cli.verb {
        Verb::Run(a) => {
            let (s, c) = scenario(a)?;
            (Action::Run(s), c)
        }
        Verb::Fd(a) => {
            let (s, c) = scenario(a)?;
            (Action::Fd(s), c)
        }
        Verb::Validate(a) => {
            let (s, c) = scenario(a)?;
            (Action::Validate(s), c)
        }
        Verb::Ring(r) => (
            Action::Ring(RingOptions {
                n: r.n,
                length: r.length,
                alpha: r.alpha,
                delta_min: r.dmin,
                tau: r.tau,
                v_max: r.vmax,
                dt: r.dt,
                steps: r.steps,
                stride: r.stride,
            }),
            Common {
                out: r.out,
                overrides: Vec::new(),
            },
        ),
        Verb::Bench(b) => (
            Action::Bench {
                template: b.config,
                lengths: b.lengths,
                reps: b.reps,
            },
            b.common,
        ),
    };
    let overrides = common
        .overrides
        .iter()
        .map(|kv| {
            kv.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| CliError::Usage(format!("--set expects KEY=VALUE, got `{kv}`")))
        })
        .collect::<Result<_, _>>()?;
    Ok(Command {
        verb,
        out: common.out.unwrap_or_else(default_out),
        overrides,
    })
}

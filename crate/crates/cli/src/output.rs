use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use traffic_multiscale::coupling::EventKind;
use traffic_multiscale::scenario::{fundamental_diagram, BenchRow, RingLog, RunLog, ScenarioConfig};

use crate::CliError;

/// 17 significant digits, `.` as decimal separator.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

struct Csv {
    path: PathBuf,
    out: BufWriter<fs::File>,
}

impl Csv {
    fn create(dir: &Path, name: &str, header: &str) -> Result<Self, CliError> {
        let path = dir.join(name);
        let file = fs::File::create(&path).map_err(|e| CliError::io(&path, e))?;
        let mut csv = Csv {
            path,
            out: BufWriter::new(file),
        };
        csv.row(header)?;
        Ok(csv)
    }

    fn row(&mut self, line: &str) -> Result<(), CliError> {
        writeln!(self.out, "{line}").map_err(|e| CliError::io(&self.path, e))
    }

    fn finish(mut self) -> Result<(), CliError> {
        self.out.flush().map_err(|e| CliError::io(&self.path, e))
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Writes density, vehicles, events, fd and mass CSVs plus `summary.txt`.
pub fn emit_outputs(log: &RunLog, config: &ScenarioConfig, dir: &Path) -> Result<(), CliError> {
    ensure_dir(dir)?;

    let mut density = Csv::create(dir, "density.csv", "step,cell,rho")?;
    if !log.active.is_empty() {
        for snap in &log.snapshots {
            for (j, r) in snap.rho.iter().enumerate() {
                density.row(&format!("{},{},{}", snap.step, j, num(*r)))?;
            }
        }
    }
    density.finish()?;

    let mut vehicles = Csv::create(dir, "vehicles.csv", "step,id,pos,vel,cell,leader")?;
    for v in &log.vehicles {
        vehicles.row(&format!(
            "{},{},{},{},{},{}",
            v.step,
            v.id.0,
            num(v.pos),
            num(v.vel),
            v.cell,
            u8::from(v.leader)
        ))?;
    }
    vehicles.finish()?;

    write_events(log, dir)?;
    write_fd(log, dir)?;

    let mut mass = Csv::create(dir, "mass.csv", "step,mass")?;
    for (n, m) in log.mass.iter().enumerate() {
        mass.row(&format!("{},{}", n, num(*m)))?;
    }
    mass.finish()?;

    let path = dir.join("summary.txt");
    fs::write(&path, summary(log, config)).map_err(|e| CliError::io(&path, e))
}

fn write_events(log: &RunLog, dir: &Path) -> Result<(), CliError> {
    let mut csv = Csv::create(dir, "events.csv", "step,kind,cell,vehicle,value,detail")?;
    for e in &log.events {
        let line = match &e.kind {
            EventKind::Activation { cell, count } => {
                format!("{},activation,{},,{},", e.step, cell, count)
            }
            EventKind::Deactivation { vehicle, reason } => {
                format!("{},deactivation,,{},,{}", e.step, vehicle.0, reason.as_str())
            }
            EventKind::Exit { vehicle } => format!("{},exit,,{},,", e.step, vehicle.0),
            EventKind::VelocityClamp { vehicle, raw } => {
                format!("{},velocity-clamp,,{},{},", e.step, vehicle.0, num(*raw))
            }
            EventKind::Collision { vehicle, gap } => {
                format!("{},collision,,{},{},", e.step, vehicle.0, num(*gap))
            }
            EventKind::DensityRange { cells, worst } => {
                format!("{},density-range,,,{},{} cells", e.step, num(*worst), cells)
            }
        };
        csv.row(&line)?;
    }
    csv.finish()
}

/// Writes `fd.csv` only.
pub fn write_fd(log: &RunLog, dir: &Path) -> Result<(), CliError> {
    ensure_dir(dir)?;
    let mut csv = Csv::create(dir, "fd.csv", "rho,flux")?;
    for p in fundamental_diagram(log) {
        csv.row(&format!("{},{}", num(p.rho), num(p.flux)))?;
    }
    csv.finish()
}

pub fn summary(log: &RunLog, config: &ScenarioConfig) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {}", log.name);
    let _ = writeln!(s, "steps: {}", log.steps());
    let _ = writeln!(s, "dx: {}", num(log.dx));
    let _ = writeln!(s, "dt: {}", num(log.dt));
    let _ = writeln!(s, "mass drift (relative): {:e}", log.mass_drift());
    let _ = writeln!(s, "peak vehicles: {}", log.peak_vehicles());
    let _ = writeln!(s, "activations: {}", log.activations());
    let _ = writeln!(s, "deactivations: {}", log.deactivations());
    let _ = writeln!(s, "density range violations: {}", log.range.violations);
    let _ = writeln!(s, "worst range excursion: {:e}", log.range.worst_excursion);
    let _ = writeln!(s, "max crossings per interface: {}", log.max_crossings);
    let _ = writeln!(s, "wall time (ms): {:.3}", log.wall_time.as_secs_f64() * 1e3);
    s.push_str("\n# resolved configuration\n");
    s.push_str(&config.to_text());
    s
}

pub fn write_ring(log: &RingLog, dir: &Path) -> Result<(), CliError> {
    ensure_dir(dir)?;
    let mut csv = Csv::create(dir, "trajectories.csv", "step,id,pos,vel")?;
    for s in &log.samples {
        for (i, (x, v)) in s.pos.iter().zip(&s.vel).enumerate() {
            csv.row(&format!("{},{},{},{}", s.step, i, num(*x), num(*v)))?;
        }
    }
    csv.finish()
}

pub fn write_bench(rows: &[BenchRow], dir: &Path) -> Result<(), CliError> {
    ensure_dir(dir)?;
    let mut csv = Csv::create(
        dir,
        "bench.csv",
        "L,t_ms_multiscale,t_ms_micro,peak_multiscale,peak_micro",
    )?;
    for r in rows {
        csv.row(&format!(
            "{},{},{},{},{}",
            num(r.length),
            num(r.t_multiscale.as_secs_f64() * 1e3),
            num(r.t_micro.as_secs_f64() * 1e3),
            r.peak_multiscale,
            r.peak_micro
        ))?;
    }
    csv.finish()
}

//! Flat `key = value` scenario files.
//!
//! Blank lines and `#` comments are ignored. `preset = t1|t2|t3|t4` resets
//! every field to that preset, so it should come first. Durations accept a
//! `steps` suffix (`min_active = 15 steps`), otherwise they are times;
//! `delta_min` accepts an `ell` suffix for multiples of the vehicle length.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::coupling::{ActivationParams, CouplingParams};
use crate::error::{Error, Result};
use crate::grid::{BoundaryMode, Grid1D};
use crate::lwr::VelocityLaw;
use crate::micro::{ArzMicroParams, MicroModel, ZzParams};
use crate::scaling::ScalingParams;
use crate::state::MacroField;

/// Which update drives the run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    /// Locally activated vehicles on top of the Godunov scheme.
    Multiscale,
    /// Vehicles everywhere, no activation machinery.
    CompleteInfo,
    /// Godunov scheme alone.
    Lwr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Arz,
    Zz,
}

/// A time span given either in steps or in time units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Span {
    Steps(f64),
    Time(f64),
}

impl Span {
    pub fn in_steps(&self, dt: f64) -> f64 {
        match *self {
            Span::Steps(n) => n,
            Span::Time(t) => t / dt,
        }
    }
}

/// A length given either in road units or in vehicle lengths.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Spacing {
    Absolute(f64),
    VehicleLengths(f64),
}

impl Spacing {
    pub fn resolve(&self, ell_n: f64) -> f64 {
        match *self {
            Spacing::Absolute(d) => d,
            Spacing::VehicleLengths(k) => k * ell_n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub t_final: f64,
    pub length: f64,
    pub n_x: usize,
    pub n_t: usize,
    pub scheme: Scheme,
    pub model: ModelKind,
    pub theta: f64,
    /// Activation threshold on the jump of `v*` between neighbour cells.
    pub jump_threshold: f64,
    /// Minimal follower lifetime before removal.
    pub min_active: Span,
    /// Deactivation tolerance on `|V - v*(gap)|`.
    pub eq_tolerance: f64,
    pub tau: f64,
    pub gamma: f64,
    pub v_ref: f64,
    pub alpha: f64,
    pub delta_min: Spacing,
    pub gamma_max: u32,
    pub rho_max: f64,
    pub v_max: f64,
    /// Piecewise-constant initial density: `levels[i]` holds between
    /// `breaks[i - 1]` and `breaks[i]`.
    pub levels: Vec<f64>,
    pub breaks: Vec<f64>,
    pub boundary: BoundaryMode,
    /// Seed every cell at step 0 regardless of velocity jumps.
    pub forced_activation: bool,
    pub clamp_density: bool,
    pub snapshot_stride: usize,
    pub record_vehicles: bool,
    /// Marks initial data that is a local convention rather than measured.
    pub preset_convention: bool,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self::t1()
    }
}

/// Quantities derived from a configuration, printed by `validate`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Derived {
    pub dx: f64,
    pub dt: f64,
    pub lambda: f64,
    pub cfl_bound: f64,
    pub ell_n: f64,
    pub sigma: f64,
    pub min_active_steps: f64,
}

impl ScenarioConfig {
    /// Step-function data with three jumps.
    pub fn t1() -> Self {
        Self {
            name: "t1".into(),
            t_final: 3.0,
            length: 20.0,
            n_x: 100,
            n_t: 300,
            scheme: Scheme::Multiscale,
            model: ModelKind::Arz,
            theta: 0.0,
            jump_threshold: 0.08,
            min_active: Span::Steps(15.0),
            eq_tolerance: 0.3,
            tau: 0.01,
            gamma: 0.0,
            v_ref: 1.0,
            alpha: 0.6,
            delta_min: Spacing::VehicleLengths(2.0),
            gamma_max: 20,
            rho_max: 1.0,
            v_max: 1.0,
            levels: vec![0.8, 0.3, 0.6, 0.8],
            breaks: vec![3.0, 6.0, 11.0],
            boundary: BoundaryMode::Periodic,
            forced_activation: false,
            clamp_density: false,
            snapshot_stride: 1,
            record_vehicles: true,
            preset_convention: true,
        }
    }

    /// Riemann problem: jammed left half, empty right half.
    pub fn t2() -> Self {
        Self {
            name: "t2".into(),
            n_t: 600,
            jump_threshold: 0.1,
            min_active: Span::Steps(15.0),
            eq_tolerance: 0.5,
            gamma_max: 30,
            levels: vec![1.0, 0.0],
            breaks: vec![10.0],
            boundary: BoundaryMode::FreeOutflow,
            ..Self::t1()
        }
    }

    /// Small slow region on a ring.
    pub fn t3() -> Self {
        Self {
            name: "t3".into(),
            t_final: 12.0,
            n_t: 1200,
            jump_threshold: 0.1,
            min_active: Span::Steps(30.0),
            eq_tolerance: 0.2,
            tau: 0.1,
            gamma_max: 30,
            levels: vec![0.25, 0.55, 0.25],
            breaks: vec![9.8, 10.2],
            ..Self::t1()
        }
    }

    /// Ring with Zhao-Zhang vehicles seeded everywhere at start.
    pub fn t4() -> Self {
        let length = 314.0;
        let n_x = 35;
        let dx = length / n_x as f64;
        Self {
            name: "t4".into(),
            t_final: 500.0,
            length,
            n_x,
            n_t: 4000,
            model: ModelKind::Zz,
            jump_threshold: 0.3,
            min_active: Span::Steps(250.0),
            eq_tolerance: 0.07,
            tau: 4.86,
            alpha: 0.47,
            delta_min: Spacing::VehicleLengths(2.6),
            gamma_max: 16,
            levels: vec![0.1875, 0.375, 0.1875],
            breaks: vec![17.0 * dx, 18.0 * dx],
            forced_activation: true,
            ..Self::t1()
        }
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "t1" => Ok(Self::t1()),
            "t2" => Ok(Self::t2()),
            "t3" => Ok(Self::t3()),
            "t4" => Ok(Self::t4()),
            other => Err(Error::InvalidParameter(format!("unknown preset `{other}`"))),
        }
    }

    /// Same data on a road of length `length`: `dx`, `Γ_max` and time
    /// resolution kept, breakpoints scaled with the length.
    pub fn scaled_to(&self, length: f64) -> Self {
        let k = length / self.length;
        let n_x = (self.n_x as f64 * k).round() as usize;
        Self {
            name: format!("{}-L{length}", self.name),
            length,
            n_x,
            breaks: self.breaks.iter().map(|b| b * k).collect(),
            ..self.clone()
        }
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n_x as f64
    }

    pub fn dt(&self) -> f64 {
        self.t_final / self.n_t as f64
    }

    pub fn grid(&self) -> Result<Grid1D> {
        Grid1D::over_road(self.length, self.n_x, self.boundary)
    }

    pub fn law(&self) -> Result<VelocityLaw> {
        VelocityLaw::linear(self.rho_max, self.v_max)
    }

    pub fn initial_field(&self, grid: &Grid1D) -> Result<MacroField> {
        if self.levels.is_empty() || self.breaks.len() + 1 != self.levels.len() {
            return Err(Error::InvalidParameter(format!(
                "{} levels need {} breaks, got {}",
                self.levels.len(),
                self.levels.len().saturating_sub(1),
                self.breaks.len()
            )));
        }
        if self.breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("breaks must increase".into()));
        }
        if let Some(r) = self.levels.iter().find(|r| !(0.0..=self.rho_max).contains(*r)) {
            return Err(Error::InvalidParameter(format!(
                "level {r} outside [0, {}]",
                self.rho_max
            )));
        }
        MacroField::from_profile(grid, |x| {
            self.levels[self.breaks.iter().filter(|&&b| b <= x).count()]
        })
    }

    /// Builds the parameter bundle, rejecting CFL violations and invalid
    /// model constants.
    pub fn coupling_params(&self) -> Result<CouplingParams> {
        let grid = self.grid()?;
        let law = self.law()?;
        let dt = if self.n_t == 0 {
            // no step is taken, any admissible dt describes the run
            0.5 * law.cfl_bound() * grid.dx()
        } else {
            self.dt()
        };
        let scaling = ScalingParams::new(&grid, dt, self.gamma_max, &law)?;
        let activation = ActivationParams::new(
            self.jump_threshold,
            self.min_active.in_steps(scaling.dt()),
            self.eq_tolerance,
        )?;
        let model = match self.model {
            ModelKind::Arz => MicroModel::Arz(ArzMicroParams::new(
                self.gamma,
                self.tau,
                self.v_ref,
                scaling.ell_n(),
            )?),
            ModelKind::Zz => {
                let p = ZzParams::new(
                    self.tau,
                    self.alpha,
                    self.delta_min.resolve(scaling.ell_n()),
                    self.v_max,
                )?;
                p.check_vehicle_length(scaling.ell_n())?;
                MicroModel::Zz(p)
            }
        };
        Ok(CouplingParams {
            law,
            scaling,
            activation,
            model,
        })
    }

    /// Everything `run` checks before stepping.
    pub fn validate(&self) -> Result<Derived> {
        let params = self.coupling_params()?;
        self.initial_field(&self.grid()?)?;
        if !(0.0..=1.0).contains(&self.theta) {
            return Err(Error::InvalidParameter(format!(
                "theta must lie in [0, 1], got {}",
                self.theta
            )));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidParameter("snapshot_stride must be >= 1".into()));
        }
        Ok(Derived {
            dx: params.scaling.dx(),
            dt: params.scaling.dt(),
            lambda: params.scaling.lambda(),
            cfl_bound: params.law.cfl_bound(),
            ell_n: params.scaling.ell_n(),
            sigma: params.law.critical_density(),
            min_active_steps: params.activation.min_active_steps,
        })
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Config {
                line: i + 1,
                message,
            };
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, got `{line}`")))?;
            cfg.set(key.trim(), value.trim()).map_err(|e| match e {
                Error::InvalidParameter(m) => err(m),
                other => other,
            })?;
        }
        Ok(cfg)
    }

    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "preset" => *self = Self::preset(value)?,
            "name" => self.name = value.to_string(),
            "t_final" | "T" => self.t_final = num(key, value)?,
            "length" | "L" => self.length = num(key, value)?,
            "n_x" => self.n_x = num(key, value)?,
            "n_t" => self.n_t = num(key, value)?,
            "scheme" => {
                self.scheme = match value {
                    "multiscale" => Scheme::Multiscale,
                    "complete" => Scheme::CompleteInfo,
                    "lwr" => Scheme::Lwr,
                    _ => return Err(bad(key, value)),
                }
            }
            "model" => {
                self.model = match value {
                    "arz" => ModelKind::Arz,
                    "zz" => ModelKind::Zz,
                    _ => return Err(bad(key, value)),
                }
            }
            "theta" => self.theta = num(key, value)?,
            "jump_threshold" => self.jump_threshold = num(key, value)?,
            "min_active" => {
                self.min_active = match value.strip_suffix("steps") {
                    Some(n) => Span::Steps(num(key, n.trim())?),
                    None => Span::Time(num(key, value)?),
                }
            }
            "eq_tolerance" => self.eq_tolerance = num(key, value)?,
            "tau" => self.tau = num(key, value)?,
            "gamma" => self.gamma = num(key, value)?,
            "v_ref" => self.v_ref = num(key, value)?,
            "alpha" => self.alpha = num(key, value)?,
            "delta_min" => {
                self.delta_min = match value.strip_suffix("ell") {
                    Some(k) => Spacing::VehicleLengths(num(key, k.trim())?),
                    None => Spacing::Absolute(num(key, value)?),
                }
            }
            "gamma_max" => self.gamma_max = num(key, value)?,
            "rho_max" => self.rho_max = num(key, value)?,
            "v_max" => self.v_max = num(key, value)?,
            "levels" => self.levels = list(key, value)?,
            "breaks" => self.breaks = list(key, value)?,
            "boundary" => {
                self.boundary = match value {
                    "periodic" => BoundaryMode::Periodic,
                    "outflow" => BoundaryMode::FreeOutflow,
                    _ => return Err(bad(key, value)),
                }
            }
            "forced_activation" => self.forced_activation = num(key, value)?,
            "clamp_density" => self.clamp_density = num(key, value)?,
            "snapshot_stride" => self.snapshot_stride = num(key, value)?,
            "record_vehicles" => self.record_vehicles = num(key, value)?,
            "preset_convention" => self.preset_convention = num(key, value)?,
            _ => return Err(Error::InvalidParameter(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    /// Serialises every field; `parse(to_text())` gives back the same config.
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| {
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", ")
        };
        let mut s = String::new();
        let mut kv = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        kv("name", self.name.clone());
        kv("t_final", self.t_final.to_string());
        kv("length", self.length.to_string());
        kv("n_x", self.n_x.to_string());
        kv("n_t", self.n_t.to_string());
        kv(
            "scheme",
            match self.scheme {
                Scheme::Multiscale => "multiscale",
                Scheme::CompleteInfo => "complete",
                Scheme::Lwr => "lwr",
            }
            .into(),
        );
        kv(
            "model",
            match self.model {
                ModelKind::Arz => "arz",
                ModelKind::Zz => "zz",
            }
            .into(),
        );
        kv("theta", self.theta.to_string());
        kv("jump_threshold", self.jump_threshold.to_string());
        kv(
            "min_active",
            match self.min_active {
                Span::Steps(n) => format!("{n} steps"),
                Span::Time(t) => t.to_string(),
            },
        );
        kv("eq_tolerance", self.eq_tolerance.to_string());
        kv("tau", self.tau.to_string());
        kv("gamma", self.gamma.to_string());
        kv("v_ref", self.v_ref.to_string());
        kv("alpha", self.alpha.to_string());
        kv(
            "delta_min",
            match self.delta_min {
                Spacing::Absolute(d) => d.to_string(),
                Spacing::VehicleLengths(k) => format!("{k} ell"),
            },
        );
        kv("gamma_max", self.gamma_max.to_string());
        kv("rho_max", self.rho_max.to_string());
        kv("v_max", self.v_max.to_string());
        kv("levels", join(&self.levels));
        kv("breaks", join(&self.breaks));
        kv(
            "boundary",
            match self.boundary {
                BoundaryMode::Periodic => "periodic",
                BoundaryMode::FreeOutflow => "outflow",
            }
            .into(),
        );
        kv("forced_activation", self.forced_activation.to_string());
        kv("clamp_density", self.clamp_density.to_string());
        kv("snapshot_stride", self.snapshot_stride.to_string());
        kv("record_vehicles", self.record_vehicles.to_string());
        kv("preset_convention", self.preset_convention.to_string());
        s
    }
}

fn bad(key: &str, value: &str) -> Error {
    Error::InvalidParameter(format!("bad value `{value}` for `{key}`"))
}

fn num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| bad(key, value))
}

fn list(key: &str, value: &str) -> Result<Vec<f64>> {
    if value.is_empty() {
        return Ok(Vec::new());
    }
    value.split(',').map(|v| num(key, v.trim())).collect()
}

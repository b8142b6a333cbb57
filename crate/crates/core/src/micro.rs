//! Second-order follow-the-leader dynamics and the periodic ring simulator.

use crate::error::{Error, Result};
use crate::lwr::VelocityLaw;
use crate::scaling::ScalingParams;

/// Parameters of the ARZ-type follow-the-leader acceleration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArzMicroParams {
    pub gamma: f64,
    pub tau: f64,
    pub v_ref: f64,
    /// Vehicle length (and mass).
    pub ell_n: f64,
}

impl ArzMicroParams {
    pub fn new(gamma: f64, tau: f64, v_ref: f64, ell_n: f64) -> Result<Self> {
        if !(gamma >= 0.0) {
            return Err(Error::InvalidParameter(format!("gamma must be >= 0, got {gamma}")));
        }
        if !(tau > 0.0) {
            return Err(Error::InvalidParameter(format!("tau must be > 0, got {tau}")));
        }
        if !(v_ref > 0.0) {
            return Err(Error::InvalidParameter(format!("v_ref must be > 0, got {v_ref}")));
        }
        if !(ell_n > 0.0) {
            return Err(Error::InvalidParameter(format!("ell_n must be > 0, got {ell_n}")));
        }
        Ok(Self {
            gamma,
            tau,
            v_ref,
            ell_n,
        })
    }
}

/// Parameters of the minimal Zhao-Zhang model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZzParams {
    pub tau: f64,
    pub alpha: f64,
    /// Minimal center-to-center spacing below which vehicles stop.
    pub delta_min: f64,
    pub v_max: f64,
}

impl ZzParams {
    pub fn new(tau: f64, alpha: f64, delta_min: f64, v_max: f64) -> Result<Self> {
        for (name, value) in [("tau", tau), ("alpha", alpha), ("delta_min", delta_min), ("v_max", v_max)] {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidParameter(format!("{name} must be > 0, got {value}")));
            }
        }
        Ok(Self {
            tau,
            alpha,
            delta_min,
            v_max,
        })
    }

    /// The minimal spacing must exceed the vehicle length.
    pub fn check_vehicle_length(&self, ell_n: f64) -> Result<()> {
        if self.delta_min > ell_n {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "delta_min = {} must exceed the vehicle length {ell_n}",
                self.delta_min
            )))
        }
    }

    /// Spacing from which vehicles drive at `v_max`.
    pub fn free_spacing(&self) -> f64 {
        self.delta_min + self.v_max / self.alpha
    }
}

pub fn accel_arz(
    x: f64,
    x_next: f64,
    v: f64,
    v_next: f64,
    p: &ArzMicroParams,
    law: &VelocityLaw,
) -> Result<f64> {
    let gap = x_next - x;
    if !(gap > 0.0) {
        return Err(Error::DegenerateGap { gap });
    }
    let rho_max = law.rho_max();
    let interaction = if p.gamma == 0.0 {
        p.v_ref * (v_next - v) / gap
    } else {
        p.v_ref * (p.ell_n / rho_max).powf(p.gamma) * (v_next - v) / gap.powf(p.gamma + 1.0)
    };
    let relaxation = (law.velocity(rho_max * p.ell_n / gap) - v) / p.tau;
    Ok(interaction + relaxation)
}

pub fn v_zz(delta: f64, p: &ZzParams) -> f64 {
    if delta <= p.delta_min {
        0.0
    } else if delta >= p.free_spacing() {
        p.v_max
    } else {
        (p.alpha * (delta - p.delta_min)).min(p.v_max)
    }
}

/// Zhao-Zhang relaxation towards `v_zz(gap)`. Non-positive gaps fall in the
/// stopped branch.
pub fn accel_zz(x: f64, x_next: f64, v: f64, p: &ZzParams) -> f64 {
    (v_zz(x_next - x, p) - v) / p.tau
}

/// First-order follow-the-leader velocity `v*(rho_max ell_n / gap)`.
pub fn ftl_gap_equilibrium_velocity(
    x: f64,
    x_next: f64,
    scaling: &ScalingParams,
    law: &VelocityLaw,
) -> Result<f64> {
    let gap = x_next - x;
    if !(gap > 0.0) {
        return Err(Error::DegenerateGap { gap });
    }
    Ok(law.velocity(law.rho_max() * scaling.ell_n() / gap))
}

/// Acceleration model driving microscopic followers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MicroModel {
    Arz(ArzMicroParams),
    Zz(ZzParams),
}

impl MicroModel {
    pub fn acceleration(
        &self,
        x: f64,
        x_next: f64,
        v: f64,
        v_next: f64,
        law: &VelocityLaw,
    ) -> Result<f64> {
        match self {
            MicroModel::Arz(p) => accel_arz(x, x_next, v, v_next, p, law),
            MicroModel::Zz(p) => Ok(accel_zz(x, x_next, v, p)),
        }
    }
}

/// Vehicles on a circular road. Vehicle `k + 1` is ahead of vehicle `k`, and
/// the first vehicle is ahead of the last one.
#[derive(Debug, Clone, PartialEq)]
pub struct RingRoad {
    length: f64,
    /// Unwrapped travelled positions; wrapping happens on read.
    odometer: Vec<f64>,
    vel: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RingStepReport {
    /// Vehicles whose Euler update went below zero velocity and were clamped.
    pub clamped: Vec<usize>,
    /// Vehicles whose forward gap was non-positive at the start of the step.
    pub collisions: Vec<usize>,
}

impl RingRoad {
    pub fn new(length: f64, positions: Vec<f64>, velocities: Vec<f64>) -> Result<Self> {
        if !(length > 0.0) {
            return Err(Error::InvalidParameter(format!("ring length must be > 0, got {length}")));
        }
        if positions.len() != velocities.len() || positions.is_empty() {
            return Err(Error::InvalidParameter(
                "ring needs matching, non-empty position and velocity lists".into(),
            ));
        }
        if positions.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter("ring positions must increase strictly".into()));
        }
        if positions[0] < 0.0 || positions[positions.len() - 1] >= length {
            return Err(Error::InvalidParameter("ring positions must lie in [0, L)".into()));
        }
        Ok(Self {
            length,
            odometer: positions,
            vel: velocities,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn len(&self) -> usize {
        self.vel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vel.is_empty()
    }

    pub fn position(&self, k: usize) -> f64 {
        let p = self.odometer[k].rem_euclid(self.length);
        if p >= self.length {
            0.0
        } else {
            p
        }
    }

    pub fn positions(&self) -> Vec<f64> {
        (0..self.len()).map(|k| self.position(k)).collect()
    }

    /// Total distance driven since initialization plus the initial position.
    pub fn odometer(&self, k: usize) -> f64 {
        self.odometer[k]
    }

    pub fn velocities(&self) -> &[f64] {
        &self.vel
    }

    /// Gap from vehicle `k` to its cyclic successor.
    pub fn gap(&self, k: usize) -> f64 {
        let n = self.len();
        if k + 1 < n {
            self.odometer[k + 1] - self.odometer[k]
        } else {
            self.odometer[0] + self.length - self.odometer[k]
        }
    }

    /// The explicit Euler step is meaningful only if vehicles advance less
    /// than the mean gap per step.
    pub fn check_dt(&self, dt: f64, v_max: f64) -> Result<()> {
        let bound = self.length / self.len() as f64;
        if dt * v_max < bound {
            Ok(())
        } else {
            Err(Error::CflViolation {
                lambda: dt * v_max,
                bound,
            })
        }
    }
}

/// `X_k = k L / (N + 1)`, `V_k = 0` for `k = 1..N`.
pub fn ring_init(n_vehicles: usize, length: f64) -> Result<RingRoad> {
    if n_vehicles < 2 {
        return Err(Error::InvalidParameter(format!("a ring needs at least 2 vehicles, got {n_vehicles}")));
    }
    let spacing = length / (n_vehicles + 1) as f64;
    let positions = (1..=n_vehicles).map(|k| k as f64 * spacing).collect();
    RingRoad::new(length, positions, vec![0.0; n_vehicles])
}

/// One explicit Euler step of the Zhao-Zhang model on the ring.
pub fn ring_step(ring: &mut RingRoad, p: &ZzParams, dt: f64) -> RingStepReport {
    let n = ring.len();
    let mut report = RingStepReport::default();
    let mut new_vel = Vec::with_capacity(n);
    for k in 0..n {
        let gap = ring.gap(k);
        if gap <= 0.0 {
            report.collisions.push(k);
        }
        let v = ring.vel[k];
        let a = (v_zz(gap, p) - v) / p.tau;
        let mut next = v + dt * a;
        if next < 0.0 {
            report.clamped.push(k);
            next = 0.0;
        }
        new_vel.push(next.min(p.v_max));
    }
    for (x, v) in ring.odometer.iter_mut().zip(&ring.vel) {
        *x += dt * v;
    }
    ring.vel = new_vel;
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{BoundaryMode, Grid1D};
    use approx::assert_abs_diff_eq;

    fn law() -> VelocityLaw {
        VelocityLaw::linear(1.0, 1.0).unwrap()
    }

    fn arz(gamma: f64) -> ArzMicroParams {
        ArzMicroParams::new(gamma, 0.1, 1.0, 0.2).unwrap()
    }

    #[test]
    fn arz_vanishes_at_equilibrium() {
        let p = |g| ArzMicroParams::new(g, 0.1, 1.0, 0.25).unwrap();
        let a = accel_arz(1.0, 1.5, 0.5, 0.5, &p(0.0), &law()).unwrap();
        assert_abs_diff_eq!(a, 0.0, epsilon = 1e-15);
        let a = accel_arz(1.0, 1.5, 0.5, 0.5, &p(1.0), &law()).unwrap();
        assert_abs_diff_eq!(a, 0.0, epsilon = 1e-15);
    }

    #[test]
    fn arz_direct_substitution() {
        let a0 = accel_arz(0.0, 0.4, 0.2, 0.6, &arz(0.0), &law()).unwrap();
        assert_abs_diff_eq!(a0, 4.0, epsilon = 1e-12);
        let a1 = accel_arz(0.0, 0.4, 0.2, 0.6, &arz(1.0), &law()).unwrap();
        assert_abs_diff_eq!(a1, 3.5, epsilon = 1e-12);
    }

    #[test]
    fn arz_rejects_degenerate_gaps() {
        assert!(matches!(
            accel_arz(1.0, 1.0, 0.5, 0.5, &arz(0.0), &law()),
            Err(Error::DegenerateGap { .. })
        ));
        assert!(accel_arz(1.0, 0.9, 0.5, 0.5, &arz(0.0), &law()).is_err());
    }

    #[test]
    fn param_validation() {
        assert!(ArzMicroParams::new(-1.0, 0.1, 1.0, 0.2).is_err());
        assert!(ArzMicroParams::new(0.0, 0.0, 1.0, 0.2).is_err());
        assert!(ArzMicroParams::new(0.0, 0.1, 0.0, 0.2).is_err());
        assert!(ZzParams::new(1.0, 0.0, 1.0, 1.0).is_err());
        let p = ZzParams::new(1.0, 0.5, 1.0, 1.0).unwrap();
        assert!(p.check_vehicle_length(0.5).is_ok());
        assert!(p.check_vehicle_length(1.0).is_err());
    }

    fn fig1() -> ZzParams {
        ZzParams::new(4.86, 0.6, 7.89, 1.0).unwrap()
    }

    #[test]
    fn v_zz_branches() {
        let p = fig1();
        assert_eq!(v_zz(p.delta_min, &p), 0.0);
        assert_eq!(v_zz(p.delta_min + p.v_max / p.alpha, &p), p.v_max);
        assert_abs_diff_eq!(v_zz(8.89, &p), 0.6, epsilon = 1e-12);
        assert_eq!(v_zz(0.0, &p), 0.0);
        assert_eq!(v_zz(-3.0, &p), 0.0);
        assert_eq!(v_zz(1e6, &p), 1.0);
    }

    #[test]
    fn accel_zz_examples() {
        let p = fig1();
        assert_abs_diff_eq!(accel_zz(0.0, 8.89, 0.6, &p), 0.0, epsilon = 1e-12);
        assert_eq!(accel_zz(0.0, 5.0, 0.0, &p), 0.0);
        assert_abs_diff_eq!(accel_zz(0.0, 8.89, 0.0, &p), 0.6 / 4.86, epsilon = 1e-12);
        assert_abs_diff_eq!(0.6 / 4.86, 0.12346, epsilon = 1e-5);
    }

    #[test]
    fn gap_equilibrium_velocity() {
        let law = law();
        let grid = Grid1D::over_road(1.0, 5, BoundaryMode::FreeOutflow).unwrap();
        let scaling = ScalingParams::new(&grid, 0.01, 1, &law).unwrap();
        assert_eq!(scaling.ell_n(), 0.2);
        assert_eq!(ftl_gap_equilibrium_velocity(0.0, 0.2, &scaling, &law).unwrap(), 0.0);
        assert_abs_diff_eq!(
            ftl_gap_equilibrium_velocity(0.0, 0.4, &scaling, &law).unwrap(),
            0.5,
            epsilon = 1e-15
        );
        assert!(ftl_gap_equilibrium_velocity(0.0, 1e9, &scaling, &law).unwrap() > 0.999_999);
        assert!(ftl_gap_equilibrium_velocity(0.0, 0.0, &scaling, &law).is_err());
    }

    #[test]
    fn ring_init_layout() {
        let ring = ring_init(34, 314.0).unwrap();
        assert_abs_diff_eq!(ring.position(0), 314.0 / 35.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ring.position(0), 8.9714, epsilon = 1e-4);
        for k in 0..33 {
            assert_abs_diff_eq!(ring.gap(k), 314.0 / 35.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(ring.gap(33), 2.0 * 314.0 / 35.0, epsilon = 1e-12);
        assert_abs_diff_eq!(ring.gap(33), 17.943, epsilon = 1e-3);
        assert!(ring.velocities().iter().all(|&v| v == 0.0));

        let small = ring_init(2, 3.0).unwrap();
        assert_eq!(small.positions(), vec![1.0, 2.0]);
        assert_eq!(small.gap(1), 2.0);
        assert!(ring_init(1, 3.0).is_err());
    }

    #[test]
    fn equilibrium_ring_moves_rigidly() {
        let p = ZzParams::new(2.0, 0.5, 1.0, 1.0).unwrap();
        let n = 10;
        let length = 25.0;
        let gap = length / n as f64;
        let v = v_zz(gap, &p);
        let mut ring = RingRoad::new(
            length,
            (0..n).map(|k| k as f64 * gap).collect(),
            vec![v; n],
        )
        .unwrap();
        for _ in 0..100 {
            let report = ring_step(&mut ring, &p, 0.1);
            assert!(report.clamped.is_empty() && report.collisions.is_empty());
        }
        for k in 0..n {
            assert_abs_diff_eq!(ring.gap(k), gap, epsilon = 1e-9);
            assert_abs_diff_eq!(ring.velocities()[k], v, epsilon = 1e-12);
        }
    }

    #[test]
    fn free_flow_ring_is_a_fixed_point_of_the_velocity_update() {
        let p = ZzParams::new(2.0, 0.5, 1.0, 1.0).unwrap();
        let mut ring = RingRoad::new(40.0, vec![0.0, 10.0, 20.0, 30.0], vec![1.0; 4]).unwrap();
        ring_step(&mut ring, &p, 0.5);
        assert!(ring.velocities().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn velocities_relax_geometrically_when_spacing_is_always_too_small() {
        let tau = 2.0;
        let dt = 0.1;
        let p = ZzParams::new(tau, 1e-6, 1000.0, 1.0).unwrap();
        let mut ring = RingRoad::new(100.0, vec![0.0, 50.0], vec![0.8, 0.4]).unwrap();
        let factor: f64 = 1.0 - dt / tau;
        for n in 1..=50 {
            ring_step(&mut ring, &p, dt);
            assert_abs_diff_eq!(ring.velocities()[0], 0.8 * factor.powi(n), epsilon = 1e-12);
            assert_abs_diff_eq!(ring.velocities()[1], 0.4 * factor.powi(n), epsilon = 1e-12);
        }
    }

    #[test]
    fn negative_velocities_are_clamped() {
        // dt/tau > 1 overshoots below zero without the clamp
        let p = ZzParams::new(0.1, 0.5, 5.0, 1.0).unwrap();
        let mut ring = RingRoad::new(8.0, vec![0.0, 4.0], vec![1.0, 1.0]).unwrap();
        let report = ring_step(&mut ring, &p, 0.5);
        assert_eq!(report.clamped, vec![0, 1]);
        assert!(ring.velocities().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn ring_dt_bound() {
        let ring = ring_init(34, 314.0).unwrap();
        assert!(ring.check_dt(0.125, 1.0).is_ok());
        assert!(ring.check_dt(10.0, 1.0).is_err());
    }
}

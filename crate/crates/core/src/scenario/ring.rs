use crate::error::Result;
use crate::micro::{ring_init, ring_step, ZzParams};

/// Standalone Zhao-Zhang ring run started from `ring_init`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingConfig {
    pub n_vehicles: usize,
    pub length: f64,
    pub alpha: f64,
    pub delta_min: f64,
    pub tau: f64,
    pub v_max: f64,
    pub dt: f64,
    pub steps: usize,
    /// Record every `stride` steps (the first and last are always kept).
    pub stride: usize,
}

impl Default for RingConfig {
    fn default() -> Self {
        Self {
            n_vehicles: 34,
            length: 314.0,
            alpha: 0.6,
            delta_min: 7.89,
            tau: 4.86,
            v_max: 1.0,
            dt: 0.125,
            steps: 4000,
            stride: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RingSample {
    pub step: usize,
    pub time: f64,
    /// Positions wrapped into `[0, L)`, vehicle order.
    pub pos: Vec<f64>,
    pub vel: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct RingLog {
    pub samples: Vec<RingSample>,
    pub clamps: usize,
    pub collisions: usize,
}

pub fn run_ring(cfg: &RingConfig) -> Result<RingLog> {
    let p = ZzParams::new(cfg.tau, cfg.alpha, cfg.delta_min, cfg.v_max)?;
    let mut ring = ring_init(cfg.n_vehicles, cfg.length)?;
    ring.check_dt(cfg.dt, cfg.v_max)?;
    let stride = cfg.stride.max(1);
    let sample = |ring: &crate::micro::RingRoad, step: usize| RingSample {
        step,
        time: step as f64 * cfg.dt,
        pos: ring.positions(),
        vel: ring.velocities().to_vec(),
    };
    let mut log = RingLog {
        samples: vec![sample(&ring, 0)],
        ..RingLog::default()
    };
    for n in 1..=cfg.steps {
        let r = ring_step(&mut ring, &p, cfg.dt);
        log.clamps += r.clamped.len();
        log.collisions += r.collisions.len();
        if n % stride == 0 || n == cfg.steps {
            log.samples.push(sample(&ring, n));
        }
    }
    Ok(log)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn samples_follow_stride() {
        let cfg = RingConfig {
            steps: 25,
            stride: 10,
            ..RingConfig::default()
        };
        let log = run_ring(&cfg).unwrap();
        let steps: Vec<usize> = log.samples.iter().map(|s| s.step).collect();
        assert_eq!(steps, vec![0, 10, 20, 25]);
        assert_eq!(log.samples[0].vel, vec![0.0; 34]);
        assert!((log.samples[0].pos[0] - 314.0 / 35.0).abs() < 1e-12);
    }

    #[test]
    fn positions_stay_on_the_ring() {
        let log = run_ring(&RingConfig {
            steps: 800,
            stride: 50,
            ..RingConfig::default()
        })
        .unwrap();
        for s in &log.samples {
            assert!(s.pos.iter().all(|&x| (0.0..314.0).contains(&x)));
            assert!(s.vel.iter().all(|&v| (0.0..=1.0).contains(&v)));
        }
    }

    #[test]
    fn too_large_dt_is_rejected() {
        let cfg = RingConfig {
            dt: 10.0,
            ..RingConfig::default()
        };
        assert!(run_ring(&cfg).is_err());
    }
}

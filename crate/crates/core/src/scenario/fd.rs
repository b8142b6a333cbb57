use super::run::RunLog;

/// A density/flux pair contributed by one active vehicle at one step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdPoint {
    pub rho: f64,
    pub flux: f64,
}

/// One point per recorded (vehicle, step): the density of the occupied cell
/// against that density times the vehicle velocity.
pub fn fundamental_diagram(log: &RunLog) -> Vec<FdPoint> {
    log.vehicles
        .iter()
        .map(|r| FdPoint {
            rho: r.rho,
            flux: r.rho * r.vel,
        })
        .collect()
}

/// Mean over density bins of the standard deviation of flux. Bins split
/// `[0, rho_max]` evenly; bins with fewer than two points are skipped.
pub fn mean_bin_spread(points: &[FdPoint], bins: usize, rho_max: f64) -> f64 {
    let mut groups = vec![Vec::new(); bins];
    for p in points {
        let b = ((p.rho / rho_max * bins as f64) as usize).min(bins - 1);
        groups[b].push(p.flux);
    }
    let spreads: Vec<f64> = groups
        .iter()
        .filter(|g| g.len() >= 2)
        .map(|g| {
            let n = g.len() as f64;
            let mean = g.iter().sum::<f64>() / n;
            (g.iter().map(|f| (f - mean).powi(2)).sum::<f64>() / n).sqrt()
        })
        .collect();
    if spreads.is_empty() {
        0.0
    } else {
        spreads.iter().sum::<f64>() / spreads.len() as f64
    }
}

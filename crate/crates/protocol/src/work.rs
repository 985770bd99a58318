use serde::Serialize;

use super::{Trajectory, TrajectoryPoint};
use molbit_core::constants::CONSTANTS;
use molbit_core::error::{Error, Result};
use molbit_statmech::landauer_bound;

/// Loop work per molecule, erg.
///
/// W1 and W2 are the integrals of steps 1 and 2 as traversed. W3 and W4 are
/// the integrals of steps 3 and 4 taken with increasing field, i.e. the
/// negatives of the traversed integrals. Hence W_total = -(loop integral of
/// M . dH), the work dissipated into the bath over the cycle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkBreakdown {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
    pub w4: f64,
    pub w13: f64,
    pub w24: f64,
    pub w_total: f64,
}

impl WorkBreakdown {
    pub fn from_steps(w1: f64, w2: f64, w3: f64, w4: f64) -> Self {
        let w13 = w3 - w1;
        let w24 = w4 - w2;
        WorkBreakdown {
            w1,
            w2,
            w3,
            w4,
            w13,
            w24,
            w_total: w13 + w24,
        }
    }

    /// W_total / (k_B T ln 2).
    pub fn landauer_ratio(&self, t: f64) -> Result<f64> {
        let bound = landauer_bound(t)?;
        if bound == 0.0 {
            return Err(Error::UndefinedRatio(
                "Landauer bound is zero at T = 0".into(),
            ));
        }
        Ok(self.w_total / bound)
    }
}

/// Trapezoidal integral of M . dH over consecutive points, in mu_B T.
pub fn segment_integral(points: &[TrajectoryPoint]) -> f64 {
    points
        .windows(2)
        .map(|w| {
            let (a, b) = (&w[0], &w[1]);
            let d = b.field - a.field;
            0.5 * ((a.m_x + b.m_x) * d.x + (a.m_y + b.m_y) * d.y + (a.m_z + b.m_z) * d.z)
        })
        .sum()
}

/// W1..W4 and their combinations for a closed four-step trajectory.
pub fn work_integrals(traj: &Trajectory) -> Result<WorkBreakdown> {
    if !traj.closed {
        return Err(Error::invalid("work integrals need a closed field cycle"));
    }
    if traj.segment_count() != 4 {
        return Err(Error::invalid(format!(
            "work accounting expects 4 steps, got {}",
            traj.segment_count()
        )));
    }
    let erg = |x: f64| CONSTANTS.moment_field_to_erg(x, 1.0);
    let w: Vec<f64> = (0..4)
        .map(|k| erg(segment_integral(traj.segment(k))))
        .collect();
    Ok(WorkBreakdown::from_steps(w[0], w[1], -w[2], -w[3]))
}

use serde::{Deserialize, Serialize};

use molbit_core::error::{Error, Result};
use molbit_core::model::FieldVector;

/// One linear ramp of the field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Segment {
    pub start: FieldVector,
    pub end: FieldVector,
    pub duration_s: f64,
    pub substeps: usize,
}

impl Segment {
    pub fn field_at(&self, fraction: f64) -> FieldVector {
        self.start.lerp(&self.end, fraction)
    }
}

/// Piecewise-linear field path with the bath temperature and probe frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldSchedule {
    pub segments: Vec<Segment>,
    pub temperature_k: f64,
    pub omega_rad_s: f64,
}

/// Endpoints closer than this (tesla) count as the same field.
const CHAIN_TOL: f64 = 1e-12;

fn same_field(a: &FieldVector, b: &FieldVector) -> bool {
    (*a - *b).norm() <= CHAIN_TOL
}

impl FieldSchedule {
    pub fn new(segments: Vec<Segment>, temperature_k: f64, omega_rad_s: f64) -> Result<Self> {
        let s = FieldSchedule {
            segments,
            temperature_k,
            omega_rad_s,
        };
        s.validate()?;
        Ok(s)
    }

    /// The erasure-storage cycle.
    ///
    /// 1. H_y 0 -> hy_max
    /// 2. H_z 0 -> hz_max at H_y = hy_max
    /// 3. H_y hy_max -> 0 at H_z = hz_max
    /// 4. H_z hz_max -> 0
    pub fn erasure_cycle(
        hy_max: f64,
        hz_max: f64,
        durations_s: [f64; 4],
        substeps: usize,
        temperature_k: f64,
        omega_rad_s: f64,
    ) -> Result<Self> {
        let c = [
            FieldVector::zero(),
            FieldVector::new(0.0, hy_max, 0.0),
            FieldVector::new(0.0, hy_max, hz_max),
            FieldVector::new(0.0, 0.0, hz_max),
        ];
        let segments = (0..4)
            .map(|k| Segment {
                start: c[k],
                end: c[(k + 1) % 4],
                duration_s: durations_s[k],
                substeps,
            })
            .collect();
        FieldSchedule::new(segments, temperature_k, omega_rad_s)
    }

    /// 2 T, 0.21 T, 10 s per step, 512 substeps, 1 K, 2 pi 333 rad/s.
    pub fn fe8_default() -> Self {
        FieldSchedule::erasure_cycle(
            2.0,
            0.21,
            [10.0; 4],
            512,
            1.0,
            2.0 * std::f64::consts::PI * 333.0,
        )
        .expect("default schedule is valid")
    }

    pub fn validate(&self) -> Result<()> {
        if self.segments.is_empty() {
            return Err(Error::invalid("schedule has no segments"));
        }
        if !(self.temperature_k > 0.0 && self.temperature_k.is_finite()) {
            return Err(Error::invalid(format!(
                "temperature must be > 0, got {}",
                self.temperature_k
            )));
        }
        if !(self.omega_rad_s >= 0.0 && self.omega_rad_s.is_finite()) {
            return Err(Error::invalid(format!(
                "omega must be >= 0, got {}",
                self.omega_rad_s
            )));
        }
        for (k, seg) in self.segments.iter().enumerate() {
            if !(seg.duration_s > 0.0 && seg.duration_s.is_finite()) {
                return Err(Error::invalid(format!(
                    "segment {} duration must be > 0, got {}",
                    k + 1,
                    seg.duration_s
                )));
            }
            if seg.substeps < 2 {
                return Err(Error::invalid(format!(
                    "segment {} needs at least 2 substeps, got {}",
                    k + 1,
                    seg.substeps
                )));
            }
            if !seg.start.is_finite() || !seg.end.is_finite() {
                return Err(Error::invalid(format!(
                    "segment {} has a non-finite field",
                    k + 1
                )));
            }
        }
        for (k, w) in self.segments.windows(2).enumerate() {
            if !same_field(&w[0].end, &w[1].start) {
                return Err(Error::invalid(format!(
                    "segment {} ends at {:?} but segment {} starts at {:?}",
                    k + 1,
                    w[0].end,
                    k + 2,
                    w[1].start
                )));
            }
        }
        Ok(())
    }

    /// True when the path returns to its starting field.
    pub fn is_closed(&self) -> bool {
        match (self.segments.first(), self.segments.last()) {
            (Some(a), Some(b)) => same_field(&a.start, &b.end),
            _ => false,
        }
    }

    pub fn total_duration(&self) -> f64 {
        self.segments.iter().map(|s| s.duration_s).sum()
    }

    /// Copy with every segment duration multiplied by the matching factor.
    pub fn with_durations(&self, durations_s: &[f64]) -> Result<Self> {
        if durations_s.len() != self.segments.len() {
            return Err(Error::invalid(format!(
                "expected {} durations, got {}",
                self.segments.len(),
                durations_s.len()
            )));
        }
        let mut s = self.clone();
        for (seg, &d) in s.segments.iter_mut().zip(durations_s) {
            seg.duration_s = d;
        }
        s.validate()?;
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_cycle_is_closed_and_valid() {
        let s = FieldSchedule::fe8_default();
        assert_eq!(s.segments.len(), 4);
        assert!(s.is_closed());
        assert_eq!(s.total_duration(), 40.0);
        assert_eq!(s.segments[1].end, FieldVector::new(0.0, 2.0, 0.21));
    }

    #[test]
    fn rejects_broken_chain() {
        let mut s = FieldSchedule::fe8_default();
        s.segments[2].start.z = 0.3;
        assert!(s.validate().is_err());
    }

    #[test]
    fn rejects_bad_segments() {
        let s = FieldSchedule::fe8_default();
        assert!(s.with_durations(&[1.0, 0.0, 1.0, 1.0]).is_err());
        let mut t = s.clone();
        t.segments[0].substeps = 1;
        assert!(t.validate().is_err());
        let mut t = s;
        t.temperature_k = 0.0;
        assert!(t.validate().is_err());
    }

    #[test]
    fn lerp_endpoints() {
        let seg = FieldSchedule::fe8_default().segments[2];
        assert_eq!(seg.field_at(0.0), seg.start);
        assert_eq!(seg.field_at(1.0), seg.end);
    }
}

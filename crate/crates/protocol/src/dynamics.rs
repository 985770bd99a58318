use serde::Serialize;

use super::FieldSchedule;
use molbit_core::error::{Error, Result};
use molbit_core::model::{Axis, FieldVector, SpinModel, SpinSystem};
use molbit_kinetics::{debye_susceptibility, RelaxationLaw};
use molbit_statmech::ThermoPoint;

/// State of the ensemble at one substep boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryPoint {
    pub t_s: f64,
    /// 1-based segment index; 0 for the initial point.
    pub segment: usize,
    pub field: FieldVector,
    pub m_x: f64,
    pub m_y: f64,
    pub m_z: f64,
    /// Unconstrained equilibrium M_z at this field.
    pub m_z_eq: f64,
    pub tau_s: f64,
    /// Isothermal chi_zz at this field.
    pub chi_t_z: f64,
    pub chi_prime_z: f64,
    pub chi_double_prime_z: f64,
}

/// Dense trajectory over a schedule.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub points: Vec<TrajectoryPoint>,
    /// Segment k covers points[bounds[k]..=bounds[k + 1]].
    pub bounds: Vec<usize>,
    pub temperature_k: f64,
    pub closed: bool,
}

impl Trajectory {
    pub fn segment_count(&self) -> usize {
        self.bounds.len().saturating_sub(1)
    }

    /// Points of segment k (0-based), both endpoints included.
    pub fn segment(&self, k: usize) -> &[TrajectoryPoint] {
        &self.points[self.bounds[k]..=self.bounds[k + 1]]
    }

    pub fn last(&self) -> &TrajectoryPoint {
        self.points.last().expect("trajectory is never empty")
    }
}

/// Longitudinal shift lambda (tesla) with M_z,eq(B + lambda z) = m_z.
///
/// The slow coordinate M_z is held fixed while the fast components
/// equilibrate; the shift acts as the Lagrange multiplier of that constraint.
/// `guess` seeds the search, typically the shift of the previous substep.
fn constrained_shift(
    model: &SpinModel,
    field: &FieldVector,
    t: f64,
    m_z: f64,
    free: &ThermoPoint,
    guess: f64,
) -> Result<(f64, ThermoPoint)> {
    const TOL_M: f64 = 1e-11;
    if (m_z - free.m(Axis::Z)).abs() <= TOL_M {
        return Ok((0.0, free.clone()));
    }
    let sat = model.system().saturation_moment();
    if m_z.abs() >= sat {
        return Err(Error::invalid(format!(
            "M_z = {m_z} is at or beyond saturation {sat}"
        )));
    }
    let eval =
        |lam: f64| ThermoPoint::compute(model, &(*field + FieldVector::new(0.0, 0.0, lam)), t);

    let (lam0, tp0) = if guess != 0.0 && guess.is_finite() {
        (guess, eval(guess)?)
    } else {
        (0.0, free.clone())
    };
    let r0 = tp0.m(Axis::Z) - m_z;
    if r0.abs() <= TOL_M {
        return Ok((lam0, tp0));
    }

    // Bracket the root; M_z,eq is increasing in lambda.
    let dir = if r0 < 0.0 { 1.0 } else { -1.0 };
    let chi0 = tp0.chi(Axis::Z);
    let mut step = if chi0 > 0.0 {
        (1.5 * r0.abs() / chi0).clamp(1e-6, 0.05)
    } else {
        0.05
    };
    let (mut near, mut near_tp) = (lam0, tp0);
    let (far, far_tp) = loop {
        let lam = lam0 + dir * step;
        let tp = eval(lam)?;
        if (tp.m(Axis::Z) - m_z) * dir >= 0.0 {
            break (lam, tp);
        }
        near = lam;
        near_tp = tp;
        step *= 4.0;
        if step > 1e6 {
            return Err(Error::NumericalFailure {
                what: "constrained equilibrium could not be bracketed".into(),
                residual: (near_tp.m(Axis::Z) - m_z).abs(),
            });
        }
    };
    let (mut lo, mut hi) = if dir > 0.0 { (near, far) } else { (far, near) };
    let (mut lam, mut tp) = if (near_tp.m(Axis::Z) - m_z).abs() <= (far_tp.m(Axis::Z) - m_z).abs() {
        (near, near_tp)
    } else {
        (far, far_tp)
    };

    for _ in 0..200 {
        let r = tp.m(Axis::Z) - m_z;
        if r.abs() <= TOL_M || hi - lo <= 1e-15 * (1.0 + lam.abs()) {
            return Ok((lam, tp));
        }
        if r > 0.0 {
            hi = lam;
        } else {
            lo = lam;
        }
        let chi = tp.chi(Axis::Z);
        let newton = if chi > 0.0 { lam - r / chi } else { f64::NAN };
        lam = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        tp = eval(lam)?;
    }
    Err(Error::NumericalFailure {
        what: "constrained equilibrium did not converge".into(),
        residual: (tp.m(Axis::Z) - m_z).abs(),
    })
}

/// Relaxes M_z along the schedule and records the full trajectory.
///
/// Each substep uses the exact solution for frozen coefficients,
/// M_z <- M_eq + (M_z - M_eq) exp(-dt / tau), with M_eq and tau taken at the
/// end of the substep. M_x and M_y are the equilibrium transverse moments of
/// an ensemble whose M_z is held at its current value; when M_z = M_eq they
/// equal the unconstrained equilibrium values. chi' and chi'' come from the
/// Debye response at the probe frequency.
pub fn run_protocol(
    sys: &SpinSystem,
    schedule: &FieldSchedule,
    m0_z: f64,
    law: &dyn RelaxationLaw,
    chi_s: f64,
) -> Result<Trajectory> {
    schedule.validate()?;
    let model = SpinModel::new(sys.clone())?;
    let sat = sys.saturation_moment();
    if !(m0_z.abs() < sat) {
        return Err(Error::invalid(format!(
            "initial M_z = {m0_z} must lie strictly inside (-{sat}, {sat})"
        )));
    }
    let t = schedule.temperature_k;
    let omega = schedule.omega_rad_s;

    let point = |time: f64,
                 segment: usize,
                 field: FieldVector,
                 m_z: f64,
                 free: &ThermoPoint,
                 tau: f64,
                 guess: f64|
     -> Result<(TrajectoryPoint, f64)> {
        let (shift, constrained) = constrained_shift(&model, &field, t, m_z, free, guess)?;
        let chi_t = free.chi(Axis::Z);
        let d = debye_susceptibility(chi_t, chi_s, tau, omega);
        let p = TrajectoryPoint {
            t_s: time,
            segment,
            field,
            m_x: constrained.m(Axis::X),
            m_y: constrained.m(Axis::Y),
            m_z,
            m_z_eq: free.m(Axis::Z),
            tau_s: tau,
            chi_t_z: chi_t,
            chi_prime_z: d.chi_prime,
            chi_double_prime_z: d.chi_double_prime,
        };
        Ok((p, shift))
    };

    let start = schedule.segments[0].start;
    let free = ThermoPoint::compute(&model, &start, t)?;
    let tau = law.tau(&start, t)?;
    let (first, mut shift) = point(0.0, 0, start, m0_z, &free, tau, 0.0)?;
    let mut points = vec![first];
    let mut bounds = vec![0];
    let mut m_z = m0_z;
    let mut time = 0.0;

    for (k, seg) in schedule.segments.iter().enumerate() {
        let n = seg.substeps;
        let dt = seg.duration_s / n as f64;
        let t_start = time;
        for i in 1..=n {
            let field = if i == n {
                seg.end
            } else {
                seg.field_at(i as f64 / n as f64)
            };
            let free = ThermoPoint::compute(&model, &field, t)?;
            let tau = law.tau(&field, t)?;
            let m_eq = free.m(Axis::Z);
            m_z = m_eq + (m_z - m_eq) * (-dt / tau).exp();
            time = t_start + seg.duration_s * i as f64 / n as f64;
            let (p, lam) = point(time, k + 1, field, m_z, &free, tau, shift)?;
            shift = lam;
            points.push(p);
        }
        bounds.push(points.len() - 1);
    }

    Ok(Trajectory {
        points,
        bounds,
        temperature_k: t,
        closed: schedule.is_closed(),
    })
}

/// (|H|, chi'_z) along the trajectory, in time order.
pub fn chi_profile(traj: &Trajectory) -> Vec<(f64, f64)> {
    traj.points
        .iter()
        .map(|p| (p.field.norm(), p.chi_prime_z))
        .collect()
}

/// Onset and peak of chi'_z during the first segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChiFeatures {
    /// |H| where chi' first exceeds 10% of its step-1 maximum.
    pub onset_field: f64,
    /// |H| of the step-1 maximum.
    pub peak_field: f64,
    pub peak_chi: f64,
}

pub fn chi_features(traj: &Trajectory) -> Result<ChiFeatures> {
    if traj.segment_count() == 0 {
        return Err(Error::invalid("trajectory has no segments"));
    }
    let seg = traj.segment(0);
    let (peak_idx, peak_chi) = seg
        .iter()
        .enumerate()
        .map(|(i, p)| (i, p.chi_prime_z))
        .fold((0, f64::NEG_INFINITY), |a, b| if b.1 > a.1 { b } else { a });
    let level = 0.1 * peak_chi;
    let onset = seg
        .iter()
        .position(|p| p.chi_prime_z > level)
        .unwrap_or(peak_idx);
    Ok(ChiFeatures {
        onset_field: seg[onset].field.norm(),
        peak_field: seg[peak_idx].field.norm(),
        peak_chi,
    })
}

/// Integrates chi' over a monotone H_z sweep: M(H) = M_start + int chi' dH.
pub fn magnetization_from_chi(samples: &[(f64, f64)], m_start: f64) -> Result<Vec<(f64, f64)>> {
    if samples.is_empty() {
        return Ok(Vec::new());
    }
    if samples.len() > 1 {
        let increasing = samples[1].0 > samples[0].0;
        let monotone = samples.windows(2).all(|w| {
            if increasing {
                w[1].0 > w[0].0
            } else {
                w[1].0 < w[0].0
            }
        });
        if !monotone {
            return Err(Error::invalid("H_z must be strictly monotone"));
        }
    }
    let mut out = Vec::with_capacity(samples.len());
    let mut m = m_start;
    out.push((samples[0].0, m));
    for w in samples.windows(2) {
        m += 0.5 * (w[0].1 + w[1].1) * (w[1].0 - w[0].0);
        out.push((w[1].0, m));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use molbit_kinetics::FixedRelaxation;

    fn short_schedule(d: [f64; 4], n: usize) -> FieldSchedule {
        FieldSchedule::erasure_cycle(2.0, 0.21, d, n, 1.0, 2.0 * std::f64::consts::PI * 333.0)
            .unwrap()
    }

    #[test]
    fn exponential_update_is_exact_for_constant_coefficients() {
        // Constant field: M_eq and tau are constant, so any substep count gives
        // the same end value as the closed form.
        let b = FieldVector::new(0.0, 1.0, 0.1);
        let tau = 0.7;
        let m0 = -3.0;
        let model = SpinModel::new(SpinSystem::fe8()).unwrap();
        let m_eq = ThermoPoint::compute(&model, &b, 1.0).unwrap().m(Axis::Z);
        for n in [2, 7, 64] {
            let seg = crate::Segment {
                start: b,
                end: b,
                duration_s: 1.3,
                substeps: n,
            };
            let s = FieldSchedule::new(vec![seg], 1.0, 10.0).unwrap();
            let traj =
                run_protocol(&SpinSystem::fe8(), &s, m0, &FixedRelaxation(tau), 0.0).unwrap();
            let exact = m_eq + (m0 - m_eq) * (-1.3f64 / tau).exp();
            assert!((traj.last().m_z - exact).abs() < 1e-12, "{n}");
        }
    }

    #[test]
    fn frozen_limit_keeps_initial_moment() {
        let s = short_schedule([1e-15; 4], 16);
        let m0 = 4.0;
        let traj = run_protocol(&SpinSystem::fe8(), &s, m0, &FixedRelaxation(1.0), 0.0).unwrap();
        for p in &traj.points {
            assert!((p.m_z - m0).abs() < 1e-6);
        }
    }

    #[test]
    fn quasi_static_limit_tracks_equilibrium() {
        let s = short_schedule([1.0; 4], 16);
        let traj = run_protocol(&SpinSystem::fe8(), &s, 0.0, &FixedRelaxation(1e-12), 0.0).unwrap();
        for p in &traj.points {
            assert!((p.m_z - p.m_z_eq).abs() < 1e-6);
        }
    }

    #[test]
    fn constrained_moment_matches_equilibrium_when_relaxed() {
        let model = SpinModel::new(SpinSystem::fe8()).unwrap();
        let b = FieldVector::new(0.0, 1.5, 0.1);
        let free = ThermoPoint::compute(&model, &b, 1.0).unwrap();
        let (lam, tp) = constrained_shift(&model, &b, 1.0, free.m(Axis::Z), &free, 0.0).unwrap();
        assert_eq!(lam, 0.0);
        assert_eq!(tp.m(Axis::Y), free.m(Axis::Y));
        let (lam, tp) = constrained_shift(&model, &b, 1.0, 5.0, &free, 0.0).unwrap();
        assert!((tp.m(Axis::Z) - 5.0).abs() < 1e-10);
        assert!(lam < 0.0);
    }

    #[test]
    fn rejects_saturated_start() {
        let s = short_schedule([1.0; 4], 4);
        assert!(run_protocol(&SpinSystem::fe8(), &s, 20.0, &FixedRelaxation(1.0), 0.0).is_err());
    }

    #[test]
    fn chi_integration_linear_case() {
        let c = 3.5;
        let samples: Vec<(f64, f64)> = (0..=10).map(|k| (0.02 * k as f64, c)).collect();
        let m = magnetization_from_chi(&samples, 1.0).unwrap();
        for (h, mz) in m {
            assert!((mz - (1.0 + c * h)).abs() < 1e-12);
        }
        assert!(magnetization_from_chi(&[(0.0, 1.0), (0.1, 1.0), (0.05, 1.0)], 0.0).is_err());
        assert!(magnetization_from_chi(&[(0.0, 1.0), (0.0, 1.0)], 0.0).is_err());
    }

    #[test]
    fn chi_integration_is_second_order() {
        let chi = |h: f64| (3.0 * h).sin() + 2.0;
        let err = |n: usize| {
            let h: Vec<f64> = (0..=n).map(|k| k as f64 / n as f64).collect();
            let samples: Vec<(f64, f64)> = h.iter().map(|&x| (x, chi(x))).collect();
            let m = magnetization_from_chi(&samples, 0.0).unwrap();
            (1..n)
                .map(|k| {
                    let d = (m[k + 1].1 - m[k - 1].1) / (m[k + 1].0 - m[k - 1].0);
                    (d - chi(h[k])).abs()
                })
                .fold(0.0, f64::max)
        };
        let (e1, e2) = (err(50), err(100));
        assert!(e1 / e2 >= 3.5, "{e1} {e2}");
    }

    #[test]
    fn zero_amplitude_profile_is_flat() {
        let s = FieldSchedule::erasure_cycle(0.0, 0.0, [1.0; 4], 8, 1.0, 2000.0).unwrap();
        let law = FixedRelaxation(0.01);
        let traj = run_protocol(&SpinSystem::fe8(), &s, 0.0, &law, 0.0).unwrap();
        let prof = chi_profile(&traj);
        for (_, c) in &prof {
            assert!((c - prof[0].1).abs() < 1e-12);
        }
    }
}

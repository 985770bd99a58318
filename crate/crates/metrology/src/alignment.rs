use nalgebra::{Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use molbit_core::error::{Error, Result};
use molbit_core::model::{Axis, FieldVector, SpinModel};
use molbit_kinetics::{debye_susceptibility, RelaxationLaw};
use molbit_statmech::ThermoPoint;

/// Rotation taking molecular (hard x, medium y, easy z) axes into the lab frame.
///
/// Stored as ZYZ Euler angles in degrees: R = Rz(alpha) Ry(beta) Rz(gamma).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CrystalOrientation {
    pub alpha_deg: f64,
    pub beta_deg: f64,
    pub gamma_deg: f64,
}

fn rz(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

fn ry(a: f64) -> Matrix3<f64> {
    let (s, c) = a.sin_cos();
    Matrix3::new(c, 0.0, s, 0.0, 1.0, 0.0, -s, 0.0, c)
}

impl CrystalOrientation {
    pub fn identity() -> Self {
        CrystalOrientation {
            alpha_deg: 0.0,
            beta_deg: 0.0,
            gamma_deg: 0.0,
        }
    }

    /// Columns are the molecular axes expressed in the lab frame.
    pub fn matrix(&self) -> Matrix3<f64> {
        rz(self.alpha_deg.to_radians())
            * ry(self.beta_deg.to_radians())
            * rz(self.gamma_deg.to_radians())
    }

    pub fn from_matrix(r: &Matrix3<f64>) -> Result<Self> {
        let ortho = (r.transpose() * r - Matrix3::identity()).abs().max();
        if ortho > 1e-9 || (r.determinant() - 1.0).abs() > 1e-9 {
            return Err(Error::invalid("matrix is not a proper rotation"));
        }
        let beta = r[(2, 2)].clamp(-1.0, 1.0).acos();
        let (alpha, gamma) = if beta.sin().abs() < 1e-12 {
            // Gimbal lock: only alpha +- gamma is defined; put it all in alpha.
            let a = r[(1, 0)].atan2(r[(0, 0)]);
            (if r[(2, 2)] > 0.0 { a } else { -a }, 0.0)
        } else {
            (r[(1, 2)].atan2(r[(0, 2)]), r[(2, 1)].atan2(-r[(2, 0)]))
        };
        Ok(CrystalOrientation {
            alpha_deg: alpha.to_degrees(),
            beta_deg: beta.to_degrees(),
            gamma_deg: gamma.to_degrees(),
        })
    }

    /// Orientation whose easy axis points along `easy` and whose hard axis is
    /// the component of `hard` perpendicular to it (both in lab coordinates).
    pub fn from_axes(easy: [f64; 3], hard: [f64; 3]) -> Result<Self> {
        let z = Vector3::from(easy);
        if z.norm() == 0.0 {
            return Err(Error::DegenerateGeometry("easy axis is zero".into()));
        }
        let z = z.normalize();
        let h = Vector3::from(hard);
        let x = h - z * z.dot(&h);
        if x.norm() < 1e-12 * h.norm().max(1.0) {
            return Err(Error::DegenerateGeometry(
                "hard axis is parallel to the easy axis".into(),
            ));
        }
        let x = x.normalize();
        let y = z.cross(&x);
        Self::from_matrix(&Matrix3::from_columns(&[x, y, z]))
    }

    pub fn inverse(&self) -> Self {
        CrystalOrientation {
            alpha_deg: -self.gamma_deg,
            beta_deg: -self.beta_deg,
            gamma_deg: -self.alpha_deg,
        }
    }

    pub fn axis_in_lab(&self, axis: Axis) -> [f64; 3] {
        let c = self.matrix().column(axis.index()).into_owned();
        [c.x, c.y, c.z]
    }
}

pub fn lab_to_molecular(field_lab: &FieldVector, o: &CrystalOrientation) -> FieldVector {
    let v = o.matrix().transpose() * Vector3::from(field_lab.as_array());
    FieldVector::new(v.x, v.y, v.z)
}

pub fn molecular_to_lab(field_mol: &FieldVector, o: &CrystalOrientation) -> FieldVector {
    let v = o.matrix() * Vector3::from(field_mol.as_array());
    FieldVector::new(v.x, v.y, v.z)
}

/// Lab plane in which the field is rotated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SweepPlane {
    /// H (sin theta, 0, cos theta)
    XZ,
    /// H (cos phi, sin phi, 0)
    XY,
    /// H (0, sin psi, cos psi)
    YZ,
}

impl SweepPlane {
    pub const ALL: [SweepPlane; 3] = [SweepPlane::XZ, SweepPlane::XY, SweepPlane::YZ];

    pub fn direction(self, angle_deg: f64) -> [f64; 3] {
        let (s, c) = angle_deg.to_radians().sin_cos();
        match self {
            SweepPlane::XZ => [s, 0.0, c],
            SweepPlane::XY => [c, s, 0.0],
            SweepPlane::YZ => [0.0, s, c],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            SweepPlane::XZ => "XZ",
            SweepPlane::XY => "XY",
            SweepPlane::YZ => "YZ",
        }
    }
}

/// Probe conditions of an angular sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSettings {
    pub field_t: f64,
    pub temperature_k: f64,
    pub omega_rad_s: f64,
    pub chi_s: f64,
    /// Width of the moving average applied before peak search.
    pub smoothing: usize,
}

impl Default for SweepSettings {
    /// 0.1 T at 3 K, probed at omega = 1333 rad/s.
    fn default() -> Self {
        SweepSettings {
            field_t: 0.1,
            temperature_k: 3.0,
            omega_rad_s: 1333.0,
            chi_s: 0.0,
            smoothing: 3,
        }
    }
}

/// Debye-filtered chi'_z for a lab-frame field direction.
fn chi_prime_at(
    model: &SpinModel,
    o: &CrystalOrientation,
    dir: [f64; 3],
    s: &SweepSettings,
    law: &dyn RelaxationLaw,
) -> Result<f64> {
    let lab = FieldVector::new(dir[0], dir[1], dir[2]) * s.field_t;
    let mol = lab_to_molecular(&lab, o);
    let chi_t = ThermoPoint::compute(model, &mol, s.temperature_k)?.chi(Axis::Z);
    let tau = law.tau(&mol, s.temperature_k)?;
    Ok(debye_susceptibility(chi_t, s.chi_s, tau, s.omega_rad_s).chi_prime)
}

fn sweep_angles(
    model: &SpinModel,
    o: &CrystalOrientation,
    plane: SweepPlane,
    angles: &[f64],
    s: &SweepSettings,
    law: &dyn RelaxationLaw,
) -> Result<Vec<(f64, f64)>> {
    angles
        .par_iter()
        .map(|&a| Ok((a, chi_prime_at(model, o, plane.direction(a), s, law)?)))
        .collect()
}

/// chi'_z on a full turn of the field in `plane`, angles 0, step, ..., 360 - step.
pub fn sweep_plane_chi(
    model: &SpinModel,
    o: &CrystalOrientation,
    plane: SweepPlane,
    settings: &SweepSettings,
    step_deg: f64,
    law: &dyn RelaxationLaw,
) -> Result<Vec<(f64, f64)>> {
    let n = steps_per_turn(step_deg)?;
    let angles: Vec<f64> = (0..n).map(|k| k as f64 * step_deg).collect();
    sweep_angles(model, o, plane, &angles, settings, law)
}

fn steps_per_turn(step_deg: f64) -> Result<usize> {
    if !(step_deg > 0.0) {
        return Err(Error::invalid(format!(
            "angular step must be > 0, got {step_deg}"
        )));
    }
    let n = (360.0 / step_deg).round();
    if (n * step_deg - 360.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "step {step_deg} does not divide 360"
        )));
    }
    Ok(n as usize)
}

fn smooth(values: &[f64], width: usize, circular: bool) -> Vec<f64> {
    let n = values.len();
    if width <= 1 || n < width {
        return values.to_vec();
    }
    let half = (width / 2) as isize;
    (0..n as isize)
        .map(|i| {
            let mut acc = 0.0;
            let mut cnt = 0.0;
            for d in -half..=half {
                let j = i + d;
                let j = if circular {
                    j.rem_euclid(n as isize)
                } else if j < 0 || j >= n as isize {
                    continue;
                } else {
                    j
                };
                acc += values[j as usize];
                cnt += 1.0;
            }
            acc / cnt
        })
        .collect()
}

/// Angles of strict three-point maxima after smoothing, refined by a parabola.
///
/// `circular` treats the profile as periodic over a full turn.
pub fn find_peaks(profile: &[(f64, f64)], smoothing: usize, circular: bool) -> Vec<f64> {
    let n = profile.len();
    if n < 3 {
        return Vec::new();
    }
    let y = smooth(
        &profile.iter().map(|p| p.1).collect::<Vec<_>>(),
        smoothing,
        circular,
    );
    let step = profile[1].0 - profile[0].0;
    let mut out = Vec::new();
    let range: Box<dyn Iterator<Item = usize>> = if circular {
        Box::new(0..n)
    } else {
        Box::new(1..n - 1)
    };
    for i in range {
        let (l, r) = ((i + n - 1) % n, (i + 1) % n);
        if y[i] > y[l] && y[i] > y[r] {
            let denom = y[l] - 2.0 * y[i] + y[r];
            let shift = if denom != 0.0 {
                (0.5 * (y[l] - y[r]) / denom).clamp(-0.5, 0.5)
            } else {
                0.0
            };
            out.push(profile[i].0 + shift * step);
        }
    }
    out
}

/// Normalized v1 x v2 with z >= 0, reported with its polar angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EasyAxis {
    pub vector: [f64; 3],
    pub theta_deg: f64,
    pub phi_deg: f64,
}

impl EasyAxis {
    pub fn from_vector(v: [f64; 3]) -> Result<Self> {
        let v = Vector3::from(v);
        let norm = v.norm();
        if !(norm > 0.0) {
            return Err(Error::DegenerateGeometry("zero axis vector".into()));
        }
        let mut u = v / norm;
        if u.z < 0.0 || (u.z == 0.0 && (u.y < 0.0 || (u.y == 0.0 && u.x < 0.0))) {
            u = -u;
        }
        let theta = u.z.clamp(-1.0, 1.0).acos().to_degrees();
        let phi = u.y.atan2(u.x).to_degrees().rem_euclid(360.0);
        Ok(EasyAxis {
            vector: [u.x, u.y, u.z],
            theta_deg: theta,
            phi_deg: phi,
        })
    }

    /// Angle to another axis, ignoring sign, degrees.
    pub fn angle_to(&self, other: [f64; 3]) -> f64 {
        let a = Vector3::from(self.vector);
        let b = Vector3::from(other).normalize();
        a.dot(&b).abs().clamp(0.0, 1.0).acos().to_degrees()
    }
}

/// Easy axis from two vectors lying in the hard plane.
pub fn find_easy_axis(v1: [f64; 3], v2: [f64; 3]) -> Result<EasyAxis> {
    let a = Vector3::from(v1);
    let b = Vector3::from(v2);
    let c = a.cross(&b);
    if c.norm() <= 1e-9 * a.norm() * b.norm() {
        return Err(Error::DegenerateGeometry(
            "hard-plane vectors are parallel".into(),
        ));
    }
    EasyAxis::from_vector([c.x, c.y, c.z])
}

/// Hard-plane crossing found in one sweep plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlaneCrossing {
    pub plane: SweepPlane,
    /// Crossing angle in [0, 180), degrees.
    pub angle_deg: f64,
    pub direction: [f64; 3],
    /// (max - min) / max of chi' over the coarse sweep.
    pub contrast: f64,
}

/// Relative chi' contrast below which a plane is considered featureless.
pub const MIN_CONTRAST: f64 = 0.02;

const COARSE_STEP_DEG: f64 = 2.0;
const FINE_HALF_WIDTH_DEG: f64 = 3.0;

/// Locates the hard-plane crossing in one plane.
///
/// A coarse 1 degree sweep over half a turn (the profile has 180 degree
/// period) brackets the maximum; the final position comes from a sweep at
/// `fine_step_deg` over +-2 degrees around it.
pub fn locate_crossing(
    model: &SpinModel,
    o: &CrystalOrientation,
    plane: SweepPlane,
    settings: &SweepSettings,
    fine_step_deg: f64,
    law: &dyn RelaxationLaw,
) -> Result<PlaneCrossing> {
    steps_per_turn(fine_step_deg)?;
    let coarse_angles: Vec<f64> = (0..(180.0 / COARSE_STEP_DEG) as usize)
        .map(|k| k as f64 * COARSE_STEP_DEG)
        .collect();
    let coarse = sweep_angles(model, o, plane, &coarse_angles, settings, law)?;
    let max = coarse.iter().map(|p| p.1).fold(f64::NEG_INFINITY, f64::max);
    let min = coarse.iter().map(|p| p.1).fold(f64::INFINITY, f64::min);
    let contrast = if max > 0.0 { (max - min) / max } else { 0.0 };
    let smoothed = smooth(
        &coarse.iter().map(|p| p.1).collect::<Vec<_>>(),
        settings.smoothing,
        true,
    );
    let centre = smoothed
        .iter()
        .enumerate()
        .fold(
            (0, f64::NEG_INFINITY),
            |a, (i, &v)| if v > a.1 { (i, v) } else { a },
        )
        .0 as f64
        * COARSE_STEP_DEG;

    let half = (FINE_HALF_WIDTH_DEG / fine_step_deg).round() as i64;
    let fine_angles: Vec<f64> = (-half..=half)
        .map(|k| centre + k as f64 * fine_step_deg)
        .collect();
    let fine = sweep_angles(model, o, plane, &fine_angles, settings, law)?;
    let peaks = find_peaks(&fine, settings.smoothing, false);
    let angle = peaks
        .iter()
        .copied()
        .min_by(|a, b| (a - centre).abs().total_cmp(&(b - centre).abs()))
        .unwrap_or(centre)
        .rem_euclid(180.0);
    Ok(PlaneCrossing {
        plane,
        angle_deg: angle,
        direction: plane.direction(angle),
        contrast,
    })
}

/// Result of a full alignment run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentResult {
    pub crossings: Vec<PlaneCrossing>,
    /// Indices into `crossings` of the pair used for the cross product.
    pub used: (usize, usize),
    /// Cross product of the two crossing vectors.
    pub crossing_axis: EasyAxis,
    /// Field direction of minimum chi', started from `crossing_axis`.
    pub easy_axis: EasyAxis,
}

/// Recovers the easy axis from hard-plane crossings in the three lab planes.
///
/// Planes whose chi' barely varies are skipped; among the rest the pair of
/// crossing vectors closest to perpendicular is used. The cross product is
/// then refined with [`refine_easy_axis`].
pub fn recover_easy_axis(
    model: &SpinModel,
    o: &CrystalOrientation,
    settings: &SweepSettings,
    fine_step_deg: f64,
    law: &dyn RelaxationLaw,
) -> Result<AlignmentResult> {
    let crossings = SweepPlane::ALL
        .iter()
        .map(|&p| locate_crossing(model, o, p, settings, fine_step_deg, law))
        .collect::<Result<Vec<_>>>()?;
    let mut best: Option<(usize, usize, f64)> = None;
    for i in 0..crossings.len() {
        for j in i + 1..crossings.len() {
            if crossings[i].contrast < MIN_CONTRAST || crossings[j].contrast < MIN_CONTRAST {
                continue;
            }
            let s = Vector3::from(crossings[i].direction)
                .cross(&Vector3::from(crossings[j].direction))
                .norm();
            if best.is_none_or(|b| s > b.2) {
                best = Some((i, j, s));
            }
        }
    }
    let (i, j, _) = best.ok_or_else(|| {
        Error::DegenerateGeometry("fewer than two sweep planes show a crossing".into())
    })?;
    let crossing_axis = find_easy_axis(crossings[i].direction, crossings[j].direction)?;
    let easy_axis = refine_easy_axis(model, o, settings, crossing_axis.vector, law)?;
    Ok(AlignmentResult {
        crossings,
        used: (i, j),
        crossing_axis,
        easy_axis,
    })
}

/// Finite-difference half-width of the refinement stencil, degrees.
const REFINE_STENCIL_DEG: f64 = 0.25;
/// Largest single refinement step, degrees.
const REFINE_MAX_STEP_DEG: f64 = 3.0;
const REFINE_TOL_DEG: f64 = 1e-4;
const REFINE_MAX_ITER: usize = 20;

fn tangent_basis(n: &Vector3<f64>) -> (Vector3<f64>, Vector3<f64>) {
    let seed = if n.x.abs() < 0.9 {
        Vector3::x()
    } else {
        Vector3::y()
    };
    let t1 = n.cross(&seed).normalize();
    (t1, n.cross(&t1))
}

/// Newton search for the field direction that minimizes chi'_z.
///
/// chi'_z is even in every molecular field component, so its minimum over
/// field directions sits on the easy axis.
pub fn refine_easy_axis(
    model: &SpinModel,
    o: &CrystalOrientation,
    settings: &SweepSettings,
    start: [f64; 3],
    law: &dyn RelaxationLaw,
) -> Result<EasyAxis> {
    let mut n = Vector3::from(start);
    if !(n.norm() > 0.0) {
        return Err(Error::DegenerateGeometry("zero start vector".into()));
    }
    n.normalize_mut();
    let h = REFINE_STENCIL_DEG.to_radians();
    let max_step = REFINE_MAX_STEP_DEG.to_radians();
    let stencil = [(0.0, 0.0), (h, 0.0), (-h, 0.0), (0.0, h), (0.0, -h), (h, h)];
    for _ in 0..REFINE_MAX_ITER {
        let (t1, t2) = tangent_basis(&n);
        let f = stencil
            .par_iter()
            .map(|&(a, b)| {
                let d = (n + t1 * a + t2 * b).normalize();
                chi_prime_at(model, o, [d.x, d.y, d.z], settings, law)
            })
            .collect::<Result<Vec<_>>>()?;
        let g = [(f[1] - f[2]) / (2.0 * h), (f[3] - f[4]) / (2.0 * h)];
        let h11 = (f[1] - 2.0 * f[0] + f[2]) / (h * h);
        let h22 = (f[3] - 2.0 * f[0] + f[4]) / (h * h);
        let h12 = (f[5] - f[1] - f[3] + f[0]) / (h * h);
        let det = h11 * h22 - h12 * h12;
        let mut step = if h11 > 0.0 && det > 0.0 {
            [
                -(h22 * g[0] - h12 * g[1]) / det,
                -(h11 * g[1] - h12 * g[0]) / det,
            ]
        } else {
            let gn = g[0].hypot(g[1]);
            if gn == 0.0 {
                break;
            }
            [-g[0] / gn * max_step, -g[1] / gn * max_step]
        };
        let len = step[0].hypot(step[1]);
        if len > max_step {
            step = [step[0] * max_step / len, step[1] * max_step / len];
        }
        n = (n + t1 * step[0] + t2 * step[1]).normalize();
        if len < REFINE_TOL_DEG.to_radians() {
            break;
        }
    }
    EasyAxis::from_vector([n.x, n.y, n.z])
}

//! Boltzmann statistics over a spectrum: Z, magnetization, susceptibility, F.
//!
//! Magnetizations are in mu_B per molecule and susceptibilities in mu_B per
//! molecule per tesla. Free energies are in kelvin.

use molbit_core::constants::CONSTANTS;
use molbit_core::error::{Error, Result};
use molbit_core::model::{Axis, CMatrix, FieldVector, Spectrum, SpinModel, SpinSystem};

/// Shifted partition function: Z = exp(-shift / T) * z.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PartitionFunction {
    /// sum_i exp(-(E_i - shift) / T)
    pub z: f64,
    /// Subtracted energy, the ground eigenvalue, kelvin.
    pub shift: f64,
    pub temperature: f64,
}

impl PartitionFunction {
    /// ln of the unshifted Z.
    pub fn ln_z(&self) -> f64 {
        self.z.ln() - self.shift / self.temperature
    }

    /// F = E_min - T ln z, kelvin.
    pub fn free_energy(&self) -> f64 {
        self.shift - self.temperature * self.z.ln()
    }
}

fn check_temperature(t: f64) -> Result<()> {
    if t > 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("temperature must be > 0, got {t}")))
    }
}

/// Boltzmann weights exp(-(E_i - E_0)/T) for ascending eigenvalues.
fn boltzmann_weights(eigenvalues: &[f64], t: f64) -> Vec<f64> {
    let e0 = eigenvalues[0];
    eigenvalues.iter().map(|e| (-(e - e0) / t).exp()).collect()
}

pub fn partition_function_of(eigenvalues: &[f64], t: f64) -> Result<PartitionFunction> {
    check_temperature(t)?;
    if eigenvalues.is_empty() {
        return Err(Error::invalid("empty spectrum"));
    }
    let shift = eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    let z = eigenvalues.iter().map(|e| (-(e - shift) / t).exp()).sum();
    Ok(PartitionFunction {
        z,
        shift,
        temperature: t,
    })
}

pub fn partition_function(spec: &Spectrum, t: f64) -> Result<PartitionFunction> {
    partition_function_of(spec.eigenvalues(), t)
}

/// F = E_min - T ln Z(shifted), kelvin.
pub fn free_energy(spec: &Spectrum, t: f64) -> Result<f64> {
    Ok(partition_function(spec, t)?.free_energy())
}

/// k_B T ln 2 in erg.
pub fn landauer_bound(t: f64) -> Result<f64> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::invalid(format!("temperature must be >= 0, got {t}")));
    }
    Ok(CONSTANTS.k_b * t * std::f64::consts::LN_2)
}

/// Equilibrium state of one molecule at (B, T).
#[derive(Debug, Clone, PartialEq)]
pub struct ThermoPoint {
    pub temperature: f64,
    pub field: FieldVector,
    /// M_x, M_y, M_z in mu_B.
    pub magnetization: [f64; 3],
    /// Isothermal susceptibility tensor dM_a/dB_b, mu_B/T.
    pub chi_tensor: [[f64; 3]; 3],
    pub free_energy: f64,
    pub partition: PartitionFunction,
}

impl ThermoPoint {
    pub fn compute(model: &SpinModel, field: &FieldVector, t: f64) -> Result<Self> {
        check_temperature(t)?;
        let spec = model.spectrum(field)?;
        Self::from_spectrum(model, &spec, t)
    }

    /// Reuses an existing spectrum; `model` must be the one that produced it.
    pub fn from_spectrum(model: &SpinModel, spec: &Spectrum, t: f64) -> Result<Self> {
        check_temperature(t)?;
        let e = spec.eigenvalues();
        let n = e.len();
        let partition = partition_function(spec, t)?;
        let w = boltzmann_weights(e, t);
        let p: Vec<f64> = w.iter().map(|x| x / partition.z).collect();
        let beta = 1.0 / t;
        let ops = model.operators();
        let mats: [CMatrix; 3] = [
            spec.in_eigenbasis(&ops.sx),
            spec.in_eigenbasis(&ops.sy),
            spec.in_eigenbasis(&ops.sz),
        ];

        let mut mean = [0.0; 3];
        for (a, m) in mats.iter().enumerate() {
            mean[a] = (0..n).map(|i| p[i] * m[(i, i)].re).sum();
        }

        // (p_i - p_j) / (E_j - E_i) for i < j, with its beta p_i limit.
        let tol = 64.0 * f64::EPSILON * e.iter().map(|x| x.abs()).fold(1.0, f64::max);
        let mut kernel = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let gap = e[j] - e[i];
                kernel[i * n + j] = if gap <= tol {
                    beta * p[i]
                } else {
                    -p[i] * (-beta * gap).exp_m1() / gap
                };
            }
        }

        let scale = model.system().g * model.zeeman_factor();
        let mut chi = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in a..3 {
                let (ma, mb) = (&mats[a], &mats[b]);
                let mut diag = 0.0;
                for i in 0..n {
                    diag += p[i] * ma[(i, i)].re * mb[(i, i)].re;
                }
                let mut off = 0.0;
                for i in 0..n {
                    for j in i + 1..n {
                        off += 2.0 * (ma[(i, j)] * mb[(j, i)]).re * kernel[i * n + j];
                    }
                }
                let v = scale * (beta * (diag - mean[a] * mean[b]) + off);
                chi[a][b] = v;
                chi[b][a] = v;
            }
        }

        let g = model.system().g;
        Ok(ThermoPoint {
            temperature: t,
            field: *spec.field(),
            magnetization: mean.map(|s| g * s),
            chi_tensor: chi,
            free_energy: partition.free_energy(),
            partition,
        })
    }

    pub fn m(&self, axis: Axis) -> f64 {
        self.magnetization[axis.index()]
    }

    /// Diagonal susceptibility dM_a/dB_a.
    pub fn chi(&self, axis: Axis) -> f64 {
        self.chi_tensor[axis.index()][axis.index()]
    }
}

/// M_a = g <S_a>, mu_B per molecule.
pub fn equilibrium_magnetization(
    sys: &SpinSystem,
    field: &FieldVector,
    t: f64,
    axis: Axis,
) -> Result<f64> {
    let model = SpinModel::new(sys.clone())?;
    Ok(ThermoPoint::compute(&model, field, t)?.m(axis))
}

/// Isothermal dM_a/dB_a from the fluctuation (Kubo) formula, mu_B/T.
pub fn equilibrium_susceptibility(
    sys: &SpinSystem,
    field: &FieldVector,
    t: f64,
    axis: Axis,
) -> Result<f64> {
    let model = SpinModel::new(sys.clone())?;
    Ok(ThermoPoint::compute(&model, field, t)?.chi(axis))
}

/// Default central-difference step for [`susceptibility_finite_difference`], tesla.
pub const FD_STEP_T: f64 = 1e-4;

/// Central difference of M_a along `axis`, mu_B/T.
pub fn susceptibility_finite_difference(
    model: &SpinModel,
    field: &FieldVector,
    t: f64,
    axis: Axis,
    delta: f64,
) -> Result<f64> {
    if !(delta > 0.0) {
        return Err(Error::invalid(format!("step must be > 0, got {delta}")));
    }
    let b0 = field.component(axis);
    let up = ThermoPoint::compute(model, &field.with_component(axis, b0 + delta), t)?;
    let dn = ThermoPoint::compute(model, &field.with_component(axis, b0 - delta), t)?;
    Ok((up.m(axis) - dn.m(axis)) / (2.0 * delta))
}

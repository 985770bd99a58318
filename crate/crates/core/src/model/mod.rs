//! Giant-spin Hamiltonian, its exact diagonalization and derived level data.

mod operators;
mod parity;
mod spectrum;

use std::ops::{Add, Mul, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use operators::{spin_operators, SpinOperators};
pub use parity::{parity_blocks, ParityBlocks};
pub use spectrum::{
    build_hamiltonian, diagonalize, resonance_fields, tunnel_splitting, Eigensystem, Spectrum,
    SpinModel,
};

pub type Complex64 = nalgebra::Complex<f64>;
pub type CMatrix = nalgebra::DMatrix<Complex64>;

/// Cartesian axis in whichever frame the caller is working in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn index(self) -> usize {
        match self {
            Axis::X => 0,
            Axis::Y => 1,
            Axis::Z => 2,
        }
    }
}

/// Anisotropy parameters of one molecule.
///
/// `d` and `e` are in kelvin. The easy axis is z, the medium axis y and the
/// hard axis x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpinSystem {
    /// Spin quantum number S (integer or half-integer).
    pub spin: f64,
    /// Uniaxial anisotropy D, kelvin.
    pub d_k: f64,
    /// Rhombic anisotropy E, kelvin.
    pub e_k: f64,
    pub g: f64,
    #[serde(default)]
    pub label: String,
}

impl SpinSystem {
    pub fn new(spin: f64, d_k: f64, e_k: f64, g: f64, label: impl Into<String>) -> Result<Self> {
        let sys = SpinSystem {
            spin,
            d_k,
            e_k,
            g,
            label: label.into(),
        };
        sys.validate()?;
        Ok(sys)
    }

    /// S = 10, D = 0.294 K, E = 0.04 K, g = 2.
    pub fn fe8() -> Self {
        SpinSystem {
            spin: 10.0,
            d_k: 0.294,
            e_k: 0.04,
            g: 2.0,
            label: "Fe8".to_string(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let two_s = 2.0 * self.spin;
        if !two_s.is_finite() || two_s < 1.0 || (two_s - two_s.round()).abs() > 1e-12 {
            return Err(Error::invalid(format!(
                "spin must be a positive half-integer, got {}",
                self.spin
            )));
        }
        if !(self.d_k > 0.0 && self.d_k.is_finite()) {
            return Err(Error::invalid(format!("D must be > 0, got {}", self.d_k)));
        }
        if !(self.e_k >= 0.0 && self.e_k < self.d_k / 3.0) {
            return Err(Error::invalid(format!(
                "E must satisfy 0 <= E < D/3, got E = {} with D = {}",
                self.e_k, self.d_k
            )));
        }
        if !(self.g > 0.0 && self.g.is_finite()) {
            return Err(Error::invalid(format!("g must be > 0, got {}", self.g)));
        }
        Ok(())
    }

    pub fn two_s(&self) -> usize {
        (2.0 * self.spin).round() as usize
    }

    /// Hilbert-space dimension 2S + 1.
    pub fn dim(&self) -> usize {
        self.two_s() + 1
    }

    /// Saturation moment g S in mu_B.
    pub fn saturation_moment(&self) -> f64 {
        self.g * self.spin
    }
}

/// Magnetic field in tesla, components in the molecular (hard, medium, easy) frame.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct FieldVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl FieldVector {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        FieldVector { x, y, z }
    }

    pub const fn zero() -> Self {
        FieldVector::new(0.0, 0.0, 0.0)
    }

    pub fn along(axis: Axis, value: f64) -> Self {
        FieldVector::zero().with_component(axis, value)
    }

    pub fn component(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }

    pub fn with_component(mut self, axis: Axis, value: f64) -> Self {
        match axis {
            Axis::X => self.x = value,
            Axis::Y => self.y = value,
            Axis::Z => self.z = value,
        }
        self
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    /// The field with its easy-axis component removed.
    pub fn transverse(&self) -> Self {
        FieldVector::new(self.x, self.y, 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn lerp(&self, other: &FieldVector, f: f64) -> FieldVector {
        *self + (*other - *self) * f
    }
}

impl Add for FieldVector {
    type Output = FieldVector;
    fn add(self, rhs: FieldVector) -> FieldVector {
        FieldVector::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for FieldVector {
    type Output = FieldVector;
    fn sub(self, rhs: FieldVector) -> FieldVector {
        FieldVector::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for FieldVector {
    type Output = FieldVector;
    fn mul(self, s: f64) -> FieldVector {
        FieldVector::new(self.x * s, self.y * s, self.z * s)
    }
}

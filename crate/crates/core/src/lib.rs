//! Giant-spin model of a molecular nanomagnet bit.
//!
//! Holds the spin system, its Hamiltonian and spectrum, the physical
//! constants and the shared error type used by the sibling crates.
//!
//! Energies are carried in kelvin (E/k_B) and fields in tesla throughout;
//! conversion to CGS (erg, gauss, emu) happens only where a quantity is
//! reported.

pub mod constants;
pub mod error;
pub mod model;

pub use constants::{PhysicalConstants, CONSTANTS};
pub use error::{Error, Result};
pub use model::{FieldVector, Spectrum, SpinModel, SpinSystem};

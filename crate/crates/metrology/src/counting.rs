use molbit_core::constants::CONSTANTS;
use molbit_core::error::{Error, Result};

use super::Measurement;

/// N = m / P_m * N_A for a crystal of mass `mass_g` and molar mass `molar_mass_g`.
pub fn molecule_count_mass(mass_g: f64, molar_mass_g: f64) -> Result<f64> {
    if !(mass_g > 0.0 && molar_mass_g > 0.0) {
        return Err(Error::invalid("mass and molar mass must be > 0"));
    }
    Ok(mass_g / molar_mass_g * CONSTANTS.n_a)
}

/// N = M_s / (g S mu_B) from the saturation moment in emu.
pub fn molecule_count_saturation(
    m_s_emu: f64,
    sigma_m_s_emu: f64,
    moment_per_molecule_mu_b: f64,
) -> Result<Measurement> {
    if !(m_s_emu > 0.0 && moment_per_molecule_mu_b > 0.0) {
        return Err(Error::invalid("saturation moment must be > 0"));
    }
    let per = moment_per_molecule_mu_b * CONSTANTS.mu_b;
    Measurement::new(m_s_emu / per, sigma_m_s_emu / per, 1)
}

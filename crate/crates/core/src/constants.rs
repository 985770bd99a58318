//! CGS physical constants.

/// Fixed constant set in CGS units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalConstants {
    /// Boltzmann constant, erg/K.
    pub k_b: f64,
    /// Bohr magneton, erg/G (equivalently emu).
    pub mu_b: f64,
    /// Reduced Planck constant, erg s.
    pub hbar: f64,
    /// Avogadro constant, 1/mol.
    pub n_a: f64,
    /// Gauss per tesla.
    pub tesla_to_gauss: f64,
}

pub const CONSTANTS: PhysicalConstants = PhysicalConstants {
    k_b: 1.380649e-16,
    mu_b: 9.274e-21,
    hbar: 1.0546e-27,
    n_a: 6.02214e23,
    tesla_to_gauss: 1.0e4,
};

impl PhysicalConstants {
    /// mu_B / k_B in kelvin per tesla.
    pub fn mu_b_kelvin_per_tesla(&self) -> f64 {
        self.mu_b * self.tesla_to_gauss / self.k_b
    }

    /// Zeeman energy scale g mu_B / k_B in kelvin per tesla.
    pub fn zeeman_kelvin_per_tesla(&self, g: f64) -> f64 {
        g * self.mu_b_kelvin_per_tesla()
    }

    /// Converts an energy in kelvin to erg.
    pub fn kelvin_to_erg(&self, e: f64) -> f64 {
        e * self.k_b
    }

    /// Work of a magnetic moment (mu_B) swept through a field change (T), in erg.
    pub fn moment_field_to_erg(&self, moment_mu_b: f64, field_t: f64) -> f64 {
        moment_mu_b * self.mu_b * field_t * self.tesla_to_gauss
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_positive() {
        let c = CONSTANTS;
        for v in [c.k_b, c.mu_b, c.hbar, c.n_a, c.tesla_to_gauss] {
            assert!(v > 0.0);
        }
    }

    #[test]
    fn zeeman_factor_for_g2() {
        let z = CONSTANTS.zeeman_kelvin_per_tesla(2.0);
        assert!((z - 1.3434).abs() < 1e-4, "{z}");
    }
}

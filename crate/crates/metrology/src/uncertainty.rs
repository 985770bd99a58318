use serde::Serialize;

use molbit_core::constants::CONSTANTS;
use molbit_core::error::{Error, Result};

/// Mean with the standard deviation of the mean (sample SD / sqrt(n)).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measurement {
    pub mean: f64,
    pub sigma: f64,
    pub n: usize,
}

impl Measurement {
    pub fn new(mean: f64, sigma: f64, n: usize) -> Result<Self> {
        if !(sigma >= 0.0) {
            return Err(Error::invalid(format!("sigma must be >= 0, got {sigma}")));
        }
        if n < 1 {
            return Err(Error::invalid("a measurement needs at least one sample"));
        }
        Ok(Measurement { mean, sigma, n })
    }
}

/// Averages repeated sweeps; sigma is the standard deviation of the mean.
pub fn average_sweeps(samples: &[f64]) -> Result<Measurement> {
    let n = samples.len();
    if n < 2 {
        return Err(Error::invalid(format!("need at least 2 samples, got {n}")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.total_cmp(b));
    let nf = n as f64;
    let mean = sorted.iter().sum::<f64>() / nf;
    let var = sorted.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (nf - 1.0);
    Measurement::new(mean, (var / nf).sqrt(), n)
}

/// sigma_M = sqrt((dM/dchi sigma_chi)^2 + (dM/dN sigma_N)^2).
pub fn propagate_sigma_m(dm_dchi: f64, sigma_chi: f64, dm_dn: f64, sigma_n: f64) -> Result<f64> {
    if !(sigma_chi >= 0.0 && sigma_n >= 0.0) {
        return Err(Error::invalid("uncertainties must be >= 0"));
    }
    Ok((dm_dchi * sigma_chi).hypot(dm_dn * sigma_n))
}

/// Root-sum-square of independent uncertainties.
pub fn combine_in_quadrature(sigmas: &[f64]) -> f64 {
    sigmas.iter().map(|s| s * s).sum::<f64>().sqrt()
}

/// Loop work with its band, erg per molecule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkBounds {
    pub w: f64,
    pub w_plus: f64,
    pub w_minus: f64,
    pub sigma: f64,
}

/// Integrates M dH along a sampled path together with the M +- sigma_M band.
///
/// M and sigma_M are in mu_B per molecule, H in tesla. The band is taken
/// with |dH|: integrating a signed sigma_M around a closed loop would cancel
/// and report no uncertainty at all.
pub fn work_confidence_bounds(
    m_path: &[f64],
    sigma_m_path: &[f64],
    h_path: &[f64],
) -> Result<WorkBounds> {
    let n = h_path.len();
    if m_path.len() != n || sigma_m_path.len() != n {
        return Err(Error::invalid(format!(
            "grids differ: {} M, {} sigma, {} H samples",
            m_path.len(),
            sigma_m_path.len(),
            n
        )));
    }
    if sigma_m_path.iter().any(|s| !(*s >= 0.0)) {
        return Err(Error::invalid("sigma_M must be >= 0"));
    }
    let mut w = 0.0;
    let mut band = 0.0;
    for k in 1..n {
        let dh = h_path[k] - h_path[k - 1];
        w += 0.5 * (m_path[k] + m_path[k - 1]) * dh;
        band += 0.5 * (sigma_m_path[k] + sigma_m_path[k - 1]) * dh.abs();
    }
    let erg = |x: f64| CONSTANTS.moment_field_to_erg(x, 1.0);
    let (w, band) = (erg(w), erg(band));
    Ok(WorkBounds {
        w,
        w_plus: w + band,
        w_minus: w - band,
        sigma: band,
    })
}

use rayon::prelude::*;
use serde::Serialize;

use molbit_core::error::{Error, Result};
use molbit_core::model::{FieldVector, SpinModel, SpinSystem};

/// Ground splitting against a field along the molecular hard axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InterferencePattern {
    /// (H_x tesla, Delta_0 kelvin)
    pub points: Vec<(f64, f64)>,
    /// H_x of strict three-point minima.
    pub minima: Vec<f64>,
}

impl InterferencePattern {
    /// Spacings between consecutive minima.
    pub fn spacings(&self) -> Vec<f64> {
        self.minima.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

pub fn interference_pattern(
    sys: &SpinSystem,
    hx_max: f64,
    step: f64,
) -> Result<InterferencePattern> {
    if !(step > 0.0) || !(hx_max >= 0.0) {
        return Err(Error::invalid("need step > 0 and H_x max >= 0"));
    }
    let model = SpinModel::new(sys.clone())?;
    let n = (hx_max / step + 1e-9).floor() as usize;
    let points = (0..=n)
        .into_par_iter()
        .map(|k| {
            let hx = k as f64 * step;
            let w = model.eigenvalues(&FieldVector::new(hx, 0.0, 0.0))?;
            Ok((hx, w[1] - w[0]))
        })
        .collect::<Result<Vec<_>>>()?;
    let minima = points
        .windows(3)
        .filter(|w| w[1].1 < w[0].1 && w[1].1 < w[2].1)
        .map(|w| w[1].0)
        .collect();
    Ok(InterferencePattern { points, minima })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn origin_matches_zero_field_splitting() {
        let p = interference_pattern(&SpinSystem::fe8(), 0.01, 0.005).unwrap();
        let spec = molbit_core::model::Spectrum::compute(&SpinSystem::fe8(), &FieldVector::zero())
            .unwrap();
        assert_eq!(p.points[0].1, spec.tunnel_splitting(0).unwrap());
    }
}

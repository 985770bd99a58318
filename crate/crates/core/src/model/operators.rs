use super::{CMatrix, Complex64};
use crate::error::{Error, Result};

/// Spin matrices in the |S, m> basis ordered m = S, S-1, ..., -S.
#[derive(Debug, Clone)]
pub struct SpinOperators {
    pub sx: CMatrix,
    pub sy: CMatrix,
    pub sz: CMatrix,
}

impl SpinOperators {
    pub fn spin(&self) -> f64 {
        (self.sz.nrows() as f64 - 1.0) / 2.0
    }

    /// Magnetic quantum numbers along the diagonal of Sz.
    pub fn m_values(&self) -> Vec<f64> {
        m_values(self.spin())
    }
}

pub(crate) fn m_values(spin: f64) -> Vec<f64> {
    let dim = (2.0 * spin).round() as usize + 1;
    (0..dim).map(|i| spin - i as f64).collect()
}

/// Builds (Sx, Sy, Sz) for spin `spin` from the ladder operators.
pub fn spin_operators(spin: f64) -> Result<SpinOperators> {
    let two_s = 2.0 * spin;
    if !two_s.is_finite() || two_s < 1.0 || (two_s - two_s.round()).abs() > 1e-12 {
        return Err(Error::invalid(format!(
            "spin must be a positive half-integer, got {spin}"
        )));
    }
    let m = m_values(spin);
    let dim = m.len();
    let s2 = spin * (spin + 1.0);

    // <m+1| S+ |m> lives at (i-1, i).
    let mut raise = CMatrix::zeros(dim, dim);
    for i in 1..dim {
        let mi = m[i];
        raise[(i - 1, i)] = Complex64::new((s2 - mi * (mi + 1.0)).sqrt(), 0.0);
    }
    let lower = raise.adjoint();

    let sx = (&raise + &lower) * Complex64::new(0.5, 0.0);
    let sy = (&raise - &lower) * Complex64::new(0.0, -0.5);
    let sz = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        dim,
        m.iter().map(|&v| Complex64::new(v, 0.0)),
    ));
    Ok(SpinOperators { sx, sy, sz })
}

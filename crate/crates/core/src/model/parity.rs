use nalgebra::DMatrix;

use super::operators::m_values;
use super::{FieldVector, SpinSystem};
use crate::constants::CONSTANTS;
use crate::error::{Error, Result};

/// The two decoupled blocks of H for a purely longitudinal field.
///
/// With B along z the rhombic term only couples m to m +/- 2, so the basis
/// splits by the parity of S - m. Both blocks are real symmetric.
#[derive(Debug, Clone)]
pub struct ParityBlocks {
    /// m values of the block with S - m even.
    pub even_m: Vec<f64>,
    /// m values of the block with S - m odd.
    pub odd_m: Vec<f64>,
    pub even: DMatrix<f64>,
    pub odd: DMatrix<f64>,
}

fn sorted_eigenvalues(h: &DMatrix<f64>) -> Vec<f64> {
    if h.nrows() == 0 {
        return Vec::new();
    }
    let mut vals: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|a, b| a.total_cmp(b));
    vals
}

impl ParityBlocks {
    pub fn even_eigenvalues(&self) -> Vec<f64> {
        sorted_eigenvalues(&self.even)
    }

    pub fn odd_eigenvalues(&self) -> Vec<f64> {
        sorted_eigenvalues(&self.odd)
    }

    /// All eigenvalues, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut all = self.even_eigenvalues();
        all.extend(self.odd_eigenvalues());
        all.sort_by(|a, b| a.total_cmp(b));
        all
    }

    /// Splitting of level pair n from the block spectra.
    pub fn tunnel_splitting(&self, pair_index: usize) -> Result<f64> {
        super::spectrum::splitting_of(&self.eigenvalues(), pair_index)
    }
}

/// Splits H(B) into its two parity blocks; B must be longitudinal.
pub fn parity_blocks(sys: &SpinSystem, field: &FieldVector) -> Result<ParityBlocks> {
    sys.validate()?;
    if !field.is_finite() {
        return Err(Error::invalid(format!("non-finite field {field:?}")));
    }
    if field.x != 0.0 || field.y != 0.0 {
        return Err(Error::invalid(
            "parity blocks need a purely longitudinal field (Bx = By = 0)",
        ));
    }
    let bz = field.z;
    let m = m_values(sys.spin);
    let z = CONSTANTS.zeeman_kelvin_per_tesla(sys.g);
    let s2 = sys.spin * (sys.spin + 1.0);
    // <m+2| E (S+^2 + S-^2)/2 |m>
    let couple = |mi: f64| {
        let a = (s2 - mi * (mi + 1.0)).sqrt();
        let b = (s2 - (mi + 1.0) * (mi + 2.0)).sqrt();
        0.5 * sys.e_k * a * b
    };
    let block = |parity: usize| -> (Vec<f64>, DMatrix<f64>) {
        let ms: Vec<f64> = (parity..m.len()).step_by(2).map(|i| m[i]).collect();
        let n = ms.len();
        let mut h = DMatrix::<f64>::zeros(n, n);
        for (k, &mk) in ms.iter().enumerate() {
            h[(k, k)] = -sys.d_k * mk * mk - z * mk * bz;
            if k + 1 < n {
                let c = couple(mk - 2.0);
                h[(k, k + 1)] = c;
                h[(k + 1, k)] = c;
            }
        }
        (ms, h)
    };
    let (even_m, even) = block(0);
    let (odd_m, odd) = block(1);
    Ok(ParityBlocks {
        even_m,
        odd_m,
        even,
        odd,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FieldVector, SpinModel};

    #[test]
    fn block_sizes_for_s10() {
        let pb = parity_blocks(&SpinSystem::fe8(), &FieldVector::zero()).unwrap();
        assert_eq!(pb.even.nrows(), 11);
        assert_eq!(pb.odd.nrows(), 10);
        assert_eq!(pb.even_m[0], 10.0);
        assert_eq!(pb.odd_m[0], 9.0);
    }

    #[test]
    fn union_matches_full_diagonalization() {
        let model = SpinModel::new(SpinSystem::fe8()).unwrap();
        for bz in [0.0, 0.21, -0.6] {
            let full = model.eigenvalues(&FieldVector::new(0.0, 0.0, bz)).unwrap();
            let pb = parity_blocks(model.system(), &FieldVector::new(0.0, 0.0, bz))
                .unwrap()
                .eigenvalues();
            for (a, b) in full.iter().zip(&pb) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn half_integer_spin() {
        let sys = SpinSystem::new(1.5, 1.0, 0.1, 2.0, "").unwrap();
        let pb = parity_blocks(&sys, &FieldVector::zero()).unwrap();
        assert_eq!(pb.even.nrows(), 2);
        assert_eq!(pb.odd.nrows(), 2);
        // Kramers: each level appears once in each block
        for (a, b) in pb.even_eigenvalues().iter().zip(&pb.odd_eigenvalues()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn e_zero_blocks_are_diagonal() {
        let sys = SpinSystem::new(10.0, 0.294, 0.0, 2.0, "").unwrap();
        let pb = parity_blocks(&sys, &FieldVector::zero()).unwrap();
        for h in [&pb.even, &pb.odd] {
            for i in 0..h.nrows() {
                for j in 0..h.ncols() {
                    if i != j {
                        assert_eq!(h[(i, j)], 0.0);
                    }
                }
            }
        }
        for n in 0..10 {
            assert_eq!(pb.tunnel_splitting(n).unwrap(), 0.0);
        }
    }

    #[test]
    fn rejects_transverse_field() {
        let r = parity_blocks(&SpinSystem::fe8(), &FieldVector::new(0.0, 0.1, 0.0));
        assert!(matches!(r, Err(Error::InvalidArgument(_))));
    }
}

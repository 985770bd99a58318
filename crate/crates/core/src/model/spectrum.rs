use nalgebra::linalg::SymmetricEigen;

use super::operators::m_values;
use super::{spin_operators, CMatrix, Complex64, FieldVector, SpinOperators, SpinSystem};
use crate::constants::CONSTANTS;
use crate::error::{Error, Result};

/// Largest accepted eigen-reconstruction residual, kelvin.
const RESIDUAL_LIMIT: f64 = 1e-9;

/// Eigenvalues (ascending) and unit eigenvectors (columns) of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct Eigensystem {
    pub values: Vec<f64>,
    pub vectors: CMatrix,
}

/// Cached spin operators and field-independent anisotropy for one [`SpinSystem`].
///
/// Building the model once and reusing it for sweeps avoids rebuilding the
/// ladder matrices for every field point.
#[derive(Debug, Clone)]
pub struct SpinModel {
    system: SpinSystem,
    ops: SpinOperators,
    anisotropy: CMatrix,
    zeeman: f64,
    m: Vec<f64>,
}

impl SpinModel {
    pub fn new(system: SpinSystem) -> Result<Self> {
        system.validate()?;
        let ops = spin_operators(system.spin)?;
        let sz2 = &ops.sz * &ops.sz;
        let sx2 = &ops.sx * &ops.sx;
        let sy2 = &ops.sy * &ops.sy;
        let anisotropy =
            sz2 * Complex64::new(-system.d_k, 0.0) + (sx2 - sy2) * Complex64::new(system.e_k, 0.0);
        let zeeman = CONSTANTS.zeeman_kelvin_per_tesla(system.g);
        let m = m_values(system.spin);
        Ok(SpinModel {
            system,
            ops,
            anisotropy,
            zeeman,
            m,
        })
    }

    pub fn system(&self) -> &SpinSystem {
        &self.system
    }

    pub fn operators(&self) -> &SpinOperators {
        &self.ops
    }

    /// g mu_B / k_B, kelvin per tesla.
    pub fn zeeman_factor(&self) -> f64 {
        self.zeeman
    }

    pub fn dim(&self) -> usize {
        self.m.len()
    }

    /// H = -D Sz^2 + E (Sx^2 - Sy^2) - g mu_B S.B, in kelvin.
    pub fn hamiltonian(&self, field: &FieldVector) -> CMatrix {
        let mut h = self.anisotropy.clone();
        let z = self.zeeman;
        for (op, b) in [
            (&self.ops.sx, field.x),
            (&self.ops.sy, field.y),
            (&self.ops.sz, field.z),
        ] {
            if b != 0.0 {
                h -= op * Complex64::new(z * b, 0.0);
            }
        }
        h
    }

    pub fn spectrum(&self, field: &FieldVector) -> Result<Spectrum> {
        check_field(field)?;
        let eig = diagonalize_with_m(&self.hamiltonian(field), &self.m)?;
        Ok(Spectrum {
            eigenvalues: eig.values,
            eigenvectors: eig.vectors,
            field: *field,
            system: self.system.clone(),
        })
    }

    /// Sorted eigenvalues only; cheaper than [`SpinModel::spectrum`].
    pub fn eigenvalues(&self, field: &FieldVector) -> Result<Vec<f64>> {
        check_field(field)?;
        let h = self.hamiltonian(field);
        let mut vals: Vec<f64> = h.symmetric_eigenvalues().iter().copied().collect();
        if vals.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure {
                what: "eigenvalues not finite".into(),
                residual: f64::NAN,
            });
        }
        vals.sort_by(|a, b| a.total_cmp(b));
        Ok(vals)
    }
}

fn check_field(field: &FieldVector) -> Result<()> {
    if field.is_finite() {
        Ok(())
    } else {
        Err(Error::invalid(format!("non-finite field {field:?}")))
    }
}

/// Builds the giant-spin Hamiltonian (kelvin) for `sys` in `field` (tesla).
pub fn build_hamiltonian(sys: &SpinSystem, field: &FieldVector) -> Result<CMatrix> {
    check_field(field)?;
    Ok(SpinModel::new(sys.clone())?.hamiltonian(field))
}

/// Full eigendecomposition of a Hermitian spin Hamiltonian.
///
/// The matrix dimension fixes the spin (dim = 2S + 1) and therefore the Sz
/// used to order degenerate levels: within a degenerate group the basis is
/// rotated to diagonalize Sz and sorted by descending <Sz>.
pub fn diagonalize(h: &CMatrix) -> Result<Eigensystem> {
    if h.nrows() != h.ncols() || h.nrows() == 0 {
        return Err(Error::invalid(format!(
            "matrix must be square and non-empty, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    let scale = h.iter().map(|c| c.norm()).fold(1.0, f64::max);
    let asym = (h - h.adjoint())
        .iter()
        .map(|c| c.norm())
        .fold(0.0, f64::max);
    if asym > 1e-10 * scale {
        return Err(Error::invalid(format!(
            "matrix is not Hermitian (max |H - H^+| = {asym:e})"
        )));
    }
    let spin = (h.nrows() as f64 - 1.0) / 2.0;
    diagonalize_with_m(h, &m_values(spin))
}

fn diagonalize_with_m(h: &CMatrix, m: &[f64]) -> Result<Eigensystem> {
    let n = h.nrows();
    let eig = SymmetricEigen::try_new(h.clone(), f64::EPSILON, 10_000).ok_or_else(|| {
        Error::NumericalFailure {
            what: "Hermitian eigensolver did not converge".into(),
            residual: f64::NAN,
        }
    })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }

    let scale = values.iter().map(|v| v.abs()).fold(1.0, f64::max);
    let tol = 64.0 * f64::EPSILON * scale;
    let mut start = 0;
    while start < n {
        let mut end = start + 1;
        while end < n && values[end] - values[end - 1] <= tol {
            end += 1;
        }
        if end - start > 1 {
            order_degenerate_block(&mut vectors, start, end, m);
        }
        start = end;
    }

    for j in 0..n {
        fix_phase(&mut vectors, j);
    }

    let residual = (0..n)
        .map(|j| {
            let v = vectors.column(j);
            (h * v - v * Complex64::new(values[j], 0.0)).norm()
        })
        .fold(0.0, f64::max);
    if !(residual <= RESIDUAL_LIMIT) {
        return Err(Error::NumericalFailure {
            what: "eigen-reconstruction residual above limit".into(),
            residual,
        });
    }
    Ok(Eigensystem { values, vectors })
}

/// Rotates columns start..end so that Sz is diagonal inside the block,
/// largest <Sz> first.
fn order_degenerate_block(vectors: &mut CMatrix, start: usize, end: usize, m: &[f64]) {
    let k = end - start;
    let block = vectors.columns(start, k).into_owned();
    let mut sz_block = CMatrix::zeros(k, k);
    for a in 0..k {
        for b in 0..k {
            let mut acc = Complex64::new(0.0, 0.0);
            for (i, &mi) in m.iter().enumerate() {
                acc += block[(i, a)].conj() * block[(i, b)] * mi;
            }
            sz_block[(a, b)] = acc;
        }
    }
    let sub = SymmetricEigen::new(sz_block);
    let mut idx: Vec<usize> = (0..k).collect();
    idx.sort_by(|&a, &b| sub.eigenvalues[b].total_cmp(&sub.eigenvalues[a]));
    let rotated = &block * &sub.eigenvectors;
    for (dst, &src) in idx.iter().enumerate() {
        vectors.set_column(start + dst, &rotated.column(src));
    }
}

/// Makes the dominant component of column j real and positive.
fn fix_phase(vectors: &mut CMatrix, j: usize) {
    let col = vectors.column(j);
    let max = col.iter().map(|c| c.norm()).fold(0.0, f64::max);
    if max == 0.0 {
        return;
    }
    let pivot = col
        .iter()
        .position(|c| c.norm() >= max * (1.0 - 1e-8))
        .unwrap_or(0);
    let p = col[pivot];
    let phase = p.conj() / p.norm();
    let mut colm = vectors.column_mut(j);
    colm *= phase;
}

/// Eigen-decomposition of the giant-spin Hamiltonian at one field.
#[derive(Debug, Clone)]
pub struct Spectrum {
    eigenvalues: Vec<f64>,
    eigenvectors: CMatrix,
    field: FieldVector,
    system: SpinSystem,
}

impl Spectrum {
    /// Convenience constructor building and diagonalizing H in one go.
    pub fn compute(sys: &SpinSystem, field: &FieldVector) -> Result<Self> {
        SpinModel::new(sys.clone())?.spectrum(field)
    }

    /// Ascending eigenvalues, kelvin.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Column i is the eigenvector of eigenvalue i.
    pub fn eigenvectors(&self) -> &CMatrix {
        &self.eigenvectors
    }

    pub fn field(&self) -> &FieldVector {
        &self.field
    }

    pub fn system(&self) -> &SpinSystem {
        &self.system
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// The operator expressed in the eigenbasis, V^+ O V.
    pub fn in_eigenbasis(&self, op: &CMatrix) -> CMatrix {
        self.eigenvectors.adjoint() * sparse_product(op, &self.eigenvectors)
    }

    /// <i|O|i> for every eigenstate.
    pub fn expectations(&self, op: &CMatrix) -> Vec<f64> {
        let ov = op * &self.eigenvectors;
        (0..self.dim())
            .map(|i| self.eigenvectors.column(i).dotc(&ov.column(i)).re)
            .collect()
    }

    pub fn tunnel_splitting(&self, pair_index: usize) -> Result<f64> {
        tunnel_splitting(self, pair_index)
    }
}

/// Gap between the members of level pair n: E[2n+1] - E[2n].
/// op * v, skipping the zero entries of `op` (spin operators are banded).
fn sparse_product(op: &CMatrix, v: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(op.nrows(), v.ncols());
    for c in 0..op.ncols() {
        for r in 0..op.nrows() {
            let a = op[(r, c)];
            if a.re == 0.0 && a.im == 0.0 {
                continue;
            }
            for k in 0..v.ncols() {
                out[(r, k)] += a * v[(c, k)];
            }
        }
    }
    out
}

pub fn tunnel_splitting(spec: &Spectrum, pair_index: usize) -> Result<f64> {
    splitting_of(spec.eigenvalues(), pair_index)
}

pub(crate) fn splitting_of(values: &[f64], pair_index: usize) -> Result<f64> {
    let upper = 2 * pair_index + 1;
    if upper >= values.len() {
        return Err(Error::invalid(format!(
            "pair index {pair_index} out of range for {} levels",
            values.len()
        )));
    }
    Ok(values[upper] - values[upper - 1])
}

/// Longitudinal field of the n-th level-crossing resonance, B_n = n D / (g mu_B), tesla.
pub fn resonance_fields(sys: &SpinSystem, n: u32) -> f64 {
    n as f64 * sys.d_k / CONSTANTS.zeeman_kelvin_per_tesla(sys.g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Axis;

    fn max_abs(m: &CMatrix) -> f64 {
        m.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    fn fe8_no_e() -> SpinSystem {
        SpinSystem::new(10.0, 0.294, 0.0, 2.0, "").unwrap()
    }

    #[test]
    fn zero_field_diagonal() {
        let h = build_hamiltonian(&fe8_no_e(), &FieldVector::zero()).unwrap();
        let off: f64 = (0..21)
            .flat_map(|i| (0..21).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| h[(i, j)].norm())
            .fold(0.0, f64::max);
        assert_eq!(off, 0.0);
        let min = (0..21).map(|i| h[(i, i)].re).fold(f64::INFINITY, f64::min);
        assert!((min + 29.4).abs() < 1e-12);
        assert!((h[(0, 0)].re + 29.4).abs() < 1e-12);
        assert!((h[(20, 20)].re + 29.4).abs() < 1e-12);
    }

    #[test]
    fn longitudinal_field_entry() {
        let h = build_hamiltonian(&fe8_no_e(), &FieldVector::new(0.0, 0.0, 0.21)).unwrap();
        let z = CONSTANTS.zeeman_kelvin_per_tesla(2.0);
        let expected = -29.4 - z * 10.0 * 0.21;
        assert!((h[(0, 0)].re - expected).abs() < 1e-12);
        assert!((h[(0, 0)].re + 32.22).abs() < 5e-3);
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let sys = SpinSystem::fe8();
        for b in [
            FieldVector::new(0.3, -1.2, 0.21),
            FieldVector::new(-2.0, 0.5, -0.7),
            FieldVector::zero(),
        ] {
            let h = build_hamiltonian(&sys, &b).unwrap();
            assert!(max_abs(&(&h - h.adjoint())) < 1e-12);
        }
    }

    #[test]
    fn spin_half_zeeman_levels() {
        let sys = SpinSystem::new(0.5, 1.0, 0.0, 2.0, "").unwrap();
        let model = SpinModel::new(sys).unwrap();
        let half = CONSTANTS.zeeman_kelvin_per_tesla(2.0) / 2.0;
        assert!((half - 0.67171).abs() < 1e-4);
        for bz in [0.01, 0.5, 3.0] {
            let spec = model.spectrum(&FieldVector::along(Axis::Z, bz)).unwrap();
            let shift = -0.25;
            assert!((spec.eigenvalues()[0] - (shift - half * bz)).abs() < 1e-12);
            assert!((spec.eigenvalues()[1] - (shift + half * bz)).abs() < 1e-12);
        }
    }

    #[test]
    fn spin_one_d_only() {
        let sys = SpinSystem::new(1.0, 0.7, 0.0, 2.0, "").unwrap();
        let spec = Spectrum::compute(&sys, &FieldVector::zero()).unwrap();
        let v = spec.eigenvalues();
        assert!((v[0] + 0.7).abs() < 1e-12);
        assert!((v[1] + 0.7).abs() < 1e-12);
        assert!(v[2].abs() < 1e-12);
        // ties: <Sz> descending, so m = +1 first
        let sz = spec.expectations(&SpinModel::new(sys).unwrap().operators().sz);
        assert!((sz[0] - 1.0).abs() < 1e-12 && (sz[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_ties_ordered_by_sz() {
        let model = SpinModel::new(fe8_no_e()).unwrap();
        let spec = model.spectrum(&FieldVector::zero()).unwrap();
        let sz = spec.expectations(&model.operators().sz);
        for n in 0..10 {
            let m = 10.0 - n as f64;
            assert!((sz[2 * n] - m).abs() < 1e-12);
            assert!((sz[2 * n + 1] + m).abs() < 1e-12);
            assert_eq!(spec.tunnel_splitting(n).unwrap(), 0.0);
        }
    }

    #[test]
    fn zeeman_linearity_without_e() {
        let model = SpinModel::new(fe8_no_e()).unwrap();
        let z = model.zeeman_factor();
        for bz in [0.05, 0.1, 0.37] {
            let spec = model.spectrum(&FieldVector::along(Axis::Z, bz)).unwrap();
            let mut expected: Vec<f64> = (-10..=10)
                .map(|m| -0.294 * (m * m) as f64 - z * m as f64 * bz)
                .collect();
            expected.sort_by(|a, b| a.total_cmp(b));
            for (a, b) in spec.eigenvalues().iter().zip(&expected) {
                assert!((a - b).abs() < 1e-10, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn trace_independent_of_bz_without_e() {
        let sys = fe8_no_e();
        let t0 = build_hamiltonian(&sys, &FieldVector::zero())
            .unwrap()
            .trace()
            .re;
        for bz in [0.1, -0.8, 2.5] {
            let t = build_hamiltonian(&sys, &FieldVector::along(Axis::Z, bz))
                .unwrap()
                .trace()
                .re;
            assert!((t - t0).abs() < 1e-10);
        }
    }

    #[test]
    fn eigenvectors_orthonormal_and_residual_small() {
        let model = SpinModel::new(SpinSystem::fe8()).unwrap();
        for b in [
            FieldVector::zero(),
            FieldVector::new(0.0, 2.0, 0.21),
            FieldVector::new(1.1, -0.4, 0.05),
        ] {
            let spec = model.spectrum(&b).unwrap();
            let v = spec.eigenvectors();
            let gram = v.adjoint() * v - CMatrix::identity(21, 21);
            assert!(max_abs(&gram) < 1e-10);
            let h = model.hamiltonian(&b);
            for j in 0..21 {
                let col = v.column(j);
                let r = (&h * col - col * Complex64::new(spec.eigenvalues()[j], 0.0)).norm();
                assert!(r < 1e-9);
            }
            assert!(spec.eigenvalues().windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn values_only_path_agrees() {
        let model = SpinModel::new(SpinSystem::fe8()).unwrap();
        let b = FieldVector::new(0.2, 1.3, 0.1);
        let a = model.spectrum(&b).unwrap();
        let v = model.eigenvalues(&b).unwrap();
        for (x, y) in a.eigenvalues().iter().zip(&v) {
            assert!((x - y).abs() < 1e-11);
        }
    }

    #[test]
    fn diagonalize_rejects_non_hermitian() {
        let mut h = CMatrix::zeros(3, 3);
        h[(0, 1)] = Complex64::new(1.0, 0.0);
        assert!(matches!(diagonalize(&h), Err(Error::InvalidArgument(_))));
        assert!(diagonalize(&CMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn splitting_index_range() {
        let spec = Spectrum::compute(&SpinSystem::fe8(), &FieldVector::zero()).unwrap();
        assert!(spec.tunnel_splitting(9).is_ok());
        assert!(matches!(
            spec.tunnel_splitting(10),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn spin_half_kramers() {
        let sys = SpinSystem::new(0.5, 1.0, 0.0, 2.0, "").unwrap();
        let spec = Spectrum::compute(&sys, &FieldVector::zero()).unwrap();
        assert_eq!(spec.tunnel_splitting(0).unwrap(), 0.0);
    }

    #[test]
    fn resonance_field_values() {
        let sys = SpinSystem::fe8();
        assert_eq!(resonance_fields(&sys, 0), 0.0);
        let b1 = resonance_fields(&sys, 1);
        let b2 = resonance_fields(&sys, 2);
        assert!((b1 - 0.219).abs() / 0.219 < 5e-3, "{b1}");
        assert!((b2 - 0.438).abs() / 0.438 < 5e-3, "{b2}");
        assert!((b2 - 0.44).abs() < 0.005);
    }
}

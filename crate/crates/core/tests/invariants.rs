use molbit_core::model::{
    build_hamiltonian, parity_blocks, spin_operators, CMatrix, FieldVector, SpinModel, SpinSystem,
};
use proptest::prelude::*;

fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

fn system() -> impl Strategy<Value = SpinSystem> {
    (1u32..=20, 0.01f64..1.0, 0.0f64..1.0, 1.5f64..2.5).prop_map(|(two_s, d, e_frac, g)| {
        SpinSystem::new(two_s as f64 / 2.0, d, e_frac * d / 3.0 * 0.999, g, "p").unwrap()
    })
}

fn field() -> impl Strategy<Value = FieldVector> {
    (-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0).prop_map(|(x, y, z)| FieldVector::new(x, y, z))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn casimir_holds(two_s in 1u32..=40) {
        let s = two_s as f64 / 2.0;
        let ops = spin_operators(s).unwrap();
        let s2 = &ops.sx * &ops.sx + &ops.sy * &ops.sy + &ops.sz * &ops.sz;
        let n = s2.nrows();
        let want = CMatrix::identity(n, n) * nalgebra::Complex::new(s * (s + 1.0), 0.0);
        prop_assert!(max_abs(&(s2 - want)) < 1e-10 * (s * (s + 1.0)).max(1.0));
    }

    #[test]
    fn hamiltonian_is_hermitian_with_known_trace(sys in system(), b in field()) {
        let h = build_hamiltonian(&sys, &b).unwrap();
        prop_assert!(max_abs(&(h.adjoint() - &h)) < 1e-12);
        let s = sys.spin;
        let want = -sys.d_k * s * (s + 1.0) * (2.0 * s + 1.0) / 3.0;
        prop_assert!((h.trace().re - want).abs() < 1e-9 * want.abs().max(1.0));
    }

    #[test]
    fn eigenvalues_sorted_and_sum_to_trace(sys in system(), b in field()) {
        let model = SpinModel::new(sys.clone()).unwrap();
        let w = model.eigenvalues(&b).unwrap();
        prop_assert_eq!(w.len(), sys.dim());
        prop_assert!(w.windows(2).all(|p| p[0] <= p[1]));
        let tr = model.hamiltonian(&b).trace().re;
        prop_assert!((w.iter().sum::<f64>() - tr).abs() < 1e-9 * tr.abs().max(1.0));
    }

    #[test]
    fn spectrum_is_even_in_the_field(sys in system(), b in field()) {
        let model = SpinModel::new(sys).unwrap();
        let a = model.eigenvalues(&b).unwrap();
        let c = model.eigenvalues(&(b * -1.0)).unwrap();
        for (x, y) in a.iter().zip(&c) {
            prop_assert!((x - y).abs() < 1e-9 * x.abs().max(1.0));
        }
    }

    #[test]
    fn eigenvectors_are_orthonormal(sys in system(), b in field()) {
        let spec = SpinModel::new(sys).unwrap().spectrum(&b).unwrap();
        let v = spec.eigenvectors();
        let n = v.nrows();
        prop_assert!(max_abs(&(v.adjoint() * v - CMatrix::identity(n, n))) < 1e-10);
    }

    #[test]
    fn parity_union_matches_full(sys in system(), bz in -3.0f64..3.0) {
        let b = FieldVector::new(0.0, 0.0, bz);
        let full = SpinModel::new(sys.clone()).unwrap().eigenvalues(&b).unwrap();
        let blocks = parity_blocks(&sys, &b).unwrap().eigenvalues();
        for (x, y) in full.iter().zip(&blocks) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }
}

use molbit_metrology::{
    average_sweeps, combine_in_quadrature, comparison_chart, default_devices, energy_time_cost,
    molecule_count_mass, molecule_count_saturation, propagate_sigma_m, quantum_limit,
    quantum_speed_limit_tau, work_confidence_bounds, DeviceEntry,
};
use molbit_statmech::landauer_bound;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

#[test]
fn crystal_molecule_counts() {
    let n = molecule_count_mass(0.411e-3, 2262.45).unwrap();
    assert!(rel(n, 1.0940e17) < 1e-3, "{n:e}");
    let s = molecule_count_saturation(2.029e-2, 0.006e-2, 20.0).unwrap();
    assert!(rel(s.mean, 1.0939e17) < 1e-3, "{:e}", s.mean);
    assert!(rel(s.sigma, 0.0032e17) < 0.02, "{:e}", s.sigma);
    assert!(rel(molecule_count_mass(2262.45, 2262.45).unwrap(), 6.02214e23) < 1e-5);
}

#[test]
fn work_uncertainty_composition() {
    let s = combine_in_quadrature(&[0.28107e-16, 0.17712e-16]);
    assert!(rel(s, 0.3322e-16) < 1e-3, "{s:e}");
    assert_eq!(propagate_sigma_m(1.0, 3.0, 1.0, 4.0).unwrap(), 5.0);
}

#[test]
fn sweep_average_of_three() {
    let m = average_sweeps(&[1.0, 2.0, 3.0]).unwrap();
    assert_eq!(m.mean, 2.0);
    assert!((m.sigma - 1.0 / 3f64.sqrt()).abs() < 1e-15);
}

#[test]
fn sweep_average_ignores_order() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut v: Vec<f64> = (0..15).map(|_| rng.random_range(-1e3..1e3)).collect();
    let a = average_sweeps(&v).unwrap();
    for _ in 0..20 {
        v.shuffle(&mut rng);
        assert_eq!(average_sweeps(&v).unwrap(), a);
    }
}

#[test]
fn constant_band_scales_with_path_length() {
    // out and back along H_z, then a second excursion
    let h: Vec<f64> = [0.0, 0.1, 0.2, 0.1, 0.0, -0.1, 0.0].to_vec();
    let m: Vec<f64> = h.iter().map(|x| 19.0 * x).collect();
    let s = 0.7;
    let b = work_confidence_bounds(&m, &vec![s; h.len()], &h).unwrap();
    let path: f64 = h.windows(2).map(|w| (w[1] - w[0]).abs()).sum();
    let direct = molbit_core::CONSTANTS.moment_field_to_erg(s * path, 1.0);
    assert!(rel(b.sigma, direct) < 1e-12);
    assert!(rel(b.w_plus - b.w, b.w - b.w_minus) < 1e-9);
}

#[test]
fn energy_time_figures() {
    assert!(rel(energy_time_cost(1.1828e-16, 1.96e-7).unwrap(), 2.318e-23) < 1e-2);
    assert!(rel(quantum_limit(), 1.656e-27) < 1e-2);
    let tau = quantum_speed_limit_tau(landauer_bound(1.0).unwrap()).unwrap();
    assert!(rel(tau, 1.73e-11) < 1e-2, "{tau:e}");
    assert!(rel(quantum_speed_limit_tau(quantum_limit()).unwrap(), 1.0) < 1e-15);
}

#[test]
fn bundled_chart_ranks_fe8_next_to_the_quantum_limit() {
    let rows = comparison_chart(&default_devices()).unwrap();
    assert_eq!(rows.len(), 5);
    assert!(rows.windows(2).all(|w| w[0].product <= w[1].product));
    assert_eq!(rows[0].name, "quantum limit");
    assert!(rel(rows[0].product, 1.65e-27) < 1e-2);
    assert_eq!(rows[1].name, "Fe8");
    assert!(rel(rows[1].product, 2.31e-23) < 1e-2);
    let ff = rows.iter().find(|r| r.name == "flip-flop").unwrap();
    assert!(rel(ff.product, 1e-9) < 1e-2);
}

#[test]
fn single_entry_chart() {
    let e = DeviceEntry {
        name: "x".into(),
        w_erg: 2.0,
        tau: 3.0,
        t_op_k: 4.0,
    };
    let rows = comparison_chart(std::slice::from_ref(&e)).unwrap();
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0].product, 6.0);
}

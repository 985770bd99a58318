use molbit_core::model::SpinSystem;
use molbit_kinetics::{FixedRelaxation, SpectralRelaxation};
use molbit_protocol::{run_protocol, work_integrals, FieldSchedule, WorkBreakdown};
use molbit_statmech::landauer_bound;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TAU0: f64 = 1.43e-8;
const THRESHOLD: f64 = 0.240156890077272256;

fn law() -> SpectralRelaxation {
    SpectralRelaxation::new(&SpinSystem::fe8(), TAU0, THRESHOLD).unwrap()
}

fn work(schedule: &FieldSchedule) -> (WorkBreakdown, f64) {
    let traj = run_protocol(&SpinSystem::fe8(), schedule, 0.0, &law(), 0.0).unwrap();
    (work_integrals(&traj).unwrap(), traj.last().m_z)
}

#[test]
fn doubling_substeps_barely_moves_the_work() {
    let base = FieldSchedule::fe8_default();
    let mut fine = base.clone();
    for s in &mut fine.segments {
        s.substeps *= 2;
    }
    let (a, _) = work(&base);
    let (b, _) = work(&fine);
    let rel = (a.w_total - b.w_total).abs() / b.w_total.abs();
    assert!(rel < 5e-3, "{} vs {} ({rel})", a.w_total, b.w_total);
}

#[test]
fn slower_erasure_approaches_the_landauer_bound() {
    let base = FieldSchedule::fe8_default();
    let kt = landauer_bound(base.temperature_k).unwrap();
    let ratios: Vec<f64> = [1e-6, 1e-5, 1e-4, 1e-3]
        .iter()
        .map(|&d| {
            let s = base.with_durations(&[d, d, 10.0, 10.0]).unwrap();
            work(&s).0.w_total / kt
        })
        .collect();
    assert!(ratios.windows(2).all(|w| w[1] < w[0]), "{ratios:?}");
    assert!((ratios[3] - 1.0).abs() < 0.1, "{ratios:?}");
}

#[test]
fn equilibrium_cycle_costs_nothing() {
    let s = FieldSchedule::fe8_default();
    let traj = run_protocol(&SpinSystem::fe8(), &s, 0.0, &FixedRelaxation(1e-12), 0.0).unwrap();
    let w = work_integrals(&traj).unwrap();
    assert!(w.w_total.abs() <= 1e-18, "{w:?}");
    for p in &traj.points {
        assert!((p.m_z - p.m_z_eq).abs() < 1e-6);
    }
}

#[test]
fn vanishing_durations_freeze_the_moment() {
    let s = FieldSchedule::fe8_default()
        .with_durations(&[1e-15; 4])
        .unwrap();
    let traj = run_protocol(&SpinSystem::fe8(), &s, 3.0, &law(), 0.0).unwrap();
    assert!(traj.points.iter().all(|p| (p.m_z - 3.0).abs() < 1e-6));
}

/// Random erasure schedules that end fully polarized never beat k_B T ln 2.
#[test]
fn second_law_over_random_schedules() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let sat = SpinSystem::fe8().saturation_moment();
    let mut accepted = 0;
    let mut drawn = 0;
    while accepted < 50 {
        drawn += 1;
        assert!(
            drawn <= 400,
            "only {accepted} polarizing schedules in {drawn} draws"
        );
        let t = rng.random_range(1.0..1.5);
        let hz = rng.random_range(0.8..1.5);
        let hy = rng.random_range(1.5..2.5);
        let d = [
            10f64.powf(rng.random_range(-7.0..1.0)),
            10f64.powf(rng.random_range(-7.0..1.0)),
            rng.random_range(10.0..1000.0),
            10f64.powf(rng.random_range(-7.0..-4.0)),
        ];
        let s = FieldSchedule::erasure_cycle(hy, hz, d, 256, t, 2.0 * std::f64::consts::PI * 333.0)
            .unwrap();
        let traj = run_protocol(&SpinSystem::fe8(), &s, 0.0, &law(), 0.0).unwrap();
        assert!(traj.points.iter().all(|p| p.m_z.abs() <= sat));
        if traj.last().m_z.abs() < 0.998 * sat {
            continue;
        }
        accepted += 1;
        let w = work_integrals(&traj).unwrap().w_total;
        let floor = landauer_bound(t).unwrap() * 0.98;
        assert!(
            w >= floor,
            "W = {w:e} < {floor:e} for T={t} hz={hz} hy={hy} d={d:?}"
        );
    }
}

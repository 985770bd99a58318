use rayon::prelude::*;
use serde::Serialize;

use molbit_core::model::{Axis, FieldVector, SpinModel};
use molbit_kinetics::{effective_barrier_from_tau, fit_arrhenius};
use molbit_metrology::{
    comparison_chart, default_devices, interference_pattern, quantum_limit_entry,
    recover_easy_axis, sweep_plane_chi, AlignmentResult, CrystalOrientation, EasyAxis, SweepPlane,
};
use molbit_protocol::{chi_features, run_protocol, work_integrals, WorkBreakdown};
use molbit_statmech::landauer_bound;

use crate::config::{grid, Mount, RunConfig};
use crate::output::{f64_col, int_col, num, str_col, OutputSet, Table};
use crate::CliError;

/// Energy levels on a field sweep along one molecular axis.
pub fn spectrum(cfg: &RunConfig, out: &mut OutputSet) -> Result<(), CliError> {
    let sp = &cfg.spectrum;
    let model = SpinModel::new(cfg.system.clone())?;
    let fields = grid(sp.start_t, sp.stop_t, sp.step_t);
    let levels = fields
        .par_iter()
        .map(|&b| model.eigenvalues(&FieldVector::along(sp.axis, b)))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(&[
        f64_col("field_T"),
        int_col("level_index"),
        f64_col("energy_K"),
    ]);
    for (b, w) in fields.iter().zip(&levels) {
        for (k, e) in w.iter().enumerate() {
            t.push(vec![num(*b), k.to_string(), num(*e)]);
        }
    }
    out.table("spectrum.csv", &t)
}

/// tau and U_eff against H_y, and Arrhenius tables at selected H_y.
pub fn relaxation(cfg: &RunConfig, out: &mut OutputSet) -> Result<(), CliError> {
    let law = cfg.kinetics.build(&cfg.system)?;
    let tau0 = cfg.kinetics.tau0_s;
    let temp = cfg.environment.temperature_k;
    let r = &cfg.relaxation;
    let hy_field = |hy: f64| FieldVector::new(0.0, hy, 0.0);

    let hys = grid(r.hy_start_t, r.hy_stop_t, r.hy_step_t);
    let taus = hys
        .par_iter()
        .map(|&hy| law.tau(&hy_field(hy), temp))
        .collect::<Result<Vec<_>, _>>()?;
    let mut t = Table::new(&[f64_col("hy_T"), f64_col("tau_s"), f64_col("u_eff_K")]);
    for (&hy, &tau) in hys.iter().zip(&taus) {
        let u = effective_barrier_from_tau(tau, temp, tau0)?;
        t.push(vec![num(hy), num(tau), num(u)]);
    }
    out.table("tau_vs_hy.csv", &t)?;

    let mut table = Table::new(&[
        f64_col("hy_T"),
        f64_col("T_K"),
        f64_col("inv_T_per_K"),
        f64_col("tau_s"),
        f64_col("ln_tau_s"),
    ]);
    let mut fits = Table::new(&[
        f64_col("hy_T"),
        f64_col("tau0_s"),
        f64_col("activation_K"),
        f64_col("r_squared"),
    ]);
    for &hy in &r.arrhenius_hy_t {
        let pts = r
            .arrhenius_temperatures_k
            .par_iter()
            .map(|&tk| Ok((tk, law.tau(&hy_field(hy), tk)?)))
            .collect::<Result<Vec<_>, CliError>>()?;
        for &(tk, tau) in &pts {
            table.push(vec![
                num(hy),
                num(tk),
                num(1.0 / tk),
                num(tau),
                num(tau.ln()),
            ]);
        }
        let fit = fit_arrhenius(&pts)?;
        fits.push(vec![
            num(hy),
            num(fit.params.tau0_s),
            num(fit.params.activation_k),
            num(fit.r_squared),
        ]);
    }
    out.table("arrhenius.csv", &table)?;
    out.table("arrhenius_fit.csv", &fits)
}

/// Work record written next to the protocol tables.
#[derive(Debug, Clone, Serialize)]
pub struct WorkSummary {
    pub temperature_k: f64,
    pub work_erg: WorkBreakdown,
    pub landauer_bound_erg: f64,
    pub landauer_ratio: f64,
    pub final_m_z: f64,
    pub chi_onset_t: f64,
    pub chi_peak_t: f64,
}

/// Runs the field cycle and writes the trajectory, both loops and the work.
pub fn protocol(cfg: &RunConfig, out: &mut OutputSet) -> Result<WorkSummary, CliError> {
    let law = cfg.kinetics.build(&cfg.system)?;
    let schedule = cfg.schedule.build(&cfg.environment)?;
    let traj = run_protocol(
        &cfg.system,
        &schedule,
        cfg.schedule.initial_m_z,
        law.as_ref(),
        cfg.kinetics.chi_s,
    )?;

    let mut t = Table::new(&[
        f64_col("t_s"),
        int_col("segment"),
        f64_col("H_x_T"),
        f64_col("H_y_T"),
        f64_col("H_z_T"),
        f64_col("M_x_muB"),
        f64_col("M_y_muB"),
        f64_col("M_z_muB"),
        f64_col("M_z_eq_muB"),
        f64_col("tau_s"),
        f64_col("chi_T_z"),
        f64_col("chi_prime_z"),
        f64_col("chi_double_prime_z"),
    ]);
    let mut mz = Table::new(&[int_col("segment"), f64_col("H_z_T"), f64_col("M_z_muB")]);
    let mut my = Table::new(&[int_col("segment"), f64_col("H_y_T"), f64_col("M_y_muB")]);
    for p in &traj.points {
        let f = p.field;
        t.push(vec![
            num(p.t_s),
            p.segment.to_string(),
            num(f.x),
            num(f.y),
            num(f.z),
            num(p.m_x),
            num(p.m_y),
            num(p.m_z),
            num(p.m_z_eq),
            num(p.tau_s),
            num(p.chi_t_z),
            num(p.chi_prime_z),
            num(p.chi_double_prime_z),
        ]);
        mz.push(vec![p.segment.to_string(), num(f.z), num(p.m_z)]);
        my.push(vec![p.segment.to_string(), num(f.y), num(p.m_y)]);
    }
    out.table("trajectory.csv", &t)?;
    out.table("mz_loop.csv", &mz)?;
    out.table("my_loop.csv", &my)?;

    let work = work_integrals(&traj)?;
    let bound = landauer_bound(traj.temperature_k)?;
    let features = chi_features(&traj)?;
    let summary = WorkSummary {
        temperature_k: traj.temperature_k,
        work_erg: work,
        landauer_bound_erg: bound,
        landauer_ratio: work.landauer_ratio(traj.temperature_k)?,
        final_m_z: traj.last().m_z,
        chi_onset_t: features.onset_field,
        chi_peak_t: features.peak_field,
    };
    out.json("work_summary.json", &summary)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct AlignmentReport {
    pub mount: Mount,
    pub orientation: CrystalOrientation,
    pub true_easy_axis: EasyAxis,
    pub recovered: AlignmentResult,
    /// Angle between the recovered and the true easy axis, degrees.
    pub error_deg: f64,
    pub interference_minima_t: Vec<f64>,
}

/// Simulated angular sweeps of a mounted crystal and the recovered easy axis.
pub fn align(cfg: &RunConfig, out: &mut OutputSet) -> Result<AlignmentReport, CliError> {
    let a = &cfg.align;
    let model = SpinModel::new(cfg.system.clone())?;
    let law = cfg.kinetics.build(&cfg.system)?;
    let o = a.mount.orientation()?;

    for plane in SweepPlane::ALL {
        let prof = sweep_plane_chi(
            &model,
            &o,
            plane,
            &a.sweep,
            a.profile_step_deg,
            law.as_ref(),
        )?;
        let mut t = Table::new(&[f64_col("angle_deg"), f64_col("chi_prime_z")]);
        for (ang, chi) in prof {
            t.push(vec![num(ang), num(chi)]);
        }
        out.table(&format!("sweep_{}.csv", plane.name().to_lowercase()), &t)?;
    }

    let recovered = recover_easy_axis(&model, &o, &a.sweep, a.step_deg, law.as_ref())?;
    let truth = o.axis_in_lab(Axis::Z);
    let pattern =
        interference_pattern(&cfg.system, a.interference_hx_max_t, a.interference_step_t)?;
    let mut t = Table::new(&[f64_col("hx_T"), f64_col("delta0_K")]);
    for &(hx, d) in &pattern.points {
        t.push(vec![num(hx), num(d)]);
    }
    out.table("interference.csv", &t)?;

    let mut crossings = Table::new(&[
        str_col("plane"),
        f64_col("angle_deg"),
        f64_col("contrast"),
        f64_col("dir_x"),
        f64_col("dir_y"),
        f64_col("dir_z"),
    ]);
    for c in &recovered.crossings {
        crossings.push(vec![
            c.plane.name().to_string(),
            num(c.angle_deg),
            num(c.contrast),
            num(c.direction[0]),
            num(c.direction[1]),
            num(c.direction[2]),
        ]);
    }
    out.table("crossings.csv", &crossings)?;

    let report = AlignmentReport {
        mount: a.mount,
        orientation: o,
        true_easy_axis: EasyAxis::from_vector(truth)?,
        error_deg: recovered.easy_axis.angle_to(truth),
        recovered,
        interference_minima_t: pattern.minima,
    };
    out.json("alignment_report.json", &report)?;
    Ok(report)
}

/// Devices ranked by energy-time product.
pub fn chart(cfg: &RunConfig, out: &mut OutputSet) -> Result<(), CliError> {
    let devices = if cfg.chart.devices.is_empty() {
        let mut d: Vec<_> = default_devices()
            .into_iter()
            .filter(|e| e.name != "quantum limit")
            .collect();
        d.push(quantum_limit_entry(cfg.chart.quantum_limit_temperature_k)?);
        d
    } else {
        cfg.chart.devices.clone()
    };
    let rows = comparison_chart(&devices)?;
    let mut t = Table::new(&[
        int_col("rank"),
        str_col("name"),
        f64_col("W_erg"),
        f64_col("tau_s"),
        f64_col("T_op_K"),
        f64_col("product_erg_s"),
    ]);
    for r in rows {
        t.push(vec![
            r.rank.to_string(),
            r.name,
            num(r.w_erg),
            num(r.tau_s),
            num(r.t_op_k),
            num(r.product),
        ]);
    }
    out.table("chart.csv", &t)
}

//! Uncertainty propagation, molecule counting, the energy-time chart and
//! the crystal-alignment simulation.

mod alignment;
mod chart;
mod counting;
mod interference;
mod uncertainty;

pub use alignment::{
    find_easy_axis, find_peaks, lab_to_molecular, locate_crossing, molecular_to_lab,
    recover_easy_axis, refine_easy_axis, sweep_plane_chi, AlignmentResult, CrystalOrientation,
    EasyAxis, PlaneCrossing, SweepPlane, SweepSettings, MIN_CONTRAST,
};
pub use chart::{
    comparison_chart, default_devices, energy_time_cost, quantum_limit, quantum_limit_entry,
    quantum_speed_limit_tau, ChartRow, DeviceEntry,
};
pub use counting::{molecule_count_mass, molecule_count_saturation};
pub use interference::{interference_pattern, InterferencePattern};
pub use uncertainty::{
    average_sweeps, combine_in_quadrature, propagate_sigma_m, work_confidence_bounds, Measurement,
    WorkBounds,
};

//! The four-step erasure-storage field cycle: relaxation dynamics and loop work.

mod dynamics;
mod schedule;
mod work;

pub use dynamics::{
    chi_features, chi_profile, magnetization_from_chi, run_protocol, ChiFeatures, Trajectory,
    TrajectoryPoint,
};
pub use schedule::{FieldSchedule, Segment};
pub use work::{segment_integral, work_integrals, WorkBreakdown};

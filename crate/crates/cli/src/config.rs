use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use molbit_core::model::{Axis, SpinSystem};
use molbit_kinetics::{
    AnchorBarrier, AnchorRelaxation, ArrheniusParams, ArrheniusRelaxation, FixedRelaxation,
    RelaxationLaw, SpectralRelaxation,
};
use molbit_metrology::{
    find_easy_axis, CrystalOrientation, DeviceEntry, SweepPlane, SweepSettings,
};
use molbit_protocol::{FieldSchedule, Segment};

use crate::CliError;

/// Everything a run needs. Missing keys take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub system: SpinSystem,
    pub environment: Environment,
    pub kinetics: Kinetics,
    pub schedule: Schedule,
    pub spectrum: SpectrumSweep,
    pub relaxation: RelaxationGrids,
    pub align: Align,
    pub chart: Chart,
    pub output: Output,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            system: SpinSystem::fe8(),
            environment: Environment::default(),
            kinetics: Kinetics::default(),
            schedule: Schedule::default(),
            spectrum: SpectrumSweep::default(),
            relaxation: RelaxationGrids::default(),
            align: Align::default(),
            chart: Chart::default(),
            output: Output::default(),
        }
    }
}

/// Bath temperature and probe frequency.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Environment {
    pub temperature_k: f64,
    pub omega_rad_s: f64,
}

impl Default for Environment {
    fn default() -> Self {
        Environment {
            temperature_k: 1.0,
            omega_rad_s: 2.0 * std::f64::consts::PI * 333.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LawKind {
    /// Barrier from the spectrum and the splitting threshold.
    Spectral,
    /// Field-independent tau0 exp(U / T).
    Arrhenius,
    /// Barrier interpolated between measured (H_y, tau) anchors.
    Anchors,
    /// Constant tau.
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Kinetics {
    pub law: LawKind,
    pub tau0_s: f64,
    pub activation_k: f64,
    pub delta_threshold_k: f64,
    /// Adiabatic susceptibility used in the Debye response.
    pub chi_s: f64,
    /// (H_y tesla, tau seconds) pairs measured at `anchor_temperature_k`.
    pub anchors: Vec<(f64, f64)>,
    pub anchor_temperature_k: f64,
    pub fixed_tau_s: f64,
}

impl Default for Kinetics {
    fn default() -> Self {
        Kinetics {
            law: LawKind::Spectral,
            tau0_s: 1.43e-8,
            activation_k: 26.75,
            delta_threshold_k: 0.240156890077272256,
            chi_s: 0.0,
            anchors: vec![(0.0, 71.2), (1.7, 1.09e-6)],
            anchor_temperature_k: 1.0,
            fixed_tau_s: 1e-12,
        }
    }
}

impl Kinetics {
    pub fn build(&self, sys: &SpinSystem) -> Result<Box<dyn RelaxationLaw>, CliError> {
        Ok(match self.law {
            LawKind::Spectral => Box::new(SpectralRelaxation::new(
                sys,
                self.tau0_s,
                self.delta_threshold_k,
            )?),
            LawKind::Arrhenius => Box::new(ArrheniusRelaxation(ArrheniusParams::new(
                self.tau0_s,
                self.activation_k,
            )?)),
            LawKind::Anchors => Box::new(AnchorRelaxation(AnchorBarrier::new(
                &self.anchors,
                self.anchor_temperature_k,
                self.tau0_s,
            )?)),
            LawKind::Fixed => Box::new(FixedRelaxation(self.fixed_tau_s)),
        })
    }
}

/// The erasure cycle, or an explicit list of segments when `segments` is set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Schedule {
    pub hy_max_t: f64,
    pub hz_max_t: f64,
    pub durations_s: [f64; 4],
    pub substeps: usize,
    pub initial_m_z: f64,
    pub segments: Option<Vec<Segment>>,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            hy_max_t: 2.0,
            hz_max_t: 0.21,
            durations_s: [10.0; 4],
            substeps: 512,
            initial_m_z: 0.0,
            segments: None,
        }
    }
}

impl Schedule {
    pub fn build(&self, env: &Environment) -> Result<FieldSchedule, CliError> {
        Ok(match &self.segments {
            Some(segs) => FieldSchedule::new(segs.clone(), env.temperature_k, env.omega_rad_s)?,
            None => FieldSchedule::erasure_cycle(
                self.hy_max_t,
                self.hz_max_t,
                self.durations_s,
                self.substeps,
                env.temperature_k,
                env.omega_rad_s,
            )?,
        })
    }
}

/// Level sweep along one molecular axis; start == stop gives a single field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpectrumSweep {
    pub axis: Axis,
    pub start_t: f64,
    pub stop_t: f64,
    pub step_t: f64,
}

impl Default for SpectrumSweep {
    fn default() -> Self {
        SpectrumSweep {
            axis: Axis::Z,
            start_t: 0.0,
            stop_t: 0.5,
            step_t: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RelaxationGrids {
    pub hy_start_t: f64,
    pub hy_stop_t: f64,
    pub hy_step_t: f64,
    /// Transverse fields that get an Arrhenius table.
    pub arrhenius_hy_t: Vec<f64>,
    pub arrhenius_temperatures_k: Vec<f64>,
}

impl Default for RelaxationGrids {
    fn default() -> Self {
        RelaxationGrids {
            hy_start_t: 0.0,
            hy_stop_t: 2.0,
            hy_step_t: 0.05,
            arrhenius_hy_t: vec![0.0, 0.5, 1.0, 1.5, 2.0],
            arrhenius_temperatures_k: (0..9).map(|k| 1.0 + 0.25 * k as f64).collect(),
        }
    }
}

/// How the synthetic crystal is mounted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Mount {
    /// Easy axis at lab Z, hard axis at lab X.
    Identity,
    /// Hard-plane crossings at 5.70 deg in XZ and 22.72 deg in XY.
    Reference,
    Euler {
        alpha_deg: f64,
        beta_deg: f64,
        gamma_deg: f64,
    },
}

impl Mount {
    pub fn orientation(&self) -> Result<CrystalOrientation, CliError> {
        Ok(match *self {
            Mount::Identity => CrystalOrientation::identity(),
            Mount::Reference => {
                let hard = SweepPlane::XY.direction(22.72);
                let easy = find_easy_axis(SweepPlane::XZ.direction(5.70), hard)?;
                CrystalOrientation::from_axes(easy.vector, hard)?
            }
            Mount::Euler {
                alpha_deg,
                beta_deg,
                gamma_deg,
            } => CrystalOrientation {
                alpha_deg,
                beta_deg,
                gamma_deg,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Align {
    pub mount: Mount,
    pub sweep: SweepSettings,
    /// Fine step of the crossing search, degrees.
    pub step_deg: f64,
    /// Step of the full-turn profiles written to disk, degrees.
    pub profile_step_deg: f64,
    pub interference_hx_max_t: f64,
    pub interference_step_t: f64,
}

impl Default for Align {
    fn default() -> Self {
        Align {
            mount: Mount::Reference,
            sweep: SweepSettings::default(),
            step_deg: 0.1,
            profile_step_deg: 0.5,
            interference_hx_max_t: 2.0,
            interference_step_t: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Chart {
    /// Empty means the bundled table.
    pub devices: Vec<DeviceEntry>,
    /// Temperature of the quantum-limit row when the bundled table is used.
    pub quantum_limit_temperature_k: f64,
}

impl Default for Chart {
    fn default() -> Self {
        Chart {
            devices: Vec::new(),
            quantum_limit_temperature_k: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Output {
    /// Used when --out is not given.
    pub directory: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self, CliError> {
        let value: Value =
            serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        Self::from_value(value)
    }

    fn from_value(value: Value) -> Result<Self, CliError> {
        let cfg: RunConfig =
            serde_json::from_value(value).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Applies `a.b.c=value` overrides. The value is read as JSON when it
    /// parses, otherwise as a bare string.
    pub fn with_overrides(&self, overrides: &[String]) -> Result<Self, CliError> {
        let mut root = serde_json::to_value(self).expect("config serializes");
        for ov in overrides {
            let (key, raw) = ov
                .split_once('=')
                .ok_or_else(|| CliError::Config(format!("override `{ov}` is not key=value")))?;
            let value =
                serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
            let mut node = &mut root;
            let parts: Vec<&str> = key.split('.').collect();
            for (i, part) in parts.iter().enumerate() {
                let obj = match node {
                    Value::Object(m) => m,
                    _ => {
                        return Err(CliError::Config(format!(
                            "`{}` is not a section",
                            parts[..i].join(".")
                        )))
                    }
                };
                let last = i + 1 == parts.len();
                if !obj.contains_key(*part) && !last {
                    return Err(CliError::Config(format!("unknown key `{key}`")));
                }
                if last {
                    obj.insert(part.to_string(), value.clone());
                    break;
                }
                node = obj.get_mut(*part).expect("checked above");
            }
        }
        Self::from_value(root)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.system.validate()?;
        let env = &self.environment;
        if !(env.temperature_k > 0.0 && env.temperature_k.is_finite()) {
            return Err(CliError::Config(format!(
                "environment.temperature_k must be > 0, got {}",
                env.temperature_k
            )));
        }
        if !(env.omega_rad_s >= 0.0 && env.omega_rad_s.is_finite()) {
            return Err(CliError::Config(format!(
                "environment.omega_rad_s must be >= 0, got {}",
                env.omega_rad_s
            )));
        }
        self.kinetics.build(&self.system)?;
        self.schedule.build(env)?;
        let sp = &self.spectrum;
        if !(sp.step_t > 0.0) || !(sp.stop_t >= sp.start_t) {
            return Err(CliError::Config(
                "spectrum needs step_t > 0 and stop_t >= start_t".into(),
            ));
        }
        let r = &self.relaxation;
        if !(r.hy_step_t > 0.0) || !(r.hy_stop_t >= r.hy_start_t) {
            return Err(CliError::Config(
                "relaxation needs hy_step_t > 0 and hy_stop_t >= hy_start_t".into(),
            ));
        }
        if r.arrhenius_temperatures_k.iter().any(|&t| !(t > 0.0)) {
            return Err(CliError::Config(
                "Arrhenius temperatures must be > 0".into(),
            ));
        }
        let a = &self.align;
        if !(a.step_deg > 0.0 && a.profile_step_deg > 0.0 && a.interference_step_t > 0.0) {
            return Err(CliError::Config("align steps must be > 0".into()));
        }
        Ok(())
    }
}

/// Inclusive grid start, start + step, ..., stop.
pub fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    (0..=n).map(|k| start + step * k as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = RunConfig::default();
        assert_eq!(RunConfig::from_json(&c.to_json()).unwrap(), c);
    }

    #[test]
    fn empty_object_is_default() {
        assert_eq!(RunConfig::from_json("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn overrides_reach_nested_keys() {
        let c = RunConfig::default()
            .with_overrides(&[
                "environment.temperature_k=2.5".into(),
                "kinetics.law=arrhenius".into(),
                "align.mount={\"kind\":\"identity\"}".into(),
            ])
            .unwrap();
        assert_eq!(c.environment.temperature_k, 2.5);
        assert_eq!(c.kinetics.law, LawKind::Arrhenius);
        assert_eq!(c.align.mount, Mount::Identity);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::from_json(r#"{"sytem": {}}"#).is_err());
        assert!(RunConfig::default()
            .with_overrides(&["nope.x=1".into()])
            .is_err());
        assert!(RunConfig::default()
            .with_overrides(&["system.spn=1".into()])
            .is_err());
        assert!(RunConfig::default()
            .with_overrides(&["system".into()])
            .is_err());
    }

    #[test]
    fn invalid_values_are_config_errors() {
        let e = RunConfig::default()
            .with_overrides(&["system.e_k=1.0".into()])
            .unwrap_err();
        assert!(matches!(e, CliError::Config(_)), "{e:?}");
    }

    #[test]
    fn grid_includes_both_ends() {
        assert_eq!(grid(0.0, 0.0, 0.1), vec![0.0]);
        let g = grid(0.0, 2.0, 0.05);
        assert_eq!(g.len(), 41);
        assert!((g[40] - 2.0).abs() < 1e-12);
    }
}

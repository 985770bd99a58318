use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use molbit_core::constants::CONSTANTS;
use molbit_core::error::{Error, Result};
use molbit_statmech::landauer_bound;

const BUNDLED_DEVICES: &str = include_str!("../data/devices.csv");

/// W * tau, erg s.
pub fn energy_time_cost(w_erg: f64, tau_s: f64) -> Result<f64> {
    if !(w_erg >= 0.0 && tau_s >= 0.0) {
        return Err(Error::invalid("W and tau must be >= 0"));
    }
    Ok(w_erg * tau_s)
}

/// pi hbar / 2, erg s.
pub fn quantum_limit() -> f64 {
    PI * CONSTANTS.hbar / 2.0
}

/// Minimal time between orthogonal states separated by `delta_erg`.
pub fn quantum_speed_limit_tau(delta_erg: f64) -> Result<f64> {
    if !(delta_erg > 0.0) {
        return Err(Error::invalid(format!(
            "energy must be > 0, got {delta_erg}"
        )));
    }
    Ok(quantum_limit() / delta_erg)
}

/// One point of the energy-time chart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceEntry {
    pub name: String,
    /// Work per bit, erg.
    #[serde(rename = "W")]
    pub w_erg: f64,
    /// Operation time, s.
    pub tau: f64,
    /// Operating temperature, K.
    #[serde(rename = "T_op")]
    pub t_op_k: f64,
}

impl DeviceEntry {
    pub fn product(&self) -> f64 {
        self.w_erg * self.tau
    }
}

/// Landauer work at `t` paired with its speed-limit time.
pub fn quantum_limit_entry(t: f64) -> Result<DeviceEntry> {
    let w = landauer_bound(t)?;
    Ok(DeviceEntry {
        name: "quantum limit".into(),
        w_erg: w,
        tau: quantum_speed_limit_tau(w)?,
        t_op_k: t,
    })
}

/// Bundled devices plus the quantum-limit line at 1 K.
pub fn default_devices() -> Vec<DeviceEntry> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(BUNDLED_DEVICES.as_bytes());
    let mut out: Vec<DeviceEntry> = rdr
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .expect("bundled device table parses");
    out.push(quantum_limit_entry(1.0).expect("1 K is a valid temperature"));
    out
}

/// Chart row: a device with its product and rank.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChartRow {
    pub rank: usize,
    pub name: String,
    pub w_erg: f64,
    pub tau_s: f64,
    pub t_op_k: f64,
    pub product: f64,
}

/// Devices ranked by W * tau, smallest first.
pub fn comparison_chart(entries: &[DeviceEntry]) -> Result<Vec<ChartRow>> {
    if entries.is_empty() {
        return Err(Error::invalid("chart needs at least one device"));
    }
    let mut rows: Vec<ChartRow> = entries
        .iter()
        .map(|e| {
            if !(e.w_erg >= 0.0 && e.tau >= 0.0) {
                return Err(Error::invalid(format!(
                    "device {} has negative W or tau",
                    e.name
                )));
            }
            Ok(ChartRow {
                rank: 0,
                name: e.name.clone(),
                w_erg: e.w_erg,
                tau_s: e.tau,
                t_op_k: e.t_op_k,
                product: e.product(),
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| {
        a.product
            .total_cmp(&b.product)
            .then_with(|| a.name.cmp(&b.name))
    });
    for (i, r) in rows.iter_mut().enumerate() {
        r.rank = i + 1;
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn products() {
        let p = energy_time_cost(1.1828e-16, 1.96e-7).unwrap();
        assert!((p - 2.318e-23).abs() / 2.318e-23 < 1e-3);
        assert_eq!(energy_time_cost(0.0, 5.0).unwrap(), 0.0);
        assert!((quantum_limit() - 1.656e-27).abs() / 1.656e-27 < 1e-3);
    }

    #[test]
    fn speed_limit() {
        assert!((quantum_speed_limit_tau(quantum_limit()).unwrap() - 1.0).abs() < 1e-15);
        let t = quantum_speed_limit_tau(landauer_bound(1.0).unwrap()).unwrap();
        assert!((t - 1.73e-11).abs() / 1.73e-11 < 2e-3, "{t}");
        let a = quantum_speed_limit_tau(2e-16).unwrap();
        let b = quantum_speed_limit_tau(4e-16).unwrap();
        assert!((a / b - 2.0).abs() < 1e-15);
        assert!(quantum_speed_limit_tau(0.0).is_err());
    }

    #[test]
    fn default_chart_order() {
        let rows = comparison_chart(&default_devices()).unwrap();
        assert_eq!(rows.len(), 5);
        assert_eq!(rows[0].name, "quantum limit");
        assert_eq!(rows[1].name, "Fe8");
        assert!(rows.windows(2).all(|w| w[0].product < w[1].product));
        let ff = rows.iter().find(|r| r.name == "flip-flop").unwrap();
        assert!((ff.product.log10() + 9.0).abs() < 0.5);
        assert!((rows[0].product - quantum_limit()).abs() / quantum_limit() < 1e-12);
    }

    #[test]
    fn single_entry() {
        let e = DeviceEntry {
            name: "x".into(),
            w_erg: 2.0,
            tau: 3.0,
            t_op_k: 1.0,
        };
        let rows = comparison_chart(&[e]).unwrap();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].product, 6.0);
        assert!(comparison_chart(&[]).is_err());
    }
}

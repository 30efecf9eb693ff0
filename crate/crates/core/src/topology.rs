//! Network geometry: access points, devices and propagation parameters.
//!
//! A [`Topology`] is validated on construction and immutable afterwards. APs
//! and devices are kept sorted by id, so positional indices used by the
//! optimizer follow id order.

use std::collections::HashSet;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::channel::dbm_to_watts;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Angle of `other` as seen from `self`, measured from the x axis.
    pub fn bearing_to(&self, other: &Position) -> f64 {
        (other.y - self.y).atan2(other.x - self.x)
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AccessPoint {
    pub id: u32,
    pub position: Position,
    pub antenna_count: usize,
    /// Green-energy transmit budget P⁰ in dBm.
    pub power_budget_dbm: f64,
    /// Regulatory transmit restriction P¹ in dBm.
    pub power_restriction_dbm: f64,
}

impl AccessPoint {
    /// min(P¹, P⁰) in dBm.
    pub fn effective_power_dbm(&self) -> f64 {
        self.power_budget_dbm.min(self.power_restriction_dbm)
    }

    /// min(P¹, P⁰) in watts.
    pub fn effective_power_w(&self) -> f64 {
        dbm_to_watts(self.effective_power_dbm()).expect("validated finite power")
    }

    fn validate(&self) -> Result<()> {
        if self.antenna_count == 0 {
            return Err(invalid(format!("AP {}: antenna count must be >= 1", self.id)));
        }
        if !self.position.is_finite() {
            return Err(invalid(format!("AP {}: position must be finite", self.id)));
        }
        if !self.power_budget_dbm.is_finite() || !self.power_restriction_dbm.is_finite() {
            return Err(invalid(format!("AP {}: power limits must be finite", self.id)));
        }
        if self.effective_power_w() <= 0.0 {
            return Err(invalid(format!("AP {}: effective power underflows to zero", self.id)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Device {
    pub id: u32,
    pub position: Position,
    /// RF-to-DC conversion efficiency ξ.
    pub conversion_efficiency: f64,
    pub battery_capacity_mah: f64,
    pub battery_voltage_v: f64,
    pub discharge_mw_per_hour: f64,
    pub adapter_efficiency: f64,
    pub body_mass_kg: f64,
}

impl Device {
    /// A handset with the reference charging constants (50% conversion,
    /// 4000 mAh at 5 V, 80% adapter, 2058 mW idle drain, 50 kg holder).
    pub fn handset(id: u32, position: Position) -> Self {
        Self {
            id,
            position,
            conversion_efficiency: 0.5,
            battery_capacity_mah: 4000.0,
            battery_voltage_v: 5.0,
            discharge_mw_per_hour: 2058.0,
            adapter_efficiency: 0.8,
            body_mass_kg: 50.0,
        }
    }

    fn validate(&self) -> Result<()> {
        let id = self.id;
        if !self.position.is_finite() {
            return Err(invalid(format!("device {id}: position must be finite")));
        }
        if !(0.0..=1.0).contains(&self.conversion_efficiency) {
            return Err(invalid(format!("device {id}: xi must lie in [0, 1]")));
        }
        if !(self.adapter_efficiency > 0.0 && self.adapter_efficiency <= 1.0) {
            return Err(invalid(format!("device {id}: adapter efficiency must lie in (0, 1]")));
        }
        for (name, v) in [
            ("battery capacity", self.battery_capacity_mah),
            ("battery voltage", self.battery_voltage_v),
            ("body mass", self.body_mass_kg),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("device {id}: {name} must be positive")));
            }
        }
        if !(self.discharge_mw_per_hour.is_finite() && self.discharge_mw_per_hour >= 0.0) {
            return Err(invalid(format!("device {id}: discharge must be non-negative")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChannelParams {
    pub path_loss_exponent: f64,
    pub reference_distance_m: f64,
    /// Rician K-factor in dB. `f64::INFINITY` gives a pure line-of-sight
    /// channel and `f64::NEG_INFINITY` pure Rayleigh fading.
    pub rician_k_db: f64,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            path_loss_exponent: 1.7,
            reference_distance_m: 1.0,
            rician_k_db: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Topology {
    aps: Vec<AccessPoint>,
    devices: Vec<Device>,
    channel: ChannelParams,
}

impl Topology {
    pub fn new(
        mut aps: Vec<AccessPoint>,
        mut devices: Vec<Device>,
        channel: ChannelParams,
    ) -> Result<Self> {
        if aps.is_empty() {
            return Err(invalid("topology needs at least one AP"));
        }
        if devices.is_empty() {
            return Err(invalid("topology needs at least one device"));
        }
        let mut seen = HashSet::new();
        if let Some(ap) = aps.iter().find(|ap| !seen.insert(ap.id)) {
            return Err(invalid(format!("duplicate AP id {}", ap.id)));
        }
        seen.clear();
        if let Some(d) = devices.iter().find(|d| !seen.insert(d.id)) {
            return Err(invalid(format!("duplicate device id {}", d.id)));
        }
        aps.iter().try_for_each(AccessPoint::validate)?;
        devices.iter().try_for_each(Device::validate)?;
        if !(channel.reference_distance_m.is_finite() && channel.reference_distance_m > 0.0) {
            return Err(invalid("reference distance must be positive"));
        }
        if !(channel.path_loss_exponent.is_finite() && channel.path_loss_exponent >= 0.0) {
            return Err(invalid("path loss exponent must be non-negative"));
        }
        if channel.rician_k_db.is_nan() {
            return Err(invalid("Rician K-factor must not be NaN"));
        }
        for ap in &aps {
            for d in &devices {
                let dist = ap.position.distance(&d.position);
                if dist < channel.reference_distance_m {
                    return Err(invalid(format!(
                        "device {} is {dist:.3} m from AP {}, closer than the reference distance",
                        d.id, ap.id
                    )));
                }
            }
        }
        aps.sort_by_key(|ap| ap.id);
        devices.sort_by_key(|d| d.id);
        Ok(Self { aps, devices, channel })
    }

    pub fn aps(&self) -> &[AccessPoint] {
        &self.aps
    }

    pub fn devices(&self) -> &[Device] {
        &self.devices
    }

    pub fn channel(&self) -> &ChannelParams {
        &self.channel
    }

    pub fn conversion_efficiencies(&self) -> Vec<f64> {
        self.devices.iter().map(|d| d.conversion_efficiency).collect()
    }

    /// Same scene with every AP carrying `m` antennas.
    pub fn with_antenna_count(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(invalid("antenna count must be >= 1"));
        }
        let mut out = self.clone();
        out.aps.iter_mut().for_each(|ap| ap.antenna_count = m);
        Ok(out)
    }

    /// Same scene with every AP's green-energy budget P⁰ set to `p_dbm`. The
    /// restriction P¹ is kept, so budgets above it are capped.
    pub fn with_power_budget_dbm(&self, p_dbm: f64) -> Result<Self> {
        let mut out = self.clone();
        out.aps.iter_mut().for_each(|ap| ap.power_budget_dbm = p_dbm);
        out.aps.iter().try_for_each(AccessPoint::validate)?;
        Ok(out)
    }

    /// Scales every AP's effective power by `factor` (applied to both limits).
    pub fn with_power_scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(invalid("power scale factor must be positive"));
        }
        let shift = 10.0 * factor.log10();
        let mut out = self.clone();
        for ap in &mut out.aps {
            ap.power_budget_dbm += shift;
            ap.power_restriction_dbm += shift;
        }
        out.aps.iter().try_for_each(AccessPoint::validate)?;
        Ok(out)
    }

    pub fn from_scenario(file: ScenarioFile) -> Result<Self> {
        let aps = file
            .aps
            .into_iter()
            .map(|a| AccessPoint {
                id: a.id,
                position: Position::new(a.x, a.y),
                antenna_count: a.antennas,
                power_budget_dbm: a.power_budget_dbm,
                power_restriction_dbm: a.power_restriction_dbm,
            })
            .collect();
        let devices = file
            .devices
            .into_iter()
            .map(|d| Device {
                id: d.id,
                position: Position::new(d.x, d.y),
                conversion_efficiency: d.xi,
                battery_capacity_mah: d.battery_mah,
                battery_voltage_v: d.voltage_v,
                discharge_mw_per_hour: d.discharge_mw_per_hour,
                adapter_efficiency: d.adapter_efficiency,
                body_mass_kg: d.body_mass_kg,
            })
            .collect();
        Self::new(aps, devices, file.channel)
    }

    pub fn to_scenario(&self) -> ScenarioFile {
        ScenarioFile {
            aps: self
                .aps
                .iter()
                .map(|a| ApEntry {
                    id: a.id,
                    x: a.position.x,
                    y: a.position.y,
                    antennas: a.antenna_count,
                    power_budget_dbm: a.power_budget_dbm,
                    power_restriction_dbm: a.power_restriction_dbm,
                })
                .collect(),
            devices: self
                .devices
                .iter()
                .map(|d| DeviceEntry {
                    id: d.id,
                    x: d.position.x,
                    y: d.position.y,
                    xi: d.conversion_efficiency,
                    battery_mah: d.battery_capacity_mah,
                    voltage_v: d.battery_voltage_v,
                    discharge_mw_per_hour: d.discharge_mw_per_hour,
                    adapter_efficiency: d.adapter_efficiency,
                    body_mass_kg: d.body_mass_kg,
                })
                .collect(),
            channel: self.channel,
        }
    }

    /// Parses a scenario from JSON text. Unknown keys are rejected.
    pub fn from_json_str(text: &str) -> std::result::Result<Self, String> {
        let file: ScenarioFile = serde_json::from_str(text).map_err(|e| e.to_string())?;
        Self::from_scenario(file).map_err(|e| e.to_string())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Scenario {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        Self::from_json_str(&text).map_err(|message| Error::Scenario {
            path: path.to_owned(),
            message,
        })
    }

    /// The bundled 20 m x 20 m office: three APs and five handsets, with
    /// device 5 closest to the AP centroid.
    pub fn default_office() -> Self {
        Self::from_json_str(DEFAULT_SCENARIO).expect("bundled scenario is valid")
    }
}

/// The bundled default scenario, as JSON.
pub const DEFAULT_SCENARIO: &str = include_str!("../scenarios/default.json");

/// On-disk scenario layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub aps: Vec<ApEntry>,
    pub devices: Vec<DeviceEntry>,
    #[serde(default)]
    pub channel: ChannelParams,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApEntry {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub antennas: usize,
    pub power_budget_dbm: f64,
    pub power_restriction_dbm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeviceEntry {
    pub id: u32,
    pub x: f64,
    pub y: f64,
    pub xi: f64,
    pub battery_mah: f64,
    pub voltage_v: f64,
    pub discharge_mw_per_hour: f64,
    pub adapter_efficiency: f64,
    pub body_mass_kg: f64,
}

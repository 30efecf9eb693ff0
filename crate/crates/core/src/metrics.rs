//! Harvested power, transfer efficiency, battery charging and RF exposure.
//!
//! Rates labelled "mW/s" are treated as average power in milliwatts. The
//! exposure figure multiplies incident milliwatts (as watts) by 360 and
//! compares it with `0.08 W/kg × body mass`, the same arithmetic used for
//! the reference 50 kg handset holder.

use std::io::Write;

use serde::Serialize;

use crate::channel::ChannelRealization;
use crate::error::{invalid, Error, Result};
use crate::optimizer::solve::{incident_power_w, BeamAllocation};
use crate::smallcell::{smallcell_incident_w, CellAssignment};
use crate::topology::{Device, Topology};

/// Whole-body SAR limit for continuous public exposure, W/kg.
pub const SAR_LIMIT_W_PER_KG: f64 = 0.08;
/// Seconds per hour.
const SECONDS_PER_HOUR: f64 = 3600.0;
/// Multiplier applied to incident watts to get the 6-minute exposure.
const EXPOSURE_WINDOW_S: f64 = 360.0;

/// Per-device harvested power `ξ_n Σ_k Σ_n' |α w ᵀ h|²` in milliwatts.
pub fn eh_per_device(
    allocation: &BeamAllocation,
    realization: &ChannelRealization,
    devices: &[Device],
) -> Result<Vec<f64>> {
    if devices.len() != allocation.device_count() {
        return Err(invalid("device list length differs from allocation"));
    }
    let incident = incident_power_w(allocation, realization, None)?;
    Ok(incident
        .iter()
        .zip(devices)
        .map(|(p, d)| d.conversion_efficiency * p * 1e3)
        .collect())
}

/// Total harvested over total transmitted power.
pub fn transfer_efficiency(total_eh_mw: f64, allocation: &BeamAllocation) -> Result<f64> {
    let tx_mw = allocation.total_transmit_power_w() * 1e3;
    if tx_mw <= 0.0 {
        return Err(Error::UndefinedRatio);
    }
    Ok(total_eh_mw / tx_mw)
}

/// Energy put into the battery per hour: `adapter · EH · 3600`.
pub fn recharged_energy_per_hour(eh_mw: f64, adapter_efficiency: f64) -> Result<f64> {
    if !(eh_mw >= 0.0) {
        return Err(invalid("harvested power must be non-negative"));
    }
    if !(adapter_efficiency > 0.0 && adapter_efficiency <= 1.0) {
        return Err(invalid("adapter efficiency must lie in (0, 1]"));
    }
    Ok(adapter_efficiency * eh_mw * SECONDS_PER_HOUR)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ChargingPercent {
    pub percent: f64,
    /// Set when the device drains faster than it recharges.
    pub net_discharge: bool,
}

/// Battery percentage gained per hour, `(ER − ED) / V / BC × 100`. Negative
/// values are returned unclamped.
pub fn charging_percent(er: f64, ed: f64, voltage: f64, capacity_mah: f64) -> Result<ChargingPercent> {
    if !(voltage > 0.0) || !(capacity_mah > 0.0) {
        return Err(invalid("voltage and capacity must be positive"));
    }
    let percent = (er - ed) / voltage / capacity_mah * 100.0;
    Ok(ChargingPercent {
        percent,
        net_discharge: percent < 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SarVerdict {
    pub exposure_w: f64,
    pub limit_w: f64,
    pub pass: bool,
}

/// Worst-case exposure of a holder absorbing everything beamed at the device.
pub fn sar_exposure(beamed_mw: f64, body_mass_kg: f64) -> Result<SarVerdict> {
    if !(body_mass_kg > 0.0) {
        return Err(invalid("body mass must be positive"));
    }
    if !(beamed_mw >= 0.0) {
        return Err(invalid("beamed power must be non-negative"));
    }
    let exposure_w = beamed_mw / 1e3 * EXPOSURE_WINDOW_S;
    let limit_w = SAR_LIMIT_W_PER_KG * body_mass_kg;
    Ok(SarVerdict {
        exposure_w,
        limit_w,
        pass: exposure_w <= limit_w,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub device_ids: Vec<u32>,
    pub eh_per_device: Vec<f64>,
    pub beamed_per_device: Vec<f64>,
    pub total_eh_mw: f64,
    pub total_transmit_mw: f64,
    pub efficiency: f64,
    pub charge_percent_per_hour: Vec<f64>,
    pub net_discharge: Vec<bool>,
    pub exposure_w_per_6min: Vec<f64>,
    pub exposure_limit_w: Vec<f64>,
    pub exposure_pass: Vec<bool>,
}

impl MetricsReport {
    /// Evaluates an allocation. `harvest` restricts what each device counts
    /// (small-cell own-cell accounting); `None` sums every AP's beam.
    pub fn compute(
        topology: &Topology,
        allocation: &BeamAllocation,
        realization: &ChannelRealization,
        harvest: Option<&CellAssignment>,
    ) -> Result<Self> {
        let devices = topology.devices();
        if devices.len() != allocation.device_count() {
            return Err(invalid("device list length differs from allocation"));
        }
        let incident_w = match harvest {
            Some(a) => smallcell_incident_w(allocation, realization, a)?,
            None => incident_power_w(allocation, realization, None)?,
        };
        let beamed: Vec<f64> = incident_w.iter().map(|p| p * 1e3).collect();
        let eh: Vec<f64> = beamed
            .iter()
            .zip(devices)
            .map(|(b, d)| d.conversion_efficiency * b)
            .collect();
        let total_eh_mw: f64 = eh.iter().sum();
        let efficiency = transfer_efficiency(total_eh_mw, allocation)?;

        let mut report = Self {
            device_ids: devices.iter().map(|d| d.id).collect(),
            total_eh_mw,
            total_transmit_mw: allocation.total_transmit_power_w() * 1e3,
            efficiency,
            charge_percent_per_hour: Vec::with_capacity(devices.len()),
            net_discharge: Vec::with_capacity(devices.len()),
            exposure_w_per_6min: Vec::with_capacity(devices.len()),
            exposure_limit_w: Vec::with_capacity(devices.len()),
            exposure_pass: Vec::with_capacity(devices.len()),
            eh_per_device: Vec::new(),
            beamed_per_device: Vec::new(),
        };
        for ((d, &e), &b) in devices.iter().zip(&eh).zip(&beamed) {
            let er = recharged_energy_per_hour(e, d.adapter_efficiency)?;
            let charge = charging_percent(er, d.discharge_mw_per_hour, d.battery_voltage_v, d.battery_capacity_mah)?;
            let sar = sar_exposure(b, d.body_mass_kg)?;
            report.charge_percent_per_hour.push(charge.percent);
            report.net_discharge.push(charge.net_discharge);
            report.exposure_w_per_6min.push(sar.exposure_w);
            report.exposure_limit_w.push(sar.limit_w);
            report.exposure_pass.push(sar.pass);
        }
        report.eh_per_device = eh;
        report.beamed_per_device = beamed;
        Ok(report)
    }

    /// Per-device rows: `device_id,eh_mw,beamed_mw,per_hour_pct,exposure_w,limit_w,pass`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["device_id", "eh_mw", "beamed_mw", "per_hour_pct", "exposure_w", "limit_w", "pass"])?;
        for i in 0..self.device_ids.len() {
            w.write_record([
                self.device_ids[i].to_string(),
                self.eh_per_device[i].to_string(),
                self.beamed_per_device[i].to_string(),
                self.charge_percent_per_hour[i].to_string(),
                self.exposure_w_per_6min[i].to_string(),
                self.exposure_limit_w[i].to_string(),
                self.exposure_pass[i].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

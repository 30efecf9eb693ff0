use std::io::Write;

use rayon::prelude::*;

use super::{mean_and_stderr, solve_mode, trial_seed, Mode};
use crate::channel::generate_realization;
use crate::error::{invalid, Result};
use crate::metrics::MetricsReport;
use crate::smallcell::HarvestMode;
use crate::topology::Topology;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Values written to every AP's power budget P⁰.
    pub power_dbm_values: Vec<f64>,
    pub antenna_counts: Vec<usize>,
    pub trials: usize,
    pub base_seed: u64,
    pub modes: Vec<Mode>,
    pub harvest: HarvestMode,
}

impl SweepSpec {
    fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(invalid("sweep needs at least one trial"));
        }
        if self.power_dbm_values.is_empty() || self.antenna_counts.is_empty() || self.modes.is_empty() {
            return Err(invalid("sweep powers, antenna counts and modes must be non-empty"));
        }
        if self.power_dbm_values.iter().any(|p| !p.is_finite()) {
            return Err(invalid("sweep powers must be finite"));
        }
        if self.antenna_counts.contains(&0) {
            return Err(invalid("antenna counts must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub mode: Mode,
    pub power_dbm: f64,
    pub antennas: usize,
    pub trial: usize,
    pub seed: u64,
    pub total_eh_mw: f64,
    pub total_transmit_mw: f64,
    pub efficiency: f64,
    pub eh_per_device: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub mode: Mode,
    pub power_dbm: f64,
    pub antennas: usize,
    pub trials: usize,
    pub mean_eh_mw: f64,
    pub stderr_eh_mw: f64,
    pub mean_efficiency: f64,
    pub stderr_efficiency: f64,
    pub mean_eh_per_device: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub device_ids: Vec<u32>,
    /// Ordered by antenna count, power, mode, then trial.
    pub rows: Vec<SweepRow>,
}

/// Runs every (antenna count, power, mode) cell of the grid over `trials`
/// realizations. Trial `i` uses the same channels in every cell that shares
/// its antenna count, so modes and powers are compared on paired draws.
pub fn run_sweep(topology: &Topology, spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let jobs: Vec<(usize, usize)> = spec
        .antenna_counts
        .iter()
        .copied()
        .flat_map(|m| (0..spec.trials).map(move |t| (m, t)))
        .collect();

    // one block of rows per (M, trial), each ordered by (power, mode)
    let blocks = jobs
        .par_iter()
        .map(|&(m, trial)| {
            let seed = trial_seed(spec.base_seed, trial);
            let scene = topology.with_antenna_count(m)?;
            let realization = generate_realization(&scene, seed);
            let mut rows = Vec::with_capacity(spec.power_dbm_values.len() * spec.modes.len());
            for &p in &spec.power_dbm_values {
                let powered = scene.with_power_budget_dbm(p)?;
                for &mode in &spec.modes {
                    let (alloc, cells) = solve_mode(&powered, &realization, mode, spec.harvest)?;
                    let rep = MetricsReport::compute(&powered, &alloc, &realization, cells.as_ref())?;
                    rows.push(SweepRow {
                        mode,
                        power_dbm: p,
                        antennas: m,
                        trial,
                        seed,
                        total_eh_mw: rep.total_eh_mw,
                        total_transmit_mw: rep.total_transmit_mw,
                        efficiency: rep.efficiency,
                        eh_per_device: rep.eh_per_device,
                    });
                }
            }
            Ok(rows)
        })
        .collect::<Result<Vec<Vec<SweepRow>>>>()?;

    let per_cell = spec.power_dbm_values.len() * spec.modes.len();
    let mut rows = Vec::with_capacity(jobs.len() * per_cell);
    for (mi, _) in spec.antenna_counts.iter().enumerate() {
        for cell in 0..per_cell {
            for trial in 0..spec.trials {
                rows.push(blocks[mi * spec.trials + trial][cell].clone());
            }
        }
    }
    Ok(SweepResult {
        device_ids: topology.devices().iter().map(|d| d.id).collect(),
        rows,
    })
}

impl SweepResult {
    /// Rows for one grid cell, in trial order.
    pub fn cell(&self, mode: Mode, power_dbm: f64, antennas: usize) -> Vec<&SweepRow> {
        self.rows
            .iter()
            .filter(|r| r.mode == mode && r.power_dbm == power_dbm && r.antennas == antennas)
            .collect()
    }

    /// Means and standard errors per grid cell, in row order.
    pub fn summary(&self) -> Vec<SummaryRow> {
        let mut out: Vec<SummaryRow> = Vec::new();
        let mut start = 0;
        while start < self.rows.len() {
            let head = &self.rows[start];
            let end = self.rows[start..]
                .iter()
                .position(|r| r.mode != head.mode || r.power_dbm != head.power_dbm || r.antennas != head.antennas)
                .map_or(self.rows.len(), |off| start + off);
            let group = &self.rows[start..end];
            let eh: Vec<f64> = group.iter().map(|r| r.total_eh_mw).collect();
            let eff: Vec<f64> = group.iter().map(|r| r.efficiency).collect();
            let (mean_eh_mw, stderr_eh_mw) = mean_and_stderr(&eh);
            let (mean_efficiency, stderr_efficiency) = mean_and_stderr(&eff);
            let mean_eh_per_device = (0..self.device_ids.len())
                .map(|d| group.iter().map(|r| r.eh_per_device[d]).sum::<f64>() / group.len() as f64)
                .collect();
            out.push(SummaryRow {
                mode: head.mode,
                power_dbm: head.power_dbm,
                antennas: head.antennas,
                trials: group.len(),
                mean_eh_mw,
                stderr_eh_mw,
                mean_efficiency,
                stderr_efficiency,
                mean_eh_per_device,
            });
            start = end;
        }
        out
    }

    pub fn write_trials_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = [
            "mode",
            "power_dbm",
            "antennas",
            "trial",
            "seed",
            "total_eh_mw",
            "total_transmit_mw",
            "efficiency",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        header.extend(self.device_ids.iter().map(|id| format!("eh_mw_dev{id}")));
        w.write_record(&header)?;
        for r in &self.rows {
            let mut rec = vec![
                r.mode.to_string(),
                r.power_dbm.to_string(),
                r.antennas.to_string(),
                r.trial.to_string(),
                r.seed.to_string(),
                r.total_eh_mw.to_string(),
                r.total_transmit_mw.to_string(),
                r.efficiency.to_string(),
            ];
            rec.extend(r.eh_per_device.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_summary_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = [
            "mode",
            "power_dbm",
            "antennas",
            "trials",
            "mean_eh_mw",
            "stderr_eh_mw",
            "mean_efficiency",
            "stderr_efficiency",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        header.extend(self.device_ids.iter().map(|id| format!("mean_eh_mw_dev{id}")));
        w.write_record(&header)?;
        for s in self.summary() {
            let mut rec = vec![
                s.mode.to_string(),
                s.power_dbm.to_string(),
                s.antennas.to_string(),
                s.trials.to_string(),
                s.mean_eh_mw.to_string(),
                s.stderr_eh_mw.to_string(),
                s.mean_efficiency.to_string(),
                s.stderr_efficiency.to_string(),
            ];
            rec.extend(s.mean_eh_per_device.iter().map(f64::to_string));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

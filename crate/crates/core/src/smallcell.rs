//! Small-cell baseline: every device joins its nearest AP and each AP
//! beamforms over its own cell only.

use std::fmt;
use std::str::FromStr;

use crate::channel::{ChannelRealization, ChannelVector};
use crate::error::{invalid, Result};
use crate::optimizer::solve::{incident_power_w, solve_ap, BeamAllocation};
use crate::topology::{AccessPoint, Device, Position, Topology};

/// How small-cell devices account for incident RF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HarvestMode {
    /// Devices harvest every AP's beam.
    #[default]
    Physical,
    /// Devices only count their serving AP's beam.
    OwnCell,
}

impl FromStr for HarvestMode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "physical" | "physical-harvest" => Ok(Self::Physical),
            "own-cell" | "own-cell-harvest" => Ok(Self::OwnCell),
            other => Err(invalid(format!("unknown small-cell harvest mode `{other}`"))),
        }
    }
}

impl fmt::Display for HarvestMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Physical => "physical",
            Self::OwnCell => "own-cell",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CellAssignment {
    /// `serving[n]` is the positional index of device `n`'s AP.
    serving: Vec<usize>,
    pub mode: HarvestMode,
}

impl CellAssignment {
    pub fn serving(&self) -> &[usize] {
        &self.serving
    }

    /// Positional indices of the devices in AP `k`'s cell.
    pub fn members(&self, k: usize) -> Vec<usize> {
        (0..self.serving.len()).filter(|&n| self.serving[n] == k).collect()
    }

    pub fn with_mode(mut self, mode: HarvestMode) -> Self {
        self.mode = mode;
        self
    }
}

/// Positional index of the AP nearest `pos`; ties go to the lowest index.
pub fn nearest_ap(aps: &[AccessPoint], pos: &Position) -> Result<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, ap) in aps.iter().enumerate() {
        let d = ap.position.distance(pos);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((k, d));
        }
    }
    best.map(|(k, _)| k).ok_or_else(|| invalid("no access points"))
}

/// Nearest-AP association with the default (physical) harvest accounting.
pub fn assign_cells(topology: &Topology) -> CellAssignment {
    let serving = topology
        .devices()
        .iter()
        .map(|d| nearest_ap(topology.aps(), &d.position).expect("topology has APs"))
        .collect();
    CellAssignment {
        serving,
        mode: HarvestMode::default(),
    }
}

/// Each AP solves its subproblem over its own cell at full power. Empty
/// cells stay silent.
pub fn solve_smallcell(
    topology: &Topology,
    realization: &ChannelRealization,
    assignment: &CellAssignment,
) -> Result<BeamAllocation> {
    realization.check_against(topology)?;
    if assignment.serving.len() != topology.devices().len()
        || assignment.serving.iter().any(|&k| k >= topology.aps().len())
    {
        return Err(invalid("cell assignment does not match topology"));
    }
    let beams = topology
        .aps()
        .iter()
        .enumerate()
        .map(|(k, ap)| {
            let members = assignment.members(k);
            if members.is_empty() {
                return Ok(None);
            }
            let channels: Vec<ChannelVector> = members.iter().map(|&n| realization.get(k, n).clone()).collect();
            let weights: Vec<f64> = members
                .iter()
                .map(|&n| topology.devices()[n].conversion_efficiency)
                .collect();
            let sol = solve_ap(ap, &channels, &weights)?;
            Ok(Some((members[sol.target], sol.beamformer, sol.eigen)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BeamAllocation::from_single_beams(topology, beams))
}

/// Per-device incident power in watts under the assignment's harvest mode.
pub fn smallcell_incident_w(
    allocation: &BeamAllocation,
    realization: &ChannelRealization,
    assignment: &CellAssignment,
) -> Result<Vec<f64>> {
    match assignment.mode {
        HarvestMode::Physical => incident_power_w(allocation, realization, None),
        HarvestMode::OwnCell => incident_power_w(allocation, realization, Some(&assignment.serving)),
    }
}

/// Total harvested power in watts under the assignment's harvest mode.
pub fn smallcell_eh(
    allocation: &BeamAllocation,
    realization: &ChannelRealization,
    devices: &[Device],
    assignment: &CellAssignment,
) -> Result<f64> {
    if devices.len() != allocation.device_count() {
        return Err(invalid("device list length differs from allocation"));
    }
    let incident = smallcell_incident_w(allocation, realization, assignment)?;
    Ok(incident
        .iter()
        .zip(devices)
        .map(|(p, d)| d.conversion_efficiency * p)
        .sum())
}

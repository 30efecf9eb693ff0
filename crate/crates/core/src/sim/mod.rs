//! Seeded end-to-end runs, parameter sweeps and the validation suite.

mod compare;
mod sweep;
mod validation;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

pub use compare::{run_compare, CompareRow, CompareResult};
pub use sweep::{run_sweep, SummaryRow, SweepResult, SweepRow, SweepSpec};
pub use validation::{random_instance, random_topology, run_validation, ValidationConfig, ValidationFailure, ValidationReport};

use crate::channel::{generate_realization, ChannelRealization};
use crate::error::{invalid, Result};
use crate::metrics::MetricsReport;
use crate::optimizer::solve::{solve_cellless, BeamAllocation};
use crate::smallcell::{assign_cells, solve_smallcell, CellAssignment, HarvestMode};
use crate::topology::Topology;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mode {
    CellLess,
    SmallCell,
}

impl FromStr for Mode {
    type Err = crate::Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cellless" | "cell-less" => Ok(Self::CellLess),
            "smallcell" | "small-cell" => Ok(Self::SmallCell),
            other => Err(invalid(format!("unknown mode `{other}`"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::CellLess => "cellless",
            Self::SmallCell => "smallcell",
        })
    }
}

/// Solves one realization in the given mode. The cell assignment is
/// returned for the small-cell network so metrics can honour its harvest
/// accounting.
pub fn solve_mode(
    topology: &Topology,
    realization: &ChannelRealization,
    mode: Mode,
    harvest: HarvestMode,
) -> Result<(BeamAllocation, Option<CellAssignment>)> {
    match mode {
        Mode::CellLess => Ok((solve_cellless(topology, realization)?, None)),
        Mode::SmallCell => {
            let cells = assign_cells(topology).with_mode(harvest);
            let alloc = solve_smallcell(topology, realization, &cells)?;
            Ok((alloc, Some(cells)))
        }
    }
}

/// Realization → allocation → metrics for one seed.
pub fn run_once(topology: &Topology, seed: u64, mode: Mode, harvest: HarvestMode) -> Result<MetricsReport> {
    let realization = generate_realization(topology, seed);
    let (alloc, cells) = solve_mode(topology, &realization, mode, harvest)?;
    MetricsReport::compute(topology, &alloc, &realization, cells.as_ref())
}

pub fn run_once_file(path: &Path, seed: u64, mode: Mode, harvest: HarvestMode) -> Result<MetricsReport> {
    run_once(&Topology::load(path)?, seed, mode, harvest)
}

/// Seed of trial `i` in a run based at `base_seed`.
pub fn trial_seed(base_seed: u64, trial: usize) -> u64 {
    base_seed.wrapping_add(trial as u64)
}

pub(crate) fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, f64::NAN);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

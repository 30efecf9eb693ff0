use std::io::Write;

use rayon::prelude::*;

use super::{mean_and_stderr, solve_mode, trial_seed, Mode};
use crate::channel::generate_realization;
use crate::error::{invalid, Result};
use crate::metrics::MetricsReport;
use crate::smallcell::HarvestMode;
use crate::topology::Topology;

/// Cell-less and small-cell results on the same channel draw.
#[derive(Debug, Clone, PartialEq)]
pub struct CompareRow {
    pub trial: usize,
    pub seed: u64,
    pub cellless_eh_mw: f64,
    pub smallcell_eh_mw: f64,
    pub cellless_efficiency: f64,
    pub smallcell_efficiency: f64,
}

impl CompareRow {
    pub fn gap_mw(&self) -> f64 {
        self.cellless_eh_mw - self.smallcell_eh_mw
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompareResult {
    pub harvest: HarvestMode,
    pub rows: Vec<CompareRow>,
}

pub fn run_compare(topology: &Topology, base_seed: u64, trials: usize, harvest: HarvestMode) -> Result<CompareResult> {
    if trials == 0 {
        return Err(invalid("compare needs at least one trial"));
    }
    let rows = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let seed = trial_seed(base_seed, trial);
            let realization = generate_realization(topology, seed);
            let eval = |mode| -> Result<MetricsReport> {
                let (alloc, cells) = solve_mode(topology, &realization, mode, harvest)?;
                MetricsReport::compute(topology, &alloc, &realization, cells.as_ref())
            };
            let cl = eval(Mode::CellLess)?;
            let sc = eval(Mode::SmallCell)?;
            Ok(CompareRow {
                trial,
                seed,
                cellless_eh_mw: cl.total_eh_mw,
                smallcell_eh_mw: sc.total_eh_mw,
                cellless_efficiency: cl.efficiency,
                smallcell_efficiency: sc.efficiency,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CompareResult { harvest, rows })
}

impl CompareResult {
    /// Mean and standard error of the cell-less minus small-cell gap.
    pub fn gap_stats(&self) -> (f64, f64) {
        let gaps: Vec<f64> = self.rows.iter().map(CompareRow::gap_mw).collect();
        mean_and_stderr(&gaps)
    }

    /// Trials where the cell-less network harvested at least as much.
    pub fn dominance_count(&self) -> usize {
        self.rows.iter().filter(|r| r.cellless_eh_mw >= r.smallcell_eh_mw).count()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "trial",
            "seed",
            "cellless_eh_mw",
            "smallcell_eh_mw",
            "gap_mw",
            "cellless_efficiency",
            "smallcell_efficiency",
        ])?;
        for r in &self.rows {
            w.write_record([
                r.trial.to_string(),
                r.seed.to_string(),
                r.cellless_eh_mw.to_string(),
                r.smallcell_eh_mw.to_string(),
                r.gap_mw().to_string(),
                r.cellless_efficiency.to_string(),
                r.smallcell_efficiency.to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

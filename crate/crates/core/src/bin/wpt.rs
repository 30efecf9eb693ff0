use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use cellless_wpt::metrics::MetricsReport;
use cellless_wpt::sim::{self, Mode, SweepSpec, ValidationConfig};
use cellless_wpt::smallcell::HarvestMode;
use cellless_wpt::topology::Topology;
use cellless_wpt::Error;

#[derive(Parser)]
#[command(name = "wpt", version, about = "Cell-less RF wireless power transfer simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one channel realization and write per-device metrics.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value = "cellless", value_parser = parse_mode)]
        mode: Mode,
        #[arg(long, default_value = "physical", value_parser = parse_harvest)]
        smallcell_mode: HarvestMode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Monte Carlo sweep over transmit power and antenna count.
    Sweep {
        #[arg(long)]
        scenario: PathBuf,
        /// AP power budgets in dBm, comma separated.
        #[arg(long, value_delimiter = ',', required = true)]
        powers: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        antennas: Vec<usize>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_delimiter = ',', default_value = "cellless,smallcell", value_parser = parse_mode)]
        modes: Vec<Mode>,
        #[arg(long, default_value = "physical", value_parser = parse_harvest)]
        smallcell_mode: HarvestMode,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the closed form against the oracles on random instances.
    Validate {
        #[arg(long, default_value_t = 50)]
        instances: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random samples per oracle search.
        #[arg(long, default_value_t = 2000)]
        samples: usize,
        /// Take channel parameters from this scenario.
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Corrupt one allocation to confirm the checks fire.
        #[arg(long)]
        self_test: bool,
    },
    /// Paired cell-less vs small-cell runs on identical channels.
    Compare {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        #[arg(long, default_value = "physical", value_parser = parse_harvest)]
        smallcell_mode: HarvestMode,
        /// Write compare.csv here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_harvest(s: &str) -> Result<HarvestMode, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

#[derive(Serialize)]
struct RunSummary<'a> {
    mode: String,
    smallcell_mode: String,
    seed: u64,
    report: &'a MetricsReport,
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, Error> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

enum Outcome {
    Ok,
    ChecksFailed,
}

fn execute(cmd: Command) -> Result<Outcome, Error> {
    match cmd {
        Command::Run {
            scenario,
            seed,
            mode,
            smallcell_mode,
            out,
        } => {
            let report = sim::run_once_file(&scenario, seed, mode, smallcell_mode)?;
            report.write_csv(create(&out, "metrics.csv")?)?;
            let summary = RunSummary {
                mode: mode.to_string(),
                smallcell_mode: smallcell_mode.to_string(),
                seed,
                report: &report,
            };
            let mut f = create(&out, "summary.json")?;
            serde_json::to_writer_pretty(&mut f, &summary).map_err(io::Error::other)?;
            writeln!(f)?;
            println!(
                "{mode}: total EH {:.6} mW, efficiency {:.4}%",
                report.total_eh_mw,
                report.efficiency * 100.0
            );
        }
        Command::Sweep {
            scenario,
            powers,
            antennas,
            trials,
            seed,
            modes,
            smallcell_mode,
            out,
        } => {
            let topology = Topology::load(&scenario)?;
            let spec = SweepSpec {
                power_dbm_values: powers,
                antenna_counts: antennas,
                trials,
                base_seed: seed,
                modes,
                harvest: smallcell_mode,
            };
            let result = sim::run_sweep(&topology, &spec)?;
            result.write_trials_csv(create(&out, "sweep_trials.csv")?)?;
            result.write_summary_csv(create(&out, "sweep_summary.csv")?)?;
            for s in result.summary() {
                println!(
                    "{:>9} P={:>5} dBm M={} mean EH {:.6} mW (se {:.2e}), efficiency {:.4}%",
                    s.mode.to_string(),
                    s.power_dbm,
                    s.antennas,
                    s.mean_eh_mw,
                    s.stderr_eh_mw,
                    s.mean_efficiency * 100.0
                );
            }
        }
        Command::Validate {
            instances,
            seed,
            samples,
            scenario,
            self_test,
        } => {
            let mut cfg = ValidationConfig::new(instances, seed);
            cfg.search_samples = samples;
            cfg.self_test = self_test;
            if let Some(path) = scenario {
                cfg.channel = *Topology::load(&path)?.channel();
            }
            let report = sim::run_validation(&cfg)?;
            for f in &report.failures {
                eprintln!("FAIL {f}");
            }
            println!(
                "{} instances, {} checks, {} failures",
                report.instances,
                report.checks_run,
                report.failures.len()
            );
            if !report.passed() {
                return Ok(Outcome::ChecksFailed);
            }
        }
        Command::Compare {
            scenario,
            seed,
            trials,
            smallcell_mode,
            out,
        } => {
            let topology = Topology::load(&scenario)?;
            let result = sim::run_compare(&topology, seed, trials, smallcell_mode)?;
            match out {
                Some(dir) => result.write_csv(create(&dir, "compare.csv")?)?,
                None => result.write_csv(io::stdout().lock())?,
            }
            let (gap, se) = result.gap_stats();
            eprintln!(
                "mean gap {gap:.6} mW (se {se:.2e}); cell-less >= small-cell in {}/{} trials",
                result.dominance_count(),
                result.rows.len()
            );
        }
    }
    Ok(Outcome::Ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(Outcome::Ok) => ExitCode::SUCCESS,
        Ok(Outcome::ChecksFailed) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Scenario { .. } | Error::InvalidArgument(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

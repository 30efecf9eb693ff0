//! Randomized self-checks of the closed form against the oracles.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;

use crate::channel::{generate_realization, ChannelRealization};
use crate::error::{invalid, Result};
use crate::optimizer::eigen::EigenPair;
use crate::optimizer::gram::build_gram;
use crate::optimizer::oracle::{oracle_alpha_enumeration, oracle_random_search, RandomSearch};
use crate::optimizer::solve::{closed_form_value, objective_value, solve_cellless, BeamAllocation};
use crate::smallcell::{assign_cells, smallcell_eh, solve_smallcell};
use crate::topology::{AccessPoint, ChannelParams, Device, Position, Topology};

use super::trial_seed;

const ROOM_M: f64 = 20.0;

#[derive(Debug, Clone)]
pub struct ValidationConfig {
    pub instances: usize,
    pub seed: u64,
    /// Random samples per oracle search.
    pub search_samples: usize,
    /// Channel parameters for the random instances.
    pub channel: ChannelParams,
    /// Corrupt the first instance's allocation (2x power) as a negative control.
    pub self_test: bool,
}

impl ValidationConfig {
    pub fn new(instances: usize, seed: u64) -> Self {
        Self {
            instances,
            seed,
            search_samples: 2000,
            channel: ChannelParams::default(),
            self_test: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationFailure {
    pub instance: usize,
    /// Replays the instance as `--instances 1 --seed <seed>`.
    pub seed: u64,
    pub check: &'static str,
    pub detail: String,
}

impl fmt::Display for ValidationFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "instance {} (replay seed {}): {} failed: {}",
            self.instance, self.seed, self.check, self.detail
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub instances: usize,
    pub checks_run: usize,
    pub failures: Vec<ValidationFailure>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// A random scene with `K ≤ 3`, `N ≤ 4`, `M ≤ 4` in a 20 m square room.
pub fn random_instance(seed: u64, channel: ChannelParams) -> Topology {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let k = rng.random_range(1..=3usize);
    let n = rng.random_range(1..=4usize);
    let m = rng.random_range(1..=4usize);
    random_topology(&mut rng, k, n, m, channel)
}

/// Random scene with the given dimensions; every device keeps at least the
/// reference distance from every AP.
pub fn random_topology<R: Rng>(rng: &mut R, k: usize, n: usize, m: usize, channel: ChannelParams) -> Topology {
    let aps: Vec<AccessPoint> = (0..k)
        .map(|i| AccessPoint {
            id: i as u32 + 1,
            position: Position::new(rng.random_range(0.0..ROOM_M), rng.random_range(0.0..ROOM_M)),
            antenna_count: m,
            power_budget_dbm: rng.random_range(10.0..20.0),
            power_restriction_dbm: 20.0,
        })
        .collect();
    let devices = (0..n)
        .map(|j| {
            let pos = loop {
                let p = Position::new(rng.random_range(0.0..ROOM_M), rng.random_range(0.0..ROOM_M));
                if aps.iter().all(|a| a.position.distance(&p) >= channel.reference_distance_m) {
                    break p;
                }
            };
            let mut d = Device::handset(j as u32 + 1, pos);
            d.conversion_efficiency = rng.random_range(0.2..=1.0);
            d
        })
        .collect();
    Topology::new(aps, devices, channel).expect("random topology is valid")
}

fn check_eigenpairs(topology: &Topology, realization: &ChannelRealization, alloc: &BeamAllocation) -> Result<()> {
    let weights = topology.conversion_efficiencies();
    for (k, ap) in topology.aps().iter().enumerate() {
        let eig: &EigenPair = alloc
            .eigenpair(k)
            .ok_or_else(|| invalid(format!("AP {} has no eigenpair", ap.id)))?;
        let g = build_gram(ap.id, realization.for_ap(k), &weights)?;
        let r = eig.residual(&g);
        if r > 1e-10 * eig.eigenvalue.max(1.0) {
            return Err(invalid(format!("AP {} residual {r:e}", ap.id)));
        }
        let norm: f64 = eig.eigenvector.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(invalid(format!("AP {} eigenvector norm {norm}", ap.id)));
        }
    }
    Ok(())
}

fn relative_gap(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

/// Runs every check on `instances` random scenes; instance `i` uses seed
/// `seed + i`.
pub fn run_validation(config: &ValidationConfig) -> Result<ValidationReport> {
    if config.instances == 0 {
        return Err(invalid("validation needs at least one instance"));
    }
    let mut report = ValidationReport {
        instances: config.instances,
        ..Default::default()
    };
    for i in 0..config.instances {
        let seed = trial_seed(config.seed, i);
        let topology = random_instance(seed, config.channel);
        let realization = generate_realization(&topology, seed);
        let mut fail = |check: &'static str, detail: String| {
            report.failures.push(ValidationFailure {
                instance: i,
                seed,
                check,
                detail,
            })
        };

        let mut alloc = solve_cellless(&topology, &realization)?;
        if config.self_test && i == 0 {
            alloc = alloc.with_power_scaled(2.0);
        }
        let objective = objective_value(&alloc, &realization, topology.devices())?;
        let closed = closed_form_value(&topology, &alloc);

        if let Err(e) = check_eigenpairs(&topology, &realization, &alloc) {
            fail("eigen residual", e.to_string());
        }
        if let Err(e) = alloc.check_invariants(&topology) {
            fail("power feasibility", e.to_string());
        }
        if relative_gap(objective, closed) > 1e-12 {
            fail("decomposition identity", format!("objective {objective:e} vs {closed:e}"));
        }

        let search = RandomSearch::new(config.search_samples, seed ^ 0x5eed);
        let oracle = oracle_random_search(&topology, &realization, &search)?;
        if oracle > objective * (1.0 + 1e-9) {
            fail("oracle dominance", format!("search found {oracle:e} above {objective:e}"));
        }

        let table = oracle_alpha_enumeration(&topology, &realization)?;
        let (mask, best) = table.max();
        if best != table.all_ones_value() {
            fail("alpha reduction", format!("mask {mask:#b} reaches {best:e} above all-ones"));
        }

        let cells = assign_cells(&topology);
        let small = solve_smallcell(&topology, &realization, &cells)?;
        let small_eh = smallcell_eh(&small, &realization, topology.devices(), &cells)?;
        if small_eh > objective {
            fail("small-cell dominance", format!("small-cell {small_eh:e} above cell-less {objective:e}"));
        }
        report.checks_run += 6;
    }
    Ok(report)
}

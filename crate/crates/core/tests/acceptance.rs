//! Acceptance suite: one line per criterion, nonzero exit if any fails.

mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rayon::prelude::*;
use statrs::distribution::{ContinuousCDF, StudentsT};

use cellless_wpt::channel::{draw_rician_channel, generate_realization};
use cellless_wpt::metrics::{charging_percent, recharged_energy_per_hour, sar_exposure};
use cellless_wpt::optimizer::{
    closed_form_value, largest_eigenpair, objective_value, oracle_alpha_enumeration, oracle_random_search,
    solve_cellless, RandomSearch,
};
use cellless_wpt::sim::{random_topology, run_compare, run_sweep, Mode, SweepSpec};
use cellless_wpt::smallcell::HarvestMode;
use cellless_wpt::topology::{ChannelParams, Topology};

use common::{dense_eigenvalues, dense_top_eigenpair, phase_distance, random_psd, rel};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn charging_anchor() -> Outcome {
    let er = recharged_energy_per_hour(3.347, 0.8).map_err(|e| e.to_string())?;
    let p = charging_percent(er, 2058.0, 5.0, 4000.0).map_err(|e| e.to_string())?;
    check((p.percent - 37.9).abs() <= 0.05, format!("{:.4}% per hour", p.percent))
}

fn sar_anchor() -> Outcome {
    let v = sar_exposure(6.694, 50.0).map_err(|e| e.to_string())?;
    check(
        (v.exposure_w - 2.4098).abs() <= 1e-4 && v.limit_w == 4.0 && v.pass,
        format!("exposure {:.5} W, limit {} W, pass {}", v.exposure_w, v.limit_w, v.pass),
    )
}

fn closed_form_optimality() -> Outcome {
    let results: Vec<Result<(f64, f64, f64), String>> = (0..50u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha20Rng::seed_from_u64(3_000 + i);
            let k = rng.random_range(1..=3);
            let m = rng.random_range(2..=4);
            let n = rng.random_range(2..=5);
            let t = random_topology(&mut rng, k, n, m, ChannelParams::default());
            let r = generate_realization(&t, rng.random());
            let alloc = solve_cellless(&t, &r).map_err(|e| e.to_string())?;
            let value = objective_value(&alloc, &r, t.devices()).map_err(|e| e.to_string())?;
            let closed = closed_form_value(&t, &alloc);
            let search = RandomSearch::new(100_000, i);
            let oracle = oracle_random_search(&t, &r, &search).map_err(|e| e.to_string())?;
            Ok((value, oracle, rel(value, closed)))
        })
        .collect();
    let mut worst_gap = 0.0f64;
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_identity = 0.0f64;
    let mut failures = 0;
    for r in results {
        let (value, oracle, identity) = r?;
        let excess = (oracle - value) / value;
        worst_excess = worst_excess.max(excess);
        worst_gap = worst_gap.max(rel(value, oracle));
        worst_identity = worst_identity.max(identity);
        if excess > 1e-12 || rel(value, oracle) > 1e-3 || identity > 1e-12 {
            failures += 1;
        }
    }
    check(
        failures == 0,
        format!(
            "50 instances, oracle excess max {worst_excess:.2e}, gap max {worst_gap:.2e}, identity max {worst_identity:.2e}"
        ),
    )
}

fn alpha_reduction() -> Outcome {
    let mut failures = 0;
    for i in 0..20u64 {
        let mut rng = ChaCha20Rng::seed_from_u64(4_000 + i);
        let n = rng.random_range(2..=3);
        let m = rng.random_range(1..=4);
        let t = random_topology(&mut rng, 2, n, m, ChannelParams::default());
        let r = generate_realization(&t, rng.random());
        let table = oracle_alpha_enumeration(&t, &r).map_err(|e| e.to_string())?;
        if table.max().1 != table.all_ones_value() {
            failures += 1;
        }
    }
    check(failures == 0, format!("20 instances, {failures} with a better non-trivial mask"))
}

fn eigen_correctness() -> Outcome {
    let mut rng = ChaCha20Rng::seed_from_u64(5_000);
    let mut worst_value = 0.0f64;
    let mut worst_residual = 0.0f64;
    let mut worst_vector = 0.0f64;
    for _ in 0..200 {
        let m = rng.random_range(1..=8);
        let rank = rng.random_range(1..=m);
        let g = random_psd(&mut rng, m, rank);
        let e = largest_eigenpair(&g, 1e-12, 10_000).map_err(|e| e.to_string())?;
        let (lam, v) = dense_top_eigenpair(&g);
        worst_value = worst_value.max((e.eigenvalue - lam).abs());
        worst_residual = worst_residual.max(e.residual(&g));
        let spectrum = dense_eigenvalues(&g);
        if spectrum.len() < 2 || spectrum[0] - spectrum[1] > 1e-2 * spectrum[0] {
            worst_vector = worst_vector.max(phase_distance(&e.eigenvector, &v));
        }
    }
    check(
        worst_value <= 1e-9 && worst_residual <= 1e-10 && worst_vector <= 1e-9,
        format!("200 matrices, |dλ| max {worst_value:.2e}, residual max {worst_residual:.2e}, vector max {worst_vector:.2e}"),
    )
}

fn dominance() -> Outcome {
    let t = Topology::default_office();
    let res = run_compare(&t, 10_000, 1000, HarvestMode::Physical).map_err(|e| e.to_string())?;
    let n = res.dominance_count();
    let (gap, se) = res.gap_stats();
    check(n == 1000, format!("{n}/1000 trials, mean gap {gap:.4} mW (se {se:.1e})"))
}

fn trends() -> Outcome {
    let t = Topology::default_office();
    let trials = 500;
    let powers: Vec<f64> = (0..6).map(|i| 10.0 + 2.0 * i as f64).collect();
    let spec = SweepSpec {
        power_dbm_values: powers.clone(),
        antenna_counts: vec![3],
        trials,
        base_seed: 20_000,
        modes: vec![Mode::CellLess],
        harvest: HarvestMode::Physical,
    };
    let res = run_sweep(&t, &spec).map_err(|e| e.to_string())?;
    let base = res.cell(Mode::CellLess, powers[0], 3);
    let mut worst_linear = 0.0f64;
    let mut means = Vec::new();
    for &p in &powers {
        let rows = res.cell(Mode::CellLess, p, 3);
        let c = 10f64.powf((p - powers[0]) / 10.0);
        for (a, b) in base.iter().zip(&rows) {
            worst_linear = worst_linear.max(rel(b.total_eh_mw, c * a.total_eh_mw));
        }
        means.push(rows.iter().map(|r| r.total_eh_mw).sum::<f64>() / rows.len() as f64);
    }
    let increasing = means.windows(2).all(|w| w[1] > w[0]);

    let spec = SweepSpec {
        power_dbm_values: vec![18.0],
        antenna_counts: vec![3, 5],
        trials,
        base_seed: 30_000,
        modes: vec![Mode::CellLess, Mode::SmallCell],
        harvest: HarvestMode::Physical,
    };
    let res = run_sweep(&t, &spec).map_err(|e| e.to_string())?;
    let gaps = |m: usize| -> Vec<f64> {
        let cl = res.cell(Mode::CellLess, 18.0, m);
        let sc = res.cell(Mode::SmallCell, 18.0, m);
        cl.iter().zip(&sc).map(|(a, b)| a.total_eh_mw - b.total_eh_mw).collect()
    };
    let (g3, g5) = (gaps(3), gaps(5));
    let d: Vec<f64> = g5.iter().zip(&g3).map(|(a, b)| a - b).collect();
    let n = d.len() as f64;
    let mean = d.iter().sum::<f64>() / n;
    let sd = (d.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    let t_stat = mean / (sd / n.sqrt());
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).map_err(|e| e.to_string())?;
    let p_value = 1.0 - dist.cdf(t_stat);
    let mean3 = g3.iter().sum::<f64>() / n;
    let mean5 = g5.iter().sum::<f64>() / n;
    check(
        worst_linear <= 1e-9 && increasing && p_value < 0.05,
        format!(
            "linear scaling err max {worst_linear:.1e}, means increasing {increasing}; gap M=3 {mean3:.4} mW, M=5 {mean5:.4} mW, t {t_stat:.2}, p {p_value:.2e}"
        ),
    )
}

fn efficiency_band() -> Outcome {
    let t = Topology::default_office();
    let spec = SweepSpec {
        power_dbm_values: vec![18.0],
        antenna_counts: vec![5],
        trials: 500,
        base_seed: 40_000,
        modes: vec![Mode::CellLess],
        harvest: HarvestMode::Physical,
    };
    let res = run_sweep(&t, &spec).map_err(|e| e.to_string())?;
    let s = &res.summary()[0];
    check(
        (0.001..=0.20).contains(&s.mean_efficiency),
        format!("mean efficiency {:.4} over {} trials", s.mean_efficiency, s.trials),
    )
}

fn channel_statistics() -> Outcome {
    let draws = 100_000;
    let (m, gain) = (4, 0.3);
    let mut details = Vec::new();
    let mut ok = true;
    for (label, k_db) in [("κ=0 (Rayleigh)", f64::NEG_INFINITY), ("κ=0 dB", 0.0), ("κ=10 dB", 10.0), ("κ=∞", f64::INFINITY)] {
        let mut rng = ChaCha20Rng::seed_from_u64(6_000);
        let mut sum = 0.0;
        for _ in 0..draws {
            sum += draw_rician_channel(m, k_db, gain, 0.4, &mut rng).map_err(|e| e.to_string())?.norm_sqr();
        }
        let ratio = sum / draws as f64 / (gain * m as f64);
        ok &= (ratio - 1.0).abs() <= 0.02;
        details.push(format!("{label} {ratio:.4}"));
    }
    check(ok, format!("E‖h‖²/(gM): {}", details.join(", ")))
}

fn sweep_determinism() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let scenario = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/default.json");
    let run = |dir: &Path| -> Result<(), String> {
        let status = Command::new(env!("CARGO_BIN_EXE_wpt"))
            .args(["sweep", "--scenario"])
            .arg(&scenario)
            .args(["--powers", "10,12,14,16,18,20", "--antennas", "3,5", "--trials", "20", "--seed", "1", "--out"])
            .arg(dir)
            .output()
            .map_err(|e| e.to_string())?
            .status;
        if status.success() {
            Ok(())
        } else {
            Err(format!("wpt sweep exited with {status}"))
        }
    };
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run(&a)?;
    run(&b)?;
    let mut same = true;
    for f in ["sweep_trials.csv", "sweep_summary.csv"] {
        same &= fs::read(a.join(f)).map_err(|e| e.to_string())? == fs::read(b.join(f)).map_err(|e| e.to_string())?;
    }
    check(same, "sweep_trials.csv and sweep_summary.csv byte-identical".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("charging anchor", charging_anchor),
        ("exposure anchor", sar_anchor),
        ("closed-form optimality", closed_form_optimality),
        ("selection reduction", alpha_reduction),
        ("eigen correctness", eigen_correctness),
        ("per-realization dominance", dominance),
        ("power and antenna trends", trends),
        ("efficiency band", efficiency_band),
        ("channel statistics", channel_statistics),
        ("sweep determinism", sweep_determinism),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = f();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("[PASS] {:>2}. {name}: {d} ({secs:.1}s)", i + 1),
            Err(d) => {
                failed += 1;
                println!("[FAIL] {:>2}. {name}: {d} ({secs:.1}s)", i + 1);
            }
        }
    }
    println!("{} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Validation oracles for the mixed-integer problem.
//!
//! `oracle_random_search` explores feasible multi-beam allocations without
//! touching the Gram matrix or the eigen-solver, and `oracle_alpha_enumeration`
//! enumerates every selection matrix.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Exp1, StandardNormal};

use super::eigen::{largest_eigenpair, DEFAULT_MAX_ITER, DEFAULT_TOL};
use super::gram::build_gram;
use super::solve::{transpose_gain, BeamAllocation};
use crate::channel::{ChannelRealization, ChannelVector};
use crate::error::{invalid, Error, Result};
use crate::topology::Topology;

/// Largest `K·N` accepted by the selection enumeration.
pub const MAX_ENUMERATION_PAIRS: usize = 16;

#[derive(Debug, Clone)]
pub struct RandomSearch<'a> {
    pub samples: usize,
    pub seed: u64,
    /// Normalized gradient-ascent steps applied to the best sample.
    pub polish_iters: usize,
    /// Allocation evaluated as the first sample.
    pub inject: Option<&'a BeamAllocation>,
}

impl RandomSearch<'_> {
    pub fn new(samples: usize, seed: u64) -> Self {
        Self {
            samples,
            seed,
            polish_iters: 2000,
            inject: None,
        }
    }
}

/// Beams of one AP: `beams[n']` is `w_n'`.
type ApBeams = Vec<Vec<Complex64>>;

/// `Σ_n ξ_n Σ_n' |w_n'ᵀ h_n|²` for one AP.
fn ap_objective(beams: &ApBeams, channels: &[ChannelVector], weights: &[f64]) -> f64 {
    let mut total = 0.0;
    for (h, &xi) in channels.iter().zip(weights) {
        for w in beams {
            total += xi * transpose_gain(w, h.as_slice());
        }
    }
    total
}

fn random_ap_beams(rng: &mut ChaCha20Rng, m: usize, n: usize, budget: f64) -> ApBeams {
    let split: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(Exp1)).collect();
    let total: f64 = split.iter().sum();
    split
        .iter()
        .map(|s| {
            let mut w: Vec<Complex64> = (0..m)
                .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
                .collect();
            let norm = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            let amp = (budget * s / total).sqrt() / norm;
            w.iter_mut().for_each(|c| *c *= amp);
            w
        })
        .collect()
}

/// Projected gradient ascent on the sphere `Σ‖w_n'‖² = budget`.
fn polish(beams: &mut ApBeams, channels: &[ChannelVector], weights: &[f64], budget: f64, iters: usize) {
    let trace: f64 = channels.iter().zip(weights).map(|(h, xi)| xi * h.norm_sqr()).sum();
    if trace == 0.0 {
        return;
    }
    let step = 10.0 / trace;
    for _ in 0..iters {
        // ∂/∂conj(w) of Σ_n ξ_n |wᵀ h_n|² is Σ_n ξ_n (wᵀ h_n) conj(h_n)
        for w in beams.iter_mut() {
            let mut grad = vec![Complex64::default(); w.len()];
            for (h, &xi) in channels.iter().zip(weights) {
                let h = h.as_slice();
                let s: Complex64 = w.iter().zip(h).map(|(a, b)| a * b).sum();
                for (g, hi) in grad.iter_mut().zip(h) {
                    *g += s * hi.conj() * xi;
                }
            }
            for (wi, g) in w.iter_mut().zip(&grad) {
                *wi += g * step;
            }
        }
        let used: f64 = beams.iter().flatten().map(|c| c.norm_sqr()).sum();
        if used == 0.0 {
            return;
        }
        let amp = (budget / used).sqrt();
        beams.iter_mut().flatten().for_each(|c| *c *= amp);
    }
}

/// Best total harvested power (watts) found by random feasible allocations,
/// polished by gradient ascent.
pub fn oracle_random_search(
    topology: &Topology,
    realization: &ChannelRealization,
    search: &RandomSearch<'_>,
) -> Result<f64> {
    if search.samples == 0 {
        return Err(invalid("random search needs at least one sample"));
    }
    realization.check_against(topology)?;
    let weights = topology.conversion_efficiencies();
    let n = topology.devices().len();
    let mut rng = ChaCha20Rng::seed_from_u64(search.seed);

    let evaluate = |candidate: &[ApBeams]| -> f64 {
        candidate
            .iter()
            .enumerate()
            .map(|(k, beams)| ap_objective(beams, realization.for_ap(k), &weights))
            .sum()
    };
    let consider = |candidate: Vec<ApBeams>, best: &mut (f64, Vec<ApBeams>)| {
        let value = evaluate(&candidate);
        if value > best.0 {
            *best = (value, candidate);
        }
    };
    let mut best = (f64::NEG_INFINITY, Vec::new());

    let mut drawn = 0;
    if let Some(alloc) = search.inject {
        if alloc.ap_count() != topology.aps().len() || alloc.device_count() != n {
            return Err(invalid("injected allocation has the wrong shape"));
        }
        let candidate = (0..alloc.ap_count())
            .map(|k| {
                (0..n)
                    .map(|j| {
                        if alloc.selected(k, j) {
                            alloc.beamformer(k, j).to_vec()
                        } else {
                            vec![Complex64::default(); topology.aps()[k].antenna_count]
                        }
                    })
                    .collect()
            })
            .collect();
        consider(candidate, &mut best);
        drawn = 1;
    }
    for _ in drawn..search.samples {
        let candidate = topology
            .aps()
            .iter()
            .map(|ap| random_ap_beams(&mut rng, ap.antenna_count, n, ap.effective_power_w()))
            .collect();
        consider(candidate, &mut best);
    }

    if search.polish_iters > 0 {
        let mut polished = best.1.clone();
        for (k, beams) in polished.iter_mut().enumerate() {
            let budget = topology.aps()[k].effective_power_w();
            polish(beams, realization.for_ap(k), &weights, budget, search.polish_iters);
        }
        consider(polished, &mut best);
    }
    Ok(best.0)
}

/// Optimal objective for every selection matrix `α`.
#[derive(Debug, Clone)]
pub struct AlphaTable {
    ap_count: usize,
    device_count: usize,
    /// Indexed by mask; bit `k·N + n` is `α_n^k`.
    values: Vec<f64>,
}

impl AlphaTable {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn value(&self, mask: u32) -> f64 {
        self.values[mask as usize]
    }

    pub fn all_ones_mask(&self) -> u32 {
        ((1u64 << (self.ap_count * self.device_count)) - 1) as u32
    }

    pub fn all_ones_value(&self) -> f64 {
        self.value(self.all_ones_mask())
    }

    /// (mask, value) of the best configuration; the lowest mask wins ties.
    pub fn max(&self) -> (u32, f64) {
        let mut best = (0u32, self.values[0]);
        for (mask, &v) in self.values.iter().enumerate() {
            if v > best.1 {
                best = (mask as u32, v);
            }
        }
        best
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.values.iter().enumerate().map(|(m, &v)| (m as u32, v))
    }
}

/// Enumerates all `2^(K·N)` selection matrices. For a fixed `α`, AP `k`
/// contributes `min(P_k¹, P_k⁰) · λ_max(G_k)` when at least one of its
/// indicators is set and nothing otherwise.
pub fn oracle_alpha_enumeration(topology: &Topology, realization: &ChannelRealization) -> Result<AlphaTable> {
    let k_count = topology.aps().len();
    let n_count = topology.devices().len();
    let pairs = k_count * n_count;
    if pairs > MAX_ENUMERATION_PAIRS {
        return Err(Error::Capacity {
            pairs,
            limit: MAX_ENUMERATION_PAIRS,
        });
    }
    realization.check_against(topology)?;
    let weights = topology.conversion_efficiencies();
    let per_ap = topology
        .aps()
        .iter()
        .enumerate()
        .map(|(k, ap)| {
            let g = build_gram(ap.id, realization.for_ap(k), &weights)?;
            let e = largest_eigenpair(&g, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
            Ok(ap.effective_power_w() * e.eigenvalue)
        })
        .collect::<Result<Vec<f64>>>()?;
    let row_mask = (1u32 << n_count) - 1;
    let values = (0..1u32 << pairs)
        .map(|mask| {
            per_ap.iter().enumerate().fold(0.0, |acc, (k, &v)| {
                let active = (mask >> (k * n_count)) & row_mask != 0;
                acc + if active { v } else { 0.0 }
            })
        })
        .collect();
    Ok(AlphaTable {
        ap_count: k_count,
        device_count: n_count,
        values,
    })
}

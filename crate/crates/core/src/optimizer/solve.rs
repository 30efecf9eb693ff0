//! Closed-form AP selection and energy beamforming.
//!
//! With every selection indicator set to one, the total harvested power
//! splits into independent per-AP quadratic forms. Each AP puts its whole
//! power budget on the dominant eigenvector of its weighted Gram matrix and
//! the indicators are then read off the beamformers.

use num_complex::Complex64;

use super::eigen::{largest_eigenpair, EigenPair, DEFAULT_MAX_ITER, DEFAULT_TOL};
use super::gram::build_gram;
use crate::channel::{ChannelRealization, ChannelVector};
use crate::error::{invalid, Error, Result};
use crate::topology::{AccessPoint, Device, Topology};

/// Slack allowed on the per-AP power constraint, in watts.
pub const POWER_SLACK_W: f64 = 1e-12;

/// Index of the device with the largest channel norm; ties go to the
/// lowest index.
pub fn select_target_device(channels: &[ChannelVector]) -> Result<usize> {
    if channels.is_empty() {
        return Err(invalid("cannot select a target among zero devices"));
    }
    let mut best = 0;
    let mut best_norm = channels[0].norm();
    for (i, h) in channels.iter().enumerate().skip(1) {
        let n = h.norm();
        if n > best_norm {
            best = i;
            best_norm = n;
        }
    }
    Ok(best)
}

/// Optimal single beam of one AP.
#[derive(Debug, Clone, PartialEq)]
pub struct ApSolution {
    /// `√P · conj(v)`, so that `wᵀ h = √P · vᴴ h`.
    pub beamformer: Vec<Complex64>,
    /// Index (into the supplied channel list) that the beam is booked to.
    pub target: usize,
    pub eigen: EigenPair,
}

/// Solves one AP's subproblem over the given channels and weights.
pub fn solve_ap(ap: &AccessPoint, channels: &[ChannelVector], weights: &[f64]) -> Result<ApSolution> {
    if let Some(h) = channels.iter().find(|h| h.len() != ap.antenna_count) {
        return Err(invalid(format!(
            "AP {} has {} antennas but a channel of length {}",
            ap.id,
            ap.antenna_count,
            h.len()
        )));
    }
    let gram = build_gram(ap.id, channels, weights)?;
    let eigen = largest_eigenpair(&gram, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    let amp = ap.effective_power_w().sqrt();
    let beamformer = eigen.eigenvector.iter().map(|v| v.conj() * amp).collect();
    let target = select_target_device(channels)?;
    Ok(ApSolution {
        beamformer,
        target,
        eigen,
    })
}

/// Beamformers `w_n^k` and selection indicators `α_n^k` for the network.
/// All indexing is positional, in topology (id) order.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamAllocation {
    beamformers: Vec<Vec<Vec<Complex64>>>,
    selection: Vec<Vec<bool>>,
    targets: Vec<Option<usize>>,
    eigenpairs: Vec<Option<EigenPair>>,
}

impl BeamAllocation {
    /// Builds an allocation from explicit beamformers `[ap][device]`,
    /// setting `α = 1` exactly where `‖w‖² > 0`.
    pub fn from_beamformers(beamformers: Vec<Vec<Vec<Complex64>>>) -> Self {
        let selection: Vec<Vec<bool>> = beamformers
            .iter()
            .map(|row| row.iter().map(|w| power(w) > 0.0).collect())
            .collect();
        let targets = selection.iter().map(|row| row.iter().position(|&a| a)).collect();
        let eigenpairs = vec![None; beamformers.len()];
        Self {
            beamformers,
            selection,
            targets,
            eigenpairs,
        }
    }

    /// One beam per AP booked to `targets[k]`; `None` leaves the AP silent.
    pub(crate) fn from_single_beams(
        topology: &Topology,
        beams: Vec<Option<(usize, Vec<Complex64>, EigenPair)>>,
    ) -> Self {
        let n_dev = topology.devices().len();
        let mut beamformers = Vec::with_capacity(beams.len());
        let mut targets = Vec::with_capacity(beams.len());
        let mut eigenpairs = Vec::with_capacity(beams.len());
        for (ap, beam) in topology.aps().iter().zip(beams) {
            let mut row = vec![vec![Complex64::default(); ap.antenna_count]; n_dev];
            match beam {
                Some((target, w, eigen)) => {
                    row[target] = w;
                    targets.push(Some(target));
                    eigenpairs.push(Some(eigen));
                }
                None => {
                    targets.push(None);
                    eigenpairs.push(None);
                }
            }
            beamformers.push(row);
        }
        let selection = beamformers
            .iter()
            .map(|row| row.iter().map(|w| power(w) > 0.0).collect())
            .collect();
        Self {
            beamformers,
            selection,
            targets,
            eigenpairs,
        }
    }

    pub fn ap_count(&self) -> usize {
        self.beamformers.len()
    }

    pub fn device_count(&self) -> usize {
        self.beamformers.first().map_or(0, Vec::len)
    }

    pub fn beamformer(&self, k: usize, n: usize) -> &[Complex64] {
        &self.beamformers[k][n]
    }

    pub fn beamformers(&self) -> &[Vec<Vec<Complex64>>] {
        &self.beamformers
    }

    /// `α_n^k`.
    pub fn selected(&self, k: usize, n: usize) -> bool {
        self.selection[k][n]
    }

    pub fn selection(&self) -> &[Vec<bool>] {
        &self.selection
    }

    /// Device index AP `k` beams to, if any.
    pub fn target(&self, k: usize) -> Option<usize> {
        self.targets[k]
    }

    /// Eigenpair behind AP `k`'s beam, when produced by the closed form.
    pub fn eigenpair(&self, k: usize) -> Option<&EigenPair> {
        self.eigenpairs[k].as_ref()
    }

    /// `Σ_n ‖w_n^k‖²` in watts.
    pub fn transmit_power_w(&self, k: usize) -> f64 {
        self.beamformers[k].iter().map(|w| power(w)).sum()
    }

    pub fn total_transmit_power_w(&self) -> f64 {
        (0..self.ap_count()).map(|k| self.transmit_power_w(k)).sum()
    }

    /// Multiplies every beamformer by `√factor`.
    pub fn with_power_scaled(&self, factor: f64) -> Self {
        let amp = factor.sqrt();
        let mut out = self.clone();
        out.beamformers
            .iter_mut()
            .flatten()
            .flatten()
            .for_each(|c| *c *= amp);
        out
    }

    /// Checks power feasibility, the indicator rule and the one-beam-per-AP
    /// structure against a topology.
    pub fn check_invariants(&self, topology: &Topology) -> Result<()> {
        if self.ap_count() != topology.aps().len() || self.device_count() != topology.devices().len() {
            return Err(invalid("allocation dimensions differ from topology"));
        }
        for (k, ap) in topology.aps().iter().enumerate() {
            let used = self.transmit_power_w(k);
            let budget = ap.effective_power_w();
            if used > budget + POWER_SLACK_W {
                return Err(Error::Infeasible(format!(
                    "AP {} transmits {used:e} W over its {budget:e} W limit",
                    ap.id
                )));
            }
            let mut active = 0;
            for n in 0..self.device_count() {
                let w = &self.beamformers[k][n];
                if w.len() != ap.antenna_count {
                    return Err(invalid(format!("AP {} beamformer has wrong length", ap.id)));
                }
                let on = power(w) > 0.0;
                if on != self.selection[k][n] {
                    return Err(Error::Infeasible(format!(
                        "AP {} device index {n}: selection disagrees with beam power",
                        ap.id
                    )));
                }
                active += usize::from(on);
            }
            if active > 1 {
                return Err(Error::Infeasible(format!("AP {} forms {active} beams", ap.id)));
            }
        }
        Ok(())
    }
}

fn power(w: &[Complex64]) -> f64 {
    w.iter().map(|c| c.norm_sqr()).sum()
}

/// `|wᵀ h|²` with the plain (unconjugated) transpose.
pub(crate) fn transpose_gain(w: &[Complex64], h: &[Complex64]) -> f64 {
    w.iter().zip(h).map(|(a, b)| a * b).sum::<Complex64>().norm_sqr()
}

/// Pre-conversion power reaching each device, in watts:
/// `Σ_k Σ_n' |α_n'^k (w_n'^k)ᵀ h_n^k|²`. When `serving` is given, device `n`
/// only counts the AP `serving[n]`.
pub(crate) fn incident_power_w(
    allocation: &BeamAllocation,
    realization: &ChannelRealization,
    serving: Option<&[usize]>,
) -> Result<Vec<f64>> {
    let k_count = allocation.ap_count();
    let n_count = allocation.device_count();
    if realization.ap_count() != k_count || realization.device_count() != n_count {
        return Err(invalid("allocation and realization dimensions differ"));
    }
    if serving.is_some_and(|s| s.len() != n_count) {
        return Err(invalid("cell assignment covers a different number of devices"));
    }
    let mut out = vec![0.0; n_count];
    for (n, acc) in out.iter_mut().enumerate() {
        for k in 0..k_count {
            if let Some(s) = serving {
                if s[n] != k {
                    continue;
                }
            }
            let h = realization.get(k, n).as_slice();
            for n2 in 0..n_count {
                if !allocation.selected(k, n2) {
                    continue;
                }
                let w = allocation.beamformer(k, n2);
                if w.len() != h.len() {
                    return Err(invalid("beamformer and channel lengths differ"));
                }
                *acc += transpose_gain(w, h);
            }
        }
    }
    Ok(out)
}

/// Total harvested power in watts,
/// `Σ_n ξ_n Σ_k Σ_n' |α_n'^k (w_n'^k)ᵀ h_n^k|²`.
pub fn objective_value(
    allocation: &BeamAllocation,
    realization: &ChannelRealization,
    devices: &[Device],
) -> Result<f64> {
    if devices.len() != allocation.device_count() {
        return Err(invalid("device list length differs from allocation"));
    }
    let incident = incident_power_w(allocation, realization, None)?;
    Ok(incident
        .iter()
        .zip(devices)
        .map(|(p, d)| d.conversion_efficiency * p)
        .sum())
}

/// Runs the per-AP closed form on every AP.
pub fn solve_cellless(topology: &Topology, realization: &ChannelRealization) -> Result<BeamAllocation> {
    realization.check_against(topology)?;
    let weights = topology.conversion_efficiencies();
    let beams = topology
        .aps()
        .iter()
        .enumerate()
        .map(|(k, ap)| {
            let sol = solve_ap(ap, realization.for_ap(k), &weights)?;
            Ok(Some((sol.target, sol.beamformer, sol.eigen)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(BeamAllocation::from_single_beams(topology, beams))
}

/// `Σ_k min(P_k¹, P_k⁰) · λ_max(G_k)` from the allocation's eigenpairs.
pub fn closed_form_value(topology: &Topology, allocation: &BeamAllocation) -> f64 {
    topology
        .aps()
        .iter()
        .enumerate()
        .filter_map(|(k, ap)| allocation.eigenpair(k).map(|e| ap.effective_power_w() * e.eigenvalue))
        .sum()
}

//! Path loss, Rician fading and seeded channel realizations.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;

use crate::error::{invalid, Result};
use crate::topology::Topology;

/// Converts decibel-milliwatts to watts.
pub fn dbm_to_watts(p_dbm: f64) -> Result<f64> {
    if !p_dbm.is_finite() {
        return Err(invalid(format!("power {p_dbm} dBm is not finite")));
    }
    Ok(10f64.powf((p_dbm - 30.0) / 10.0))
}

/// Linear power gain `(max(d, d0) / d0)^(-exponent)`.
pub fn path_loss_gain(distance: f64, exponent: f64, reference: f64) -> Result<f64> {
    if !(reference > 0.0 && reference.is_finite()) {
        return Err(invalid("reference distance must be positive"));
    }
    if !(distance >= 0.0) || !(exponent >= 0.0) {
        return Err(invalid("distance and exponent must be non-negative"));
    }
    Ok((distance.max(reference) / reference).powf(-exponent))
}

/// Complex channel from one AP's antennas to a single-antenna device.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVector(Vec<Complex64>);

impl ChannelVector {
    pub fn new(amplitudes: Vec<Complex64>) -> Self {
        Self(amplitudes)
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }
}

/// Steering vector of a half-wavelength uniform linear array; entry `m` has
/// phase `π m sin θ`.
pub fn steering_vector(antenna_count: usize, angle: f64) -> Vec<Complex64> {
    let s = angle.sin();
    (0..antenna_count)
        .map(|m| Complex64::from_polar(1.0, PI * m as f64 * s))
        .collect()
}

/// Returns the (line-of-sight, scattered) amplitude weights for a K-factor in dB.
fn rician_weights(k_factor_db: f64) -> (f64, f64) {
    if k_factor_db == f64::INFINITY {
        return (1.0, 0.0);
    }
    let kappa = 10f64.powf(k_factor_db / 10.0);
    ((kappa / (kappa + 1.0)).sqrt(), (1.0 / (kappa + 1.0)).sqrt())
}

/// Draws `h = √g (√(κ/(κ+1)) a(θ) + √(1/(κ+1)) z)` with `z ~ CN(0, I)`.
///
/// `k_factor_db = +∞` yields the deterministic LOS channel and `-∞` pure
/// Rayleigh fading.
pub fn draw_rician_channel<R: Rng + ?Sized>(
    antenna_count: usize,
    k_factor_db: f64,
    gain: f64,
    los_angle: f64,
    rng: &mut R,
) -> Result<ChannelVector> {
    if antenna_count == 0 {
        return Err(invalid("antenna count must be >= 1"));
    }
    if !(gain > 0.0 && gain.is_finite()) {
        return Err(invalid("channel gain must be positive"));
    }
    if k_factor_db.is_nan() {
        return Err(invalid("K-factor must not be NaN"));
    }
    let (los, nlos) = rician_weights(k_factor_db);
    let amp = gain.sqrt();
    let los_part = steering_vector(antenna_count, los_angle);
    let h = los_part
        .into_iter()
        .map(|a| {
            let mut v = a * los;
            if nlos > 0.0 {
                let re: f64 = rng.sample(StandardNormal);
                let im: f64 = rng.sample(StandardNormal);
                v += Complex64::new(re, im) * (nlos * std::f64::consts::FRAC_1_SQRT_2);
            }
            v * amp
        })
        .collect();
    Ok(ChannelVector(h))
}

/// Independent generator for the (AP, device) pair: the ChaCha stream id is
/// keyed by the two ids, so realizations do not depend on visiting order.
pub fn pair_rng(seed: u64, ap_id: u32, device_id: u32) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream((u64::from(ap_id) << 32) | u64::from(device_id));
    rng
}

/// Channels for every (AP, device) pair of a topology, for one fading draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    seed: u64,
    /// `entries[k][n]`, positional in topology order.
    entries: Vec<Vec<ChannelVector>>,
}

impl ChannelRealization {
    /// Builds a realization from explicit channels, indexed `[ap][device]`.
    pub fn from_channels(seed: u64, entries: Vec<Vec<ChannelVector>>) -> Self {
        Self { seed, entries }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn ap_count(&self) -> usize {
        self.entries.len()
    }

    pub fn device_count(&self) -> usize {
        self.entries.first().map_or(0, Vec::len)
    }

    /// All device channels seen from AP `k`.
    pub fn for_ap(&self, k: usize) -> &[ChannelVector] {
        &self.entries[k]
    }

    pub fn get(&self, k: usize, n: usize) -> &ChannelVector {
        &self.entries[k][n]
    }

    /// Checks that the realization matches the topology's dimensions.
    pub fn check_against(&self, topology: &Topology) -> Result<()> {
        if self.entries.len() != topology.aps().len() {
            return Err(invalid("realization AP count differs from topology"));
        }
        for (row, ap) in self.entries.iter().zip(topology.aps()) {
            if row.len() != topology.devices().len() {
                return Err(invalid("realization device count differs from topology"));
            }
            if row.iter().any(|h| h.len() != ap.antenna_count) {
                return Err(invalid(format!("channel length differs from AP {} antenna count", ap.id)));
            }
        }
        Ok(())
    }
}

/// Draws one channel realization. Pure in `(topology, seed)`.
pub fn generate_realization(topology: &Topology, seed: u64) -> ChannelRealization {
    let params = topology.channel();
    let entries = topology
        .aps()
        .iter()
        .map(|ap| {
            topology
                .devices()
                .iter()
                .map(|dev| {
                    let dist = ap.position.distance(&dev.position);
                    let gain = path_loss_gain(dist, params.path_loss_exponent, params.reference_distance_m)
                        .expect("validated topology");
                    let angle = ap.position.bearing_to(&dev.position);
                    let mut rng = pair_rng(seed, ap.id, dev.id);
                    draw_rician_channel(ap.antenna_count, params.rician_k_db, gain, angle, &mut rng)
                        .expect("validated topology")
                })
                .collect()
        })
        .collect();
    ChannelRealization { seed, entries }
}

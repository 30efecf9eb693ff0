//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use cellless_wpt::channel::{ChannelRealization, ChannelVector};
use cellless_wpt::optimizer::{BeamAllocation, WeightedGram};
use cellless_wpt::topology::Device;

pub fn cgauss<R: Rng>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn random_channels<R: Rng>(rng: &mut R, n: usize, m: usize) -> Vec<ChannelVector> {
    (0..n)
        .map(|_| ChannelVector::new((0..m).map(|_| cgauss(rng) * 0.3).collect()))
        .collect()
}

/// `A Aᴴ` for a random `m × r` complex Gaussian `A`.
pub fn random_psd<R: Rng>(rng: &mut R, m: usize, r: usize) -> WeightedGram {
    let a: Vec<Complex64> = (0..m * r).map(|_| cgauss(rng)).collect();
    let mut g = vec![Complex64::default(); m * m];
    for i in 0..m {
        for j in 0..m {
            g[i * m + j] = (0..r).map(|t| a[i * r + t] * a[j * r + t].conj()).sum();
        }
    }
    for i in 0..m {
        g[i * m + i].im = 0.0;
        for j in i + 1..m {
            g[j * m + i] = g[i * m + j].conj();
        }
    }
    WeightedGram::from_matrix(0, m, g).unwrap()
}

/// Entrywise `Σ_n ξ_n h_n h_nᴴ`, written out with explicit indices.
pub fn brute_gram(channels: &[ChannelVector], weights: &[f64]) -> Vec<Complex64> {
    let m = channels[0].len();
    let mut out = vec![Complex64::default(); m * m];
    for i in 0..m {
        for j in 0..m {
            let mut acc = Complex64::default();
            for (h, w) in channels.iter().zip(weights) {
                let h = h.as_slice();
                acc += Complex64::new(*w, 0.0) * h[i] * h[j].conj();
            }
            out[i * m + j] = acc;
        }
    }
    out
}

/// Cyclic Jacobi eigen-decomposition of a real symmetric matrix (row-major).
/// Returns eigenvalues and eigenvectors as columns of the returned matrix.
pub fn jacobi_symmetric(a: &[f64], n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut a = a.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].powi(2))
            .sum();
        let scale: f64 = a.iter().map(|x| x * x).sum();
        if off <= 1e-32 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (a[q * n + q] - a[p * n + p]) / (2.0 * apq);
                // signum(0) is 1, which is the right rotation for equal diagonals
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }
    ((0..n).map(|i| a[i * n + i]).collect(), v)
}

/// Top eigenpair of a Hermitian matrix through its real `2m × 2m` embedding
/// `[[Re, −Im], [Im, Re]]`, diagonalized by Jacobi.
pub fn dense_top_eigenpair(g: &WeightedGram) -> (f64, Vec<Complex64>) {
    let m = g.dim();
    let n = 2 * m;
    let mut s = vec![0.0; n * n];
    for i in 0..m {
        for j in 0..m {
            let z = g.get(i, j);
            s[i * n + j] = z.re;
            s[i * n + (j + m)] = -z.im;
            s[(i + m) * n + j] = z.im;
            s[(i + m) * n + (j + m)] = z.re;
        }
    }
    let (vals, vecs) = jacobi_symmetric(&s, n);
    let top = (0..n).max_by(|&a, &b| vals[a].total_cmp(&vals[b])).unwrap();
    let mut v: Vec<Complex64> = (0..m)
        .map(|i| Complex64::new(vecs[i * n + top], vecs[(i + m) * n + top]))
        .collect();
    let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|c| *c /= norm);
    (vals[top], v)
}

/// `min_φ ‖a − e^{iφ} b‖`.
pub fn phase_distance(a: &[Complex64], b: &[Complex64]) -> f64 {
    let inner: Complex64 = b.iter().zip(a).map(|(x, y)| x.conj() * y).sum();
    let phase = if inner.norm() > 0.0 { inner / inner.norm() } else { Complex64::new(1.0, 0.0) };
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y * phase).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Total harvested power by the literal triple sum, in watts.
pub fn triple_loop_objective(alloc: &BeamAllocation, r: &ChannelRealization, devices: &[Device]) -> f64 {
    per_device_triple_loop(alloc, r, None)
        .iter()
        .zip(devices)
        .map(|(p, d)| d.conversion_efficiency * p)
        .sum()
}

/// Incident power per device, `Σ_k Σ_n' |α (w)ᵀ h|²`; with `serving`, only
/// the serving AP counts.
pub fn per_device_triple_loop(alloc: &BeamAllocation, r: &ChannelRealization, serving: Option<&[usize]>) -> Vec<f64> {
    let k_count = alloc.ap_count();
    let n_count = alloc.device_count();
    let mut out = vec![0.0; n_count];
    for n in 0..n_count {
        for k in 0..k_count {
            if serving.is_some_and(|s| s[n] != k) {
                continue;
            }
            for n2 in 0..n_count {
                let alpha = if alloc.selected(k, n2) { 1.0 } else { 0.0 };
                let w = alloc.beamformer(k, n2);
                let h = r.get(k, n).as_slice();
                let mut s = Complex64::default();
                for i in 0..w.len() {
                    s += w[i] * alpha * h[i];
                }
                out[n] += s.norm_sqr();
            }
        }
    }
    out
}

pub fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

/// Eigenvalues of a Hermitian matrix in descending order.
pub fn dense_eigenvalues(g: &WeightedGram) -> Vec<f64> {
    let m = g.dim();
    let n = 2 * m;
    let mut s = vec![0.0; n * n];
    for i in 0..m {
        for j in 0..m {
            let z = g.get(i, j);
            s[i * n + j] = z.re;
            s[i * n + (j + m)] = -z.im;
            s[(i + m) * n + j] = z.im;
            s[(i + m) * n + (j + m)] = z.re;
        }
    }
    let (mut vals, _) = jacobi_symmetric(&s, n);
    vals.sort_by(|a, b| b.total_cmp(a));
    // the real embedding repeats every eigenvalue twice
    vals.into_iter().step_by(2).collect()
}

//! Dominant eigenpair of a Hermitian PSD matrix by power iteration.
//!
//! The iteration is warm-started from a normalized repeated square of the
//! matrix. For a PSD matrix `G^(2^j)` is dominated by the top eigenspace
//! after a handful of squarings even when the spectral gap is small, so the
//! plain power steps that follow only polish the residual.

use num_complex::Complex64;

use super::gram::WeightedGram;
use crate::error::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_MAX_ITER: usize = 10_000;

const MAX_SQUARINGS: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub eigenvalue: f64,
    /// Unit norm; first non-negligible entry real and positive.
    pub eigenvector: Vec<Complex64>,
}

impl EigenPair {
    /// `‖G v − λ v‖`.
    pub fn residual(&self, gram: &WeightedGram) -> f64 {
        residual(gram, &self.eigenvector, self.eigenvalue)
    }
}

fn norm(x: &[Complex64]) -> f64 {
    x.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn scale(x: &mut [Complex64], s: f64) {
    x.iter_mut().for_each(|c| *c *= s);
}

fn residual(gram: &WeightedGram, v: &[Complex64], lambda: f64) -> f64 {
    gram.apply(v)
        .iter()
        .zip(v)
        .map(|(gv, vi)| (gv - vi * lambda).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Rotates `v` so its first entry with modulus above 1e-12 is real positive.
pub fn canonicalize_phase(v: &mut [Complex64]) {
    let Some(lead) = v.iter().find(|c| c.norm() > 1e-12).copied() else {
        return;
    };
    let rot = lead.conj() / lead.norm();
    v.iter_mut().for_each(|c| *c *= rot);
    if let Some(first) = v.iter_mut().find(|c| c.norm() > 1e-12) {
        first.im = 0.0;
    }
}

/// Fixed start vector: first basis vector plus a small deterministic tilt.
fn start_vector(dim: usize) -> Vec<Complex64> {
    let mut x: Vec<Complex64> = (0..dim)
        .map(|j| Complex64::new(1e-3 * (j + 1) as f64, 5e-4 * (dim - j) as f64))
        .collect();
    x[0] += 1.0;
    let n = norm(&x);
    scale(&mut x, 1.0 / n);
    x
}

fn mat_square(a: &[Complex64], dim: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); dim * dim];
    for i in 0..dim {
        for k in 0..dim {
            let aik = a[i * dim + k];
            for j in 0..dim {
                out[i * dim + j] += aik * a[k * dim + j];
            }
        }
    }
    out
}

/// Approximate top eigenvector from `G^(2^j)` applied to the start vector.
fn warm_start(gram: &WeightedGram) -> Vec<Complex64> {
    let dim = gram.dim();
    let mut b = gram.as_slice().to_vec();
    let f = norm(&b);
    scale(&mut b, 1.0 / f);
    for _ in 0..MAX_SQUARINGS {
        let mut next = mat_square(&b, dim);
        let f = norm(&next);
        if f == 0.0 || !f.is_finite() {
            break;
        }
        scale(&mut next, 1.0 / f);
        let change = next.iter().zip(&b).map(|(p, q)| (p - q).norm_sqr()).sum::<f64>().sqrt();
        b = next;
        if change < 1e-14 {
            break;
        }
    }
    let x0 = start_vector(dim);
    let mut x: Vec<Complex64> = b
        .chunks_exact(dim)
        .map(|row| row.iter().zip(&x0).map(|(p, q)| p * q).sum())
        .collect();
    if norm(&x) < 1e-8 {
        // start vector nearly orthogonal to the top eigenspace
        let col = (0..dim)
            .max_by(|&i, &j| {
                let ci: f64 = (0..dim).map(|r| b[r * dim + i].norm_sqr()).sum();
                let cj: f64 = (0..dim).map(|r| b[r * dim + j].norm_sqr()).sum();
                ci.total_cmp(&cj).then(j.cmp(&i))
            })
            .unwrap_or(0);
        x = (0..dim).map(|r| b[r * dim + col]).collect();
    }
    let n = norm(&x);
    if n == 0.0 || !n.is_finite() {
        return x0;
    }
    scale(&mut x, 1.0 / n);
    x
}

/// Dominant eigenpair of a Hermitian PSD matrix.
///
/// Stops once `‖G v − λ v‖ ≤ tol · max(1, λ)`. The zero matrix returns
/// `λ = 0` with the first basis vector.
pub fn largest_eigenpair(gram: &WeightedGram, tol: f64, max_iter: usize) -> Result<EigenPair> {
    let dim = gram.dim();
    if !(tol > 0.0) {
        return Err(crate::error::invalid("tolerance must be positive"));
    }
    if gram.frobenius_norm() == 0.0 {
        let mut e = vec![Complex64::default(); dim];
        e[0] = Complex64::new(1.0, 0.0);
        return Ok(EigenPair {
            eigenvalue: 0.0,
            eigenvector: e,
        });
    }

    let mut x = warm_start(gram);
    let mut last_residual = f64::INFINITY;
    for _ in 0..=max_iter {
        let y = gram.apply(&x);
        let lambda: f64 = x.iter().zip(&y).map(|(xi, yi)| (xi.conj() * yi).re).sum();
        let r = y
            .iter()
            .zip(&x)
            .map(|(yi, xi)| (yi - xi * lambda).norm_sqr())
            .sum::<f64>()
            .sqrt();
        last_residual = r;
        if r <= tol * lambda.max(1.0) {
            canonicalize_phase(&mut x);
            let eigenvalue = gram.quadratic_form(&x).max(0.0);
            return Ok(EigenPair {
                eigenvalue,
                eigenvector: x,
            });
        }
        let n = norm(&y);
        if n == 0.0 {
            break;
        }
        x = y;
        scale(&mut x, 1.0 / n);
    }
    Err(Error::Convergence {
        iterations: max_iter,
        residual: last_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelVector;
    use crate::optimizer::gram::build_gram;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn zero_matrix_fallback() {
        let g = WeightedGram::zeros(0, 3);
        let p = largest_eigenpair(&g, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert_eq!(p.eigenvalue, 0.0);
        assert_eq!(p.eigenvector, vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
    }

    #[test]
    fn rank_one_spectrum() {
        let h = vec![c(0.3, -0.4), c(1.0, 0.5), c(-0.2, 0.1)];
        let g = build_gram(0, &[ChannelVector::new(h.clone())], &[1.0]).unwrap();
        let p = largest_eigenpair(&g, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        let hn: f64 = h.iter().map(|z| z.norm_sqr()).sum();
        assert!((p.eigenvalue - hn).abs() < 1e-14);
        let mut expect: Vec<Complex64> = h.iter().map(|z| z / hn.sqrt()).collect();
        canonicalize_phase(&mut expect);
        for (a, b) in p.eigenvector.iter().zip(&expect) {
            assert!((a - b).norm() < 1e-12);
        }
        assert_eq!(p.eigenvector[0].im, 0.0);
        assert!(p.eigenvector[0].re > 0.0);
    }

    #[test]
    fn identity_is_degenerate_but_fine() {
        let mut data = vec![c(0.0, 0.0); 9];
        for i in 0..3 {
            data[i * 3 + i] = c(2.0, 0.0);
        }
        let g = WeightedGram::from_matrix(0, 3, data).unwrap();
        let p = largest_eigenpair(&g, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!((p.eigenvalue - 2.0).abs() < 1e-14);
        assert!(p.residual(&g) < 1e-13);
    }

    #[test]
    fn tiny_gap_converges() {
        // diag(1, 0.999999) rotated by a fixed unitary-ish mix
        let data = vec![c(0.9999995, 0.0), c(0.0, 5e-7), c(0.0, -5e-7), c(0.9999995, 0.0)];
        let g = WeightedGram::from_matrix(0, 2, data).unwrap();
        let p = largest_eigenpair(&g, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
        assert!((p.eigenvalue - 1.0).abs() < 1e-12);
        assert!(p.residual(&g) <= 1e-12);
    }

    #[test]
    fn non_convergence_is_reported() {
        let data = vec![c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.5, 0.0)];
        let g = WeightedGram::from_matrix(0, 2, data).unwrap();
        // an unreachable tolerance
        match largest_eigenpair(&g, 1e-300, 3) {
            Err(Error::Convergence { iterations, residual }) => {
                assert_eq!(iterations, 3);
                assert!(residual.is_finite());
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
    }
}

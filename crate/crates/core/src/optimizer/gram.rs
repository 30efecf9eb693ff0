use num_complex::Complex64;

use crate::channel::ChannelVector;
use crate::error::{invalid, Result};

/// Hermitian PSD matrix `Σ_n ξ_n h_n h_nᴴ` for one AP, stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGram {
    ap_id: u32,
    dim: usize,
    data: Vec<Complex64>,
}

impl WeightedGram {
    /// Wraps a dense row-major matrix, checking it is Hermitian to 1e-12.
    pub fn from_matrix(ap_id: u32, dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(invalid("matrix data does not match its dimension"));
        }
        let g = Self { ap_id, dim, data };
        if !g.is_hermitian(1e-12) {
            return Err(invalid("matrix is not Hermitian"));
        }
        Ok(g)
    }

    pub fn zeros(ap_id: u32, dim: usize) -> Self {
        Self {
            ap_id,
            dim,
            data: vec![Complex64::default(); dim * dim],
        }
    }

    pub fn ap_id(&self) -> u32 {
        self.ap_id
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.dim + col]
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        (0..self.dim).all(|i| (i..self.dim).all(|j| (self.get(i, j) - self.get(j, i).conj()).norm() <= tol))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `G x`.
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        debug_assert_eq!(x.len(), self.dim);
        self.data
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `xᴴ G x`, real for Hermitian `G`.
    pub fn quadratic_form(&self, x: &[Complex64]) -> f64 {
        self.apply(x).iter().zip(x).map(|(gx, xi)| (xi.conj() * gx).re).sum()
    }
}

/// Builds `Σ_n ξ_n h_n h_nᴴ` from the channels an AP sees.
///
/// With equal weights this is a positive multiple of the unweighted Gram
/// matrix, so the dominant eigenvector is the same.
pub fn build_gram(ap_id: u32, channels: &[ChannelVector], weights: &[f64]) -> Result<WeightedGram> {
    let dim = channels
        .first()
        .map(ChannelVector::len)
        .ok_or_else(|| invalid("no channels supplied"))?;
    if dim == 0 {
        return Err(invalid("channel vectors are empty"));
    }
    if channels.len() != weights.len() {
        return Err(invalid(format!(
            "{} channels but {} weights",
            channels.len(),
            weights.len()
        )));
    }
    if channels.iter().any(|h| h.len() != dim) {
        return Err(invalid("channel vectors differ in length"));
    }
    if weights.iter().any(|w| !(0.0..=1.0).contains(w)) {
        return Err(invalid("weights must lie in [0, 1]"));
    }
    let mut g = WeightedGram::zeros(ap_id, dim);
    for (h, &xi) in channels.iter().zip(weights) {
        if xi == 0.0 {
            continue;
        }
        let h = h.as_slice();
        for i in 0..dim {
            for j in 0..dim {
                g.data[i * dim + j] += h[i] * h[j].conj() * xi;
            }
        }
    }
    // exact Hermitian symmetry and a real diagonal
    for i in 0..dim {
        g.data[i * dim + i].im = 0.0;
        for j in (i + 1)..dim {
            let upper = g.data[i * dim + j];
            g.data[j * dim + i] = upper.conj();
        }
    }
    Ok(g)
}

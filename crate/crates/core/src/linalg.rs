//! Dense symmetric linear algebra: packed symmetric matrices and a cyclic
//! Jacobi eigensolver.
//!
//! Matrices of order `d` are stored as their upper triangle in row-major
//! order, `d(d+1)/2` entries: `(0,0), (0,1), .., (0,d-1), (1,1), (1,2), ..`.

use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};

/// Sweep limit for [`jacobi_eigh`].
pub const MAX_SWEEPS: usize = 100;

/// Off-diagonal entries below `SKIP_RTOL * ‖A‖_F` are treated as zero.
const SKIP_RTOL: f64 = 1e-14;

/// Real symmetric matrix in packed upper-triangular storage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSymmetric", into = "RawSymmetric")]
pub struct SymmetricMatrix {
    order: usize,
    upper: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct RawSymmetric {
    order: usize,
    upper: Vec<f64>,
}

impl TryFrom<RawSymmetric> for SymmetricMatrix {
    type Error = Error;

    fn try_from(raw: RawSymmetric) -> Result<Self> {
        SymmetricMatrix::from_packed(raw.order, raw.upper)
    }
}

impl From<SymmetricMatrix> for RawSymmetric {
    fn from(m: SymmetricMatrix) -> Self {
        RawSymmetric {
            order: m.order,
            upper: m.upper,
        }
    }
}

/// Number of packed entries for a symmetric matrix of order `d`.
pub fn packed_len(d: usize) -> usize {
    d * (d + 1) / 2
}

#[inline]
fn packed_index(d: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    // Rows 0..i hold d + (d-1) + .. + (d-i+1) entries.
    i * (2 * d - i + 1) / 2 + (j - i)
}

impl SymmetricMatrix {
    pub fn from_packed(order: usize, upper: Vec<f64>) -> Result<Self> {
        if order == 0 {
            return Err(shape("symmetric matrix order must be at least 1"));
        }
        if upper.len() != packed_len(order) {
            return Err(shape(format!(
                "packed symmetric matrix of order {order} needs {} entries, got {}",
                packed_len(order),
                upper.len()
            )));
        }
        if let Some(pos) = upper.iter().position(|v| !v.is_finite()) {
            return Err(shape(format!("non-finite matrix entry at packed index {pos}")));
        }
        Ok(Self { order, upper })
    }

    pub fn zeros(order: usize) -> Self {
        assert!(order >= 1, "symmetric matrix order must be at least 1");
        Self {
            order,
            upper: vec![0.0; packed_len(order)],
        }
    }

    pub fn identity(order: usize) -> Self {
        Self::from_diag(&vec![1.0; order])
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m.set(i, i, v);
        }
        m
    }

    /// Builds from a dense row-major matrix, averaging the two triangles.
    pub fn from_dense(order: usize, dense: &[f64]) -> Result<Self> {
        if dense.len() != order * order {
            return Err(shape(format!(
                "dense matrix of order {order} needs {} entries, got {}",
                order * order,
                dense.len()
            )));
        }
        let mut upper = Vec::with_capacity(packed_len(order));
        for i in 0..order {
            for j in i..order {
                upper.push(0.5 * (dense[i * order + j] + dense[j * order + i]));
            }
        }
        Self::from_packed(order, upper)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn packed(&self) -> &[f64] {
        &self.upper
    }

    pub fn packed_mut(&mut self) -> &mut [f64] {
        &mut self.upper
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[packed_index(self.order, i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        let idx = packed_index(self.order, i, j);
        self.upper[idx] = value;
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let d = self.order;
        let mut dense = vec![0.0; d * d];
        for i in 0..d {
            for j in 0..d {
                dense[i * d + j] = self.get(i, j);
            }
        }
        dense
    }

    pub fn trace(&self) -> f64 {
        (0..self.order).map(|i| self.get(i, i)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.upper.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn frobenius_norm(&self) -> f64 {
        let mut sum = 0.0;
        for i in 0..self.order {
            for j in i..self.order {
                let v = self.get(i, j);
                sum += if i == j { v * v } else { 2.0 * v * v };
            }
        }
        sum.sqrt()
    }

    /// `xᵀ A x`.
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let d = self.order;
        let mut acc = 0.0;
        for i in 0..d {
            acc += self.get(i, i) * x[i] * x[i];
            for j in (i + 1)..d {
                acc += 2.0 * self.get(i, j) * x[i] * x[j];
            }
        }
        acc
    }
}

/// Spectral decomposition `A = V diag(λ) Vᵀ` with eigenvalues in non-increasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenDecomposition {
    eigenvalues: Vec<f64>,
    /// Row-major `d × d`; column `i` is the eigenvector for `eigenvalues[i]`.
    vectors: Vec<f64>,
}

impl EigenDecomposition {
    /// Assembles a decomposition from eigenvalues and a row-major eigenvector matrix.
    pub fn new(eigenvalues: Vec<f64>, vectors: Vec<f64>) -> Result<Self> {
        let d = eigenvalues.len();
        if d == 0 || vectors.len() != d * d {
            return Err(shape(format!(
                "eigenvector matrix must be {d}x{d}, got {} entries",
                vectors.len()
            )));
        }
        Ok(Self { eigenvalues, vectors })
    }

    pub fn order(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Row-major eigenvector matrix.
    pub fn vectors(&self) -> &[f64] {
        &self.vectors
    }

    /// Eigenvector paired with eigenvalue `i`.
    pub fn vector(&self, i: usize) -> Vec<f64> {
        let d = self.order();
        (0..d).map(|r| self.vectors[r * d + i]).collect()
    }

    /// Same eigenvectors with a replaced spectrum.
    pub fn with_eigenvalues(&self, eigenvalues: Vec<f64>) -> Result<Self> {
        if eigenvalues.len() != self.order() {
            return Err(shape(format!(
                "spectrum length {} does not match order {}",
                eigenvalues.len(),
                self.order()
            )));
        }
        Ok(Self {
            eigenvalues,
            vectors: self.vectors.clone(),
        })
    }

    /// `max |VᵀV − I|`.
    pub fn orthonormality_error(&self) -> f64 {
        let d = self.order();
        let mut worst: f64 = 0.0;
        for a in 0..d {
            for b in 0..d {
                let dot: f64 = (0..d).map(|r| self.vectors[r * d + a] * self.vectors[r * d + b]).sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

/// Cyclic Jacobi eigensolver for a symmetric matrix.
///
/// Sweeps the strict upper triangle in row order, annihilating each
/// off-diagonal entry with one rotation, until the off-diagonal Frobenius
/// norm falls below `1e-14 ‖A‖_F`. Output is deterministic for a given input.
pub fn jacobi_eigh(matrix: &SymmetricMatrix) -> Result<EigenDecomposition> {
    let d = matrix.order();
    let mut a = matrix.to_dense();
    let mut v = vec![0.0; d * d];
    for i in 0..d {
        v[i * d + i] = 1.0;
    }

    let threshold = SKIP_RTOL * matrix.frobenius_norm();
    let mut converged = false;
    for _sweep in 0..MAX_SWEEPS {
        let off: f64 = (0..d)
            .flat_map(|p| ((p + 1)..d).map(move |q| (p, q)))
            .map(|(p, q)| 2.0 * a[p * d + q] * a[p * d + q])
            .sum::<f64>()
            .sqrt();
        if off <= threshold {
            converged = true;
            break;
        }
        let mut rotated = false;
        for p in 0..d {
            for q in (p + 1)..d {
                let apq = a[p * d + q];
                if apq.abs() <= threshold {
                    continue;
                }
                rotate(&mut a, &mut v, d, p, q);
                rotated = true;
            }
        }
        // Every entry below the skip threshold: nothing left to rotate.
        if !rotated {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::Numerical(format!(
            "Jacobi eigensolver did not converge within {MAX_SWEEPS} sweeps (order {d})"
        )));
    }

    let mut order: Vec<usize> = (0..d).collect();
    // Stable sort keeps the sweep order for equal eigenvalues.
    order.sort_by(|&i, &j| a[j * d + j].total_cmp(&a[i * d + i]));
    let eigenvalues = order.iter().map(|&i| a[i * d + i]).collect();
    let mut vectors = vec![0.0; d * d];
    for (col, &src) in order.iter().enumerate() {
        for r in 0..d {
            vectors[r * d + col] = v[r * d + src];
        }
    }
    Ok(EigenDecomposition { eigenvalues, vectors })
}

/// One Jacobi rotation zeroing `a[p][q]`; accumulates the rotation into `v`.
fn rotate(a: &mut [f64], v: &mut [f64], d: usize, p: usize, q: usize) {
    let apq = a[p * d + q];
    let app = a[p * d + p];
    let aqq = a[q * d + q];
    let theta = (aqq - app) / (2.0 * apq);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    // theta.signum() is 1.0 for +0.0, which picks the smaller rotation angle.
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    for k in 0..d {
        let akp = a[k * d + p];
        let akq = a[k * d + q];
        a[k * d + p] = c * akp - s * akq;
        a[k * d + q] = s * akp + c * akq;
    }
    for k in 0..d {
        let apk = a[p * d + k];
        let aqk = a[q * d + k];
        a[p * d + k] = c * apk - s * aqk;
        a[q * d + k] = s * apk + c * aqk;
    }
    a[p * d + q] = 0.0;
    a[q * d + p] = 0.0;

    for k in 0..d {
        let vkp = v[k * d + p];
        let vkq = v[k * d + q];
        v[k * d + p] = c * vkp - s * vkq;
        v[k * d + q] = s * vkp + c * vkq;
    }
}

/// `Σᵢ λᵢ vᵢ vᵢᵀ` in packed storage.
pub fn reconstruct(e: &EigenDecomposition) -> SymmetricMatrix {
    let d = e.order();
    let mut out = SymmetricMatrix::zeros(d);
    for i in 0..d {
        for j in i..d {
            let mut acc = 0.0;
            for (k, &lambda) in e.eigenvalues.iter().enumerate() {
                acc += lambda * e.vectors[i * d + k] * e.vectors[j * d + k];
            }
            out.set(i, j, acc);
        }
    }
    out
}

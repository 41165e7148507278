//! Points of the parameter inner-product space.
//!
//! A [`ParamVector`] is either a flat real vector (linear objectives) or a
//! pair `(A, b)` of a symmetric matrix and a vector (quadratic objectives).
//! Actions are stored by their feature embedding in the same space, so
//! [`FeatureVector`] shares the representation.
//!
//! The quadratic case uses `⟨(A, b), (M, v)⟩ = Tr(AM) + bᵀv`. With packed
//! symmetric storage that is a weighted dot product where every strict
//! off-diagonal entry counts twice; all linear arithmetic is elementwise on
//! the packed entries, so both variants share one code path.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{shape, Result};
use crate::linalg::{packed_len, SymmetricMatrix};

/// Which representation a vector (or a whole dataset) uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Flat,
    Quad,
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Variant::Flat => f.write_str("flat"),
            Variant::Quad => f.write_str("quad"),
        }
    }
}

/// Weight vector of a scalarized objective.
///
/// Serialized as a bare array for `Flat` and as `{"a": {...}, "b": [...]}` for `Quad`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, try_from = "RawParam")]
pub enum ParamVector {
    Flat(Vec<f64>),
    Quad { a: SymmetricMatrix, b: Vec<f64> },
}

/// Feature embedding `h(x)` of an action.
pub type FeatureVector = ParamVector;

#[derive(Deserialize)]
#[serde(untagged)]
enum RawParam {
    Flat(Vec<f64>),
    Quad { a: SymmetricMatrix, b: Vec<f64> },
}

impl TryFrom<RawParam> for ParamVector {
    type Error = crate::Error;

    fn try_from(raw: RawParam) -> Result<Self> {
        match raw {
            RawParam::Flat(v) => ParamVector::flat(v),
            RawParam::Quad { a, b } => ParamVector::quad(a, b),
        }
    }
}

fn check_finite(values: &[f64], what: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(i) => Err(shape(format!("{what} has non-finite entry at index {i}"))),
        None => Ok(()),
    }
}

impl ParamVector {
    pub fn flat(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(shape("flat vector must have dimension at least 1"));
        }
        check_finite(&values, "flat vector")?;
        Ok(ParamVector::Flat(values))
    }

    pub fn quad(a: SymmetricMatrix, b: Vec<f64>) -> Result<Self> {
        if a.order() != b.len() {
            return Err(shape(format!(
                "matrix block has order {} but vector block has length {}",
                a.order(),
                b.len()
            )));
        }
        check_finite(a.packed(), "matrix block")?;
        check_finite(&b, "vector block")?;
        Ok(ParamVector::Quad { a, b })
    }

    /// Zero vector with the same variant and dimension.
    pub fn zeros_like(&self) -> Self {
        match self {
            ParamVector::Flat(v) => ParamVector::Flat(vec![0.0; v.len()]),
            ParamVector::Quad { b, .. } => ParamVector::Quad {
                a: SymmetricMatrix::zeros(b.len()),
                b: vec![0.0; b.len()],
            },
        }
    }

    pub fn variant(&self) -> Variant {
        match self {
            ParamVector::Flat(_) => Variant::Flat,
            ParamVector::Quad { .. } => Variant::Quad,
        }
    }

    /// Dimension `d`: vector length for `Flat`, matrix order for `Quad`.
    pub fn dim(&self) -> usize {
        match self {
            ParamVector::Flat(v) => v.len(),
            ParamVector::Quad { b, .. } => b.len(),
        }
    }

    /// Number of stored reals.
    pub fn storage_len(&self) -> usize {
        match self {
            ParamVector::Flat(v) => v.len(),
            ParamVector::Quad { b, .. } => packed_len(b.len()) + b.len(),
        }
    }

    pub fn as_flat(&self) -> Option<&[f64]> {
        match self {
            ParamVector::Flat(v) => Some(v),
            ParamVector::Quad { .. } => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.entries().all(f64::is_finite)
    }

    /// Errors unless `other` has the same variant and dimension.
    pub fn check_compatible(&self, other: &ParamVector) -> Result<()> {
        if self.variant() != other.variant() {
            return Err(shape(format!(
                "variant mismatch: {} vs {}",
                self.variant(),
                other.variant()
            )));
        }
        if self.dim() != other.dim() {
            return Err(shape(format!("dimension mismatch: {} vs {}", self.dim(), other.dim())));
        }
        Ok(())
    }

    /// Stored reals with their inner-product weights (2 for strict off-diagonal entries).
    fn weighted_entries(&self) -> Box<dyn Iterator<Item = (f64, f64)> + '_> {
        match self {
            ParamVector::Flat(v) => Box::new(v.iter().map(|&x| (x, 1.0))),
            ParamVector::Quad { a, b } => {
                let d = a.order();
                let weights = (0..d).flat_map(move |i| (i..d).map(move |j| if i == j { 1.0 } else { 2.0 }));
                Box::new(
                    a.packed()
                        .iter()
                        .copied()
                        .zip(weights)
                        .chain(b.iter().map(|&x| (x, 1.0))),
                )
            }
        }
    }

    fn entries(&self) -> Box<dyn Iterator<Item = f64> + '_> {
        match self {
            ParamVector::Flat(v) => Box::new(v.iter().copied()),
            ParamVector::Quad { a, b } => Box::new(a.packed().iter().chain(b.iter()).copied()),
        }
    }

    fn entries_mut(&mut self) -> Box<dyn Iterator<Item = &mut f64> + '_> {
        match self {
            ParamVector::Flat(v) => Box::new(v.iter_mut()),
            ParamVector::Quad { a, b } => Box::new(a.packed_mut().iter_mut().chain(b.iter_mut())),
        }
    }

    /// Inner product of the space.
    pub fn dot(&self, other: &ParamVector) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self.dot_unchecked(other))
    }

    pub(crate) fn dot_unchecked(&self, other: &ParamVector) -> f64 {
        match (self, other) {
            (ParamVector::Flat(x), ParamVector::Flat(y)) => x.iter().zip(y).map(|(a, b)| a * b).sum(),
            _ => self
                .weighted_entries()
                .zip(other.entries())
                .map(|((x, w), y)| w * x * y)
                .sum(),
        }
    }

    /// Norm induced by the inner product (Frobenius on the matrix block).
    pub fn norm(&self) -> f64 {
        self.weighted_entries().map(|(x, w)| w * x * x).sum::<f64>().sqrt()
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &ParamVector) -> Result<()> {
        self.check_compatible(other)?;
        for (s, o) in self.entries_mut().zip(other.entries()) {
            *s += alpha * o;
        }
        Ok(())
    }

    pub fn add(&self, other: &ParamVector) -> Result<ParamVector> {
        let mut out = self.clone();
        out.axpy(1.0, other)?;
        Ok(out)
    }

    pub fn sub(&self, other: &ParamVector) -> Result<ParamVector> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    pub fn scale(&self, factor: f64) -> ParamVector {
        let mut out = self.clone();
        for s in out.entries_mut() {
            *s *= factor;
        }
        out
    }

    /// Largest absolute difference over stored entries.
    pub fn max_abs_diff(&self, other: &ParamVector) -> Result<f64> {
        self.check_compatible(other)?;
        Ok(self
            .entries()
            .zip(other.entries())
            .fold(0.0, |m, (x, y)| m.max((x - y).abs())))
    }

    /// Euclidean distance induced by the inner product.
    pub fn distance(&self, other: &ParamVector) -> Result<f64> {
        Ok(self.sub(other)?.norm())
    }

    /// Coordinates in an orthonormal basis: off-diagonal packed entries are scaled by √2,
    /// so the plain dot product of two such vectors equals [`ParamVector::dot`].
    pub fn to_isometric_flat(&self) -> Vec<f64> {
        self.weighted_entries().map(|(x, w)| x * w.sqrt()).collect()
    }
}

/// Bilinear pairing `⟨φ, h(x)⟩` between a parameter and a feature embedding.
pub fn inner_product(p: &ParamVector, f: &FeatureVector) -> Result<f64> {
    p.dot(f)
}

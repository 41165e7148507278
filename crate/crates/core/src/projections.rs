//! Euclidean projections onto the shipped parameter spaces, feasible-point
//! samplers, and the variational-inequality certificate used to test them.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};
use crate::linalg::{jacobi_eigh, reconstruct, SymmetricMatrix};
use crate::vector::{ParamVector, Variant};

/// Closed convex parameter set `Φ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ParamSpace {
    /// Probability simplex `Δᵈ` (flat).
    Simplex { dim: usize },
    /// Box `[-b0, b0]ᵈ` (flat).
    Box { dim: usize, b0: f64 },
    /// Spectrahedron `Γᵈ` for the matrix block with the vector block fixed at zero (quad).
    Spectrahedron { dim: usize },
    /// `Γᵈ × [-b0, b0]ᵈ` (quad).
    QuadProduct { dim: usize, b0: f64 },
}

impl ParamSpace {
    pub fn dim(&self) -> usize {
        match *self {
            ParamSpace::Simplex { dim }
            | ParamSpace::Box { dim, .. }
            | ParamSpace::Spectrahedron { dim }
            | ParamSpace::QuadProduct { dim, .. } => dim,
        }
    }

    pub fn variant(&self) -> Variant {
        match self {
            ParamSpace::Simplex { .. } | ParamSpace::Box { .. } => Variant::Flat,
            ParamSpace::Spectrahedron { .. } | ParamSpace::QuadProduct { .. } => Variant::Quad,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.dim() == 0 {
            return Err(Error::Config("parameter space dimension must be at least 1".into()));
        }
        match *self {
            ParamSpace::Box { b0, .. } | ParamSpace::QuadProduct { b0, .. } if !(b0 > 0.0 && b0.is_finite()) => {
                Err(Error::Config(format!("box half-width b0 must be positive, got {b0}")))
            }
            _ => Ok(()),
        }
    }

    /// Euclidean diameter of the set.
    pub fn diameter(&self) -> f64 {
        match *self {
            ParamSpace::Simplex { .. } | ParamSpace::Spectrahedron { .. } => 2f64.sqrt(),
            ParamSpace::Box { dim, b0 } => 2.0 * b0 * (dim as f64).sqrt(),
            ParamSpace::QuadProduct { dim, b0 } => (2.0 + 4.0 * dim as f64 * b0 * b0).sqrt(),
        }
    }

    /// A deterministic interior-ish starting point: the barycenter of `Δᵈ`,
    /// `I/d` for the spectrahedron, zero for boxes.
    pub fn center(&self) -> ParamVector {
        let d = self.dim();
        match self {
            ParamSpace::Simplex { .. } => ParamVector::Flat(vec![1.0 / d as f64; d]),
            ParamSpace::Box { .. } => ParamVector::Flat(vec![0.0; d]),
            ParamSpace::Spectrahedron { .. } | ParamSpace::QuadProduct { .. } => ParamVector::Quad {
                a: SymmetricMatrix::from_diag(&vec![1.0 / d as f64; d]),
                b: vec![0.0; d],
            },
        }
    }

    /// Default space for a dataset of the given variant.
    pub fn default_for(variant: Variant, dim: usize) -> Self {
        match variant {
            Variant::Flat => ParamSpace::Simplex { dim },
            Variant::Quad => ParamSpace::QuadProduct { dim, b0: 1.0 },
        }
    }
}

impl fmt::Display for ParamSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParamSpace::Simplex { dim } => write!(f, "simplex:{dim}"),
            ParamSpace::Box { dim, b0 } => write!(f, "box:{dim}:{b0}"),
            ParamSpace::Spectrahedron { dim } => write!(f, "spectrahedron:{dim}"),
            ParamSpace::QuadProduct { dim, b0 } => write!(f, "quad:{dim}:{b0}"),
        }
    }
}

impl FromStr for ParamSpace {
    type Err = Error;

    /// Parses `simplex:D`, `box:D:B0`, `spectrahedron:D` or `quad:D:B0`.
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = || Error::Config(format!("cannot parse parameter space {s:?}"));
        let dim = |i: usize| parts.get(i).and_then(|p| p.parse::<usize>().ok()).ok_or_else(bad);
        let b0 = |i: usize| parts.get(i).and_then(|p| p.parse::<f64>().ok()).ok_or_else(bad);
        let space = match (parts[0], parts.len()) {
            ("simplex", 2) => ParamSpace::Simplex { dim: dim(1)? },
            ("box", 3) => ParamSpace::Box {
                dim: dim(1)?,
                b0: b0(2)?,
            },
            ("spectrahedron", 2) => ParamSpace::Spectrahedron { dim: dim(1)? },
            ("quad", 3) => ParamSpace::QuadProduct {
                dim: dim(1)?,
                b0: b0(2)?,
            },
            _ => return Err(bad()),
        };
        space.validate()?;
        Ok(space)
    }
}

/// Projection onto the probability simplex by the sort-and-threshold method.
pub fn project_simplex(v: &[f64]) -> Result<Vec<f64>> {
    if v.is_empty() {
        return Err(shape("cannot project an empty vector onto the simplex"));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(shape("simplex projection input has non-finite entries"));
    }
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.total_cmp(a));

    // Largest rho with u_rho + (1 - sum_{i<=rho} u_i) / rho > 0; rho = 1 always qualifies.
    let mut prefix = 0.0;
    let mut shift = 1.0 - u[0];
    for (i, &ui) in u.iter().enumerate() {
        prefix += ui;
        let candidate = (1.0 - prefix) / (i + 1) as f64;
        if ui + candidate > 0.0 {
            shift = candidate;
        }
    }

    let mut out: Vec<f64> = v.iter().map(|&x| (x + shift).max(0.0)).collect();
    let total: f64 = out.iter().sum();
    if total > 0.0 && total != 1.0 {
        out.iter_mut().for_each(|x| *x /= total);
    }
    Ok(out)
}

/// Componentwise clamp to `[-b0, b0]`.
pub fn project_box(v: &[f64], b0: f64) -> Result<Vec<f64>> {
    if v.iter().any(|x| x.is_nan()) {
        return Err(shape("box projection input has NaN entries"));
    }
    Ok(v.iter().map(|&x| x.min(b0).max(-b0)).collect())
}

/// Projection onto `Γᵈ = {A ⪰ 0, Tr A = 1}`: project the spectrum onto the simplex.
pub fn project_spectrahedron(a: &SymmetricMatrix) -> Result<SymmetricMatrix> {
    let eig = jacobi_eigh(a)?;
    let mu = project_simplex(eig.eigenvalues())?;
    Ok(reconstruct(&eig.with_eigenvalues(mu)?))
}

fn check_space(p: &ParamVector, space: &ParamSpace) -> Result<()> {
    if p.variant() != space.variant() || p.dim() != space.dim() {
        return Err(shape(format!(
            "{} vector of dimension {} does not belong to space {space}",
            p.variant(),
            p.dim()
        )));
    }
    Ok(())
}

/// Projection onto `space`, dispatched to the component projections.
pub fn project_param(p: &ParamVector, space: &ParamSpace) -> Result<ParamVector> {
    check_space(p, space)?;
    match (p, *space) {
        (ParamVector::Flat(v), ParamSpace::Simplex { .. }) => Ok(ParamVector::Flat(project_simplex(v)?)),
        (ParamVector::Flat(v), ParamSpace::Box { b0, .. }) => Ok(ParamVector::Flat(project_box(v, b0)?)),
        (ParamVector::Quad { a, b }, ParamSpace::Spectrahedron { .. }) => Ok(ParamVector::Quad {
            a: project_spectrahedron(a)?,
            b: vec![0.0; b.len()],
        }),
        (ParamVector::Quad { a, b }, ParamSpace::QuadProduct { b0, .. }) => Ok(ParamVector::Quad {
            a: project_spectrahedron(a)?,
            b: project_box(b, b0)?,
        }),
        _ => unreachable!("variant checked above"),
    }
}

/// Distance-free membership test: `‖Proj(p) − p‖_max ≤ tol`.
pub fn is_feasible(p: &ParamVector, space: &ParamSpace, tol: f64) -> Result<bool> {
    let proj = project_param(p, space)?;
    Ok(proj.max_abs_diff(p)? <= tol)
}

/// Uniform point of the simplex (normalized exponentials).
pub fn sample_simplex<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    let draws: Vec<f64> = (0..dim).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = draws.iter().sum();
    draws.into_iter().map(|x| x / total).collect()
}

/// Random orthogonal matrix (row-major) from Gram–Schmidt on a Gaussian matrix.
pub fn random_orthogonal<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(dim);
        let mut degenerate = false;
        for _ in 0..dim {
            let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
            // Two passes of modified Gram-Schmidt keep the basis orthonormal to rounding.
            for _ in 0..2 {
                for c in &cols {
                    let proj: f64 = v.iter().zip(c).map(|(x, y)| x * y).sum();
                    v.iter_mut().zip(c).for_each(|(x, y)| *x -= proj * y);
                }
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-8 {
                degenerate = true;
                break;
            }
            v.iter_mut().for_each(|x| *x /= norm);
            cols.push(v);
        }
        if degenerate {
            continue;
        }
        let mut out = vec![0.0; dim * dim];
        for (j, c) in cols.iter().enumerate() {
            for (i, &x) in c.iter().enumerate() {
                out[i * dim + j] = x;
            }
        }
        return out;
    }
}

/// Random point of `Γᵈ`: random orthogonal basis with a simplex-uniform spectrum.
pub fn sample_spectrahedron<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> SymmetricMatrix {
    let basis = random_orthogonal(dim, rng);
    let spectrum = sample_simplex(dim, rng);
    let mut m = SymmetricMatrix::zeros(dim);
    for i in 0..dim {
        for j in i..dim {
            let v: f64 = (0..dim)
                .map(|k| spectrum[k] * basis[i * dim + k] * basis[j * dim + k])
                .sum();
            m.set(i, j, v);
        }
    }
    m
}

/// Random feasible point of `space`.
pub fn sample_feasible<R: Rng + ?Sized>(space: &ParamSpace, rng: &mut R) -> ParamVector {
    let d = space.dim();
    match *space {
        ParamSpace::Simplex { .. } => ParamVector::Flat(sample_simplex(d, rng)),
        ParamSpace::Box { b0, .. } => ParamVector::Flat((0..d).map(|_| rng.random_range(-b0..=b0)).collect()),
        ParamSpace::Spectrahedron { .. } => ParamVector::Quad {
            a: sample_spectrahedron(d, rng),
            b: vec![0.0; d],
        },
        ParamSpace::QuadProduct { b0, .. } => ParamVector::Quad {
            a: sample_spectrahedron(d, rng),
            b: (0..d).map(|_| rng.random_range(-b0..=b0)).collect(),
        },
    }
}

/// Largest violation of the projection characterization
/// `⟨y − p, x − p⟩ ≤ 0` over `trials` random feasible points `y`.
///
/// Returns `-inf` when `trials` is zero.
pub fn vi_certificate(
    x: &ParamVector,
    p: &ParamVector,
    space: &ParamSpace,
    trials: usize,
    rng_seed: u64,
) -> Result<f64> {
    check_space(x, space)?;
    check_space(p, space)?;
    let residual = x.sub(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..trials {
        let y = sample_feasible(space, &mut rng);
        worst = worst.max(y.sub(p)?.dot(&residual)?);
    }
    Ok(worst)
}

//! Exact forward solvers: `a(φ, s) ∈ argmax_{h(x) ∈ h(X(s))} ⟨φ, h(x)⟩`.
//!
//! Every solver breaks ties deterministically. Candidates whose score is
//! within `TIE_RTOL` (relative to the score magnitude) of the best score are
//! treated as tied, and the lowest index wins; for knapsack the selection
//! whose 0/1 indicator vector is lexicographically smallest wins, i.e.
//! earlier items are left out whenever an equally good selection exists.
//! The relative tolerance keeps the chosen witness unchanged when `φ` is
//! scaled by a positive factor.

use serde::{Deserialize, Serialize};

use crate::dataset::{KnapsackItem, ProblemSpec};
use crate::error::{shape, Error, Result};
use crate::linalg::SymmetricMatrix;
use crate::vector::{FeatureVector, ParamVector};

/// Relative tie tolerance for argmax selection.
pub const TIE_RTOL: f64 = 1e-14;

/// DP tables larger than this many cells are refused.
const MAX_DP_CELLS: usize = 50_000_000;

/// Which element of the feasible set was chosen.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// Index into a finite feature list.
    Index { index: usize },
    /// Selected knapsack items, ascending.
    Selection { items: Vec<usize> },
    /// Index into a polytope vertex list.
    Vertex { index: usize },
    /// Index into a QP candidate list, with the raw point.
    Point { index: usize, x: Vec<f64> },
}

/// Output of a forward solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    /// Embedding `h(x*)` of the chosen maximizer.
    pub feature: FeatureVector,
    /// `⟨φ, feature⟩`.
    pub value: f64,
    pub witness: Witness,
}

/// A forward solver usable by the learner. Closures with the right signature qualify.
pub trait ForwardSolver: Sync {
    fn solve(&self, phi: &ParamVector, problem: &ProblemSpec) -> Result<SolveResult>;
}

/// The exact solvers of this module.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExactSolver;

impl ForwardSolver for ExactSolver {
    fn solve(&self, phi: &ParamVector, problem: &ProblemSpec) -> Result<SolveResult> {
        solve(phi, problem)
    }
}

impl<F> ForwardSolver for F
where
    F: Fn(&ParamVector, &ProblemSpec) -> Result<SolveResult> + Sync,
{
    fn solve(&self, phi: &ParamVector, problem: &ProblemSpec) -> Result<SolveResult> {
        self(phi, problem)
    }
}

/// Solves the forward problem for any [`ProblemSpec`] variant.
pub fn solve(phi: &ParamVector, problem: &ProblemSpec) -> Result<SolveResult> {
    match problem {
        ProblemSpec::FiniteSet { features } => solve_finite_set(phi, features),
        ProblemSpec::Knapsack {
            items,
            capacity,
            resolution,
        } => {
            let weights = flat_phi(phi, "knapsack")?;
            solve_knapsack(weights, items, *capacity, *resolution)
        }
        ProblemSpec::VertexPolytope { vertices } => solve_vertex_lp(flat_phi(phi, "vertex polytope")?, vertices),
        ProblemSpec::QpCandidates { points } => solve_qp_candidates(phi, points),
    }
}

fn flat_phi<'a>(phi: &'a ParamVector, what: &str) -> Result<&'a [f64]> {
    phi.as_flat()
        .ok_or_else(|| shape(format!("{what} problems need a flat parameter vector")))
}

/// First index whose value is within the tie tolerance of the maximum.
fn argmax_first(values: &[f64]) -> Option<usize> {
    let best = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = TIE_RTOL * scale;
    values.iter().position(|&v| v >= best - tol)
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

fn check_len(got: usize, want: usize, what: &str, index: usize) -> Result<()> {
    if got != want {
        return Err(shape(format!("{what} {index} has length {got}, expected {want}")));
    }
    Ok(())
}

/// Argmax over an explicit list of feature vectors.
pub fn solve_finite_set(phi: &ParamVector, features: &[FeatureVector]) -> Result<SolveResult> {
    if features.is_empty() {
        return Err(shape("finite feature set is empty"));
    }
    let values = features.iter().map(|f| phi.dot(f)).collect::<Result<Vec<_>>>()?;
    let index = argmax_first(&values).expect("nonempty");
    Ok(SolveResult {
        feature: features[index].clone(),
        value: values[index],
        witness: Witness::Index { index },
    })
}

/// Argmax of a linear objective over a polytope given by its vertex list.
pub fn solve_vertex_lp(phi: &[f64], vertices: &[Vec<f64>]) -> Result<SolveResult> {
    if vertices.is_empty() {
        return Err(shape("vertex list is empty"));
    }
    for (i, v) in vertices.iter().enumerate() {
        check_len(v.len(), phi.len(), "vertex", i)?;
    }
    let values: Vec<f64> = vertices.iter().map(|v| dot(phi, v)).collect();
    let index = argmax_first(&values).expect("nonempty");
    Ok(SolveResult {
        feature: ParamVector::Flat(vertices[index].clone()),
        value: values[index],
        witness: Witness::Vertex { index },
    })
}

/// Integer weights and capacity for the DP, reduced by the common divisor of the weights.
pub(crate) fn integerize(items: &[KnapsackItem], capacity: f64, resolution: f64) -> Result<(Vec<usize>, usize)> {
    if !(resolution > 0.0 && resolution.is_finite()) {
        return Err(Error::Config(format!(
            "knapsack resolution must be positive, got {resolution}"
        )));
    }
    if !(capacity >= 0.0 && capacity.is_finite()) {
        return Err(Error::Config(format!(
            "knapsack capacity must be nonnegative, got {capacity}"
        )));
    }
    let mut weights = Vec::with_capacity(items.len());
    for (i, item) in items.iter().enumerate() {
        let scaled = item.weight / resolution;
        let rounded = scaled.round();
        if item.weight.is_nan()
            || item.weight < 0.0
            || (scaled - rounded).abs() > 1e-6 * rounded.max(1.0)
            || rounded > u32::MAX as f64
        {
            return Err(Error::Config(format!(
                "knapsack item {i} weight {} is not a nonnegative multiple of the resolution {resolution}",
                item.weight
            )));
        }
        weights.push(rounded as usize);
    }
    let scaled_cap = (capacity / resolution + 1e-6).floor();
    if scaled_cap > u32::MAX as f64 {
        return Err(Error::Config(format!(
            "knapsack capacity {capacity} too large at resolution {resolution}"
        )));
    }
    let mut cap = scaled_cap as usize;
    let divisor = weights.iter().copied().filter(|&w| w > 0).fold(0, gcd);
    if divisor > 1 {
        weights.iter_mut().for_each(|w| *w /= divisor);
        cap /= divisor;
    }
    // Items heavier than the capacity can never be selected; the DP never indexes past cap.
    let max_useful = weights.iter().copied().filter(|&w| w <= cap).sum::<usize>();
    Ok((weights, cap.min(max_useful)))
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Exact 0/1 knapsack maximizing `Σ ⟨φ, fᵢ⟩` over selections with `Σ wᵢ ≤ capacity`.
///
/// Weights are scaled by `1/resolution` and must be integral there. The
/// dynamic program runs backwards over items so the forward reconstruction
/// can prefer leaving each item out.
pub fn solve_knapsack(phi: &[f64], items: &[KnapsackItem], capacity: f64, resolution: f64) -> Result<SolveResult> {
    for (i, item) in items.iter().enumerate() {
        check_len(item.feature.len(), phi.len(), "knapsack item", i)?;
    }
    let (weights, cap) = integerize(items, capacity, resolution)?;
    let n = items.len();
    let width = cap + 1;
    if (n + 1).saturating_mul(width) > MAX_DP_CELLS {
        return Err(Error::Config(format!(
            "knapsack DP table of {} x {width} cells exceeds the limit; coarsen the resolution",
            n + 1
        )));
    }
    let values: Vec<f64> = items.iter().map(|it| dot(phi, &it.feature)).collect();
    let tol = TIE_RTOL * values.iter().map(|v| v.abs()).sum::<f64>();

    // best[i * width + c]: optimum over items i.. with capacity c.
    let mut best = vec![0.0_f64; (n + 1) * width];
    for i in (0..n).rev() {
        let (head, tail) = best.split_at_mut((i + 1) * width);
        let row = &mut head[i * width..];
        let next = &tail[..width];
        for c in 0..width {
            let skip = next[c];
            row[c] = if weights[i] <= c {
                skip.max(values[i] + next[c - weights[i]])
            } else {
                skip
            };
        }
    }

    let mut selection = Vec::new();
    let mut c = cap;
    for i in 0..n {
        let next = &best[(i + 1) * width..(i + 2) * width];
        if weights[i] <= c && values[i] + next[c - weights[i]] > next[c] + tol {
            selection.push(i);
            c -= weights[i];
        }
    }

    let mut feature = vec![0.0; phi.len()];
    for &i in &selection {
        feature.iter_mut().zip(&items[i].feature).for_each(|(f, x)| *f += x);
    }
    let value = dot(phi, &feature);
    Ok(SolveResult {
        feature: ParamVector::Flat(feature),
        value,
        witness: Witness::Selection { items: selection },
    })
}

/// Quadratic embedding `h(x) = (−xxᵀ, −x)`, so `⟨(A, b), h(x)⟩ = −xᵀAx − bᵀx`.
pub fn embed_qp(x: &[f64]) -> Result<FeatureVector> {
    if x.is_empty() {
        return Err(shape("cannot embed an empty point"));
    }
    let d = x.len();
    let mut m = SymmetricMatrix::zeros(d);
    for i in 0..d {
        for j in i..d {
            m.set(i, j, -x[i] * x[j]);
        }
    }
    ParamVector::quad(m, x.iter().map(|v| -v).collect())
}

/// Maximizes the concave quadratic `−xᵀAx − bᵀx` over an explicit candidate list.
pub fn solve_qp_candidates(phi: &ParamVector, points: &[Vec<f64>]) -> Result<SolveResult> {
    let ParamVector::Quad { a, b } = phi else {
        return Err(shape("QP candidate problems need a quad parameter vector"));
    };
    if points.is_empty() {
        return Err(shape("QP candidate list is empty"));
    }
    for (i, x) in points.iter().enumerate() {
        check_len(x.len(), b.len(), "QP candidate", i)?;
    }
    let values: Vec<f64> = points.iter().map(|x| -a.quadratic_form(x) - dot(b, x)).collect();
    let index = argmax_first(&values).expect("nonempty");
    let feature = embed_qp(&points[index])?;
    let value = phi.dot(&feature)?;
    Ok(SolveResult {
        feature,
        value,
        witness: Witness::Point {
            index,
            x: points[index].clone(),
        },
    })
}

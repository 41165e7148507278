//! Expert demonstrations: forward-problem descriptions, samples, datasets,
//! feasibility validation and the JSON file format.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::projections::ParamSpace;
use crate::solvers::{embed_qp, integerize};
use crate::vector::{FeatureVector, ParamVector, Variant};

/// Matching tolerance for expert features against the feasible set.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// Knapsack instances with more items than this are not checked exhaustively.
pub const MAX_BRUTE_FORCE_ITEMS: usize = 20;

fn default_resolution() -> f64 {
    1e-3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KnapsackItem {
    pub feature: Vec<f64>,
    pub weight: f64,
}

/// The feasible set `X(s)` of one state, in finite form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    /// Explicit list of reachable feature vectors.
    FiniteSet { features: Vec<FeatureVector> },
    /// 0/1 knapsack; weights must be multiples of `resolution`.
    Knapsack {
        items: Vec<KnapsackItem>,
        capacity: f64,
        #[serde(default = "default_resolution")]
        resolution: f64,
    },
    /// Polytope given by its vertices (linear objectives peak at a vertex).
    VertexPolytope { vertices: Vec<Vec<f64>> },
    /// Candidate points of a quadratic program; features are `embed_qp(x)`.
    QpCandidates { points: Vec<Vec<f64>> },
}

impl ProblemSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ProblemSpec::FiniteSet { .. } => "finite_set",
            ProblemSpec::Knapsack { .. } => "knapsack",
            ProblemSpec::VertexPolytope { .. } => "vertex_polytope",
            ProblemSpec::QpCandidates { .. } => "qp_candidates",
        }
    }

    /// Checks the structural invariants against a dataset's variant and dimension.
    pub fn check(&self, variant: Variant, dim: usize) -> std::result::Result<(), String> {
        let need_variant = |want: Variant| {
            if variant == want {
                Ok(())
            } else {
                Err(format!(
                    "{} problems require a {want} dataset, found {variant}",
                    self.kind()
                ))
            }
        };
        let check_lengths = |rows: &[Vec<f64>], what: &str| {
            if rows.is_empty() {
                return Err(format!("{what} list must be nonempty"));
            }
            for (i, r) in rows.iter().enumerate() {
                if r.len() != dim {
                    return Err(format!("{what} {i} has length {}, expected {dim}", r.len()));
                }
                if r.iter().any(|x| !x.is_finite()) {
                    return Err(format!("{what} {i} has non-finite entries"));
                }
            }
            Ok(())
        };
        match self {
            ProblemSpec::FiniteSet { features } => {
                if features.is_empty() {
                    return Err("feature list must be nonempty".into());
                }
                for (i, f) in features.iter().enumerate() {
                    if f.variant() != variant || f.dim() != dim {
                        return Err(format!(
                            "feature {i} is {} of dimension {}, expected {variant} of dimension {dim}",
                            f.variant(),
                            f.dim()
                        ));
                    }
                }
                Ok(())
            }
            ProblemSpec::Knapsack {
                items,
                capacity,
                resolution,
            } => {
                need_variant(Variant::Flat)?;
                if !(*capacity >= 0.0 && capacity.is_finite()) {
                    return Err(format!("capacity must be nonnegative, got {capacity}"));
                }
                if !(*resolution > 0.0 && resolution.is_finite()) {
                    return Err(format!("resolution must be positive, got {resolution}"));
                }
                for (i, item) in items.iter().enumerate() {
                    if !(item.weight >= 0.0 && item.weight.is_finite()) {
                        return Err(format!("item {i} weight must be nonnegative, got {}", item.weight));
                    }
                }
                if !items.is_empty() {
                    let features: Vec<Vec<f64>> = items.iter().map(|it| it.feature.clone()).collect();
                    check_lengths(&features, "item feature")?;
                }
                Ok(())
            }
            ProblemSpec::VertexPolytope { vertices } => {
                need_variant(Variant::Flat)?;
                check_lengths(vertices, "vertex")
            }
            ProblemSpec::QpCandidates { points } => {
                need_variant(Variant::Quad)?;
                check_lengths(points, "candidate point")
            }
        }
    }
}

/// One expert demonstration `(s, a)` with the action stored as its feature embedding.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub state_id: String,
    pub problem: ProblemSpec,
    pub expert_feature: FeatureVector,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Metadata {
    pub seed: Option<u64>,
    #[serde(default)]
    pub generator: String,
    /// Hidden weights used to produce synthetic expert actions.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi0: Option<ParamVector>,
    /// Parameter space the data was generated for.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub space: Option<ParamSpace>,
    /// Samples whose expert action was accepted without an exhaustive feasibility check.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub unverified_samples: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub dim: usize,
    pub variant: Variant,
    pub metadata: Metadata,
    pub samples: Vec<Sample>,
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Structural invariants: nonempty, consistent variant and dimension everywhere.
    pub fn check_structure(&self) -> Result<()> {
        let parse_err = |context: String, message: String| Error::Parse { context, message };
        if self.samples.is_empty() {
            return Err(parse_err("samples".into(), "dataset must be nonempty".into()));
        }
        if self.dim == 0 {
            return Err(parse_err("dim".into(), "dimension must be at least 1".into()));
        }
        if let Some(phi0) = &self.metadata.phi0 {
            if phi0.variant() != self.variant || phi0.dim() != self.dim {
                return Err(parse_err(
                    "metadata.phi0".into(),
                    format!("expected {} vector of dimension {}", self.variant, self.dim),
                ));
            }
        }
        if let Some(space) = &self.metadata.space {
            if space.variant() != self.variant || space.dim() != self.dim {
                return Err(parse_err(
                    "metadata.space".into(),
                    format!(
                        "space {space} does not match {} dataset of dimension {}",
                        self.variant, self.dim
                    ),
                ));
            }
        }
        for (i, s) in self.samples.iter().enumerate() {
            let f = &s.expert_feature;
            if f.variant() != self.variant || f.dim() != self.dim {
                return Err(parse_err(
                    format!("samples[{i}].expert_feature"),
                    format!(
                        "found {} of dimension {}, dataset is {} of dimension {}",
                        f.variant(),
                        f.dim(),
                        self.variant,
                        self.dim
                    ),
                ));
            }
            s.problem
                .check(self.variant, self.dim)
                .map_err(|m| parse_err(format!("samples[{i}].problem"), m))?;
        }
        Ok(())
    }
}

fn within(a: &ParamVector, b: &ParamVector) -> bool {
    a.max_abs_diff(b).map(|d| d <= MEMBERSHIP_TOL).unwrap_or(false)
}

fn flat_within(a: &[f64], b: &ParamVector) -> bool {
    match b.as_flat() {
        Some(b) => a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= MEMBERSHIP_TOL),
        None => false,
    }
}

/// Exhaustive search for a feasible selection whose feature sum equals `target`.
fn knapsack_reaches(items: &[KnapsackItem], weights: &[usize], cap: usize, target: &[f64]) -> bool {
    fn dfs(
        i: usize,
        items: &[KnapsackItem],
        weights: &[usize],
        room: usize,
        acc: &mut Vec<f64>,
        target: &[f64],
    ) -> bool {
        if i == items.len() {
            return acc.iter().zip(target).all(|(x, y)| (x - y).abs() <= MEMBERSHIP_TOL);
        }
        if dfs(i + 1, items, weights, room, acc, target) {
            return true;
        }
        if weights[i] <= room {
            let saved = acc.clone();
            acc.iter_mut().zip(&items[i].feature).for_each(|(a, f)| *a += f);
            let hit = dfs(i + 1, items, weights, room - weights[i], acc, target);
            *acc = saved;
            return hit;
        }
        false
    }
    let mut acc = vec![0.0; target.len()];
    dfs(0, items, weights, cap, &mut acc, target)
}

/// Checks structure and that every expert action is attainable in its problem.
///
/// Knapsack instances above [`MAX_BRUTE_FORCE_ITEMS`] items are accepted
/// unchecked and listed in `metadata.unverified_samples`.
pub fn validate_dataset(mut data: Dataset) -> Result<Dataset> {
    data.check_structure().map_err(|e| match e {
        Error::Parse { context, message } => Error::Validation {
            index: sample_index(&context).unwrap_or(0),
            reason: format!("{context}: {message}"),
        },
        other => other,
    })?;
    let mut unverified = Vec::new();
    for (index, s) in data.samples.iter().enumerate() {
        let target = &s.expert_feature;
        let feasible = match &s.problem {
            ProblemSpec::FiniteSet { features } => features.iter().any(|f| within(f, target)),
            ProblemSpec::VertexPolytope { vertices } => vertices.iter().any(|v| flat_within(v, target)),
            ProblemSpec::QpCandidates { points } => points
                .iter()
                .any(|x| embed_qp(x).map(|f| within(&f, target)).unwrap_or(false)),
            ProblemSpec::Knapsack {
                items,
                capacity,
                resolution,
            } => {
                if items.len() > MAX_BRUTE_FORCE_ITEMS {
                    unverified.push(index);
                    true
                } else {
                    let (weights, cap) = integerize(items, *capacity, *resolution).map_err(|e| Error::Validation {
                        index,
                        reason: e.to_string(),
                    })?;
                    knapsack_reaches(items, &weights, cap, target.as_flat().expect("flat checked"))
                }
            }
        };
        if !feasible {
            return Err(Error::Validation {
                index,
                reason: format!(
                    "expert action of state {:?} is not attainable in its {} problem",
                    s.state_id,
                    s.problem.kind()
                ),
            });
        }
    }
    data.metadata.unverified_samples = unverified;
    Ok(data)
}

fn sample_index(context: &str) -> Option<usize> {
    let rest = context.strip_prefix("samples[")?;
    rest[..rest.find(']')?].parse().ok()
}

/// Pretty-printed JSON. Floats are written in shortest round-trip form.
pub fn serialize_dataset(data: &Dataset) -> Result<String> {
    serde_json::to_string_pretty(data).map_err(|e| Error::Parse {
        context: "dataset".into(),
        message: e.to_string(),
    })
}

/// Parses dataset JSON and checks its structural invariants.
pub fn parse_dataset(text: &str) -> Result<Dataset> {
    let data: Dataset = serde_json::from_str(text).map_err(|e| Error::Parse {
        context: format!("line {} column {}", e.line(), e.column()),
        message: e.to_string(),
    })?;
    data.check_structure()?;
    Ok(data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::SymmetricMatrix;

    fn flat(v: &[f64]) -> ParamVector {
        ParamVector::Flat(v.to_vec())
    }

    fn one_sample(problem: ProblemSpec, expert: ParamVector) -> Dataset {
        Dataset {
            dim: expert.dim(),
            variant: expert.variant(),
            metadata: Metadata::default(),
            samples: vec![Sample {
                state_id: "s0".into(),
                problem,
                expert_feature: expert,
            }],
        }
    }

    fn two_points() -> ProblemSpec {
        ProblemSpec::FiniteSet {
            features: vec![flat(&[1.0, 0.0]), flat(&[0.0, 1.0])],
        }
    }

    fn three_items() -> ProblemSpec {
        let item = |f: &[f64]| KnapsackItem {
            feature: f.to_vec(),
            weight: 2.0,
        };
        ProblemSpec::Knapsack {
            items: vec![item(&[3.0, 1.0]), item(&[2.0, 2.0]), item(&[1.0, 3.0])],
            capacity: 4.0,
            resolution: 1e-3,
        }
    }

    #[test]
    fn finite_set_membership() {
        assert!(validate_dataset(one_sample(two_points(), flat(&[1.0, 0.0]))).is_ok());
        let err = validate_dataset(one_sample(two_points(), flat(&[2.0, 2.0]))).unwrap_err();
        assert!(matches!(err, Error::Validation { index: 0, .. }));
    }

    #[test]
    fn knapsack_membership_by_brute_force() {
        assert!(validate_dataset(one_sample(three_items(), flat(&[5.0, 3.0]))).is_ok());
        // {0,1,2} has the right sum but exceeds the capacity.
        assert!(validate_dataset(one_sample(three_items(), flat(&[6.0, 6.0]))).is_err());
        assert!(validate_dataset(one_sample(three_items(), flat(&[0.0, 0.0]))).is_ok());
    }

    #[test]
    fn large_knapsack_is_flagged_not_checked() {
        let items = (0..21)
            .map(|_| KnapsackItem {
                feature: vec![1.0],
                weight: 1.0,
            })
            .collect();
        let problem = ProblemSpec::Knapsack {
            items,
            capacity: 3.0,
            resolution: 1.0,
        };
        let data = validate_dataset(one_sample(problem, flat(&[100.0]))).unwrap();
        assert_eq!(data.metadata.unverified_samples, vec![0]);
    }

    #[test]
    fn qp_and_vertex_membership() {
        let problem = ProblemSpec::QpCandidates {
            points: vec![vec![0.0, 0.0], vec![1.0, -1.0]],
        };
        let expert = embed_qp(&[1.0, -1.0]).unwrap();
        assert!(validate_dataset(one_sample(problem.clone(), expert)).is_ok());
        let off = embed_qp(&[1.0, 1.0]).unwrap();
        assert!(validate_dataset(one_sample(problem, off)).is_err());

        let square = ProblemSpec::VertexPolytope {
            vertices: vec![vec![0.0, 0.0], vec![1.0, 1.0]],
        };
        assert!(validate_dataset(one_sample(square.clone(), flat(&[1.0, 1.0]))).is_ok());
        assert!(validate_dataset(one_sample(square, flat(&[0.5, 0.5]))).is_err());
    }

    #[test]
    fn later_sample_index_is_reported() {
        let mut data = one_sample(two_points(), flat(&[1.0, 0.0]));
        data.samples.push(Sample {
            state_id: "s1".into(),
            problem: two_points(),
            expert_feature: flat(&[0.5, 0.5]),
        });
        assert!(matches!(
            validate_dataset(data),
            Err(Error::Validation { index: 1, .. })
        ));
    }

    #[test]
    fn round_trip_is_exact() {
        let mut data = one_sample(three_items(), flat(&[5.0, 3.0]));
        data.metadata.phi0 = Some(flat(&[0.1 + 0.2, 1.0 / 3.0]));
        data.metadata.seed = Some(u64::MAX);
        let text = serialize_dataset(&data).unwrap();
        assert_eq!(parse_dataset(&text).unwrap(), data);
    }

    #[test]
    fn empty_samples_rejected() {
        let text = r#"{"dim":2,"variant":"flat","metadata":{"seed":1,"generator":"x"},"samples":[]}"#;
        let err = parse_dataset(text).unwrap_err();
        assert!(err.to_string().contains("dataset must be nonempty"), "{err}");
    }

    #[test]
    fn variant_tag_must_match_samples() {
        let data = one_sample(two_points(), flat(&[1.0, 0.0]));
        let text = serialize_dataset(&data).unwrap().replace("\"flat\"", "\"quad\"");
        let err = parse_dataset(&text).unwrap_err();
        assert!(
            matches!(&err, Error::Parse { context, .. } if context.starts_with("samples[0]")),
            "{err}"
        );
    }

    #[test]
    fn malformed_text_reports_position() {
        let err = parse_dataset("{\"dim\": 2,\n \"variant\": }").unwrap_err();
        assert!(
            matches!(&err, Error::Parse { context, .. } if context.starts_with("line 2")),
            "{err}"
        );
    }

    #[test]
    fn quad_dataset_serializes() {
        let problem = ProblemSpec::QpCandidates {
            points: vec![vec![0.0, 1.0]],
        };
        let mut data = one_sample(problem, embed_qp(&[0.0, 1.0]).unwrap());
        data.metadata.phi0 = Some(ParamVector::quad(SymmetricMatrix::from_diag(&[0.5, 0.5]), vec![0.0, 0.5]).unwrap());
        let text = serialize_dataset(&data).unwrap();
        assert_eq!(parse_dataset(&text).unwrap(), data);
    }
}

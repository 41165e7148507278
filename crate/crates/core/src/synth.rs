//! Synthetic realizable datasets: draw a hidden `φ₀` in the parameter space,
//! draw one forward problem per state, and record `solve(φ₀, problem)` as the
//! expert action. `min F = 0` on such data by construction.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, KnapsackItem, Metadata, ProblemSpec, Sample};
use crate::error::{Error, Result};
use crate::projections::{is_feasible, sample_feasible, ParamSpace};
use crate::solvers::solve;
use crate::vector::ParamVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    /// 0/1 knapsack with features in `[0,1]ᵈ` and integer weights.
    Knapsack,
    /// Finite set of random feature vectors in `[0,1]ᵈ`.
    FiniteSet,
    /// Polytope spanned by random points of `[0,1]ᵈ`.
    Vertex,
    /// Integer points of a random sub-box of `{−m..m}ᵈ` with a concave quadratic objective.
    Qp,
}

impl Family {
    pub fn default_space(&self, dim: usize, b0: f64) -> ParamSpace {
        match self {
            Family::Qp => ParamSpace::QuadProduct { dim, b0 },
            _ => ParamSpace::Simplex { dim },
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Knapsack => "knapsack",
            Family::FiniteSet => "finite-set",
            Family::Vertex => "vertex",
            Family::Qp => "qp",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "knapsack" => Ok(Family::Knapsack),
            "finite-set" | "finite_set" => Ok(Family::FiniteSet),
            "vertex" | "vertex-polytope" => Ok(Family::Vertex),
            "qp" => Ok(Family::Qp),
            other => Err(Error::Config(format!(
                "unknown problem family {other:?} (expected knapsack, finite-set, vertex or qp)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyParams {
    pub family: Family,
    pub dim: usize,
    pub samples: usize,
    /// Items per knapsack instance.
    pub items: usize,
    /// Knapsack weights are drawn from `1..=max_weight`.
    pub max_weight: u32,
    /// Knapsack capacity as a fraction of the total item weight.
    pub capacity_ratio: f64,
    /// Feature vectors per finite set, or points per polytope.
    pub points: usize,
    /// QP candidate grid extent `m` (coordinates in `−m..=m`).
    pub grid: i32,
    /// Box half-width for the QP parameter space.
    pub b0: f64,
}

impl FamilyParams {
    pub fn new(family: Family, dim: usize, samples: usize) -> Self {
        Self {
            family,
            dim,
            samples,
            items: 12,
            max_weight: 10,
            capacity_ratio: 0.5,
            points: 8,
            grid: 2,
            b0: 1.0,
        }
    }

    pub fn space(&self) -> ParamSpace {
        self.family.default_space(self.dim, self.b0)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.dim == 0 {
            return bad("dimension must be at least 1".into());
        }
        if self.samples == 0 {
            return bad("number of samples must be at least 1".into());
        }
        match self.family {
            Family::Knapsack => {
                if self.items == 0 || self.max_weight == 0 {
                    return bad("knapsack needs at least one item and a positive max weight".into());
                }
                if !(0.0..=1.0).contains(&self.capacity_ratio) {
                    return bad(format!(
                        "capacity ratio must lie in [0, 1], got {}",
                        self.capacity_ratio
                    ));
                }
            }
            Family::FiniteSet | Family::Vertex => {
                if self.points == 0 {
                    return bad("need at least one point per problem".into());
                }
            }
            Family::Qp => {
                if self.grid < 0 {
                    return bad(format!("grid extent must be nonnegative, got {}", self.grid));
                }
                let cells = (2 * self.grid as u64 + 1).checked_pow(self.dim as u32);
                if cells.is_none_or(|c| c > 1_000_000) {
                    return bad("QP candidate grid exceeds 10^6 points".into());
                }
            }
        }
        self.space().validate()
    }

    fn describe(&self) -> String {
        match self.family {
            Family::Knapsack => format!(
                "knapsack dim={} items={} max_weight={} capacity_ratio={}",
                self.dim, self.items, self.max_weight, self.capacity_ratio
            ),
            Family::FiniteSet => format!("finite-set dim={} points={}", self.dim, self.points),
            Family::Vertex => format!("vertex dim={} points={}", self.dim, self.points),
            Family::Qp => format!("qp dim={} grid={} b0={}", self.dim, self.grid, self.b0),
        }
    }
}

fn unit_vector<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<f64> {
    (0..dim).map(|_| rng.random_range(0.0..1.0)).collect()
}

/// One random forward problem from the family.
pub fn random_problem<R: Rng + ?Sized>(params: &FamilyParams, rng: &mut R) -> ProblemSpec {
    let d = params.dim;
    match params.family {
        Family::Knapsack => {
            let items: Vec<KnapsackItem> = (0..params.items)
                .map(|_| KnapsackItem {
                    feature: unit_vector(d, rng),
                    weight: rng.random_range(1..=params.max_weight) as f64,
                })
                .collect();
            let total: f64 = items.iter().map(|it| it.weight).sum();
            ProblemSpec::Knapsack {
                items,
                capacity: (params.capacity_ratio * total).floor(),
                resolution: 1.0,
            }
        }
        Family::FiniteSet => ProblemSpec::FiniteSet {
            features: (0..params.points)
                .map(|_| ParamVector::Flat(unit_vector(d, rng)))
                .collect(),
        },
        Family::Vertex => ProblemSpec::VertexPolytope {
            vertices: (0..params.points).map(|_| unit_vector(d, rng)).collect(),
        },
        Family::Qp => {
            let m = params.grid;
            let bounds: Vec<(i32, i32)> = (0..d)
                .map(|_| {
                    let lo = rng.random_range(-m..=m);
                    let hi = rng.random_range(lo..=m);
                    (lo, hi)
                })
                .collect();
            let mut points = vec![Vec::with_capacity(d)];
            for &(lo, hi) in &bounds {
                points = points
                    .into_iter()
                    .flat_map(|p: Vec<f64>| {
                        (lo..=hi).map(move |v| {
                            let mut q = p.clone();
                            q.push(v as f64);
                            q
                        })
                    })
                    .collect();
            }
            ProblemSpec::QpCandidates { points }
        }
    }
}

/// Realizable dataset from `params`; `phi0` defaults to a random point of the family's space.
pub fn generate(params: &FamilyParams, seed: u64, phi0: Option<ParamVector>) -> Result<Dataset> {
    params.validate()?;
    let space = params.space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phi0 = match phi0 {
        Some(p) => {
            if p.variant() != space.variant() || p.dim() != space.dim() || !is_feasible(&p, &space, 1e-10)? {
                return Err(Error::Config(format!("supplied phi0 is not a point of {space}")));
            }
            p
        }
        None => sample_feasible(&space, &mut rng),
    };
    let samples = (0..params.samples)
        .map(|n| {
            let problem = random_problem(params, &mut rng);
            let expert = solve(&phi0, &problem)?.feature;
            Ok(Sample {
                state_id: format!("s{n}"),
                problem,
                expert_feature: expert,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        dim: params.dim,
        variant: space.variant(),
        metadata: Metadata {
            seed: Some(seed),
            generator: params.describe(),
            phi0: Some(phi0),
            space: Some(space),
            unverified_samples: Vec::new(),
        },
        samples,
    })
}

/// Dataset whose experts each follow their own randomly drawn weights, so
/// `min F` is generally positive. Used to exercise `F` away from realizability.
pub fn generate_mixed(params: &FamilyParams, seed: u64) -> Result<Dataset> {
    params.validate()?;
    let space = params.space();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let samples = (0..params.samples)
        .map(|n| {
            let problem = random_problem(params, &mut rng);
            let theta = sample_feasible(&space, &mut rng);
            let expert = solve(&theta, &problem)?.feature;
            Ok(Sample {
                state_id: format!("s{n}"),
                problem,
                expert_feature: expert,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Dataset {
        dim: params.dim,
        variant: space.variant(),
        metadata: Metadata {
            seed: Some(seed),
            generator: format!("mixed {}", params.describe()),
            phi0: None,
            space: Some(space),
            unverified_samples: Vec::new(),
        },
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::validate_dataset;
    use crate::learner::objective;
    use crate::solvers::ExactSolver;

    #[test]
    fn every_family_is_realizable() {
        for family in [Family::Knapsack, Family::FiniteSet, Family::Vertex, Family::Qp] {
            let dim = if family == Family::Qp { 2 } else { 4 };
            let params = FamilyParams::new(family, dim, 10);
            let data = validate_dataset(generate(&params, 1, None).unwrap()).unwrap();
            let phi0 = data.metadata.phi0.clone().unwrap();
            assert!(is_feasible(&phi0, &params.space(), 1e-10).unwrap());
            assert_eq!(objective(&phi0, &data, &ExactSolver).unwrap(), 0.0, "{family}");
        }
    }

    #[test]
    fn mixed_data_is_valid_but_not_realizable() {
        let params = FamilyParams::new(Family::FiniteSet, 3, 20);
        let data = validate_dataset(generate_mixed(&params, 2).unwrap()).unwrap();
        assert!(data.metadata.phi0.is_none());
        let center = params.space().center();
        assert!(objective(&center, &data, &ExactSolver).unwrap() > 0.0);
    }

    #[test]
    fn same_seed_same_data() {
        let params = FamilyParams::new(Family::Knapsack, 5, 4);
        assert_eq!(generate(&params, 9, None).unwrap(), generate(&params, 9, None).unwrap());
        assert_ne!(
            generate(&params, 9, None).unwrap(),
            generate(&params, 10, None).unwrap()
        );
    }

    #[test]
    fn qp_candidates_are_integer_sub_box() {
        let params = FamilyParams::new(Family::Qp, 3, 5);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..20 {
            let ProblemSpec::QpCandidates { points } = random_problem(&params, &mut rng) else {
                panic!()
            };
            assert!(!points.is_empty());
            assert!(points.iter().flatten().all(|&x| x.fract() == 0.0 && x.abs() <= 2.0));
        }
    }

    #[test]
    fn rejects_bad_params_and_phi0() {
        let mut params = FamilyParams::new(Family::Knapsack, 3, 2);
        params.capacity_ratio = 2.0;
        assert!(generate(&params, 0, None).is_err());
        let params = FamilyParams::new(Family::Knapsack, 2, 2);
        assert!(generate(&params, 0, Some(ParamVector::Flat(vec![0.9, 0.9]))).is_err());
        assert!("lp".parse::<Family>().is_err());
    }
}

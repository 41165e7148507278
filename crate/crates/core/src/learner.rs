//! The inverse objective `F`, its subgradient, step-size schedules, and the
//! projected subgradient loop with best-iterate tracking.
//!
//! For a dataset `{(s⁽ⁿ⁾, a⁽ⁿ⁾)}` and forward solver `a(φ, s)`,
//!
//! ```text
//! F(φ) = (1/N) Σ ⟨φ, a(φ, s⁽ⁿ⁾)⟩ − (1/N) Σ ⟨φ, a⁽ⁿ⁾⟩
//! g(φ) = (1/N) Σ a(φ, s⁽ⁿ⁾) − (1/N) Σ a⁽ⁿ⁾       (a subgradient of F at φ)
//! ```
//!
//! `F` is convex, Lipschitz and nonnegative whenever the expert actions are
//! feasible; it vanishes at any weight vector that explains every expert
//! action. All sums run in sample order, so results do not depend on how the
//! per-sample solves are scheduled across threads.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{Dataset, KnapsackItem, ProblemSpec, MAX_BRUTE_FORCE_ITEMS};
use crate::error::{shape, Error, Result};
use crate::projections::{is_feasible, project_param, ParamSpace};
use crate::solvers::{embed_qp, integerize, ForwardSolver, SolveResult};
use crate::vector::ParamVector;

/// Feasibility tolerance for the initial point.
pub const INIT_TOL: f64 = 1e-10;

/// Step-size rule `α_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", content = "c", rename_all = "snake_case")]
pub enum Schedule {
    /// `α_k = α`.
    Constant(f64),
    /// `α_k = c / √k`.
    InvSqrt(f64),
    /// `α_k = c / k`.
    Harmonic(f64),
}

impl Schedule {
    pub fn coefficient(&self) -> f64 {
        match *self {
            Schedule::Constant(c) | Schedule::InvSqrt(c) | Schedule::Harmonic(c) => c,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c = self.coefficient();
        if c > 0.0 && c.is_finite() {
            Ok(())
        } else {
            Err(Error::Config(format!("schedule coefficient must be positive, got {c}")))
        }
    }

    /// Whether `α_k → 0` and `Σ α_k = ∞`.
    pub fn is_diminishing(&self) -> bool {
        !matches!(self, Schedule::Constant(_))
    }

    pub fn rate(&self, k: usize) -> Result<f64> {
        schedule_rate(self, k)
    }
}

/// `α_k` for iteration `k ≥ 1`.
pub fn schedule_rate(schedule: &Schedule, k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::Domain("iteration index starts at 1".into()));
    }
    let k = k as f64;
    Ok(match *schedule {
        Schedule::Constant(a) => a,
        Schedule::InvSqrt(c) => c / k.sqrt(),
        Schedule::Harmonic(c) => c / k,
    })
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Schedule::Constant(c) => write!(f, "constant:{c}"),
            Schedule::InvSqrt(c) => write!(f, "invsqrt:{c}"),
            Schedule::Harmonic(c) => write!(f, "harmonic:{c}"),
        }
    }
}

impl FromStr for Schedule {
    type Err = Error;

    /// Parses `constant:A`, `invsqrt:C` or `harmonic:C`.
    fn from_str(s: &str) -> Result<Self> {
        let (rule, value) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("schedule {s:?} must look like rule:value")))?;
        let c: f64 = value
            .parse()
            .map_err(|_| Error::Config(format!("bad schedule coefficient {value:?}")))?;
        let schedule = match rule {
            "constant" => Schedule::Constant(c),
            "invsqrt" => Schedule::InvSqrt(c),
            "harmonic" => Schedule::Harmonic(c),
            other => return Err(Error::Config(format!("unknown schedule rule {other:?}"))),
        };
        schedule.validate()?;
        Ok(schedule)
    }
}

/// `F(φ)` and one subgradient, sharing a single solver pass.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub objective: f64,
    pub subgradient: ParamVector,
    pub solutions: Vec<SolveResult>,
}

fn check_phi(phi: &ParamVector, data: &Dataset) -> Result<()> {
    if phi.variant() != data.variant || phi.dim() != data.dim {
        return Err(shape(format!(
            "{} vector of dimension {} cannot score a {} dataset of dimension {}",
            phi.variant(),
            phi.dim(),
            data.variant,
            data.dim
        )));
    }
    Ok(())
}

/// Solves every sample at `φ` and forms `F(φ)` and its subgradient.
pub fn evaluate<S: ForwardSolver + ?Sized>(phi: &ParamVector, data: &Dataset, solver: &S) -> Result<Evaluation> {
    check_phi(phi, data)?;
    if data.is_empty() {
        return Err(Error::Config("dataset must be nonempty".into()));
    }
    let results: Vec<Result<SolveResult>> = data.samples.par_iter().map(|s| solver.solve(phi, &s.problem)).collect();
    let solutions = results
        .into_iter()
        .enumerate()
        .map(|(index, r)| {
            r.map_err(|e| Error::Solver {
                index,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let n = data.len() as f64;
    let mut learner_value = 0.0;
    let mut expert_value = 0.0;
    let mut learner_sum = phi.zeros_like();
    let mut expert_sum = phi.zeros_like();
    for (index, (sol, sample)) in solutions.iter().zip(&data.samples).enumerate() {
        let wrap = |e: Error| Error::Solver {
            index,
            source: Box::new(e),
        };
        learner_value += phi.dot(&sol.feature).map_err(wrap)?;
        expert_value += phi.dot(&sample.expert_feature).map_err(wrap)?;
        learner_sum.axpy(1.0, &sol.feature).map_err(wrap)?;
        expert_sum.axpy(1.0, &sample.expert_feature).map_err(wrap)?;
    }
    learner_sum.axpy(-1.0, &expert_sum)?;
    Ok(Evaluation {
        objective: learner_value / n - expert_value / n,
        subgradient: learner_sum.scale(1.0 / n),
        solutions,
    })
}

/// The inverse objective `F(φ)`.
pub fn objective<S: ForwardSolver + ?Sized>(phi: &ParamVector, data: &Dataset, solver: &S) -> Result<f64> {
    evaluate(phi, data, solver).map(|e| e.objective)
}

/// `(1/N) Σ a(φ, s⁽ⁿ⁾) − (1/N) Σ a⁽ⁿ⁾`, a subgradient of `F` at `φ`.
pub fn subgradient<S: ForwardSolver + ?Sized>(phi: &ParamVector, data: &Dataset, solver: &S) -> Result<ParamVector> {
    evaluate(phi, data, solver).map(|e| e.subgradient)
}

/// Best-iterate error bound for the projected subgradient method:
/// `(d1² + G² Σ_{i≤k} αᵢ²) / (2 Σ_{i≤k} αᵢ)`.
pub fn theoretical_bound(d1: f64, lipschitz: f64, schedule: &Schedule, k: usize) -> Result<f64> {
    let mut sums = StepSums::default();
    for i in 1..=k {
        sums.push(schedule.rate(i)?);
    }
    sums.bound(d1, lipschitz)
}

/// Running `Σ αᵢ` and `Σ αᵢ²`.
#[derive(Debug, Default, Clone, Copy)]
struct StepSums {
    linear: f64,
    squares: f64,
}

impl StepSums {
    fn push(&mut self, alpha: f64) {
        self.linear += alpha;
        self.squares += alpha * alpha;
    }

    fn bound(&self, d1: f64, lipschitz: f64) -> Result<f64> {
        if self.linear <= 0.0 {
            return Err(Error::Domain("bound needs at least one step".into()));
        }
        Ok((d1 * d1 + lipschitz * lipschitz * self.squares) / (2.0 * self.linear))
    }
}

/// Uniform bound `G` on the subgradient norm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Lipschitz {
    pub value: f64,
    /// False when some knapsack sample was too large to enumerate and a
    /// triangle-inequality over-estimate was used instead.
    pub exact: bool,
}

/// `G = (1/N) Σₙ max_{x ∈ X(s⁽ⁿ⁾)} ‖h(x) − a⁽ⁿ⁾‖`.
pub fn lipschitz_constant(data: &Dataset) -> Result<Lipschitz> {
    if data.is_empty() {
        return Err(Error::Config("dataset must be nonempty".into()));
    }
    let per_sample: Vec<Result<(f64, bool)>> = data
        .samples
        .par_iter()
        .map(|s| {
            let expert = &s.expert_feature;
            let far = |f: &ParamVector| f.distance(expert);
            match &s.problem {
                ProblemSpec::FiniteSet { features } => max_of(features.iter().map(far)).map(|m| (m, true)),
                ProblemSpec::VertexPolytope { vertices } => {
                    max_of(vertices.iter().map(|v| far(&ParamVector::Flat(v.clone())))).map(|m| (m, true))
                }
                ProblemSpec::QpCandidates { points } => {
                    max_of(points.iter().map(|x| embed_qp(x).and_then(|f| far(&f)))).map(|m| (m, true))
                }
                ProblemSpec::Knapsack {
                    items,
                    capacity,
                    resolution,
                } => {
                    let target = expert.as_flat().ok_or_else(|| shape("knapsack expert must be flat"))?;
                    if items.len() <= MAX_BRUTE_FORCE_ITEMS {
                        let (weights, cap) = integerize(items, *capacity, *resolution)?;
                        Ok((knapsack_farthest(items, &weights, cap, target), true))
                    } else {
                        let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
                        let total = items.iter().map(|it| norm(&it.feature)).sum::<f64>() + norm(target);
                        Ok((total, false))
                    }
                }
            }
        })
        .collect();
    let mut sum = 0.0;
    let mut exact = true;
    for (index, r) in per_sample.into_iter().enumerate() {
        let (m, e) = r.map_err(|e| Error::Solver {
            index,
            source: Box::new(e),
        })?;
        sum += m;
        exact &= e;
    }
    Ok(Lipschitz {
        value: sum / data.len() as f64,
        exact,
    })
}

fn max_of(values: impl Iterator<Item = Result<f64>>) -> Result<f64> {
    values.into_iter().try_fold(0.0, |acc: f64, v| Ok(acc.max(v?)))
}

/// Largest `‖Σ_{i∈S} fᵢ − target‖` over feasible selections `S`.
fn knapsack_farthest(items: &[KnapsackItem], weights: &[usize], cap: usize, target: &[f64]) -> f64 {
    fn walk(i: usize, items: &[KnapsackItem], weights: &[usize], room: usize, acc: &mut [f64], target: &[f64]) -> f64 {
        if i == items.len() {
            return acc
                .iter()
                .zip(target)
                .map(|(a, t)| (a - t) * (a - t))
                .sum::<f64>()
                .sqrt();
        }
        let mut best = walk(i + 1, items, weights, room, acc, target);
        if weights[i] <= room {
            let saved = acc.to_vec();
            acc.iter_mut().zip(&items[i].feature).for_each(|(a, f)| *a += f);
            best = best.max(walk(i + 1, items, weights, room - weights[i], acc, target));
            acc.copy_from_slice(&saved);
        }
        best
    }
    let mut acc = vec![0.0; target.len()];
    walk(0, items, weights, cap, &mut acc, target)
}

/// Diameter and Lipschitz estimates that enable the per-iteration bound column.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    /// Stand-in for `d(φ₁, argmin F)`; the space diameter is a valid over-estimate.
    pub diameter: f64,
    pub lipschitz: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LearnerConfig {
    pub schedule: Schedule,
    /// Number of iterates `K` evaluated.
    pub max_iters: usize,
    /// Stop once `F(φ_best) ≤ target_eps`. Only meaningful when `min F = 0`
    /// is known, as for data generated from a hidden weight vector.
    pub target_eps: Option<f64>,
    pub init: ParamVector,
    pub space: ParamSpace,
    /// Recorded for reproducibility; the loop itself is deterministic.
    pub rng_seed: u64,
    pub bound: Option<BoundParams>,
}

impl LearnerConfig {
    /// Defaults: `K` iterations from the space's center, no early stop, no bound column.
    pub fn new(schedule: Schedule, max_iters: usize, space: ParamSpace) -> Self {
        Self {
            schedule,
            max_iters,
            target_eps: None,
            init: space.center(),
            space,
            rng_seed: 0,
            bound: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.schedule.validate()?;
        self.space.validate()?;
        if self.max_iters == 0 {
            return Err(Error::Config("max_iters must be at least 1".into()));
        }
        if let Some(eps) = self.target_eps {
            if eps.is_nan() || eps <= 0.0 {
                return Err(Error::Config(format!("target_eps must be positive, got {eps}")));
            }
        }
        if self.init.variant() != self.space.variant() || self.init.dim() != self.space.dim() {
            return Err(Error::Config(
                "initial point not in Φ: wrong variant or dimension".into(),
            ));
        }
        if !is_feasible(&self.init, &self.space, INIT_TOL)? {
            return Err(Error::Config("initial point not in Φ".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub k: usize,
    pub alpha: f64,
    /// `F(φ_k)`.
    pub objective: f64,
    /// `min_{i≤k} F(φ_i)`.
    pub best_objective: f64,
    pub subgrad_norm: f64,
    /// Relaxed best-iterate bound, when [`LearnerConfig::bound`] is set.
    pub bound: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearningTrace {
    pub rows: Vec<TraceRow>,
    pub phi_best: ParamVector,
    /// Iteration of `phi_best`; 0 only if no iterate was evaluated.
    pub k_best: usize,
    pub wall_time: Duration,
    /// Early stop triggered by `target_eps`.
    pub converged: bool,
    /// Set when a solver failure cut the run short.
    pub abort_reason: Option<String>,
}

impl LearningTrace {
    pub fn is_complete(&self) -> bool {
        self.abort_reason.is_none()
    }

    pub fn best_objective(&self) -> Option<f64> {
        self.rows.last().map(|r| r.best_objective)
    }
}

/// One iteration as seen by an observer of [`run_with_observer`].
#[derive(Debug)]
pub struct Step<'a> {
    pub k: usize,
    pub phi: &'a ParamVector,
    pub evaluation: &'a Evaluation,
    pub alpha: f64,
    /// `φ_k − α_k g_k`, absent on the final iteration.
    pub pre_projection: Option<&'a ParamVector>,
    /// `φ_{k+1}`, absent on the final iteration.
    pub next: Option<&'a ParamVector>,
}

/// Projected subgradient method on `F` over `cfg.space`, returning the best iterate.
pub fn run_intention_learning<S: ForwardSolver + ?Sized>(
    data: &Dataset,
    cfg: &LearnerConfig,
    solver: &S,
) -> Result<LearningTrace> {
    run_with_observer(data, cfg, solver, |_| {})
}

/// [`run_intention_learning`] with a callback after every iteration.
pub fn run_with_observer<S, O>(
    data: &Dataset,
    cfg: &LearnerConfig,
    solver: &S,
    mut observer: O,
) -> Result<LearningTrace>
where
    S: ForwardSolver + ?Sized,
    O: FnMut(&Step<'_>),
{
    cfg.validate()?;
    check_phi(&cfg.init, data)?;
    let start = Instant::now();

    let mut rows = Vec::with_capacity(cfg.max_iters);
    let mut phi = cfg.init.clone();
    let mut phi_best = cfg.init.clone();
    let mut k_best = 0;
    let mut best = f64::INFINITY;
    let mut sums = StepSums::default();
    let mut converged = false;
    let mut abort_reason = None;

    for k in 1..=cfg.max_iters {
        let evaluation = match evaluate(&phi, data, solver) {
            Ok(e) => e,
            Err(e) if k > 1 => {
                abort_reason = Some(format!("iteration {k}: {e}"));
                break;
            }
            Err(e) => return Err(e),
        };
        let alpha = cfg.schedule.rate(k)?;
        sums.push(alpha);

        // Strict improvement only: the first iterate attaining the minimum is kept.
        if evaluation.objective < best {
            best = evaluation.objective;
            phi_best = phi.clone();
            k_best = k;
        }
        let bound = match cfg.bound {
            Some(b) => Some(sums.bound(b.diameter, b.lipschitz)?),
            None => None,
        };
        rows.push(TraceRow {
            k,
            alpha,
            objective: evaluation.objective,
            best_objective: best,
            subgrad_norm: evaluation.subgradient.norm(),
            bound,
        });

        let stop = cfg.target_eps.is_some_and(|eps| best <= eps);
        converged |= stop;
        if stop || k == cfg.max_iters {
            observer(&Step {
                k,
                phi: &phi,
                evaluation: &evaluation,
                alpha,
                pre_projection: None,
                next: None,
            });
            break;
        }

        let mut stepped = phi.clone();
        stepped.axpy(-alpha, &evaluation.subgradient)?;
        let next = project_param(&stepped, &cfg.space)?;
        observer(&Step {
            k,
            phi: &phi,
            evaluation: &evaluation,
            alpha,
            pre_projection: Some(&stepped),
            next: Some(&next),
        });
        phi = next;
    }

    Ok(LearningTrace {
        rows,
        phi_best,
        k_best,
        wall_time: start.elapsed(),
        converged,
        abort_reason,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Metadata, Sample};
    use crate::solvers::{solve, ExactSolver};

    fn flat(v: &[f64]) -> ParamVector {
        ParamVector::Flat(v.to_vec())
    }

    fn two_point_data() -> Dataset {
        Dataset {
            dim: 2,
            variant: crate::Variant::Flat,
            metadata: Metadata::default(),
            samples: vec![Sample {
                state_id: "s0".into(),
                problem: ProblemSpec::FiniteSet {
                    features: vec![flat(&[1.0, 0.0]), flat(&[0.0, 1.0])],
                },
                expert_feature: flat(&[1.0, 0.0]),
            }],
        }
    }

    #[test]
    fn schedule_examples() {
        assert_eq!(schedule_rate(&Schedule::InvSqrt(1.0), 1).unwrap(), 1.0);
        assert_eq!(schedule_rate(&Schedule::InvSqrt(1.0), 4).unwrap(), 0.5);
        assert_eq!(schedule_rate(&Schedule::Harmonic(2.0), 4).unwrap(), 0.5);
        assert_eq!(schedule_rate(&Schedule::Constant(0.3), 100).unwrap(), 0.3);
        assert!(matches!(
            schedule_rate(&Schedule::Constant(0.3), 0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn schedule_parsing() {
        assert_eq!("invsqrt:1.0".parse::<Schedule>().unwrap(), Schedule::InvSqrt(1.0));
        assert_eq!("harmonic:2".parse::<Schedule>().unwrap(), Schedule::Harmonic(2.0));
        assert_eq!("constant:0.5".parse::<Schedule>().unwrap(), Schedule::Constant(0.5));
        assert!("constant:-1".parse::<Schedule>().is_err());
        assert!("cosine:1".parse::<Schedule>().is_err());
        assert!("invsqrt".parse::<Schedule>().is_err());
        let s = Schedule::Harmonic(0.25);
        assert_eq!(s.to_string().parse::<Schedule>().unwrap(), s);
    }

    #[test]
    fn two_point_objective_and_subgradient() {
        let data = two_point_data();
        let phi = flat(&[0.0, 1.0]);
        assert_eq!(objective(&phi, &data, &ExactSolver).unwrap(), 1.0);
        assert_eq!(subgradient(&phi, &data, &ExactSolver).unwrap(), flat(&[-1.0, 1.0]));
    }

    #[test]
    fn realizable_dataset_has_zero_objective_and_subgradient() {
        let mut data = two_point_data();
        let phi0 = flat(&[0.3, 0.7]);
        for s in &mut data.samples {
            s.expert_feature = solve(&phi0, &s.problem).unwrap().feature;
        }
        let e = evaluate(&phi0, &data, &ExactSolver).unwrap();
        assert_eq!(e.objective, 0.0);
        assert_eq!(e.subgradient, flat(&[0.0, 0.0]));
    }

    #[test]
    fn bound_examples() {
        for k in [1, 5, 100] {
            assert_eq!(theoretical_bound(0.0, 0.0, &Schedule::InvSqrt(1.0), k).unwrap(), 0.0);
        }
        // Constant step: the bound tends to G²α/2.
        let (g, a) = (3.0, 0.1);
        let far = theoretical_bound(1.0, g, &Schedule::Constant(a), 1_000_000).unwrap();
        assert!((far - g * g * a / 2.0).abs() < 1e-5);

        let expected =
            (2.0 + (1.0 + 0.5 + 1.0 / 3.0 + 0.25)) / (2.0 * (1.0 + 1.0 / 2f64.sqrt() + 1.0 / 3f64.sqrt() + 0.5));
        let got = theoretical_bound(2f64.sqrt(), 1.0, &Schedule::InvSqrt(1.0), 4).unwrap();
        assert!((got - expected).abs() <= 1e-14, "{got} vs {expected}");
        assert!(theoretical_bound(1.0, 1.0, &Schedule::InvSqrt(1.0), 0).is_err());
    }

    #[test]
    fn lipschitz_examples() {
        let g = lipschitz_constant(&two_point_data()).unwrap();
        assert_eq!(g.value, 2f64.sqrt());
        assert!(g.exact);

        let mut single = two_point_data();
        single.samples[0].problem = ProblemSpec::FiniteSet {
            features: vec![flat(&[1.0, 0.0])],
        };
        assert_eq!(lipschitz_constant(&single).unwrap().value, 0.0);
    }

    #[test]
    fn stationary_when_expert_optimal_at_init() {
        let data = two_point_data();
        let mut cfg = LearnerConfig::new(Schedule::Constant(0.5), 5, ParamSpace::Simplex { dim: 2 });
        cfg.init = flat(&[1.0, 0.0]);
        let trace = run_intention_learning(&data, &cfg, &ExactSolver).unwrap();
        assert_eq!(trace.rows.len(), 5);
        assert_eq!(trace.rows[0].subgrad_norm, 0.0);
        assert_eq!(trace.rows[0].best_objective, 0.0);
        assert_eq!(trace.k_best, 1);
        assert!(trace.rows.iter().all(|r| r.objective == 0.0));
    }

    #[test]
    fn two_point_hand_steps() {
        // phi1 = (0,1): g = (-1,1); phi2 = Proj((0,1) - 0.5(-1,1)) = (0.5,0.5);
        // the tie at phi2 picks (1,0), the expert action, so F(phi2) = 0.
        let data = two_point_data();
        let mut cfg = LearnerConfig::new(Schedule::Constant(0.5), 3, ParamSpace::Simplex { dim: 2 });
        cfg.init = flat(&[0.0, 1.0]);
        let mut iterates = Vec::new();
        let trace = run_with_observer(&data, &cfg, &ExactSolver, |s| iterates.push(s.phi.clone())).unwrap();
        assert_eq!(iterates[0], flat(&[0.0, 1.0]));
        assert_eq!(iterates[1], flat(&[0.5, 0.5]));
        assert_eq!(trace.rows[0].objective, 1.0);
        assert_eq!(trace.rows[1].objective, 0.0);
        assert_eq!(trace.k_best, 2);
        assert_eq!(trace.phi_best, flat(&[0.5, 0.5]));
    }

    #[test]
    fn early_stop_and_single_iteration() {
        let data = two_point_data();
        let mut cfg = LearnerConfig::new(Schedule::Constant(0.5), 100, ParamSpace::Simplex { dim: 2 });
        cfg.init = flat(&[0.0, 1.0]);
        cfg.target_eps = Some(1e-3);
        let trace = run_intention_learning(&data, &cfg, &ExactSolver).unwrap();
        assert!(trace.converged);
        assert_eq!(trace.rows.len(), 2);

        cfg.target_eps = None;
        cfg.max_iters = 1;
        let trace = run_intention_learning(&data, &cfg, &ExactSolver).unwrap();
        assert_eq!(trace.rows.len(), 1);
        assert_eq!(trace.phi_best, cfg.init);
        assert!(!trace.converged);
    }

    #[test]
    fn infeasible_init_is_config_error() {
        let data = two_point_data();
        let mut cfg = LearnerConfig::new(Schedule::Constant(0.5), 3, ParamSpace::Simplex { dim: 2 });
        cfg.init = flat(&[0.7, 0.7]);
        let err = run_intention_learning(&data, &cfg, &ExactSolver).unwrap_err();
        assert_eq!(err, Error::Config("initial point not in Φ".into()));
    }

    #[test]
    fn solver_failure_mid_run_yields_incomplete_trace() {
        use std::sync::atomic::{AtomicUsize, Ordering};
        let calls = AtomicUsize::new(0);
        let flaky = |phi: &ParamVector, p: &ProblemSpec| {
            if calls.fetch_add(1, Ordering::SeqCst) >= 2 {
                Err(Error::Numerical("boom".into()))
            } else {
                solve(phi, p)
            }
        };
        let data = two_point_data();
        let mut cfg = LearnerConfig::new(Schedule::Constant(0.1), 10, ParamSpace::Simplex { dim: 2 });
        cfg.init = flat(&[0.0, 1.0]);
        let trace = run_intention_learning(&data, &cfg, &flaky).unwrap();
        assert_eq!(trace.rows.len(), 2);
        assert!(!trace.is_complete());
        assert!(trace.abort_reason.unwrap().contains("solver failed on sample 0"));
    }
}

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use wirl_core::synth::random_problem;
use wirl_core::*;

fn mixed_dataset(family: Family, dim: usize, n: usize, seed: u64) -> Dataset {
    let mut params = FamilyParams::new(family, dim, n);
    params.items = 8;
    params.points = 6;
    generate_mixed(&params, seed).unwrap()
}

fn family_dim() -> impl Strategy<Value = (Family, usize)> {
    prop_oneof![
        (2usize..6).prop_map(|d| (Family::Knapsack, d)),
        (2usize..6).prop_map(|d| (Family::FiniteSet, d)),
        (2usize..6).prop_map(|d| (Family::Vertex, d)),
        (1usize..4).prop_map(|d| (Family::Qp, d)),
    ]
}

fn f(phi: &ParamVector, data: &Dataset) -> f64 {
    objective(phi, data, &ExactSolver).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn objective_is_convex((family, dim) in family_dim(), seed: u64, t in 0.0..=1.0f64) {
        let data = mixed_dataset(family, dim, 6, seed);
        let space = data.metadata.space.unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let p = sample_feasible(&space, &mut rng);
        let q = sample_feasible(&space, &mut rng);
        let mid = p.scale(t).add(&q.scale(1.0 - t)).unwrap();
        prop_assert!(f(&mid, &data) <= t * f(&p, &data) + (1.0 - t) * f(&q, &data) + 1e-10);
    }

    #[test]
    fn objective_is_lipschitz((family, dim) in family_dim(), seed: u64) {
        let data = mixed_dataset(family, dim, 6, seed);
        let space = data.metadata.space.unwrap();
        let g = lipschitz_constant(&data).unwrap();
        prop_assert!(g.exact);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let p = sample_feasible(&space, &mut rng);
        let q = sample_feasible(&space, &mut rng);
        let gap = (f(&p, &data) - f(&q, &data)).abs();
        prop_assert!(gap <= g.value * p.distance(&q).unwrap() + 1e-10);
        prop_assert!(subgradient(&p, &data, &ExactSolver).unwrap().norm() <= g.value + 1e-12);
    }

    #[test]
    fn subgradient_inequality((family, dim) in family_dim(), seed: u64) {
        let data = mixed_dataset(family, dim, 6, seed);
        let space = data.metadata.space.unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        let p = sample_feasible(&space, &mut rng);
        let e = evaluate(&p, &data, &ExactSolver).unwrap();
        for _ in 0..10 {
            let q = sample_feasible(&space, &mut rng);
            let lower = e.objective + e.subgradient.dot(&q.sub(&p).unwrap()).unwrap();
            prop_assert!(f(&q, &data) >= lower - 1e-10);
        }
    }

    #[test]
    fn objective_is_positively_homogeneous(
        family in prop_oneof![Just(Family::Knapsack), Just(Family::FiniteSet), Just(Family::Vertex)],
        dim in 2usize..6,
        seed: u64,
    ) {
        let data = mixed_dataset(family, dim, 5, seed);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 4);
        let phi = ParamVector::Flat((0..dim).map(|_| rng.random_range(-1.0..1.0)).collect());
        let base = evaluate(&phi, &data, &ExactSolver).unwrap();
        for gamma in [0.5, 2.0, 10.0] {
            let scaled = evaluate(&phi.scale(gamma), &data, &ExactSolver).unwrap();
            prop_assert!((scaled.objective - gamma * base.objective).abs() <= 1e-10);
            for (a, b) in base.solutions.iter().zip(&scaled.solutions) {
                prop_assert_eq!(&a.witness, &b.witness);
            }
        }
    }

    #[test]
    fn argmax_dominates_other_parameters_choices((family, dim) in family_dim(), seed: u64) {
        let params = FamilyParams::new(family, dim, 1);
        let space = params.space();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let problem = random_problem(&params, &mut rng);
        let phi = sample_feasible(&space, &mut rng);
        let own = solve(&phi, &problem).unwrap();
        for _ in 0..10 {
            let theta = sample_feasible(&space, &mut rng);
            let other = solve(&theta, &problem).unwrap().feature;
            prop_assert!(inner_product(&phi, &own.feature).unwrap() >= inner_product(&phi, &other).unwrap() - 1e-12);
        }
    }
}

/// Objective recomputed with an exhaustive subset search in place of the DP.
#[test]
fn objective_matches_exhaustive_knapsack_oracle() {
    let data = mixed_dataset(Family::Knapsack, 5, 12, 77);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..20 {
        let phi = sample_feasible(&ParamSpace::Simplex { dim: 5 }, &mut rng);
        let w = phi.as_flat().unwrap();
        let mut total = 0.0;
        for s in &data.samples {
            let ProblemSpec::Knapsack { items, capacity, .. } = &s.problem else {
                unreachable!()
            };
            let best = (0u32..1 << items.len())
                .filter(|m| {
                    (0..items.len())
                        .filter(|i| m >> i & 1 == 1)
                        .map(|i| items[i].weight)
                        .sum::<f64>()
                        <= *capacity
                })
                .map(|m| {
                    (0..items.len())
                        .filter(|i| m >> i & 1 == 1)
                        .map(|i| items[i].feature.iter().zip(w).map(|(a, b)| a * b).sum::<f64>())
                        .sum::<f64>()
                })
                .fold(f64::NEG_INFINITY, f64::max);
            total += best - inner_product(&phi, &s.expert_feature).unwrap();
        }
        let oracle = total / data.len() as f64;
        assert!(
            (f(&phi, &data) - oracle).abs() <= 1e-12,
            "{} vs {oracle}",
            f(&phi, &data)
        );
    }
}

#[test]
fn subgradient_norm_never_exceeds_lipschitz_constant() {
    let data = mixed_dataset(Family::FiniteSet, 4, 10, 3);
    let g = lipschitz_constant(&data).unwrap().value;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..1000 {
        let phi = ParamVector::Flat((0..4).map(|_| rng.random_range(-3.0..3.0)).collect());
        assert!(subgradient(&phi, &data, &ExactSolver).unwrap().norm() <= g + 1e-12);
    }
}

#[test]
fn realizable_data_has_zero_objective_and_subgradient_at_truth() {
    for family in [Family::Knapsack, Family::Vertex, Family::Qp] {
        let dim = if family == Family::Qp { 2 } else { 6 };
        let data = generate(&FamilyParams::new(family, dim, 15), 11, None).unwrap();
        let phi0 = data.metadata.phi0.clone().unwrap();
        let e = evaluate(&phi0, &data, &ExactSolver).unwrap();
        assert_eq!(e.objective, 0.0);
        assert_eq!(e.subgradient.norm(), 0.0);
    }
}

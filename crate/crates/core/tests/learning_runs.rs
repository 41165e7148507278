use wirl_core::*;

fn run_with_bound(
    data: &Dataset,
    space: ParamSpace,
    schedule: Schedule,
    iters: usize,
) -> (LearningTrace, f64, Vec<f64>) {
    let g = lipschitz_constant(data).unwrap();
    let mut cfg = LearnerConfig::new(schedule, iters, space);
    cfg.bound = Some(BoundParams {
        diameter: space.diameter(),
        lipschitz: g.value,
    });
    let mut certificates = Vec::new();
    let trace = run_with_observer(data, &cfg, &ExactSolver, |step| {
        if let (Some(x), Some(p)) = (step.pre_projection, step.next) {
            certificates.push(vi_certificate(x, p, &space, 20, step.k as u64).unwrap());
        }
    })
    .unwrap();
    (trace, g.value, certificates)
}

#[test]
fn realizable_knapsack_reaches_tolerance() {
    let params = FamilyParams::new(Family::Knapsack, 10, 50);
    let data = generate(&params, 2024, None).unwrap();
    let (trace, _, certs) = run_with_bound(&data, params.space(), Schedule::InvSqrt(1.0), 2000);
    assert_eq!(trace.rows.len(), 2000);
    assert!(trace.best_objective().unwrap() <= 1e-2);
    assert!(certs.iter().all(|&c| c <= 1e-9));
    assert!(trace.is_complete());
}

#[test]
fn best_objective_is_monotone_and_bounded() {
    for (family, dim, space_check) in [(Family::FiniteSet, 5, false), (Family::Qp, 2, true)] {
        let params = FamilyParams::new(family, dim, 12);
        let data = generate(&params, 6, None).unwrap();
        let (trace, _, certs) = run_with_bound(&data, params.space(), Schedule::Harmonic(0.5), 300);
        let mut running = f64::INFINITY;
        for row in &trace.rows {
            running = running.min(row.objective);
            assert_eq!(row.best_objective, running);
            assert!(row.best_objective <= row.bound.unwrap() + 1e-9);
        }
        assert!(certs.iter().all(|&c| c <= 1e-9), "space check {space_check}");
        let best_row = &trace.rows[trace.k_best - 1];
        assert_eq!(best_row.objective, trace.best_objective().unwrap());
    }
}

#[test]
fn constant_step_plateau_stays_under_limit() {
    let params = FamilyParams::new(Family::Vertex, 4, 20);
    let data = generate(&params, 3, None).unwrap();
    let alpha = 0.05;
    let (trace, g, _) = run_with_bound(&data, params.space(), Schedule::Constant(alpha), 1500);
    assert!(trace.best_objective().unwrap() <= g * g * alpha / 2.0 + 1e-6);
}

/// Hand-stepped two-point run replayed independently.
#[test]
fn two_point_run_matches_hand_steps() {
    let one_zero = ParamVector::Flat(vec![1.0, 0.0]);
    let data = Dataset {
        dim: 2,
        variant: Variant::Flat,
        metadata: Metadata::default(),
        samples: vec![Sample {
            state_id: "s0".into(),
            problem: ProblemSpec::FiniteSet {
                features: vec![one_zero.clone(), ParamVector::Flat(vec![0.0, 1.0])],
            },
            expert_feature: one_zero,
        }],
    };
    let mut cfg = LearnerConfig::new(Schedule::Constant(0.5), 5, ParamSpace::Simplex { dim: 2 });
    cfg.init = ParamVector::Flat(vec![0.0, 1.0]);
    let trace = run_intention_learning(&data, &cfg, &ExactSolver).unwrap();
    assert_eq!(trace.rows[0].objective, 1.0);
    assert_eq!(trace.rows[1].objective, 0.0);
    assert_eq!(trace.k_best, 2);
    assert_eq!(trace.phi_best, ParamVector::Flat(vec![0.5, 0.5]));
}

#[test]
fn reruns_are_bitwise_identical() {
    let params = FamilyParams::new(Family::Qp, 3, 10);
    let data = generate(&params, 8, None).unwrap();
    let cfg = LearnerConfig::new(Schedule::InvSqrt(1.0), 200, params.space());
    let a = run_intention_learning(&data, &cfg, &ExactSolver).unwrap();
    let b = run_intention_learning(&data, &cfg, &ExactSolver).unwrap();
    assert_eq!(a.rows, b.rows);
    assert_eq!(a.phi_best, b.phi_best);
}

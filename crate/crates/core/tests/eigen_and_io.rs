use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use wirl_core::*;

fn symmetric(order: usize, entries: &[f64]) -> SymmetricMatrix {
    SymmetricMatrix::from_packed(order, entries[..order * (order + 1) / 2].to_vec()).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn eigendecomposition_reconstructs(order in 2usize..=8, entries in prop::collection::vec(-10.0..10.0f64, 36)) {
        let m = symmetric(order, &entries);
        let e = jacobi_eigh(&m).unwrap();
        let back = reconstruct(&e);
        let err = m.packed().iter().zip(back.packed()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-8, "reconstruction error {err}");
        prop_assert!(e.orthonormality_error() <= 1e-10);
        prop_assert!((e.eigenvalues().iter().sum::<f64>() - m.trace()).abs() <= 1e-9);
        prop_assert!(e.eigenvalues().windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn dataset_round_trips_exactly(
        family in prop_oneof![Just(Family::Knapsack), Just(Family::FiniteSet), Just(Family::Vertex), Just(Family::Qp)],
        dim in 1usize..4,
        n in 1usize..4,
        seed: u64,
    ) {
        let mut params = FamilyParams::new(family, dim, n);
        params.items = 5;
        params.points = 3;
        params.grid = 1;
        let data = generate(&params, seed, None).unwrap();
        let text = serialize_dataset(&data).unwrap();
        let back = parse_dataset(&text).unwrap();
        prop_assert_eq!(&back, &data);
        prop_assert_eq!(serialize_dataset(&back).unwrap(), text);
    }
}

#[test]
fn projected_spectrum_is_feasible() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for d in 1..=6 {
        let space = ParamSpace::QuadProduct { dim: d, b0: 2.0 };
        let far = sample_feasible(&space, &mut rng).scale(7.5);
        let p = project_param(&far, &space).unwrap();
        let ParamVector::Quad { a, b } = &p else { panic!() };
        let e = jacobi_eigh(a).unwrap();
        assert!(e.eigenvalues().iter().all(|&l| l >= -1e-10));
        assert!((a.trace() - 1.0).abs() <= 1e-9);
        assert!(b.iter().all(|x| x.abs() <= 2.0));
        assert!(vi_certificate(&far, &p, &space, 200, 9).unwrap() <= 1e-9);
    }
}

use super::*;
use crate::scalar::Exact;

fn game(a: f64, costs: &[f64]) -> GameParams {
    GameParams::new(a, costs.to_vec()).unwrap()
}

fn rows(o: &Oscillation) -> Vec<Vec<f64>> {
    o.matrix.rows().to_vec()
}

fn exactly_verifies(g: &GameParams, o: &Oscillation) {
    let report = verify_quantity_matrix(&g.exact(), &o.matrix.exact(), 0.0).unwrap();
    assert!(report.valid, "{:?}", report.max_residual);
}

#[test]
fn case1_examples() {
    let g = game(20.0, &[0.0; 4]);
    let o = construct_case1(&g).unwrap();
    assert_eq!(rows(&o), vec![vec![0.0; 4], vec![10.0; 4]]);
    assert_eq!((o.case, o.k1, o.k2), (OscillationCase::Case1, 0, 4));
    exactly_verifies(&g, &o);

    match construct_case1(&game(8.0, &[2.0])) {
        Err(OscillationError::Infeasible(Violation::Case1Inequality { k: 1, value })) => {
            assert_eq!(value, -12.0)
        }
        other => panic!("{other:?}"),
    }
    let err = construct_case1(&game(10.0, &[0.0, 0.0])).unwrap_err();
    assert_eq!(
        err,
        OscillationError::Infeasible(Violation::Case1Inequality { k: 2, value: -10.0 })
    );
    assert!(err.to_string().contains("(k-3)A + 3c_1"));
    // The rejected candidate is indeed not a cycle.
    let candidate = QuantityMatrix::new(vec![vec![0.0, 0.0], vec![5.0, 5.0]]).unwrap();
    assert!(
        !verify_quantity_matrix(&game(10.0, &[0.0, 0.0]), &candidate, 1e-9)
            .unwrap()
            .valid
    );

    assert!(matches!(
        construct_case1(&game(1.0, &[2.0, 3.0])),
        Err(OscillationError::Infeasible(Violation::NoActiveFirm { .. }))
    ));
}

#[test]
fn case1_ignores_expensive_firms() {
    let g = game(20.0, &[0.0, 0.0, 0.0, 0.0, 20.0, 35.0]);
    let o = construct_case1(&g).unwrap();
    assert_eq!(o.k2, 4);
    assert_eq!(o.matrix.row(1), &[10.0, 10.0, 10.0, 10.0, 0.0, 0.0]);
}

#[test]
fn case2_examples() {
    let g = game(10.0, &[0.0, 3.0, 3.0]);
    let o = construct_case2(&g, 1, 2).unwrap();
    assert_eq!(rows(&o), vec![vec![3.0, 0.0, 0.0], vec![5.0, 2.0, 2.0]]);
    assert!(o.family.is_none());
    exactly_verifies(&g, &o);

    let err = construct_case2(&game(10.0, &[0.0, 6.0]), 1, 1).unwrap_err();
    assert!(matches!(err, OscillationError::Infeasible(_)), "{err:?}");
}

#[test]
fn case2_single_entrant_is_never_feasible() {
    // Interior needs A > 2c_2 - c_1, exit needs A <= 2c_2 - c_1.
    for a in 1..=20 {
        for c1 in 0..=a {
            for c2 in c1..=a + 3 {
                let g = game(a as f64, &[c1 as f64, c2 as f64]).exact();
                assert!(construct_case2(&g, 1, 1).is_err());
            }
        }
    }
}

#[test]
fn case2_shape_errors() {
    let g = game(10.0, &[0.0, 3.0, 3.0]);
    for (k1, k2) in [(0, 1), (3, 1), (1, 0), (1, 3), (2, 2)] {
        assert!(matches!(
            construct_case2(&g, k1, k2),
            Err(OscillationError::InvalidShape(_))
        ));
    }
}

#[test]
fn k2_four_family() {
    let g = game(10.0, &[0.0, 5.0, 5.0, 5.0, 5.0]);
    let o = construct_case2(&g, 1, 4).unwrap();
    let family = o.family.as_ref().unwrap();
    assert_eq!(family.parameter, FamilyParameter::LeadOutput);
    assert_eq!(family.interval.to_string(), "(0, 5)");
    assert_eq!(family.representative, 2.5);
    assert_eq!(
        rows(&o),
        vec![
            vec![2.5, 0.0, 0.0, 0.0, 0.0],
            vec![5.0, 1.25, 1.25, 1.25, 1.25]
        ]
    );
    exactly_verifies(&g, &o);
    let ge = g.exact();
    let oe = construct_case2(&ge, 1, 4).unwrap();
    let fe = oe.family.unwrap();
    for k in 1..50 {
        let theta = Exact::new(k.into(), 10.into());
        let m = fe.instantiate(&theta);
        assert!(
            verify_quantity_matrix(&ge, &m, 0.0).unwrap().valid,
            "theta = {theta}"
        );
    }
    for theta in [Exact::from_integer(0.into()), Exact::from_integer(5.into())] {
        assert!(!fe.contains(&theta));
    }

    assert!(matches!(
        construct_case2(&game(11.0, &[0.0, 5.0, 5.0, 5.0, 5.0]), 1, 4),
        Err(OscillationError::Infeasible(
            Violation::FamilyConsistency { .. }
        ))
    ));
}

#[test]
fn k2_four_family_is_cut_by_idle_firms() {
    // c_2 - c_1 = 2 caps the lead output below A - c_5 = 4.
    let g = game(10.0, &[0.0, 2.0, 6.0, 6.0, 6.0]);
    let o = construct_case2(&g.exact(), 1, 4).unwrap();
    let f = o.family.unwrap();
    assert_eq!(f.lower().value, Exact::from_integer(0.into()));
    assert_eq!(f.upper().value, Exact::from_integer(2.into()));
    assert!(f.upper().closed);
    let past = Exact::from_integer(3.into());
    let m = f.instantiate(&past);
    assert!(!verify_quantity_matrix(&g.exact(), &m, 0.0).unwrap().valid);
}

#[test]
fn k2_four_family_with_sixth_firm() {
    // A - c_6 bounds the lead output from below.
    let g = game(10.0, &[0.0, 5.0, 5.0, 5.0, 5.0, 8.0]);
    let o = construct_case2(&g, 1, 4).unwrap();
    let f = o.family.unwrap();
    assert_eq!(f.interval.to_string(), "[2, 5)");
    assert_eq!(f.representative, 3.5);
}

#[test]
fn k1_two_closed_form() {
    // Found by scanning small integer games; the cycle is checked exactly.
    let mut found = 0;
    for a in 2..=16 {
        for c1 in 0..=3 {
            for c2 in c1..=4 {
                for c3 in c2..=a {
                    let g = game(a as f64, &[c1 as f64, c2 as f64, c3 as f64]).exact();
                    if let Ok(o) = construct_case2(&g, 2, 1) {
                        assert!(verify_quantity_matrix(&g, &o.matrix, 0.0).unwrap().valid);
                        assert_eq!(cycle_shape(&o.matrix, 0.0).unwrap().k1, 2);
                        found += 1;
                    }
                }
            }
        }
    }
    assert!(found > 0);
}

#[test]
fn case3_examples() {
    let g = game(12.0, &[0.0; 3]);
    let o = construct_case3(&g, Some(2.0)).unwrap();
    assert_eq!(rows(&o), vec![vec![2.0; 3], vec![4.0; 3]]);
    exactly_verifies(&g, &o);
    assert!(matches!(
        construct_case3(&g, Some(0.0)),
        Err(OscillationError::InfeasibleDelta { .. })
    ));
    assert!(matches!(
        construct_case3(&g, Some(6.0)),
        Err(OscillationError::InfeasibleDelta { .. })
    ));
    let family = construct_case3(&g, None).unwrap();
    assert_eq!(
        family.family.as_ref().unwrap().interval.to_string(),
        "(0, 6)"
    );
    assert_eq!(rows(&family), vec![vec![1.5; 3], vec![4.5; 3]]);

    let g = game(12.0, &[0.0, 0.0, 0.0, 9.0]);
    let o = construct_case3(&g, Some(4.0)).unwrap();
    assert_eq!(
        rows(&o),
        vec![vec![1.0, 1.0, 1.0, 0.0], vec![5.0, 5.0, 5.0, 0.0]]
    );
    exactly_verifies(&g, &o);
    let f = construct_case3(&g, None).unwrap().family.unwrap();
    assert_eq!(f.interval.to_string(), "(0, 4]");
    assert_eq!(f.representative, 2.0);

    assert!(matches!(
        construct_case3(&game(12.0, &[0.0, 0.0]), None),
        Err(OscillationError::InvalidShape(_))
    ));
    let err = construct_case3(&game(20.0, &[0.0; 4]), None).unwrap_err();
    assert!(matches!(
        err,
        OscillationError::Infeasible(Violation::EmptyFamily { .. })
    ));
    assert!(err.to_string().contains("(4c_4 - A - c_1 - c_2 - c_3)/6"));
}

#[test]
fn case3_limits_match_the_interval() {
    let g = game(30.0, &[1.0, 2.0, 4.0, 12.0]).exact();
    let (u1, u2) = case3_limits(&g);
    let f = construct_case3(&g, None).unwrap().family.unwrap();
    let u = if u2.clone().unwrap() < u1 {
        u2.unwrap()
    } else {
        u1
    };
    assert_eq!(f.upper().value, u);
}

#[test]
fn find_all_examples() {
    let report = find_all_oscillations(&game(20.0, &[0.0; 4]));
    assert_eq!(report.oscillations.len(), 1);
    assert_eq!(report.oscillations[0].case, OscillationCase::Case1);
    assert_eq!(report.equilibrium.q_star.values(), &[4.0; 4]);

    let report = find_all_oscillations(&game(8.0, &[2.0]));
    assert!(report.oscillations.is_empty());
    assert_eq!(report.equilibrium.q_star.values(), &[3.0]);

    let report = find_all_oscillations(&game(10.0, &[0.0, 3.0, 3.0]));
    assert!(report.oscillations.iter().any(|o| o.k1 == 1
        && o.k2 == 2
        && rows(o) == vec![vec![3.0, 0.0, 0.0], vec![5.0, 2.0, 2.0]]));
    let keys: Vec<_> = report
        .oscillations
        .iter()
        .map(|o| (o.case, o.k1, o.k2))
        .collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
}

#[test]
fn screen_agrees_with_full_check_exactly() {
    let mut state = 7u64;
    let mut next = |m: u64| {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        (state >> 33) % m
    };
    let mut feasible = 0;
    for _ in 0..3000 {
        let n = 2 + next(6) as usize;
        let a = 1 + next(30) as i64;
        let costs: Vec<f64> = (0..n).map(|_| next(a as u64 + 4) as f64).collect();
        let g = game(a as f64, &costs).exact();
        let prefix = prefix_sums(g.costs());
        for k1 in 1..=2 {
            for k2 in 1..=n - k1 {
                let screened = screen_case2(&g, &prefix, k1, k2, &Exact::from_integer(0.into()));
                let built = construct_case2(&g, k1, k2).is_ok();
                if (k1, k2) == (1, 4) {
                    assert!(screened || !built);
                } else {
                    assert_eq!(
                        screened, built,
                        "A = {a}, c = {costs:?}, k1 = {k1}, k2 = {k2}"
                    );
                }
                feasible += built as usize;
            }
        }
    }
    assert!(feasible > 0);
}

#[test]
fn shapes_and_matching() {
    let g = game(10.0, &[0.0, 3.0, 3.0]);
    let report = find_all_oscillations(&g);
    let o = &report.oscillations[0];
    let shape = cycle_shape(&o.matrix, 1e-9).unwrap();
    assert_eq!(
        (shape.case, shape.k1, shape.k2, shape.flipped),
        (o.case, o.k1, o.k2, false)
    );
    assert!(cycle_shape(&o.matrix.rotated(), 1e-9).unwrap().flipped);
    assert_eq!(match_cycle(&report, &o.matrix.rotated(), 1e-9), Some(0));

    let g = game(12.0, &[0.0; 3]);
    let report = find_all_oscillations(&g);
    let member = construct_case3(&g, Some(1.0)).unwrap().matrix;
    let idx = match_cycle(&report, &member, 1e-9).unwrap();
    assert_eq!(report.oscillations[idx].case, OscillationCase::Case3);
    let off = QuantityMatrix::new(vec![vec![2.0, 2.0, 2.5], vec![4.0; 3]]).unwrap();
    assert_eq!(match_cycle(&report, &off, 1e-6), None);
    assert_eq!(
        cycle_shape(
            &QuantityMatrix::new(vec![vec![1.0, 0.0, 1.0], vec![1.0; 3]]).unwrap(),
            0.0
        ),
        None
    );
}

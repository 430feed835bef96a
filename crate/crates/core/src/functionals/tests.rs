use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::container::{self, Container};
use super::*;
use crate::spectral::{Domain, Geometry, Grid, StateVector};

fn geom(n: usize) -> Geometry {
    Geometry::new(Domain::periodic_2pi(), Grid::cubic(n).unwrap())
}

fn random(g: Geometry, seed: u64) -> StateVector {
    StateVector::random(g, &mut ChaCha8Rng::seed_from_u64(seed), f64::INFINITY, 0.5)
}

#[test]
fn first_eigenvalue_is_one_on_the_standard_box() {
    let set = ModeSet::build(geom(16), 1).unwrap();
    assert!((set.modes()[0].lambda - 1.0).abs() < 1e-14);
    // the first shell holds every mode with |k|^2 = 1
    assert_eq!(set.shell_count(), 1);
    assert_eq!(set.len(), 2 + 2 + 3);
    assert_eq!(set.next_lambda(), Some(2.0));
}

#[test]
fn requests_round_up_to_full_shells() {
    let g = geom(16);
    let set = ModeSet::build(g, 20).unwrap();
    let lambdas = set.lambdas();
    assert!(set.len() >= 20);
    assert!(lambdas[set.len() - 1] < set.next_lambda().unwrap());
    assert!(lambdas.windows(2).all(|w| w[0] <= w[1]));
    assert!(ModeSet::build(g, 0).is_err());
    assert!(ModeSet::build(g, ModeSet::capacity(&g) + 1).is_err());
}

#[test]
fn modes_are_orthonormal_constrained_eigenfunctions() {
    let g = geom(16);
    let set = ModeSet::with_shells(g, 6).unwrap();
    let states: Vec<StateVector> = set.modes().iter().map(|m| m.to_state(g)).collect();
    let lambda = g.lambda_table();
    for (i, (m, e)) in set.modes().iter().zip(&states).enumerate() {
        assert!(e.project_symmetries().sub(e).max_abs_coeff() < 1e-15);
        let mut ae = e.clone();
        ae.apply_symbol(&lambda);
        assert!(ae.sub(&e.scaled(m.lambda)).norm(Space::H) < 1e-12);
        for (j, f) in states.iter().enumerate() {
            let target = if i == j { 1.0 } else { 0.0 };
            assert!((e.inner_product(f, Space::H) - target).abs() < 1e-12, "({i}, {j})");
        }
    }
}

#[test]
fn projection_and_complement_split_the_identity() {
    let g = geom(16);
    let set = ModeSet::with_shells(g, 4).unwrap();
    let u = random(g, 1);
    let p = project_modes(&u, &set);
    let q = complement(&u, &set);
    assert!(p.add(&q).sub(&u).max_abs_coeff() == 0.0);
    assert!(p.inner_product(&q, Space::H).abs() < 1e-12 * u.norm(Space::H).powi(2));
    let lam_next = set.next_lambda().unwrap();
    assert!(q.norm(Space::H) <= lam_next.powf(-0.5) * u.norm(Space::W1));

    let e1 = set.modes()[0].to_state(g);
    assert!(set.project(&e1).sub(&e1).norm(Space::H) < 1e-14);
    let bigger = ModeSet::with_shells(g, 5).unwrap();
    let next = bigger.modes()[set.len()].to_state(g);
    assert!(set.complement(&next).sub(&next).norm(Space::H) < 1e-14);
    let ratio = set.complement(&next).norm(Space::H) / next.norm(Space::W1);
    assert!((ratio - lam_next.powf(-0.5)).abs() < 1e-12);
}

#[test]
fn identity_multiplier_reproduces_the_modal_projector() {
    let g = geom(16);
    let set = ModeSet::with_shells(g, 3).unwrap();
    let k = MultiplierK::preset(&g, MultiplierPreset::Identity).unwrap();
    let op = build_generalized_operator(&set, &k).unwrap();
    assert!(op.is_lagrange());
    let u = random(g, 2);
    let diff = apply_interpolation(&u, &op).sub(&set.project(&u));
    assert!(diff.norm(Space::H) < 1e-12 * u.norm(Space::H));
}

#[test]
fn random_multiplier_gives_a_lagrange_operator() {
    let g = geom(16);
    let set = ModeSet::with_shells(g, 3).unwrap();
    let k = MultiplierK::preset(
        &g,
        MultiplierPreset::Random {
            seed: 4,
            min: 0.5,
            max: 2.0,
        },
    )
    .unwrap();
    let (lo, hi) = k.bounds();
    assert!(lo >= 0.5 && hi <= 2.0 && lo < hi);
    let op = InterpolationOperator::generalized(&set, &k).unwrap();
    assert!(op.lagrange_defect() < 1e-12);
    let u = random(g, 5);
    let ru = op.apply(&u);
    assert!(op.apply(&ru).sub(&ru).norm(Space::H) < 1e-12 * ru.norm(Space::H));
    let cfg = PowerIterationConfig::default();
    let norm = operator_norm(&op, Space::H, &cfg).unwrap().value;
    assert!(norm.is_finite() && norm >= 1.0 - 1e-9);
}

#[test]
fn smooth_multiplier_stays_in_bounds() {
    let g = geom(16);
    let k = MultiplierK::preset(&g, MultiplierPreset::Smooth).unwrap();
    let (lo, hi) = k.bounds();
    assert!(lo >= 0.5 - 1e-15 && hi <= 1.5);
    let mut bad = vec![1.0; g.grid.len()];
    bad[g.grid.index(1, 0, 0)] = 2.0;
    assert!(MultiplierK::from_symbol(&g, bad).is_err());
}

#[test]
fn lagrange_operator_from_mixed_functionals() {
    let g = geom(16);
    let set = ModeSet::with_shells(g, 3).unwrap();
    let outside = ModeSet::with_shells(g, 4).unwrap();
    let extra = &outside.modes()[set.len()].shape;
    // each functional leaks into a mode outside the span
    let riesz: Vec<SparseState> = set
        .modes()
        .iter()
        .map(|m| {
            let mut entries = m.shape.entries.clone();
            entries.extend(extra.scaled(0.3).entries);
            SparseState::new(entries)
        })
        .collect();
    let op = InterpolationOperator::from_functionals(g, riesz).unwrap();
    assert!(op.is_lagrange());
    let u = random(g, 6);
    let ru = op.apply(&u);
    assert!(op.apply(&ru).sub(&ru).norm(Space::H) < 1e-10 * ru.norm(Space::H));
    for (j, psi) in op.reconstruction_elements().iter().enumerate().take(3) {
        let p = psi.to_state(g);
        assert!(op.apply(&p).sub(&p).norm(Space::H) < 1e-10 * p.norm(Space::H), "{j}");
    }
    // anything the functionals annihilate is mapped to zero
    let annihilated = op.residual(&u);
    let back = op.observe(&annihilated);
    assert!(back.iter().all(|v| v.abs() < 1e-10 * u.norm(Space::H)));

    let cfg = PowerIterationConfig::default();
    let c1 = operator_norm(&op, Space::H, &cfg).unwrap().value;
    let c2 = operator_norm(&op, Space::W2, &cfg).unwrap().value;
    let w1 = operator_norm(&op, Space::W1, &cfg).unwrap().value;
    assert!(c1 > 1.0);
    assert!(w1 <= (c1 * c2).sqrt() * (1.0 + 1e-6), "{w1} {c1} {c2}");
}

#[test]
fn modal_complement_has_unit_norm() {
    let g = geom(16);
    let op = InterpolationOperator::modal(&ModeSet::with_shells(g, 3).unwrap());
    let cfg = PowerIterationConfig::default();
    for space in [Space::H, Space::W1, Space::W2] {
        let est = operator_norm(&op, space, &cfg).unwrap();
        assert!((est.value - 1.0).abs() < 1e-6, "{space:?}: {est:?}");
    }
}

#[test]
fn defect_estimator_matches_closed_form() {
    let g = geom(16);
    let cfg = PowerIterationConfig::default();
    let mut previous = f64::INFINITY;
    for shells in [1, 2, 3, 5] {
        let set = ModeSet::with_shells(g, shells).unwrap();
        let op = InterpolationOperator::modal(&set);
        for space in [Space::W1, Space::W2] {
            let exact = completeness_defect(DefectSource::Modes(&set), space, &cfg).unwrap().value;
            let est = completeness_defect(DefectSource::Operator(&op), space, &cfg).unwrap();
            assert!((est.value - exact).abs() < 0.01 * exact, "{shells} {space:?}: {est:?} vs {exact}");
            if space == Space::W1 {
                assert!(exact <= previous);
                previous = exact;
            }
        }
    }
}

#[test]
fn complete_observation_has_zero_defect() {
    let g = geom(8);
    let set = ModeSet::build(g, ModeSet::capacity(&g)).unwrap();
    assert_eq!(set.closed_form_defect(Space::W1), 0.0);
    let op = InterpolationOperator::modal(&set);
    let est = estimate_completeness_defect(&op, Space::W1, &PowerIterationConfig::default()).unwrap();
    assert!(est.value <= 1e-10);
    let u = random(g, 7);
    assert!(op.residual(&u).norm(Space::H) < 1e-12 * u.norm(Space::H));
}

#[test]
fn containers_roundtrip() {
    let g = geom(8);
    let set = ModeSet::with_shells(g, 2).unwrap();
    match container::decode(&container::encode_mode_set(&set)).unwrap() {
        Container::ModeSet(back) => assert_eq!(back, set),
        other => panic!("{other:?}"),
    }
    let op = InterpolationOperator::generalized(&set, &MultiplierK::preset(&g, MultiplierPreset::Smooth).unwrap())
        .unwrap();
    match container::decode(&container::encode_operator(&op)).unwrap() {
        Container::Operator(back) => assert_eq!(back, op),
        other => panic!("{other:?}"),
    }
    let u = random(g, 8);
    match container::decode(&container::encode_state(&u, 1.5)).unwrap() {
        Container::State(c) => {
            assert_eq!(c.state, u);
            assert_eq!(c.time, 1.5);
        }
        other => panic!("{other:?}"),
    }
    let mut bytes = container::encode_mode_set(&set);
    bytes[8] = 9;
    assert!(container::decode(&bytes).is_err());
    let bytes = container::encode_operator(&op);
    assert!(container::decode(&bytes[..bytes.len() - 1]).is_err());
}

#[test]
fn table_lists_every_mode_with_its_shell() {
    let set = ModeSet::with_shells(geom(8), 2).unwrap();
    let csv = set.table_csv();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "index,k1,k2,m,component,lambda,shell");
    assert_eq!(lines.len(), set.len() + 1);
    assert!(lines[1].ends_with(",1"));
    assert!(lines.last().unwrap().ends_with(",2"));
}

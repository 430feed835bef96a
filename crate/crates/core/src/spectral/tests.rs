use std::f64::consts::PI;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;

fn dims() -> impl Strategy<Value = [usize; 3]> {
    prop::array::uniform3(prop::sample::select(vec![8usize, 10, 12, 16]))
}

fn lengths() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(0.5f64..10.0)
}

fn geometry(l: [f64; 3], n: [usize; 3]) -> Geometry {
    Geometry::new(Domain::new(l[0], l[1], l[2]).unwrap(), Grid::new(n[0], n[1], n[2]).unwrap())
}

fn random_state(g: Geometry, seed: u64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    StateVector::random(g, &mut rng, 1e3, 0.5)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn transform_roundtrip(n in dims(), l in lengths(), seed in any::<u64>()) {
        let g = geometry(l, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<f64> = (0..g.grid.len()).map(|_| rand::Rng::gen_range(&mut rng, -5.0..5.0)).collect();
        let back = transform_inverse(&transform_forward(g, &samples).unwrap());
        let err = back.iter().zip(&samples).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        prop_assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn parseval(n in dims(), l in lengths(), seed in any::<u64>()) {
        let g = geometry(l, n);
        let u = random_state(g, seed);
        let [d1, d2, d3] = g.spacing();
        let physical: f64 = u
            .fields()
            .iter()
            .map(|f| f.to_physical().iter().map(|x| x * x).sum::<f64>())
            .sum::<f64>()
            * d1 * d2 * d3;
        let spectral = u.norm(Space::H).powi(2);
        prop_assert!((physical - spectral).abs() <= 1e-10 * spectral.max(1e-300));
        let norms = u.norms();
        for (space, value) in [Space::H, Space::W1, Space::W2].into_iter().zip(norms) {
            prop_assert!((u.norm(space) - value).abs() <= 1e-12 * value.max(1e-300));
        }
    }

    #[test]
    fn symmetry_projection_is_idempotent(n in dims(), l in lengths(), seed in any::<u64>()) {
        let g = geometry(l, n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut raw = StateVector::zeros(g);
        for f in raw.fields_mut() {
            for c in f.coeffs_mut() {
                *c = rustfft::num_complex::Complex64::new(
                    rand::Rng::gen_range(&mut rng, -1.0..1.0),
                    rand::Rng::gen_range(&mut rng, -1.0..1.0),
                );
            }
        }
        let once = raw.project_symmetries();
        let twice = once.project_symmetries();
        let scale = once.norm(Space::H).max(1e-300);
        prop_assert!(twice.sub(&once).norm(Space::H) <= 1e-13 * scale);
        prop_assert!(once.constraint_violation().max() < 1e-12);
        // an orthogonal projection never increases the norm
        prop_assert!(once.norm(Space::H) <= raw.norm(Space::H) * (1.0 + 1e-14));
    }

    #[test]
    fn dealias_is_idempotent_and_keeps_the_band(n in dims(), seed in any::<u64>()) {
        let g = geometry([2.0 * PI; 3], n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let samples: Vec<f64> = (0..g.grid.len()).map(|_| rand::Rng::gen_range(&mut rng, -1.0..1.0)).collect();
        let f = ScalarField::from_physical(g, &samples).unwrap();
        let d = dealias(&f);
        prop_assert_eq!(dealias(&d), d.clone());
        let cut = g.grid.cutoffs().map(|c| c as i64);
        prop_assert_eq!(d.coeff(cut[0], 0, cut[2]), f.coeff(cut[0], 0, cut[2]));
    }

    #[test]
    fn derivatives_commute(n in dims(), l in lengths(), seed in any::<u64>()) {
        let g = geometry(l, n);
        let u = random_state(g, seed);
        let a = derivative(&derivative(&u.v1, Direction::X1), Direction::Z);
        let b = derivative(&derivative(&u.v1, Direction::Z), Direction::X1);
        let err = a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        prop_assert!(err <= 1e-12 * a.max_abs().max(1.0), "{err}");
    }
}

#[test]
fn norm_examples() {
    // on the 2 pi box: ||cos x||^2 = 4 pi^3, and cos x has lambda = 1
    let g = geometry([2.0 * PI; 3], [16; 3]);
    let v1 = ScalarField::from_fn(g, |_, y, _| y.cos()).with_tags(Parity::Even, true);
    let u = StateVector::from_fields(v1, ScalarField::zeros(g, Parity::Even), ScalarField::zeros(g, Parity::Odd));
    let h2 = 4.0 * PI.powi(3);
    let [h, w1, w2] = u.norms();
    assert!((h * h - h2).abs() < 1e-11 * h2);
    assert!((w1 - h).abs() < 1e-12 * h);
    assert!((w2 - h).abs() < 1e-12 * h);

    // sin(2 z) cos(x) has lambda = 5
    let b = ScalarField::from_fn(g, |x, _, z| (2.0 * z).sin() * x.cos()).with_tags(Parity::Odd, true);
    let u = StateVector::from_fields(ScalarField::zeros(g, Parity::Even), ScalarField::zeros(g, Parity::Even), b);
    let [h, w1, w2] = u.norms();
    assert!((h * h - 2.0 * PI.powi(3)).abs() < 1e-11);
    assert!((w1 / h - 5f64.sqrt()).abs() < 1e-12);
    assert!((w2 / h - 5.0).abs() < 1e-12);
}

#[test]
fn non_unit_box_wavenumbers() {
    let g = geometry([1.0, 2.0, 4.0], [8; 3]);
    let f = ScalarField::from_fn(g, |_, _, z| (2.0 * PI * z / 4.0).sin());
    let d = derivative(&f, Direction::Z).to_physical();
    let expect = g.sample(|_, _, z| (PI / 2.0) * (PI * z / 2.0).cos());
    let err = d.iter().zip(&expect).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-13);
}

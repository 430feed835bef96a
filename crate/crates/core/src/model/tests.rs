use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::*;
use crate::spectral::{derivative, divergence_h, Direction, Domain, Geometry, Grid, Parity, ScalarField, Space, StateVector};

fn geom(n: usize) -> Geometry {
    Geometry::new(Domain::periodic_2pi(), Grid::cubic(n).unwrap())
}

fn random_state(g: Geometry, seed: u64, scale: f64) -> StateVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    StateVector::random(g, &mut rng, 60.0, 0.75).scaled(scale)
}

fn params(g: Geometry, terms: Terms) -> PhysicalParams {
    PhysicalParams::new(0.5, 1.3, ForcingSpec::zero(g)).unwrap().with_terms(terms)
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn advection_conserves_energy() {
    let g = geom(16);
    for seed in 0..5 {
        let u = random_state(g, seed, 3.0);
        let n = nonlinear_term(&u).unwrap();
        let w1 = u.norm(Space::W1);
        assert!(n.inner_product(&u, Space::H).abs() < 1e-12 * w1.powi(3));
    }
}

#[test]
fn advection_matches_hand_computed_example() {
    // u = (sin x cos z, 0, -cos x sin z) advects v1 into sin(2x) / 2
    let g = geom(16);
    let v1 = ScalarField::from_fn(g, |x, _, z| x.sin() * z.cos()).with_tags(Parity::Even, true);
    let v2 = ScalarField::zeros(g, Parity::Even);
    let b = ScalarField::from_fn(g, |x, y, z| y.cos() * x.cos() * z.sin()).with_tags(Parity::Odd, true);
    let w = vertical_velocity(&v1, &v2).unwrap();
    assert!(max_diff(&w.to_physical(), &g.sample(|x, _, z| -x.cos() * z.sin())) < 1e-13);

    let u = StateVector::from_fields(v1, v2, b);
    let n = nonlinear_term(&u).unwrap();
    assert!(max_diff(&n.v1.to_physical(), &g.sample(|x, _, _| 0.5 * (2.0 * x).sin())) < 1e-13);
    assert!(n.v2.max_abs() < 1e-14);
    // u.grad b = sin x cos z (-sin x cos y sin z) - cos x sin z (cos x cos y cos z)
    let expect = g.sample(|_, y, z| -y.cos() * z.sin() * z.cos());
    assert!(max_diff(&n.b.to_physical(), &expect) < 1e-13);
}

#[test]
fn advection_matches_padded_oracle() {
    // products evaluated on a 3/2-padded grid are exact for band-limited data
    let g = geom(16);
    let u = random_state(g, 7, 1.0);
    let n = nonlinear_term(&u).unwrap();
    let fine = geom(24);
    let lift = |f: &ScalarField| {
        let mut out = ScalarField::zeros(fine, f.parity());
        let half = 8i64;
        for k1 in -half + 1..half {
            for k2 in -half + 1..half {
                for m in -half + 1..half {
                    out.set_coeff(k1, k2, m, f.coeff(k1, k2, m));
                }
            }
        }
        out
    };
    let (v1, v2, b) = (lift(&u.v1), lift(&u.v2), lift(&u.b));
    let w = vertical_velocity(&v1, &v2).unwrap();
    let pv = [v1.to_physical(), v2.to_physical(), w.to_physical()];
    for (field, got) in [(&v1, &n.v1), (&v2, &n.v2), (&b, &n.b)] {
        let grads = [Direction::X1, Direction::X2, Direction::Z].map(|d| derivative(field, d).to_physical());
        let pf = field.to_physical();
        let adv: Vec<f64> = (0..fine.grid.len())
            .map(|i| (0..3).map(|a| pv[a][i] * grads[a][i]).sum())
            .collect();
        let oracle = ScalarField::from_physical(fine, &adv).unwrap();
        // the flux form agrees because the advecting field is divergence free
        let flux: Vec<ScalarField> = (0..3)
            .map(|a| {
                let prod: Vec<f64> = pv[a].iter().zip(&pf).map(|(x, y)| x * y).collect();
                ScalarField::from_physical(fine, &prod).unwrap()
            })
            .collect();
        let mut div = derivative(&flux[0], Direction::X1);
        div.axpy(1.0, &derivative(&flux[1], Direction::X2));
        div.axpy(1.0, &derivative(&flux[2], Direction::Z));
        let cut = g.grid.cutoffs()[0] as i64;
        for k1 in -cut..=cut {
            for k2 in -cut..=cut {
                for m in -cut..=cut {
                    let expect = (oracle.coeff(k1, k2, m) + div.coeff(k1, k2, m)) * 0.5;
                    assert!((got.coeff(k1, k2, m) - expect).norm() < 1e-12, "({k1},{k2},{m})");
                }
            }
        }
    }
}

#[test]
fn coriolis_does_no_work() {
    let g = geom(16);
    let terms = Terms {
        nonlinear: false,
        coriolis: true,
        buoyancy: false,
    };
    let u = random_state(g, 2, 1.0);
    let l = linear_terms(&u, &params(g, terms), false).unwrap();
    assert!(l.inner_product(&u, Space::H).abs() < 1e-13 * u.norm(Space::H).powi(2));
    assert!((l.v1.coeff(1, 2, 0) - u.v2.coeff(1, 2, 0) * 1.3).norm() < 1e-15);
}

#[test]
fn buoyancy_work_equals_b_times_w() {
    // (-grad int_0^z b, v)_H = (b, w)_H after integrating by parts twice
    let g = geom(16);
    let terms = Terms {
        nonlinear: false,
        coriolis: false,
        buoyancy: true,
    };
    let u = random_state(g, 4, 1.0);
    let l = linear_terms(&u, &params(g, terms), false).unwrap();
    assert!(l.b.max_abs() == 0.0);
    let work = l.inner_product(&u, Space::H);
    let w = vertical_velocity(&u.v1, &u.v2).unwrap();
    let bw = u.b.inner(&w);
    let scale = u.norm(Space::H).powi(2);
    assert!((work - bw).abs() < 1e-12 * scale, "{work} vs {bw}");
    assert!(bw.abs() > 1e-6 * scale);
}

#[test]
fn buoyancy_example() {
    // b = sin z cos x gives Phi = (1 - cos z) cos x and -d_x Phi = (1 - cos z) sin x
    let g = geom(16);
    let b = ScalarField::from_fn(g, |x, _, z| z.sin() * x.cos()).with_tags(Parity::Odd, true);
    let u = StateVector::from_fields(ScalarField::zeros(g, Parity::Even), ScalarField::zeros(g, Parity::Even), b);
    let terms = Terms {
        nonlinear: false,
        coriolis: false,
        buoyancy: true,
    };
    let l = linear_terms(&u, &params(g, terms), false).unwrap();
    let expect = g.sample(|x, _, z| (1.0 - z.cos()) * x.sin());
    assert!(max_diff(&l.v1.to_physical(), &expect) < 1e-13);
}

#[test]
fn pressure_projection_removes_gradient_of_mean() {
    let g = geom(16);
    let u = random_state(g, 9, 1.0);
    let grad_p = ScalarField::from_fn(g, |x, y, _| (2.0 * x).cos() * y.sin()).with_tags(Parity::Even, true);
    let mut f1 = u.v1.clone();
    let mut f2 = u.v2.clone();
    f1.axpy(1.0, &derivative(&grad_p, Direction::X1));
    f2.axpy(1.0, &derivative(&grad_p, Direction::X2));
    let (a, b, p) = pressure_projection(&f1, &f2);
    let mean_div = crate::spectral::ops::z_mean(&divergence_h(&a, &b));
    assert!(mean_div.max_abs() < 1e-13);
    let (a2, b2, p2) = pressure_projection(&a, &b);
    assert!(p2.max_abs() < 1e-14);
    assert!(max_diff(&a2.to_physical(), &a.to_physical()) < 1e-14);
    let mut back = a.clone();
    back.axpy(1.0, &derivative(&p, Direction::X1));
    assert!(max_diff(&back.to_physical(), &f1.to_physical()) < 1e-13);
    assert!(max_diff(&b2.to_physical(), &b.to_physical()) < 1e-14);
}

#[test]
fn heat_operator_case() {
    let g = geom(16);
    let mut u = StateVector::zeros(g);
    u.b.set_coeff(1, 2, 3, rustfft::num_complex::Complex64::new(0.0, 0.4));
    u.project_symmetries_in_place();
    let t = rhs(&u, &params(g, Terms::linear_diffusion()), true).unwrap();
    let expect = u.b.coeff(1, 2, 3) * (-0.5 * 14.0);
    assert!((t.state.b.coeff(1, 2, 3) - expect).norm() < 1e-15);
    assert!(t.state.v1.max_abs() == 0.0 && t.pressure.max_abs() == 0.0);
}

#[test]
fn rest_state_responds_only_to_forcing() {
    let g = geom(16);
    let forcing = ForcingSpec::preset(g, ForcingPreset::Default, 2.5).unwrap();
    let p = PhysicalParams::new(0.5, 1.0, forcing.clone()).unwrap();
    let t = rhs(&StateVector::zeros(g), &p, true).unwrap();
    assert!(t.state.sub(forcing.field()).norm(Space::H) < 1e-14);
    let expect = g.sample(|x, _, z| 2.5 * z.sin() * x.cos());
    assert!(max_diff(&forcing.field().b.to_physical(), &expect) < 1e-14);
}

#[test]
fn tendency_respects_constraints() {
    let g = geom(16);
    let p = PhysicalParams::new(0.5, 1.0, ForcingSpec::preset(g, ForcingPreset::Default, 3.0).unwrap()).unwrap();
    let u = random_state(g, 13, 2.0);
    let t = rhs(&u, &p, true).unwrap();
    assert!(t.state.constraint_violation().max() < 1e-13);
}

#[test]
fn geometry_mismatch_is_rejected() {
    let p = PhysicalParams::new(0.5, 1.0, ForcingSpec::zero(geom(8))).unwrap();
    assert!(matches!(rhs(&StateVector::zeros(geom(16)), &p, true), Err(ModelError::GeometryMismatch)));
}

#[test]
fn invalid_parameters_are_rejected() {
    let g = geom(8);
    assert!(matches!(PhysicalParams::new(0.0, 1.0, ForcingSpec::zero(g)), Err(ModelError::InvalidParams(_))));
    assert!(matches!(PhysicalParams::new(0.5, f64::NAN, ForcingSpec::zero(g)), Err(ModelError::InvalidParams(_))));
}

#[test]
fn full_tendency_energy_balance() {
    // (F(U), U)_H = -nu |U|_W1^2 + (G, U)_H + (b, w)_H
    let g = geom(16);
    let forcing = ForcingSpec::preset(g, ForcingPreset::Default, 3.0).unwrap();
    let p = PhysicalParams::new(0.5, 1.3, forcing.clone()).unwrap();
    for seed in 20..23 {
        let u = random_state(g, seed, 2.0);
        let t = rhs(&u, &p, true).unwrap();
        let lhs = t.state.inner_product(&u, Space::H);
        let w = vertical_velocity(&u.v1, &u.v2).unwrap();
        let expect = -0.5 * u.norm(Space::W1).powi(2) + forcing.field().inner_product(&u, Space::H) + u.b.inner(&w);
        let scale = u.norm(Space::W1).powi(3) + u.norm(Space::W1).powi(2);
        assert!((lhs - expect).abs() < 1e-11 * scale, "{lhs} vs {expect}");
    }
}

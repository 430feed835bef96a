//! Right-hand side of the primitive equations.
//!
//! With `u = (v1, v2, w)` the full velocity and `Phi = int_0^z b`, the
//! tendency is
//!
//! ```text
//! d_t v = G_f - N(v) - f v_perp - grad(p + Phi) + nu Lap3 v
//! d_t b = G_b - N(b) + nu Lap3 b
//! ```
//!
//! where the surface pressure `p` is whatever makes the vertical average
//! of `d_t v` horizontally divergence free.

use rustfft::num_complex::Complex64;

use super::{ModelError, PhysicalParams};
use crate::spectral::fft::{forward_real_pair_band, inverse_real_pair, inverse_real_pair_band};
use crate::spectral::ops::dealias_in_place;
use crate::spectral::{
    derivative, divergence_h, laplacian3, leray_z_mean, vertical_integral, Direction, Geometry, Parity,
    ScalarField, StateVector,
};

/// Time derivative of the state together with the diagnosed surface pressure.
#[derive(Debug, Clone, PartialEq)]
pub struct Tendency {
    pub state: StateVector,
    pub pressure: ScalarField,
}

/// `w = -int_0^z div_h v`.
pub fn vertical_velocity(v1: &ScalarField, v2: &ScalarField) -> Result<ScalarField, ModelError> {
    let mut w = vertical_integral(&divergence_h(v1, v2))?;
    w.scale(-1.0);
    w.set_tags(Parity::Odd, true);
    Ok(w)
}

/// Peak speeds of the advecting field, used for the CFL check.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Speeds {
    pub v1: f64,
    pub v2: f64,
    pub w: f64,
}

fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

fn mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x * y).collect()
}

fn field(geom: Geometry, coeffs: Vec<Complex64>, parity: Parity) -> ScalarField {
    let mut f = ScalarField::from_coeffs(geom, coeffs, parity, true).expect("grid sized");
    dealias_in_place(&mut f);
    f
}

/// Advection of `(v1, v2, b)` by `(v1, v2, w)` in skew-symmetric form
/// `(u.grad f + div(u f)) / 2`, evaluated pseudo-spectrally with 2/3-rule
/// dealiasing. Also returns the peak physical speeds.
pub fn nonlinear_term_with_speeds(state: &StateVector) -> Result<(StateVector, Speeds), ModelError> {
    advection(state, true)
}

fn advection(state: &StateVector, clean: bool) -> Result<(StateVector, Speeds), ModelError> {
    let geom = *state.geometry();
    let grid = geom.grid;
    let mut v1 = state.v1.clone();
    let mut v2 = state.v2.clone();
    let mut b = state.b.clone();
    for f in [&mut v1, &mut v2, &mut b] {
        dealias_in_place(f);
    }
    let w = vertical_velocity(&v1, &v2)?;

    let d = |f: &ScalarField, dir| derivative(f, dir);
    let (p_v1, p_v2) = inverse_real_pair_band(&grid, v1.coeffs(), v2.coeffs());
    let (p_w, p_b) = inverse_real_pair_band(&grid, w.coeffs(), b.coeffs());
    let (v1x, v1y) = inverse_real_pair_band(&grid, d(&v1, Direction::X1).coeffs(), d(&v1, Direction::X2).coeffs());
    let (v1z, v2x) = inverse_real_pair_band(&grid, d(&v1, Direction::Z).coeffs(), d(&v2, Direction::X1).coeffs());
    let (v2y, v2z) = inverse_real_pair_band(&grid, d(&v2, Direction::X2).coeffs(), d(&v2, Direction::Z).coeffs());
    let (bx, by) = inverse_real_pair_band(&grid, d(&b, Direction::X1).coeffs(), d(&b, Direction::X2).coeffs());
    let (bz, _) = inverse_real_pair_band(&grid, d(&b, Direction::Z).coeffs(), &vec![Complex64::default(); grid.len()]);

    let speeds = Speeds {
        v1: max_abs(&p_v1),
        v2: max_abs(&p_v2),
        w: max_abs(&p_w),
    };

    let advect = |fx: &[f64], fy: &[f64], fz: &[f64]| -> Vec<f64> {
        (0..grid.len())
            .map(|i| p_v1[i] * fx[i] + p_v2[i] * fy[i] + p_w[i] * fz[i])
            .collect()
    };
    let a_v1 = advect(&v1x, &v1y, &v1z);
    let a_v2 = advect(&v2x, &v2y, &v2z);
    let a_b = advect(&bx, &by, &bz);

    let (s_v1, s_v2) = forward_real_pair_band(&grid, &a_v1, &a_v2);
    let (s_b, f_11) = forward_real_pair_band(&grid, &a_b, &mul(&p_v1, &p_v1));
    let (f_12, f_22) = forward_real_pair_band(&grid, &mul(&p_v1, &p_v2), &mul(&p_v2, &p_v2));
    let (f_w1, f_w2) = forward_real_pair_band(&grid, &mul(&p_w, &p_v1), &mul(&p_w, &p_v2));
    let (f_1b, f_2b) = forward_real_pair_band(&grid, &mul(&p_v1, &p_b), &mul(&p_v2, &p_b));
    let (f_wb, _) = forward_real_pair_band(&grid, &mul(&p_w, &p_b), &vec![0.0; grid.len()]);

    // flux divergences d_x F1 + d_y F2 + d_z F3
    let flux_div = |f1: Vec<Complex64>, f2: Vec<Complex64>, f3: Vec<Complex64>, p1, p2, p3| {
        let mut out = derivative(&field(geom, f1, p1), Direction::X1);
        out.axpy(1.0, &derivative(&field(geom, f2, p2), Direction::X2));
        out.axpy(1.0, &derivative(&field(geom, f3, p3), Direction::Z));
        out
    };
    let e = Parity::Even;
    let o = Parity::Odd;
    let d_v1 = flux_div(f_11, f_12.clone(), f_w1, e, e, o);
    let d_v2 = flux_div(f_12, f_22, f_w2, e, e, o);
    let d_b = flux_div(f_1b, f_2b, f_wb, o, o, e);

    let combine = |adv: Vec<Complex64>, div: ScalarField, parity| {
        let mut out = field(geom, adv, parity);
        out.axpy(1.0, &div);
        out.scale(0.5);
        dealias_in_place(&mut out);
        out.set_tags(parity, true);
        if clean {
            out.symmetrize();
        }
        out
    };
    let n = StateVector {
        v1: combine(s_v1, d_v1, e),
        v2: combine(s_v2, d_v2, e),
        b: combine(s_b, d_b, o),
    };
    Ok((n, speeds))
}

/// `B(U, U)`: see [`nonlinear_term_with_speeds`].
pub fn nonlinear_term(state: &StateVector) -> Result<StateVector, ModelError> {
    nonlinear_term_with_speeds(state).map(|(n, _)| n)
}

/// Linear contributions to the tendency: `-f v_perp = (f v2, -f v1)`,
/// `-grad int_0^z b` on the velocity, and optionally `nu Lap3 U`.
pub fn linear_terms(
    state: &StateVector,
    params: &PhysicalParams,
    include_viscous: bool,
) -> Result<StateVector, ModelError> {
    let geom = *state.geometry();
    let mut out = StateVector::zeros(geom);
    if params.terms.coriolis && params.f_coriolis != 0.0 {
        out.v1.axpy(params.f_coriolis, &state.v2);
        out.v2.axpy(-params.f_coriolis, &state.v1);
    }
    if params.terms.buoyancy {
        let phi = vertical_integral(&state.b)?;
        out.v1.axpy(-1.0, &derivative(&phi, Direction::X1));
        out.v2.axpy(-1.0, &derivative(&phi, Direction::X2));
    }
    if include_viscous {
        out.v1.axpy(params.nu, &laplacian3(&state.v1));
        out.v2.axpy(params.nu, &laplacian3(&state.v2));
        out.b.axpy(params.nu, &laplacian3(&state.b));
    }
    Ok(out)
}

/// Removes the gradient part of the vertical average of a velocity
/// tendency. Returns the projected components and the surface pressure
/// `p(x)` whose gradient was removed.
pub fn pressure_projection(f1: &ScalarField, f2: &ScalarField) -> (ScalarField, ScalarField, ScalarField) {
    let geom = *f1.geometry();
    let mut a = f1.clone();
    let mut b = f2.clone();
    let potential = leray_z_mean(&mut a, &mut b);
    let mut p = ScalarField::zeros(geom, Parity::Even);
    for (idx, c) in potential {
        p.coeffs_mut()[idx] = c;
    }
    (a, b, p)
}

/// Full tendency: forcing minus advection plus the linear terms, followed
/// by the pressure projection and the symmetry projection. With
/// `include_viscous = false` the diffusion is left to the integrator.
pub fn rhs(state: &StateVector, params: &PhysicalParams, include_viscous: bool) -> Result<Tendency, ModelError> {
    rhs_with_speeds(state, params, include_viscous).map(|(t, _)| t)
}

pub(crate) fn rhs_with_speeds(
    state: &StateVector,
    params: &PhysicalParams,
    include_viscous: bool,
) -> Result<(Tendency, Speeds), ModelError> {
    let geom = *state.geometry();
    if *params.forcing.field().geometry() != geom {
        return Err(ModelError::GeometryMismatch);
    }
    let mut t = params.forcing.field().clone();
    let mut speeds = Speeds::default();
    if params.terms.nonlinear {
        // the symmetry projection below also cleans the advection term
        let (n, s) = advection(state, false)?;
        t.axpy(-1.0, &n);
        speeds = s;
    }
    t.axpy(1.0, &linear_terms(state, params, include_viscous)?);
    let (v1, v2, pressure) = pressure_projection(&t.v1, &t.v2);
    t.v1 = v1;
    t.v2 = v2;
    t.project_symmetries_in_place();
    t.dealias();
    Ok((Tendency { state: t, pressure }, speeds))
}

/// Peak speeds of a state (three extra inverse transforms).
pub fn speeds(state: &StateVector) -> Result<Speeds, ModelError> {
    let grid = state.geometry().grid;
    let w = vertical_velocity(&state.v1, &state.v2)?;
    let (p1, p2) = inverse_real_pair(&grid, state.v1.coeffs(), state.v2.coeffs());
    let pw = w.to_physical();
    Ok(Speeds {
        v1: max_abs(&p1),
        v2: max_abs(&p2),
        w: max_abs(&pw),
    })
}

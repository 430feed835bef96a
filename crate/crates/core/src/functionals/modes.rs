use std::fmt::Write as _;

use rustfft::num_complex::Complex64;

use super::sparse::{Entry, SparseState};
use super::FunctionalsError;
use crate::spectral::{Geometry, Space, StateVector};

/// Relative gap below which two eigenvalues belong to the same shell.
pub const SHELL_TOLERANCE: f64 = 1e-12;

/// Which real eigenfunction of a wavevector orbit a mode is.
///
/// Velocity modes with `m > 0` use `0..4` (`x` direction cosine and sine
/// phase, then `y`), the vertically uniform velocity modes use `0..2`
/// (polarization perpendicular to the horizontal wavevector), buoyancy modes
/// use `4..6`.
pub type ComponentIndex = usize;

#[derive(Debug, Clone, PartialEq)]
pub struct Mode {
    pub lambda: f64,
    /// Representative wavevector `(k1, k2, m)` with `m >= 0` and the
    /// horizontal part in the upper half plane.
    pub wavevector: [i64; 3],
    pub component: ComponentIndex,
    pub shape: SparseState,
}

impl Mode {
    pub fn to_state(&self, geom: Geometry) -> StateVector {
        self.shape.to_state(geom)
    }
}

#[derive(Debug, Clone, Copy)]
struct Descriptor {
    lambda: f64,
    k: [i64; 3],
    component: ComponentIndex,
}

/// The first `N` eigenpairs of `A` on the constrained, dealiased space.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSet {
    geom: Geometry,
    modes: Vec<Mode>,
    shell_ends: Vec<usize>,
    next_lambda: Option<f64>,
    capacity: usize,
}

fn is_upper(k1: i64, k2: i64) -> bool {
    k1 > 0 || (k1 == 0 && k2 >= 0)
}

fn orbit_components(k1: i64, k2: i64, m: i64) -> Vec<ComponentIndex> {
    let flat = k1 == 0 && k2 == 0;
    let mut out = Vec::new();
    match (flat, m == 0) {
        (true, true) => {}
        (false, true) => out.extend([0, 1]),
        (true, false) => out.extend([0, 2, 4]),
        (false, false) => out.extend([0, 1, 2, 3, 4, 5]),
    }
    out
}

fn descriptors(geom: &Geometry) -> Vec<Descriptor> {
    let [c1, c2, c3] = geom.grid.cutoffs().map(|c| c as i64);
    let [l1, l2, l3] = geom.domain.lengths();
    let tau = std::f64::consts::TAU;
    let mut out = Vec::new();
    for k1 in -c1..=c1 {
        for k2 in -c2..=c2 {
            if !is_upper(k1, k2) {
                continue;
            }
            for m in 0..=c3 {
                let a = tau * k1 as f64 / l1;
                let b = tau * k2 as f64 / l2;
                let c = tau * m as f64 / l3;
                let lambda = a * a + b * b + c * c;
                for component in orbit_components(k1, k2, m) {
                    out.push(Descriptor {
                        lambda,
                        k: [k1, k2, m],
                        component,
                    });
                }
            }
        }
    }
    out.sort_by(|x, y| x.lambda.total_cmp(&y.lambda));
    // within a shell the order is lexicographic in (k1, k2, m, component)
    let mut start = 0;
    while start < out.len() {
        let base = out[start].lambda;
        let mut end = start + 1;
        while end < out.len() && out[end].lambda - base <= SHELL_TOLERANCE * base {
            end += 1;
        }
        for d in &mut out[start..end] {
            d.lambda = base;
        }
        out[start..end].sort_by_key(|d| (d.k, d.component));
        start = end;
    }
    out
}

fn shape(geom: &Geometry, d: &Descriptor) -> SparseState {
    let g = geom.grid;
    let [k1, k2, m] = d.k;
    let half = Complex64::new(0.5, 0.0);
    let flat = k1 == 0 && k2 == 0;
    let sine = d.component % 2 == 1;
    let horizontal: Vec<([i64; 2], Complex64)> = if flat {
        vec![([0, 0], Complex64::new(1.0, 0.0))]
    } else if sine {
        vec![([k1, k2], Complex64::new(0.0, -0.5)), ([-k1, -k2], Complex64::new(0.0, 0.5))]
    } else {
        vec![([k1, k2], half), ([-k1, -k2], half)]
    };
    let buoyancy = d.component >= 4;
    let vertical: Vec<(i64, Complex64)> = if buoyancy {
        vec![(m, Complex64::new(0.0, -0.5)), (-m, Complex64::new(0.0, 0.5))]
    } else if m == 0 {
        vec![(0, Complex64::new(1.0, 0.0))]
    } else {
        vec![(m, half), (-m, half)]
    };
    let weights: Vec<(usize, f64)> = if buoyancy {
        vec![(2, 1.0)]
    } else if m == 0 {
        let [l1, l2, _] = geom.domain.lengths();
        let a = k1 as f64 / l1;
        let b = k2 as f64 / l2;
        let r = a.hypot(b);
        vec![(0, -b / r), (1, a / r)]
    } else if d.component < 2 {
        vec![(0, 1.0)]
    } else {
        vec![(1, 1.0)]
    };
    let mut entries = Vec::new();
    for &(component, w) in &weights {
        if w == 0.0 {
            continue;
        }
        for &([h1, h2], hc) in &horizontal {
            for &(z, vc) in &vertical {
                let i1 = g.slot(0, h1).expect("in band");
                let i2 = g.slot(1, h2).expect("in band");
                let i3 = g.slot(2, z).expect("in band");
                entries.push(Entry {
                    component,
                    index: g.index(i1, i2, i3),
                    value: hc * vc * w,
                });
            }
        }
    }
    let s = SparseState::new(entries);
    let n = s.norm(geom.domain.volume());
    s.scaled(1.0 / n)
}

impl ModeSet {
    /// Number of eigenmodes in the dealiased, constrained space.
    pub fn capacity(geom: &Geometry) -> usize {
        descriptors(geom).len()
    }

    /// The smallest full-shell set with at least `n_request` modes.
    pub fn build(geom: Geometry, n_request: usize) -> Result<Self, FunctionalsError> {
        let all = descriptors(&geom);
        if n_request == 0 || n_request > all.len() {
            return Err(FunctionalsError::InvalidRequest(format!(
                "requested {n_request} modes, the grid holds 1..={}",
                all.len()
            )));
        }
        let last = all[n_request - 1].lambda;
        let n = all.iter().take_while(|d| d.lambda <= last).count();
        Ok(Self::from_descriptors(geom, &all, n))
    }

    /// The first `shells` eigenvalue shells; zero shells gives the empty set.
    pub fn with_shells(geom: Geometry, shells: usize) -> Result<Self, FunctionalsError> {
        let all = descriptors(&geom);
        let mut n = 0;
        for _ in 0..shells {
            if n == all.len() {
                return Err(FunctionalsError::InvalidRequest(format!(
                    "requested {shells} shells, the grid has fewer"
                )));
            }
            let lam = all[n].lambda;
            n += all[n..].iter().take_while(|d| d.lambda == lam).count();
        }
        Ok(Self::from_descriptors(geom, &all, n))
    }

    /// All modes with `lambda <= lambda_max`.
    pub fn up_to_lambda(geom: Geometry, lambda_max: f64) -> Self {
        let all = descriptors(&geom);
        let n = all.iter().take_while(|d| d.lambda <= lambda_max).count();
        Self::from_descriptors(geom, &all, n)
    }

    fn from_descriptors(geom: Geometry, all: &[Descriptor], n: usize) -> Self {
        let modes: Vec<Mode> = all[..n]
            .iter()
            .map(|d| Mode {
                lambda: d.lambda,
                wavevector: d.k,
                component: d.component,
                shape: shape(&geom, d),
            })
            .collect();
        let shell_ends = shell_ends(modes.iter().map(|m| m.lambda));
        Self {
            geom,
            modes,
            shell_ends,
            next_lambda: all.get(n).map(|d| d.lambda),
            capacity: all.len(),
        }
    }

    pub(crate) fn from_parts(
        geom: Geometry,
        modes: Vec<Mode>,
        next_lambda: Option<f64>,
        capacity: usize,
    ) -> Self {
        let shell_ends = shell_ends(modes.iter().map(|m| m.lambda));
        Self {
            geom,
            modes,
            shell_ends,
            next_lambda,
            capacity,
        }
    }

    pub fn geometry(&self) -> &Geometry {
        &self.geom
    }

    pub fn len(&self) -> usize {
        self.modes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.modes.is_empty()
    }

    pub fn modes(&self) -> &[Mode] {
        &self.modes
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.modes.iter().map(|m| m.lambda).collect()
    }

    /// One past the last index of every shell.
    pub fn shell_ends(&self) -> &[usize] {
        &self.shell_ends
    }

    pub fn shell_count(&self) -> usize {
        self.shell_ends.len()
    }

    /// `lambda_{N+1}`, or `None` when the set exhausts the grid.
    pub fn next_lambda(&self) -> Option<f64> {
        self.next_lambda
    }

    /// Total number of modes the grid supports.
    pub fn grid_capacity(&self) -> usize {
        self.capacity
    }

    /// `(e_j, u)_H` for every mode.
    pub fn coefficients(&self, u: &StateVector) -> Vec<f64> {
        let vol = self.geom.domain.volume();
        self.modes.iter().map(|m| m.shape.inner(u, vol)).collect()
    }

    /// `P_N u`.
    pub fn project(&self, u: &StateVector) -> StateVector {
        let mut out = StateVector::zeros(self.geom);
        for (m, c) in self.modes.iter().zip(self.coefficients(u)) {
            m.shape.add_scaled_to(&mut out, c);
        }
        out
    }

    /// `Q_N u = u - P_N u`.
    pub fn complement(&self, u: &StateVector) -> StateVector {
        u.sub(&self.project(u))
    }

    /// `lambda_{N+1}^{-s/2}` for `V = W_s`, and 0 once the grid is exhausted.
    pub fn closed_form_defect(&self, space: Space) -> f64 {
        match self.next_lambda {
            None => 0.0,
            Some(l) => l.powf(-0.5 * space.order() as f64),
        }
    }

    /// CSV with columns `index,k1,k2,m,component,lambda,shell`.
    pub fn table_csv(&self) -> String {
        let mut out = String::from("index,k1,k2,m,component,lambda,shell\n");
        let mut shell = 0;
        for (i, m) in self.modes.iter().enumerate() {
            if i >= self.shell_ends[shell] {
                shell += 1;
            }
            let [k1, k2, k3] = m.wavevector;
            writeln!(out, "{},{k1},{k2},{k3},{},{:.17e},{}", i + 1, m.component, m.lambda, shell + 1)
                .expect("string write");
        }
        out
    }
}

fn shell_ends(lambdas: impl Iterator<Item = f64>) -> Vec<usize> {
    let lambdas: Vec<f64> = lambdas.collect();
    let mut ends = Vec::new();
    for i in 1..=lambdas.len() {
        if i == lambdas.len() || lambdas[i] != lambdas[i - 1] {
            ends.push(i);
        }
    }
    ends
}

/// `P_N u`.
pub fn project_modes(u: &StateVector, set: &ModeSet) -> StateVector {
    set.project(u)
}

/// `Q_N u`.
pub fn complement(u: &StateVector, set: &ModeSet) -> StateVector {
    set.complement(u)
}

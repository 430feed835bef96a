use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::AssimilationError;
use crate::functionals::ModeSet;
use crate::integrate::Integrator;
use crate::spectral::{Space, StateVector};

/// Squeezing ratios `||Q_N (S_t U - S_t U*)||_W1 / ||U - U*||_W1`.
#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeEstimate {
    pub q_max: f64,
    /// One ratio per non-degenerate pair, in input order.
    pub ratios: Vec<f64>,
    /// Pairs skipped because `U = U*`.
    pub skipped: usize,
}

impl SqueezeEstimate {
    fn from_ratios(ratios: Vec<f64>, skipped: usize) -> Self {
        let q_max = ratios.iter().copied().fold(0.0, f64::max);
        Self { q_max, ratios, skipped }
    }
}

/// `S_t U - S_t U*` for every non-degenerate pair, with `||U - U*||_W1`.
pub fn evolved_differences(
    pairs: &[(StateVector, StateVector)],
    t: f64,
    integrator: &Integrator,
) -> Result<(Vec<(StateVector, f64)>, usize), AssimilationError> {
    let mut out = Vec::with_capacity(pairs.len());
    let mut skipped = 0;
    for (u, u_star) in pairs {
        let d0 = u.sub(u_star).norm(Space::W1);
        if d0 == 0.0 {
            skipped += 1;
            continue;
        }
        let a = integrator.advance(u, t)?;
        let b = integrator.advance(u_star, t)?;
        out.push((a.sub(&b), d0));
    }
    Ok((out, skipped))
}

/// Squeezing ratio of every pair for the modal complement of `set`.
pub fn squeeze_from_differences(differences: &[(StateVector, f64)], skipped: usize, set: &ModeSet) -> SqueezeEstimate {
    let ratios = differences
        .iter()
        .map(|(d, d0)| set.complement(d).norm(Space::W1) / d0)
        .collect();
    SqueezeEstimate::from_ratios(ratios, skipped)
}

/// The squeezing factor `q_N` at time `t` over the given pairs.
pub fn estimate_squeezing(
    pairs: &[(StateVector, StateVector)],
    set: &ModeSet,
    t: f64,
    integrator: &Integrator,
) -> Result<SqueezeEstimate, AssimilationError> {
    let (diffs, skipped) = evolved_differences(pairs, t, integrator)?;
    Ok(squeeze_from_differences(&diffs, skipped, set))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SqueezeRow {
    pub shells: usize,
    pub n_modes: usize,
    pub t: f64,
    pub estimate: SqueezeEstimate,
}

/// Extra pairs `(U* + delta, U*)` whose difference lies in the first shell
/// outside the observed set, where linear decay is slowest.
#[derive(Debug, Clone, Copy)]
pub struct EdgeProbe<'a> {
    pub center: &'a StateVector,
    pub count: usize,
    /// `||delta||_W1`.
    pub size: f64,
    pub seed: u64,
}

/// Random combinations of the modes in shell `shells + 1`, empty when the
/// grid has no such shell.
pub fn edge_pairs(probe: &EdgeProbe<'_>, shells: usize) -> Result<Vec<(StateVector, StateVector)>, AssimilationError> {
    let geom = *probe.center.geometry();
    let inner = ModeSet::with_shells(geom, shells)?;
    let Ok(outer) = ModeSet::with_shells(geom, shells + 1) else {
        return Ok(Vec::new());
    };
    let edge = &outer.modes()[inner.len()..];
    let mut rng = ChaCha8Rng::seed_from_u64(probe.seed ^ (shells as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    let mut out = Vec::with_capacity(probe.count);
    for _ in 0..probe.count {
        let mut d = StateVector::zeros(geom);
        for m in edge {
            m.shape.add_scaled_to(&mut d, rng.gen_range(-1.0..1.0));
        }
        let n = d.norm(Space::W1);
        if n == 0.0 {
            continue;
        }
        d.scale(probe.size / n);
        out.push((probe.center.add(&d), probe.center.clone()));
    }
    Ok(out)
}

/// `q_N` for every combination of shell count and time. Each pair is
/// evolved once per time; edge pairs are drawn per shell count and their
/// ratios follow the generic ones.
pub fn squeezing_sweep(
    pairs: &[(StateVector, StateVector)],
    shell_counts: &[usize],
    times: &[f64],
    integrator: &Integrator,
    edge: Option<&EdgeProbe<'_>>,
) -> Result<Vec<SqueezeRow>, AssimilationError> {
    let geom = *integrator.geometry();
    let sets = shell_counts
        .iter()
        .map(|&s| ModeSet::with_shells(geom, s))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows = Vec::new();
    for &t in times {
        let (diffs, skipped) = evolved_differences(pairs, t, integrator)?;
        for (set, &shells) in sets.iter().zip(shell_counts) {
            let mut estimate = squeeze_from_differences(&diffs, skipped, set);
            if let Some(probe) = edge {
                let extra = edge_pairs(probe, shells)?;
                let (edge_diffs, edge_skipped) = evolved_differences(&extra, t, integrator)?;
                let more = squeeze_from_differences(&edge_diffs, edge_skipped, set);
                estimate.ratios.extend(more.ratios);
                estimate.skipped += more.skipped;
                estimate.q_max = estimate.q_max.max(more.q_max);
            }
            rows.push(SqueezeRow {
                shells,
                n_modes: set.len(),
                t,
                estimate,
            });
        }
    }
    Ok(rows)
}

/// CSV with columns `shells,N_modes,t,q_max,q_mean,pairs`.
pub fn sweep_csv(rows: &[SqueezeRow]) -> String {
    let mut out = String::from("shells,N_modes,t,q_max,q_mean,pairs\n");
    for r in rows {
        let n = r.estimate.ratios.len();
        let mean = if n == 0 { 0.0 } else { r.estimate.ratios.iter().sum::<f64>() / n as f64 };
        writeln!(
            out,
            "{},{},{:.17e},{:.17e},{:.17e},{}",
            r.shells, r.n_modes, r.t, r.estimate.q_max, mean, n
        )
        .expect("string write");
    }
    out
}

/// Measured constants entering the bounds on prognostic values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipativityConstants {
    /// Decay rate of `||S_t U||_H` without forcing.
    pub a0: f64,
    /// Forcing gain: `limsup ||U(t)||_H <= a1 K_G`.
    pub a1: f64,
    /// `K_G = ||G||_H`.
    pub k_g: f64,
    /// Bound on `||U(t)||_W2` along the reference solution.
    pub k: f64,
    /// `||R||_{W2 -> H}`.
    pub c0: f64,
    /// `||I - R||_{H -> H}`.
    pub c1: f64,
    /// `||I - R||_{W2 -> W2}`, if measured.
    pub c2: Option<f64>,
    /// Smallest observation gap.
    pub alpha: f64,
    /// Bound on `||S_t u||_W2` for `t` in `[alpha, beta]` over the ball of
    /// radius `1 + rho_star` in `H`, if known.
    pub smoothing: Option<f64>,
}

impl DissipativityConstants {
    /// `q_* = c1 exp(-a0 alpha)`.
    pub fn q_star(&self) -> f64 {
        self.c1 * (-self.a0 * self.alpha).exp()
    }

    /// `(a1 K_G + c0 K) / (1 - q_*)`, defined only when `q_* < 1`.
    pub fn rho_star(&self) -> Option<f64> {
        let q = self.q_star();
        (q < 1.0).then(|| (self.a1 * self.k_g + self.c0 * self.k) / (1.0 - q))
    }

    /// `c2 C + (1 + c2) K`, when every ingredient is available.
    pub fn rho(&self) -> Option<f64> {
        self.rho_star()?;
        let c2 = self.c2?;
        let smoothing = self.smoothing?;
        Some(c2 * smoothing + (1.0 + c2) * self.k)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DissipativityCheck {
    pub sup_h: f64,
    pub sup_w2: f64,
    /// Suprema over the values with `n >= first_tail`.
    pub tail_sup_h: f64,
    pub tail_sup_w2: f64,
    pub first_tail: usize,
    /// Largest `||u_n||_H / ||u_{n-1}||_H`.
    pub max_h_ratio: f64,
    pub q_star: f64,
    /// `q_* < 1`.
    pub hypothesis_holds: bool,
    pub rho_star: Option<f64>,
    pub rho: Option<f64>,
    /// `tail_sup_h <= 1 + rho_star`.
    pub within_h_bound: Option<bool>,
    /// `tail_sup_w2 <= rho`.
    pub within_w2_bound: Option<bool>,
}

/// Compares the norms of the prognostic values `u_0, u_1, ...` with the
/// bounds implied by the measured constants. The leading `discard_fraction`
/// of the values is excluded from the tail suprema.
pub fn verify_dissipativity(
    norms_h: &[f64],
    norms_w2: &[f64],
    constants: &DissipativityConstants,
    discard_fraction: f64,
) -> DissipativityCheck {
    let sup = |x: &[f64]| x.iter().copied().fold(0.0, f64::max);
    let first_tail = ((discard_fraction * norms_h.len() as f64).floor() as usize).min(norms_h.len());
    let max_h_ratio = norms_h
        .windows(2)
        .filter(|w| w[0] > 0.0)
        .map(|w| w[1] / w[0])
        .fold(0.0, f64::max);
    let tail_sup_h = sup(&norms_h[first_tail..]);
    let tail_sup_w2 = sup(&norms_w2[first_tail.min(norms_w2.len())..]);
    let q_star = constants.q_star();
    let rho_star = constants.rho_star();
    let rho = constants.rho();
    DissipativityCheck {
        sup_h: sup(norms_h),
        sup_w2: sup(norms_w2),
        tail_sup_h,
        tail_sup_w2,
        first_tail,
        max_h_ratio,
        q_star,
        hypothesis_holds: q_star < 1.0,
        rho_star,
        rho,
        within_h_bound: rho_star.map(|r| tail_sup_h <= 1.0 + r),
        within_w2_bound: rho.map(|r| tail_sup_w2 <= r),
    }
}

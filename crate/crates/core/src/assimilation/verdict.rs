use serde::{Deserialize, Serialize};

use super::AssimilationError;
use crate::fit::fit_line;

/// Minimum number of post-transient errors needed for a verdict.
pub const MIN_TAIL: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Reliable,
    NotReliable,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Reliable => "reliable",
            Verdict::NotReliable => "not-reliable",
        }
    }
}

/// How a contraction ratio is obtained from an error sequence.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictConfig {
    /// Reliable needs `q_tilde <= 1 - margin`.
    pub margin: f64,
    /// Leading fraction of the steps treated as transient.
    pub discard_fraction: f64,
    /// Errors at or below this level are rounding noise and never fitted.
    pub noise_floor: f64,
    /// Reliable also needs `final error <= final_ratio * initial error`.
    pub final_ratio: f64,
}

impl Default for VerdictConfig {
    fn default() -> Self {
        Self {
            margin: 0.05,
            discard_fraction: 0.2,
            noise_floor: 0.0,
            final_ratio: 1e-2,
        }
    }
}

/// Which part of the sequence the fit used.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitWindow {
    /// Post-transient points `first..=last` above the noise floor.
    Tail { first: usize, last: usize },
    /// The errors collapse into the noise floor before the tail; the fit
    /// covers the descent `first..=last` from `n = 1`.
    Descent { first: usize, last: usize },
    /// Fewer than two points above the floor: `q_tilde` is the per-step
    /// rate needed to fall from `e_0` to the floor in `steps` steps, an
    /// upper bound on the true rate.
    FloorBound { steps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    /// Fitted per-step contraction ratio `exp(slope)`.
    pub q_tilde: f64,
    pub slope: f64,
    /// RMS residual of the fit in log space.
    pub residual: f64,
    pub points: usize,
    pub window: FitWindow,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictReport {
    pub verdict: Verdict,
    pub fit: RateFit,
    /// `final error / initial error`.
    pub reduction: f64,
}

fn above(e: f64, floor: f64) -> bool {
    e.is_finite() && e > floor && e > 0.0
}

fn line(errors: &[f64], range: std::ops::RangeInclusive<usize>, window: FitWindow) -> Option<RateFit> {
    let x: Vec<f64> = range.clone().map(|n| n as f64).collect();
    let y: Vec<f64> = range.map(|n| errors[n].ln()).collect();
    let f = fit_line(&x, &y)?;
    Some(RateFit {
        q_tilde: f.slope.exp(),
        slope: f.slope,
        residual: f.residual,
        points: f.points,
        window,
    })
}

/// Least-squares fit of `log e_n` against `n` over the post-transient tail.
/// Points at the noise floor are excluded; when fewer than three tail points
/// remain the descent from `n = 1` down to the floor is fitted instead.
pub fn fit_contraction(errors: &[f64], config: &VerdictConfig) -> Result<RateFit, AssimilationError> {
    if errors.iter().any(|e| e.is_nan() || *e < 0.0) {
        return Err(AssimilationError::InsufficientData(
            "errors must be nonnegative numbers".into(),
        ));
    }
    let discard = (config.discard_fraction * errors.len() as f64).floor() as usize;
    let tail = errors.len().saturating_sub(discard);
    if tail < MIN_TAIL {
        return Err(AssimilationError::InsufficientData(format!(
            "{tail} post-transient steps, at least {MIN_TAIL} needed"
        )));
    }
    let floor = config.noise_floor;
    let kept: Vec<usize> = (discard..errors.len()).filter(|&n| above(errors[n], floor)).collect();
    if kept.len() >= 3 {
        let (first, last) = (kept[0], *kept.last().expect("non-empty"));
        let x: Vec<f64> = kept.iter().map(|&n| n as f64).collect();
        let y: Vec<f64> = kept.iter().map(|&n| errors[n].ln()).collect();
        let f = fit_line(&x, &y).expect("distinct abscissae");
        return Ok(RateFit {
            q_tilde: f.slope.exp(),
            slope: f.slope,
            residual: f.residual,
            points: f.points,
            window: FitWindow::Tail { first, last },
        });
    }
    let hit = (1..errors.len()).find(|&n| !above(errors[n], floor)).unwrap_or(errors.len());
    if hit >= 3 {
        let window = FitWindow::Descent { first: 1, last: hit - 1 };
        return Ok(line(errors, 1..=hit - 1, window).expect("at least two points"));
    }
    if !above(errors[0], floor) || hit == errors.len() {
        // nothing to measure a contraction against
        return Ok(RateFit {
            q_tilde: 0.0,
            slope: f64::NEG_INFINITY,
            residual: 0.0,
            points: 0,
            window: FitWindow::FloorBound { steps: 0 },
        });
    }
    let q = (floor.max(f64::MIN_POSITIVE) / errors[0]).powf(1.0 / hit as f64);
    Ok(RateFit {
        q_tilde: q,
        slope: q.ln(),
        residual: 0.0,
        points: 1,
        window: FitWindow::FloorBound { steps: hit },
    })
}

/// Reliable iff the fitted ratio is at most `1 - margin` and the error has
/// dropped to `final_ratio` of its initial value.
pub fn reliability_verdict(errors: &[f64], config: &VerdictConfig) -> Result<VerdictReport, AssimilationError> {
    let fit = fit_contraction(errors, config)?;
    let first = errors[0];
    let last = *errors.last().expect("checked length");
    let reduction = if first > 0.0 { last / first } else { 0.0 };
    let settled = last <= config.noise_floor || reduction <= config.final_ratio;
    let verdict = if fit.q_tilde <= 1.0 - config.margin && settled {
        Verdict::Reliable
    } else {
        Verdict::NotReliable
    };
    Ok(VerdictReport { verdict, fit, reduction })
}

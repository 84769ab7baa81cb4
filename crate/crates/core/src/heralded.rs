//! Multi-photon noise in heralded pair sources.
//!
//! A two-mode squeezed vacuum emits `n` pairs with probability
//! `P(n) = (1 − λ²) λ^(2n)`. The idler passes a loss channel of transmission
//! `η_H` and is then measured; the signal is kept only when the measurement
//! heralds one photon. Signal-mode loss is not modelled, so the vacuum
//! contribution to the error is identically zero.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Largest tail mass `Σ_{n > n_max} P(n)` accepted after truncation.
pub const TAIL_TOLERANCE: f64 = 1e-12;

/// Absolute tolerance on `λ` for the error-constrained maximisation.
pub const LAMBDA_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairSourceState {
    /// Squeezing parameter, `0 ≤ λ < 1`.
    pub lam: f64,
    pub n_max: usize,
}

impl PairSourceState {
    pub fn new(lam: f64) -> Result<Self> {
        Self::with_truncation(lam, 40)
    }

    pub fn with_truncation(lam: f64, n_max: usize) -> Result<Self> {
        if !(0.0..1.0).contains(&lam) {
            return Err(invalid("lam", format!("{lam} not in [0, 1)")));
        }
        Ok(PairSourceState { lam, n_max })
    }

    /// State with `λ² = s`, truncated just far enough to meet [`TAIL_TOLERANCE`].
    pub fn from_pair_parameter(s: f64) -> Result<Self> {
        let lam = s.sqrt();
        let n_max = if s <= 0.0 {
            1
        } else {
            (TAIL_TOLERANCE.ln() / s.ln()).ceil().max(1.0) as usize
        };
        Self::with_truncation(lam, n_max)
    }

    /// `P(n)` for `n = 0..=n_max`.
    pub fn pair_distribution(&self) -> Vec<f64> {
        let s = self.lam * self.lam;
        let mut p = Vec::with_capacity(self.n_max + 1);
        let mut term = 1.0 - s;
        for _ in 0..=self.n_max {
            p.push(term);
            term *= s;
        }
        p
    }

    /// Probability mass discarded by the truncation, `λ^(2(n_max + 1))`.
    pub fn tail_mass(&self) -> f64 {
        (self.lam * self.lam).powi(self.n_max as i32 + 1)
    }
}

/// Heralding statistics of one source setting.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeraldResult {
    pub p_s: f64,
    /// Probability the heralded signal holds two or more photons.
    pub epsilon: f64,
}

/// Non-number-resolving, lossless heralding: any click is accepted.
pub fn herald_threshold(state: &PairSourceState) -> HeraldResult {
    let s = state.lam * state.lam;
    HeraldResult { p_s: s, epsilon: s }
}

/// Number-resolving heralding through an idler channel of transmission `η_H`.
pub fn herald_pnr(state: &PairSourceState, eta_h: f64) -> Result<HeraldResult> {
    if !(eta_h > 0.0 && eta_h <= 1.0) {
        return Err(invalid("eta_h", format!("{eta_h} not in (0, 1]")));
    }
    let tail = state.tail_mass();
    if tail > TAIL_TOLERANCE {
        return Err(Error::NonConvergence(format!(
            "truncation at n_max = {} leaves tail mass {tail:e}",
            state.n_max
        )));
    }
    let dist = state.pair_distribution();
    let mut p_s = 0.0;
    let mut miss = 1.0; // (1 − η_H)^(n−1)
    for (n, p) in dist.iter().enumerate().skip(1) {
        p_s += p * n as f64 * eta_h * miss;
        miss *= 1.0 - eta_h;
    }
    if p_s == 0.0 {
        return Ok(HeraldResult { p_s: 0.0, epsilon: 0.0 });
    }
    let single = dist.get(1).copied().unwrap_or(0.0) * eta_h;
    Ok(HeraldResult {
        p_s,
        epsilon: (1.0 - single / p_s).max(0.0),
    })
}

/// Closed forms of [`herald_pnr`] at `s = λ²`, no truncation.
pub fn herald_pnr_closed(s: f64, eta_h: f64) -> HeraldResult {
    let q = 1.0 - s * (1.0 - eta_h);
    HeraldResult {
        p_s: (1.0 - s) * eta_h * s / (q * q),
        epsilon: 1.0 - q * q,
    }
}

/// Largest `p_s` reachable with `ε ≤ eps_max`.
///
/// `ε` grows with `λ` while `p_s` peaks at `λ² = 1/(1 + η_H)`, so the answer
/// is the peak when it satisfies the constraint and the constraint boundary
/// otherwise.
pub fn max_ps_under_error(eta_h: f64, eps_max: f64) -> Result<f64> {
    if !(eta_h > 0.0 && eta_h <= 1.0) {
        return Err(invalid("eta_h", format!("{eta_h} not in (0, 1]")));
    }
    if !(eps_max > 0.0 && eps_max < 1.0) {
        return Err(invalid("eps_max", format!("{eps_max} not in (0, 1)")));
    }
    let eval = |lam: f64| -> Result<HeraldResult> {
        herald_pnr(&PairSourceState::from_pair_parameter(lam * lam)?, eta_h)
    };
    let lam_peak = (1.0 / (1.0 + eta_h)).sqrt();
    let at_peak = eval(lam_peak)?;
    if at_peak.epsilon <= eps_max {
        return Ok(at_peak.p_s);
    }
    let (mut lo, mut hi) = (0.0, lam_peak);
    let mut iterations = 0;
    while hi - lo > LAMBDA_TOLERANCE {
        iterations += 1;
        if iterations > 200 {
            return Err(Error::NonConvergence("bisection on λ did not converge".into()));
        }
        let mid = 0.5 * (lo + hi);
        if eval(mid)?.epsilon <= eps_max {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(eval(lo)?.p_s)
}

/// Smallest `η_H` for which [`max_ps_under_error`] reaches `target`.
pub fn min_eta_for_ps(target: f64, eps_max: f64) -> Result<f64> {
    if !(target > 0.0 && target <= 0.25) {
        return Err(invalid("target", format!("{target} not in (0, 1/4]")));
    }
    let (mut lo, mut hi) = (1e-6, 1.0);
    if max_ps_under_error(lo, eps_max)? >= target {
        return Ok(lo);
    }
    while hi - lo > 1e-9 {
        let mid = 0.5 * (lo + hi);
        if max_ps_under_error(mid, eps_max)? >= target - 1e-12 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// One point of the `p_s` versus `η_H` curves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HeraldCurvePoint {
    pub eta_h: f64,
    pub eps_max: f64,
    pub p_s: f64,
}

/// Evaluates [`max_ps_under_error`] on the product grid, ordered by `eps_max` then `η_H`.
pub fn herald_curve_grid(eps_values: &[f64], eta_grid: &[f64]) -> Result<Vec<HeraldCurvePoint>> {
    let pairs: Vec<(f64, f64)> = eps_values
        .iter()
        .flat_map(|&e| eta_grid.iter().map(move |&h| (e, h)))
        .collect();
    pairs
        .into_par_iter()
        .map(|(eps_max, eta_h)| {
            Ok(HeraldCurvePoint {
                eta_h,
                eps_max,
                p_s: max_ps_under_error(eta_h, eps_max)?,
            })
        })
        .collect()
}

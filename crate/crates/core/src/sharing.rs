//! Exact count-distribution propagation under perfect resource sharing.
//!
//! A module is a pipeline of sorting, merging and computation steps acting
//! on `P(X = j)`, the law of the number of intermediate states available.
//! Sorting only adds optical depth; merging groups states into input sets
//! for the next stage; computation keeps each set with probability `p`.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{check_probability, invalid, Result};
use crate::model::{SchemeSpec, SourceSpec};

/// Mass dropped from either tail of a distribution after each step.
const TAIL_PRUNE: f64 = 1e-16;

/// Relative cutoff when expanding a binomial row away from its mode.
const ROW_CUTOFF: f64 = 1e-20;

/// Probability vector over state counts, stored as a window `[offset, offset + len)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountDistribution {
    offset: usize,
    probs: Vec<f64>,
}

impl CountDistribution {
    /// Law given by `probs[j] = P(X = j)`.
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(invalid("probs", "entries must be finite and nonnegative"));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(invalid("probs", format!("entries sum to {total}")));
        }
        let mut d = CountDistribution { offset: 0, probs };
        d.trim();
        Ok(d)
    }

    pub fn point_mass(count: usize) -> Self {
        CountDistribution {
            offset: count,
            probs: vec![1.0],
        }
    }

    pub fn binomial(n: usize, p: f64) -> Result<Self> {
        check_probability("p", p)?;
        let (offset, probs) = binomial_row(n, p);
        let mut d = CountDistribution { offset, probs };
        d.trim();
        Ok(d)
    }

    pub fn prob(&self, j: usize) -> f64 {
        j.checked_sub(self.offset)
            .and_then(|i| self.probs.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    /// Largest count with nonzero stored probability.
    pub fn max_count(&self) -> usize {
        self.offset + self.probs.len().saturating_sub(1)
    }

    pub fn total(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.iter().map(|(j, p)| j as f64 * p).sum()
    }

    /// `(count, probability)` pairs over the stored window.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.probs.iter().enumerate().map(move |(i, &p)| (self.offset + i, p))
    }

    /// Dense vector `P(X = 0..=max_count)`.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.offset];
        v.extend_from_slice(&self.probs);
        v
    }

    fn trim(&mut self) {
        let mut dropped = 0.0;
        let mut start = 0;
        while start + 1 < self.probs.len() && dropped + self.probs[start] <= TAIL_PRUNE {
            dropped += self.probs[start];
            start += 1;
        }
        dropped = 0.0;
        let mut end = self.probs.len();
        while end > start + 1 && dropped + self.probs[end - 1] <= TAIL_PRUNE {
            dropped += self.probs[end - 1];
            end -= 1;
        }
        self.probs.truncate(end);
        self.probs.drain(..start);
        self.offset += start;
    }
}

/// Binomial pmf of `Bin(k, p)` restricted to where it is not negligible.
///
/// Returns `(first index, values)`. Values are generated by the ratio
/// recurrence outward from the mode, so nothing overflows for large `k`.
fn binomial_row(k: usize, p: f64) -> (usize, Vec<f64>) {
    if p <= 0.0 || k == 0 {
        return (0, vec![1.0]);
    }
    if p >= 1.0 {
        return (k, vec![1.0]);
    }
    let q = 1.0 - p;
    let mode = (((k + 1) as f64 * p).floor() as usize).min(k);
    let ln_mode = ln_binomial(k as u64, mode as u64) + mode as f64 * p.ln() + (k - mode) as f64 * q.ln();
    let at_mode = ln_mode.exp();
    let cutoff = at_mode * ROW_CUTOFF;

    let mut below = Vec::new();
    let mut v = at_mode;
    let mut j = mode;
    while j > 0 {
        v *= j as f64 / (k - j + 1) as f64 * q / p;
        j -= 1;
        if v < cutoff {
            break;
        }
        below.push(v);
    }
    let first = mode - below.len();
    let mut row: Vec<f64> = below.into_iter().rev().collect();
    row.push(at_mode);
    let mut v = at_mode;
    let mut j = mode;
    while j < k {
        v *= (k - j) as f64 / (j + 1) as f64 * p / q;
        j += 1;
        if v < cutoff {
            break;
        }
        row.push(v);
    }
    // The log-space mode value loses ~1e-10 relative precision at k ~ 1e5;
    // renormalizing makes the row exact up to the discarded tails.
    let total: f64 = row.iter().sum();
    row.iter_mut().for_each(|v| *v /= total);
    (first, row)
}

/// Groups states into sets of `c`: `P'(j) = Σ_{i<c} P(jc + i)`.
pub fn merge(dist: &CountDistribution, c: usize) -> Result<CountDistribution> {
    if c == 0 {
        return Err(invalid("c", "sets need at least one state"));
    }
    if c == 1 {
        return Ok(dist.clone());
    }
    let offset = dist.offset / c;
    let mut probs = vec![0.0; dist.max_count() / c - offset + 1];
    for (j, p) in dist.iter() {
        probs[j / c - offset] += p;
    }
    let mut out = CountDistribution { offset, probs };
    out.trim();
    Ok(out)
}

/// Keeps each set independently with probability `p`.
///
/// `P'(j) = Σ_k P(k) C(k, j) p^j (1 − p)^(k − j)`, i.e. `P' = P M` with the
/// binomial transition matrix `M`, evaluated row by row.
pub fn compute_stage(dist: &CountDistribution, p: f64) -> Result<CountDistribution> {
    check_probability("p", p)?;
    if p == 1.0 {
        return Ok(dist.clone());
    }
    let mut acc = vec![0.0; dist.max_count() + 1];
    let mut lo = usize::MAX;
    let mut hi = 0;
    for (k, pk) in dist.iter() {
        if pk == 0.0 {
            continue;
        }
        let (first, row) = binomial_row(k, p);
        lo = lo.min(first);
        hi = hi.max(first + row.len());
        for (i, m) in row.iter().enumerate() {
            acc[first + i] += pk * m;
        }
    }
    if lo == usize::MAX {
        return Ok(CountDistribution::point_mass(0));
    }
    acc.truncate(hi);
    acc.drain(..lo);
    let mut out = CountDistribution { offset: lo, probs: acc };
    out.trim();
    Ok(out)
}

/// Loss-adjusted success probability `p · η^(depth · n_detected)`.
pub fn effective_prob(p: f64, eta: f64, depth: u32, n_detected: u32) -> f64 {
    p * eta.powf(depth as f64 * n_detected as f64)
}

/// One step of a sharing pipeline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PipelineStep {
    /// Routes states; contributes depth only.
    Sort { depth: u32 },
    Merge { copies: u32 },
    /// `detected` photons cross `depth` components before detection.
    Compute { success_prob: f64, detected: u32, depth: u32 },
}

/// Builds the pipeline of a scheme.
///
/// `depth_schedule[i]` is the depth seen by photons detected in stage `i`;
/// a sorting step carries the increase over the previous stage.
pub fn build_pipeline(scheme: &SchemeSpec, depth_schedule: &[u32]) -> Result<Vec<PipelineStep>> {
    if depth_schedule.len() != scheme.stages.len() {
        return Err(invalid(
            "depth_schedule",
            format!(
                "{} entries for the {} stages of `{}`",
                depth_schedule.len(),
                scheme.stages.len(),
                scheme.name
            ),
        ));
    }
    let mut steps = Vec::with_capacity(3 * scheme.stages.len());
    let mut previous = 0;
    for (stage, &depth) in scheme.stages.iter().zip(depth_schedule) {
        if depth < previous {
            return Err(invalid("depth_schedule", "depths must be cumulative"));
        }
        if depth > previous {
            steps.push(PipelineStep::Sort { depth: depth - previous });
        }
        previous = depth;
        steps.push(PipelineStep::Compute {
            success_prob: stage.success_prob,
            detected: stage.detected,
            depth,
        });
        steps.push(PipelineStep::Merge { copies: stage.copies });
    }
    Ok(steps)
}

/// Propagates `initial` through `steps` with per-component transmission `eta`.
///
/// `detected_survival` multiplies every detected photon once more (the
/// collection efficiency of sources whose photons were not pre-filtered).
pub fn run_pipeline(
    steps: &[PipelineStep],
    initial: CountDistribution,
    eta: f64,
    detected_survival: f64,
) -> Result<CountDistribution> {
    let mut dist = initial;
    for step in steps {
        dist = match *step {
            PipelineStep::Sort { .. } => dist,
            PipelineStep::Merge { copies } => merge(&dist, copies as usize)?,
            PipelineStep::Compute { success_prob, detected, depth } => {
                let p = effective_prob(success_prob, eta, depth, detected)
                    * detected_survival.powi(detected as i32);
                compute_stage(&dist, p)?
            }
        };
    }
    Ok(dist)
}

/// Success probability `1 − P_final(0)` of one perfectly shared module.
///
/// Single-photon sources start from `Bin(n_sources, p_s β)`; sources of
/// multi-photon states start from a point mass and apply `β` to each
/// detected photon instead.
pub fn simulate_module(
    scheme: &SchemeSpec,
    source: &SourceSpec,
    n_sources: u64,
    x: f64,
    depth_schedule: &[u32],
) -> Result<f64> {
    if !(0.0..1.0).contains(&x) {
        return Err(invalid("x", format!("{x} not in [0, 1)")));
    }
    if n_sources < scheme.units_per_state() {
        return Err(invalid(
            "n_sources",
            format!(
                "{n_sources} sources cannot attempt one state of `{}` ({} needed)",
                scheme.name,
                scheme.units_per_state()
            ),
        ));
    }
    let steps = build_pipeline(scheme, depth_schedule)?;
    let n = n_sources as usize;
    let (initial, detected_survival) = if source.kind.emits_single_photons() {
        (CountDistribution::binomial(n, source.p_s * source.beta)?, 1.0)
    } else {
        (CountDistribution::point_mass(n), source.beta)
    };
    let last = run_pipeline(&steps, initial, 1.0 - x, detected_survival)?;
    // summed directly: 1 − P(0) cancels when success is rare
    let success: f64 = last.iter().filter(|&(j, _)| j > 0).map(|(_, p)| p).sum();
    Ok(success.clamp(0.0, 1.0))
}

/// `⌈log2 n⌉`, the depth of an optimistic sorting network on `n` modes.
pub fn sort_depth(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}

/// Depth schedule of the all-photonic scheme on `k` photon sources.
///
/// Single photons are only sorted when the source is probabilistic; each
/// later stage sorts the outputs of the previous one (`K/4`, `K/8`,
/// `K/16`, `K/48` states).
pub fn all_photonic_depth_schedule(k: u64, heralded: bool) -> Vec<u32> {
    let mut d = 0;
    let mut schedule = vec![0];
    let sizes = [if heralded { Some(k) } else { None }, Some(k / 4), Some(k / 8), Some(k / 16), Some(k / 48)];
    for n in sizes {
        d += n.map_or(0, sort_depth);
        schedule.push(d);
    }
    schedule
}

/// Depth schedule of the caterpillar scheme on `n_s` sources: only the
/// final fusion stage sees a sorting network.
pub fn caterpillar_depth_schedule(n_s: u64) -> Vec<u32> {
    vec![0, 0, sort_depth(n_s)]
}

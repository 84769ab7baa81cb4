//! Monte Carlo model of a spin-based RSG built from repeat-until-success gates.
//!
//! `d` groups of three spins are entangled in three stages:
//!
//! 1. each group runs two consecutive RUS rounds (edges a–b, then b–c);
//! 2. any two complete groups are joined by two edges attempted in parallel;
//! 3. any two stage-2 units are joined the same way, giving a 12-spin graph.
//!
//! A finished graph spends two emission cycles before it is stored. Work
//! that becomes available during a cycle is picked up at the next one, so
//! the fastest possible graph takes six cycles.
//!
//! Every `τ` cycles the RSG checks for a stored graph. A hit releases one
//! graph, whose groups restart from stage 1; a miss resets nothing.
//! `τ` may be fractional: period `j` ends at cycle `⌈j τ⌉`.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, invalid, Error, Result};
use crate::model::{DEFAULT_P_RSG, RESOURCE_STATE_PHOTONS};

/// Latency of the fastest graph: four gate rounds plus two emission cycles.
pub const TAU_MIN: f64 = 6.0;

const EMISSION_CYCLES: u8 = 2;
const GATE_SUCCESS: f64 = 0.5;
const GROUPS_PER_GRAPH: usize = 4;
const SPINS_PER_GROUP: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EdgeOutcome {
    Success,
    GateFailure,
    Erasure,
}

/// How photon loss enters an edge attempt.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EdgeLossModel {
    /// Survival `β (1 − x)^3` for the photon pair.
    #[default]
    PerAttempt,
    /// Survival `(β (1 − x)^3)^2`, one factor per photon.
    PerPhoton,
}

impl EdgeLossModel {
    pub fn survival(self, beta: f64, x: f64) -> f64 {
        let one = beta * (1.0 - x).powi(3);
        match self {
            EdgeLossModel::PerAttempt => one,
            EdgeLossModel::PerPhoton => one * one,
        }
    }
}

/// Samples one RUS edge attempt with the per-attempt loss model.
pub fn attempt_edge<R: Rng + ?Sized>(rng: &mut R, beta: f64, x: f64) -> EdgeOutcome {
    attempt_with_survival(rng, EdgeLossModel::PerAttempt.survival(beta, x), GATE_SUCCESS)
}

fn attempt_with_survival<R: Rng + ?Sized>(rng: &mut R, survival: f64, gate: f64) -> EdgeOutcome {
    if rng.random::<f64>() >= survival {
        EdgeOutcome::Erasure
    } else if rng.random_bool(gate) {
        EdgeOutcome::Success
    } else {
        EdgeOutcome::GateFailure
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RusConfig {
    /// Three-spin groups; `3d` sources.
    pub d: usize,
    pub beta: f64,
    pub x: f64,
    pub p_target: f64,
    /// Internal cycles per sample.
    pub horizon: u64,
    /// Independent samples, each with its own RNG stream.
    pub samples: u32,
    pub seed: u64,
    pub loss_model: EdgeLossModel,
    /// Largest `τ` tried before reporting infeasibility.
    pub tau_cap: f64,
    /// Width of the final bracket on `τ`.
    pub tau_resolution: f64,
}

impl Default for RusConfig {
    fn default() -> Self {
        RusConfig {
            d: 4,
            beta: 1.0,
            x: 0.0,
            p_target: DEFAULT_P_RSG,
            horizon: 100_000,
            samples: 4,
            seed: 7,
            loss_model: EdgeLossModel::PerAttempt,
            tau_cap: 1000.0,
            tau_resolution: 1e-3,
        }
    }
}

impl RusConfig {
    pub fn validate(&self) -> Result<()> {
        if self.d < GROUPS_PER_GRAPH {
            return Err(invalid("d", format!("{} groups cannot hold a 12-spin graph", self.d)));
        }
        if self.d > u16::MAX as usize {
            return Err(invalid("d", "too many groups"));
        }
        check_probability("beta", self.beta)?;
        if !(0.0..1.0).contains(&self.x) {
            return Err(invalid("x", format!("{} not in [0, 1)", self.x)));
        }
        if !(self.p_target > 0.0 && self.p_target < 1.0) {
            return Err(invalid("p_target", format!("{} not in (0, 1)", self.p_target)));
        }
        if self.samples == 0 || self.horizon == 0 {
            return Err(invalid("horizon", "need at least one sample of one cycle"));
        }
        if !(self.tau_cap >= 1.0 && self.tau_resolution > 0.0) {
            return Err(invalid("tau_cap", "need tau_cap >= 1 and a positive resolution"));
        }
        Ok(())
    }

    pub fn n_sources(&self) -> usize {
        SPINS_PER_GROUP * self.d
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RusOutcome {
    pub d: usize,
    pub beta: f64,
    pub x: f64,
    /// Smallest period length meeting the target, in internal cycles.
    pub tau: f64,
    /// `N / (3d τ)`.
    pub eta_r: f64,
    /// Cycles per completed graph per 12 sources, all graphs released at once.
    pub mean_cycles: f64,
    pub success_fraction: f64,
    /// Wilson 95 % interval on `success_fraction`.
    pub ci95: (f64, f64),
    pub periods: u64,
}

type Pair = [u16; 2];
type Quad = [u16; 4];

/// Two components being joined by two parallel edges.
#[derive(Debug, Clone, Copy)]
struct Join<T> {
    left: T,
    right: T,
    done: [bool; 2],
}

/// Reusable simulation state for one sample.
struct Sim {
    survival: f64,
    gate: f64,
    stage1: Vec<(u16, u8)>,
    pool1: VecDeque<u16>,
    stage2: Vec<Join<u16>>,
    pool2: VecDeque<Pair>,
    stage3: Vec<Join<Pair>>,
    emitting: Vec<(Quad, u8)>,
    stored: VecDeque<Quad>,
    // work becoming available at the next cycle
    new_stage1: Vec<u16>,
    new_pool1: Vec<u16>,
    new_pool2: Vec<Pair>,
    new_emitting: Vec<Quad>,
}

enum JoinResult {
    Pending,
    Done,
    /// Erasure on the left (`true`) or right component.
    Erased(bool),
}

impl Sim {
    fn new(d: usize, survival: f64) -> Self {
        Sim {
            survival,
            gate: GATE_SUCCESS,
            stage1: (0..d as u16).map(|g| (g, 0)).collect(),
            pool1: VecDeque::new(),
            stage2: Vec::new(),
            pool2: VecDeque::new(),
            stage3: Vec::new(),
            emitting: Vec::new(),
            stored: VecDeque::new(),
            new_stage1: Vec::new(),
            new_pool1: Vec::new(),
            new_pool2: Vec::new(),
            new_emitting: Vec::new(),
        }
    }

    fn attempt_join<T>(&self, join: &mut Join<T>, rng: &mut ChaCha8Rng) -> JoinResult {
        let mut erased = false;
        for done in join.done.iter_mut().filter(|d| !**d) {
            match attempt_with_survival(rng, self.survival, self.gate) {
                EdgeOutcome::Success => *done = true,
                EdgeOutcome::GateFailure => {}
                EdgeOutcome::Erasure => erased = true,
            }
        }
        if erased {
            JoinResult::Erased(rng.random_bool(0.5))
        } else if join.done == [true, true] {
            JoinResult::Done
        } else {
            JoinResult::Pending
        }
    }

    /// Advances one internal clock cycle.
    fn step(&mut self, rng: &mut ChaCha8Rng) {
        while self.pool1.len() >= 2 {
            let (a, b) = (self.pool1.pop_front().unwrap(), self.pool1.pop_front().unwrap());
            self.stage2.push(Join { left: a, right: b, done: [false; 2] });
        }
        while self.pool2.len() >= 2 {
            let (a, b) = (self.pool2.pop_front().unwrap(), self.pool2.pop_front().unwrap());
            self.stage3.push(Join { left: a, right: b, done: [false; 2] });
        }

        let (survival, gate) = (self.survival, self.gate);
        let mut i = 0;
        while i < self.stage1.len() {
            let (g, round) = &mut self.stage1[i];
            match attempt_with_survival(rng, survival, gate) {
                EdgeOutcome::Success if *round == 1 => {
                    self.new_pool1.push(*g);
                    self.stage1.swap_remove(i);
                    continue;
                }
                EdgeOutcome::Success => *round = 1,
                EdgeOutcome::GateFailure => {}
                EdgeOutcome::Erasure => *round = 0,
            }
            i += 1;
        }

        let mut i = 0;
        while i < self.stage2.len() {
            let mut join = self.stage2[i];
            match self.attempt_join(&mut join, rng) {
                JoinResult::Pending => {
                    self.stage2[i] = join;
                    i += 1;
                }
                JoinResult::Done => {
                    self.new_pool2.push([join.left, join.right]);
                    self.stage2.swap_remove(i);
                }
                JoinResult::Erased(left) => {
                    let (lost, kept) = if left { (join.left, join.right) } else { (join.right, join.left) };
                    self.new_stage1.push(lost);
                    self.new_pool1.push(kept);
                    self.stage2.swap_remove(i);
                }
            }
        }

        let mut i = 0;
        while i < self.stage3.len() {
            let mut join = self.stage3[i];
            match self.attempt_join(&mut join, rng) {
                JoinResult::Pending => {
                    self.stage3[i] = join;
                    i += 1;
                }
                JoinResult::Done => {
                    let [a, b] = join.left;
                    let [c, e] = join.right;
                    self.new_emitting.push([a, b, c, e]);
                    self.stage3.swap_remove(i);
                }
                JoinResult::Erased(left) => {
                    let (lost, kept) = if left { (join.left, join.right) } else { (join.right, join.left) };
                    self.new_stage1.extend_from_slice(&lost);
                    self.new_pool2.push(kept);
                    self.stage3.swap_remove(i);
                }
            }
        }

        let mut i = 0;
        while i < self.emitting.len() {
            self.emitting[i].1 -= 1;
            if self.emitting[i].1 == 0 {
                self.stored.push_back(self.emitting[i].0);
                self.emitting.swap_remove(i);
            } else {
                i += 1;
            }
        }

        self.stage1.extend(self.new_stage1.drain(..).map(|g| (g, 0)));
        self.pool1.extend(self.new_pool1.drain(..));
        self.pool2.extend(self.new_pool2.drain(..));
        self.emitting.extend(self.new_emitting.drain(..).map(|q| (q, EMISSION_CYCLES)));
    }

    /// Releases the oldest stored graph; its groups restart next cycle.
    fn release(&mut self) -> bool {
        match self.stored.pop_front() {
            Some(quad) => {
                self.stage1.extend(quad.iter().map(|&g| (g, 0)));
                true
            }
            None => false,
        }
    }
}

fn sample_rng(seed: u64, sample: u32) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sample as u64);
    rng
}

/// Period outcomes for one period length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PeriodCounts {
    pub successes: u64,
    pub periods: u64,
}

impl PeriodCounts {
    pub fn fraction(&self) -> f64 {
        if self.periods == 0 {
            0.0
        } else {
            self.successes as f64 / self.periods as f64
        }
    }
}

/// Stops early once misses exceed `miss_limit`; the flag marks partial counts.
fn run_sample(config: &RusConfig, tau: f64, sample: u32, miss_limit: u64) -> (PeriodCounts, bool) {
    let mut rng = sample_rng(config.seed, sample);
    let mut sim = Sim::new(config.d, config.loss_model.survival(config.beta, config.x));
    let mut counts = PeriodCounts::default();
    let mut j = 1u64;
    let mut next_check = (tau).ceil() as u64;
    for cycle in 1..=config.horizon {
        sim.step(&mut rng);
        if cycle == next_check {
            counts.periods += 1;
            if sim.release() {
                counts.successes += 1;
            } else if counts.periods - counts.successes > miss_limit {
                return (counts, true);
            }
            j += 1;
            next_check = (j as f64 * tau).ceil() as u64;
            while next_check <= cycle {
                // τ < 1 would schedule several checks per cycle; clamp to one
                j += 1;
                next_check = (j as f64 * tau).ceil() as u64;
            }
        }
    }
    (counts, false)
}

/// Periodic-check statistics at a fixed `τ`, summed over samples.
pub fn success_counts(config: &RusConfig, tau: f64) -> Result<PeriodCounts> {
    config.validate()?;
    if !(tau >= 1.0) {
        return Err(invalid("tau", format!("{tau} < 1")));
    }
    Ok((0..config.samples)
        .into_par_iter()
        .map(|s| run_sample(config, tau, s, u64::MAX).0)
        .reduce(PeriodCounts::default, |a, b| PeriodCounts {
            successes: a.successes + b.successes,
            periods: a.periods + b.periods,
        }))
}

/// Whether the success fraction at `τ` reaches the target.
///
/// Decides exactly as [`success_counts`] would, but abandons a run once its
/// misses alone exceed the budget of all samples. Counts are complete when
/// the answer is `true`.
pub fn meets_target(config: &RusConfig, tau: f64) -> Result<(bool, PeriodCounts)> {
    config.validate()?;
    if !(tau >= 1.0) {
        return Err(invalid("tau", format!("{tau} < 1")));
    }
    // an upper bound on the period count keeps the limit conservative
    let total = (config.horizon as f64 / tau).floor() * config.samples as f64 + config.samples as f64;
    let miss_limit = ((1.0 - config.p_target) * total).floor() as u64 + 1;
    let (counts, aborted) = (0..config.samples)
        .into_par_iter()
        .map(|s| run_sample(config, tau, s, miss_limit))
        .reduce(
            || (PeriodCounts::default(), false),
            |(a, fa), (b, fb)| {
                let c = PeriodCounts { successes: a.successes + b.successes, periods: a.periods + b.periods };
                (c, fa || fb)
            },
        );
    Ok((!aborted && counts.periods > 0 && counts.fraction() >= config.p_target, counts))
}

/// Completed graphs over the horizon when every graph is released at once.
pub fn free_running_completions(config: &RusConfig) -> Result<u64> {
    config.validate()?;
    Ok((0..config.samples)
        .into_par_iter()
        .map(|s| {
            let mut rng = sample_rng(config.seed ^ 0x5eed, s);
            let mut sim = Sim::new(config.d, config.loss_model.survival(config.beta, config.x));
            let mut done = 0u64;
            for _ in 0..config.horizon {
                sim.step(&mut rng);
                while sim.release() {
                    done += 1;
                }
            }
            done
        })
        .sum())
}

/// Wilson score interval at 95 %.
pub fn wilson_ci95(successes: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let z = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = successes as f64 / n;
    let denom = 1.0 + z * z / n;
    let centre = (p + z * z / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Smallest `τ` whose success fraction reaches `p_target`, by bisection.
pub fn find_tau(config: &RusConfig) -> Result<(f64, PeriodCounts)> {
    config.validate()?;
    let (ok, at_cap) = meets_target(config, config.tau_cap)?;
    if !ok {
        return Err(Error::Infeasible(format!(
            "success fraction at the τ cap {} is below {}",
            config.tau_cap, config.p_target
        )));
    }
    // with several graphs in flight a period may be shorter than one graph's latency
    let (ok, at_floor) = meets_target(config, 1.0)?;
    if ok {
        return Ok((1.0, at_floor));
    }
    let (mut lo, mut hi, mut hi_counts) = (1.0, config.tau_cap, at_cap);
    while hi - lo > config.tau_resolution {
        let mid = 0.5 * (lo + hi);
        let (ok, counts) = meets_target(config, mid)?;
        if ok {
            hi = mid;
            hi_counts = counts;
        } else {
            lo = mid;
        }
    }
    Ok((hi, hi_counts))
}

/// Full τ search plus the free-running cycle count.
pub fn run(config: &RusConfig) -> Result<RusOutcome> {
    let (tau, counts) = find_tau(config)?;
    let completed = free_running_completions(config)?;
    let mean_cycles = if completed == 0 {
        f64::INFINITY
    } else {
        let twelves = config.d as f64 / GROUPS_PER_GRAPH as f64;
        twelves * (config.horizon * config.samples as u64) as f64 / completed as f64
    };
    Ok(RusOutcome {
        d: config.d,
        beta: config.beta,
        x: config.x,
        tau,
        eta_r: eta_r(config.d, tau),
        mean_cycles,
        success_fraction: counts.fraction(),
        ci95: wilson_ci95(counts.successes, counts.periods),
        periods: counts.periods,
    })
}

/// `N / (3d τ)`.
pub fn eta_r(d: usize, tau: f64) -> f64 {
    RESOURCE_STATE_PHOTONS as f64 / (SPINS_PER_GROUP as f64 * d as f64 * tau)
}

/// Resource efficiency for each group count.
pub fn spatially_multiplexed_curve(d_values: &[usize], base: &RusConfig) -> Result<Vec<(usize, f64)>> {
    d_values
        .iter()
        .map(|&d| Ok((d, run(&RusConfig { d, ..*base })?.eta_r)))
        .collect()
}

/// Smallest `d` that meets the target with a check every cycle (`r = r0`).
pub fn min_groups_at_full_rate(base: &RusConfig, d_cap: usize) -> Result<(usize, PeriodCounts)> {
    let meets = |d: usize| -> Result<(bool, PeriodCounts)> {
        meets_target(&RusConfig { d, ..*base }, 1.0)
    };
    let mut lo = GROUPS_PER_GRAPH - 1; // known to fail (or below range)
    let mut hi = GROUPS_PER_GRAPH;
    let mut hi_counts;
    loop {
        let (ok, c) = meets(hi)?;
        hi_counts = c;
        if ok {
            break;
        }
        lo = hi;
        if hi >= d_cap {
            return Err(Error::Infeasible(format!("no d <= {d_cap} reaches the target at τ = 1")));
        }
        hi = (hi * 2).min(d_cap);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        let (ok, c) = meets(mid)?;
        if ok {
            hi = mid;
            hi_counts = c;
        } else {
            lo = mid;
        }
    }
    Ok((hi, hi_counts))
}

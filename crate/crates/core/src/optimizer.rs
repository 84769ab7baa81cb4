//! Resource efficiency versus loss per component.
//!
//! For each loss `x` the RSG is split into `k` identical, perfectly shared
//! modules. The module size is limited by the optical depth the loss
//! budget allows; `k` is the fewest modules reaching the target success
//! probability. The search minimizes `k·m`, where `m` counts the resource
//! states a module can attempt.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{self, ceil_tolerant};
use crate::error::{check_probability, invalid, Error, Result};
use crate::model::{builtin_scheme, SchemeSpec, SourceKind, SourceSpec, DEFAULT_P_RSG, RESOURCE_STATE_PHOTONS, TRANSMISSION_THRESHOLD};
use crate::rus::{self, RusConfig};
use crate::sharing::{all_photonic_depth_schedule, caterpillar_depth_schedule, simulate_module};

/// Largest module, in sources.
pub const MODULE_SOURCE_CAP: u64 = 100_000;

/// Module success probabilities below this are treated as failures: the
/// sharing pipeline prunes tails at `1e-16`, so smaller values carry no digits.
pub const MIN_MODULE_SUCCESS: f64 = 1e-9;

/// `d_max` returned when the loss is too small to bound the depth.
pub const DEPTH_CAP: u32 = 1_000_000;

/// `log2(4 · 8 · 16 · 48)`: the divisors of the all-photonic stage sizes.
fn log2_stage_divisors() -> f64 {
    24576f64.log2()
}

/// Largest optical depth keeping `(1 − x)^D ≥ threshold`.
pub fn d_max(x: f64, threshold: f64) -> Result<u32> {
    if !(0.0..1.0).contains(&x) {
        return Err(invalid("x", format!("{x} not in [0, 1)")));
    }
    check_probability("threshold", threshold)?;
    if x == 0.0 {
        return Ok(DEPTH_CAP);
    }
    let ratio = threshold.ln() / (1.0 - x).ln();
    Ok((ratio + 1e-9).floor().min(DEPTH_CAP as f64) as u32)
}

/// Module families with a closed-form depth model.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModuleFamily {
    AllPhotonic,
    Caterpillar,
}

impl ModuleFamily {
    /// Sources per attempted resource state.
    pub fn granularity(self) -> u64 {
        match self {
            ModuleFamily::AllPhotonic => 96,
            ModuleFamily::Caterpillar => 3,
        }
    }

    /// Sources billed per attempted resource state, including boosting.
    pub fn billed_sources(self) -> u64 {
        match self {
            ModuleFamily::AllPhotonic => 168,
            ModuleFamily::Caterpillar => 4,
        }
    }

    /// Photons billed per attempted resource state.
    fn billed_photons(self) -> f64 {
        match self {
            ModuleFamily::AllPhotonic => 168.0,
            ModuleFamily::Caterpillar => 69.0,
        }
    }
}

/// Real-valued depth of a module of `n_sources` sources.
///
/// All-photonic: `h·log2 K + log2(K/4) + log2(K/8) + log2(K/16) + log2(K/48) + 3`
/// with `h = 1` for probabilistic sources. Caterpillar: `log2 N_s + 3`.
pub fn module_depth(family: ModuleFamily, n_sources: u64, heralded: bool) -> f64 {
    let k = (n_sources as f64).log2();
    match family {
        ModuleFamily::AllPhotonic => {
            let h = if heralded { 1.0 } else { 0.0 };
            (4.0 + h) * k - log2_stage_divisors() + 3.0
        }
        ModuleFamily::Caterpillar => k + 3.0,
    }
}

/// Largest module fitting into `d_max`, rounded down to whole resource-state units.
pub fn max_module_size(family: ModuleFamily, d_max: u32, heralded: bool) -> u64 {
    if d_max < 3 {
        return 0;
    }
    let g = family.granularity();
    let raw = match family {
        ModuleFamily::AllPhotonic => {
            let h = if heralded { 1.0 } else { 0.0 };
            2f64.powf((d_max as f64 - 3.0 + log2_stage_divisors()) / (4.0 + h))
        }
        ModuleFamily::Caterpillar => 2f64.powf(d_max as f64 - 3.0),
    };
    let capped = raw.min(MODULE_SOURCE_CAP as f64).floor() as u64;
    capped / g * g
}

/// All-photonic size bound with the exponent grouped as printed,
/// `2^(D − 3 + log2(24576)/(4 + h))`. Kept for comparison only.
pub fn max_module_size_printed(d_max: u32, heralded: bool) -> u64 {
    if d_max < 3 {
        return 0;
    }
    let h = if heralded { 1.0 } else { 0.0 };
    let raw = 2f64.powf(d_max as f64 - 3.0 + log2_stage_divisors() / (4.0 + h));
    let capped = raw.min(MODULE_SOURCE_CAP as f64).floor() as u64;
    capped / 96 * 96
}

/// Fewest independent modules reaching `p_target`.
pub fn modules_needed(p_module: f64, p_target: f64) -> Result<u64> {
    if !(p_module > 0.0) {
        return Err(Error::Infeasible("module never succeeds".into()));
    }
    if !(p_target > 0.0 && p_target < 1.0) {
        return Err(invalid("p_target", format!("{p_target} not in (0, 1)")));
    }
    if p_module >= 1.0 {
        return Ok(1);
    }
    let k = ceil_tolerant((-p_target).ln_1p() / (-p_module).ln_1p()).max(1.0);
    if k > u64::MAX as f64 / 1e6 {
        return Err(Error::Infeasible(format!("{k:e} modules needed")));
    }
    Ok(k as u64)
}

/// `N / (photons per state · k · m)`.
pub fn resource_efficiency(family: ModuleFamily, k: u64, m: u64) -> Result<f64> {
    if k == 0 || m == 0 {
        return Err(invalid("k", "k and m must be positive"));
    }
    Ok(RESOURCE_STATE_PHOTONS as f64 / (family.billed_photons() * k as f64 * m as f64))
}

/// Architectures on the trade-off figure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Architecture {
    /// All-photonic with heralded single-photon sources.
    Hsps { p_s: f64 },
    /// All-photonic with deterministic single-photon sources.
    Dsps,
    Caterpillar,
    /// One 12-source RUS module.
    Rus,
    /// RUS with as many three-spin groups as needed to release a state every cycle.
    RusMultiplexed,
}

impl Architecture {
    pub fn name(&self) -> String {
        match self {
            Architecture::Hsps { p_s } => format!("hsps-allphotonic-ps{p_s}"),
            Architecture::Dsps => "dsps-allphotonic".into(),
            Architecture::Caterpillar => "caterpillar".into(),
            Architecture::Rus => "rus".into(),
            Architecture::RusMultiplexed => "rus-multiplexed".into(),
        }
    }

    /// Parses an architecture name; `p_s` applies to the heralded variant.
    pub fn parse(name: &str, p_s: f64) -> Result<Self> {
        match name {
            "hsps" | "hsps-allphotonic" => {
                if !(p_s > 0.0 && p_s < 1.0) {
                    return Err(invalid("p_s", format!("heralded sources need 0 < p_s < 1, got {p_s}")));
                }
                Ok(Architecture::Hsps { p_s })
            }
            "dsps" | "dsps-allphotonic" => Ok(Architecture::Dsps),
            "caterpillar" => Ok(Architecture::Caterpillar),
            "rus" => Ok(Architecture::Rus),
            "rus-multiplexed" => Ok(Architecture::RusMultiplexed),
            other => Err(Error::UnknownScheme(other.to_string())),
        }
    }

    fn photonic(&self) -> Option<(ModuleFamily, bool)> {
        match self {
            Architecture::Hsps { .. } => Some((ModuleFamily::AllPhotonic, true)),
            Architecture::Dsps => Some((ModuleFamily::AllPhotonic, false)),
            Architecture::Caterpillar => Some((ModuleFamily::Caterpillar, false)),
            _ => None,
        }
    }

    fn scheme_and_source(&self) -> Result<(SchemeSpec, SourceSpec)> {
        Ok(match *self {
            Architecture::Hsps { p_s } => (builtin_scheme("all-photonic", 2)?, SourceSpec::heralded(p_s)?),
            Architecture::Dsps => (
                builtin_scheme("all-photonic", 2)?.with_n_mux(5),
                SourceSpec::deterministic(SourceKind::DeterministicSingle),
            ),
            Architecture::Caterpillar => (builtin_scheme("caterpillar", 2)?, SourceSpec::deterministic(SourceKind::Caterpillar)),
            Architecture::Rus | Architecture::RusMultiplexed => {
                return Err(Error::Unsupported("RUS architectures have no photonic scheme".into()))
            }
        })
    }

    /// Resource-efficiency bound under perfect sharing.
    pub fn eta_r_bound(&self) -> Result<f64> {
        match self {
            Architecture::Rus | Architecture::RusMultiplexed => {
                bounds::eta_r_max_rus(bounds::RUS_MODULE_SOURCES, bounds::RUS_AVERAGE_CYCLES, RESOURCE_STATE_PHOTONS)
            }
            _ => {
                let (scheme, source) = self.scheme_and_source()?;
                bounds::eta_r_max(&scheme, &source)
            }
        }
    }

    /// Smallest depth at which any module fits.
    pub fn min_depth(&self) -> u32 {
        match self.photonic() {
            Some((family, heralded)) => module_depth(family, family.granularity(), heralded).ceil() as u32,
            None if *self == Architecture::Rus => 1,
            // the multiplexed module adds one GMZI to the resource-state path
            None => 2,
        }
    }

    /// Largest loss per component compatible with [`Architecture::min_depth`].
    pub fn max_loss(&self, threshold: f64) -> Result<f64> {
        bounds::max_loss_per_component(self.min_depth(), threshold)
    }
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for Architecture {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if let Some(p) = s.strip_prefix("hsps-allphotonic-ps") {
            let p_s = p.parse().map_err(|_| invalid("p_s", format!("bad value in `{s}`")))?;
            return Self::parse("hsps", p_s);
        }
        Self::parse(s, 0.05)
    }
}

/// One optimized configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffPoint {
    pub x: f64,
    pub eta_r: f64,
    pub n_sources_total: u64,
    pub k_modules: u64,
    /// Resource states attempted per module (`m`), or three-spin groups for RUS.
    pub module_size: u64,
    pub d_used: u32,
    /// Success probability of one module (photonic) or period success fraction (RUS).
    pub p_module: f64,
    /// RUS period length in internal cycles; 1 for photonic modules.
    pub tau: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TradeoffConfig {
    pub p_target: f64,
    pub threshold: f64,
    pub rus: RusConfig,
}

impl Default for TradeoffConfig {
    fn default() -> Self {
        TradeoffConfig {
            p_target: DEFAULT_P_RSG,
            threshold: TRANSMISSION_THRESHOLD,
            rus: RusConfig::default(),
        }
    }
}

/// Geometric grid of `points` losses from `lo` to `hi` inclusive.
pub fn geometric_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) || points == 0 {
        return Err(invalid("x_grid", format!("need 0 < lo <= hi, got [{lo}, {hi}]")));
    }
    if points == 1 {
        return Ok(vec![lo]);
    }
    let ratio = (hi / lo).ln() / (points - 1) as f64;
    let mut grid: Vec<f64> = (0..points).map(|i| lo * (ratio * i as f64).exp()).collect();
    grid[points - 1] = hi;
    Ok(grid)
}

/// Default grid: 40 points from `1e-4` to the architecture's maximal loss.
pub fn default_grid(arch: &Architecture, threshold: f64) -> Result<Vec<f64>> {
    geometric_grid(1e-4, arch.max_loss(threshold)?, 40)
}

/// Success probability of a photonic module attempting `m` resource states.
pub fn module_success(arch: &Architecture, m: u64, x: f64) -> Result<f64> {
    let (family, heralded) = arch
        .photonic()
        .ok_or_else(|| Error::Unsupported(format!("`{arch}` is not a photonic architecture")))?;
    let (scheme, source) = arch.scheme_and_source()?;
    let n = family.granularity() * m;
    let schedule = match family {
        ModuleFamily::AllPhotonic => all_photonic_depth_schedule(n, heralded),
        ModuleFamily::Caterpillar => caterpillar_depth_schedule(n),
    };
    simulate_module(&scheme, &source, n, x, &schedule)
}

/// Optimizes one loss value; `Ok(None)` when the loss is beyond the architecture.
pub fn optimize_point(arch: &Architecture, x: f64, config: &TradeoffConfig) -> Result<Option<TradeoffPoint>> {
    let depth_budget = d_max(x, config.threshold)?;
    if depth_budget < arch.min_depth() {
        return Ok(None);
    }
    match arch.photonic() {
        Some((family, heralded)) => {
            let size = max_module_size(family, depth_budget, heralded);
            let m_max = size / family.granularity();
            let mut best: Option<(u64, u64, f64)> = None; // (k, m, p_module)
            for m in 1..=m_max {
                if let Some((k, bm, _)) = best {
                    if m >= k * bm {
                        break; // k >= 1, so k·m can no longer improve
                    }
                }
                let p = module_success(arch, m, x)?;
                if p < MIN_MODULE_SUCCESS {
                    continue;
                }
                let k = modules_needed(p, config.p_target)?;
                if best.is_none_or(|(bk, bm, _)| k * m < bk * bm) {
                    best = Some((k, m, p));
                }
            }
            let Some((k, m, p)) = best else {
                return Ok(None);
            };
            let n = family.granularity() * m;
            Ok(Some(TradeoffPoint {
                x,
                eta_r: resource_efficiency(family, k, m)?,
                n_sources_total: k * m * family.billed_sources(),
                k_modules: k,
                module_size: m,
                d_used: module_depth(family, n, heralded).ceil() as u32,
                p_module: p,
                tau: 1.0,
            }))
        }
        None => {
            let base = RusConfig { x, p_target: config.p_target, ..config.rus };
            let point = if *arch == Architecture::Rus {
                match rus::find_tau(&base) {
                    Ok((tau, counts)) => Some((base.d, tau, counts.fraction())),
                    Err(Error::Infeasible(_)) => None,
                    Err(e) => return Err(e),
                }
            } else {
                match rus::min_groups_at_full_rate(&base, 4096) {
                    Ok((d, counts)) => Some((d, 1.0, counts.fraction())),
                    Err(Error::Infeasible(_)) => None,
                    Err(e) => return Err(e),
                }
            };
            Ok(point.map(|(d, tau, frac)| TradeoffPoint {
                x,
                eta_r: rus::eta_r(d, tau),
                n_sources_total: 3 * d as u64,
                k_modules: 1,
                module_size: d as u64,
                d_used: arch.min_depth(),
                p_module: frac,
                tau,
            }))
        }
    }
}

/// A computed curve plus the losses that produced no point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub architecture: Architecture,
    pub points: Vec<TradeoffPoint>,
    /// `(x, reason)` for grid values without a feasible configuration.
    pub skipped: Vec<(f64, String)>,
}

/// Optimizes every grid value; points are evaluated in parallel.
pub fn tradeoff_curve(arch: &Architecture, x_grid: &[f64], config: &TradeoffConfig) -> Result<Curve> {
    let results: Vec<Result<Option<TradeoffPoint>>> =
        x_grid.par_iter().map(|&x| optimize_point(arch, x, config)).collect();
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for (&x, r) in x_grid.iter().zip(results) {
        match r? {
            Some(p) => points.push(p),
            None => skipped.push((x, format!("no feasible `{arch}` configuration at x = {x}"))),
        }
    }
    Ok(Curve { architecture: *arch, points, skipped })
}

/// Sources needed to release resource states at rate `r`, `⌈N r / (η_R r0)⌉`.
pub fn sources_for_rate(arch: &Architecture, x: f64, r: f64, r0: f64, config: &TradeoffConfig) -> Result<u64> {
    let point = optimize_point(arch, x, config)?
        .ok_or_else(|| Error::Infeasible(format!("`{arch}` has no configuration at x = {x}")))?;
    bounds::n_sources_for_rate(point.eta_r, RESOURCE_STATE_PHOTONS, r, r0)
}

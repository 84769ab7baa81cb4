//! Closed-form resource accounting.
//!
//! Everything here is a pure function of a [`SchemeSpec`] and a few scalars:
//! the photon-consumption recursion, the perfectly-shared resource
//! efficiency bound, optical depth, and the tolerable loss per component.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, invalid, Error, Result};
use crate::model::{
    builtin_scheme, SchemeSpec, SourceKind, SourceSpec, DEPTH_FINAL_MUX, DEPTH_SPATIAL,
    DEPTH_SPATIO_TEMPORAL, HYBRID_CALIBRATED_UNIT_COST, RESOURCE_STATE_PHOTONS,
    TRANSMISSION_THRESHOLD,
};

/// Average internal cycles per resource state for one RUS module:
/// four rounds of two expected attempts plus two emission cycles.
pub const RUS_AVERAGE_CYCLES: f64 = 10.0;

/// Spin-photon sources in one RUS module.
pub const RUS_MODULE_SOURCES: u32 = 12;

/// Per-stage photon accounting for a scheme.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostBreakdown {
    /// `N_avg,i` after each stage, unrounded.
    pub cumulative_navg: Vec<f64>,
    pub total_navg: f64,
    /// `N / N_avg`, the bound for a source with `p_s = 1`; scale by `p_s` otherwise.
    pub eta_r_max: f64,
    pub cumulative_depth: Vec<u32>,
}

/// Runs the photon-consumption recursion `N_i = c_i (N_{i-1} + a_i) / p_i`.
pub fn n_avg(scheme: &SchemeSpec) -> Result<CostBreakdown> {
    if scheme.is_rus() {
        return Err(Error::Unsupported(format!(
            "scheme `{}` is costed in clock cycles, not photons",
            scheme.name
        )));
    }
    scheme.validate()?;
    let mut acc = scheme.unit_cost;
    let cumulative_navg: Vec<f64> = scheme
        .stages
        .iter()
        .map(|s| {
            acc = s.copies as f64 * (acc + s.aux_photons) / s.success_prob;
            acc
        })
        .collect();
    Ok(CostBreakdown {
        total_navg: acc,
        eta_r_max: scheme.output_photons as f64 / acc,
        cumulative_depth: cumulative_depth(scheme)?,
        cumulative_navg,
    })
}

/// Resource-efficiency bound `p_s N / N_avg` under perfect resource sharing.
pub fn eta_r_max(scheme: &SchemeSpec, source: &SourceSpec) -> Result<f64> {
    Ok(source.p_s * n_avg(scheme)?.eta_r_max)
}

/// Resource-efficiency bound `N / (N_0 τ_avg)` of a cycle-costed scheme.
pub fn eta_r_max_rus(n_sources: u32, tau_avg: f64, n_photons: u32) -> Result<f64> {
    if n_sources == 0 {
        return Err(invalid("n_sources", "must be at least 1"));
    }
    if !(tau_avg >= 1.0) {
        return Err(invalid("tau_avg", format!("{tau_avg} < 1")));
    }
    Ok(n_photons as f64 / (n_sources as f64 * tau_avg))
}

/// Lower bound on the optical depth of an `n_mux`-stage network.
///
/// One spatio-temporal stage, `n_mux − 2` spatial stages and the final
/// 1-to-n multiplexer. `n_mux = 0` is the unmultiplexed RUS module (depth 1).
pub fn optical_depth(n_mux: u32) -> Result<u32> {
    match n_mux {
        0 => Ok(1),
        1 => Err(invalid("n_mux", "a single MUX stage has no depth model")),
        n => Ok(DEPTH_SPATIO_TEMPORAL + (n - 2) * DEPTH_SPATIAL + DEPTH_FINAL_MUX),
    }
}

/// Cumulative optical depth after each stage.
///
/// The last `n_mux` stages are multiplexed; earlier ones add no depth.
pub fn cumulative_depth(scheme: &SchemeSpec) -> Result<Vec<u32>> {
    let stages = scheme.stages.len();
    let n_mux = scheme.n_mux as usize;
    if n_mux > stages {
        return Err(invalid(
            "n_mux",
            format!("{n_mux} MUX stages but only {stages} stages in `{}`", scheme.name),
        ));
    }
    if n_mux == 0 {
        let mut depths = vec![0; stages];
        depths[stages - 1] = optical_depth(0)?;
        return Ok(depths);
    }
    optical_depth(scheme.n_mux)?;
    let first = stages - n_mux;
    let mut depths = Vec::with_capacity(stages);
    let mut d = 0;
    for i in 0..stages {
        if i == first {
            d += DEPTH_SPATIO_TEMPORAL;
        } else if i == stages - 1 {
            d += DEPTH_FINAL_MUX;
        } else if i > first {
            d += DEPTH_SPATIAL;
        }
        depths.push(d);
    }
    Ok(depths)
}

/// Largest per-component loss keeping `(1 − x)^D ≥ threshold`.
pub fn max_loss_per_component(depth: u32, threshold: f64) -> Result<f64> {
    if depth == 0 {
        return Err(invalid("depth", "must be at least 1"));
    }
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(invalid("threshold", format!("{threshold} not in (0, 1]")));
    }
    Ok(1.0 - threshold.powf(1.0 / depth as f64))
}

/// Ceiling that ignores floating-point noise just above an integer.
pub(crate) fn ceil_tolerant(v: f64) -> f64 {
    (v - 1e-9 * v.abs().max(1.0)).ceil()
}

/// Sources needed to reach rate `r` at the efficiency bound, `⌈N r / (η̃ r0)⌉`.
pub fn n_sources_for_rate(eta_r_max: f64, n_photons: u32, r: f64, r0: f64) -> Result<u64> {
    if !(eta_r_max > 0.0) {
        return Err(Error::Infeasible("resource efficiency is zero".into()));
    }
    if !(r > 0.0 && r <= r0) {
        return Err(invalid("r", format!("need 0 < r <= r0, got r = {r}, r0 = {r0}")));
    }
    Ok(ceil_tolerant(n_photons as f64 * r / (eta_r_max * r0)) as u64)
}

/// Photon utilization `N_avg / (N_0 τ)` of a multiplexer.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MuxEfficiency {
    /// Clamped to 1.
    pub eta: f64,
    /// The configuration asks for more photons than its sources provide.
    pub oversubscribed: bool,
}

pub fn mux_efficiency(n_avg: f64, n_sources: u64, tau: f64) -> Result<MuxEfficiency> {
    let budget = n_sources as f64 * tau;
    if !(budget > 0.0) {
        return Err(invalid("n_sources", "n_sources·tau must be positive"));
    }
    let raw = n_avg / budget;
    Ok(MuxEfficiency {
        eta: raw.min(1.0),
        oversubscribed: raw > 1.0 + 1e-12,
    })
}

/// Rates and threshold for the performance table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TableConfig {
    pub rate_r: f64,
    pub rate_r0: f64,
    pub threshold: f64,
    pub hybrid_unit_cost: f64,
    pub boost_level: u32,
}

impl Default for TableConfig {
    fn default() -> Self {
        TableConfig {
            rate_r: 1e8,
            rate_r0: 1e9,
            threshold: TRANSMISSION_THRESHOLD,
            hybrid_unit_cost: HYBRID_CALIBRATED_UNIT_COST,
            boost_level: 2,
        }
    }
}

/// One row of the performance-bounds table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableOneRow {
    pub source: String,
    pub scheme: String,
    pub n_mux: u32,
    pub depth: u32,
    pub eta_r_max: f64,
    pub n_sources: u64,
    pub max_loss: f64,
    /// Row depends on a calibrated, not derived, parameter.
    pub calibrated: bool,
}

/// Builds the seven performance-bound rows.
///
/// `N_0` is computed from `N_avg` rounded to whole photons; with the
/// unrounded value the heralded rows differ by a few sources.
pub fn table_one(config: &TableConfig) -> Result<Vec<TableOneRow>> {
    check_probability("threshold", config.threshold)?;
    let b = config.boost_level;
    let (r, r0) = (config.rate_r, config.rate_r0);
    let n = RESOURCE_STATE_PHOTONS;

    let photonic_row = |source: String, scheme: SchemeSpec, p_s: f64, calibrated: bool| -> Result<TableOneRow> {
        let cost = n_avg(&scheme)?;
        let depth = optical_depth(scheme.n_mux)?;
        let rounded = p_s * n as f64 / cost.total_navg.round();
        Ok(TableOneRow {
            source,
            scheme: scheme.name.clone(),
            n_mux: scheme.n_mux,
            depth,
            eta_r_max: p_s * cost.eta_r_max,
            n_sources: n_sources_for_rate(rounded, n, r, r0)?,
            max_loss: max_loss_per_component(depth, config.threshold)?,
            calibrated,
        })
    };

    let all_photonic = builtin_scheme("all-photonic", b)?;
    let mut rows = Vec::with_capacity(7);
    for p_s in [0.005, 0.05, 0.25] {
        rows.push(photonic_row(format!("HSPS, p_s={p_s}"), all_photonic.clone(), p_s, false)?);
    }
    // A deterministic source needs no multiplexing of its single photons.
    rows.push(photonic_row("DSPS".into(), all_photonic.clone().with_n_mux(5), 1.0, false)?);
    let hybrid = builtin_scheme("hybrid", b)?.with_unit_cost(config.hybrid_unit_cost)?;
    rows.push(photonic_row("4-GHZ source".into(), hybrid, 1.0, true)?);
    rows.push(photonic_row("Caterpillar source".into(), builtin_scheme("caterpillar", b)?, 1.0, false)?);

    let eta = eta_r_max_rus(RUS_MODULE_SOURCES, RUS_AVERAGE_CYCLES, n)?;
    let depth = optical_depth(0)?;
    rows.push(TableOneRow {
        source: "RUS module".into(),
        scheme: "rus".into(),
        n_mux: 0,
        depth,
        eta_r_max: eta,
        n_sources: n_sources_for_rate(eta, n, r, r0)?,
        max_loss: max_loss_per_component(depth, config.threshold)?,
        calibrated: false,
    });
    Ok(rows)
}

/// Per-stage row of a scheme table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageRow {
    pub index: usize,
    pub success_prob: f64,
    pub copies: u32,
    pub aux_photons: f64,
    pub cumulative_navg: f64,
    pub detected: u32,
    pub cumulative_depth: u32,
}

/// The stage table of a photonic scheme with its cumulative columns.
pub fn stage_table(scheme: &SchemeSpec) -> Result<Vec<StageRow>> {
    let cost = n_avg(scheme)?;
    Ok(scheme
        .stages
        .iter()
        .zip(&cost.cumulative_navg)
        .zip(&cost.cumulative_depth)
        .map(|((s, &navg), &depth)| StageRow {
            index: s.index,
            success_prob: s.success_prob,
            copies: s.copies,
            aux_photons: s.aux_photons,
            cumulative_navg: navg,
            detected: s.detected,
            cumulative_depth: depth,
        })
        .collect())
}

/// `N_avg` for one scheme at one boost level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoostRow {
    pub scheme: String,
    pub boost_level: u32,
    pub total_navg: f64,
}

/// `N_avg` of the all-photonic and caterpillar schemes for `b = 1, 2, 3`.
pub fn boost_variants() -> Result<Vec<BoostRow>> {
    let mut rows = Vec::new();
    for name in ["all-photonic", "caterpillar"] {
        for b in 1..=3 {
            rows.push(BoostRow {
                scheme: name.into(),
                boost_level: b,
                total_navg: n_avg(&builtin_scheme(name, b)?)?.total_navg,
            });
        }
    }
    Ok(rows)
}

/// Default source for a named built-in scheme.
pub fn default_source(scheme: &str) -> SourceSpec {
    match scheme {
        "hybrid" => SourceSpec::deterministic(SourceKind::Ghz4),
        "caterpillar" => SourceSpec::deterministic(SourceKind::Caterpillar),
        "rus" => SourceSpec::deterministic(SourceKind::RusModule),
        _ => SourceSpec::deterministic(SourceKind::DeterministicSingle),
    }
}

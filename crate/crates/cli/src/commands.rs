use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Parser;
use rsg_core::bounds::{self, boost_variants, max_loss_per_component, n_avg, optical_depth, stage_table, table_one, TableConfig};
use rsg_core::graph::{lc_orbit_min_edges, measure_pauli, rus_schedule, AdjacencyJson, Graph, Pauli};
use rsg_core::heralded::{herald_curve_grid, min_eta_for_ps};
use rsg_core::model::{builtin_scheme, Config, DEFAULT_P_RSG, HYBRID_CALIBRATED_UNIT_COST, TRANSMISSION_THRESHOLD};
use rsg_core::optimizer::{geometric_grid, tradeoff_curve, Architecture, Curve, TradeoffConfig};
use rsg_core::rus::{self, EdgeLossModel, RusConfig};
use serde::Serialize;
use serde_json::json;

use crate::output::{num, pretty, OutDir, RunManifest};
use crate::{
    ArchName, Cli, Command, GraphAction, GraphArgs, HeraldedArgs, LossModelName, RusArgs, TablesArgs, TradeoffArgs,
    DEFAULT_SEED,
};

/// Invalid flag combinations; exit code 2.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

/// Flags over config settings over built-in defaults.
struct Resolved {
    seed: u64,
    threshold: f64,
    rate_r: f64,
    rate_r0: f64,
    p_target: f64,
    beta: f64,
    hybrid_unit_cost: f64,
    config: Option<Config>,
}

fn resolve(cli: &Cli) -> Result<Resolved> {
    let g = &cli.global;
    let config = match &g.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
            Some(Config::parse(&text).with_context(|| format!("in {}", path.display()))?)
        }
        None => None,
    };
    let s = config.as_ref().map(|c| c.settings.clone()).unwrap_or_default();
    let r = Resolved {
        seed: g.seed.or(s.seed).unwrap_or(DEFAULT_SEED),
        threshold: g.threshold.or(s.threshold).unwrap_or(TRANSMISSION_THRESHOLD),
        rate_r: g.rate_r.or(s.rate_r).unwrap_or(1e8),
        rate_r0: g.rate_r0.or(s.rate_r0).unwrap_or(1e9),
        p_target: s.p_target.unwrap_or(DEFAULT_P_RSG),
        beta: s.beta.unwrap_or(1.0),
        hybrid_unit_cost: s.hybrid_unit_cost.unwrap_or(HYBRID_CALIBRATED_UNIT_COST),
        config,
    };
    if !(r.threshold > 0.0 && r.threshold <= 1.0) {
        return Err(usage(format!("threshold {} not in (0, 1]", r.threshold)));
    }
    if !(r.rate_r > 0.0 && r.rate_r <= r.rate_r0) {
        return Err(usage(format!("need 0 < rate-r <= rate-r0, got {} and {}", r.rate_r, r.rate_r0)));
    }
    Ok(r)
}

/// Runs one parsed command line and writes its manifest.
pub fn run(cli: Cli, args: Vec<String>) -> Result<()> {
    if let Command::Replay(replay) = &cli.command {
        return run_replay(&replay.manifest, cli.global.out.as_deref());
    }
    let settings = resolve(&cli)?;
    let out_root = cli.global.out.clone().unwrap_or_else(|| PathBuf::from("out"));
    let mut out = OutDir::create(&out_root)?;
    let name = match &cli.command {
        Command::Tables(a) => {
            tables(a, &settings, &mut out)?;
            "tables"
        }
        Command::Tradeoff(a) => {
            tradeoff(a, &settings, &mut out)?;
            "tradeoff"
        }
        Command::Heralded(a) => {
            heralded(a, &mut out)?;
            "heralded"
        }
        Command::Rus(a) => {
            rus_cmd(a, &settings, &mut out)?;
            "rus"
        }
        Command::Graph(a) => {
            graph(a, &mut out)?;
            "graph"
        }
        Command::Replay(_) => unreachable!("handled above"),
    };
    let manifest = RunManifest {
        subcommand: name.to_string(),
        args,
        config_path: cli.global.config.clone(),
        seed: settings.seed,
        outputs: out.written().to_vec(),
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339(),
    };
    let path = out.path(&RunManifest::file_name(name));
    fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(())
}

fn run_replay(manifest: &Path, out: Option<&Path>) -> Result<()> {
    let m = RunManifest::load(manifest)?;
    let mut args = m.args.clone();
    if let Some(out) = out {
        args.push("--out".into());
        args.push(out.display().to_string());
    }
    let cli = Cli::try_parse_from(std::iter::once("rsg".to_string()).chain(args.iter().cloned()))
        .map_err(|e| usage(format!("manifest arguments no longer parse: {e}")))?;
    if matches!(cli.command, Command::Replay(_)) {
        return Err(usage("a manifest cannot record a replay"));
    }
    run(cli, args)
}

fn stage_rows(scheme: &str, boost: u32) -> Result<Vec<Vec<String>>> {
    Ok(stage_table(&builtin_scheme(scheme, boost)?)?
        .iter()
        .map(|r| {
            vec![
                r.index.to_string(),
                num(r.success_prob),
                r.copies.to_string(),
                num(r.aux_photons),
                r.detected.to_string(),
                num(r.cumulative_navg),
                r.cumulative_depth.to_string(),
            ]
        })
        .collect())
}

const STAGE_HEADER: [&str; 7] = ["stage", "success_prob", "copies", "aux_photons", "detected", "cumulative_navg", "cumulative_depth"];

fn tables(a: &TablesArgs, s: &Resolved, out: &mut OutDir) -> Result<()> {
    let cfg = TableConfig {
        rate_r: s.rate_r,
        rate_r0: s.rate_r0,
        threshold: s.threshold,
        hybrid_unit_cost: a.hybrid_unit_cost.unwrap_or(s.hybrid_unit_cost),
        boost_level: a.boost,
    };
    let header = ["source", "scheme", "n_mux", "depth", "eta_r_max", "n_sources", "max_loss", "calibrated"];
    let rows: Vec<Vec<String>> = table_one(&cfg)?
        .iter()
        .map(|r| {
            vec![
                r.source.clone(),
                r.scheme.clone(),
                r.n_mux.to_string(),
                r.depth.to_string(),
                num(r.eta_r_max),
                r.n_sources.to_string(),
                num(r.max_loss),
                r.calibrated.to_string(),
            ]
        })
        .collect();
    out.table("table1", &header, &rows)?;
    print!("{}", pretty(&header, &rows));

    out.table("table2", &STAGE_HEADER, &stage_rows("all-photonic", a.boost)?)?;
    out.table("table3", &STAGE_HEADER, &stage_rows("caterpillar", a.boost)?)?;
    let boost: Vec<Vec<String>> = boost_variants()?
        .iter()
        .map(|r| vec![r.scheme.clone(), r.boost_level.to_string(), num(r.total_navg)])
        .collect();
    out.table("boost", &["scheme", "boost_level", "total_navg"], &boost)?;
    for scheme in ["all-photonic", "caterpillar"] {
        let total = n_avg(&builtin_scheme(scheme, a.boost)?)?.total_navg;
        println!("{scheme} b={}: N_avg = {total:.2}", a.boost);
    }

    if let Some(depth) = a.depth {
        let x = max_loss_per_component(depth, s.threshold)?;
        out.table("maxloss", &["depth", "threshold", "max_loss"], &[vec![depth.to_string(), num(s.threshold), num(x)]])?;
        println!("depth {depth} at threshold {}: maximal loss per component {:.4}%", s.threshold, 100.0 * x);
    }

    if let Some(config) = s.config.as_ref().filter(|c| !c.schemes.is_empty()) {
        let mut rows = Vec::new();
        for scheme in &config.schemes {
            scheme.validate()?;
            let (total, eta, depth) = if scheme.is_rus() {
                let eta = bounds::eta_r_max_rus(bounds::RUS_MODULE_SOURCES, bounds::RUS_AVERAGE_CYCLES, scheme.output_photons)?;
                (f64::NAN, eta, 1)
            } else {
                let cost = n_avg(scheme)?;
                (cost.total_navg, cost.eta_r_max, optical_depth(scheme.n_mux)?)
            };
            rows.push(vec![
                scheme.name.clone(),
                scheme.construction.to_string(),
                num(total),
                num(eta),
                depth.to_string(),
                num(max_loss_per_component(depth, s.threshold)?),
            ]);
        }
        out.table("schemes", &["scheme", "construction", "total_navg", "eta_r_max", "depth", "max_loss"], &rows)?;
    }
    Ok(())
}

#[derive(Serialize)]
struct CurveDoc<'a> {
    architecture: String,
    eta_r_bound: f64,
    threshold: f64,
    p_target: f64,
    seed: u64,
    curve: &'a Curve,
}

fn tradeoff(a: &TradeoffArgs, s: &Resolved, out: &mut OutDir) -> Result<()> {
    let archs = match a.arch {
        ArchName::Hsps => vec![Architecture::parse("hsps", a.p_s)?],
        ArchName::Dsps => vec![Architecture::Dsps],
        ArchName::Caterpillar => vec![Architecture::Caterpillar],
        ArchName::Rus => vec![Architecture::Rus],
        ArchName::RusMultiplexed => vec![Architecture::RusMultiplexed],
        ArchName::All => vec![
            Architecture::parse("hsps", a.p_s)?,
            Architecture::Dsps,
            Architecture::Caterpillar,
            Architecture::Rus,
            Architecture::RusMultiplexed,
        ],
    };
    let p_target = a.p_target.unwrap_or(s.p_target);
    let cfg = TradeoffConfig {
        p_target,
        threshold: s.threshold,
        rus: RusConfig {
            beta: a.beta.unwrap_or(s.beta),
            samples: a.samples,
            horizon: a.horizon,
            seed: s.seed,
            ..RusConfig::default()
        },
    };
    let header = ["x", "eta_r", "k", "m", "n_sources", "depth", "p_module", "tau"];
    let mut bundle = Vec::new();
    for arch in archs {
        let grid = if !a.x_values.is_empty() {
            a.x_values.clone()
        } else {
            let hi = match a.x_max {
                Some(v) => v,
                None => arch.max_loss(s.threshold)?,
            };
            if a.x_min > hi {
                Vec::new()
            } else {
                geometric_grid(a.x_min, hi, a.points)?
            }
        };
        let mut curve = tradeoff_curve(&arch, &grid, &cfg)?;
        if grid.is_empty() {
            curve.skipped.push((a.x_min, format!("x_min {} exceeds the maximal loss of `{arch}`", a.x_min)));
        }
        let rows: Vec<Vec<String>> = curve
            .points
            .iter()
            .map(|p| {
                vec![
                    num(p.x),
                    num(p.eta_r),
                    p.k_modules.to_string(),
                    p.module_size.to_string(),
                    p.n_sources_total.to_string(),
                    p.d_used.to_string(),
                    num(p.p_module),
                    num(p.tau),
                ]
            })
            .collect();
        let stem = format!("tradeoff-{}", arch.name());
        out.table(&stem, &header, &rows)?;
        if curve.points.is_empty() {
            let reason = curve.skipped.first().map(|(_, r)| r.as_str()).unwrap_or("empty grid");
            eprintln!("{arch}: no feasible points ({reason})");
        } else {
            println!("{arch}: {} points, {} skipped", curve.points.len(), curve.skipped.len());
        }
        let doc = CurveDoc {
            architecture: arch.name(),
            eta_r_bound: arch.eta_r_bound()?,
            threshold: s.threshold,
            p_target,
            seed: s.seed,
            curve: &curve,
        };
        out.json(&format!("{stem}.json"), &doc)?;
        bundle.push(serde_json::to_value(&doc)?);
    }
    if a.arch == ArchName::All {
        out.json("figure.json", &json!({ "curves": bundle }))?;
    }
    Ok(())
}

fn heralded(a: &HeraldedArgs, out: &mut OutDir) -> Result<()> {
    let etas = if !a.eta_grid.is_empty() {
        a.eta_grid.clone()
    } else {
        if a.eta_points < 2 || a.eta_max < a.eta_min {
            return Err(usage("need eta-points >= 2 and eta-min <= eta-max"));
        }
        let step = (a.eta_max - a.eta_min) / (a.eta_points - 1) as f64;
        // rounded so that grid values such as 0.994 print exactly
        (0..a.eta_points).map(|i| ((a.eta_min + step * i as f64) * 1e12).round() / 1e12).collect()
    };
    let points = herald_curve_grid(&a.eps, &etas)?;
    let rows: Vec<Vec<String>> = points.iter().map(|p| vec![num(p.eps_max), num(p.eta_h), num(p.p_s)]).collect();
    out.table("heralded", &["eps_max", "eta_h", "p_s"], &rows)?;
    let mut thresholds = Vec::new();
    for &eps in &a.eps {
        let eta = min_eta_for_ps(a.ps_target, eps)?;
        println!("eps_max = {eps}: p_s >= {} needs eta_h >= {eta:.6}", a.ps_target);
        thresholds.push(vec![num(eps), num(a.ps_target), num(eta)]);
    }
    out.table("heralded-thresholds", &["eps_max", "ps_target", "eta_h_min"], &thresholds)?;
    Ok(())
}

fn rus_cmd(a: &RusArgs, s: &Resolved, out: &mut OutDir) -> Result<()> {
    let config = RusConfig {
        d: a.d,
        beta: a.beta.unwrap_or(s.beta),
        x: a.x,
        p_target: a.p_target.unwrap_or(s.p_target),
        horizon: a.horizon,
        samples: a.samples,
        seed: s.seed,
        loss_model: match a.loss_model {
            LossModelName::PerAttempt => EdgeLossModel::PerAttempt,
            LossModelName::PerPhoton => EdgeLossModel::PerPhoton,
        },
        tau_cap: a.tau_cap,
        ..RusConfig::default()
    };
    let o = rus::run(&config)?;
    let doc = json!({
        "d": o.d,
        "beta": o.beta,
        "x": o.x,
        "tau": o.tau,
        "eta_r": o.eta_r,
        "mean_cycles": o.mean_cycles,
        "ci95": [o.ci95.0, o.ci95.1],
        "success_fraction": o.success_fraction,
        "periods": o.periods,
        "seed": config.seed,
        "horizon": config.horizon,
        "samples": config.samples,
        "loss_model": config.loss_model,
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    out.json("rus.json", &doc)?;
    if !a.d_values.is_empty() {
        let curve = rus::spatially_multiplexed_curve(&a.d_values, &config)?;
        let rows: Vec<Vec<String>> = curve.iter().map(|&(d, eta)| vec![d.to_string(), (3 * d).to_string(), num(eta)]).collect();
        out.table("rus-multiplexed", &["d", "n_sources", "eta_r"], &rows)?;
    }
    Ok(())
}

fn load_graph(path: &Path) -> Result<Graph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let g = if path.extension().is_some_and(|e| e == "json") {
        let doc: AdjacencyJson = serde_json::from_str(&text).map_err(|e| usage(format!("{}: {e}", path.display())))?;
        Graph::from_adjacency_json(&doc)?
    } else {
        Graph::parse_edge_list(&text)?
    };
    Ok(g)
}

fn graph(a: &GraphArgs, out: &mut OutDir) -> Result<()> {
    let g = load_graph(&a.file)?;
    match a.action {
        GraphAction::MinEdges => {
            let search = lc_orbit_min_edges(&g, a.cap);
            let witness: Vec<String> = search.witness.iter().map(usize::to_string).collect();
            let report = format!(
                "min_edges {}\nwitness {}\nvisited {}\ntruncated {}\n",
                search.min_edges,
                witness.join(" "),
                search.visited,
                search.truncated
            );
            print!("{report}");
            out.text("min-edges.txt", &report)?;
            out.text("lc-graph.edges", &search.representative.to_edge_list())?;
            out.json("lc-graph.json", &search.representative.to_adjacency_json())?;
        }
        GraphAction::Lc => {
            let seq = match (a.vertex, a.sequence.is_empty()) {
                (Some(v), true) => vec![v],
                (None, false) => a.sequence.clone(),
                _ => return Err(usage("lc needs exactly one of --vertex or --sequence")),
            };
            let h = g.apply_lc_sequence(&seq)?;
            println!("{} edges after LC at {seq:?}", h.edge_count());
            out.text("lc.edges", &h.to_edge_list())?;
        }
        GraphAction::Measure => {
            let v = a.vertex.ok_or_else(|| usage("measure needs --vertex"))?;
            let basis: Pauli = a.basis.parse()?;
            let h = measure_pauli(&g, v, basis)?;
            println!("{} edges after measuring {v} in {basis:?}", h.edge_count());
            out.text("measured.edges", &h.to_edge_list())?;
        }
        GraphAction::Schedule => {
            let rounds = rus_schedule(&g);
            let rows: Vec<Vec<String>> = rounds
                .iter()
                .enumerate()
                .flat_map(|(i, round)| round.iter().map(move |&(u, v)| vec![(i + 1).to_string(), u.to_string(), v.to_string()]))
                .collect();
            println!("{} rounds for {} edges (max degree {})", rounds.len(), g.edge_count(), g.max_degree());
            out.table("schedule", &["round", "u", "v"], &rows)?;
        }
    }
    Ok(())
}

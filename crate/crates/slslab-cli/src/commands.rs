//! Subcommand bodies. Each command resolves its parameters to a string map
//! first (defaults, config file, flags), then executes from that map alone;
//! replay feeds a recorded map back through the same entry points.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use slslab_core::analytics::{expected_gain_ccsls, expected_gain_matrix, MomentSpec};
use slslab_core::controller::{trend_step, ControllerParams, TrendState, TrendWeighting};
use slslab_core::market::{GbmModel, ReturnModel, TruncatedNormalModel};
use slslab_core::montecarlo::{run_paths, McReport, SimConfig};
use slslab_core::optimizer::{
    evaluate_frontier, sample_candidates, select_min_risk, Family, RiskReturnPoint, SearchRanges,
};
use slslab_core::rng::substream;

use crate::config::{opt_f64, req, req_f64, req_f64_list, req_u32, req_u64, req_usize};
use crate::manifest::RunManifest;
use crate::output::{fmt_num, write_file, JsonObj};
use crate::CliError;

/// `(key, default)` tables; `None` means the key must be supplied.
pub const EXPECT_KEYS: &[(&str, Option<&str>)] = &[
    ("i01", None),
    ("i02", None),
    ("k1", None),
    ("k2", None),
    ("delta", None),
    ("mu1", None),
    ("mu2", None),
    ("n", None),
    ("method", Some("closed")),
    ("out", None),
];

pub const FRONTIER_KEYS: &[(&str, Option<&str>)] = &[
    ("mu1", None),
    ("mu2", None),
    ("var1", None),
    ("var2", None),
    ("cov12", Some("0")),
    ("n", Some("30")),
    ("candidates", Some("5000")),
    ("seed", Some("0")),
    ("g-target", None),
    ("out-dir", None),
];

pub const SIMULATE_KEYS: &[(&str, Option<&str>)] = &[
    ("params", None),
    ("gbm", None),
    ("n", Some("30")),
    ("paths", Some("100000")),
    ("seed", Some("0")),
    ("v0", Some("1")),
    ("leverage-cap", None),
    ("out", None),
];

pub const TREND_KEYS: &[(&str, Option<&str>)] = &[
    ("stages", Some("252")),
    ("window", Some("15")),
    ("slope", Some("10")),
    ("isat", Some("2")),
    ("seed", Some("0")),
    ("out", None),
];

/// Optional output path, with replay's directory override applied to the
/// original file name.
fn out_path(map: &BTreeMap<String, String>, key: &str, over: Option<&Path>) -> Option<PathBuf> {
    map.get(key).map(|f| {
        let p = PathBuf::from(f);
        match over {
            Some(dir) => dir.join(p.file_name().unwrap_or(p.as_os_str())),
            None => p,
        }
    })
}

/// `report.json` keeps its manifest at `report.manifest.json`.
fn manifest_path_for(out: &Path) -> PathBuf {
    let stem = out.file_stem().and_then(|s| s.to_str()).unwrap_or("run");
    out.with_file_name(format!("{stem}.manifest.json"))
}

fn params_from(map: &BTreeMap<String, String>) -> Result<ControllerParams, CliError> {
    Ok(ControllerParams::new(
        req_f64(map, "i01")?,
        req_f64(map, "i02")?,
        req_f64(map, "k1")?,
        req_f64(map, "k2")?,
        req_f64(map, "delta")?,
    )?)
}

pub fn execute_expect(
    map: &BTreeMap<String, String>,
    over: Option<&Path>,
    started: Instant,
) -> Result<(), CliError> {
    let params = params_from(map)?;
    let mu1 = req_f64(map, "mu1")?;
    let mu2 = req_f64(map, "mu2")?;
    let n = req_u32(map, "n")?;
    let method = req(map, "method")?.to_string();
    let value = match method.as_str() {
        "closed" => expected_gain_ccsls(&params, mu1, mu2, n),
        "matrix" => expected_gain_matrix(&params, mu1, mu2, n),
        other => {
            return Err(CliError::Usage(format!(
                "unknown method `{other}`; expected `closed` or `matrix`"
            )))
        }
    };
    let json = JsonObj::new()
        .num("expected_gain", value)
        .text("method", &method)
        .int("n", u64::from(n))
        .build();
    println!("{json}");
    if let Some(out) = out_path(map, "out", over) {
        write_file(&out, &(json + "\n"))?;
        let mut resolved = map.clone();
        resolved.insert("out".to_string(), out.display().to_string());
        let mut manifest = RunManifest::new("expect", &resolved, 0);
        manifest.record(&out);
        manifest.write(&manifest_path_for(&out), started)?;
    }
    Ok(())
}

fn frontier_csv(points: &[RiskReturnPoint]) -> String {
    let mut body = String::from("idx,i01,i02,k1,k2,delta,mean,std\n");
    for (idx, p) in points.iter().enumerate() {
        body.push_str(&format!(
            "{idx},{},{},{},{},{},{},{}\n",
            fmt_num(p.d.i01),
            fmt_num(p.d.i02),
            fmt_num(p.d.k1),
            fmt_num(p.d.k2),
            fmt_num(p.d.delta),
            fmt_num(p.mean),
            fmt_num(p.std),
        ));
    }
    body
}

fn selection_json(selected: &Option<(usize, RiskReturnPoint)>) -> String {
    match selected {
        None => "null".to_string(),
        Some((idx, p)) => JsonObj::new()
            .int("idx", *idx as u64)
            .num("i01", p.d.i01)
            .num("i02", p.d.i02)
            .num("k1", p.d.k1)
            .num("k2", p.d.k2)
            .num("delta", p.d.delta)
            .num("mean", p.mean)
            .num("std", p.std)
            .text("family", &p.family.to_string())
            .build(),
    }
}

pub fn execute_frontier(
    map: &BTreeMap<String, String>,
    over: Option<&Path>,
    started: Instant,
) -> Result<(), CliError> {
    let moments = MomentSpec::new(
        req_f64(map, "mu1")?,
        req_f64(map, "mu2")?,
        req_f64(map, "var1")?,
        req_f64(map, "var2")?,
        req_f64(map, "cov12")?,
    )?;
    let n = req_u32(map, "n")?;
    let seed = req_u64(map, "seed")?;
    let g_target = req_f64(map, "g-target")?;
    let out_dir = match over {
        Some(dir) => dir.to_path_buf(),
        None => PathBuf::from(req(map, "out-dir")?),
    };
    std::fs::create_dir_all(&out_dir)
        .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", out_dir.display())))?;

    let mut ranges =
        SearchRanges { n_candidates: req_usize(map, "candidates")?, ..SearchRanges::default() };
    if moments.mu1 * moments.mu2 < 0.0 {
        // positive expected gain needs the coupling to share the sign of mu1*mu2
        ranges.delta_range = (-ranges.delta_range.1, -ranges.delta_range.0);
    }
    let pairs = sample_candidates(&ranges, seed)?;
    let ccs: Vec<ControllerParams> = pairs.iter().map(|(cc, _)| *cc).collect();
    let twins: Vec<ControllerParams> = pairs.iter().map(|(_, tw)| *tw).collect();
    let cc_points = evaluate_frontier(&ccs, Family::CcSls, &moments, n)?;
    let tw_points = evaluate_frontier(&twins, Family::TwoSls, &moments, n)?;

    let mut resolved = map.clone();
    resolved.insert("out-dir".to_string(), out_dir.display().to_string());
    let mut manifest = RunManifest::new("frontier", &resolved, seed);

    let cc_csv = out_dir.join("frontier_ccsls.csv");
    write_file(&cc_csv, &frontier_csv(&cc_points))?;
    manifest.record(&cc_csv);
    let tw_csv = out_dir.join("frontier_2sls.csv");
    write_file(&tw_csv, &frontier_csv(&tw_points))?;
    manifest.record(&tw_csv);

    let cc_sel = select_min_risk(&cc_points, g_target);
    let tw_sel = select_min_risk(&tw_points, g_target);
    let selection = JsonObj::new()
        .num("g_target", g_target)
        .int("n", u64::from(n))
        .int("candidates", ranges.n_candidates as u64)
        .int("seed", seed)
        .raw("ccsls", selection_json(&cc_sel))
        .raw("twosls", selection_json(&tw_sel))
        .build();
    println!("{selection}");
    let sel_path = out_dir.join("selection.json");
    write_file(&sel_path, &(selection + "\n"))?;
    manifest.record(&sel_path);

    manifest.write(&out_dir.join("manifest.json"), started)?;
    if cc_sel.is_none() && tw_sel.is_none() {
        return Err(CliError::Infeasible(format!(
            "no candidate in either family reaches expected gain {g_target}"
        )));
    }
    Ok(())
}

fn report_json(r: &McReport) -> String {
    JsonObj::new()
        .num("mean_g", r.mean_g)
        .num("std_g", r.std_g)
        .opt_num("mean_g_surviving", r.mean_g_surviving)
        .opt_num("std_g_surviving", r.std_g_surviving)
        .num("l_max_q95", r.l_max_q95)
        .int("bankruptcies", r.bankruptcies as u64)
        .int("n_paths", r.n_paths as u64)
        .int("seed", r.seed)
        .build()
}

pub fn execute_simulate(
    map: &BTreeMap<String, String>,
    over: Option<&Path>,
    started: Instant,
) -> Result<(), CliError> {
    let p = req_f64_list(map, "params", 5)?;
    let g = req_f64_list(map, "gbm", 4)?;
    let config = SimConfig {
        n_stages: req_usize(map, "n")?,
        n_paths: req_usize(map, "paths")?,
        seed: req_u64(map, "seed")?,
        v0: req_f64(map, "v0")?,
        leverage_cap: opt_f64(map, "leverage-cap")?,
        controller: ControllerParams::new(p[0], p[1], p[2], p[3], p[4])?,
        model: ReturnModel::Gbm(GbmModel::new(g[0], g[1], g[2], g[3])?),
    };
    let report = run_paths(&config)?;
    let json = report_json(&report);
    println!("{json}");
    if let Some(out) = out_path(map, "out", over) {
        write_file(&out, &(json + "\n"))?;
        let mut resolved = map.clone();
        resolved.insert("out".to_string(), out.display().to_string());
        let mut manifest = RunManifest::new("simulate", &resolved, config.seed);
        manifest.record(&out);
        manifest.write(&manifest_path_for(&out), started)?;
    }
    Ok(())
}

// demo return law: small positive drift, hard band at +/-0.075
const DEMO_MEAN: f64 = 0.0023;
const DEMO_SIGMA: f64 = 0.035;
const DEMO_BOUND: f64 = 0.075;

pub fn execute_trend_demo(
    map: &BTreeMap<String, String>,
    over: Option<&Path>,
    started: Instant,
) -> Result<(), CliError> {
    let stages = req_usize(map, "stages")?;
    let window = req_usize(map, "window")?;
    let slope = req_f64(map, "slope")?;
    let isat = req_f64(map, "isat")?;
    let seed = req_u64(map, "seed")?;
    let out = out_path(map, "out", over)
        .ok_or_else(|| CliError::Usage("missing parameter `out`".to_string()))?;

    let model = TruncatedNormalModel::new(DEMO_MEAN, DEMO_SIGMA, DEMO_BOUND)?;
    let mut tstate = TrendState::new(window, slope, isat, TrendWeighting::SlidingWindow)?;
    let mut rng = substream(seed, 0);
    let mut price = 1.0f64;
    let mut gain = 0.0f64;
    // one row per stage: the price and indicator the investment acted on,
    // the return that realized, and the gain after settlement
    let mut body = String::from("k,S,rho,x,I,saturated_flag,g\n");
    for k in 0..stages {
        let rho = model.sample(&mut rng);
        let x = tstate.x;
        let (next, investment) = trend_step(&tstate, rho);
        gain += investment * rho;
        let saturated = (slope * x).abs() > isat;
        body.push_str(&format!(
            "{k},{},{},{},{},{saturated},{}\n",
            fmt_num(price),
            fmt_num(rho),
            fmt_num(x),
            fmt_num(investment),
            fmt_num(gain),
        ));
        price *= 1.0 + rho;
        tstate = next;
    }
    write_file(&out, &body)?;

    let mut resolved = map.clone();
    resolved.insert("out".to_string(), out.display().to_string());
    let mut manifest = RunManifest::new("trend-demo", &resolved, seed);
    manifest.record(&out);
    manifest.write(&manifest_path_for(&out), started)?;
    Ok(())
}

pub fn execute_replay(
    manifest_path: &Path,
    out_dir: Option<&Path>,
    started: Instant,
) -> Result<(), CliError> {
    let recorded = RunManifest::load(manifest_path)?;
    if let Some(dir) = out_dir {
        std::fs::create_dir_all(dir)
            .map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    }
    match recorded.command.as_str() {
        "expect" => execute_expect(&recorded.config, out_dir, started),
        "frontier" => execute_frontier(&recorded.config, out_dir, started),
        "simulate" => execute_simulate(&recorded.config, out_dir, started),
        "trend-demo" => execute_trend_demo(&recorded.config, out_dir, started),
        other => Err(CliError::Usage(format!("manifest names unknown command `{other}`"))),
    }
}

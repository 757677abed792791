//! End-to-end acceptance gate: eleven numbered criteria, one test (and one
//! printed verdict line) per criterion. Criteria 1-9 and 11 drive the library
//! API; criterion 10 drives the installed binary.

use std::process::Command;
use std::time::{Duration, Instant};

use rand::Rng;
use slslab_core::analytics::{
    expected_gain_ccsls, expected_gain_matrix, quadrant_table_check, variance_recursion,
    MomentSpec,
};
use slslab_core::controller::{cc_sls_step, saturated_linear, ControllerParams, SlsState};
use slslab_core::market::{model_moments, DiscreteJointModel, GbmModel, ReturnModel};
use slslab_core::montecarlo::{run_paths, simulate_path, SimConfig};
use slslab_core::optimizer::{
    evaluate_frontier, sample_candidates, select_min_risk, Family, SearchRanges,
};
use slslab_core::rng::substream;

const REF_MU1: f64 = 0.023374;
const REF_MU2: f64 = 0.031014;
const REF_VAR1: f64 = 8.3333e-3;
const REF_VAR2: f64 = 16.333e-3;

fn ref_moments() -> MomentSpec {
    MomentSpec::new(REF_MU1, REF_MU2, REF_VAR1, REF_VAR2, 0.0).unwrap()
}

fn d_cc() -> ControllerParams {
    ControllerParams::new(3.0, 2.58, 0.339, 0.234, 0.990).unwrap()
}

fn d_2s() -> ControllerParams {
    ControllerParams::new(3.0, 3.0, 0.713, 0.381, 0.0).unwrap()
}

fn ref_gbm() -> ReturnModel {
    ReturnModel::Gbm(GbmModel::new(0.019142, 0.08903, 0.022918, 0.12349).unwrap())
}

fn verdict(criterion: u32, ok: bool, detail: &str) {
    println!("criterion {criterion:02}: {} - {detail}", if ok { "PASS" } else { "FAIL" });
    assert!(ok, "criterion {criterion:02} failed: {detail}");
}

fn within_budget(criterion: u32, elapsed: Duration, budget: Duration) {
    assert!(
        elapsed <= budget,
        "criterion {criterion:02} exceeded its runtime budget: {elapsed:?} > {budget:?}"
    );
}

#[test]
fn criterion_01_closed_form_matches_matrix_oracle() {
    let started = Instant::now();
    let mut rng = substream(101, 0);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let i01 = 3.0 - 3.0 * rng.gen::<f64>();
        let i02 = 3.0 - 3.0 * rng.gen::<f64>();
        let k1 = 3.0 - 3.0 * rng.gen::<f64>();
        let k2 = 3.0 - 3.0 * rng.gen::<f64>();
        let delta = rng.gen_range(0.0..=0.99);
        let p = ControllerParams::new(i01, i02, k1, k2, delta).unwrap();
        let mu1 = draw_nonzero_mu(&mut rng);
        let mu2 = draw_nonzero_mu(&mut rng);
        let n = rng.gen_range(2u32..=60);
        let closed = expected_gain_ccsls(&p, mu1, mu2, n);
        let matrix = expected_gain_matrix(&p, mu1, mu2, n);
        let rel = (closed - matrix).abs() / (1.0 + closed.abs());
        worst = worst.max(rel);
    }
    let elapsed = started.elapsed();
    verdict(1, worst <= 1e-10, &format!("worst relative gap {worst:.3e} over 1000 draws"));
    within_budget(1, elapsed, Duration::from_secs(1));
}

fn draw_nonzero_mu<R: Rng>(rng: &mut R) -> f64 {
    loop {
        let mu = rng.gen_range(-0.05f64..=0.05);
        if mu != 0.0 {
            return mu;
        }
    }
}

#[test]
fn criterion_02_recursion_matches_exhaustive_enumeration() {
    let started = Instant::now();
    let mut rng = substream(202, 0);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let atoms = vec![
            (rng.gen_range(-0.3f64..=0.3), rng.gen_range(-0.3f64..=0.3)),
            (rng.gen_range(-0.3f64..=0.3), rng.gen_range(-0.3f64..=0.3)),
        ];
        let p_first = rng.gen_range(0.05f64..=0.95);
        let law = DiscreteJointModel::new(atoms, vec![p_first, 1.0 - p_first]).unwrap();
        let design = ControllerParams::new(
            3.0 - 3.0 * rng.gen::<f64>(),
            3.0 - 3.0 * rng.gen::<f64>(),
            3.0 - 3.0 * rng.gen::<f64>(),
            3.0 - 3.0 * rng.gen::<f64>(),
            rng.gen_range(-0.99f64..=0.99),
        )
        .unwrap();
        let moments = model_moments(&ReturnModel::DiscreteJoint(law.clone()));
        for n in 1..=5usize {
            let exact = variance_recursion(&design, &moments, n as u32).unwrap();
            let (mean, variance) = enumerate_two_atom(&design, &law, n);
            let rel_mean = (exact.mean - mean).abs() / (1.0 + mean.abs());
            let rel_var = (exact.variance - variance).abs() / (1.0 + variance.abs());
            worst = worst.max(rel_mean).max(rel_var);
        }
    }
    let elapsed = started.elapsed();
    verdict(2, worst <= 1e-12, &format!("worst relative gap {worst:.3e} over 50 laws, n <= 5"));
    within_budget(2, elapsed, Duration::from_secs(5));
}

fn enumerate_two_atom(p: &ControllerParams, law: &DiscreteJointModel, n: usize) -> (f64, f64) {
    let mut mean = 0.0;
    let mut second = 0.0;
    for mask in 0..(1u32 << n) {
        let mut state = SlsState::default();
        let mut prob = 1.0;
        for step in 0..n {
            let pick = ((mask >> step) & 1) as usize;
            let (r1, r2) = law.atoms[pick];
            prob *= law.probs[pick];
            state = cc_sls_step(&state, r1, r2, p, None);
        }
        let g = state.total_gain();
        mean += prob * g;
        second += prob * g * g;
    }
    (mean, second - mean * mean)
}

#[test]
fn criterion_03_reference_optima_reproduce() {
    let cc = variance_recursion(&d_cc(), &ref_moments(), 30).unwrap();
    let ts = variance_recursion(&d_2s(), &ref_moments(), 30).unwrap();
    let ok = (cc.mean - 2.00).abs() <= 0.02
        && (cc.std - 2.225).abs() <= 0.02
        && (ts.mean - 2.00).abs() <= 0.02
        && (ts.std - 2.399).abs() <= 0.02;
    verdict(
        3,
        ok,
        &format!(
            "coupled (std, mean) = ({:.4}, {:.4}); decoupled = ({:.4}, {:.4})",
            cc.std, cc.mean, ts.std, ts.mean
        ),
    );
}

#[test]
fn criterion_04_coupled_frontier_dominates() {
    let started = Instant::now();
    let moments = ref_moments();
    let ranges = SearchRanges::default();
    let mut wins = 0u32;
    for seed in 0..100u64 {
        let pairs = sample_candidates(&ranges, seed).unwrap();
        let ccs: Vec<ControllerParams> = pairs.iter().map(|(cc, _)| *cc).collect();
        let twins: Vec<ControllerParams> = pairs.iter().map(|(_, tw)| *tw).collect();
        let cc_pts = evaluate_frontier(&ccs, Family::CcSls, &moments, 30).unwrap();
        let tw_pts = evaluate_frontier(&twins, Family::TwoSls, &moments, 30).unwrap();
        let cc_best = select_min_risk(&cc_pts, 2.0);
        let tw_best = select_min_risk(&tw_pts, 2.0);
        if let (Some((_, cc)), Some((_, tw))) = (cc_best, tw_best) {
            if cc.std < tw.std {
                wins += 1;
            }
        }
    }
    let elapsed = started.elapsed();
    verdict(4, wins >= 95, &format!("coupled family won {wins}/100 seeded searches"));
    within_budget(4, elapsed, Duration::from_secs(30));
}

#[test]
fn criterion_05_positive_expectation_and_quadrant_table() {
    let started = Instant::now();
    let mut rng = substream(505, 0);
    let mut min_gain = f64::INFINITY;
    for _ in 0..10_000 {
        let (p, mu1, mu2) = draw_hypothesis_case(&mut rng, None);
        for n in 2..=60u32 {
            let gain = expected_gain_ccsls(&p, mu1, mu2, n);
            min_gain = min_gain.min(gain);
            if gain <= 0.0 {
                verdict(
                    5,
                    false,
                    &format!("nonpositive gain {gain} at {p:?}, mu = ({mu1}, {mu2}), n = {n}"),
                );
            }
        }
    }
    let mut all_quadrants_ok = true;
    for quadrant in [(1.0, 1.0), (-1.0, -1.0), (1.0, -1.0), (-1.0, 1.0)] {
        for _ in 0..10_000 {
            let (p, mu1, mu2) = draw_hypothesis_case(&mut rng, Some(quadrant));
            let n = rng.gen_range(2u32..=60);
            let report = quadrant_table_check(&p, mu1, mu2, n).unwrap();
            if !report.all_satisfied {
                all_quadrants_ok = false;
                println!("quadrant {quadrant:?} violation: {report:?} at {p:?} n = {n}");
            }
        }
    }
    let elapsed = started.elapsed();
    verdict(
        5,
        min_gain > 0.0 && all_quadrants_ok,
        &format!("minimum expected gain {min_gain:.3e}; quadrant table clean on 4 x 10^4 draws"),
    );
    within_budget(5, elapsed, Duration::from_secs(30));
}

/// Random design and drifts satisfying the positivity hypothesis:
/// nonzero drifts, 0 < |delta| < 1, sign(delta) = sign(mu1*mu2).
fn draw_hypothesis_case<R: Rng>(
    rng: &mut R,
    quadrant: Option<(f64, f64)>,
) -> (ControllerParams, f64, f64) {
    let (s1, s2) = quadrant.unwrap_or_else(|| {
        (
            if rng.gen::<bool>() { 1.0 } else { -1.0 },
            if rng.gen::<bool>() { 1.0 } else { -1.0 },
        )
    });
    let mu1 = s1 * rng.gen_range(1e-3f64..=0.05);
    let mu2 = s2 * rng.gen_range(1e-3f64..=0.05);
    let magnitude = rng.gen_range(0.01f64..=0.99);
    let delta = (mu1 * mu2).signum() * magnitude;
    let p = ControllerParams::new(
        3.0 - 3.0 * rng.gen::<f64>(),
        3.0 - 3.0 * rng.gen::<f64>(),
        3.0 - 3.0 * rng.gen::<f64>(),
        3.0 - 3.0 * rng.gen::<f64>(),
        delta,
    )
    .unwrap();
    (p, mu1, mu2)
}

#[test]
fn criterion_06_price_model_moments_match_calibration() {
    let mm = model_moments(&ref_gbm());
    let gaps = [
        ("mu1", (mm.mu1 - REF_MU1).abs(), 1e-5),
        ("mu2", (mm.mu2 - REF_MU2).abs(), 1e-5),
        ("var1", (mm.var1 - REF_VAR1).abs(), 1e-6),
        ("var2", (mm.var2 - REF_VAR2).abs(), 1e-6),
    ];
    let mut ok = true;
    let mut detail = String::new();
    for (name, gap, tol) in gaps {
        let this_ok = gap <= tol;
        ok &= this_ok;
        detail.push_str(&format!(
            "{name} gap {gap:.3e} vs {tol:.0e}{}; ",
            if this_ok { "" } else { " EXCEEDED" }
        ));
    }
    verdict(6, ok, detail.trim_end_matches("; "));
}

#[test]
fn criterion_07_unsaturated_leverage_study() {
    let started = Instant::now();
    let base = SimConfig {
        n_stages: 30,
        n_paths: 100_000,
        seed: 11,
        v0: 1.0,
        leverage_cap: None,
        controller: d_cc(),
        model: ref_gbm(),
    };
    let cc = run_paths(&base).unwrap();
    let ts = run_paths(&SimConfig { controller: d_2s(), ..base.clone() }).unwrap();
    let poisson_band = |observed: usize, rate: f64, paths: f64| {
        let expect = rate * paths;
        (observed as f64 - expect).abs() <= 3.0 * expect.sqrt()
    };
    let ok = (cc.l_max_q95 - 3.44).abs() <= 0.15
        && (ts.l_max_q95 - 6.94).abs() <= 0.30
        && poisson_band(cc.bankruptcies, 7.15e-4, 1e5)
        && poisson_band(ts.bankruptcies, 1.50e-2, 1e5);
    let elapsed = started.elapsed();
    verdict(
        7,
        ok,
        &format!(
            "coupled q95 {:.3} bankruptcies {}; decoupled q95 {:.3} bankruptcies {}",
            cc.l_max_q95, cc.bankruptcies, ts.l_max_q95, ts.bankruptcies
        ),
    );
    within_budget(7, elapsed, Duration::from_secs(60));
}

#[test]
fn criterion_08_saturated_leverage_study() {
    let started = Instant::now();
    let base = SimConfig {
        n_stages: 30,
        n_paths: 100_000,
        seed: 11,
        v0: 1.0,
        leverage_cap: Some(2.0),
        controller: d_cc(),
        model: ref_gbm(),
    };
    let cc = run_paths(&base).unwrap();
    let ts = run_paths(&SimConfig { controller: d_2s(), ..base.clone() }).unwrap();
    let mut max_stage_leverage = 0.0f64;
    for path in 0..base.n_paths as u64 {
        let out = simulate_path(&base, path);
        max_stage_leverage = max_stage_leverage.max(out.l_max);
    }
    let ok = (cc.mean_g - 1.86).abs() <= 0.03
        && (cc.std_g - 2.15).abs() <= 0.05
        && (ts.mean_g - 1.74).abs() <= 0.03
        && (ts.std_g - 2.27).abs() <= 0.05
        && cc.bankruptcies == 0
        && max_stage_leverage <= 2.0 + 1e-9;
    let elapsed = started.elapsed();
    verdict(
        8,
        ok,
        &format!(
            "coupled (mean, std) = ({:.4}, {:.4}) bankruptcies {}; decoupled ({:.4}, {:.4}); max leverage {:.12}",
            cc.mean_g, cc.std_g, cc.bankruptcies, ts.mean_g, ts.std_g, max_stage_leverage
        ),
    );
    within_budget(8, elapsed, Duration::from_secs(60));
}

#[test]
fn criterion_09_simulation_agrees_with_analytics() {
    let config = SimConfig {
        n_stages: 30,
        n_paths: 100_000,
        seed: 11,
        v0: 1.0,
        leverage_cap: None,
        controller: d_cc(),
        model: ref_gbm(),
    };
    let report = run_paths(&config).unwrap();
    let mm = model_moments(&config.model);
    let mean_oracle = expected_gain_ccsls(&config.controller, mm.mu1, mm.mu2, 30);
    let std_oracle = variance_recursion(&config.controller, &mm, 30).unwrap().std;
    let se = report.std_g / (config.n_paths as f64).sqrt();
    let mean_gap = (report.mean_g - mean_oracle).abs();
    let std_rel = (report.std_g - std_oracle).abs() / std_oracle;
    let ok = mean_gap <= 3.0 * se && std_rel <= 0.05;
    verdict(
        9,
        ok,
        &format!(
            "mean gap {mean_gap:.4} vs 3se {:.4}; std relative gap {:.4}",
            3.0 * se,
            std_rel
        ),
    );
}

#[test]
fn criterion_10_outputs_bit_identical_across_worker_counts() {
    let bin = env!("CARGO_BIN_EXE_slslab");
    let dir = tempfile::tempdir().unwrap();
    let run = |threads: &str, tag: &str| -> (Vec<u8>, Vec<u8>, Vec<u8>) {
        let sim_out = dir.path().join(format!("report_{tag}.json"));
        let status = Command::new(bin)
            .env("SLSLAB_THREADS", threads)
            .stdout(std::process::Stdio::null())
            .args([
                "simulate",
                "--params",
                "3,2.58,0.339,0.234,0.990",
                "--gbm",
                "0.019142,0.08903,0.022918,0.12349",
                "--n",
                "30",
                "--paths",
                "20000",
                "--seed",
                "42",
                "--out",
            ])
            .arg(&sim_out)
            .status()
            .unwrap();
        assert!(status.success());
        let front_dir = dir.path().join(format!("frontier_{tag}"));
        let status = Command::new(bin)
            .env("SLSLAB_THREADS", threads)
            .stdout(std::process::Stdio::null())
            .args([
                "frontier",
                "--mu1",
                "0.023374",
                "--mu2",
                "0.031014",
                "--var1",
                "8.3333e-3",
                "--var2",
                "16.333e-3",
                "--candidates",
                "500",
                "--seed",
                "9",
                "--g-target",
                "2",
                "--out-dir",
            ])
            .arg(&front_dir)
            .status()
            .unwrap();
        assert!(status.success());
        (
            std::fs::read(&sim_out).unwrap(),
            std::fs::read(front_dir.join("frontier_ccsls.csv")).unwrap(),
            std::fs::read(front_dir.join("selection.json")).unwrap(),
        )
    };
    let single = run("1", "t1");
    let quad = run("4", "t4");
    let rerun = run("4", "t4b");
    let ok = single == quad && quad == rerun;
    verdict(10, ok, "simulate and frontier outputs identical for 1 and 4 workers and on rerun");
}

#[test]
fn criterion_11_trend_demo_trace() {
    let bin = env!("CARGO_BIN_EXE_slslab");
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("trend.csv");
    let status = Command::new(bin)
        .stdout(std::process::Stdio::null())
        .args(["trend-demo", "--seed", "5", "--out"])
        .arg(&out)
        .status()
        .unwrap();
    assert!(status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 252, "expected 252 stages");

    let mut rhos: Vec<f64> = Vec::new();
    let mut investments_bounded = true;
    let mut indicator_exact = true;
    for row in &rows {
        let cells: Vec<&str> = row.split(',').collect();
        let rho: f64 = cells[2].parse().unwrap();
        let x: f64 = cells[3].parse().unwrap();
        let inv: f64 = cells[4].parse().unwrap();
        // window 15: the indicator is the plain sum of the last 15 returns
        let k = rhos.len();
        let naive: f64 = rhos[k.saturating_sub(15)..].iter().sum();
        if x != naive {
            indicator_exact = false;
        }
        if inv.abs() > 2.0 {
            investments_bounded = false;
        }
        rhos.push(rho);
    }

    let mut odd_exact = true;
    for i in 1..=500 {
        let x = i as f64 * 0.01;
        if saturated_linear(-x, 10.0, 2.0) != -saturated_linear(x, 10.0, 2.0) {
            odd_exact = false;
        }
    }
    let ok = investments_bounded && indicator_exact && odd_exact;
    verdict(
        11,
        ok,
        &format!(
            "252 rows; |I| <= 2: {investments_bounded}; windowed-sum indicator exact: {indicator_exact}; odd rule on 10^3 grid: {odd_exact}"
        ),
    );
}

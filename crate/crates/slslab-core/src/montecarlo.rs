//! Seeded multi-path simulation engine.
//!
//! Each path owns an independent generator substream keyed by
//! `(seed, path_index)`, so results are reproducible bit for bit no matter
//! how many workers execute the paths. Gains accrue from the investments
//! actually placed at each stage (after any leverage rescaling), and a path
//! halts the first time the account value reaches zero.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::controller::{
    apply_leverage_cap, cc_sls_step, investments, AccountSnapshot, ControllerParams, SlsState,
};
use crate::error::{Result, SlsError};
use crate::market::{sample_returns, ReturnModel};
use crate::rng::substream;

/// Full description of one simulation study.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub n_stages: usize,
    pub n_paths: usize,
    pub seed: u64,
    /// Initial account value; positive.
    pub v0: f64,
    /// Maximum allowed leverage; `None` runs unsaturated.
    pub leverage_cap: Option<f64>,
    pub controller: ControllerParams,
    pub model: ReturnModel,
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        self.controller.validate()?;
        if self.n_stages == 0 {
            return Err(SlsError::InvalidParameter("need at least one stage".into()));
        }
        if self.n_paths == 0 {
            return Err(SlsError::InvalidParameter("need at least one path".into()));
        }
        if !(self.v0 > 0.0 && self.v0.is_finite()) {
            return Err(SlsError::InvalidParameter(format!(
                "initial account value must be positive and finite, got {}",
                self.v0
            )));
        }
        if let Some(cap) = self.leverage_cap {
            if !(cap > 0.0 && cap.is_finite()) {
                return Err(SlsError::InvalidParameter(format!(
                    "leverage cap must be positive and finite, got {cap}"
                )));
            }
        }
        Ok(())
    }
}

/// Terminal record of a single path.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PathOutcome {
    /// Gain-loss at the halt stage (the terminal stage unless bankrupt).
    pub g_final: f64,
    /// Largest stage leverage; `+inf` marks bankruptcy in unsaturated mode.
    pub l_max: f64,
    pub bankrupt: bool,
    pub halt_stage: usize,
}

/// Aggregates over all paths of one study.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McReport {
    pub mean_g: f64,
    pub std_g: f64,
    /// Gain statistics over non-bankrupt paths only; `None` when every path
    /// went bankrupt.
    pub mean_g_surviving: Option<f64>,
    pub std_g_surviving: Option<f64>,
    pub l_max_q95: f64,
    pub bankruptcies: usize,
    pub n_paths: usize,
    pub seed: u64,
}

/// One path under the configured controller, model, and leverage policy.
///
/// Per stage: check solvency, form investments, rescale them if a cap is set,
/// record the (post-rescale) leverage, then draw returns and accumulate. A
/// bankrupt path freezes its gain at the halt stage; its recorded maximum
/// leverage is `+inf` when unsaturated (the cap keeps it finite otherwise).
pub fn simulate_path(config: &SimConfig, path_index: u64) -> PathOutcome {
    let mut rng = substream(config.seed, path_index);
    let mut state = SlsState::default();
    let mut l_max = 0.0f64;
    let mut bankrupt = false;
    let mut halt_stage = config.n_stages;

    for k in 0..=config.n_stages {
        let quad = investments(&state, &config.controller);
        let snap = AccountSnapshot::from_gain(config.v0, state.total_gain(), &quad);
        if snap.bankrupt {
            bankrupt = true;
            halt_stage = k;
            if config.leverage_cap.is_none() {
                l_max = f64::INFINITY;
            }
            break;
        }
        if k == config.n_stages {
            break;
        }
        let (quad, stage_leverage) = match config.leverage_cap {
            Some(cap) => {
                let capped = apply_leverage_cap(&quad, &snap, cap)
                    .expect("cap validated and account solvent");
                (capped, snap.leverage.min(cap))
            }
            None => (quad, snap.leverage),
        };
        if stage_leverage > l_max {
            l_max = stage_leverage;
        }
        let (rho1, rho2) = sample_returns(&config.model, &mut rng);
        state = cc_sls_step(&state, rho1, rho2, &config.controller, Some(&quad));
    }

    PathOutcome { g_final: state.total_gain(), l_max, bankrupt, halt_stage }
}

/// Runs every path and aggregates. Paths may execute on any number of
/// workers; outcomes are reduced in path-index order, so the report is a
/// pure function of the config.
pub fn run_paths(config: &SimConfig) -> Result<McReport> {
    config.validate()?;
    let outcomes: Vec<PathOutcome> = (0..config.n_paths)
        .into_par_iter()
        .with_min_len(1024)
        .map(|i| simulate_path(config, i as u64))
        .collect();
    Ok(aggregate(&outcomes, config.seed))
}

fn mean_std(values: impl Iterator<Item = f64> + Clone, n: usize) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n as f64;
    let ss = values.map(|g| (g - mean) * (g - mean)).sum::<f64>();
    (mean, (ss / n as f64).sqrt())
}

fn aggregate(outcomes: &[PathOutcome], seed: u64) -> McReport {
    let n = outcomes.len();
    let (mean_g, std_g) = mean_std(outcomes.iter().map(|o| o.g_final), n);
    let bankruptcies = outcomes.iter().filter(|o| o.bankrupt).count();
    let survivors = n - bankruptcies;
    let (mean_g_surviving, std_g_surviving) = if survivors == 0 {
        (None, None)
    } else {
        let (m, s) = mean_std(
            outcomes.iter().filter(|o| !o.bankrupt).map(|o| o.g_final),
            survivors,
        );
        (Some(m), Some(s))
    };
    let l_maxes: Vec<f64> = outcomes.iter().map(|o| o.l_max).collect();
    let l_max_q95 = quantile(&l_maxes, 0.95).expect("at least one path");
    McReport {
        mean_g,
        std_g,
        mean_g_surviving,
        std_g_surviving,
        l_max_q95,
        bankruptcies,
        n_paths: n,
        seed,
    }
}

/// Lower order-statistic quantile: entry at rank `ceil(q*n)` (1-based),
/// clamped to the sample. Infinities sort last, so a `q` falling in an
/// infinite tail yields `+inf`.
pub fn quantile(values: &[f64], q: f64) -> Result<f64> {
    if values.is_empty() {
        return Err(SlsError::Domain("quantile of an empty sample".into()));
    }
    if !(0.0..=1.0).contains(&q) {
        return Err(SlsError::Domain(format!("quantile level must be in [0,1], got {q}")));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = (q * sorted.len() as f64).ceil() as isize - 1;
    let idx = rank.clamp(0, sorted.len() as isize - 1) as usize;
    Ok(sorted[idx])
}

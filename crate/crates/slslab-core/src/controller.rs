//! Long-short feedback controllers for a two-stock account.
//!
//! Each stock `i` carries a long leg and a short leg with cumulative
//! gain-loss `g_iL`, `g_iS`, all starting at zero. The cross-coupled
//! controller invests
//!
//! ```text
//! I_iL(k) =  I0i + Ki*g_iL(k) - delta*Kj*g_jS(k)
//! I_iS(k) = -I0i - Ki*g_iS(k) + delta*Kj*g_jL(k)      (i, j) in {(1, 2), (2, 1)}
//! ```
//!
//! and each leg accumulates `g(k+1) = g(k) + I(k)*rho_i(k)` under the stage
//! return `rho_i(k)`. Setting `delta = 0` decouples the stocks and recovers a
//! pair of independent long-short controllers. The account value is
//! `V(k) = V0 + g(k)` with `g` the sum of the four legs; leverage is measured
//! on the two net positions.
//!
//! Everything here is a pure function of its inputs, so paths can be stepped
//! from any number of threads.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SlsError};

/// Design vector `(I01, I02, K1, K2, delta)`.
///
/// `delta = 0` is the decoupled (plain long-short) controller; the
/// cross-coupled family requires `|delta| < 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ControllerParams {
    pub i01: f64,
    pub i02: f64,
    pub k1: f64,
    pub k2: f64,
    pub delta: f64,
}

impl ControllerParams {
    pub fn new(i01: f64, i02: f64, k1: f64, k2: f64, delta: f64) -> Result<Self> {
        let p = Self { i01, i02, k1, k2, delta };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let finite = self.i01.is_finite()
            && self.i02.is_finite()
            && self.k1.is_finite()
            && self.k2.is_finite()
            && self.delta.is_finite();
        if !finite {
            return Err(SlsError::InvalidParameter("controller parameters must be finite".into()));
        }
        if self.i01 <= 0.0 || self.i02 <= 0.0 {
            return Err(SlsError::InvalidParameter(format!(
                "initial investments must be positive, got i01 = {}, i02 = {}",
                self.i01, self.i02
            )));
        }
        if self.k1 <= 0.0 || self.k2 <= 0.0 {
            return Err(SlsError::InvalidParameter(format!(
                "feedback gains must be positive, got k1 = {}, k2 = {}",
                self.k1, self.k2
            )));
        }
        if self.delta.abs() >= 1.0 {
            return Err(SlsError::InvalidParameter(format!(
                "coupling must satisfy |delta| < 1, got delta = {}",
                self.delta
            )));
        }
        Ok(())
    }

    /// Same leg parameters with the coupling forced to zero.
    pub fn decoupled_twin(&self) -> Self {
        Self { delta: 0.0, ..*self }
    }
}

/// Gain-loss state `x(k) = [g1L, g2S, g1S, g2L]` plus the stage counter.
/// The default value is the all-zero state at stage 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SlsState {
    pub g1l: f64,
    pub g2s: f64,
    pub g1s: f64,
    pub g2l: f64,
    pub stage: u32,
}

impl SlsState {
    /// Total gain-loss `g(k)`; the account value is `v0 + total_gain()`.
    pub fn total_gain(&self) -> f64 {
        self.g1l + self.g1s + self.g2l + self.g2s
    }

    /// State vector in the fixed component order used by the analytics.
    pub fn as_vec(&self) -> [f64; 4] {
        [self.g1l, self.g2s, self.g1s, self.g2l]
    }
}

/// All-zero state at stage 0.
pub fn init_state(params: &ControllerParams) -> Result<SlsState> {
    params.validate()?;
    Ok(SlsState { g1l: 0.0, g2s: 0.0, g1s: 0.0, g2l: 0.0, stage: 0 })
}

/// The four leg investments at one stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvestmentQuad {
    pub i1l: f64,
    pub i1s: f64,
    pub i2l: f64,
    pub i2s: f64,
}

impl InvestmentQuad {
    /// Net position in stock 1.
    pub fn net1(&self) -> f64 {
        self.i1l + self.i1s
    }

    /// Net position in stock 2.
    pub fn net2(&self) -> f64 {
        self.i2l + self.i2s
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            i1l: self.i1l * factor,
            i1s: self.i1s * factor,
            i2l: self.i2l * factor,
            i2s: self.i2s * factor,
        }
    }
}

/// Leg investments for the current state. At the zero state the legs offset
/// exactly: `(I01, -I01, I02, -I02)` with zero net positions.
pub fn investments(state: &SlsState, params: &ControllerParams) -> InvestmentQuad {
    let ControllerParams { i01, i02, k1, k2, delta } = *params;
    InvestmentQuad {
        i1l: i01 + k1 * state.g1l - delta * k2 * state.g2s,
        i1s: -i01 - k1 * state.g1s + delta * k2 * state.g2l,
        i2l: i02 + k2 * state.g2l - delta * k1 * state.g1s,
        i2s: -i02 - k2 * state.g2s + delta * k1 * state.g1l,
    }
}

/// One stage of the closed-loop dynamics.
///
/// Without `override_quad` the investments are substituted algebraically:
///
/// ```text
/// g_iL(k+1) = (1 + Ki*rho_i) g_iL - delta*Kj*rho_i g_jS + I0i*rho_i
/// g_iS(k+1) = (1 - Ki*rho_i) g_iS + delta*Kj*rho_i g_jL - I0i*rho_i
/// ```
///
/// With `override_quad` (leverage-capped investments) each leg uses the
/// generic accumulation `g += I * rho` instead; the closed-loop algebra does
/// not hold once investments are rescaled.
pub fn cc_sls_step(
    state: &SlsState,
    rho1: f64,
    rho2: f64,
    params: &ControllerParams,
    override_quad: Option<&InvestmentQuad>,
) -> SlsState {
    let stage = state.stage + 1;
    if let Some(q) = override_quad {
        return SlsState {
            g1l: state.g1l + q.i1l * rho1,
            g2s: state.g2s + q.i2s * rho2,
            g1s: state.g1s + q.i1s * rho1,
            g2l: state.g2l + q.i2l * rho2,
            stage,
        };
    }
    let ControllerParams { i01, i02, k1, k2, delta } = *params;
    SlsState {
        g1l: (1.0 + k1 * rho1) * state.g1l - (delta * k2 * rho1) * state.g2s + i01 * rho1,
        g2s: (1.0 - k2 * rho2) * state.g2s + (delta * k1 * rho2) * state.g1l - i02 * rho2,
        g1s: (1.0 - k1 * rho1) * state.g1s + (delta * k2 * rho1) * state.g2l - i01 * rho1,
        g2l: (1.0 + k2 * rho2) * state.g2l - (delta * k1 * rho2) * state.g1s + i02 * rho2,
        stage,
    }
}

/// Account value and margin standing at one stage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AccountSnapshot {
    pub v0: f64,
    pub v: f64,
    pub leverage: f64,
    pub bankrupt: bool,
}

impl AccountSnapshot {
    /// Snapshot for total gain `g`: `v = v0 + g`, leverage from the net positions.
    pub fn from_gain(v0: f64, gain: f64, quad: &InvestmentQuad) -> Self {
        let v = v0 + gain;
        Self { v0, v, leverage: leverage_of(quad, v), bankrupt: v <= 0.0 }
    }
}

fn leverage_of(quad: &InvestmentQuad, v: f64) -> f64 {
    if v > 0.0 {
        (quad.net1().abs() + quad.net2().abs()) / v
    } else {
        f64::INFINITY
    }
}

/// `L(k) = (|net1| + |net2|) / V(k)`; infinite once the account is wiped out.
pub fn leverage_ratio(quad: &InvestmentQuad, account: &AccountSnapshot) -> f64 {
    leverage_of(quad, account.v)
}

/// Rescale the four legs by `cap / L(k)` whenever the leverage exceeds `cap`,
/// so the post-scaling leverage is exactly the cap. Requires a solvent account.
pub fn apply_leverage_cap(
    quad: &InvestmentQuad,
    account: &AccountSnapshot,
    cap: f64,
) -> Result<InvestmentQuad> {
    if cap.is_nan() || cap <= 0.0 {
        return Err(SlsError::InvalidParameter(format!("leverage cap must be positive, got {cap}")));
    }
    if account.v <= 0.0 {
        return Err(SlsError::BankruptAccount(format!(
            "cannot rescale investments at account value {}",
            account.v
        )));
    }
    let lev = leverage_of(quad, account.v);
    if lev <= cap {
        Ok(*quad)
    } else {
        Ok(quad.scaled(cap / lev))
    }
}

/// Weighting scheme for the trend indicator.
#[derive(Clone)]
pub enum TrendWeighting {
    /// Sum of the most recent `window` returns (all of them before the
    /// window fills).
    SlidingWindow,
    /// Sum of every return seen so far.
    CumulativeSum,
    /// Arbitrary nonnegative weights: `weight(stage, i)` multiplies the
    /// return observed at stage `i`, for `i < stage`.
    Custom(std::sync::Arc<dyn Fn(usize, usize) -> f64 + Send + Sync>),
}

impl std::fmt::Debug for TrendWeighting {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::SlidingWindow => write!(f, "SlidingWindow"),
            Self::CumulativeSum => write!(f, "CumulativeSum"),
            Self::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

/// Trend-following state: a return history and the indicator `x(k)` it
/// induces, plus the saturated-linear investment rule
/// `f(x) = min(slope*x, i_sat)` for `x > 0` and `max(slope*x, -i_sat)` otherwise.
#[derive(Debug, Clone)]
pub struct TrendState {
    pub window: usize,
    pub buffer: Vec<f64>,
    pub x: f64,
    pub slope: f64,
    pub i_sat: f64,
    pub weighting: TrendWeighting,
}

impl TrendState {
    pub fn new(window: usize, slope: f64, i_sat: f64, weighting: TrendWeighting) -> Result<Self> {
        if window == 0 {
            return Err(SlsError::InvalidParameter("trend window must be positive".into()));
        }
        if i_sat <= 0.0 || !i_sat.is_finite() {
            return Err(SlsError::InvalidParameter(format!(
                "saturation level must be positive and finite, got {i_sat}"
            )));
        }
        if !slope.is_finite() {
            return Err(SlsError::InvalidParameter("slope must be finite".into()));
        }
        Ok(Self { window, buffer: Vec::new(), x: 0.0, slope, i_sat, weighting })
    }

    /// Stages absorbed so far.
    pub fn stage(&self) -> usize {
        self.buffer.len()
    }
}

/// Saturated-linear investment rule; odd by construction.
pub fn saturated_linear(x: f64, slope: f64, i_sat: f64) -> f64 {
    if x > 0.0 {
        (slope * x).min(i_sat)
    } else {
        (slope * x).max(-i_sat)
    }
}

/// Invest on the current indicator, then absorb the observed return.
///
/// Returns the next state together with the investment `f(x(k))` that was in
/// the market while `rho(k)` realized; the caller settles `g += f(x(k)) * rho`.
/// The indicator is recomputed from the retained history by a plain
/// left-to-right sum each stage, so it matches a naive recomputation exactly.
pub fn trend_step(tstate: &TrendState, rho: f64) -> (TrendState, f64) {
    let investment = saturated_linear(tstate.x, tstate.slope, tstate.i_sat);
    let mut next = tstate.clone();
    next.buffer.push(rho);
    match &next.weighting {
        TrendWeighting::SlidingWindow => {
            if next.buffer.len() > next.window {
                next.buffer.remove(0);
            }
            next.x = next.buffer.iter().sum();
        }
        TrendWeighting::CumulativeSum => {
            next.x = next.buffer.iter().sum();
        }
        TrendWeighting::Custom(weight) => {
            let k = next.buffer.len();
            next.x = next.buffer.iter().enumerate().map(|(i, r)| weight(k, i) * r).sum();
        }
    }
    (next, investment)
}

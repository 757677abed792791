//! Return-generating models.
//!
//! Stage returns `rho_i(k)` are i.i.d. across stages. Three laws are
//! supported: independent log-normal total returns (geometric Brownian
//! motion in discrete time), symmetric truncated normal returns, and finite
//! discrete joint laws used by the exact-enumeration oracles.

use rand::Rng;
use rand_distr::StandardNormal;
use statrs::function::erf::erf;

use crate::analytics::MomentSpec;
use crate::error::{Result, SlsError};

/// `S_i(k+1) = S_i(k) * exp(m_i + s_i * w_i(k))`, `w` standard normal, drivers
/// independent across stocks. Stage return `rho_i = exp(m_i + s_i * w) - 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GbmModel {
    pub m1: f64,
    pub s1: f64,
    pub m2: f64,
    pub s2: f64,
    pub s0_1: f64,
    pub s0_2: f64,
}

impl GbmModel {
    /// Model with unit initial prices.
    pub fn new(m1: f64, s1: f64, m2: f64, s2: f64) -> Result<Self> {
        if ![m1, s1, m2, s2].iter().all(|v| v.is_finite()) {
            return Err(SlsError::InvalidParameter("log-drift and log-volatility must be finite".into()));
        }
        if s1 < 0.0 || s2 < 0.0 {
            return Err(SlsError::InvalidParameter(format!(
                "log-volatilities must be nonnegative, got {s1} and {s2}"
            )));
        }
        Ok(Self { m1, s1, m2, s2, s0_1: 1.0, s0_2: 1.0 })
    }

    pub fn with_initial_prices(mut self, s0_1: f64, s0_2: f64) -> Result<Self> {
        if !(s0_1 > 0.0 && s0_2 > 0.0) {
            return Err(SlsError::InvalidParameter(format!(
                "initial prices must be positive, got {s0_1} and {s0_2}"
            )));
        }
        self.s0_1 = s0_1;
        self.s0_2 = s0_2;
        Ok(self)
    }

    /// One pair of stage returns; stock 1's driver is drawn first.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let w1: f64 = rng.sample(StandardNormal);
        let w2: f64 = rng.sample(StandardNormal);
        ((self.m1 + self.s1 * w1).exp() - 1.0, (self.m2 + self.s2 * w2).exp() - 1.0)
    }
}

/// Normal(mu, sigma^2) conditioned on `|rho - mu| <= bound`; symmetric about `mu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNormalModel {
    pub mu: f64,
    pub sigma: f64,
    pub bound: f64,
}

impl TruncatedNormalModel {
    pub fn new(mu: f64, sigma: f64, bound: f64) -> Result<Self> {
        if ![mu, sigma, bound].iter().all(|v| v.is_finite()) {
            return Err(SlsError::InvalidParameter("truncated-normal parameters must be finite".into()));
        }
        if sigma < 0.0 {
            return Err(SlsError::InvalidParameter(format!("sigma must be nonnegative, got {sigma}")));
        }
        if bound.is_nan() || bound <= 0.0 {
            return Err(SlsError::InvalidParameter(format!("bound must be positive, got {bound}")));
        }
        Ok(Self { mu, sigma, bound })
    }

    /// One draw by rejection; exact for the conditioned law.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.sigma == 0.0 {
            return self.mu;
        }
        loop {
            let w: f64 = rng.sample(StandardNormal);
            let x = self.mu + self.sigma * w;
            if (x - self.mu).abs() <= self.bound {
                return x;
            }
        }
    }

    /// Exact variance: `sigma^2 * (1 - 2a*pdf(a)/erf(a/sqrt(2)))` with `a = bound/sigma`.
    pub fn variance(&self) -> f64 {
        if self.sigma == 0.0 {
            return 0.0;
        }
        let a = self.bound / self.sigma;
        let pdf = (-0.5 * a * a).exp() / (2.0 * std::f64::consts::PI).sqrt();
        let mass = erf(a / std::f64::consts::SQRT_2);
        self.sigma * self.sigma * (1.0 - 2.0 * a * pdf / mass)
    }
}

/// Finite joint law on `(rho1, rho2)` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteJointModel {
    pub atoms: Vec<(f64, f64)>,
    pub probs: Vec<f64>,
}

impl DiscreteJointModel {
    pub fn new(atoms: Vec<(f64, f64)>, probs: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != probs.len() {
            return Err(SlsError::InvalidParameter(format!(
                "need matching nonempty atom/probability lists, got {} and {}",
                atoms.len(),
                probs.len()
            )));
        }
        if atoms.iter().any(|(a, b)| !a.is_finite() || !b.is_finite()) {
            return Err(SlsError::InvalidParameter("atoms must be finite".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(SlsError::InvalidParameter("probabilities must be nonnegative".into()));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(SlsError::InvalidParameter(format!("probabilities sum to {total}, expected 1")));
        }
        Ok(Self { atoms, probs })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        for (atom, p) in self.atoms.iter().zip(&self.probs) {
            acc += p;
            if u < acc {
                return *atom;
            }
        }
        *self.atoms.last().expect("atoms nonempty")
    }
}

/// Any of the supported return laws.
#[derive(Debug, Clone, PartialEq)]
pub enum ReturnModel {
    Gbm(GbmModel),
    TruncatedNormal(TruncatedNormalModel),
    DiscreteJoint(DiscreteJointModel),
}

/// One i.i.d. draw of the stage return pair.
///
/// The truncated-normal law draws the two stocks independently from the same
/// marginal, stock 1 first.
pub fn sample_returns<R: Rng + ?Sized>(model: &ReturnModel, rng: &mut R) -> (f64, f64) {
    match model {
        ReturnModel::Gbm(m) => m.sample(rng),
        ReturnModel::TruncatedNormal(m) => {
            let r1 = m.sample(rng);
            let r2 = m.sample(rng);
            (r1, r2)
        }
        ReturnModel::DiscreteJoint(m) => m.sample(rng),
    }
}

/// Exact analytic moments of the stage-return pair.
pub fn model_moments(model: &ReturnModel) -> MomentSpec {
    match model {
        ReturnModel::Gbm(m) => {
            let mean = |md: f64, s: f64| (md + 0.5 * s * s).exp() - 1.0;
            let var = |md: f64, s: f64| ((s * s).exp() - 1.0) * (2.0 * md + s * s).exp();
            MomentSpec {
                mu1: mean(m.m1, m.s1),
                mu2: mean(m.m2, m.s2),
                var1: var(m.m1, m.s1),
                var2: var(m.m2, m.s2),
                cov12: 0.0,
            }
        }
        ReturnModel::TruncatedNormal(m) => {
            let v = m.variance();
            MomentSpec { mu1: m.mu, mu2: m.mu, var1: v, var2: v, cov12: 0.0 }
        }
        ReturnModel::DiscreteJoint(m) => {
            let mut mu1 = 0.0;
            let mut mu2 = 0.0;
            let mut e11 = 0.0;
            let mut e22 = 0.0;
            let mut e12 = 0.0;
            for ((r1, r2), p) in m.atoms.iter().zip(&m.probs) {
                mu1 += p * r1;
                mu2 += p * r2;
                e11 += p * r1 * r1;
                e22 += p * r2 * r2;
                e12 += p * r1 * r2;
            }
            MomentSpec {
                mu1,
                mu2,
                var1: e11 - mu1 * mu1,
                var2: e22 - mu2 * mu2,
                cov12: e12 - mu1 * mu2,
            }
        }
    }
}

/// `n + 1` strictly positive prices per stock, starting at the initial prices.
pub fn gbm_price_path<R: Rng + ?Sized>(model: &GbmModel, n: usize, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let mut p1 = Vec::with_capacity(n + 1);
    let mut p2 = Vec::with_capacity(n + 1);
    p1.push(model.s0_1);
    p2.push(model.s0_2);
    for _ in 0..n {
        let w1: f64 = rng.sample(StandardNormal);
        let w2: f64 = rng.sample(StandardNormal);
        p1.push(p1.last().unwrap() * (model.m1 + model.s1 * w1).exp());
        p2.push(p2.last().unwrap() * (model.m2 + model.s2 * w2).exp());
    }
    (p1, p2)
}

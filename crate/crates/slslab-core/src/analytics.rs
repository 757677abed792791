//! Exact moment analytics for the coupled long-short dynamics.
//!
//! With i.i.d. stage returns, the expected state obeys the linear recursion
//! `E[x(k+1)] = Abar E[x(k)] + bbar` where, in the component order
//! `[g1L, g2S, g1S, g2L]`,
//!
//! ```text
//!        | 1+K1*mu1  -d*K2*mu1      0           0      |        |  I01*mu1 |
//! Abar = | d*K1*mu2   1-K2*mu2      0           0      |  bbar = | -I02*mu2 |
//!        |    0          0       1-K1*mu1    d*K2*mu1  |        | -I01*mu1 |
//!        |    0          0      -d*K1*mu2    1+K2*mu2  |        |  I02*mu2 |
//! ```
//!
//! The closed-form expected gain comes from diagonalizing `Abar`. Writing
//! `theta^2 = (K1 mu1 + K2 mu2)^2 - 4 d^2 K1 K2 mu1 mu2` (nonnegative for
//! `|d| < 1`), the spectral quantities are
//!
//! ```text
//! alpha1 = (theta - K1*mu1 + K2*mu2) / 2      beta1 = K1*mu1 + K2*mu2 + theta
//! alpha2 = (theta + K1*mu1 - K2*mu2) / 2      beta2 = K1*mu1 + K2*mu2 - theta
//! ```
//!
//! and the eigenvalues of `Abar` are `1 +/- alpha1`, `1 +/- alpha2`. The
//! kernel `phi_n(x) = (1+x)^n + (1-x)^n - 2` is positive for `x != 0`, `n > 1`,
//! which is what makes the expected gain robustly positive.
//!
//! Second moments propagate through `variance_recursion`, which is exact for
//! any return law with the given first two moments.

use serde::{Deserialize, Serialize};

use crate::controller::ControllerParams;
use crate::error::{Result, SlsError};
use crate::mat4::{self, Mat4, Vec4, ZERO_MAT, ZERO_VEC};

/// First and second moments of the joint stage-return distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSpec {
    pub mu1: f64,
    pub mu2: f64,
    pub var1: f64,
    pub var2: f64,
    pub cov12: f64,
}

impl MomentSpec {
    pub fn new(mu1: f64, mu2: f64, var1: f64, var2: f64, cov12: f64) -> Result<Self> {
        let m = Self { mu1, mu2, var1, var2, cov12 };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let all = [self.mu1, self.mu2, self.var1, self.var2, self.cov12];
        if all.iter().any(|v| !v.is_finite()) {
            return Err(SlsError::InvalidParameter("moments must be finite".into()));
        }
        if self.var1 < 0.0 || self.var2 < 0.0 {
            return Err(SlsError::InvalidParameter(format!(
                "variances must be nonnegative, got {} and {}",
                self.var1, self.var2
            )));
        }
        // Cauchy-Schwarz, with slack for rounding in caller-computed moments
        if self.cov12 * self.cov12 > self.var1 * self.var2 * (1.0 + 1e-9) + f64::MIN_POSITIVE {
            return Err(SlsError::InvalidParameter(format!(
                "covariance {} inconsistent with variances {} and {}",
                self.cov12, self.var1, self.var2
            )));
        }
        Ok(())
    }
}

/// Spectral quantities of the expected one-step update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralParams {
    pub theta: f64,
    pub alpha1: f64,
    pub alpha2: f64,
    pub beta1: f64,
    pub beta2: f64,
}

/// Mean and variance of the total gain `g(N)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainMoments {
    pub mean: f64,
    pub variance: f64,
    pub std: f64,
}

/// `phi_n(x) = (1+x)^n + (1-x)^n - 2`; zero at `x = 0` or `n <= 1`, positive otherwise.
pub fn phi_n(n: u32, x: f64) -> f64 {
    (1.0 + x).powi(n as i32) + (1.0 - x).powi(n as i32) - 2.0
}

fn spectral_raw(k1: f64, k2: f64, delta: f64, mu1: f64, mu2: f64) -> Result<SpectralParams> {
    let a = k1 * mu1;
    let b = k2 * mu2;
    let mut theta_sq = (a + b) * (a + b) - 4.0 * delta * delta * a * b;
    // nonnegative for |delta| < 1; absorb rounding dust near mu1*mu2 = 0
    if theta_sq < 0.0 {
        if theta_sq < -1e-15 {
            return Err(SlsError::InternalConsistency(format!(
                "negative theta^2 = {theta_sq} for k1 = {k1}, k2 = {k2}, delta = {delta}, mu = ({mu1}, {mu2})"
            )));
        }
        theta_sq = 0.0;
    }
    let theta = theta_sq.sqrt();
    Ok(SpectralParams {
        theta,
        alpha1: (theta - a + b) / 2.0,
        alpha2: (theta + a - b) / 2.0,
        beta1: a + b + theta,
        beta2: a + b - theta,
    })
}

/// Spectral quantities for a cross-coupled design; requires `delta != 0`.
pub fn spectral_params(params: &ControllerParams, mu1: f64, mu2: f64) -> Result<SpectralParams> {
    params.validate()?;
    if params.delta == 0.0 {
        return Err(SlsError::Domain(
            "delta = 0 has no cross-coupled spectral form; use the decoupled gain formula".into(),
        ));
    }
    spectral_raw(params.k1, params.k2, params.delta, mu1, mu2)
}

/// Expected gain of the decoupled pair: `sum_i (I0i/Ki) * phi_n(Ki*mu_i)`.
///
/// Only the leg parameters are read; any coupling on `params` is ignored.
pub fn expected_gain_2sls(params: &ControllerParams, mu1: f64, mu2: f64, n: u32) -> f64 {
    params.i01 / params.k1 * phi_n(n, params.k1 * mu1) + params.i02 / params.k2 * phi_n(n, params.k2 * mu2)
}

/// Closed-form `E[g(N)]` for the cross-coupled controller.
///
/// Degenerate drifts bypass the spectral form: both zero gives break-even 0,
/// a single zero reduces to the surviving stock's decoupled term, and
/// `delta = 0` is the decoupled pair. Callers must pass validated parameters.
pub fn expected_gain_ccsls(params: &ControllerParams, mu1: f64, mu2: f64, n: u32) -> f64 {
    if mu1 == 0.0 && mu2 == 0.0 {
        return 0.0;
    }
    if params.delta == 0.0 {
        return expected_gain_2sls(params, mu1, mu2, n);
    }
    if mu1 == 0.0 {
        return params.i02 / params.k2 * phi_n(n, params.k2 * mu2);
    }
    if mu2 == 0.0 {
        return params.i01 / params.k1 * phi_n(n, params.k1 * mu1);
    }
    let sp = spectral_raw(params.k1, params.k2, params.delta, mu1, mu2)
        .expect("theta^2 is nonnegative for |delta| < 1");
    if sp.theta == 0.0 {
        return 0.0;
    }
    let shared = 2.0 * params.delta * mu1 * mu2 * (params.i01 * params.k1 + params.i02 * params.k2);
    // phi_n(a)/a -> 0 as a -> 0, so a vanishing alpha contributes nothing
    let term = |alpha: f64, beta_mu2: f64, beta_mu1: f64| {
        if alpha == 0.0 {
            0.0
        } else {
            (shared + params.i02 * mu2 * beta_mu2 + params.i01 * mu1 * beta_mu1) / alpha * phi_n(n, alpha)
        }
    };
    (term(sp.alpha1, sp.beta1, sp.beta2) + term(sp.alpha2, sp.beta2, sp.beta1)) / (2.0 * sp.theta)
}

/// Expected one-step update `(Abar, bbar)` of the state `[g1L, g2S, g1S, g2L]`.
pub fn mean_dynamics(params: &ControllerParams, mu1: f64, mu2: f64) -> (Mat4, Vec4) {
    let ControllerParams { i01, i02, k1, k2, delta } = *params;
    let abar = [
        [1.0 + k1 * mu1, -delta * k2 * mu1, 0.0, 0.0],
        [delta * k1 * mu2, 1.0 - k2 * mu2, 0.0, 0.0],
        [0.0, 0.0, 1.0 - k1 * mu1, delta * k2 * mu1],
        [0.0, 0.0, -delta * k1 * mu2, 1.0 + k2 * mu2],
    ];
    let bbar = [i01 * mu1, -i02 * mu2, -i01 * mu1, i02 * mu2];
    (abar, bbar)
}

fn mean_step(abar: &Mat4, bbar: &Vec4, m: &Vec4) -> Vec4 {
    let mut next = mat4::mat_vec(abar, m);
    for i in 0..4 {
        next[i] += bbar[i];
    }
    next
}

/// `E[g(N)]` evaluated directly from the state-space recursion:
/// `ones^T sum_{k=0}^{N-1} Abar^(N-1-k) bbar`, accumulated as `s <- Abar*s + bbar`.
///
/// Independent oracle for [`expected_gain_ccsls`]; no spectral machinery.
pub fn expected_gain_matrix(params: &ControllerParams, mu1: f64, mu2: f64, n: u32) -> f64 {
    let (abar, bbar) = mean_dynamics(params, mu1, mu2);
    let mut s = ZERO_VEC;
    for _ in 0..n {
        s = mean_step(&abar, &bbar, &s);
    }
    mat4::sum_entries(&s)
}

/// Eigenvector matrix `P` (columns) and eigenvalues of `Abar`, in the pairing
/// `P = [p(beta2) p(beta1) | p'(beta1) p'(beta2)]`,
/// `lambda = (1-alpha1, 1+alpha2, 1-alpha2, 1+alpha1)`.
///
/// Undefined when a drift vanishes or `delta = 0` (the blocks degenerate).
pub fn diagonalize_abar(params: &ControllerParams, mu1: f64, mu2: f64) -> Result<(Mat4, Vec4)> {
    params.validate()?;
    if mu1 == 0.0 || mu2 == 0.0 || params.delta == 0.0 {
        return Err(SlsError::Domain(format!(
            "diagonalization needs nonzero drifts and coupling, got mu = ({mu1}, {mu2}), delta = {}",
            params.delta
        )));
    }
    let sp = spectral_raw(params.k1, params.k2, params.delta, mu1, mu2)?;
    let q = 2.0 * params.delta * params.k1 * mu2;
    let p = [
        [sp.beta2 / q, sp.beta1 / q, 0.0, 0.0],
        [1.0, 1.0, 0.0, 0.0],
        [0.0, 0.0, sp.beta1 / q, sp.beta2 / q],
        [0.0, 0.0, 1.0, 1.0],
    ];
    let lambda = [1.0 - sp.alpha1, 1.0 + sp.alpha2, 1.0 - sp.alpha2, 1.0 + sp.alpha1];
    Ok((p, lambda))
}

/// Exact mean and variance of `g(N)` by propagating first and second moments.
///
/// The stage update is `x(k+1) = (A0 + rho1 A1 + rho2 A2) x(k) + rho1 b1 + rho2 b2`
/// with `A0 = I`, so with `R` the second-moment matrix of `(1, rho1, rho2)`,
///
/// ```text
/// E[x x^T](k+1) = sum_{i,j} R[i][j] ( A_i E[x x^T] A_j^T
///                                   + A_i E[x] b_j^T + b_i E[x]^T A_j^T + b_i b_j^T )
/// ```
///
/// and `mean = ones^T E[x(N)]`, `variance = ones^T E[x x^T](N) ones - mean^2`.
pub fn variance_recursion(params: &ControllerParams, moments: &MomentSpec, n: u32) -> Result<GainMoments> {
    params.validate()?;
    moments.validate()?;
    let MomentSpec { mu1, mu2, var1, var2, cov12 } = *moments;
    let ControllerParams { i01, i02, k1, k2, delta } = *params;

    let (abar, bbar) = mean_dynamics(params, mu1, mu2);
    let a_shock = [
        mat4::identity(),
        [
            [k1, -delta * k2, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, -k1, delta * k2],
            [0.0, 0.0, 0.0, 0.0],
        ],
        [
            [0.0, 0.0, 0.0, 0.0],
            [delta * k1, -k2, 0.0, 0.0],
            [0.0, 0.0, 0.0, 0.0],
            [0.0, 0.0, -delta * k1, k2],
        ],
    ];
    let b_shock = [ZERO_VEC, [i01, 0.0, -i01, 0.0], [0.0, -i02, 0.0, i02]];
    let r = [
        [1.0, mu1, mu2],
        [mu1, var1 + mu1 * mu1, cov12 + mu1 * mu2],
        [mu2, cov12 + mu1 * mu2, var2 + mu2 * mu2],
    ];

    let mut m = ZERO_VEC;
    let mut s = ZERO_MAT;
    for _ in 0..n {
        // second moment first: it reads the current-stage mean
        let u = [m, mat4::mat_vec(&a_shock[1], &m), mat4::mat_vec(&a_shock[2], &m)];
        let p = [s, mat4::mat_mul(&a_shock[1], &s), mat4::mat_mul(&a_shock[2], &s)];
        let mut s_next = ZERO_MAT;
        for i in 0..3 {
            for j in 0..3 {
                let w = r[i][j];
                let asa = if j == 0 { p[i] } else { mat4::mat_mul_t(&p[i], &a_shock[j]) };
                mat4::add_scaled(&mut s_next, &asa, w);
                if j != 0 {
                    mat4::add_scaled(&mut s_next, &mat4::outer(&u[i], &b_shock[j]), w);
                }
                if i != 0 {
                    mat4::add_scaled(&mut s_next, &mat4::outer(&b_shock[i], &u[j]), w);
                }
                if i != 0 && j != 0 {
                    mat4::add_scaled(&mut s_next, &mat4::outer(&b_shock[i], &b_shock[j]), w);
                }
            }
        }
        s = s_next;
        m = mean_step(&abar, &bbar, &m);
    }

    let mean = mat4::sum_entries(&m);
    let mut variance = mat4::sum_all(&s) - mean * mean;
    if variance < 0.0 {
        if variance < -1e-9 {
            return Err(SlsError::InternalConsistency(format!(
                "variance recursion produced {variance} at n = {n}"
            )));
        }
        variance = 0.0;
    }
    Ok(GainMoments { mean, variance, std: variance.sqrt() })
}

/// Whether positive expected gain is guaranteed from sign information alone:
/// both drifts nonzero with `0 < |delta| < 1` and `sign(delta) = sign(mu1*mu2)`,
/// or exactly one drift nonzero (the surviving decoupled term is positive).
/// Both drifts zero is break-even.
pub fn rpe_holds(delta: f64, mu1: f64, mu2: f64) -> bool {
    match (mu1 != 0.0, mu2 != 0.0) {
        (false, false) => false,
        (true, false) | (false, true) => true,
        (true, true) => {
            delta != 0.0
                && delta.abs() < 1.0
                && delta.signum() * mu1.signum() * mu2.signum() > 0.0
        }
    }
}

/// Sign facts for one drift quadrant, checked against the admissible table:
///
/// ```text
/// mu1>0, mu2>0: |K1mu1-K2mu2| < theta < K1mu1+K2mu2    alpha1>0 alpha2>0 beta1>0 beta2>0
/// mu1<0, mu2<0: |K1mu1-K2mu2| < theta < |K1mu1+K2mu2|  alpha1>0 alpha2>0 beta1<0 beta2<0
/// mu1>0, mu2<0: |K1mu1+K2mu2| < theta < K1mu1-K2mu2    alpha1<0 alpha2>0 beta1>0 beta2<0
/// mu1<0, mu2>0: |K1mu1+K2mu2| < theta < K2mu2-K1mu1    alpha1>0 alpha2<0 beta1>0 beta2<0
/// ```
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadrantReport {
    /// Signs of `(mu1, mu2)`, each `+1` or `-1`.
    pub quadrant: (i8, i8),
    pub theta: f64,
    pub theta_lower: f64,
    pub theta_upper: f64,
    pub sign_alpha1: i8,
    pub sign_alpha2: i8,
    pub sign_beta1: i8,
    pub sign_beta2: i8,
    pub bounds_hold: bool,
    /// `phi_n(alpha1) * (I02*mu2*beta1 + I01*mu1*beta2) / alpha1 > 0`
    pub ineq_first: bool,
    /// `phi_n(alpha2) * (I02*mu2*beta2 + I01*mu1*beta1) / alpha2 > 0`
    pub ineq_second: bool,
    /// `phi_n(alpha1)/alpha1 + phi_n(alpha2)/alpha2 >= 0`
    pub ineq_third: bool,
    pub all_satisfied: bool,
}

fn sign_of(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Evaluate the quadrant sign facts and the positivity inequalities at horizon `n`.
pub fn quadrant_table_check(
    params: &ControllerParams,
    mu1: f64,
    mu2: f64,
    n: u32,
) -> Result<QuadrantReport> {
    if mu1 == 0.0 || mu2 == 0.0 {
        return Err(SlsError::Domain(format!(
            "quadrant check needs nonzero drifts, got ({mu1}, {mu2})"
        )));
    }
    let sp = spectral_params(params, mu1, mu2)?;
    let a = params.k1 * mu1;
    let b = params.k2 * mu2;
    let quadrant = (sign_of(mu1), sign_of(mu2));
    let (theta_lower, theta_upper, expect_signs) = match quadrant {
        (1, 1) => ((a - b).abs(), a + b, [1, 1, 1, 1]),
        (-1, -1) => ((a - b).abs(), (a + b).abs(), [1, 1, -1, -1]),
        (1, -1) => ((a + b).abs(), a - b, [-1, 1, 1, -1]),
        (-1, 1) => ((a + b).abs(), b - a, [1, -1, 1, -1]),
        _ => unreachable!("drifts checked nonzero"),
    };
    let signs = [sign_of(sp.alpha1), sign_of(sp.alpha2), sign_of(sp.beta1), sign_of(sp.beta2)];
    let bounds_hold = theta_lower < sp.theta && sp.theta < theta_upper;
    let ineq_first =
        phi_n(n, sp.alpha1) * (params.i02 * mu2 * sp.beta1 + params.i01 * mu1 * sp.beta2) / sp.alpha1 > 0.0;
    let ineq_second =
        phi_n(n, sp.alpha2) * (params.i02 * mu2 * sp.beta2 + params.i01 * mu1 * sp.beta1) / sp.alpha2 > 0.0;
    let ineq_third = phi_n(n, sp.alpha1) / sp.alpha1 + phi_n(n, sp.alpha2) / sp.alpha2 >= 0.0;
    Ok(QuadrantReport {
        quadrant,
        theta: sp.theta,
        theta_lower,
        theta_upper,
        sign_alpha1: signs[0],
        sign_alpha2: signs[1],
        sign_beta1: signs[2],
        sign_beta2: signs[3],
        bounds_hold,
        ineq_first,
        ineq_second,
        ineq_third,
        all_satisfied: bounds_hold
            && signs == expect_signs
            && ineq_first
            && ineq_second
            && ineq_third,
    })
}

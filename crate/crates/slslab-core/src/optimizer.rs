//! Random-search construction of the risk-return frontier and minimum-risk
//! selection under an expected-gain floor.
//!
//! Candidate design vectors are drawn uniformly from configured ranges; each
//! cross-coupled candidate is paired with its decoupled twin (same legs,
//! coupling forced to zero) so the two families can be compared on equal
//! footing. Frontier points are computed exactly from the moment recursion,
//! never by sampling.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytics::{variance_recursion, MomentSpec};
use crate::controller::ControllerParams;
use crate::error::{Result, SlsError};
use crate::rng::substream;

/// Sampling box for the random search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SearchRanges {
    /// Initial investments are drawn from the half-open interval `(lo, hi]`.
    pub i0_range: (f64, f64),
    /// Feedback gains are drawn from the half-open interval `(lo, hi]`.
    pub k_range: (f64, f64),
    /// Coupling is drawn from the closed interval `[lo, hi]`.
    pub delta_range: (f64, f64),
    pub n_candidates: usize,
}

impl Default for SearchRanges {
    fn default() -> Self {
        Self {
            i0_range: (0.0, 3.0),
            k_range: (0.0, 3.0),
            delta_range: (0.0, 0.99),
            n_candidates: 5000,
        }
    }
}

impl SearchRanges {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [("i0", self.i0_range), ("k", self.k_range)] {
            if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
                return Err(SlsError::InvalidParameter(format!(
                    "{name} range must satisfy 0 <= lo < hi, got ({lo}, {hi}]"
                )));
            }
        }
        let (lo, hi) = self.delta_range;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi && lo.abs() < 1.0 && hi.abs() < 1.0) {
            return Err(SlsError::InvalidParameter(format!(
                "coupling range must lie inside (-1, 1) with lo <= hi, got [{lo}, {hi}]"
            )));
        }
        if self.n_candidates == 0 {
            return Err(SlsError::InvalidParameter("need at least one candidate".into()));
        }
        Ok(())
    }
}

/// Which controller family a frontier point belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Family {
    #[serde(rename = "cc-sls")]
    CcSls,
    #[serde(rename = "2-sls")]
    TwoSls,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Family::CcSls => write!(f, "cc-sls"),
            Family::TwoSls => write!(f, "2-sls"),
        }
    }
}

/// One evaluated design: exact gain mean and standard deviation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RiskReturnPoint {
    pub d: ControllerParams,
    pub mean: f64,
    pub std: f64,
    pub family: Family,
}

fn draw_half_open<R: Rng + ?Sized>(rng: &mut R, (lo, hi): (f64, f64)) -> f64 {
    // uniform [0,1) mapped onto (lo, hi]; keeps draws strictly above lo
    hi - (hi - lo) * rng.gen::<f64>()
}

/// Uniform candidate draws, each paired with its decoupled twin.
///
/// Per candidate the draw order is fixed: I01, I02, K1, K2, delta.
pub fn sample_candidates(
    ranges: &SearchRanges,
    seed: u64,
) -> Result<Vec<(ControllerParams, ControllerParams)>> {
    ranges.validate()?;
    let mut rng = substream(seed, 0);
    let mut out = Vec::with_capacity(ranges.n_candidates);
    for _ in 0..ranges.n_candidates {
        let i01 = draw_half_open(&mut rng, ranges.i0_range);
        let i02 = draw_half_open(&mut rng, ranges.i0_range);
        let k1 = draw_half_open(&mut rng, ranges.k_range);
        let k2 = draw_half_open(&mut rng, ranges.k_range);
        let delta = rng.gen_range(ranges.delta_range.0..=ranges.delta_range.1);
        let cc = ControllerParams::new(i01, i02, k1, k2, delta)?;
        out.push((cc, cc.decoupled_twin()));
    }
    Ok(out)
}

/// Exact risk-return pair for every candidate, in candidate order.
/// Deterministic: repeated calls are bit-identical.
pub fn evaluate_frontier(
    candidates: &[ControllerParams],
    family: Family,
    moments: &MomentSpec,
    n: u32,
) -> Result<Vec<RiskReturnPoint>> {
    moments.validate()?;
    candidates
        .par_iter()
        .map(|d| {
            let gm = variance_recursion(d, moments, n)?;
            Ok(RiskReturnPoint { d: *d, mean: gm.mean, std: gm.std, family })
        })
        .collect()
}

/// Feasible point (mean >= `g_target`) of smallest standard deviation, with
/// its index into `points`. Ties prefer the larger mean, then the lower
/// index. `None` means no point meets the target.
pub fn select_min_risk(points: &[RiskReturnPoint], g_target: f64) -> Option<(usize, RiskReturnPoint)> {
    let mut best: Option<(usize, RiskReturnPoint)> = None;
    for (idx, p) in points.iter().enumerate() {
        if p.mean < g_target {
            continue;
        }
        let improves = match &best {
            None => true,
            Some((_, b)) => p.std < b.std || (p.std == b.std && p.mean > b.mean),
        };
        if improves {
            best = Some((idx, *p));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ref_moments() -> MomentSpec {
        MomentSpec::new(0.023374, 0.031014, 8.3333e-3, 16.333e-3, 0.0).unwrap()
    }

    fn point(mean: f64, std: f64) -> RiskReturnPoint {
        RiskReturnPoint {
            d: ControllerParams::new(1.0, 1.0, 1.0, 1.0, 0.0).unwrap(),
            mean,
            std,
            family: Family::CcSls,
        }
    }

    #[test]
    fn single_candidate_twin_shares_legs() {
        let ranges = SearchRanges { n_candidates: 1, ..SearchRanges::default() };
        let pairs = sample_candidates(&ranges, 42).unwrap();
        assert_eq!(pairs.len(), 1);
        let (cc, twin) = pairs[0];
        assert_eq!(twin.i01, cc.i01);
        assert_eq!(twin.i02, cc.i02);
        assert_eq!(twin.k1, cc.k1);
        assert_eq!(twin.k2, cc.k2);
        assert_eq!(twin.delta, 0.0);
    }

    #[test]
    fn draws_respect_ranges() {
        let ranges = SearchRanges::default();
        let pairs = sample_candidates(&ranges, 7).unwrap();
        assert_eq!(pairs.len(), 5000);
        for (cc, _) in &pairs {
            assert!(cc.i01 > 0.0 && cc.i01 <= 3.0);
            assert!(cc.i02 > 0.0 && cc.i02 <= 3.0);
            assert!(cc.k1 > 0.0 && cc.k1 <= 3.0);
            assert!(cc.k2 > 0.0 && cc.k2 <= 3.0);
            assert!(cc.delta >= 0.0 && cc.delta <= 0.99);
        }
    }

    #[test]
    fn negative_coupling_range_is_accepted() {
        let ranges = SearchRanges {
            delta_range: (-0.99, 0.0),
            n_candidates: 200,
            ..SearchRanges::default()
        };
        let pairs = sample_candidates(&ranges, 9).unwrap();
        assert!(pairs.iter().all(|(cc, _)| (-0.99..=0.0).contains(&cc.delta)));
    }

    #[test]
    fn range_validation() {
        let r = SearchRanges { i0_range: (3.0, 3.0), ..SearchRanges::default() };
        assert!(r.validate().is_err());
        let r = SearchRanges { delta_range: (0.0, 1.0), ..SearchRanges::default() };
        assert!(r.validate().is_err());
        let r = SearchRanges { n_candidates: 0, ..SearchRanges::default() };
        assert!(r.validate().is_err());
        let r = SearchRanges { k_range: (-0.5, 1.0), ..SearchRanges::default() };
        assert!(r.validate().is_err());
    }

    #[test]
    fn zero_mean_returns_give_zero_mean_gain() {
        let moments = MomentSpec::new(0.0, 0.0, 0.01, 0.01, 0.0).unwrap();
        let pairs = sample_candidates(
            &SearchRanges { n_candidates: 20, ..SearchRanges::default() },
            3,
        )
        .unwrap();
        let ccs: Vec<_> = pairs.iter().map(|(cc, _)| *cc).collect();
        let points = evaluate_frontier(&ccs, Family::CcSls, &moments, 10).unwrap();
        assert!(points.iter().all(|p| p.mean == 0.0));
        assert!(points.iter().all(|p| p.std > 0.0));
    }

    #[test]
    fn reference_design_pairs() {
        let cc = ControllerParams::new(3.0, 2.58, 0.339, 0.234, 0.990).unwrap();
        let ts = ControllerParams::new(3.0, 3.0, 0.713, 0.381, 0.0).unwrap();
        let pts = evaluate_frontier(&[cc], Family::CcSls, &ref_moments(), 30).unwrap();
        assert!((pts[0].mean - 2.00).abs() <= 0.02, "mean {}", pts[0].mean);
        assert!((pts[0].std - 2.225).abs() <= 0.02, "std {}", pts[0].std);
        let pts = evaluate_frontier(&[ts], Family::TwoSls, &ref_moments(), 30).unwrap();
        assert!((pts[0].mean - 2.00).abs() <= 0.02, "mean {}", pts[0].mean);
        assert!((pts[0].std - 2.399).abs() <= 0.02, "std {}", pts[0].std);
    }

    #[test]
    fn frontier_evaluation_is_bit_identical() {
        let pairs = sample_candidates(
            &SearchRanges { n_candidates: 50, ..SearchRanges::default() },
            11,
        )
        .unwrap();
        let ccs: Vec<_> = pairs.iter().map(|(cc, _)| *cc).collect();
        let a = evaluate_frontier(&ccs, Family::CcSls, &ref_moments(), 30).unwrap();
        let b = evaluate_frontier(&ccs, Family::CcSls, &ref_moments(), 30).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn min_risk_selection_rules() {
        let pts = vec![point(3.0, 2.0), point(1.0, 1.0)];
        let (idx, sel) = select_min_risk(&pts, 2.0).unwrap();
        assert_eq!(idx, 0);
        assert_eq!((sel.mean, sel.std), (3.0, 2.0));

        assert!(select_min_risk(&pts, 5.0).is_none());

        // tie on std prefers the larger mean
        let pts = vec![point(2.5, 1.0), point(2.9, 1.0)];
        let (idx, _) = select_min_risk(&pts, 2.0).unwrap();
        assert_eq!(idx, 1);

        // full tie prefers the lower index
        let pts = vec![point(2.5, 1.0), point(2.5, 1.0)];
        let (idx, _) = select_min_risk(&pts, 2.0).unwrap();
        assert_eq!(idx, 0);
    }

    #[test]
    fn min_risk_std_monotone_in_target() {
        let pairs = sample_candidates(
            &SearchRanges { n_candidates: 300, ..SearchRanges::default() },
            21,
        )
        .unwrap();
        let ccs: Vec<_> = pairs.iter().map(|(cc, _)| *cc).collect();
        let points = evaluate_frontier(&ccs, Family::CcSls, &ref_moments(), 30).unwrap();
        let mut last = 0.0f64;
        for g in [0.5, 1.0, 1.5, 2.0, 2.5] {
            if let Some((_, sel)) = select_min_risk(&points, g) {
                assert!(sel.std >= last, "std fell from {last} to {} at target {g}", sel.std);
                last = sel.std;
            }
        }
    }

    #[test]
    fn coupled_family_dominates_decoupled_twins() {
        let pairs = sample_candidates(
            &SearchRanges { n_candidates: 1000, ..SearchRanges::default() },
            5,
        )
        .unwrap();
        let ccs: Vec<_> = pairs.iter().map(|(cc, _)| *cc).collect();
        let twins: Vec<_> = pairs.iter().map(|(_, t)| *t).collect();
        let moments = ref_moments();
        let cc_pts = evaluate_frontier(&ccs, Family::CcSls, &moments, 30).unwrap();
        let tw_pts = evaluate_frontier(&twins, Family::TwoSls, &moments, 30).unwrap();
        let (_, cc_best) = select_min_risk(&cc_pts, 2.0).unwrap();
        let (_, tw_best) = select_min_risk(&tw_pts, 2.0).unwrap();
        assert!(
            cc_best.std < tw_best.std,
            "coupled {} vs decoupled {}",
            cc_best.std,
            tw_best.std
        );
    }
}

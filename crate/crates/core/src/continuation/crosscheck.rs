//! Pairwise agreement of the evaluators over a grid of s values.

use rayon::prelude::*;
use serde::Serialize;

use super::{evaluate, EvalResult, Method};
use crate::error::{Error, Result};
use crate::qfield::FieldContext;
use crate::sequences::Parity;
use crate::special::CNum;

/// Each evaluator runs with this fraction of the comparison tolerance.
const INNER_TOL_FACTOR: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    /// Re s > 0, where the defining series converges.
    Convergent,
    /// Re s ≤ 0, reached only by continuation.
    Continued,
}

impl Region {
    pub fn of(s: &CNum) -> Self {
        if s.re_f64() > 0.0 {
            Region::Convergent
        } else {
            Region::Continued
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PairCheck {
    pub parity: Parity,
    pub first: Method,
    pub second: Method,
    pub delta: f64,
    pub tail_sum: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct PointCheck {
    pub s_re: f64,
    pub s_im: f64,
    pub region: Region,
    pub pairs: Vec<PairCheck>,
    /// Set when s is too close to the pole grid to evaluate.
    pub skipped: Option<String>,
    /// Set when an evaluator failed for another reason.
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct RegionSummary {
    pub region: Region,
    pub parity: Parity,
    pub first: Method,
    pub second: Method,
    pub checked: usize,
    pub max_delta: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct CrossCheckReport {
    pub tol: f64,
    pub points: Vec<PointCheck>,
    pub summaries: Vec<RegionSummary>,
}

impl CrossCheckReport {
    /// No evaluator failed and every compared pair is within tolerance.
    pub fn passed(&self) -> bool {
        self.points
            .iter()
            .all(|p| p.error.is_none() && p.pairs.iter().all(|c| c.passed))
    }

    pub fn skipped(&self) -> usize {
        self.points.iter().filter(|p| p.skipped.is_some()).count()
    }

    pub fn max_delta(&self) -> f64 {
        self.summaries.iter().map(|r| r.max_delta).fold(0.0, f64::max)
    }
}

/// Method pairs compared at `s` for one parity.
pub fn method_pairs(s: &CNum, parity: Parity) -> Vec<(Method, Method)> {
    let mut pairs = Vec::new();
    if Method::Direct.applies(s, parity) {
        pairs.push((Method::Direct, Method::Binomial));
    }
    if Method::Spectral.applies(s, parity) {
        pairs.push((Method::Binomial, Method::Spectral));
    }
    pairs
}

/// Evaluate every applicable method pair at every grid point. Points are
/// processed in parallel; the report keeps grid order.
pub fn cross_check(ctx: &FieldContext, grid: &[CNum], tol: f64) -> CrossCheckReport {
    let points: Vec<PointCheck> = grid.par_iter().map(|s| check_point(ctx, s, tol)).collect();

    let mut summaries = Vec::new();
    for region in [Region::Convergent, Region::Continued] {
        for parity in [Parity::Odd, Parity::Even] {
            for (first, second) in [
                (Method::Direct, Method::Binomial),
                (Method::Binomial, Method::Spectral),
            ] {
                let deltas: Vec<f64> = points
                    .iter()
                    .filter(|p| p.region == region)
                    .flat_map(|p| &p.pairs)
                    .filter(|c| c.parity == parity && c.first == first && c.second == second)
                    .map(|c| c.delta)
                    .collect();
                if !deltas.is_empty() {
                    summaries.push(RegionSummary {
                        region,
                        parity,
                        first,
                        second,
                        checked: deltas.len(),
                        max_delta: deltas.iter().copied().fold(0.0, f64::max),
                    });
                }
            }
        }
    }
    CrossCheckReport { tol, points, summaries }
}

fn check_point(ctx: &FieldContext, s: &CNum, tol: f64) -> PointCheck {
    let mut point = PointCheck {
        s_re: s.re_f64(),
        s_im: s.im_f64(),
        region: Region::of(s),
        pairs: Vec::new(),
        skipped: None,
        error: None,
    };
    match compare_all(ctx, s, tol) {
        Ok(pairs) => point.pairs = pairs,
        Err(e @ Error::NearPole { .. }) => point.skipped = Some(e.to_string()),
        Err(e) => point.error = Some(e.to_string()),
    }
    point
}

fn compare_all(ctx: &FieldContext, s: &CNum, tol: f64) -> Result<Vec<PairCheck>> {
    let inner = tol * INNER_TOL_FACTOR;
    let mut checks = Vec::new();
    for parity in [Parity::Odd, Parity::Even] {
        let mut cache: Vec<(Method, EvalResult)> = Vec::new();
        for (first, second) in method_pairs(s, parity) {
            for method in [first, second] {
                if !cache.iter().any(|(m, _)| *m == method) {
                    cache.push((method, evaluate(ctx, s, parity, method, inner)?));
                }
            }
            let get = |m: Method| &cache.iter().find(|(x, _)| *x == m).expect("cached").1;
            let (a, b) = (get(first), get(second));
            let delta = a.value.dist(&b.value);
            checks.push(PairCheck {
                parity,
                first,
                second,
                delta,
                tail_sum: a.tail_bound + b.tail_bound,
                passed: delta < tol,
            });
        }
    }
    Ok(checks)
}

//! Proper scoring rules over a single conditional market's outcomes.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sample::{dirichlet_uniform, rng_from_seed};
use crate::PROB_TOLERANCE;

/// Lower clamp applied to report entries before taking logarithms.
pub const LOG_CLAMP: f64 = 1e-12;

/// A probability vector over one action's outcomes.
///
/// Construction rejects vectors whose sum is off by more than
/// [`PROB_TOLERANCE`] and re-normalizes the rest, so trade arithmetic drift
/// never accumulates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Report(Vec<f64>);

/// Forecaster beliefs share the shape contract of reports.
pub type Belief = Report;

impl Report {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidProbability(format!(
                "need at least 2 outcomes, got {}",
                probs.len()
            )));
        }
        if probs.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("probability vector"));
        }
        if let Some((k, p)) = probs
            .iter()
            .enumerate()
            .find(|(_, &p)| !(-PROB_TOLERANCE..=1.0 + PROB_TOLERANCE).contains(&p))
        {
            return Err(Error::InvalidProbability(format!(
                "entry {k} = {p} outside [0, 1]"
            )));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOLERANCE {
            return Err(Error::InvalidProbability(format!(
                "entries sum to {sum}, not 1"
            )));
        }
        // Sums within a few ulps of 1 are left alone so normalization is idempotent.
        let exact = (sum - 1.0).abs() <= 8.0 * f64::EPSILON * probs.len() as f64;
        let probs = probs
            .into_iter()
            .map(|p| if exact { p.max(0.0) } else { p.max(0.0) / sum })
            .collect();
        Ok(Report(probs))
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Report::new(vec![1.0 / n as f64; n])
    }

    pub fn probs(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, index: usize) -> Result<f64> {
        self.0.get(index).copied().ok_or(Error::IndexOutOfRange {
            index,
            len: self.0.len(),
        })
    }

    /// Largest absolute componentwise difference to `other`.
    pub fn max_abs_diff(&self, other: &Report) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl TryFrom<Vec<f64>> for Report {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Report::new(v)
    }
}

impl From<Report> for Vec<f64> {
    fn from(r: Report) -> Self {
        r.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScoringRuleKind {
    /// `ln r_i`
    Logarithmic,
    /// Brier form `2 r_i - sum_k r_k^2`
    Quadratic,
}

/// A scoring rule `offset + scale * s_i(r)` for a base rule `s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScoringRule {
    pub kind: ScoringRuleKind,
    pub offset: f64,
    pub scale: f64,
    /// Clamp log-rule report entries to `[LOG_CLAMP, 1]`.
    pub clamp: bool,
}

impl ScoringRule {
    pub fn logarithmic() -> Self {
        ScoringRule {
            kind: ScoringRuleKind::Logarithmic,
            offset: 0.0,
            scale: 1.0,
            clamp: true,
        }
    }

    pub fn quadratic() -> Self {
        ScoringRule {
            kind: ScoringRuleKind::Quadratic,
            offset: 0.0,
            scale: 1.0,
            clamp: true,
        }
    }

    pub fn with_affine(self, offset: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidScale(scale));
        }
        if !offset.is_finite() {
            return Err(Error::NonFinite("scoring rule offset"));
        }
        Ok(ScoringRule {
            offset,
            scale,
            ..self
        })
    }

    pub fn with_clamp(self, clamp: bool) -> Self {
        ScoringRule { clamp, ..self }
    }

    /// Score of `report` once outcome `outcome` materialises.
    pub fn score(&self, report: &Report, outcome: usize) -> Result<f64> {
        let r = report.get(outcome)?;
        let base = match self.kind {
            ScoringRuleKind::Logarithmic => {
                if self.clamp {
                    r.max(LOG_CLAMP).ln()
                } else if r > 0.0 {
                    r.ln()
                } else {
                    return Err(Error::ZeroProbability { index: outcome });
                }
            }
            ScoringRuleKind::Quadratic => {
                2.0 * r - report.probs().iter().map(|x| x * x).sum::<f64>()
            }
        };
        Ok(self.offset + self.scale * base)
    }

    /// Expected score `G(p, r) = sum_k p_k s_k(r)`. Outcomes with zero belief
    /// contribute nothing.
    pub fn expected_score(&self, belief: &Belief, report: &Report) -> Result<f64> {
        if belief.len() != report.len() {
            return Err(Error::ShapeMismatch {
                expected: report.len(),
                found: belief.len(),
            });
        }
        let mut total = 0.0;
        for (k, &p) in belief.probs().iter().enumerate() {
            if p > 0.0 {
                total += p * self.score(report, k)?;
            }
        }
        Ok(total)
    }

    /// Strict-properness spot check: draws `trials` reports uniformly from the
    /// simplex (skipping any within 1e-6 of `belief`) and returns whether the
    /// truthful report scores strictly higher in expectation than every draw.
    pub fn properness_witness(&self, belief: &Belief, trials: usize, seed: u64) -> Result<bool> {
        let mut rng = rng_from_seed(seed);
        let truthful = self.expected_score(belief, belief)?;
        let mut done = 0;
        while done < trials {
            let report = Report::new(dirichlet_uniform(&mut rng, belief.len()))?;
            if report.max_abs_diff(belief) <= 1e-6 {
                continue;
            }
            done += 1;
            if self.expected_score(belief, &report)? >= truthful {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

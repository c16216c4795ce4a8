//! Prior-weighted LMSR cost function.
//!
//! `C(q) = b ln(sum_k pi_k exp(q_k / b))`, with prices
//! `r_k = pi_k exp(q_k / b) / sum_x pi_x exp(q_x / b)`.
//! The matching scoring rule is `s_i(r) = q_i - C(q) = b ln(r_i / pi_i)`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scoring::{Report, ScoringRule};

/// Outstanding security counts (or a trade delta) for one conditional market.
///
/// Entries may be negative; whether a trader may actually hold a short
/// position is decided by the containing market.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Quantities(Vec<f64>);

impl Quantities {
    pub fn new(q: Vec<f64>) -> Result<Self> {
        if q.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "quantities need at least 2 outcomes, got {}",
                q.len()
            )));
        }
        if q.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("quantities"));
        }
        Ok(Quantities(q))
    }

    pub fn zeros(n: usize) -> Self {
        Quantities(vec![0.0; n.max(2)])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    /// Smallest entry; ties resolve to the lowest index.
    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Largest entry; ties resolve to the lowest index.
    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Adds `beta` to every entry (a bundle of `beta` of each security).
    pub fn shifted(&self, beta: f64) -> Quantities {
        Quantities(self.0.iter().map(|x| x + beta).collect())
    }

    pub fn checked_add(&self, other: &Quantities) -> Result<Quantities> {
        same_len(self.len(), other.len())?;
        Ok(Quantities(
            self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect(),
        ))
    }

    pub fn checked_sub(&self, other: &Quantities) -> Result<Quantities> {
        same_len(self.len(), other.len())?;
        Ok(Quantities(
            self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect(),
        ))
    }
}

impl TryFrom<Vec<f64>> for Quantities {
    type Error = Error;

    fn try_from(v: Vec<f64>) -> Result<Self> {
        Quantities::new(v)
    }
}

impl From<Quantities> for Vec<f64> {
    fn from(q: Quantities) -> Self {
        q.0
    }
}

fn same_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::ShapeMismatch { expected, found })
    }
}

/// `ln(sum_k exp(x_k))` with max-shift.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// LMSR parameters for one conditional market.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCostSpec", into = "RawCostSpec")]
pub struct CostFunctionSpec {
    liquidity: f64,
    prior: Report,
}

#[derive(Serialize, Deserialize)]
struct RawCostSpec {
    liquidity: f64,
    prior: Report,
}

impl TryFrom<RawCostSpec> for CostFunctionSpec {
    type Error = Error;

    fn try_from(raw: RawCostSpec) -> Result<Self> {
        CostFunctionSpec::new(raw.liquidity, raw.prior)
    }
}

impl From<CostFunctionSpec> for RawCostSpec {
    fn from(c: CostFunctionSpec) -> Self {
        RawCostSpec {
            liquidity: c.liquidity,
            prior: c.prior,
        }
    }
}

impl CostFunctionSpec {
    pub fn new(liquidity: f64, prior: Report) -> Result<Self> {
        if !(liquidity > 0.0 && liquidity.is_finite()) {
            return Err(Error::InvalidLiquidity(liquidity));
        }
        if let Some(k) = prior.probs().iter().position(|&p| p <= 0.0 || p >= 1.0) {
            return Err(Error::InvalidProbability(format!(
                "prior entry {k} must lie strictly inside (0, 1)"
            )));
        }
        Ok(CostFunctionSpec { liquidity, prior })
    }

    /// Uniform prior over `n` outcomes.
    pub fn uniform(n: usize, liquidity: f64) -> Result<Self> {
        CostFunctionSpec::new(liquidity, Report::uniform(n)?)
    }

    pub fn liquidity(&self) -> f64 {
        self.liquidity
    }

    pub fn prior(&self) -> &Report {
        &self.prior
    }

    pub fn outcome_count(&self) -> usize {
        self.prior.len()
    }

    fn check(&self, q: &Quantities) -> Result<()> {
        same_len(self.outcome_count(), q.len())
    }

    fn log_weights(&self, q: &Quantities) -> Vec<f64> {
        self.prior
            .probs()
            .iter()
            .zip(q.as_slice())
            .map(|(p, x)| p.ln() + x / self.liquidity)
            .collect()
    }

    pub fn cost(&self, q: &Quantities) -> Result<f64> {
        self.check(q)?;
        Ok(self.liquidity * log_sum_exp(&self.log_weights(q)))
    }

    pub fn prices(&self, q: &Quantities) -> Result<Report> {
        self.check(q)?;
        let w = self.log_weights(q);
        let m = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = w.iter().map(|x| (x - m).exp()).collect();
        let z: f64 = e.iter().sum();
        Report::new(e.into_iter().map(|x| x / z).collect())
    }

    /// `C(to) - C(from)`; negative for net-short trades.
    pub fn trade_cost(&self, from: &Quantities, to: &Quantities) -> Result<f64> {
        Ok(self.cost(to)? - self.cost(from)?)
    }

    /// Standardized trade moving prices at `q` to `target`: the price-equivalent
    /// delta whose smallest entry is exactly zero.
    pub fn quantities_for_prices(&self, q: &Quantities, target: &Report) -> Result<Quantities> {
        self.quantities_for_prices_shifted(q, target, 0.0)
    }

    /// Like [`Self::quantities_for_prices`] with a bundle of `beta` added, so the
    /// smallest entry equals `beta`.
    pub fn quantities_for_prices_shifted(
        &self,
        q: &Quantities,
        target: &Report,
        beta: f64,
    ) -> Result<Quantities> {
        same_len(self.outcome_count(), target.len())?;
        if let Some(index) = target.probs().iter().position(|&t| t <= 0.0) {
            return Err(Error::UnreachableTarget { index });
        }
        let current = self.prices(q)?;
        let raw: Vec<f64> = target
            .probs()
            .iter()
            .zip(current.probs())
            .map(|(t, r)| self.liquidity * (t.ln() - r.ln()))
            .collect();
        let raw = Quantities::new(raw)?;
        let min = raw.min();
        Ok(Quantities(raw.0.iter().map(|x| x - min + beta).collect()))
    }

    /// `q_i - C(q)`, the score the cost function assigns to outcome `i`.
    pub fn implied_score(&self, q: &Quantities, outcome: usize) -> Result<f64> {
        let qi = *q.as_slice().get(outcome).ok_or(Error::IndexOutOfRange {
            index: outcome,
            len: q.len(),
        })?;
        Ok(qi - self.cost(q)?)
    }

    /// Logarithmic rule scaled by the liquidity. Its score differences equal
    /// the differences of [`Self::implied_score`].
    pub fn matching_scoring_rule(&self) -> ScoringRule {
        ScoringRule::logarithmic()
            .with_affine(0.0, self.liquidity)
            .expect("liquidity validated positive")
    }
}

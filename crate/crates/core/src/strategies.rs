//! Price-preserving trade transforms and worst-case loss accounting.
//!
//! Adding a bundle of `beta_k` securities of every outcome in market `k`
//! leaves prices unchanged but shifts the trader's realised payoff by
//! `beta_j / phi_j - sum_k beta_k` when action `j` is selected. Choosing
//! `beta_k` moves liability between traders and the market creator:
//!
//! | subtract per market | result |
//! |---|---|
//! | `max_x delta_x` | liability-free for the creator |
//! | trade cost | same realised payoffs as the scoring-rule market |
//! | `min_x delta_x` | standardized (cheapest long-only) trade |
//! | `0` | the trade as given |

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::costfn::Quantities;
use crate::engine::MarketState;
use crate::error::{Error, Result};

/// Bundle sizes `beta_k` per action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleSpec {
    pub beta: Vec<f64>,
}

impl BundleSpec {
    pub fn new(beta: Vec<f64>) -> Result<Self> {
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(Error::NonFinite("bundle"));
        }
        Ok(BundleSpec { beta })
    }

    pub fn zero(action_count: usize) -> Self {
        BundleSpec {
            beta: vec![0.0; action_count],
        }
    }

    /// Realised payoff shift `beta_j / phi_j - sum_k beta_k` when action
    /// `selected` is chosen and securities pay `1 / phi_j`.
    pub fn payoff_shift(&self, phi: &[f64], selected: usize) -> f64 {
        self.beta[selected] / phi[selected] - self.beta.iter().sum::<f64>()
    }

    /// Expectation of [`Self::payoff_shift`] over the decision rule.
    pub fn expected_shift(&self, phi: &[f64]) -> f64 {
        phi.iter()
            .enumerate()
            .map(|(j, p)| p * self.payoff_shift(phi, j))
            .sum()
    }
}

/// Per-action reference points for reallocating liability, left to right
/// from creator-liability-free to the raw trade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Allocation {
    LiabilityFree,
    ScoringEquivalent,
    Standardized,
    AsGiven,
}

impl Allocation {
    pub const SPECTRUM: [Allocation; 4] = [
        Allocation::LiabilityFree,
        Allocation::ScoringEquivalent,
        Allocation::Standardized,
        Allocation::AsGiven,
    ];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InsurerMode {
    /// Short bundles equal to each market's trade cost.
    CostMatched,
    /// Short bundles equal to each market's largest delta.
    MaxMatched,
}

/// Subtracts each market's smallest delta so the minimum entry is exactly 0.
pub fn standardize(deltas: &[Quantities]) -> Vec<Quantities> {
    deltas.iter().map(|d| d.shifted(-d.min())).collect()
}

/// Adds `beta_k` of every security to market `k`'s delta.
pub fn apply_bundle(deltas: &[Quantities], bundle: &BundleSpec) -> Result<Vec<Quantities>> {
    if deltas.len() != bundle.beta.len() {
        return Err(Error::ShapeMismatch {
            expected: deltas.len(),
            found: bundle.beta.len(),
        });
    }
    Ok(deltas
        .iter()
        .zip(&bundle.beta)
        .map(|(d, b)| d.shifted(*b))
        .collect())
}

/// The bundle that maps `deltas` onto the given allocation point, evaluated
/// against the current state of `market`.
pub fn allocation_bundle(
    market: &MarketState,
    deltas: &[Quantities],
    allocation: Allocation,
) -> Result<BundleSpec> {
    market.spec().check_deltas(deltas)?;
    let beta = match allocation {
        Allocation::LiabilityFree => deltas.iter().map(|d| -d.max()).collect(),
        Allocation::ScoringEquivalent => market.costs_of(deltas)?.into_iter().map(|c| -c).collect(),
        Allocation::Standardized => deltas.iter().map(|d| -d.min()).collect(),
        Allocation::AsGiven => vec![0.0; deltas.len()],
    };
    BundleSpec::new(beta)
}

pub fn reallocate(
    market: &MarketState,
    deltas: &[Quantities],
    allocation: Allocation,
) -> Result<Vec<Quantities>> {
    if matches!(
        allocation,
        Allocation::LiabilityFree | Allocation::ScoringEquivalent
    ) && !market.spec().allow_short()
    {
        return Err(Error::ShortingRequired);
    }
    apply_bundle(deltas, &allocation_bundle(market, deltas, allocation)?)
}

/// Bundles each market with minus its trade cost: net cash zero, and the
/// securities settlement reproduces the scoring-rule settlement exactly.
pub fn scoring_equivalent_transform(
    market: &MarketState,
    deltas: &[Quantities],
) -> Result<Vec<Quantities>> {
    reallocate(market, deltas, Allocation::ScoringEquivalent)
}

/// Subtracts each market's largest delta so every holding is non-positive;
/// the creator's loss is then bounded by [`ex_ante_creator_bound`].
pub fn liability_free_transform(
    market: &MarketState,
    deltas: &[Quantities],
) -> Result<Vec<Quantities>> {
    reallocate(market, deltas, Allocation::LiabilityFree)
}

/// Short bundle an external insurer takes against all trading since the
/// market opened.
pub fn insurer_position(market: &MarketState, mode: InsurerMode) -> Result<BundleSpec> {
    let net = market.net_deltas()?;
    let beta = match mode {
        InsurerMode::MaxMatched => net.iter().map(|d| -d.max()).collect(),
        InsurerMode::CostMatched => market
            .spec()
            .markets()
            .iter()
            .zip(&net)
            .zip(market.quantities())
            .map(|((m, d), q)| Ok(-m.cost.trade_cost(&q.checked_sub(d)?, q)?))
            .collect::<Result<Vec<f64>>>()?,
    };
    BundleSpec::new(beta)
}

/// Per-market score gains `s_i(r*) - s_i(r)` of moving prices by `deltas`.
pub fn score_gains(market: &MarketState, deltas: &[Quantities]) -> Result<Vec<Vec<f64>>> {
    market.spec().check_deltas(deltas)?;
    let before = market.prices()?;
    market
        .spec()
        .markets()
        .iter()
        .zip(market.quantities())
        .zip(deltas)
        .zip(&before)
        .map(|(((m, q), d), r)| {
            let after = m.cost.prices(&q.checked_add(d)?)?;
            let rule = m.cost.matching_scoring_rule();
            (0..m.outcome_count())
                .map(|i| Ok(rule.score(&after, i)? - rule.score(r, i)?))
                .collect()
        })
        .collect()
}

/// `sum_k max_x (s_x^k(r*) - s_x^k(r))`: the creator's maximum loss on a
/// liability-free trade, known before the decision.
pub fn ex_ante_creator_bound(market: &MarketState, deltas: &[Quantities]) -> Result<f64> {
    Ok(score_gains(market, deltas)?
        .iter()
        .map(|g| g.iter().copied().fold(f64::NEG_INFINITY, f64::max))
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CreatorBound {
    /// No escrow fixed before trading covers the creator's liability.
    Unbounded,
    Bounded(f64),
}

impl std::fmt::Display for CreatorBound {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CreatorBound::Unbounded => f.write_str("unbounded"),
            CreatorBound::Bounded(b) => write!(f, "{b}"),
        }
    }
}

/// Worst-case losses (positive = money lost) of a single trade, enumerated
/// over every (selected action, observed outcome) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstCaseReport {
    pub trader_wcl_scoring: f64,
    pub trader_wcl_securities: f64,
    pub creator_wcl_scoring: f64,
    pub creator_wcl_securities: f64,
    pub creator_bound: CreatorBound,
}

impl WorstCaseReport {
    pub const CSV_HEADER: [&'static str; 5] = [
        "trader_wcl_scoring",
        "trader_wcl_securities",
        "creator_wcl_scoring",
        "creator_wcl_securities",
        "creator_bound",
    ];

    pub fn csv_fields(&self) -> [String; 5] {
        [
            self.trader_wcl_scoring.to_string(),
            self.trader_wcl_securities.to_string(),
            self.creator_wcl_scoring.to_string(),
            self.creator_wcl_securities.to_string(),
            self.creator_bound.to_string(),
        ]
    }
}

/// Worst-case losses of making `deltas` from the current state of `market`
/// with securities paying `1 / phi_j`. The creator side mirrors this one
/// trade. The ex-ante bound is reported only when every market's delta is
/// non-positive (the liability-free shape).
pub fn worst_case_losses(
    market: &MarketState,
    deltas: &[Quantities],
    phi: &[f64],
) -> Result<WorstCaseReport> {
    check_phi(market, phi)?;
    let gains = score_gains(market, deltas)?;
    let total_cost: f64 = market.costs_of(deltas)?.iter().sum();

    let mut trader_scoring_min = f64::INFINITY;
    let mut trader_securities_min = f64::INFINITY;
    let mut trader_scoring_max = f64::NEG_INFINITY;
    let mut trader_securities_max = f64::NEG_INFINITY;
    for (j, (g, d)) in gains.iter().zip(deltas).enumerate() {
        for (gi, di) in g.iter().zip(d.as_slice()) {
            let scoring = gi / phi[j];
            let securities = di / phi[j] - total_cost;
            trader_scoring_min = trader_scoring_min.min(scoring);
            trader_scoring_max = trader_scoring_max.max(scoring);
            trader_securities_min = trader_securities_min.min(securities);
            trader_securities_max = trader_securities_max.max(securities);
        }
    }

    let creator_bound = if deltas.iter().all(|d| d.max() <= 0.0) {
        CreatorBound::Bounded(ex_ante_creator_bound(market, deltas)? + 0.0)
    } else {
        CreatorBound::Unbounded
    };
    Ok(WorstCaseReport {
        trader_wcl_scoring: -trader_scoring_min + 0.0,
        trader_wcl_securities: -trader_securities_min + 0.0,
        creator_wcl_scoring: trader_scoring_max + 0.0,
        creator_wcl_securities: trader_securities_max + 0.0,
        creator_bound,
    })
}

/// Creator securities worst-case loss via the split
/// `creator(j, i) = a_j - b_ji - c_ji` with `a_j = sum_{k != j} cost_k`,
/// `b_ji = s_i^j(r*) - s_i^j(r)` and `c_ji = (1 - phi_j) / phi_j * delta_i^j`.
pub fn creator_securities_wcl_decomposed(
    market: &MarketState,
    deltas: &[Quantities],
    phi: &[f64],
) -> Result<f64> {
    check_phi(market, phi)?;
    let gains = score_gains(market, deltas)?;
    let costs = market.costs_of(deltas)?;
    let total: f64 = costs.iter().sum();
    let mut worst = f64::INFINITY;
    for (j, (g, d)) in gains.iter().zip(deltas).enumerate() {
        let a = total - costs[j];
        for (b, di) in g.iter().zip(d.as_slice()) {
            let c = (1.0 - phi[j]) / phi[j] * di;
            worst = worst.min(a - b - c);
        }
    }
    Ok(-worst + 0.0)
}

fn check_phi(market: &MarketState, phi: &[f64]) -> Result<()> {
    if phi.len() != market.spec().action_count() {
        return Err(Error::ShapeMismatch {
            expected: market.spec().action_count(),
            found: phi.len(),
        });
    }
    if let Some((action, &value)) = phi
        .iter()
        .enumerate()
        .find(|(_, p)| p.partial_cmp(&&0.0) != Some(Ordering::Greater))
    {
        return Err(Error::FullSupport { action, value });
    }
    Ok(())
}

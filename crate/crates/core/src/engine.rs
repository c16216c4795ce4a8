//! Conditional markets, trade execution, stochastic decision and settlement.
//!
//! A [`MarketState`] holds one LMSR conditional market per action. Traders pay
//! the cost-function difference at trade time. After a decision rule has been
//! realized, [`MarketState::settle_securities`] pays `v_j = 1 / phi_j` per held
//! security `(j, i)` and [`MarketState::settle_scoring`] pays the equivalent
//! decision scoring rule `(1 / phi_j) (s_i(r*) - s_i(r))` over each trader's
//! report transitions in market `j`.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::costfn::{CostFunctionSpec, Quantities};
use crate::error::{Error, Result};
use crate::sample::{inverse_cdf, rng_from_seed};
use crate::scoring::Report;
use crate::PROB_TOLERANCE;

/// Default lower bound on every decision-rule probability.
pub const DEFAULT_FLOOR: f64 = 0.01;

/// Holdings below this are treated as short positions.
const SHORT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TraderId(pub String);

impl TraderId {
    pub fn new(id: impl Into<String>) -> Self {
        TraderId(id.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for TraderId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for TraderId {
    fn from(s: &str) -> Self {
        TraderId(s.to_string())
    }
}

/// Cost function and starting inventory of one action's conditional market.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalMarketSpec {
    pub cost: CostFunctionSpec,
    pub initial: Quantities,
}

impl ConditionalMarketSpec {
    pub fn new(cost: CostFunctionSpec, initial: Quantities) -> Result<Self> {
        if cost.outcome_count() != initial.len() {
            return Err(Error::ShapeMismatch {
                expected: cost.outcome_count(),
                found: initial.len(),
            });
        }
        Ok(ConditionalMarketSpec { cost, initial })
    }

    pub fn outcome_count(&self) -> usize {
        self.cost.outcome_count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawMarketSpec", into = "RawMarketSpec")]
pub struct MarketSpec {
    markets: Vec<ConditionalMarketSpec>,
    allow_short: bool,
}

#[derive(Serialize, Deserialize)]
struct RawMarketSpec {
    markets: Vec<ConditionalMarketSpec>,
    allow_short: bool,
}

impl TryFrom<RawMarketSpec> for MarketSpec {
    type Error = Error;

    fn try_from(raw: RawMarketSpec) -> Result<Self> {
        MarketSpec::new(raw.markets, raw.allow_short)
    }
}

impl From<MarketSpec> for RawMarketSpec {
    fn from(s: MarketSpec) -> Self {
        RawMarketSpec {
            markets: s.markets,
            allow_short: s.allow_short,
        }
    }
}

impl MarketSpec {
    pub fn new(markets: Vec<ConditionalMarketSpec>, allow_short: bool) -> Result<Self> {
        if markets.len() < 2 {
            return Err(Error::InvalidSpec(format!(
                "need at least 2 actions, got {}",
                markets.len()
            )));
        }
        for m in &markets {
            if m.cost.outcome_count() != m.initial.len() {
                return Err(Error::ShapeMismatch {
                    expected: m.cost.outcome_count(),
                    found: m.initial.len(),
                });
            }
        }
        Ok(MarketSpec {
            markets,
            allow_short,
        })
    }

    /// Uniform-prior LMSR markets with a common liquidity and zero initial
    /// inventory.
    pub fn uniform(outcomes: &[usize], liquidity: f64, allow_short: bool) -> Result<Self> {
        let markets = outcomes
            .iter()
            .map(|&n| {
                ConditionalMarketSpec::new(
                    CostFunctionSpec::uniform(n, liquidity)?,
                    Quantities::zeros(n),
                )
            })
            .collect::<Result<Vec<_>>>()?;
        MarketSpec::new(markets, allow_short)
    }

    pub fn action_count(&self) -> usize {
        self.markets.len()
    }

    pub fn outcome_counts(&self) -> Vec<usize> {
        self.markets.iter().map(|m| m.outcome_count()).collect()
    }

    pub fn markets(&self) -> &[ConditionalMarketSpec] {
        &self.markets
    }

    pub fn market(&self, action: usize) -> Result<&ConditionalMarketSpec> {
        self.markets.get(action).ok_or(Error::IndexOutOfRange {
            index: action,
            len: self.markets.len(),
        })
    }

    pub fn allow_short(&self) -> bool {
        self.allow_short
    }

    /// Checks that `deltas` has one entry per action of matching length.
    pub fn check_deltas(&self, deltas: &[Quantities]) -> Result<()> {
        if deltas.len() != self.action_count() {
            return Err(Error::ShapeMismatch {
                expected: self.action_count(),
                found: deltas.len(),
            });
        }
        for (m, d) in self.markets.iter().zip(deltas) {
            if m.outcome_count() != d.len() {
                return Err(Error::ShapeMismatch {
                    expected: m.outcome_count(),
                    found: d.len(),
                });
            }
        }
        Ok(())
    }

    pub fn zero_deltas(&self) -> Vec<Quantities> {
        self.markets
            .iter()
            .map(|m| Quantities::zeros(m.outcome_count()))
            .collect()
    }
}

/// A full-support stochastic decision rule over actions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DecisionRule {
    /// A constant probability vector.
    Fixed { phi: Vec<f64>, floor: f64 },
    /// Softmax over each action's price of its target outcome, mixed with a
    /// uniform floor: `phi_k = floor + (1 - m floor) softmax(r_k / tau)_k`.
    /// Small temperatures approach the MAX rule while keeping full support.
    SoftmaxOfPrice {
        target_outcomes: Vec<usize>,
        temperature: f64,
        floor: f64,
    },
}

impl DecisionRule {
    pub fn fixed(phi: Vec<f64>) -> Self {
        DecisionRule::Fixed {
            phi,
            floor: DEFAULT_FLOOR,
        }
    }

    pub fn softmax_of_price(target_outcomes: Vec<usize>, temperature: f64) -> Self {
        DecisionRule::SoftmaxOfPrice {
            target_outcomes,
            temperature,
            floor: DEFAULT_FLOOR,
        }
    }

    pub fn with_floor(self, new_floor: f64) -> Self {
        match self {
            DecisionRule::Fixed { phi, .. } => DecisionRule::Fixed {
                phi,
                floor: new_floor,
            },
            DecisionRule::SoftmaxOfPrice {
                target_outcomes,
                temperature,
                ..
            } => DecisionRule::SoftmaxOfPrice {
                target_outcomes,
                temperature,
                floor: new_floor,
            },
        }
    }

    pub fn floor(&self) -> f64 {
        match self {
            DecisionRule::Fixed { floor, .. } | DecisionRule::SoftmaxOfPrice { floor, .. } => {
                *floor
            }
        }
    }

    /// Realized action probabilities given the current prices of every
    /// conditional market.
    pub fn realize(&self, prices: &[Report]) -> Result<Vec<f64>> {
        let m = prices.len();
        let floor = self.floor();
        if !(floor > 0.0 && floor * m as f64 <= 1.0) {
            return Err(Error::InvalidRule(format!(
                "floor {floor} must be positive and at most 1/{m}"
            )));
        }
        let phi = match self {
            DecisionRule::Fixed { phi, .. } => {
                if phi.len() != m {
                    return Err(Error::ShapeMismatch {
                        expected: m,
                        found: phi.len(),
                    });
                }
                if let Some((action, &value)) = phi
                    .iter()
                    .enumerate()
                    .find(|(_, p)| !(p.is_finite() && **p > 0.0))
                {
                    return Err(Error::FullSupport { action, value });
                }
                let sum: f64 = phi.iter().sum();
                if (sum - 1.0).abs() > PROB_TOLERANCE {
                    return Err(Error::InvalidRule(format!(
                        "probabilities sum to {sum}, not 1"
                    )));
                }
                phi.iter().map(|p| p / sum).collect::<Vec<_>>()
            }
            DecisionRule::SoftmaxOfPrice {
                target_outcomes,
                temperature,
                ..
            } => {
                if !(*temperature > 0.0 && temperature.is_finite()) {
                    return Err(Error::InvalidRule(format!(
                        "temperature must be positive, got {temperature}"
                    )));
                }
                if target_outcomes.len() != m {
                    return Err(Error::ShapeMismatch {
                        expected: m,
                        found: target_outcomes.len(),
                    });
                }
                let logits = target_outcomes
                    .iter()
                    .zip(prices)
                    .map(|(&t, r)| Ok(r.get(t)? / temperature))
                    .collect::<Result<Vec<f64>>>()?;
                let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let e: Vec<f64> = logits.iter().map(|x| (x - top).exp()).collect();
                let z: f64 = e.iter().sum();
                let spread = 1.0 - m as f64 * floor;
                e.into_iter().map(|x| floor + spread * x / z).collect()
            }
        };
        if let Some((action, &value)) = phi.iter().enumerate().find(|(_, &p)| p < floor - 1e-12) {
            return Err(Error::BelowFloor {
                action,
                value,
                floor,
            });
        }
        Ok(phi)
    }
}

/// Payout per winning security for each action.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettlementPolicy {
    payout: Vec<f64>,
}

impl SettlementPolicy {
    /// `v_j = 1 / phi_j`, the only scaling under which securities and scoring
    /// mechanisms give the same expected payoff.
    pub fn scaled(phi: &[f64]) -> Result<Self> {
        SettlementPolicy::custom(phi.iter().map(|p| 1.0 / p).collect())
    }

    pub fn custom(payout: Vec<f64>) -> Result<Self> {
        if let Some((action, &value)) = payout
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v > 0.0))
        {
            return Err(Error::InvalidPayout { action, value });
        }
        Ok(SettlementPolicy { payout })
    }

    /// `v_j = 1` for every action, as in an ordinary prediction market.
    pub fn unit(action_count: usize) -> Self {
        SettlementPolicy {
            payout: vec![1.0; action_count],
        }
    }

    pub fn payout(&self) -> &[f64] {
        &self.payout
    }
}

/// How a trader specifies a trade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TradeOrder {
    /// Raw quantity deltas, one vector per action.
    Deltas(Vec<Quantities>),
    /// Target prices per action; `None` leaves that market untouched. Targets
    /// are reached with standardized (minimum entry zero) deltas.
    Targets(Vec<Option<Report>>),
}

/// One executed trade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TradeRecord {
    pub index: usize,
    pub trader: TraderId,
    pub deltas: Vec<Quantities>,
    /// `C_k(q*_k) - C_k(q_k)` per action.
    pub costs: Vec<f64>,
    pub cash_paid: f64,
    pub prices_before: Vec<Report>,
    pub prices_after: Vec<Report>,
}

/// Realised payoffs of every trader plus the market creator.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Payoffs {
    pub traders: BTreeMap<TraderId, f64>,
    pub creator: f64,
}

impl Payoffs {
    pub fn trader(&self, id: &TraderId) -> f64 {
        self.traders.get(id).copied().unwrap_or(0.0)
    }

    /// Sum over all parties; zero up to rounding.
    pub fn total(&self) -> f64 {
        self.traders.values().sum::<f64>() + self.creator
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SettlementOutcome {
    pub selected_action: usize,
    pub observed_outcome: usize,
    pub phi: Vec<f64>,
    pub securities: Payoffs,
    pub scoring: Payoffs,
}

#[derive(Debug, Clone)]
pub struct MarketState {
    spec: MarketSpec,
    quantities: Vec<Quantities>,
    log: Vec<TradeRecord>,
    holdings: BTreeMap<TraderId, Vec<Quantities>>,
    phi: Option<Vec<f64>>,
    selected: Option<usize>,
}

impl MarketState {
    pub fn open(spec: MarketSpec) -> Self {
        let quantities = spec.markets.iter().map(|m| m.initial.clone()).collect();
        MarketState {
            spec,
            quantities,
            log: Vec::new(),
            holdings: BTreeMap::new(),
            phi: None,
            selected: None,
        }
    }

    pub fn spec(&self) -> &MarketSpec {
        &self.spec
    }

    pub fn quantities(&self) -> &[Quantities] {
        &self.quantities
    }

    pub fn log(&self) -> &[TradeRecord] {
        &self.log
    }

    pub fn prices(&self) -> Result<Vec<Report>> {
        self.spec
            .markets
            .iter()
            .zip(&self.quantities)
            .map(|(m, q)| m.cost.prices(q))
            .collect()
    }

    pub fn traders(&self) -> impl Iterator<Item = &TraderId> {
        self.holdings.keys()
    }

    pub fn holdings(&self, trader: &TraderId) -> Option<&[Quantities]> {
        self.holdings.get(trader).map(Vec::as_slice)
    }

    /// Net change of every market's inventory since opening.
    pub fn net_deltas(&self) -> Result<Vec<Quantities>> {
        self.spec
            .markets
            .iter()
            .zip(&self.quantities)
            .map(|(m, q)| q.checked_sub(&m.initial))
            .collect()
    }

    /// Per-action cost of moving inventory by `deltas` from the current state.
    pub fn costs_of(&self, deltas: &[Quantities]) -> Result<Vec<f64>> {
        self.spec.check_deltas(deltas)?;
        self.spec
            .markets
            .iter()
            .zip(&self.quantities)
            .zip(deltas)
            .map(|((m, q), d)| {
                if d.is_zero() {
                    Ok(0.0)
                } else {
                    m.cost.trade_cost(q, &q.checked_add(d)?)
                }
            })
            .collect()
    }

    /// Standardized deltas reaching the given target prices.
    pub fn deltas_for_targets(&self, targets: &[Option<Report>]) -> Result<Vec<Quantities>> {
        if targets.len() != self.spec.action_count() {
            return Err(Error::ShapeMismatch {
                expected: self.spec.action_count(),
                found: targets.len(),
            });
        }
        self.spec
            .markets
            .iter()
            .zip(&self.quantities)
            .zip(targets)
            .map(|((m, q), t)| match t {
                Some(t) => m.cost.quantities_for_prices(q, t),
                None => Ok(Quantities::zeros(m.outcome_count())),
            })
            .collect()
    }

    /// Executes a trade and records it. On error the state is unchanged.
    pub fn execute_trade(
        &mut self,
        trader: impl Into<TraderId>,
        order: TradeOrder,
    ) -> Result<TradeRecord> {
        let trader = trader.into();
        let deltas = match order {
            TradeOrder::Deltas(d) => d,
            TradeOrder::Targets(t) => self.deltas_for_targets(&t)?,
        };
        self.spec.check_deltas(&deltas)?;

        let held = match self.holdings.get(&trader) {
            Some(h) => h.clone(),
            None => self.spec.zero_deltas(),
        };
        let new_holdings = held
            .iter()
            .zip(&deltas)
            .map(|(h, d)| h.checked_add(d))
            .collect::<Result<Vec<_>>>()?;
        if !self.spec.allow_short {
            for (action, h) in new_holdings.iter().enumerate() {
                if let Some((outcome, &holding)) = h
                    .as_slice()
                    .iter()
                    .enumerate()
                    .find(|(_, &x)| x < -SHORT_TOLERANCE)
                {
                    return Err(Error::ShortPosition {
                        trader: trader.0.clone(),
                        action,
                        outcome,
                        holding,
                    });
                }
            }
        }

        let costs = self.costs_of(&deltas)?;
        let new_quantities = self
            .quantities
            .iter()
            .zip(&deltas)
            .map(|(q, d)| q.checked_add(d))
            .collect::<Result<Vec<_>>>()?;
        let prices_before = self.prices()?;
        let prices_after = self
            .spec
            .markets
            .iter()
            .zip(&new_quantities)
            .map(|(m, q)| m.cost.prices(q))
            .collect::<Result<Vec<_>>>()?;

        let record = TradeRecord {
            index: self.log.len(),
            trader: trader.clone(),
            cash_paid: costs.iter().sum(),
            deltas,
            costs,
            prices_before,
            prices_after,
        };
        self.quantities = new_quantities;
        self.holdings.insert(trader, new_holdings);
        self.log.push(record.clone());
        Ok(record)
    }

    /// Realizes `rule` on the current prices and records `phi` for settlement.
    pub fn realize_rule(&mut self, rule: &DecisionRule) -> Result<&[f64]> {
        let phi = rule.realize(&self.prices()?)?;
        self.phi = Some(phi);
        self.selected = None;
        Ok(self.phi.as_deref().expect("just set"))
    }

    /// Realizes `rule` and samples the selected action by inverse CDF.
    pub fn decide<R: Rng + ?Sized>(&mut self, rule: &DecisionRule, rng: &mut R) -> Result<usize> {
        let phi = self.realize_rule(rule)?.to_vec();
        let j = inverse_cdf(rng, &phi);
        self.selected = Some(j);
        Ok(j)
    }

    pub fn decide_with_seed(&mut self, rule: &DecisionRule, seed: u64) -> Result<usize> {
        self.decide(rule, &mut rng_from_seed(seed))
    }

    pub fn phi(&self) -> Option<&[f64]> {
        self.phi.as_deref()
    }

    pub fn selected_action(&self) -> Option<usize> {
        self.selected
    }

    fn check_settle(&self, action: usize, outcome: usize) -> Result<&[f64]> {
        let phi = self.phi.as_deref().ok_or(Error::NoDecision)?;
        let n = self.spec.market(action)?.outcome_count();
        if outcome >= n {
            return Err(Error::IndexOutOfRange {
                index: outcome,
                len: n,
            });
        }
        Ok(phi)
    }

    /// Securities settlement with `v_j = 1 / phi_j`.
    pub fn settle_securities(&self, action: usize, outcome: usize) -> Result<Payoffs> {
        let phi = self.check_settle(action, outcome)?;
        let policy = SettlementPolicy::scaled(phi)?;
        self.settle_securities_with(&policy, action, outcome)
    }

    /// Securities settlement under an explicit payout policy. Each trader
    /// receives `v_j` per held security `(j, i)`; every other security pays 0.
    pub fn settle_securities_with(
        &self,
        policy: &SettlementPolicy,
        action: usize,
        outcome: usize,
    ) -> Result<Payoffs> {
        self.check_settle(action, outcome)?;
        let v = *policy.payout.get(action).ok_or(Error::ShapeMismatch {
            expected: self.spec.action_count(),
            found: policy.payout.len(),
        })?;
        let mut paid: BTreeMap<TraderId, f64> = BTreeMap::new();
        for t in &self.log {
            *paid.entry(t.trader.clone()).or_default() += t.cash_paid;
        }
        let mut out = Payoffs::default();
        let mut revenue = 0.0;
        let mut payouts = 0.0;
        for (trader, h) in &self.holdings {
            let payout = v * h[action].as_slice()[outcome];
            let cash = paid.get(trader).copied().unwrap_or(0.0);
            revenue += cash;
            payouts += payout;
            out.traders.insert(trader.clone(), payout - cash);
        }
        out.creator = revenue - payouts;
        Ok(out)
    }

    /// Scoring-rule settlement: each trade's report transition in market
    /// `action` is scored with the cost function's matching log rule and
    /// scaled by `1 / phi_j`. Transitions in other markets are void.
    pub fn settle_scoring(&self, action: usize, outcome: usize) -> Result<Payoffs> {
        let phi = self.check_settle(action, outcome)?;
        let rule = self.spec.market(action)?.cost.matching_scoring_rule();
        let mut out = Payoffs::default();
        for trader in self.holdings.keys() {
            out.traders.insert(trader.clone(), 0.0);
        }
        for t in &self.log {
            if t.deltas[action].is_zero() {
                continue;
            }
            let gain = rule.score(&t.prices_after[action], outcome)?
                - rule.score(&t.prices_before[action], outcome)?;
            *out.traders.entry(t.trader.clone()).or_default() += gain / phi[action];
        }
        out.creator = -out.traders.values().sum::<f64>();
        Ok(out)
    }

    pub fn settle(&self, action: usize, outcome: usize) -> Result<SettlementOutcome> {
        let phi = self.check_settle(action, outcome)?.to_vec();
        Ok(SettlementOutcome {
            selected_action: action,
            observed_outcome: outcome,
            phi,
            securities: self.settle_securities(action, outcome)?,
            scoring: self.settle_scoring(action, outcome)?,
        })
    }

    /// Settles the action chosen by the last [`Self::decide`].
    pub fn settle_selected(&self, outcome: usize) -> Result<SettlementOutcome> {
        let j = self.selected.ok_or(Error::NoDecision)?;
        self.settle(j, outcome)
    }

    /// Writes the trade log as CSV, one row per (trade, action). Vector
    /// columns are `;`-joined with shortest round-trip float formatting.
    pub fn write_trade_log<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record([
            "trade_index",
            "trader_id",
            "action",
            "delta",
            "cost",
            "cash_paid",
            "prices",
        ])?;
        for t in &self.log {
            for (action, d) in t.deltas.iter().enumerate() {
                wtr.write_record([
                    t.index.to_string(),
                    t.trader.to_string(),
                    action.to_string(),
                    join(d.as_slice()),
                    t.costs[action].to_string(),
                    t.cash_paid.to_string(),
                    join(t.prices_after[action].probs()),
                ])?;
            }
        }
        wtr.flush()?;
        Ok(())
    }

    /// Re-executes trades read by [`read_trade_log`] on a fresh market.
    pub fn replay(spec: MarketSpec, trades: Vec<(TraderId, Vec<Quantities>)>) -> Result<Self> {
        let mut state = MarketState::open(spec);
        for (trader, deltas) in trades {
            state.execute_trade(trader, TradeOrder::Deltas(deltas))?;
        }
        Ok(state)
    }
}

pub(crate) fn join(xs: &[f64]) -> String {
    xs.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(";")
}

type PendingTrade = (usize, TraderId, Vec<(usize, Quantities)>);

/// Parses a trade log written by [`MarketState::write_trade_log`] back into
/// per-trade deltas.
pub fn read_trade_log<R: Read>(r: R) -> Result<Vec<(TraderId, Vec<Quantities>)>> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut trades: Vec<PendingTrade> = Vec::new();
    for (line, rec) in rdr.records().enumerate() {
        let rec = rec?;
        let field = |k: usize| {
            rec.get(k)
                .ok_or_else(|| Error::TradeLog(format!("row {}: missing column {k}", line + 2)))
        };
        let parse_usize = |k: usize| -> Result<usize> {
            field(k)?
                .parse()
                .map_err(|e| Error::TradeLog(format!("row {}: {e}", line + 2)))
        };
        let index = parse_usize(0)?;
        let trader = TraderId::new(field(1)?);
        let action = parse_usize(2)?;
        let delta = field(3)?
            .split(';')
            .map(|x| {
                x.parse::<f64>()
                    .map_err(|e| Error::TradeLog(format!("row {}: {e}", line + 2)))
            })
            .collect::<Result<Vec<_>>>()?;
        let delta = Quantities::new(delta)?;
        match trades.last_mut() {
            Some((i, t, d)) if *i == index => {
                if *t != trader {
                    return Err(Error::TradeLog(format!(
                        "row {}: trade {index} has conflicting trader ids",
                        line + 2
                    )));
                }
                d.push((action, delta));
            }
            _ => trades.push((index, trader, vec![(action, delta)])),
        }
    }
    trades
        .into_iter()
        .map(|(index, trader, mut d)| {
            d.sort_by_key(|(a, _)| *a);
            if d.iter().enumerate().any(|(k, (a, _))| k != *a) {
                return Err(Error::TradeLog(format!(
                    "trade {index} does not list every action exactly once"
                )));
            }
            Ok((trader, d.into_iter().map(|(_, q)| q).collect()))
        })
        .collect()
}

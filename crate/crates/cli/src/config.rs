//! Versioned TOML scenario schema.
//!
//! ```toml
//! version = 1
//!
//! [market]
//! outcomes = [2, 2]          # one entry per action
//! liquidity = 1.0
//! allow_short = false
//! # priors = [[0.5, 0.5], [0.5, 0.5]]
//! # initial = [[0.0, 0.0], [0.0, 0.0]]
//!
//! [[trades]]
//! trader = "alice"
//! deltas = [[3.0, 1.0], [1.0, 2.0]]
//! transform = "standardize"  # none | standardize | scoring_equivalent | liability_free
//!
//! [[trades]]
//! trader = "bob"
//! targets = [[0.6, 0.4], []] # empty list leaves that market untouched
//!
//! [decision]
//! kind = "fixed"             # or "softmax_of_price" with target_outcomes, temperature
//! phi = [0.5, 0.5]
//! floor = 0.01
//!
//! [settlement]
//! seed = 42
//! draws = 1000
//! # world = [[0.88, 0.12], [0.27, 0.73]]   defaults to the final prices
//!
//! [verification]
//! reproduce_example = true
//! expectations = true
//! ```

use std::path::PathBuf;

use decimarket::engine::DEFAULT_FLOOR;
use decimarket::strategies::Allocation;
use decimarket::{
    ConditionalMarketSpec, CostFunctionSpec, DecisionRule, MarketSpec, Quantities, Report,
};
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub version: u32,
    pub market: MarketConfig,
    #[serde(default)]
    pub trades: Vec<TradeConfig>,
    /// Trade log CSV to replay instead of `trades`, relative to the config
    /// file.
    pub replay_log: Option<PathBuf>,
    pub decision: DecisionConfig,
    #[serde(default)]
    pub settlement: SettlementConfig,
    #[serde(default)]
    pub verification: VerificationConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketConfig {
    pub actions: Option<usize>,
    pub outcomes: Vec<usize>,
    pub liquidity: f64,
    pub priors: Option<Vec<Vec<f64>>>,
    pub initial: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub allow_short: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    #[default]
    None,
    Standardize,
    ScoringEquivalent,
    LiabilityFree,
}

impl From<Transform> for Allocation {
    fn from(t: Transform) -> Self {
        match t {
            Transform::None => Allocation::AsGiven,
            Transform::Standardize => Allocation::Standardized,
            Transform::ScoringEquivalent => Allocation::ScoringEquivalent,
            Transform::LiabilityFree => Allocation::LiabilityFree,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TradeConfig {
    pub trader: String,
    pub deltas: Option<Vec<Vec<f64>>>,
    pub targets: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub transform: Transform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DecisionConfig {
    Fixed {
        phi: Vec<f64>,
        #[serde(default = "default_floor")]
        floor: f64,
    },
    SoftmaxOfPrice {
        target_outcomes: Vec<usize>,
        temperature: f64,
        #[serde(default = "default_floor")]
        floor: f64,
    },
}

fn default_floor() -> f64 {
    DEFAULT_FLOOR
}

impl From<&DecisionConfig> for DecisionRule {
    fn from(d: &DecisionConfig) -> Self {
        match d {
            DecisionConfig::Fixed { phi, floor } => {
                DecisionRule::fixed(phi.clone()).with_floor(*floor)
            }
            DecisionConfig::SoftmaxOfPrice {
                target_outcomes,
                temperature,
                floor,
            } => DecisionRule::softmax_of_price(target_outcomes.clone(), *temperature)
                .with_floor(*floor),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SettlementConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_draws")]
    pub draws: usize,
    pub world: Option<Vec<Vec<f64>>>,
}

fn default_draws() -> usize {
    1000
}

impl Default for SettlementConfig {
    fn default() -> Self {
        SettlementConfig {
            seed: 0,
            draws: default_draws(),
            world: None,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerificationConfig {
    /// Emit the reference-example tables and worst-case curve.
    #[serde(default)]
    pub reproduce_example: bool,
    /// Emit exact expected payoffs of each trade under `settlement.world`.
    #[serde(default)]
    pub expectations: bool,
}

/// Parses TOML text and checks the parts of the schema that serde cannot
/// express. Errors carry the line and field where possible.
pub fn parse(text: &str) -> Result<ScenarioConfig, String> {
    let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| e.to_string())?;
    if cfg.version != SCHEMA_VERSION {
        return Err(format!(
            "unsupported schema version {} (expected {SCHEMA_VERSION}) in field `version`",
            cfg.version
        ));
    }
    let m = cfg.market.outcomes.len();
    if let Some(a) = cfg.market.actions {
        if a != m {
            return Err(format!(
                "field `market.actions` is {a} but `market.outcomes` lists {m} actions"
            ));
        }
    }
    for (k, t) in cfg.trades.iter().enumerate() {
        if t.deltas.is_some() == t.targets.is_some() {
            return Err(format!(
                "trades[{k}] (trader `{}`): give exactly one of `deltas` or `targets`",
                t.trader
            ));
        }
    }
    if cfg.replay_log.is_some() && !cfg.trades.is_empty() {
        return Err("`replay_log` and `trades` are mutually exclusive".into());
    }
    Ok(cfg)
}

impl MarketConfig {
    pub fn to_spec(&self) -> decimarket::Result<MarketSpec> {
        let m = self.outcomes.len();
        let priors = match &self.priors {
            Some(p) => check_len(p.clone(), m)?,
            None => self
                .outcomes
                .iter()
                .map(|&n| vec![1.0 / n as f64; n])
                .collect(),
        };
        let initial = match &self.initial {
            Some(q) => check_len(q.clone(), m)?,
            None => self.outcomes.iter().map(|&n| vec![0.0; n]).collect(),
        };
        let markets = self
            .outcomes
            .iter()
            .zip(priors)
            .zip(initial)
            .map(|((&n, prior), init)| {
                if prior.len() != n || init.len() != n {
                    return Err(decimarket::Error::ShapeMismatch {
                        expected: n,
                        found: if prior.len() != n {
                            prior.len()
                        } else {
                            init.len()
                        },
                    });
                }
                ConditionalMarketSpec::new(
                    CostFunctionSpec::new(self.liquidity, Report::new(prior)?)?,
                    Quantities::new(init)?,
                )
            })
            .collect::<decimarket::Result<Vec<_>>>()?;
        MarketSpec::new(markets, self.allow_short)
    }
}

fn check_len<T>(v: Vec<T>, m: usize) -> decimarket::Result<Vec<T>> {
    if v.len() != m {
        return Err(decimarket::Error::ShapeMismatch {
            expected: m,
            found: v.len(),
        });
    }
    Ok(v)
}

/// Each non-empty inner list becomes a target report; empty lists mean no
/// change in that market.
pub fn to_targets(rows: &[Vec<f64>]) -> decimarket::Result<Vec<Option<Report>>> {
    rows.iter()
        .map(|r| {
            if r.is_empty() {
                Ok(None)
            } else {
                Report::new(r.clone()).map(Some)
            }
        })
        .collect()
}

pub fn to_quantities(rows: &[Vec<f64>]) -> decimarket::Result<Vec<Quantities>> {
    rows.iter().map(|r| Quantities::new(r.clone())).collect()
}

pub fn to_reports(rows: &[Vec<f64>]) -> decimarket::Result<Vec<Report>> {
    rows.iter().map(|r| Report::new(r.clone())).collect()
}

//! Securities-based decision markets.
//!
//! A decision market runs one conditional prediction market per candidate
//! action, selects an action with a full-support stochastic decision rule
//! `phi`, and pays `1 / phi_j` per winning security of the selected action.
//! This crate provides:
//!
//! - [`scoring`]: logarithmic and quadratic proper scoring rules.
//! - [`costfn`]: the prior-weighted LMSR cost function, prices and the
//!   inverse map from target prices to standardized trades.
//! - [`engine`]: conditional markets, trade execution, decision sampling and
//!   settlement under both the securities and the scoring-rule mechanism.
//! - [`strategies`]: bundle transforms that reallocate liabilities, and
//!   worst-case loss accounting.
//! - [`verify`]: exact expectation oracle, Monte Carlo estimator, randomized
//!   instance checks and reproduction of the two-action reference scenario.
//!
//! Indices for actions and outcomes are zero-based throughout.

pub mod costfn;
pub mod engine;
pub mod error;
pub mod sample;
pub mod scoring;
pub mod strategies;
pub mod verify;

pub use costfn::{CostFunctionSpec, Quantities};
pub use engine::{
    ConditionalMarketSpec, DecisionRule, MarketSpec, MarketState, Payoffs, SettlementOutcome,
    SettlementPolicy, TradeOrder, TradeRecord, TraderId,
};
pub use error::{Error, Result};
pub use scoring::{Belief, Report, ScoringRule, ScoringRuleKind};
pub use strategies::{BundleSpec, CreatorBound, InsurerMode, WorstCaseReport};
pub use verify::Mechanism;

/// Absolute tolerance for probability vectors to sum to one.
pub const PROB_TOLERANCE: f64 = 1e-9;

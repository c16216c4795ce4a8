//! Expected-payoff oracles, Monte Carlo estimation, randomized instance
//! checks, and reproduction of the two-action reference scenario.
//!
//! The securities side of every check is computed by executing the trade
//! and settling it through [`MarketState`]; the scoring side in closed form
//! from score gains. Neither route calls the other.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::costfn::{CostFunctionSpec, Quantities};
use crate::engine::{
    join, ConditionalMarketSpec, DecisionRule, MarketSpec, MarketState, SettlementOutcome,
    SettlementPolicy, TradeOrder, TraderId,
};
use crate::error::{Error, Result};
use crate::sample::{derive_seed, dirichlet_uniform, inverse_cdf, rng_from_seed, SimRng};
use crate::scoring::{Belief, Report};
use crate::strategies::{
    liability_free_transform, scoring_equivalent_transform, standardize, worst_case_losses,
    WorstCaseReport,
};

/// Trader id used when a hypothetical trade is executed on a copy of a market.
pub const PROBE_TRADER: &str = "__probe__";

/// Absolute tolerance of the randomized oracle checks.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mechanism {
    Securities,
    Scoring,
}

fn check_beliefs(spec: &MarketSpec, beliefs: &[Belief]) -> Result<()> {
    if beliefs.len() != spec.action_count() {
        return Err(Error::ShapeMismatch {
            expected: spec.action_count(),
            found: beliefs.len(),
        });
    }
    for (n, p) in spec.outcome_counts().into_iter().zip(beliefs) {
        if p.len() != n {
            return Err(Error::ShapeMismatch {
                expected: n,
                found: p.len(),
            });
        }
    }
    Ok(())
}

/// Copy of `market` with `deltas` executed by [`PROBE_TRADER`] and `rule`
/// realized on the resulting prices.
pub fn probe_market(
    market: &MarketState,
    deltas: &[Quantities],
    rule: &DecisionRule,
) -> Result<MarketState> {
    let mut probe = market.clone();
    probe.execute_trade(PROBE_TRADER, TradeOrder::Deltas(deltas.to_vec()))?;
    probe.realize_rule(rule)?;
    Ok(probe)
}

/// Realised payoff of the probe trader for every `(j, i)`.
fn payoff_table(
    probe: &MarketState,
    mechanism: Mechanism,
    policy: Option<&SettlementPolicy>,
) -> Result<Vec<Vec<f64>>> {
    let id = TraderId::from(PROBE_TRADER);
    probe
        .spec()
        .outcome_counts()
        .into_iter()
        .enumerate()
        .map(|(j, n)| {
            (0..n)
                .map(|i| {
                    let p = match (mechanism, policy) {
                        (Mechanism::Securities, Some(v)) => {
                            probe.settle_securities_with(v, j, i)?
                        }
                        (Mechanism::Securities, None) => probe.settle_securities(j, i)?,
                        (Mechanism::Scoring, _) => probe.settle_scoring(j, i)?,
                    };
                    Ok(p.trader(&id))
                })
                .collect()
        })
        .collect()
}

/// Exact expectation `sum_j phi_j sum_i p_i^j payoff(j, i)` of a trader making
/// `deltas` from the current state, enumerating every `(j, i)` settlement.
pub fn exact_expected_payoff(
    market: &MarketState,
    deltas: &[Quantities],
    beliefs: &[Belief],
    rule: &DecisionRule,
    mechanism: Mechanism,
) -> Result<f64> {
    check_beliefs(market.spec(), beliefs)?;
    let probe = probe_market(market, deltas, rule)?;
    let table = payoff_table(&probe, mechanism, None)?;
    Ok(expectation(probe.phi().expect("realized"), beliefs, &table))
}

/// Securities expectation under an arbitrary payout policy.
pub fn exact_expected_payoff_with_policy(
    market: &MarketState,
    deltas: &[Quantities],
    beliefs: &[Belief],
    rule: &DecisionRule,
    policy: &SettlementPolicy,
) -> Result<f64> {
    check_beliefs(market.spec(), beliefs)?;
    let probe = probe_market(market, deltas, rule)?;
    let table = payoff_table(&probe, Mechanism::Securities, Some(policy))?;
    Ok(expectation(probe.phi().expect("realized"), beliefs, &table))
}

fn expectation(phi: &[f64], beliefs: &[Belief], table: &[Vec<f64>]) -> f64 {
    phi.iter()
        .zip(beliefs)
        .zip(table)
        .map(|((f, p), row)| f * p.probs().iter().zip(row).map(|(a, b)| a * b).sum::<f64>())
        .sum()
}

/// Closed-form scoring expectation `sum_j sum_i p_i^j (s_i^j(r*) - s_i^j(r))`,
/// which does not depend on the decision rule.
pub fn scoring_expected_gain(
    market: &MarketState,
    deltas: &[Quantities],
    beliefs: &[Belief],
) -> Result<f64> {
    check_beliefs(market.spec(), beliefs)?;
    let gains = crate::strategies::score_gains(market, deltas)?;
    Ok(gains
        .iter()
        .zip(beliefs)
        .map(|(g, p)| g.iter().zip(p.probs()).map(|(a, b)| a * b).sum::<f64>())
        .sum())
}

/// Residual of the securities expectation over the scoring expectation for
/// payouts `v`: `sum_j (phi_j v_j - 1) sum_i p_i^j delta_i^j`.
pub fn payout_residual(
    deltas: &[Quantities],
    beliefs: &[Belief],
    phi: &[f64],
    payout: &[f64],
) -> f64 {
    deltas
        .iter()
        .zip(beliefs)
        .enumerate()
        .map(|(j, (d, p))| {
            (phi[j] * payout[j] - 1.0)
                * d.as_slice()
                    .iter()
                    .zip(p.probs())
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
        })
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub replications: usize,
}

/// Samples `j ~ phi`, `i ~ p^j` and averages the realised payoff of a trader
/// making `deltas`. Deterministic for a fixed seed.
pub fn monte_carlo_payoff(
    market: &MarketState,
    deltas: &[Quantities],
    beliefs: &[Belief],
    rule: &DecisionRule,
    mechanism: Mechanism,
    replications: usize,
    seed: u64,
) -> Result<McEstimate> {
    if replications == 0 {
        return Err(Error::InvalidSpec("replications must be at least 1".into()));
    }
    check_beliefs(market.spec(), beliefs)?;
    let probe = probe_market(market, deltas, rule)?;
    let table = payoff_table(&probe, mechanism, None)?;
    let phi = probe.phi().expect("realized");
    let mut rng = rng_from_seed(seed);
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..replications {
        let j = inverse_cdf(&mut rng, phi);
        let i = inverse_cdf(&mut rng, beliefs[j].probs());
        let x = table[j][i];
        sum += x;
        sum_sq += x * x;
    }
    let n = replications as f64;
    let mean = sum / n;
    let var = if replications > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(McEstimate {
        mean,
        stderr: (var / n).sqrt(),
        replications,
    })
}

/// Repeated decide-and-settle draws on one frozen market. The selected
/// action comes from `rule`, the observed outcome from `world[j]`, both from
/// a single seeded stream.
pub fn simulate_settlements(
    market: &MarketState,
    rule: &DecisionRule,
    world: &[Report],
    draws: usize,
    seed: u64,
) -> Result<Vec<SettlementOutcome>> {
    check_beliefs(market.spec(), world)?;
    let mut state = market.clone();
    let mut rng: SimRng = rng_from_seed(seed);
    (0..draws)
        .map(|_| {
            let j = state.decide(rule, &mut rng)?;
            let i = inverse_cdf(&mut rng, world[j].probs());
            state.settle(j, i)
        })
        .collect()
}

/// One row per (draw, party): `draw,selected_action,observed_outcome,party,securities_payoff,scoring_payoff`.
/// The creator appears as party `creator`.
pub fn write_settlements_csv<W: Write>(outcomes: &[SettlementOutcome], w: W) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "draw",
        "selected_action",
        "observed_outcome",
        "party",
        "securities_payoff",
        "scoring_payoff",
    ])?;
    for (d, o) in outcomes.iter().enumerate() {
        let head = [
            d.to_string(),
            o.selected_action.to_string(),
            o.observed_outcome.to_string(),
        ];
        for (trader, sec) in &o.securities.traders {
            let sc = o.scoring.trader(trader);
            wtr.write_record(head.iter().cloned().chain([
                trader.to_string(),
                sec.to_string(),
                sc.to_string(),
            ]))?;
        }
        wtr.write_record(head.iter().cloned().chain([
            "creator".to_string(),
            o.securities.creator.to_string(),
            o.scoring.creator.to_string(),
        ]))?;
    }
    wtr.flush()?;
    Ok(())
}

/// A randomized market, decision rule, belief profile and trade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub seed: u64,
    pub spec: MarketSpec,
    pub phi: Vec<f64>,
    pub beliefs: Vec<Report>,
    pub deltas: Vec<Quantities>,
}

/// Instance parameters: 2..=4 actions with 2..=5 outcomes, liquidity in
/// [0.5, 3], Dirichlet priors and beliefs, initial inventory in [-2, 2],
/// phi with floor 0.01, trade entries in [-3, 3] when shorting is allowed
/// and [0, 3] otherwise.
pub fn random_instance(seed: u64) -> Result<Instance> {
    const FLOOR: f64 = 0.01;
    let mut rng = rng_from_seed(seed);
    let m: usize = rng.random_range(2..=4);
    let allow_short: bool = rng.random();
    let mut markets = Vec::with_capacity(m);
    let mut beliefs = Vec::with_capacity(m);
    let mut deltas = Vec::with_capacity(m);
    for _ in 0..m {
        let n: usize = rng.random_range(2..=5);
        let b: f64 = rng.random_range(0.5..=3.0);
        let prior = dirichlet_uniform(&mut rng, n)
            .into_iter()
            .map(|p| 0.02 / n as f64 + 0.98 * p)
            .collect();
        let initial = (0..n).map(|_| rng.random_range(-2.0..=2.0)).collect();
        markets.push(ConditionalMarketSpec::new(
            CostFunctionSpec::new(b, Report::new(prior)?)?,
            Quantities::new(initial)?,
        )?);
        beliefs.push(Report::new(dirichlet_uniform(&mut rng, n))?);
        let lo = if allow_short { -3.0 } else { 0.0 };
        deltas.push(Quantities::new(
            (0..n).map(|_| rng.random_range(lo..=3.0)).collect(),
        )?);
    }
    let spread = 1.0 - m as f64 * FLOOR;
    let phi = dirichlet_uniform(&mut rng, m)
        .into_iter()
        .map(|p| FLOOR + spread * p)
        .collect();
    Ok(Instance {
        seed,
        spec: MarketSpec::new(markets, allow_short)?,
        phi,
        beliefs,
        deltas,
    })
}

/// Payout scaling used when checking an instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PayoutMode {
    /// `v_j = 1 / phi_j`.
    Scaled,
    /// `v_j = 1`; the securities expectation then differs from the scoring
    /// expectation by [`payout_residual`].
    Unit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceCheck {
    /// Scoring expectation (closed form).
    pub g: f64,
    /// Securities expectation (enumerated settlement).
    pub g_hat: f64,
    /// Predicted `g_hat - g` from the payout residual formula.
    pub term_a: f64,
    /// Largest error of the per-(j, i) realised-payoff decomposition.
    pub decomposition_error: f64,
    /// Expectation of the lottery term over (phi, p).
    pub lottery_mean: f64,
    /// Largest |sum of all parties' payoffs| over every settlement.
    pub conservation_error: f64,
    pub violations: Vec<String>,
}

impl InstanceCheck {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Runs the expectation-equivalence oracle and the settlement property
/// checks on one instance.
pub fn check_instance(inst: &Instance, mode: PayoutMode) -> Result<InstanceCheck> {
    let market = MarketState::open(inst.spec.clone());
    let rule = DecisionRule::fixed(inst.phi.clone()).with_floor(0.01);
    let probe = probe_market(&market, &inst.deltas, &rule)?;
    let phi = probe.phi().expect("realized").to_vec();
    let policy = match mode {
        PayoutMode::Scaled => SettlementPolicy::scaled(&phi)?,
        PayoutMode::Unit => SettlementPolicy::unit(phi.len()),
    };

    let g = scoring_expected_gain(&market, &inst.deltas, &inst.beliefs)?;
    let g_hat =
        exact_expected_payoff_with_policy(&market, &inst.deltas, &inst.beliefs, &rule, &policy)?;
    let term_a = payout_residual(&inst.deltas, &inst.beliefs, &phi, policy.payout());

    let costs = market.costs_of(&inst.deltas)?;
    let total_cost: f64 = costs.iter().sum();
    let id = TraderId::from(PROBE_TRADER);
    let mut decomposition_error: f64 = 0.0;
    let mut conservation_error: f64 = 0.0;
    let mut lottery_mean = 0.0;
    for (j, n) in inst.spec.outcome_counts().into_iter().enumerate() {
        let lottery = costs[j] / phi[j] - total_cost;
        for i in 0..n {
            let sec = probe.settle_securities(j, i)?;
            let sco = probe.settle_scoring(j, i)?;
            let diff = sec.trader(&id) - sco.trader(&id);
            decomposition_error = decomposition_error.max((diff - lottery).abs());
            conservation_error = conservation_error
                .max(sec.total().abs())
                .max(sco.total().abs())
                .max(probe.settle_securities_with(&policy, j, i)?.total().abs());
            lottery_mean += phi[j] * inst.beliefs[j].probs()[i] * lottery;
        }
    }

    let mut violations = Vec::new();
    let residual = g_hat - g;
    if residual.abs() >= ORACLE_TOLERANCE {
        violations.push(format!(
            "expected payoff mismatch: securities {g_hat} vs scoring {g} (residual {residual}, term a {term_a})"
        ));
    }
    if (residual - term_a).abs() >= ORACLE_TOLERANCE {
        violations.push(format!(
            "payout residual mismatch: {residual} vs predicted {term_a}"
        ));
    }
    if decomposition_error >= ORACLE_TOLERANCE {
        violations.push(format!("payoff decomposition error {decomposition_error}"));
    }
    if lottery_mean.abs() >= ORACLE_TOLERANCE {
        violations.push(format!("lottery term has mean {lottery_mean}"));
    }
    if conservation_error >= ORACLE_TOLERANCE {
        violations.push(format!("conservation error {conservation_error}"));
    }
    Ok(InstanceCheck {
        g,
        g_hat,
        term_a,
        decomposition_error,
        lottery_mean,
        conservation_error,
        violations,
    })
}

#[derive(Debug, Clone)]
pub struct SuiteReport {
    pub checked: usize,
    pub failures: Vec<(Instance, InstanceCheck)>,
}

/// Checks `instances` random instances with seeds derived from `seed`.
pub fn verify_suite(seed: u64, instances: usize, mode: PayoutMode) -> Result<SuiteReport> {
    let mut failures = Vec::new();
    for k in 0..instances {
        let inst = random_instance(derive_seed(seed, k as u64))?;
        let check = check_instance(&inst, mode)?;
        if !check.passed() {
            failures.push((inst, check));
        }
    }
    Ok(SuiteReport {
        checked: instances,
        failures,
    })
}

/// The two-action, two-outcome reference scenario: unit-liquidity uniform
/// LMSR markets starting at zero inventory.
pub fn example_market(allow_short: bool) -> MarketState {
    MarketState::open(MarketSpec::uniform(&[2, 2], 1.0, allow_short).expect("valid spec"))
}

/// The reference trade: two of outcome 0 under action 0, one of outcome 1
/// under action 1.
pub fn example_trade() -> Vec<Quantities> {
    vec![
        Quantities::new(vec![2.0, 0.0]).expect("finite"),
        Quantities::new(vec![0.0, 1.0]).expect("finite"),
    ]
}

/// Trade reaching the same prices as [`example_trade`] with an extra bundle.
pub fn example_arbitrary_trade() -> Vec<Quantities> {
    vec![
        Quantities::new(vec![3.0, 1.0]).expect("finite"),
        Quantities::new(vec![1.0, 2.0]).expect("finite"),
    ]
}

/// Default decision-rule grid `phi_1 = 0.01, 0.02, ..., 0.99`.
pub fn default_phi_grid() -> Vec<f64> {
    (1..=99).map(|k| k as f64 / 100.0).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FigureRow {
    pub phi: Vec<f64>,
    pub report: WorstCaseReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reproduction {
    pub quantities: Vec<Quantities>,
    pub prices: Vec<Report>,
    pub arbitrary: Vec<Quantities>,
    pub standardized: Vec<Quantities>,
    pub scoring_equivalent: Vec<Quantities>,
    pub liability_free: Vec<Quantities>,
    pub figure: Vec<FigureRow>,
}

/// Recomputes every artefact of the reference scenario over `phi_grid`
/// (probability of action 0; action 1 gets the rest).
pub fn reproduce_example_with_grid(phi_grid: &[f64]) -> Result<Reproduction> {
    let mut traded = example_market(false);
    traded.execute_trade("trader", TradeOrder::Deltas(example_trade()))?;
    let shortable = example_market(true);
    let arbitrary = example_arbitrary_trade();
    let standardized = standardize(&arbitrary);
    let figure_market = example_market(false);
    let figure = phi_grid
        .iter()
        .map(|&p| {
            let phi = vec![p, 1.0 - p];
            Ok(FigureRow {
                report: worst_case_losses(&figure_market, &example_trade(), &phi)?,
                phi,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Reproduction {
        quantities: traded.quantities().to_vec(),
        prices: traded.prices()?,
        scoring_equivalent: scoring_equivalent_transform(&shortable, &standardized)?,
        liability_free: liability_free_transform(&shortable, &standardized)?,
        arbitrary,
        standardized,
        figure,
    })
}

pub fn reproduce_example() -> Result<Reproduction> {
    reproduce_example_with_grid(&default_phi_grid())
}

impl Reproduction {
    /// Writes `table3.csv` through `table6.csv` and `figure1.csv` into `dir`.
    ///
    /// - `table3.csv`: `action,outcome,quantity,price`
    /// - `table4.csv`: `action,outcome,arbitrary_delta,standardized_delta`
    /// - `table5.csv`: `action,outcome,standardized_delta,scoring_equivalent_delta`
    /// - `table6.csv`: `action,outcome,standardized_delta,liability_free_delta`
    /// - `figure1.csv`: `phi,` followed by the [`WorstCaseReport`] columns
    pub fn write_csvs(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir)?;
        let prices: Vec<Quantities> = self
            .prices
            .iter()
            .map(|r| Quantities::new(r.probs().to_vec()))
            .collect::<Result<_>>()?;
        write_paired(
            &dir.join("table3.csv"),
            ["quantity", "price"],
            &self.quantities,
            &prices,
        )?;
        write_paired(
            &dir.join("table4.csv"),
            ["arbitrary_delta", "standardized_delta"],
            &self.arbitrary,
            &self.standardized,
        )?;
        write_paired(
            &dir.join("table5.csv"),
            ["standardized_delta", "scoring_equivalent_delta"],
            &self.standardized,
            &self.scoring_equivalent,
        )?;
        write_paired(
            &dir.join("table6.csv"),
            ["standardized_delta", "liability_free_delta"],
            &self.standardized,
            &self.liability_free,
        )?;
        let mut wtr = csv::Writer::from_writer(File::create(dir.join("figure1.csv"))?);
        wtr.write_record(std::iter::once("phi").chain(WorstCaseReport::CSV_HEADER))?;
        for row in &self.figure {
            wtr.write_record(std::iter::once(join(&row.phi)).chain(row.report.csv_fields()))?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn write_paired(
    path: &Path,
    names: [&str; 2],
    left: &[Quantities],
    right: &[Quantities],
) -> Result<()> {
    let mut wtr = csv::Writer::from_writer(File::create(path)?);
    wtr.write_record(["action", "outcome", names[0], names[1]])?;
    for (j, (l, r)) in left.iter().zip(right).enumerate() {
        for (i, (a, b)) in l.as_slice().iter().zip(r.as_slice()).enumerate() {
            wtr.write_record([j.to_string(), i.to_string(), a.to_string(), b.to_string()])?;
        }
    }
    wtr.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference_beliefs() -> Vec<Report> {
        let m = {
            let mut m = example_market(false);
            m.execute_trade("x", TradeOrder::Deltas(example_trade()))
                .unwrap();
            m
        };
        m.prices().unwrap()
    }

    #[test]
    fn oracle_agrees_on_example() {
        let market = example_market(false);
        let beliefs = reference_beliefs();
        let g = scoring_expected_gain(&market, &example_trade(), &beliefs).unwrap();
        assert!((g - 0.438_757_397_144_465_06).abs() < 1e-12);
        for p in [0.1, 0.5, 0.77] {
            let rule = DecisionRule::fixed(vec![p, 1.0 - p]);
            let sec = exact_expected_payoff(
                &market,
                &example_trade(),
                &beliefs,
                &rule,
                Mechanism::Securities,
            )
            .unwrap();
            let sco = exact_expected_payoff(
                &market,
                &example_trade(),
                &beliefs,
                &rule,
                Mechanism::Scoring,
            )
            .unwrap();
            assert!((sec - g).abs() < 1e-12);
            assert!((sco - g).abs() < 1e-12);
        }
    }

    #[test]
    fn zero_trade_has_zero_expectation() {
        let market = example_market(false);
        let rule = DecisionRule::fixed(vec![0.5, 0.5]);
        let zero = market.spec().zero_deltas();
        for mech in [Mechanism::Securities, Mechanism::Scoring] {
            assert_eq!(
                exact_expected_payoff(&market, &zero, &reference_beliefs(), &rule, mech).unwrap(),
                0.0
            );
        }
    }

    #[test]
    fn unit_payout_residual_is_term_a() {
        let market = example_market(false);
        let beliefs = reference_beliefs();
        let rule = DecisionRule::fixed(vec![0.5, 0.5]);
        let unit = SettlementPolicy::unit(2);
        let g_hat =
            exact_expected_payoff_with_policy(&market, &example_trade(), &beliefs, &rule, &unit)
                .unwrap();
        let g = scoring_expected_gain(&market, &example_trade(), &beliefs).unwrap();
        let a = payout_residual(&example_trade(), &beliefs, &[0.5, 0.5], &[1.0, 1.0]);
        assert!((a - -1.246_326_367_292_884_9).abs() < 1e-12);
        assert!((g_hat - g - a).abs() < 1e-12);
    }

    #[test]
    fn belief_shape_checked() {
        let market = example_market(false);
        let rule = DecisionRule::fixed(vec![0.5, 0.5]);
        let bad = vec![Report::uniform(2).unwrap()];
        assert!(
            exact_expected_payoff(&market, &example_trade(), &bad, &rule, Mechanism::Scoring)
                .is_err()
        );
        let bad = vec![Report::uniform(2).unwrap(), Report::uniform(3).unwrap()];
        assert!(
            exact_expected_payoff(&market, &example_trade(), &bad, &rule, Mechanism::Scoring)
                .is_err()
        );
    }

    #[test]
    fn monte_carlo_single_draw_reproducible() {
        let market = example_market(false);
        let rule = DecisionRule::fixed(vec![0.5, 0.5]);
        let a = monte_carlo_payoff(
            &market,
            &example_trade(),
            &reference_beliefs(),
            &rule,
            Mechanism::Securities,
            1,
            9,
        )
        .unwrap();
        let b = monte_carlo_payoff(
            &market,
            &example_trade(),
            &reference_beliefs(),
            &rule,
            Mechanism::Securities,
            1,
            9,
        )
        .unwrap();
        assert_eq!(a, b);
        assert_eq!(a.stderr, 0.0);
        assert!(monte_carlo_payoff(
            &market,
            &example_trade(),
            &reference_beliefs(),
            &rule,
            Mechanism::Securities,
            0,
            9
        )
        .is_err());
    }

    #[test]
    fn random_instances_pass() {
        let report = verify_suite(7, 50, PayoutMode::Scaled).unwrap();
        assert!(report.failures.is_empty(), "{:?}", report.failures.first());
    }

    #[test]
    fn unit_payout_instances_fail_with_term_a() {
        let report = verify_suite(7, 20, PayoutMode::Unit).unwrap();
        assert!(!report.failures.is_empty());
        for (_, c) in &report.failures {
            assert!((c.g_hat - c.g - c.term_a).abs() < 1e-9);
            assert_eq!(c.violations.len(), 1, "{:?}", c.violations);
        }
    }

    #[test]
    fn instance_serializes_for_replay() {
        let inst = random_instance(99).unwrap();
        let text = serde_json::to_string(&inst).unwrap();
        let back: Instance = serde_json::from_str(&text).unwrap();
        assert_eq!(back, inst);
        assert_eq!(random_instance(99).unwrap(), inst);
    }

    #[test]
    fn reproduction_writes_csvs() {
        let dir = tempfile::tempdir().unwrap();
        let r = reproduce_example().unwrap();
        r.write_csvs(dir.path()).unwrap();
        let t4 = std::fs::read_to_string(dir.path().join("table4.csv")).unwrap();
        assert_eq!(
            t4,
            "action,outcome,arbitrary_delta,standardized_delta\n0,0,3,2\n0,1,1,0\n1,0,1,0\n1,1,2,1\n"
        );
        let t6 = std::fs::read_to_string(dir.path().join("table6.csv")).unwrap();
        assert!(t6.contains("0,1,0,-2\n") && t6.contains("1,0,0,-1\n"));
        let fig = std::fs::read_to_string(dir.path().join("figure1.csv")).unwrap();
        assert_eq!(fig.lines().count(), 100);
        assert!(fig.starts_with("phi,trader_wcl_scoring,"));
    }
}

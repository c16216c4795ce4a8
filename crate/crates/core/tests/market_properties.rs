//! Property tests over randomized markets: expected-payoff equivalence,
//! realised-payoff decomposition, conservation and the liability transforms.

use decimarket::engine::MarketSpec;
use decimarket::strategies::{
    apply_bundle, ex_ante_creator_bound, insurer_position, liability_free_transform,
    scoring_equivalent_transform, standardize, worst_case_losses, BundleSpec, InsurerMode,
};
use decimarket::verify::{check_instance, random_instance, PayoutMode};
use decimarket::{DecisionRule, MarketState, Quantities, TradeOrder, TraderId};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

#[derive(Debug, Clone)]
struct Scenario {
    outcomes: Vec<usize>,
    liquidity: f64,
    deltas: Vec<Quantities>,
    phi: Vec<f64>,
}

fn phi_strategy(m: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..1.0, m).prop_map(move |w| {
        let s: f64 = w.iter().sum::<f64>() + 1e-12;
        let spread = 1.0 - 0.01 * m as f64;
        w.iter().map(|x| 0.01 + spread * x / s).collect()
    })
}

fn scenario(lo: f64) -> impl Strategy<Value = Scenario> {
    prop::collection::vec(2usize..=5, 2..=4).prop_flat_map(move |outcomes| {
        let m = outcomes.len();
        let deltas: Vec<_> = outcomes
            .iter()
            .map(|&n| prop::collection::vec(lo..3.0, n).prop_map(|v| Quantities::new(v).unwrap()))
            .collect();
        (Just(outcomes), 0.5f64..3.0, deltas, phi_strategy(m)).prop_map(
            |(outcomes, liquidity, deltas, phi)| Scenario {
                outcomes,
                liquidity,
                deltas,
                phi,
            },
        )
    })
}

fn open(s: &Scenario, allow_short: bool) -> MarketState {
    MarketState::open(MarketSpec::uniform(&s.outcomes, s.liquidity, allow_short).unwrap())
}

fn pairs(s: &Scenario) -> impl Iterator<Item = (usize, usize)> + '_ {
    s.outcomes
        .iter()
        .enumerate()
        .flat_map(|(j, &n)| (0..n).map(move |i| (j, i)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn expected_payoffs_match(seed in any::<u64>()) {
        let inst = random_instance(seed).unwrap();
        let check = check_instance(&inst, PayoutMode::Scaled).unwrap();
        prop_assert!(check.passed(), "{:?}", check.violations);
    }

    #[test]
    fn unit_payout_residual_matches_term_a(seed in any::<u64>()) {
        let inst = random_instance(seed).unwrap();
        let check = check_instance(&inst, PayoutMode::Unit).unwrap();
        prop_assert!((check.g_hat - check.g - check.term_a).abs() < TOL);
    }

    #[test]
    fn selected_single_market_long_trade_pays_more(s in scenario(0.0), k in 0usize..4) {
        let k = k % s.outcomes.len();
        let mut deltas: Vec<Quantities> = s.outcomes.iter().map(|&n| Quantities::zeros(n)).collect();
        deltas[k] = s.deltas[k].clone();
        let mut m = open(&s, false);
        let rec = m.execute_trade("t", TradeOrder::Deltas(deltas)).unwrap();
        m.realize_rule(&DecisionRule::fixed(s.phi.clone())).unwrap();
        let t = TraderId::from("t");
        let cost = rec.costs[k];
        for (j, i) in pairs(&s) {
            let sec = m.settle_securities(j, i).unwrap().trader(&t);
            let sco = m.settle_scoring(j, i).unwrap().trader(&t);
            if j == k {
                let expect = (1.0 - s.phi[j]) / s.phi[j] * cost;
                prop_assert!((sec - sco - expect).abs() < TOL);
                if cost > 0.0 {
                    prop_assert!(sec - sco > 0.0);
                }
            } else {
                // unselected market: pay the cost, scoring is void
                prop_assert!((sec + cost).abs() < TOL);
                prop_assert_eq!(sco, 0.0);
            }
        }
    }

    #[test]
    fn conservation_with_many_traders(s in scenario(0.0), extra in scenario(0.0)) {
        let mut m = open(&s, false);
        m.execute_trade("a", TradeOrder::Deltas(s.deltas.clone())).unwrap();
        let second: Vec<Quantities> = s.outcomes.iter().enumerate()
            .map(|(j, &n)| Quantities::new(
                (0..n).map(|i| extra.deltas.get(j).and_then(|d| d.as_slice().get(i)).copied().unwrap_or(0.5)).collect()
            ).unwrap())
            .collect();
        m.execute_trade("b", TradeOrder::Deltas(second)).unwrap();
        m.execute_trade("a", TradeOrder::Deltas(standardize(&s.deltas))).unwrap();
        m.realize_rule(&DecisionRule::fixed(s.phi.clone())).unwrap();
        for (j, i) in pairs(&s) {
            let out = m.settle(j, i).unwrap();
            prop_assert!(out.securities.total().abs() < TOL);
            prop_assert!(out.scoring.total().abs() < TOL);
        }
    }

    #[test]
    fn sequential_scoring_telescopes(s in scenario(-3.0), w in prop::collection::vec(0.05f64..1.0, 20)) {
        let mut two = open(&s, true);
        two.execute_trade("first", TradeOrder::Deltas(s.deltas.clone())).unwrap();
        let mut it = w.iter().cycle();
        let second: Vec<Quantities> = s.outcomes.iter()
            .map(|&n| Quantities::new((0..n).map(|_| *it.next().unwrap() * 2.0 - 1.0).collect()).unwrap())
            .collect();
        two.execute_trade("second", TradeOrder::Deltas(second.clone())).unwrap();
        let combined: Vec<Quantities> = s.deltas.iter().zip(&second)
            .map(|(a, b)| a.checked_add(b).unwrap()).collect();
        let mut one = open(&s, true);
        one.execute_trade("both", TradeOrder::Deltas(combined)).unwrap();
        let rule = DecisionRule::fixed(s.phi.clone());
        two.realize_rule(&rule).unwrap();
        one.realize_rule(&rule).unwrap();
        for (j, i) in pairs(&s) {
            let p = two.settle_scoring(j, i).unwrap();
            let sum = p.trader(&"first".into()) + p.trader(&"second".into());
            let whole = one.settle_scoring(j, i).unwrap().trader(&"both".into());
            prop_assert!((sum - whole).abs() < TOL, "{} vs {}", sum, whole);
        }
    }

    #[test]
    fn transforms_preserve_prices(s in scenario(-3.0), betas in prop::collection::vec(-5.0f64..5.0, 4)) {
        let m = open(&s, true);
        let base = after_prices(&m, &s.deltas);
        let bundle = BundleSpec::new(betas[..s.outcomes.len()].to_vec()).unwrap();
        for variant in [
            standardize(&s.deltas),
            apply_bundle(&s.deltas, &bundle).unwrap(),
            scoring_equivalent_transform(&m, &s.deltas).unwrap(),
            liability_free_transform(&m, &s.deltas).unwrap(),
        ] {
            for (a, b) in after_prices(&m, &variant).iter().zip(&base) {
                prop_assert!(a.max_abs_diff(b) < 1e-12);
            }
        }
        for d in standardize(&s.deltas) {
            prop_assert_eq!(d.min(), 0.0);
        }
        for d in liability_free_transform(&m, &s.deltas).unwrap() {
            prop_assert_eq!(d.max(), 0.0);
        }
    }

    #[test]
    fn scoring_equivalent_settles_exactly(s in scenario(-3.0)) {
        let mut m = open(&s, true);
        let d = scoring_equivalent_transform(&m, &s.deltas).unwrap();
        let rec = m.execute_trade("t", TradeOrder::Deltas(d)).unwrap();
        prop_assert!(rec.cash_paid.abs() < TOL);
        m.realize_rule(&DecisionRule::fixed(s.phi.clone())).unwrap();
        let t = TraderId::from("t");
        for (j, i) in pairs(&s) {
            let sec = m.settle_securities(j, i).unwrap().trader(&t);
            let sco = m.settle_scoring(j, i).unwrap().trader(&t);
            prop_assert!((sec - sco).abs() < TOL);
        }
    }

    #[test]
    fn liability_free_bound_holds(s in scenario(-3.0)) {
        let base = open(&s, true);
        let bound = ex_ante_creator_bound(&base, &s.deltas).unwrap();
        let mut m = open(&s, true);
        let d = liability_free_transform(&m, &s.deltas).unwrap();
        m.execute_trade("t", TradeOrder::Deltas(d)).unwrap();
        m.realize_rule(&DecisionRule::fixed(s.phi.clone())).unwrap();
        for (j, i) in pairs(&s) {
            let creator = m.settle_securities(j, i).unwrap().creator;
            prop_assert!(-creator <= bound + TOL);
        }
    }

    #[test]
    fn insurers(s in scenario(0.0)) {
        for mode in [InsurerMode::CostMatched, InsurerMode::MaxMatched] {
            let mut m = open(&s, true);
            m.execute_trade("r", TradeOrder::Deltas(standardize(&s.deltas))).unwrap();
            let bound = ex_ante_creator_bound(&open(&s, true), &s.deltas).unwrap();
            let b = insurer_position(&m, mode).unwrap();
            let zero: Vec<Quantities> = s.outcomes.iter().map(|&n| Quantities::zeros(n)).collect();
            m.execute_trade("insurer", TradeOrder::Deltas(apply_bundle(&zero, &b).unwrap())).unwrap();
            m.realize_rule(&DecisionRule::fixed(s.phi.clone())).unwrap();
            for (j, i) in pairs(&s) {
                let creator = m.settle_securities(j, i).unwrap().creator;
                match mode {
                    InsurerMode::CostMatched => {
                        let regular = m.settle_scoring(j, i).unwrap().trader(&"r".into());
                        prop_assert!((creator + regular).abs() < TOL);
                    }
                    InsurerMode::MaxMatched => prop_assert!(-creator <= bound + TOL),
                }
            }
        }
    }

    #[test]
    fn trader_securities_wcl_ignores_phi(s in scenario(0.0), phi2 in phi_strategy(4)) {
        let m = open(&s, false);
        let d = standardize(&s.deltas);
        let a = worst_case_losses(&m, &d, &s.phi).unwrap();
        let mm = s.outcomes.len();
        let other: Vec<f64> = {
            let v = &phi2[..mm];
            let t: f64 = v.iter().sum();
            v.iter().map(|x| x / t).collect()
        };
        let b = worst_case_losses(&m, &d, &other).unwrap();
        let total: f64 = m.costs_of(&d).unwrap().iter().sum();
        prop_assert!((a.trader_wcl_securities - total).abs() < TOL);
        prop_assert!((b.trader_wcl_securities - total).abs() < TOL);
    }
}

fn after_prices(m: &MarketState, deltas: &[Quantities]) -> Vec<decimarket::Report> {
    m.spec()
        .markets()
        .iter()
        .zip(m.quantities())
        .zip(deltas)
        .map(|((c, q), d)| c.cost.prices(&q.checked_add(d).unwrap()).unwrap())
        .collect()
}

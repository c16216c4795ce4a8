//! Fixtures shared by the criterion benches.

use decimarket::verify::{example_market, example_trade};
use decimarket::{MarketState, Quantities, TradeOrder};

/// Reference market after the reference trade, ready for settlement.
pub fn traded_example() -> MarketState {
    let mut m = example_market(false);
    m.execute_trade("trader", TradeOrder::Deltas(example_trade()))
        .expect("reference trade is valid");
    m
}

/// A market with `actions` conditional markets of `outcomes` outcomes each.
pub fn wide_market(actions: usize, outcomes: usize) -> MarketState {
    let spec =
        decimarket::MarketSpec::uniform(&vec![outcomes; actions], 1.0, true).expect("valid spec");
    MarketState::open(spec)
}

/// Deterministic non-trivial deltas for [`wide_market`].
pub fn wide_deltas(actions: usize, outcomes: usize) -> Vec<Quantities> {
    (0..actions)
        .map(|j| {
            Quantities::new(
                (0..outcomes)
                    .map(|i| ((i * 7 + j * 3) % 5) as f64 * 0.5)
                    .collect(),
            )
            .expect("finite")
        })
        .collect()
}

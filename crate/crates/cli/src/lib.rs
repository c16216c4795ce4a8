//! Batch front-end for `decimarket`: load a TOML scenario, execute its
//! trades, settle, and write CSV reports.

pub mod config;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use decimarket::strategies::{reallocate, worst_case_losses, WorstCaseReport};
use decimarket::verify::{
    exact_expected_payoff, reproduce_example, scoring_expected_gain, simulate_settlements,
    verify_suite, write_settlements_csv, PayoutMode,
};
use decimarket::{DecisionRule, Error, MarketState, Mechanism, Quantities, TradeOrder, TraderId};
use log::{debug, info};

pub use config::{parse, ScenarioConfig};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Usage(String),
    #[error("invariant violated: {0}")]
    Invariant(Error),
    #[error("{0}")]
    Output(String),
}

impl CliError {
    /// 1 for output failures, 2 for parse and usage errors, 3 for model
    /// invariant violations.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Output(_) => 1,
            CliError::Parse(_) | CliError::Usage(_) => 2,
            CliError::Invariant(_) => 3,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Io(_) | Error::Csv(_) => CliError::Output(e.to_string()),
            Error::TradeLog(_) => CliError::Parse(e.to_string()),
            other => CliError::Invariant(other),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> CliError + '_ {
    move |e| CliError::Output(format!("{}: {e}", path.display()))
}

pub fn load(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(io_err(path))?;
    parse(&text).map_err(|e| CliError::Parse(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub trades: usize,
    pub phi: Vec<f64>,
    pub files: Vec<PathBuf>,
}

/// Loads `config_path` and runs it into `out`. Relative paths inside the
/// config resolve against the config file's directory.
pub fn run(config_path: &Path, out: &Path, seed: Option<u64>) -> Result<RunSummary, CliError> {
    let cfg = load(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    run_config(&cfg, base, out, seed)
}

pub fn run_config(
    cfg: &ScenarioConfig,
    base: &Path,
    out: &Path,
    seed: Option<u64>,
) -> Result<RunSummary, CliError> {
    let spec = cfg.market.to_spec()?;
    let mut market = MarketState::open(spec);
    let mut before = Vec::new();

    if let Some(log_path) = &cfg.replay_log {
        let path = base.join(log_path);
        let file = File::open(&path).map_err(io_err(&path))?;
        let trades = decimarket::engine::read_trade_log(file)?;
        info!("replaying {} trades from {}", trades.len(), path.display());
        for (trader, deltas) in trades {
            before.push(market.clone());
            market.execute_trade(trader, TradeOrder::Deltas(deltas))?;
        }
    } else {
        for t in &cfg.trades {
            let deltas = match (&t.deltas, &t.targets) {
                (Some(d), _) => config::to_quantities(d)?,
                (None, Some(r)) => market.deltas_for_targets(&config::to_targets(r)?)?,
                (None, None) => unreachable!("checked by config::parse"),
            };
            let deltas = reallocate(&market, &deltas, t.transform.into())?;
            before.push(market.clone());
            let rec = market.execute_trade(t.trader.as_str(), TradeOrder::Deltas(deltas))?;
            debug!(
                "trade {} by {}: cash {}",
                rec.index, rec.trader, rec.cash_paid
            );
        }
    }

    let rule = DecisionRule::from(&cfg.decision);
    let phi = market.realize_rule(&rule)?.to_vec();
    info!("decision rule realized: {phi:?}");
    let world = match &cfg.settlement.world {
        Some(w) => config::to_reports(w)?,
        None => market.prices()?,
    };
    let seed = seed.unwrap_or(cfg.settlement.seed);
    let draws = simulate_settlements(&market, &rule, &world, cfg.settlement.draws, seed)?;
    info!("simulated {} settlements with seed {seed}", draws.len());

    let worst: Vec<WorstCaseReport> = market
        .log()
        .iter()
        .zip(&before)
        .map(|(rec, state)| worst_case_losses(state, &rec.deltas, &phi))
        .collect::<decimarket::Result<_>>()?;
    let expectations = if cfg.verification.expectations {
        Some(expectations(&market, &before, &world, &phi)?)
    } else {
        None
    };
    let reproduction = if cfg.verification.reproduce_example {
        Some(reproduce_example()?)
    } else {
        None
    };

    std::fs::create_dir_all(out).map_err(io_err(out))?;
    let mut files = Vec::new();
    let mut emit = |name: &str, f: &dyn Fn(&mut dyn Write) -> Result<(), CliError>| {
        let path = out.join(name);
        let file = File::create(&path).map_err(io_err(&path))?;
        let mut w = BufWriter::new(file);
        f(&mut w)?;
        w.flush().map_err(io_err(&path))?;
        files.push(path);
        Ok::<(), CliError>(())
    };
    emit("trades.csv", &|w| Ok(market.write_trade_log(w)?))?;
    emit("settlement.csv", &|w| Ok(write_settlements_csv(&draws, w)?))?;
    emit("worst_case.csv", &|w| write_worst_case(&market, &worst, w))?;
    if let Some(rows) = &expectations {
        emit("expectations.csv", &|w| write_expectations(rows, w))?;
    }
    if let Some(rep) = &reproduction {
        rep.write_csvs(out)?;
        for name in [
            "table3.csv",
            "table4.csv",
            "table5.csv",
            "table6.csv",
            "figure1.csv",
        ] {
            files.push(out.join(name));
        }
    }
    info!("wrote {} files to {}", files.len(), out.display());
    Ok(RunSummary {
        trades: market.log().len(),
        phi,
        files,
    })
}

struct ExpectationRow {
    index: usize,
    trader: TraderId,
    securities: f64,
    scoring: f64,
    closed_form: f64,
}

fn expectations(
    market: &MarketState,
    before: &[MarketState],
    world: &[decimarket::Report],
    phi: &[f64],
) -> Result<Vec<ExpectationRow>, CliError> {
    let floor = phi.iter().copied().fold(f64::INFINITY, f64::min);
    let rule = DecisionRule::fixed(phi.to_vec()).with_floor(floor);
    market
        .log()
        .iter()
        .zip(before)
        .map(|(rec, state)| {
            let d: &[Quantities] = &rec.deltas;
            Ok(ExpectationRow {
                index: rec.index,
                trader: rec.trader.clone(),
                securities: exact_expected_payoff(state, d, world, &rule, Mechanism::Securities)?,
                scoring: exact_expected_payoff(state, d, world, &rule, Mechanism::Scoring)?,
                closed_form: scoring_expected_gain(state, d, world)?,
            })
        })
        .collect()
}

fn csv_err(e: csv::Error) -> CliError {
    CliError::Output(e.to_string())
}

fn write_worst_case(
    market: &MarketState,
    reports: &[WorstCaseReport],
    w: &mut dyn Write,
) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(
        ["trade_index", "trader_id"]
            .into_iter()
            .chain(WorstCaseReport::CSV_HEADER),
    )
    .map_err(csv_err)?;
    for (rec, r) in market.log().iter().zip(reports) {
        wtr.write_record(
            [rec.index.to_string(), rec.trader.to_string()]
                .into_iter()
                .chain(r.csv_fields()),
        )
        .map_err(csv_err)?;
    }
    wtr.flush().map_err(io_err(Path::new("worst_case.csv")))
}

fn write_expectations(rows: &[ExpectationRow], w: &mut dyn Write) -> Result<(), CliError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record([
        "trade_index",
        "trader_id",
        "securities_expected",
        "scoring_expected",
        "scoring_closed_form",
    ])
    .map_err(csv_err)?;
    for r in rows {
        wtr.write_record([
            r.index.to_string(),
            r.trader.to_string(),
            r.securities.to_string(),
            r.scoring.to_string(),
            r.closed_form.to_string(),
        ])
        .map_err(csv_err)?;
    }
    wtr.flush().map_err(io_err(Path::new("expectations.csv")))
}

/// Runs the randomized suite and writes one JSON line per failing instance
/// to `out`. Returns whether every instance passed.
pub fn verify(
    seed: u64,
    instances: usize,
    mode: PayoutMode,
    out: &mut dyn Write,
) -> Result<bool, CliError> {
    if instances == 0 {
        return Err(CliError::Usage("--instances must be at least 1".into()));
    }
    let report = verify_suite(seed, instances, mode)?;
    info!(
        "checked {} instances, {} failed",
        report.checked,
        report.failures.len()
    );
    for (inst, check) in &report.failures {
        let line = serde_json::json!({
            "instance": inst,
            "check": check,
            "residual": check.g_hat - check.g,
        });
        writeln!(out, "{line}").map_err(|e| CliError::Output(e.to_string()))?;
    }
    Ok(report.failures.is_empty())
}

mod cli;
mod market;
mod output;
mod rewards;
mod settings;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;

use cli::{Cli, Command, OutputFormat, RewardsCommand};
use market::Ctx;
use output::{OutputDir, Table};
use settings::{FileConfig, Inputs, MarketSettings};

/// Bad flags or configuration; exits with 64.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

const EXIT_FAILURE: u8 = 1;
const EXIT_IO: u8 = 2;
const EXIT_USAGE: u8 = 64;

fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<spreadlab::Error>() {
            if e.is_io() {
                return EXIT_IO;
            }
        }
        if cause.is::<std::io::Error>() {
            return EXIT_IO;
        }
    }
    EXIT_FAILURE
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SPREADLAB_LOG", "warn")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = match &cli.config {
        Some(p) => FileConfig::load(p)?,
        None => FileConfig::default(),
    };
    let format = cli.format.or(cfg.format).unwrap_or(OutputFormat::Csv);
    let out_dir: PathBuf = cli
        .out
        .clone()
        .or_else(|| cfg.out.clone())
        .unwrap_or_else(|| "out".into());
    let jobs = cli.jobs.or(cfg.jobs).unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("building worker pool")?;

    let market_ctx =
        |args: &cli::MarketArgs, books: bool, trades: bool, specs: bool| -> Result<Ctx> {
            let settings = MarketSettings::merge(args, &cfg)?;
            let inputs = Inputs::load(&settings, books, trades, specs)?;
            log::info!(
                "{} markets, {} snapshots, {} trades",
                inputs.market_names().len(),
                inputs.books.len(),
                inputs.trades.len()
            );
            Ok(Ctx {
                settings,
                inputs,
                pool: rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?,
            })
        };

    let tables: Vec<Table> = match &cli.command {
        Command::Metrics(a) => {
            let ctx = market_ctx(
                a,
                true,
                a.trades.is_some() || cfg.trades.is_some(),
                a.markets.is_some() || cfg.markets.is_some(),
            )?;
            market::metrics(&ctx)?
        }
        Command::Reconstruct(a) => {
            let books = a.books.is_some() || cfg.books.is_some();
            let ctx = market_ctx(a, books, true, false)?;
            market::reconstruct(&ctx)?
        }
        Command::Calibrate(a) => {
            let ctx = market_ctx(a, true, true, true)?;
            market::calibrate(&ctx)?.0
        }
        Command::Events(a) => {
            let ctx = market_ctx(a, true, true, a.markets.is_some() || cfg.markets.is_some())?;
            market::events(&ctx)?
        }
        Command::Report(r) => {
            let ctx = market_ctx(&r.market, true, true, true)?;
            let mut tables = market::metrics(&ctx)?;
            tables.extend(market::reconstruct(&ctx)?);
            tables.extend(market::calibrate(&ctx)?.0);
            tables.extend(market::events(&ctx)?);
            if let Some(fees) = r.fees.clone().or_else(|| cfg.fees.clone()) {
                let fees = settings::require(&Some(fees), "fees")?;
                tables.extend(rewards::tiers_from(&fees, None, None)?);
            }
            if r.epochs.is_some() || cfg.epochs.is_some() {
                let args = cli::SharesArgs {
                    q: cli::QArgs {
                        epochs: r.epochs.clone(),
                        for_market: None,
                        y: None,
                        z: None,
                        linear: false,
                        volatile: false,
                        multiplier: None,
                    },
                    pool: None,
                };
                tables.extend(rewards::shares(&args, &cfg)?);
            }
            tables
        }
        Command::Rewards(cmd) => match cmd {
            RewardsCommand::Qscore(a) => rewards::qscore(a, &cfg)?,
            RewardsCommand::Shares(a) => rewards::shares(a, &cfg)?,
            RewardsCommand::Rebates(a) => rewards::rebates(a)?,
            RewardsCommand::Curve(a) => rewards::curve(a)?,
            RewardsCommand::Dmm(a) => rewards::dmm(a)?,
            RewardsCommand::Tiers(a) => rewards::tiers(a, &cfg)?,
        },
    };
    drop(pool);

    let mut dir = OutputDir::create(&out_dir, format)?;
    for t in &tables {
        dir.write(t)?;
    }
    dir.finish()?;
    log::info!("wrote {} tables to {}", tables.len(), out_dir.display());
    Ok(())
}

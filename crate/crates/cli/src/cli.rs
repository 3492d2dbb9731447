use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rust_decimal::Decimal;

#[derive(Debug, Parser)]
#[command(
    name = "spreadlab",
    version,
    about = "Order-book liquidity, maxSpread calibration and LP incentive reports"
)]
pub struct Cli {
    /// TOML file supplying defaults for any flag.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Worker threads for per-market work (default: all cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<OutputFormat>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MinuteMode {
    Truncate,
    Nearest,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Depth grid, spread density, RLQ, tick constraint and trade statistics.
    Metrics(MarketArgs),
    /// Per-minute books rebuilt from the trade tape, and required depth.
    Reconstruct(MarketArgs),
    /// maxSpread sweep and bracket classification.
    Calibrate(MarketArgs),
    /// Event-window depth profiles and time to recovery.
    Events(MarketArgs),
    /// Incentive arithmetic.
    #[command(subcommand)]
    Rewards(RewardsCommand),
    /// Every market report plus optional reward tables in one run.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct MarketArgs {
    /// Order-book snapshots (JSON Lines, optionally gzipped).
    #[arg(long)]
    pub books: Option<PathBuf>,
    /// Trade tape CSV.
    #[arg(long)]
    pub trades: Option<PathBuf>,
    /// Market specs CSV: market,tickSize,indexPrice,bracketBps.
    #[arg(long)]
    pub markets: Option<PathBuf>,
    /// Event windows (TOML or JSON); defaults to the built-in macro events.
    #[arg(long)]
    pub events: Option<PathBuf>,
    /// Restrict to these markets (repeatable or comma-separated).
    #[arg(long = "market", value_delimiter = ',')]
    pub market_filter: Vec<String>,
    /// Inclusive start (RFC 3339 or YYYY-MM-DD).
    #[arg(long)]
    pub from: Option<String>,
    /// Exclusive end (RFC 3339 or YYYY-MM-DD).
    #[arg(long)]
    pub to: Option<String>,
    /// Spread grid in bps.
    #[arg(long, value_delimiter = ',')]
    pub spreads: Vec<Decimal>,
    /// Spread at which event profiles and recovery are measured.
    #[arg(long)]
    pub spread: Option<Decimal>,
    #[arg(long)]
    pub recovery_fraction: Option<Decimal>,
    /// Also enforce the spread-density and RLQ conditions; draft brackets.
    #[arg(long)]
    pub draft: bool,
    /// Count book minutes without trades as zero demand.
    #[arg(long)]
    pub zero_fill: bool,
    #[arg(long)]
    pub exclude_liquidations: bool,
    #[arg(long, value_enum)]
    pub minute_mode: Option<MinuteMode>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    #[command(flatten)]
    pub market: MarketArgs,
    /// Fees CSV for the tier allocation table.
    #[arg(long)]
    pub fees: Option<PathBuf>,
    /// Epoch LP CSV for the reward share table.
    #[arg(long)]
    pub epochs: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum RewardsCommand {
    /// Q score per LP.
    Qscore(QArgs),
    /// Reward shares and token amounts per LP.
    Shares(SharesArgs),
    /// Rebate value, tier and fee margin.
    Rebates(RebateArgs),
    /// Rebate cost against a fixed reward budget across volumes.
    Curve(CurveArgs),
    /// DMM stake, penalty/reward and applicant scores.
    Dmm(DmmArgs),
    /// Fee revenue and reward budget per market tier.
    Tiers(TierArgs),
}

#[derive(Debug, Clone, Args)]
pub struct QArgs {
    /// Epoch CSV: account,rewardSharePct,makerVolumePct,uptimePct[,depthSpreadScore].
    #[arg(long)]
    pub epochs: Option<PathBuf>,
    /// Pick y and z for this market (BTC/ETH vs the rest).
    #[arg(long = "for-market")]
    pub for_market: Option<String>,
    #[arg(long)]
    pub y: Option<f64>,
    #[arg(long)]
    pub z: Option<f64>,
    /// Q = maker volume.
    #[arg(long)]
    pub linear: bool,
    /// Apply the volatile-day multiplier.
    #[arg(long)]
    pub volatile: bool,
    #[arg(long)]
    pub multiplier: Option<f64>,
}

#[derive(Debug, Args)]
pub struct SharesArgs {
    #[command(flatten)]
    pub q: QArgs,
    /// Tokens distributed this epoch.
    #[arg(long)]
    pub pool: Option<f64>,
}

#[derive(Debug, Args)]
pub struct RebateArgs {
    /// Maker volume in USD.
    #[arg(long)]
    pub volume: Decimal,
    /// Rebate rate as a fraction; omit to take it from the schedule tier.
    #[arg(long)]
    pub rate: Option<Decimal>,
    /// Maker share of 30-day volume, as a fraction, for tier lookup.
    #[arg(long)]
    pub share: Option<Decimal>,
    /// Rebate schedule file (TOML/JSON).
    #[arg(long)]
    pub schedule: Option<PathBuf>,
    /// Use the long-tail enhanced schedule.
    #[arg(long)]
    pub enhanced: bool,
    #[arg(long)]
    pub fee_revenue: Option<Decimal>,
    /// Fraction of volume from rebate-earning DMMs.
    #[arg(long)]
    pub dmm_share: Option<Decimal>,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    /// Explicit volumes in USD.
    #[arg(long, value_delimiter = ',')]
    pub volumes: Vec<Decimal>,
    /// Largest volume for an evenly spaced grid (with --steps).
    #[arg(long)]
    pub max_volume: Option<Decimal>,
    #[arg(long, default_value_t = 20)]
    pub steps: u32,
    #[arg(long)]
    pub rate_low: Decimal,
    #[arg(long)]
    pub rate_high: Decimal,
    /// Reward budget in USD.
    #[arg(long)]
    pub rewards: Option<Decimal>,
    /// Reward budget in tokens, converted at --token-price.
    #[arg(long)]
    pub tokens: Option<Decimal>,
    #[arg(long)]
    pub token_price: Option<Decimal>,
}

#[derive(Debug, Args)]
pub struct DmmArgs {
    /// Average daily liquidity in USD.
    #[arg(long)]
    pub daily_liquidity: Decimal,
    #[arg(long, default_value_t = 28)]
    pub days: u32,
    #[arg(long, default_value = "0.0002")]
    pub rate: Decimal,
    #[arg(long, default_value = "0")]
    pub penalty: Decimal,
    #[arg(long, default_value = "0")]
    pub reward: Decimal,
    /// Applicant metrics CSV: account,metric,value,total.
    #[arg(long)]
    pub scores: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TierArgs {
    #[arg(long)]
    pub fees: Option<PathBuf>,
    /// TOML with `[tiers]` (name → markets) and `[allocation]` (name → fraction).
    #[arg(long)]
    pub tiers: Option<PathBuf>,
    /// Reward pool in USD.
    #[arg(long)]
    pub pool: Option<Decimal>,
}

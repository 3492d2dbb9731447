//! `rewards` subcommands.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use rust_decimal::Decimal;
use serde::Deserialize;
use spreadlab::rewards::{
    apply_volatility_multiplier, assign_rebate_tier, default_allocation, default_tiers,
    dmm_penalty_reward, dmm_score, dmm_stake_requirement, enhanced_schedule, fee_margin,
    linear_volume_q, load_epoch_stats, load_fees, load_rebate_schedule, normal_schedule, q_final,
    rebate_value, rebates_vs_rewards_curve, tier_allocation, DmmBid, EpochRow, LpEpochSample,
    QWeights, DEFAULT_TOKEN_PRICE_USD, DEFAULT_VOLATILITY_MULTIPLIER,
};

use crate::cli::{CurveArgs, DmmArgs, QArgs, RebateArgs, SharesArgs, TierArgs};
use crate::output::Table;
use crate::settings::{require, FileConfig};
use crate::UsageError;

fn d(v: Decimal) -> String {
    v.normalize().to_string()
}

struct Scored {
    row: EpochRow,
    sample: LpEpochSample<f64>,
    q: f64,
}

fn score(args: &QArgs, cfg: &FileConfig) -> Result<Vec<Scored>> {
    let path = require(
        &args.epochs.clone().or_else(|| cfg.epochs.clone()),
        "epochs",
    )?;
    let rows = load_epoch_stats(&path)?;
    let w = match (args.y, args.z) {
        (Some(y), Some(z)) => QWeights::new(y, z)?,
        (None, None) => args
            .for_market
            .as_deref()
            .map(QWeights::for_market)
            .unwrap_or_else(QWeights::altcoins),
        _ => bail!(UsageError("--y and --z must be given together".into())),
    };
    let multiplier = args.multiplier.unwrap_or(DEFAULT_VOLATILITY_MULTIPLIER);
    let samples = rows
        .iter()
        .map(EpochRow::sample)
        .collect::<Result<Vec<_>, _>>()?;
    let linear = args.linear.then(|| linear_volume_q(&samples));
    rows.into_iter()
        .zip(samples)
        .map(|(row, sample)| {
            let raw = match &linear {
                Some(q) => q[&sample.account],
                None => q_final(&sample, &w),
            };
            let q = apply_volatility_multiplier(raw, args.volatile, multiplier)?;
            Ok(Scored { row, sample, q })
        })
        .collect()
}

pub fn qscore(args: &QArgs, cfg: &FileConfig) -> Result<Vec<Table>> {
    let scored = score(args, cfg)?;
    let mut t = Table::new(
        "qscore",
        &[
            "account",
            "depth_spread_score",
            "uptime",
            "maker_volume",
            "q",
        ],
    );
    for s in &scored {
        t.push(vec![
            s.sample.account.clone(),
            s.sample.depth_spread_score.to_string(),
            s.sample.uptime.to_string(),
            s.sample.maker_volume.to_string(),
            s.q.to_string(),
        ]);
    }
    println!("{} LPs scored", scored.len());
    Ok(vec![t])
}

pub fn shares(args: &SharesArgs, cfg: &FileConfig) -> Result<Vec<Table>> {
    let scored = score(&args.q, cfg)?;
    let total: f64 = scored.iter().map(|s| s.q).sum();
    if total.is_nan() || total <= 0.0 {
        return Err(spreadlab::Error::NoEligibleLps.into());
    }
    let mut t = Table::new(
        "shares",
        &["account", "q", "share", "tokens", "reported_share_pct"],
    );
    for s in &scored {
        let share = s.q / total;
        t.push(vec![
            s.sample.account.clone(),
            s.q.to_string(),
            share.to_string(),
            args.pool
                .map(|p| (p * share).to_string())
                .unwrap_or_default(),
            s.row.reward_share_pct.to_string(),
        ]);
    }
    println!(
        "{} LPs, shares sum to {}",
        scored.len(),
        scored.iter().map(|s| s.q / total).sum::<f64>()
    );
    Ok(vec![t])
}

pub fn rebates(args: &RebateArgs) -> Result<Vec<Table>> {
    let schedule = match (&args.schedule, args.enhanced) {
        (Some(p), _) => load_rebate_schedule(&require(&Some(p.clone()), "schedule")?)?,
        (None, true) => enhanced_schedule(),
        (None, false) => normal_schedule(),
    };
    let tier = args.share.and_then(|s| assign_rebate_tier(s, &schedule));
    let rate = match (args.rate, tier) {
        (Some(r), _) => r,
        (None, Some(t)) => t.rebate_rate,
        (None, None) if args.share.is_some() => Decimal::ZERO,
        (None, None) => bail!(UsageError("give --rate or --share".into())),
    };
    let rebate = rebate_value(args.volume, rate)?;
    let margin = match args.fee_revenue {
        Some(fees) => Some(fee_margin(
            fees,
            args.volume,
            rate,
            args.dmm_share.unwrap_or(Decimal::ONE),
        )?),
        None => None,
    };
    let mut t = Table::new(
        "rebates",
        &[
            "volume",
            "volume_share",
            "tier",
            "rate",
            "rebate",
            "fee_revenue",
            "dmm_share",
            "fee_margin",
        ],
    );
    t.push(vec![
        d(args.volume),
        args.share.map(d).unwrap_or_default(),
        tier.map(|t| t.label.clone()).unwrap_or_default(),
        d(rate),
        d(rebate),
        args.fee_revenue.map(d).unwrap_or_default(),
        args.fee_revenue
            .map(|_| d(args.dmm_share.unwrap_or(Decimal::ONE)))
            .unwrap_or_default(),
        margin.map(d).unwrap_or_default(),
    ]);
    println!("rebate {} at rate {}", d(rebate.round_dp(2)), d(rate));
    Ok(vec![t])
}

pub fn curve(args: &CurveArgs) -> Result<Vec<Table>> {
    let rewards = match (args.rewards, args.tokens) {
        (Some(r), None) => r,
        (None, Some(tok)) => {
            tok * args
                .token_price
                .unwrap_or(Decimal::from(DEFAULT_TOKEN_PRICE_USD))
        }
        _ => bail!(UsageError(
            "give exactly one of --rewards or --tokens".into()
        )),
    };
    let volumes: Vec<Decimal> = if !args.volumes.is_empty() {
        args.volumes.clone()
    } else if let Some(max) = args.max_volume {
        if args.steps == 0 {
            bail!(UsageError("--steps must be positive".into()));
        }
        (0..=args.steps)
            .map(|i| max * Decimal::from(i) / Decimal::from(args.steps))
            .collect()
    } else {
        bail!(UsageError("give --volumes or --max-volume".into()));
    };
    let rows = rebates_vs_rewards_curve(&volumes, args.rate_low, args.rate_high, rewards)?;
    let mut t = Table::new(
        "curve",
        &[
            "volume",
            "rebate_low",
            "rebate_high",
            "rewards",
            "crossover_low",
            "crossover_high",
        ],
    );
    for r in &rows {
        t.push(vec![
            d(r.volume),
            d(r.rebate_low),
            d(r.rebate_high),
            d(r.rewards),
            d(r.crossover_low.round_dp(2)),
            d(r.crossover_high.round_dp(2)),
        ]);
    }
    if let Some(r) = rows.first() {
        println!(
            "crossover {} at {}, {} at {}",
            d(r.crossover_low.round_dp(2)),
            d(args.rate_low),
            d(r.crossover_high.round_dp(2)),
            d(args.rate_high)
        );
    }
    Ok(vec![t])
}

#[derive(Debug, Deserialize)]
struct ScoreRow {
    account: String,
    metric: String,
    value: Decimal,
    total: Decimal,
}

pub fn dmm(args: &DmmArgs) -> Result<Vec<Table>> {
    let stake = dmm_stake_requirement(args.daily_liquidity, args.days, args.rate)?;
    let pr = dmm_penalty_reward(stake, args.penalty, args.reward)?;
    let mut t = Table::new(
        "dmm",
        &[
            "daily_liquidity",
            "days",
            "rate",
            "stake",
            "penalty_fraction",
            "penalty",
            "reward_fraction",
            "reward",
        ],
    );
    t.push(vec![
        d(args.daily_liquidity),
        args.days.to_string(),
        d(args.rate),
        d(stake),
        d(args.penalty),
        d(pr.penalty),
        d(args.reward),
        d(pr.reward),
    ]);
    println!(
        "stake {} (penalty {}, reward {})",
        d(stake),
        d(pr.penalty),
        d(pr.reward)
    );
    let mut tables = vec![t];
    if let Some(path) = &args.scores {
        let path = require(&Some(path.clone()), "scores")?;
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_path(&path)
            .with_context(|| format!("reading {}", path.display()))?;
        let mut bids: BTreeMap<String, Vec<ScoreRow>> = BTreeMap::new();
        for (i, row) in rdr.deserialize::<ScoreRow>().enumerate() {
            let row = row.map_err(|e| spreadlab::Error::Parse {
                path: path.clone(),
                line: i + 2,
                message: e.to_string(),
            })?;
            bids.entry(row.account.clone()).or_default().push(row);
        }
        let mut scored = Vec::new();
        for (account, mut rows) in bids {
            rows.sort_by(|a, b| a.metric.cmp(&b.metric));
            let bid = DmmBid {
                account: account.clone(),
                metric_values: rows.iter().map(|r| r.value).collect(),
                metric_totals: rows.iter().map(|r| r.total).collect(),
                committed_liquidity: args.daily_liquidity,
                penalty_fraction: args.penalty,
                reward_fraction: args.reward,
            };
            scored.push((dmm_score(&bid)?, account));
        }
        scored.sort_by(|a, b| b.0.cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        let mut s = Table::new("dmm_scores", &["rank", "account", "score"]);
        for (i, (score, account)) in scored.iter().enumerate() {
            s.push(vec![(i + 1).to_string(), account.clone(), d(*score)]);
        }
        if let Some((score, account)) = scored.first() {
            println!("DMM: {account} (score {})", d(*score));
        }
        tables.push(s);
    }
    Ok(tables)
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct TierFile {
    tiers: BTreeMap<String, Vec<String>>,
    #[serde(default)]
    allocation: BTreeMap<String, Decimal>,
}

pub fn tiers(args: &TierArgs, cfg: &FileConfig) -> Result<Vec<Table>> {
    let fees_path = require(&args.fees.clone().or_else(|| cfg.fees.clone()), "fees")?;
    tiers_from(&fees_path, args.tiers.as_deref(), args.pool)
}

pub fn tiers_from(
    fees_path: &Path,
    tier_file: Option<&Path>,
    pool: Option<Decimal>,
) -> Result<Vec<Table>> {
    let fees = load_fees::<Decimal>(fees_path)?;
    let (tiers, allocation) = match tier_file {
        Some(p) => {
            let p = require(&Some(p.to_path_buf()), "tiers")?;
            let text = std::fs::read_to_string(&p).map_err(|e| spreadlab::Error::Io {
                path: p.clone(),
                source: e,
            })?;
            let f: TierFile = toml::from_str(&text).map_err(|e| {
                anyhow!(spreadlab::Error::Parse {
                    path: p.clone(),
                    line: 0,
                    message: e.to_string(),
                })
            })?;
            (f.tiers, f.allocation)
        }
        None => (default_tiers(), default_allocation()),
    };
    let pool = pool.unwrap_or(Decimal::from(920_548 * DEFAULT_TOKEN_PRICE_USD));
    let table = tier_allocation(&fees, &tiers, &allocation, pool)?;
    let mut t = Table::new(
        "tiers",
        &[
            "tier",
            "market_count",
            "fee_revenue",
            "fee_share",
            "allocation",
            "reward_usd",
            "missing_markets",
        ],
    );
    for r in &table.rows {
        t.push(vec![
            r.tier.clone(),
            r.market_count.to_string(),
            d(r.fee_revenue),
            d(r.fee_share.round_dp(6)),
            d(r.allocation),
            d(r.reward_usd),
            r.missing_markets.join(";"),
        ]);
        println!(
            "{}: fees {} -> rewards {}",
            r.tier,
            d(r.fee_revenue.round_dp(2)),
            d(r.reward_usd.round_dp(2))
        );
    }
    Ok(vec![t])
}

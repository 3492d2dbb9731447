//! Market-data subcommands: metrics, reconstruct, calibrate, events.

use anyhow::{bail, Result};
use rayon::prelude::*;
use rust_decimal::Decimal;
use spreadlab::calibration::{
    classify_markets, sweep_max_spread, CalibrationConfig, CalibrationResult, MarketData,
    StationarityCheck,
};
use spreadlab::event_study::{
    event_depth_profile, time_to_recovery, DepthMeasure, DepthSeries, EventProfile,
};
use spreadlab::liquidity_metrics::{
    depth_grid, min_tick_bps, relative_liquidity, spread_density, trade_statistics, DepthGrid,
    TRADE_SIZE_THRESHOLDS,
};
use spreadlab::market_data::{bucket_trades_per_minute, format_minute, BookSide};
use spreadlab::reconstruction::{
    depth_adequacy_series, estimated_depth_required, reconstruct_minute_books, DepthRequirement,
    MinuteAssignment, ReconstructedBook, ReconstructionOptions,
};
use spreadlab::{Error, ExactBook, ExactTrade};

use crate::cli::MinuteMode;
use crate::output::Table;
use crate::settings::{Inputs, MarketSettings};

pub struct Ctx {
    pub settings: MarketSettings,
    pub inputs: Inputs,
    pub pool: rayon::ThreadPool,
}

fn d(v: Decimal) -> String {
    v.normalize().to_string()
}

fn opt(v: Option<Decimal>) -> String {
    v.map(d).unwrap_or_default()
}

/// Averages are rounded for output; sums stay exact.
fn avg(v: Decimal) -> String {
    d(v.round_dp(6))
}

fn opt_avg(v: Option<Decimal>) -> String {
    v.map(avg).unwrap_or_default()
}

impl Ctx {
    pub fn spreads(&self) -> Vec<Decimal> {
        if self.settings.spreads.is_empty() {
            CalibrationConfig::<Decimal>::default().spreads_bps
        } else {
            self.settings.spreads.clone()
        }
    }

    fn recon_options(&self) -> ReconstructionOptions {
        ReconstructionOptions {
            minute_mode: match self.settings.minute_mode {
                MinuteMode::Truncate => MinuteAssignment::Truncate,
                MinuteMode::Nearest => MinuteAssignment::Nearest,
            },
            include_liquidations: !self.settings.exclude_liquidations,
        }
    }

    /// Runs `f` for every market on the worker pool; results come back in
    /// market order regardless of scheduling.
    fn per_market<T: Send>(
        &self,
        f: impl Fn(&str) -> Result<Option<T>> + Sync,
    ) -> Result<Vec<(String, T)>> {
        let names = self.inputs.market_names();
        if names.is_empty() {
            bail!(Error::Validation(
                "no markets in the selected inputs".into()
            ));
        }
        let mut results: Vec<(String, T)> = self
            .pool
            .install(|| {
                names
                    .par_iter()
                    .map(|m| f(m).map(|r| r.map(|r| (m.clone(), r))))
                    .collect::<Result<Vec<_>>>()
            })?
            .into_iter()
            .flatten()
            .collect();
        results.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(results)
    }
}

struct MarketInputs {
    books: Vec<ExactBook>,
    trades: Vec<ExactTrade>,
    recon: Vec<ReconstructedBook<Decimal>>,
}

fn market_inputs(ctx: &Ctx, market: &str) -> MarketInputs {
    let trades = ctx.inputs.trades_for(market);
    MarketInputs {
        recon: reconstruct_minute_books(&trades, ctx.recon_options()),
        books: ctx.inputs.books_for(market),
        trades,
    }
}

// ---- metrics ----

pub fn metrics(ctx: &Ctx) -> Result<Vec<Table>> {
    let spreads = ctx.spreads();
    let per = ctx.per_market(|m| {
        let books = ctx.inputs.books_for(m);
        let trades = ctx.inputs.trades_for(m);
        let grid = depth_grid(&books, &spreads)?;
        let stats = trade_statistics(&trades, &bucket_trades_per_minute(&trades));
        let mut dens = Vec::new();
        if let Some(spec) = ctx.inputs.spec_for(m) {
            let two_sided: Vec<&ExactBook> = books
                .iter()
                .filter(|b| !b.bids.is_empty() && !b.asks.is_empty())
                .collect();
            for &s in &spreads {
                let mut acc = [Vec::new(), Vec::new(), Vec::new(), Vec::new()];
                for b in &two_sided {
                    acc[0].push(spread_density(b, spec, s, BookSide::Bid)?.density);
                    acc[1].push(spread_density(b, spec, s, BookSide::Ask)?.density);
                    acc[2].push(relative_liquidity(b, s, BookSide::Bid, spec.tick_size)?.rlq);
                    acc[3].push(relative_liquidity(b, s, BookSide::Ask, spec.tick_size)?.rlq);
                }
                let mean = |v: &[Decimal]| spreadlab::stats::mean(v);
                dens.push((s, acc.map(|v| mean(&v)), two_sided.len()));
            }
        }
        Ok(Some((grid, stats, dens)))
    })?;

    let mut cols = vec!["market".to_string(), "minute".into(), "one_sided".into()];
    for s in &spreads {
        cols.push(format!("bid_{}", d(*s)));
        cols.push(format!("ask_{}", d(*s)));
    }
    let mut grid_table = Table {
        name: "depth_grid".into(),
        columns: cols,
        rows: vec![],
    };
    let mut spread_table = Table::new(
        "spread_metrics",
        &[
            "market",
            "spread_bps",
            "mean_bid_depth",
            "mean_ask_depth",
            "mean_bid_density",
            "mean_ask_density",
            "mean_bid_rlq",
            "mean_ask_rlq",
            "two_sided_snapshots",
        ],
    );
    let mut stat_cols = vec![
        "market",
        "day",
        "trade_count",
        "mean_notional",
        "std_notional",
        "max_notional",
    ];
    let above: Vec<String> = TRADE_SIZE_THRESHOLDS
        .iter()
        .map(|t| format!("above_{t}"))
        .collect();
    stat_cols.extend(above.iter().map(String::as_str));
    stat_cols.extend([
        "p95_minute_ask_demand",
        "p95_minute_bid_demand",
        "p95_trade_notional",
    ]);
    let mut stats_table = Table::new("trade_stats", &stat_cols);

    for (market, (grid, stats, dens)) in &per {
        let means = grid.mean_depths();
        for row in &grid.rows {
            let mut r = vec![
                market.clone(),
                format_minute(row.minute),
                row.one_sided.to_string(),
            ];
            for dep in &row.depths {
                r.push(d(dep.bid_depth_usd));
                r.push(d(dep.ask_depth_usd));
            }
            grid_table.push(r);
        }
        for (i, (s, m, n)) in dens.iter().enumerate() {
            spread_table.push(vec![
                market.clone(),
                d(*s),
                avg(means[i].bid_depth_usd),
                avg(means[i].ask_depth_usd),
                opt_avg(m[0]),
                opt_avg(m[1]),
                opt_avg(m[2]),
                opt_avg(m[3]),
                n.to_string(),
            ]);
        }
        for st in stats {
            let mut r = vec![
                market.clone(),
                st.day.to_string(),
                st.trade_count.to_string(),
                avg(st.mean_notional),
                avg(st.std_notional),
                d(st.max_notional),
            ];
            r.extend(st.counts_above.iter().map(|(_, c)| c.to_string()));
            r.extend([
                avg(st.p95_minute_ask_demand),
                avg(st.p95_minute_bid_demand),
                avg(st.p95_trade_notional),
            ]);
            stats_table.push(r);
        }
        log::debug!("{market}: {} snapshots", grid.rows.len());
    }

    let mut tick = Table::new(
        "min_tick",
        &[
            "market",
            "tick_size",
            "index_price",
            "min_tick_pct",
            "min_tick_bps",
            "tick_constrained",
        ],
    );
    for spec in &ctx.inputs.specs {
        let pct = min_tick_bps(spec);
        let bps = pct * Decimal::from(100);
        tick.push(vec![
            spec.market.clone(),
            d(spec.tick_size),
            d(spec.index_price),
            d(pct.round_dp(6)),
            d(bps.round_dp(4)),
            (bps >= CalibrationConfig::<Decimal>::default().tick_constrained_min_bps).to_string(),
        ]);
    }
    for (market, (grid, _, _)) in &per {
        println!(
            "{market}: {} snapshots, {} spreads",
            grid.rows.len(),
            spreads.len()
        );
    }
    Ok(vec![grid_table, spread_table, stats_table, tick])
}

// ---- reconstruct ----

pub fn reconstruct(ctx: &Ctx) -> Result<Vec<Table>> {
    let spreads = ctx.spreads();
    let with_books = !ctx.inputs.books.is_empty();
    let per = ctx.per_market(|m| {
        let mi = market_inputs(ctx, m);
        let required = match estimated_depth_required(&mi.recon) {
            Ok(r) => Some(r),
            Err(Error::NoTradeActiveMinutes) => None,
            Err(e) => return Err(e.into()),
        };
        let mut adequacy = Vec::new();
        if with_books && !mi.books.is_empty() {
            let grid = depth_grid(&mi.books, &spreads)?;
            for &s in &spreads {
                match depth_adequacy_series(&grid, &mi.recon, s, ctx.settings.zero_fill) {
                    Ok(series) => adequacy.push((s, series)),
                    Err(Error::NoOverlap) => {
                        log::warn!("{m}: no overlap between books and trades at {s} bps")
                    }
                    Err(e) => return Err(e.into()),
                }
            }
        }
        Ok(Some((mi.recon, required, adequacy)))
    })?;

    let mut recon_t = Table::new(
        "recon",
        &[
            "market",
            "minute",
            "bid_notional",
            "ask_notional",
            "level_count_bid",
            "level_count_ask",
            "trade_count",
        ],
    );
    let mut req_cols = vec!["market"];
    req_cols.extend(DepthRequirement::<Decimal>::CSV_HEADER.split(','));
    let mut req_t = Table::new("depth_required", &req_cols);
    let mut adq_t = Table::new(
        "adequacy",
        &[
            "market",
            "minute",
            "spread_bps",
            "book_bid",
            "book_ask",
            "required_bid",
            "required_ask",
            "adequate",
        ],
    );
    for (market, (recon, required, adequacy)) in &per {
        for r in recon {
            recon_t.push(vec![
                market.clone(),
                format_minute(r.key.minute),
                d(r.bid_notional),
                d(r.ask_notional),
                r.bid_levels.len().to_string(),
                r.ask_levels.len().to_string(),
                r.trade_count.to_string(),
            ]);
        }
        if let Some(req) = required {
            let mut row = vec![market.clone()];
            row.extend(req.csv_fields().iter().map(|v| avg(*v)));
            req_t.push(row);
        }
        let mut adq_rows: Vec<Vec<String>> = Vec::new();
        for (s, series) in adequacy {
            for a in &series.rows {
                adq_rows.push(vec![
                    market.clone(),
                    format_minute(a.key.minute),
                    d(*s),
                    d(a.book_bid),
                    d(a.book_ask),
                    d(a.required_bid),
                    d(a.required_ask),
                    a.adequate.to_string(),
                ]);
            }
        }
        // (market, minute) order, spreads ascending within a minute.
        adq_rows.sort_by(|a, b| {
            (&a[1], a[2].parse::<Decimal>().ok()).cmp(&(&b[1], b[2].parse::<Decimal>().ok()))
        });
        adq_t.rows.extend(adq_rows);
        let p95 = required
            .map(|r| {
                format!(
                    "p95 demand bid {} / ask {}",
                    d(r.ninetyfive_depth_bid.round_dp(2)),
                    d(r.ninetyfive_depth_ask.round_dp(2))
                )
            })
            .unwrap_or_else(|| "no trades".into());
        println!("{market}: {} trade-active minutes, {p95}", recon.len());
    }
    let mut tables = vec![recon_t, req_t];
    if with_books {
        tables.push(adq_t);
    }
    Ok(tables)
}

// ---- calibrate ----

pub fn calibration_config(ctx: &Ctx) -> Result<CalibrationConfig<Decimal>> {
    let base = CalibrationConfig::<Decimal>::default();
    let mut cfg = if ctx.settings.draft {
        CalibrationConfig {
            draft_mode: true,
            ..base.with_draft_brackets()
        }
    } else {
        base
    };
    cfg.spreads_bps = ctx.spreads();
    if let Some(f) = ctx.settings.recovery_fraction {
        cfg.recovery_fraction = f;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn adf_cell(check: &StationarityCheck) -> String {
    match check {
        StationarityCheck::Tested(r) => format!("{:.6}", r.statistic),
        StationarityCheck::Constant => "constant".into(),
        StationarityCheck::Insufficient { .. } => "insufficient".into(),
    }
}

pub fn calibrate(ctx: &Ctx) -> Result<(Vec<Table>, Vec<CalibrationResult<Decimal>>)> {
    let cfg = calibration_config(ctx)?;
    let per = ctx.per_market(|m| {
        let Some(spec) = ctx.inputs.spec_for(m) else {
            log::warn!("{m}: no market spec, skipped");
            return Ok(None);
        };
        let mi = market_inputs(ctx, m);
        let data = MarketData {
            books: &mi.books,
            recon: &mi.recon,
            trades: &mi.trades,
            spec,
        };
        match sweep_max_spread(data, &cfg, &ctx.inputs.events) {
            Ok(r) => Ok(Some(r)),
            Err(Error::NoOverlap) => {
                log::warn!("{m}: books and trades share no minute, skipped");
                Ok(None)
            }
            Err(e) => Err(anyhow::Error::new(e).context(format!("calibrating {m}"))),
        }
    })?;
    let results: Vec<CalibrationResult<Decimal>> = per.into_iter().map(|(_, r)| r).collect();
    if results.is_empty() {
        bail!(Error::NoOverlap);
    }

    let mut cal = Table::new(
        "calibration",
        &[
            "market",
            "spread_bps",
            "mean_bid_depth",
            "mean_ask_depth",
            "mean_bid_density",
            "mean_ask_density",
            "mean_bid_rlq",
            "mean_ask_rlq",
            "insufficiency_pct",
            "adf_bid",
            "adf_ask",
            "event_breaches",
            "c1_tick",
            "c2_mean_depth",
            "c3_stationary",
            "c4_event_adequate",
            "sd_condition",
            "rlq_condition",
            "passes",
            "chosen",
        ],
    );
    for r in &results {
        for s in &r.spreads {
            let v = s.verdicts;
            cal.push(vec![
                r.market.clone(),
                d(s.spread_bps),
                avg(s.mean_bid_depth),
                avg(s.mean_ask_depth),
                avg(s.mean_bid_density),
                avg(s.mean_ask_density),
                avg(s.mean_bid_rlq),
                avg(s.mean_ask_rlq),
                opt(s.insufficiency_pct.map(|p| p.round_dp(6))),
                adf_cell(&s.adf_bid),
                adf_cell(&s.adf_ask),
                s.event_breaches.to_string(),
                v.c1_tick.to_string(),
                v.c2_mean_depth.to_string(),
                v.c3_stationary.to_string(),
                v.c4_event_adequate.to_string(),
                v.sd_condition.to_string(),
                v.rlq_condition.to_string(),
                v.passes(cfg.draft_mode).to_string(),
                (s.spread_bps == r.chosen_bps).to_string(),
            ]);
        }
    }

    let table = classify_markets(&results, &cfg);
    let mut brackets = Table::new(
        "brackets",
        &["market", "original_bps", "revised_bps", "rationale"],
    );
    for row in &table.rows {
        brackets.push(vec![
            row.market.clone(),
            row.original_bps.to_string(),
            row.revised_bps.to_string(),
            row.rationale.to_string(),
        ]);
    }
    let mut insuff = Table::new("insufficiency", &["key", "spread_bps", "insufficiency_pct"]);
    for row in &table.insufficiency {
        insuff.push(vec![
            row.key.clone(),
            d(row.spread_bps),
            opt(row.insufficiency_pct.map(|p| p.round_dp(6))),
        ]);
    }
    let mut groups = Table::new("bracket_groups", &["bracket_bps", "markets"]);
    for (bracket, markets) in &table.brackets {
        groups.push(vec![bracket.to_string(), markets.join(";")]);
    }

    for (r, row) in results.iter().zip(&table.rows) {
        let skipped = if r.skipped_events.is_empty() {
            String::new()
        } else {
            format!(", events skipped: {}", r.skipped_events.join("; "))
        };
        println!(
            "{}: maxSpread {} bps ({}), bracket {} -> {}{}",
            r.market,
            d(r.chosen_bps),
            r.rationale,
            row.original_bps,
            row.revised_bps,
            skipped
        );
    }
    Ok((vec![cal, brackets, insuff, groups], results))
}

// ---- events ----

fn event_spread(ctx: &Ctx, market: &str) -> Decimal {
    ctx.settings
        .spread
        .or_else(|| {
            ctx.inputs
                .spec_for(market)
                .map(|s| Decimal::from(s.bracket_bps))
        })
        .unwrap_or(Decimal::from(20))
}

enum EventOutcome {
    Done(
        Box<EventProfile<Decimal>>,
        spreadlab::event_study::RecoveryReport<Decimal>,
    ),
    Failed {
        event: String,
        spread: Decimal,
        reason: String,
    },
}

pub fn events(ctx: &Ctx) -> Result<Vec<Table>> {
    let fraction = ctx
        .settings
        .recovery_fraction
        .unwrap_or(Decimal::new(75, 2));
    let per = ctx.per_market(|m| {
        let mi = market_inputs(ctx, m);
        let spread = event_spread(ctx, m);
        let grid: DepthGrid<Decimal> = depth_grid(&mi.books, &[spread])?;
        let mut out = Vec::new();
        for event in &ctx.inputs.events {
            let attempt = || -> spreadlab::Result<_> {
                let profile = event_depth_profile(&grid, &mi.recon, event, spread, m)?;
                let series = DepthSeries::from_grid(&grid, m, spread, DepthMeasure::Total)?;
                let report = time_to_recovery(&series, event, fraction)?;
                Ok((profile, report))
            };
            out.push(match attempt() {
                Ok((p, r)) => EventOutcome::Done(Box::new(p), r),
                Err(e @ (Error::SeriesGaps { .. } | Error::ZeroBaseline(_))) => {
                    log::warn!("{m}: {e}");
                    let reason = match e {
                        Error::SeriesGaps { missing, .. } => {
                            format!("missing {} minutes", missing.len())
                        }
                        _ => "zero baseline depth".into(),
                    };
                    EventOutcome::Failed {
                        event: event.name.clone(),
                        spread,
                        reason,
                    }
                }
                Err(e) => return Err(e.into()),
            });
        }
        Ok(Some(out))
    })?;

    let mut recovery = Table::new(
        "recovery",
        &[
            "market",
            "event",
            "spread_bps",
            "baseline_depth",
            "threshold_fraction",
            "trough_minute",
            "recovery_minutes",
            "status",
        ],
    );
    let mut summary = Table::new(
        "event_summary",
        &[
            "market",
            "event",
            "spread_bps",
            "pre_mean",
            "post_mean",
            "min_depth",
            "breach_count",
        ],
    );
    let mut profiles = Table::new(
        "event_profiles",
        &[
            "market",
            "event",
            "minute",
            "book_bid",
            "book_ask",
            "recon_bid",
            "recon_ask",
            "breach",
        ],
    );
    for (market, outcomes) in &per {
        let mut line = Vec::new();
        for o in outcomes {
            match o {
                EventOutcome::Done(p, r) => {
                    let status = match r.recovery_minutes {
                        Some(0) => "never_impaired",
                        Some(_) => "recovered",
                        None => "not_recovered",
                    };
                    recovery.push(vec![
                        market.clone(),
                        r.event.clone(),
                        d(r.spread_bps),
                        avg(r.baseline_depth),
                        d(r.threshold_fraction),
                        r.trough_minute
                            .as_ref()
                            .map(|k| format_minute(k.minute))
                            .unwrap_or_default(),
                        r.recovery_minutes
                            .map(|m| m.to_string())
                            .unwrap_or_default(),
                        status.into(),
                    ]);
                    summary.push(vec![
                        market.clone(),
                        p.event.clone(),
                        d(p.spread_bps),
                        opt_avg(p.summary.pre_mean),
                        opt_avg(p.summary.post_mean),
                        d(p.summary.min_depth),
                        p.summary.breach_count.to_string(),
                    ]);
                    for row in &p.rows {
                        profiles.push(vec![
                            market.clone(),
                            p.event.clone(),
                            format_minute(row.minute),
                            d(row.book_bid),
                            d(row.book_ask),
                            d(row.recon_bid),
                            d(row.recon_ask),
                            row.breach.to_string(),
                        ]);
                    }
                    line.push(format!("{} {}", r.event, r.recovery_label()));
                }
                EventOutcome::Failed {
                    event,
                    spread,
                    reason,
                } => {
                    recovery.push(vec![
                        market.clone(),
                        event.clone(),
                        d(*spread),
                        String::new(),
                        d(fraction),
                        String::new(),
                        String::new(),
                        format!("skipped: {reason}"),
                    ]);
                    line.push(format!("{event} skipped"));
                }
            }
        }
        println!("{market}: {}", line.join("; "));
    }
    Ok(vec![recovery, summary, profiles])
}

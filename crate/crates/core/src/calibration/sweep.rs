//! The maxSpread sweep: evaluate every candidate spread and pick the
//! tightest one that passes every enabled condition.

use serde::Serialize;

use super::adf::{adf_test_at, AdfResult, Significance};
use super::conditions::{
    condition1_tick, condition2_depth, insufficiency_percentage, DemandProfile,
};
use super::config::CalibrationConfig;
use crate::error::{Error, Result};
use crate::event_study::{condition4_event_adequacy, event_depth_profile, EventWindow};
use crate::liquidity_metrics::{
    depth_grid, min_tick_bps, relative_liquidity, spread_density, DepthGrid,
};
use crate::market_data::{
    bucket_trades_per_minute, BookSide, MarketSpec, OrderBookSnapshot, TradeRecord,
};
use crate::reconstruction::ReconstructedBook;
use crate::scalar::Scalar;
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SpreadVerdicts {
    pub c1_tick: bool,
    pub c2_mean_depth: bool,
    pub c3_stationary: bool,
    pub c4_event_adequate: bool,
    pub sd_condition: bool,
    pub rlq_condition: bool,
}

impl SpreadVerdicts {
    /// All conditions enforced under the given mode.
    pub fn passes(&self, draft_mode: bool) -> bool {
        let final_ok =
            self.c1_tick && self.c2_mean_depth && self.c3_stationary && self.c4_event_adequate;
        final_ok && (!draft_mode || (self.sd_condition && self.rlq_condition))
    }
}

/// Stationarity verdict for one side's per-minute depth series.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StationarityCheck {
    Tested(AdfResult<f64>),
    /// Constant series: time-invariant by construction.
    Constant,
    /// Too few minutes to run the regression.
    Insufficient {
        minutes: usize,
    },
}

impl StationarityCheck {
    pub fn passes(&self) -> bool {
        match self {
            StationarityCheck::Tested(r) => r.stationary,
            StationarityCheck::Constant | StationarityCheck::Insufficient { .. } => true,
        }
    }
}

/// Everything measured at one candidate spread.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadSummary<S> {
    pub spread_bps: S,
    pub mean_bid_depth: S,
    pub mean_ask_depth: S,
    pub mean_bid_density: S,
    pub mean_ask_density: S,
    pub mean_bid_rlq: S,
    pub mean_ask_rlq: S,
    /// Percent of minutes failing the volume-coverage backtest.
    pub insufficiency_pct: Option<S>,
    pub adf_bid: StationarityCheck,
    pub adf_ask: StationarityCheck,
    pub event_breaches: usize,
    pub c2_vacuous: bool,
    pub verdicts: SpreadVerdicts,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Rationale {
    TickConstrained,
    DepthLimited,
    Ok,
}

impl std::fmt::Display for Rationale {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Rationale::TickConstrained => "TICK_CONSTRAINED",
            Rationale::DepthLimited => "DEPTH_LIMITED",
            Rationale::Ok => "OK",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationResult<S> {
    pub market: String,
    pub original_bps: u32,
    /// One tick in bps of the index price.
    pub min_tick_bps: S,
    pub spreads: Vec<SpreadSummary<S>>,
    pub chosen_bps: S,
    pub rationale: Rationale,
    /// Events that could not be evaluated for lack of book coverage.
    pub skipped_events: Vec<String>,
}

impl<S: Scalar> CalibrationResult<S> {
    /// The chosen spread equals the current bracket.
    pub fn unchanged(&self) -> bool {
        self.chosen_bps == S::from_int(self.original_bps as i64)
    }

    pub fn summary_at(&self, spread_bps: S) -> Option<&SpreadSummary<S>> {
        self.spreads.iter().find(|s| s.spread_bps == spread_bps)
    }
}

/// Input bundle for one market.
#[derive(Debug, Clone, Copy)]
pub struct MarketData<'a, S> {
    pub books: &'a [OrderBookSnapshot<S>],
    pub recon: &'a [ReconstructedBook<S>],
    pub trades: &'a [TradeRecord<S>],
    pub spec: &'a MarketSpec<S>,
}

pub(crate) fn stationarity<S: Scalar>(
    values: &[S],
    cfg: &CalibrationConfig<S>,
) -> StationarityCheck {
    let series: Vec<f64> = values.iter().map(|v| v.to_f64_lossy()).collect();
    match adf_test_at(
        &series,
        cfg.adf_max_lag,
        Significance::from_alpha(cfg.adf_significance),
    ) {
        Ok(r) => StationarityCheck::Tested(r),
        Err(Error::DegenerateSeries(_)) => StationarityCheck::Constant,
        Err(_) => StationarityCheck::Insufficient {
            minutes: series.len(),
        },
    }
}

fn mean_or_zero<S: Scalar>(v: &[S]) -> S {
    stats::mean(v).unwrap_or_else(S::zero)
}

/// Runs the sweep for one market.
pub fn sweep_max_spread<S: Scalar>(
    data: MarketData<'_, S>,
    cfg: &CalibrationConfig<S>,
    events: &[EventWindow],
) -> Result<CalibrationResult<S>> {
    cfg.validate()?;
    let MarketData {
        books,
        recon,
        trades,
        spec,
    } = data;
    let market = spec.market.as_str();
    let books: Vec<OrderBookSnapshot<S>> = books
        .iter()
        .filter(|b| b.market == market)
        .cloned()
        .collect();
    let book_minutes: std::collections::BTreeSet<_> = books.iter().map(|b| b.key()).collect();
    if !recon.iter().any(|r| book_minutes.contains(&r.key)) {
        return Err(Error::NoOverlap);
    }

    let grid = depth_grid(&books, &cfg.spreads_bps)?;
    let buckets = bucket_trades_per_minute(trades);
    let demand = DemandProfile::from_recon(recon);
    let two_sided: Vec<&OrderBookSnapshot<S>> = books
        .iter()
        .filter(|b| !b.bids.is_empty() && !b.asks.is_empty())
        .collect();
    let notionals: Vec<S> = trades.iter().map(TradeRecord::notional).collect();
    let avg_trade_size = mean_or_zero(&notionals);
    let (amd_bid, amd_ask) = (mean_or_zero(&demand.bid), mean_or_zero(&demand.ask));
    let tick_bps = min_tick_bps(spec) * S::from_int(100);

    let mut skipped_events = Vec::new();
    let mut spreads = Vec::with_capacity(cfg.spreads_bps.len());
    for (idx, &spread) in cfg.spreads_bps.iter().enumerate() {
        let summary = evaluate_spread(
            SpreadContext {
                grid: &grid,
                idx,
                spread,
                two_sided: &two_sided,
                spec,
                demand: &demand,
                avg_trade_size,
                amd: (amd_bid, amd_ask),
                buckets: &buckets,
                recon,
                events,
                market,
            },
            cfg,
            &mut skipped_events,
        )?;
        spreads.push(summary);
    }
    skipped_events.sort();
    skipped_events.dedup();

    let (chosen_bps, rationale) = if tick_bps >= cfg.tick_constrained_min_bps {
        (cfg.tick_constrained_bracket, Rationale::TickConstrained)
    } else {
        match spreads.iter().find(|s| s.verdicts.passes(cfg.draft_mode)) {
            Some(s) => (s.spread_bps, Rationale::Ok),
            None => (
                *cfg.spreads_bps.last().expect("validated non-empty"),
                Rationale::DepthLimited,
            ),
        }
    };
    Ok(CalibrationResult {
        market: market.to_owned(),
        original_bps: spec.bracket_bps,
        min_tick_bps: tick_bps,
        spreads,
        chosen_bps,
        rationale,
        skipped_events,
    })
}

struct SpreadContext<'a, S> {
    grid: &'a DepthGrid<S>,
    idx: usize,
    spread: S,
    two_sided: &'a [&'a OrderBookSnapshot<S>],
    spec: &'a MarketSpec<S>,
    demand: &'a DemandProfile<S>,
    avg_trade_size: S,
    amd: (S, S),
    buckets: &'a std::collections::BTreeMap<
        crate::market_data::MinuteKey,
        crate::market_data::MinuteBucket<S>,
    >,
    recon: &'a [ReconstructedBook<S>],
    events: &'a [EventWindow],
    market: &'a str,
}

fn evaluate_spread<S: Scalar>(
    ctx: SpreadContext<'_, S>,
    cfg: &CalibrationConfig<S>,
    skipped_events: &mut Vec<String>,
) -> Result<SpreadSummary<S>> {
    let SpreadContext {
        grid,
        idx,
        spread,
        two_sided,
        spec,
        demand,
        avg_trade_size,
        amd,
        buckets,
        recon,
        events,
        market,
    } = ctx;

    let bid_series: Vec<S> = grid
        .rows
        .iter()
        .map(|r| r.depths[idx].bid_depth_usd)
        .collect();
    let ask_series: Vec<S> = grid
        .rows
        .iter()
        .map(|r| r.depths[idx].ask_depth_usd)
        .collect();

    let mut densities = (Vec::new(), Vec::new());
    let mut rlqs = (Vec::new(), Vec::new());
    for book in two_sided {
        densities
            .0
            .push(spread_density(book, spec, spread, BookSide::Bid)?.density);
        densities
            .1
            .push(spread_density(book, spec, spread, BookSide::Ask)?.density);
        rlqs.0
            .push(relative_liquidity(book, spread, BookSide::Bid, spec.tick_size)?.rlq);
        rlqs.1
            .push(relative_liquidity(book, spread, BookSide::Ask, spec.tick_size)?.rlq);
    }
    let mean_bid_density = mean_or_zero(&densities.0);
    let mean_ask_density = mean_or_zero(&densities.1);
    let mean_bid_rlq = mean_or_zero(&rlqs.0);
    let mean_ask_rlq = mean_or_zero(&rlqs.1);

    let c2 = condition2_depth(grid, demand, spread, cfg.condition2_statistic)?;
    let adf_bid = stationarity(&bid_series, cfg);
    let adf_ask = stationarity(&ask_series, cfg);

    let mut profiles = Vec::new();
    for event in events {
        match event_depth_profile(grid, recon, event, spread, market) {
            Ok(p) => profiles.push(p),
            Err(Error::SeriesGaps { .. }) => skipped_events.push(event.name.clone()),
            Err(e) => return Err(e),
        }
    }
    let event_breaches = profiles.iter().map(|p| p.summary.breach_count).sum();

    let insufficiency_pct =
        match insufficiency_percentage(grid, buckets, spread, cfg.volume_coverage_fraction) {
            Ok(p) => Some(p),
            Err(Error::NoOverlap) => None,
            Err(e) => return Err(e),
        };

    let verdicts = SpreadVerdicts {
        c1_tick: condition1_tick(spec, spread),
        c2_mean_depth: c2.pass,
        c3_stationary: adf_bid.passes() && adf_ask.passes(),
        c4_event_adequate: condition4_event_adequacy(&profiles, cfg.event_breach_tolerance),
        sd_condition: mean_bid_density > avg_trade_size && mean_ask_density > avg_trade_size,
        rlq_condition: mean_bid_rlq > amd.0 && mean_ask_rlq > amd.1,
    };
    let means = grid.mean_depths()[idx];
    Ok(SpreadSummary {
        spread_bps: spread,
        mean_bid_depth: means.bid_depth_usd,
        mean_ask_depth: means.ask_depth_usd,
        mean_bid_density,
        mean_ask_density,
        mean_bid_rlq,
        mean_ask_rlq,
        insufficiency_pct,
        adf_bid,
        adf_ask,
        event_breaches,
        c2_vacuous: c2.vacuous,
        verdicts,
    })
}

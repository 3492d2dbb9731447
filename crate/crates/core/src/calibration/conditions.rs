use std::collections::BTreeMap;

use serde::Serialize;

use super::config::DemandStatistic;
use crate::error::{Error, Result};
use crate::liquidity_metrics::DepthGrid;
use crate::market_data::{MarketSpec, MinuteBucket, MinuteKey, SideDepth};
use crate::reconstruction::ReconstructedBook;
use crate::scalar::Scalar;
use crate::stats;

/// A spread is admissible when it is wider than one tick:
/// `index_price × spread_bps / 10⁴ > tick_size`.
pub fn condition1_tick<S: Scalar>(spec: &MarketSpec<S>, spread_bps: S) -> bool {
    spec.index_price * spread_bps / S::bps_scale() > spec.tick_size
}

/// Per-minute demand on each side over trade-active minutes.
///
/// Bid-side demand comes from SELL flow, ask-side demand from BUY flow.
#[derive(Debug, Clone, PartialEq)]
pub struct DemandProfile<S> {
    pub bid: Vec<S>,
    pub ask: Vec<S>,
}

impl<S: Scalar> DemandProfile<S> {
    pub fn from_recon(recon: &[ReconstructedBook<S>]) -> Self {
        Self {
            bid: recon.iter().map(|r| r.bid_notional).collect(),
            ask: recon.iter().map(|r| r.ask_notional).collect(),
        }
    }

    pub fn from_buckets(buckets: &BTreeMap<MinuteKey, MinuteBucket<S>>) -> Self {
        Self {
            bid: buckets.values().map(|b| b.sell_notional).collect(),
            ask: buckets.values().map(|b| b.buy_notional).collect(),
        }
    }

    pub fn active_minutes(&self) -> usize {
        self.bid.len()
    }

    /// `(bid, ask)` demand under `statistic`; `None` without active minutes.
    pub fn threshold(&self, statistic: DemandStatistic) -> Option<(S, S)> {
        let f = |v: &[S]| match statistic {
            DemandStatistic::Mean => stats::mean(v),
            DemandStatistic::P95 => stats::p95(v),
            DemandStatistic::Max => stats::max(v),
        };
        Some((f(&self.bid)?, f(&self.ask)?))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Condition2 {
    pub pass: bool,
    /// Set when there was no trade-active minute to compare against.
    pub vacuous: bool,
}

/// Mean book depth at `spread_bps` against per-minute demand.
pub fn condition2_depth<S: Scalar>(
    grid: &DepthGrid<S>,
    demand: &DemandProfile<S>,
    spread_bps: S,
    statistic: DemandStatistic,
) -> Result<Condition2> {
    let idx = grid.spread_index(spread_bps).ok_or_else(|| {
        Error::Validation(format!("spread {spread_bps} bps is not in the depth grid"))
    })?;
    let Some((bid_demand, ask_demand)) = demand.threshold(statistic) else {
        log::warn!("condition 2 at {spread_bps} bps: no trade-active minutes, passing vacuously");
        return Ok(Condition2 {
            pass: true,
            vacuous: true,
        });
    };
    let mean = grid.mean_depths()[idx];
    Ok(Condition2 {
        pass: mean.bid_depth_usd >= bid_demand && mean.ask_depth_usd >= ask_demand,
        vacuous: false,
    })
}

/// Percent of overlapping minutes where either side holds less than
/// `coverage_fraction` of that minute's total traded notional.
pub fn insufficiency_percentage<S: Scalar>(
    grid: &DepthGrid<S>,
    minute_volumes: &BTreeMap<MinuteKey, MinuteBucket<S>>,
    spread_bps: S,
    coverage_fraction: S,
) -> Result<S> {
    let idx = grid.spread_index(spread_bps).ok_or_else(|| {
        Error::Validation(format!("spread {spread_bps} bps is not in the depth grid"))
    })?;
    let mut overlap = 0i64;
    let mut failing = 0i64;
    for row in &grid.rows {
        let Some(bucket) = minute_volumes.get(&row.key()) else {
            continue;
        };
        overlap += 1;
        let need = coverage_fraction * bucket.volume();
        let SideDepth {
            bid_depth_usd,
            ask_depth_usd,
        } = row.depths[idx];
        if bid_depth_usd < need || ask_depth_usd < need {
            failing += 1;
        }
    }
    if overlap == 0 {
        return Err(Error::NoOverlap);
    }
    Ok(S::from_int(failing) * S::from_int(100) / S::from_int(overlap))
}

/// Row key for a widened re-test: spread in percent, e.g. `CELO-USD_0.4`.
pub fn retest_key<S: Scalar>(market: &str, spread_bps: S) -> String {
    let pct = (spread_bps / S::from_int(100)).to_string();
    let pct = if pct.contains('.') {
        pct.trim_end_matches('0').trim_end_matches('.')
    } else {
        pct.as_str()
    };
    format!("{market}_{pct}")
}

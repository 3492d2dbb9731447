//! Per-snapshot and per-period liquidity measures: tick constraint, spread
//! density, relative liquidity (RLQ), depth grids and trade-size statistics.

use std::collections::BTreeMap;

use chrono::{DateTime, NaiveDate, Utc};

use crate::error::{Error, Result};
use crate::market_data::{
    compute_mid, depth_within_spread, format_minute, spread_bounds, BookSide, MarketSpec,
    MinuteBucket, MinuteKey, OrderBookSnapshot, SideDepth, TradeRecord,
};
use crate::scalar::Scalar;
use crate::stats;

/// One tick as a percentage of the index price (`× 100` again for bps).
pub fn min_tick_bps<S: Scalar>(spec: &MarketSpec<S>) -> S {
    spec.tick_size / spec.index_price * S::from_int(100)
}

/// USD depth per tick level within a spread band.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadDensity<S> {
    pub side: BookSide,
    pub spread_bps: S,
    pub depth_usd: S,
    pub tick_levels: u64,
    pub density: S,
}

/// Spread density on one side.
///
/// `tick_levels = floor(mid × spread_bps / 10⁴ / tick_size)`, clamped to 1
/// when the band holds depth but is narrower than a tick.
pub fn spread_density<S: Scalar>(
    book: &OrderBookSnapshot<S>,
    spec: &MarketSpec<S>,
    spread_bps: S,
    side: BookSide,
) -> Result<SpreadDensity<S>> {
    let mid = compute_mid(book)?;
    let depth = depth_within_spread(book, spread_bps)?;
    let depth_usd = match side {
        BookSide::Bid => depth.bid_depth_usd,
        BookSide::Ask => depth.ask_depth_usd,
    };
    let width = mid * spread_bps / S::bps_scale();
    let mut tick_levels = (width / spec.tick_size).floor().to_u64().unwrap_or(0);
    let density = if depth_usd > S::zero() {
        tick_levels = tick_levels.max(1);
        depth_usd / S::from_int(tick_levels as i64)
    } else {
        S::zero()
    };
    Ok(SpreadDensity {
        side,
        spread_bps,
        depth_usd,
        tick_levels,
        density,
    })
}

/// Depth weighted by its own empirical distribution over tick distances.
#[derive(Debug, Clone, PartialEq)]
pub struct RelativeLiquidity<S> {
    pub side: BookSide,
    pub spread_bps: S,
    /// `(tick_distance, probability)` ascending by distance.
    pub weights: Vec<(i64, S)>,
    pub rlq: S,
}

/// In-range notional per tick distance from the best price on `side`.
pub fn liquidity_by_tick_distance<S: Scalar>(
    book: &OrderBookSnapshot<S>,
    spread_bps: S,
    side: BookSide,
    tick_size: S,
) -> Result<BTreeMap<i64, S>> {
    let mid = compute_mid(book)?;
    let (lower, upper) = spread_bounds(mid, spread_bps);
    let levels = book.side(side);
    let best = levels[0].price;
    let mut by_tick: BTreeMap<i64, S> = BTreeMap::new();
    for level in levels {
        let (in_range, distance) = match side {
            BookSide::Bid => (level.price >= lower, best - level.price),
            BookSide::Ask => (level.price <= upper, level.price - best),
        };
        if !in_range {
            break;
        }
        let ticks = (distance / tick_size).round().to_i64().unwrap_or(i64::MAX);
        let slot = by_tick.entry(ticks).or_insert_with(S::zero);
        *slot = *slot + level.notional();
    }
    Ok(by_tick)
}

/// RLQ = Σ prob_i × liquidity_i, prob_i = liquidity_i / Σ liquidity.
pub fn relative_liquidity<S: Scalar>(
    book: &OrderBookSnapshot<S>,
    spread_bps: S,
    side: BookSide,
    tick_size: S,
) -> Result<RelativeLiquidity<S>> {
    let by_tick = liquidity_by_tick_distance(book, spread_bps, side, tick_size)?;
    let total: S = by_tick.values().copied().sum();
    if total <= S::zero() {
        return Ok(RelativeLiquidity {
            side,
            spread_bps,
            weights: Vec::new(),
            rlq: S::zero(),
        });
    }
    let weights: Vec<(i64, S)> = by_tick.iter().map(|(&t, &liq)| (t, liq / total)).collect();
    let rlq = weights
        .iter()
        .zip(by_tick.values())
        .map(|(&(_, p), &liq)| p * liq)
        .sum();
    Ok(RelativeLiquidity {
        side,
        spread_bps,
        weights,
        rlq,
    })
}

/// Trade-size thresholds reported by [`trade_statistics`], in USD.
pub const TRADE_SIZE_THRESHOLDS: [i64; 5] = [50_000, 100_000, 250_000, 500_000, 1_500_000];

/// Trade-size statistics for one market-day.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeStats<S> {
    pub market: String,
    pub day: NaiveDate,
    pub trade_count: usize,
    pub mean_notional: S,
    pub std_notional: S,
    pub max_notional: S,
    /// `(threshold, trades with notional strictly above it)`, ascending.
    pub counts_above: Vec<(S, usize)>,
    /// p95 of per-minute BUY notional: demand on the ask side.
    pub p95_minute_ask_demand: S,
    /// p95 of per-minute SELL notional: demand on the bid side.
    pub p95_minute_bid_demand: S,
    /// p95 of individual trade notionals.
    pub p95_trade_notional: S,
}

impl<S: Scalar> TradeStats<S> {
    pub fn count_above(&self, threshold: S) -> Option<usize> {
        self.counts_above
            .iter()
            .find(|(t, _)| *t == threshold)
            .map(|&(_, c)| c)
    }
}

fn day_of(ts: DateTime<Utc>) -> NaiveDate {
    ts.date_naive()
}

/// Notional statistics per `(market, day)`; days without trades are absent.
///
/// Demand percentiles run over the trade-active minutes of that day only.
pub fn trade_statistics<S: Scalar>(
    trades: &[TradeRecord<S>],
    minute_buckets: &BTreeMap<MinuteKey, MinuteBucket<S>>,
) -> Vec<TradeStats<S>> {
    let mut notionals: BTreeMap<(String, NaiveDate), Vec<S>> = BTreeMap::new();
    for t in trades {
        notionals
            .entry((t.market.clone(), day_of(t.created_at)))
            .or_default()
            .push(t.notional());
    }
    let mut demand: BTreeMap<(String, NaiveDate), (Vec<S>, Vec<S>)> = BTreeMap::new();
    for (key, bucket) in minute_buckets {
        let (buys, sells) = demand
            .entry((key.market.clone(), day_of(key.minute)))
            .or_default();
        buys.push(bucket.buy_notional);
        sells.push(bucket.sell_notional);
    }

    notionals
        .into_iter()
        .map(|((market, day), values)| {
            let counts_above = TRADE_SIZE_THRESHOLDS
                .iter()
                .map(|&t| {
                    let t = S::from_int(t);
                    (t, values.iter().filter(|&&v| v > t).count())
                })
                .collect();
            let (buys, sells) = demand
                .get(&(market.clone(), day))
                .cloned()
                .unwrap_or_default();
            TradeStats {
                trade_count: values.len(),
                mean_notional: stats::mean(&values).unwrap_or_else(S::zero),
                std_notional: stats::population_std(&values).unwrap_or_else(S::zero),
                max_notional: stats::max(&values).unwrap_or_else(S::zero),
                counts_above,
                p95_minute_ask_demand: stats::p95(&buys).unwrap_or_else(S::zero),
                p95_minute_bid_demand: stats::p95(&sells).unwrap_or_else(S::zero),
                p95_trade_notional: stats::p95(&values).unwrap_or_else(S::zero),
                market,
                day,
            }
        })
        .collect()
}

/// One snapshot's depths across the spread grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridRow<S> {
    pub market: String,
    pub minute: DateTime<Utc>,
    /// Parallel to [`DepthGrid::spreads_bps`].
    pub depths: Vec<SideDepth<S>>,
    /// Set when the book lacked a side; depths are then zero.
    pub one_sided: bool,
}

impl<S: Scalar> GridRow<S> {
    pub fn key(&self) -> MinuteKey {
        MinuteKey::new(self.market.clone(), self.minute)
    }
}

/// Minute × spread table of bid/ask depth.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthGrid<S> {
    pub spreads_bps: Vec<S>,
    pub rows: Vec<GridRow<S>>,
}

pub fn validate_spreads<S: Scalar>(spreads_bps: &[S]) -> Result<()> {
    if spreads_bps.is_empty() {
        return Err(Error::Validation("spread list is empty".into()));
    }
    if spreads_bps.iter().any(|&s| s <= S::zero()) {
        return Err(Error::Validation("spreads must be positive".into()));
    }
    if spreads_bps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Validation(
            "spreads must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Depth of every snapshot at every spread in `spreads_bps`.
pub fn depth_grid<S: Scalar>(
    books: &[OrderBookSnapshot<S>],
    spreads_bps: &[S],
) -> Result<DepthGrid<S>> {
    validate_spreads(spreads_bps)?;
    let rows = books
        .iter()
        .map(|book| {
            let one_sided = book.bids.is_empty() || book.asks.is_empty();
            let depths = if one_sided {
                vec![SideDepth::zero(); spreads_bps.len()]
            } else {
                spreads_bps
                    .iter()
                    .map(|&s| depth_within_spread(book, s))
                    .collect::<Result<Vec<_>>>()?
            };
            Ok(GridRow {
                market: book.market.clone(),
                minute: book.ts,
                depths,
                one_sided,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DepthGrid {
        spreads_bps: spreads_bps.to_vec(),
        rows,
    })
}

impl<S: Scalar> DepthGrid<S> {
    pub fn spread_index(&self, spread_bps: S) -> Option<usize> {
        self.spreads_bps.iter().position(|&s| s == spread_bps)
    }

    /// Per-minute depth at one grid spread, keyed by minute.
    pub fn series(&self, spread_idx: usize) -> BTreeMap<MinuteKey, SideDepth<S>> {
        self.rows
            .iter()
            .map(|r| (r.key(), r.depths[spread_idx]))
            .collect()
    }

    /// Column means over all rows, one entry per spread.
    pub fn mean_depths(&self) -> Vec<SideDepth<S>> {
        (0..self.spreads_bps.len())
            .map(|i| {
                let bids: Vec<S> = self
                    .rows
                    .iter()
                    .map(|r| r.depths[i].bid_depth_usd)
                    .collect();
                let asks: Vec<S> = self
                    .rows
                    .iter()
                    .map(|r| r.depths[i].ask_depth_usd)
                    .collect();
                SideDepth {
                    bid_depth_usd: stats::mean(&bids).unwrap_or_else(S::zero),
                    ask_depth_usd: stats::mean(&asks).unwrap_or_else(S::zero),
                }
            })
            .collect()
    }

    /// Rows restricted to one market.
    pub fn for_market(&self, market: &str) -> DepthGrid<S> {
        DepthGrid {
            spreads_bps: self.spreads_bps.clone(),
            rows: self
                .rows
                .iter()
                .filter(|r| r.market == market)
                .cloned()
                .collect(),
        }
    }

    /// CSV with columns `minute, bid_<bps>, ask_<bps>, …`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("minute");
        for s in &self.spreads_bps {
            out.push_str(&format!(",bid_{s},ask_{s}"));
        }
        out.push('\n');
        for row in &self.rows {
            out.push_str(&format_minute(row.minute));
            for d in &row.depths {
                out.push_str(&format!(",{},{}", d.bid_depth_usd, d.ask_depth_usd));
            }
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use chrono::TimeZone;
    use rust_decimal::Decimal;
    use rust_decimal_macros::dec;

    use super::*;
    use crate::market_data::{PriceLevel, TradeSide};

    fn ts() -> DateTime<Utc> {
        Utc.with_ymd_and_hms(2023, 5, 11, 0, 0, 0).unwrap()
    }

    fn book(
        bids: &[(Decimal, Decimal)],
        asks: &[(Decimal, Decimal)],
    ) -> OrderBookSnapshot<Decimal> {
        let lv = |v: &[(Decimal, Decimal)]| {
            v.iter()
                .map(|&(p, s)| PriceLevel::new(p, s).unwrap())
                .collect()
        };
        OrderBookSnapshot::new("TEST-USD", ts(), lv(bids), lv(asks)).unwrap()
    }

    fn spec(tick: Decimal, price: Decimal) -> MarketSpec<Decimal> {
        MarketSpec::new("TEST-USD", tick, price, 40).unwrap()
    }

    #[test]
    fn min_tick_examples() {
        let etc = min_tick_bps(&spec(dec!(0.01), dec!(18.3297)));
        assert!((etc - dec!(0.055)).abs() <= dec!(0.001));
        let uma = min_tick_bps(&spec(dec!(0.01), dec!(2.3360)));
        assert_eq!(uma.round_dp(3), dec!(0.428));
        let btc = min_tick_bps(&spec(dec!(1.0), dec!(27369)));
        assert_eq!(btc.round_dp(4), dec!(0.0037));
    }

    #[test]
    fn spread_density_examples() {
        // mid 100, bid depth 5000 USD inside 10 bps
        let b = book(
            &[(dec!(99.95), dec!(5000) / dec!(99.95))],
            &[(dec!(100.05), dec!(1))],
        );
        let sd = spread_density(&b, &spec(dec!(0.01), dec!(100)), dec!(10), BookSide::Bid).unwrap();
        assert_eq!(sd.tick_levels, 10);
        assert!((sd.density - dec!(500)).abs() < dec!(1e-20));

        // nothing within 1 bp
        let sd = spread_density(&b, &spec(dec!(0.01), dec!(100)), dec!(1), BookSide::Bid).unwrap();
        assert_eq!(sd.depth_usd, dec!(0));
        assert_eq!(sd.density, dec!(0));

        // band narrower than one tick but a level sits inside it
        let b = book(&[(dec!(99.999), dec!(2))], &[(dec!(100.001), dec!(2))]);
        let sd =
            spread_density(&b, &spec(dec!(0.01), dec!(100)), dec!(0.5), BookSide::Ask).unwrap();
        assert_eq!(sd.tick_levels, 1);
        assert_eq!(sd.density, sd.depth_usd);
    }

    #[test]
    fn rlq_examples() {
        // single tick
        let b = book(&[(dec!(99.95), dec!(10))], &[(dec!(100.05), dec!(10))]);
        let r = relative_liquidity(&b, dec!(10), BookSide::Bid, dec!(0.01)).unwrap();
        assert_eq!(r.weights, vec![(0, dec!(1))]);
        assert_eq!(r.rlq, dec!(999.5));

        // 100 and 300 USD at two ticks
        let b = book(
            &[(dec!(100), dec!(1)), (dec!(99), dec!(300) / dec!(99))],
            &[(dec!(101), dec!(1))],
        );
        let r = relative_liquidity(&b, dec!(500), BookSide::Bid, dec!(1)).unwrap();
        assert_eq!(r.weights[0], (0, dec!(0.25)));
        assert_eq!(r.weights[1].0, 1);
        assert!((r.rlq - dec!(250)).abs() < dec!(1e-20));

        // nothing in range
        let b = book(&[(dec!(90), dec!(1))], &[(dec!(110), dec!(1))]);
        let r = relative_liquidity(&b, dec!(1), BookSide::Ask, dec!(1)).unwrap();
        assert!(r.weights.is_empty());
        assert_eq!(r.rlq, dec!(0));
    }

    #[test]
    fn rlq_uniform_volume_is_that_volume() {
        let asks: Vec<_> = (0..4)
            .map(|i| {
                (
                    dec!(100) + Decimal::from(i),
                    dec!(50) / (dec!(100) + Decimal::from(i)),
                )
            })
            .collect();
        let b = book(&[(dec!(99), dec!(1))], &asks);
        let r = relative_liquidity(&b, dec!(1000), BookSide::Ask, dec!(1)).unwrap();
        assert_eq!(r.weights.len(), 4);
        assert!((r.rlq - dec!(50)).abs() < dec!(1e-20));
    }

    fn sol_trades() -> Vec<TradeRecord<Decimal>> {
        let rows = [
            (
                TradeSide::Buy,
                dec!(14087.6),
                dec!(20.054),
                "2023-05-23T16:38:45.563Z",
            ),
            (
                TradeSide::Buy,
                dec!(10486.5),
                dec!(20.054),
                "2023-05-23T16:38:37.680Z",
            ),
            (
                TradeSide::Buy,
                dec!(29260.0),
                dec!(20.059),
                "2023-05-23T16:37:47.530Z",
            ),
            (
                TradeSide::Buy,
                dec!(19506.7),
                dec!(20.045),
                "2023-05-23T16:36:38.840Z",
            ),
            (
                TradeSide::Sell,
                dec!(5428.0),
                dec!(19.97),
                "2023-05-23T03:00:55.158Z",
            ),
        ];
        rows.iter()
            .map(|&(side, size, price, ts)| {
                let ts = crate::market_data::parse_timestamp(ts).unwrap();
                TradeRecord::new("SOL-USD", side, size, price, ts, false).unwrap()
            })
            .collect()
    }

    #[test]
    fn sol_day_statistics() {
        let trades = sol_trades();
        let buckets = crate::market_data::bucket_trades_per_minute(&trades);
        let stats = trade_statistics(&trades, &buckets);
        assert_eq!(stats.len(), 1);
        let s = &stats[0];
        assert_eq!(s.count_above(dec!(500000)), Some(1));
        assert_eq!(s.count_above(dec!(100000)), Some(5));
        assert_eq!(s.max_notional, dec!(586926.34));
        assert!(s.counts_above.windows(2).all(|w| w[0].1 >= w[1].1));
        let minute_1638 = buckets
            .iter()
            .find(|(k, _)| k.minute.format("%H:%M").to_string() == "16:38")
            .unwrap()
            .1;
        assert_eq!(minute_1638.buy_notional, dec!(492809.0014));
    }

    #[test]
    fn trade_statistics_small_cases() {
        let t =
            |n: Decimal| TradeRecord::new("X", TradeSide::Buy, n, dec!(1), ts(), false).unwrap();
        let one = vec![t(dec!(1234))];
        let s = &trade_statistics(&one, &crate::market_data::bucket_trades_per_minute(&one))[0];
        assert_eq!(
            (s.mean_notional, s.std_notional, s.max_notional),
            (dec!(1234), dec!(0), dec!(1234))
        );
        let two = vec![t(dec!(100000)), t(dec!(300000))];
        let s = &trade_statistics(&two, &crate::market_data::bucket_trades_per_minute(&two))[0];
        assert_eq!(s.mean_notional, dec!(200000));
        assert_eq!(s.std_notional, dec!(100000));
        assert!(trade_statistics::<Decimal>(&[], &BTreeMap::new()).is_empty());
    }

    #[test]
    fn grid_shapes() {
        let b = book(
            &[(dec!(99.95), dec!(10)), (dec!(99.8), dec!(10))],
            &[(dec!(100.05), dec!(10))],
        );
        let g = depth_grid(std::slice::from_ref(&b), &[dec!(10), dec!(20)]).unwrap();
        assert_eq!(g.rows.len(), 1);
        let d = &g.rows[0].depths;
        assert!(
            d[0].bid_depth_usd <= d[1].bid_depth_usd && d[0].ask_depth_usd <= d[1].ask_depth_usd
        );
        assert!(depth_grid::<Decimal>(&[], &[dec!(10)])
            .unwrap()
            .rows
            .is_empty());
        assert!(depth_grid(std::slice::from_ref(&b), &[dec!(20), dec!(10)]).is_err());
        assert!(depth_grid(&[b], &[]).is_err());

        let one_sided = book(&[(dec!(99.95), dec!(10))], &[]);
        let g = depth_grid(&[one_sided], &[dec!(10)]).unwrap();
        assert!(g.rows[0].one_sided);
        assert_eq!(g.rows[0].depths[0], SideDepth::zero());
    }

    #[test]
    fn grid_csv_column_order() {
        let b = book(&[(dec!(99.95), dec!(10))], &[(dec!(100.05), dec!(10))]);
        let g = depth_grid(&[b], &[dec!(10), dec!(20)]).unwrap();
        let csv = g.to_csv();
        assert_eq!(
            csv.lines().next().unwrap(),
            "minute,bid_10,ask_10,bid_20,ask_20"
        );
        assert_eq!(
            csv.lines().nth(1).unwrap(),
            "2023-05-11T00:00:00Z,999.50,1000.50,999.50,1000.50"
        );
    }
}

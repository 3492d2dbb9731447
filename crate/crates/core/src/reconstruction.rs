//! Per-minute synthetic books rebuilt from the trade tape.
//!
//! Taker BUYs consumed ask-side liquidity, so they accrue on the ask side at
//! their trade price; SELLs accrue on the bid side. Each minute starts from an
//! empty book. The resulting notionals are the depth each side must have
//! carried to absorb that minute's flow.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::liquidity_metrics::DepthGrid;
use crate::market_data::{
    format_minute, normalize_side, round_to_minute, truncate_to_minute, MinuteKey, PriceLevel,
    TradeRecord, TradeSide,
};
use crate::scalar::Scalar;
use crate::stats;

/// How a trade timestamp maps onto a minute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MinuteAssignment {
    /// Containing minute.
    #[default]
    Truncate,
    /// Nearest minute, :30 rounding up.
    Nearest,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReconstructionOptions {
    pub minute_mode: MinuteAssignment,
    pub include_liquidations: bool,
}

impl Default for ReconstructionOptions {
    fn default() -> Self {
        Self {
            minute_mode: MinuteAssignment::Truncate,
            include_liquidations: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructedBook<S> {
    pub key: MinuteKey,
    /// Descending by price; built from SELL trades.
    pub bid_levels: Vec<PriceLevel<S>>,
    /// Ascending by price; built from BUY trades.
    pub ask_levels: Vec<PriceLevel<S>>,
    pub bid_notional: S,
    pub ask_notional: S,
    pub trade_count: usize,
}

pub fn reconstruct_minute_books<S: Scalar>(
    trades: &[TradeRecord<S>],
    opts: ReconstructionOptions,
) -> Vec<ReconstructedBook<S>> {
    type Sides<S> = (Vec<PriceLevel<S>>, Vec<PriceLevel<S>>);
    let mut grouped: BTreeMap<MinuteKey, Sides<S>> = BTreeMap::new();
    for trade in trades {
        if trade.liquidation && !opts.include_liquidations {
            continue;
        }
        let minute = match opts.minute_mode {
            MinuteAssignment::Truncate => truncate_to_minute(trade.created_at),
            MinuteAssignment::Nearest => round_to_minute(trade.created_at),
        };
        let (bids, asks) = grouped
            .entry(MinuteKey::new(trade.market.clone(), minute))
            .or_default();
        let level = PriceLevel {
            price: trade.price,
            size: trade.size,
        };
        match trade.side {
            TradeSide::Buy => asks.push(level),
            TradeSide::Sell => bids.push(level),
        }
    }
    grouped
        .into_iter()
        .map(|(key, (bids, asks))| {
            let trade_count = bids.len() + asks.len();
            let bid_levels = normalize_side(bids, true);
            let ask_levels = normalize_side(asks, false);
            ReconstructedBook {
                bid_notional: bid_levels.iter().map(PriceLevel::notional).sum(),
                ask_notional: ask_levels.iter().map(PriceLevel::notional).sum(),
                key,
                bid_levels,
                ask_levels,
                trade_count,
            }
        })
        .collect()
}

/// Recon series as CSV: `minute,bid_notional,ask_notional,level_count_bid,level_count_ask`.
pub fn recon_to_csv<S: Scalar>(recon: &[ReconstructedBook<S>]) -> String {
    let mut out =
        String::from("minute,bid_notional,ask_notional,level_count_bid,level_count_ask\n");
    for r in recon {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            format_minute(r.key.minute),
            r.bid_notional,
            r.ask_notional,
            r.bid_levels.len(),
            r.ask_levels.len()
        ));
    }
    out
}

/// Summary of per-minute required depth over trade-active minutes.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct DepthRequirement<S> {
    pub avg_depth_bid: S,
    pub avg_depth_ask: S,
    pub median_depth_bid: S,
    pub median_depth_ask: S,
    pub max_depth_bid: S,
    pub max_depth_ask: S,
    pub ninetyfive_depth_ask: S,
    pub ninetyfive_depth_bid: S,
}

impl<S: Scalar> DepthRequirement<S> {
    pub const CSV_HEADER: &'static str =
        "avg_depth_bid,avg_depth_ask,median_depth_bid,median_depth_ask,\
max_depth_bid,max_depth_ask,ninetyfive_depth_ask,ninetyfive_depth_bid";

    pub fn csv_fields(&self) -> [S; 8] {
        [
            self.avg_depth_bid,
            self.avg_depth_ask,
            self.median_depth_bid,
            self.median_depth_ask,
            self.max_depth_bid,
            self.max_depth_ask,
            self.ninetyfive_depth_ask,
            self.ninetyfive_depth_bid,
        ]
    }
}

pub fn estimated_depth_required<S: Scalar>(
    recon: &[ReconstructedBook<S>],
) -> Result<DepthRequirement<S>> {
    if recon.is_empty() {
        return Err(Error::NoTradeActiveMinutes);
    }
    let bids: Vec<S> = recon.iter().map(|r| r.bid_notional).collect();
    let asks: Vec<S> = recon.iter().map(|r| r.ask_notional).collect();
    let zero = S::zero;
    Ok(DepthRequirement {
        avg_depth_bid: stats::mean(&bids).unwrap_or_else(zero),
        avg_depth_ask: stats::mean(&asks).unwrap_or_else(zero),
        median_depth_bid: stats::median(&bids).unwrap_or_else(zero),
        median_depth_ask: stats::median(&asks).unwrap_or_else(zero),
        max_depth_bid: stats::max(&bids).unwrap_or_else(zero),
        max_depth_ask: stats::max(&asks).unwrap_or_else(zero),
        ninetyfive_depth_ask: stats::p95(&asks).unwrap_or_else(zero),
        ninetyfive_depth_bid: stats::p95(&bids).unwrap_or_else(zero),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdequacyRow<S> {
    pub key: MinuteKey,
    pub book_bid: S,
    pub book_ask: S,
    pub required_bid: S,
    pub required_ask: S,
    pub adequate: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdequacySeries<S> {
    pub rows: Vec<AdequacyRow<S>>,
    /// Minutes present in only one of the two sources.
    pub skipped: usize,
}

/// Book depth at `spread_bps` against reconstructed demand, minute by minute.
///
/// With `zero_fill`, book minutes without trades count as zero demand instead
/// of being skipped.
pub fn depth_adequacy_series<S: Scalar>(
    grid: &DepthGrid<S>,
    recon: &[ReconstructedBook<S>],
    spread_bps: S,
    zero_fill: bool,
) -> Result<AdequacySeries<S>> {
    let idx = grid.spread_index(spread_bps).ok_or_else(|| {
        Error::Validation(format!("spread {spread_bps} bps is not in the depth grid"))
    })?;
    let book = grid.series(idx);
    let required: BTreeMap<&MinuteKey, &ReconstructedBook<S>> =
        recon.iter().map(|r| (&r.key, r)).collect();

    let mut rows = Vec::new();
    let mut skipped = 0;
    for (key, depth) in &book {
        let (required_bid, required_ask) = match required.get(key) {
            Some(r) => (r.bid_notional, r.ask_notional),
            None if zero_fill => (S::zero(), S::zero()),
            None => {
                skipped += 1;
                continue;
            }
        };
        rows.push(AdequacyRow {
            key: key.clone(),
            book_bid: depth.bid_depth_usd,
            book_ask: depth.ask_depth_usd,
            required_bid,
            required_ask,
            adequate: depth.bid_depth_usd >= required_bid && depth.ask_depth_usd >= required_ask,
        });
    }
    skipped += recon.iter().filter(|r| !book.contains_key(&r.key)).count();
    if rows.is_empty() {
        return Err(Error::NoOverlap);
    }
    Ok(AdequacySeries { rows, skipped })
}

#[cfg(test)]
mod tests {
    use chrono::{TimeZone, Utc};
    use rust_decimal::Decimal;
    use rust_decimal_macros::dec;

    use super::*;
    use crate::liquidity_metrics::GridRow;
    use crate::market_data::SideDepth;

    fn trade(
        side: TradeSide,
        size: Decimal,
        price: Decimal,
        h: u32,
        m: u32,
        s: u32,
    ) -> TradeRecord<Decimal> {
        let ts = Utc.with_ymd_and_hms(2023, 5, 23, h, m, s).unwrap();
        TradeRecord::new("T-USD", side, size, price, ts, false).unwrap()
    }

    #[test]
    fn single_buy_goes_to_ask() {
        let r = reconstruct_minute_books(
            &[trade(TradeSide::Buy, dec!(2), dec!(10), 12, 0, 30)],
            Default::default(),
        );
        assert_eq!(r.len(), 1);
        assert_eq!(
            r[0].key.minute,
            Utc.with_ymd_and_hms(2023, 5, 23, 12, 0, 0).unwrap()
        );
        assert_eq!(
            r[0].ask_levels,
            vec![PriceLevel {
                price: dec!(10),
                size: dec!(2)
            }]
        );
        assert_eq!(r[0].ask_notional, dec!(20));
        assert!(r[0].bid_levels.is_empty());
    }

    #[test]
    fn same_price_accumulates() {
        let r = reconstruct_minute_books(
            &[
                trade(TradeSide::Buy, dec!(1), dec!(10), 12, 0, 1),
                trade(TradeSide::Buy, dec!(3), dec!(10), 12, 0, 59),
            ],
            Default::default(),
        );
        assert_eq!(r[0].ask_levels.len(), 1);
        assert_eq!(r[0].ask_levels[0].size, dec!(4));
    }

    #[test]
    fn sol_pair_minute() {
        let r = reconstruct_minute_books(
            &[
                trade(TradeSide::Buy, dec!(14087.6), dec!(20.054), 16, 38, 45),
                trade(TradeSide::Buy, dec!(10486.5), dec!(20.054), 16, 38, 37),
            ],
            Default::default(),
        );
        assert_eq!(r[0].ask_notional, dec!(492809.0014));
    }

    #[test]
    fn nearest_minute_mode_and_liquidation_filter() {
        let mut t = trade(TradeSide::Sell, dec!(1), dec!(10), 12, 0, 45);
        let r = reconstruct_minute_books(
            std::slice::from_ref(&t),
            ReconstructionOptions {
                minute_mode: MinuteAssignment::Nearest,
                include_liquidations: true,
            },
        );
        assert_eq!(
            r[0].key.minute,
            Utc.with_ymd_and_hms(2023, 5, 23, 12, 1, 0).unwrap()
        );
        t.liquidation = true;
        let r = reconstruct_minute_books(
            &[t],
            ReconstructionOptions {
                include_liquidations: false,
                ..Default::default()
            },
        );
        assert!(r.is_empty());
    }

    #[test]
    fn requirement_stats() {
        let r = reconstruct_minute_books(
            &[
                trade(TradeSide::Sell, dec!(10), dec!(10), 12, 0, 0),
                trade(TradeSide::Sell, dec!(30), dec!(10), 12, 1, 0),
            ],
            Default::default(),
        );
        let req = estimated_depth_required(&r).unwrap();
        assert_eq!(req.avg_depth_bid, dec!(200));
        assert_eq!(req.max_depth_bid, dec!(300));
        assert_eq!(req.avg_depth_ask, dec!(0));
        assert_eq!(req.ninetyfive_depth_ask, dec!(0));
        assert!(matches!(
            estimated_depth_required::<Decimal>(&[]),
            Err(Error::NoTradeActiveMinutes)
        ));
        assert_eq!(
            DepthRequirement::<Decimal>::CSV_HEADER,
            "avg_depth_bid,avg_depth_ask,median_depth_bid,median_depth_ask,max_depth_bid,max_depth_ask,ninetyfive_depth_ask,ninetyfive_depth_bid"
        );
    }

    fn grid(rows: &[(u32, Decimal, Decimal)]) -> DepthGrid<Decimal> {
        DepthGrid {
            spreads_bps: vec![dec!(20)],
            rows: rows
                .iter()
                .map(|&(m, b, a)| GridRow {
                    market: "T-USD".into(),
                    minute: Utc.with_ymd_and_hms(2023, 5, 23, 12, m, 0).unwrap(),
                    depths: vec![SideDepth {
                        bid_depth_usd: b,
                        ask_depth_usd: a,
                    }],
                    one_sided: false,
                })
                .collect(),
        }
    }

    #[test]
    fn adequacy_examples() {
        let recon = reconstruct_minute_books(
            &[
                trade(TradeSide::Sell, dec!(50), dec!(10), 12, 0, 0),
                trade(TradeSide::Buy, dec!(40), dec!(10), 12, 0, 0),
                trade(TradeSide::Sell, dec!(50), dec!(10), 12, 1, 0),
                trade(TradeSide::Buy, dec!(40), dec!(10), 12, 1, 0),
                trade(TradeSide::Buy, dec!(40), dec!(10), 12, 5, 0),
            ],
            Default::default(),
        );
        let g = grid(&[
            (0, dec!(1000), dec!(1000)),
            (1, dec!(1000), dec!(300)),
            (2, dec!(1), dec!(1)),
        ]);
        let s = depth_adequacy_series(&g, &recon, dec!(20), false).unwrap();
        assert_eq!(s.rows.len(), 2);
        assert!(s.rows[0].adequate);
        assert!(!s.rows[1].adequate);
        // minute 2 has no trades, minute 5 has no book
        assert_eq!(s.skipped, 2);

        let s = depth_adequacy_series(&g, &recon, dec!(20), true).unwrap();
        assert_eq!(s.rows.len(), 3);
        assert!(s.rows[2].adequate);

        let far = grid(&[(30, dec!(1), dec!(1))]);
        assert!(matches!(
            depth_adequacy_series(&far, &recon, dec!(20), false),
            Err(Error::NoOverlap)
        ));
        assert!(depth_adequacy_series(&g, &recon, dec!(25), false).is_err());
    }

    #[test]
    fn recon_csv_header() {
        let r = reconstruct_minute_books(
            &[trade(TradeSide::Buy, dec!(2), dec!(10), 12, 0, 30)],
            Default::default(),
        );
        assert_eq!(
            recon_to_csv(&r),
            "minute,bid_notional,ask_notional,level_count_bid,level_count_ask\n2023-05-23T12:00:00Z,0,20,0,1\n"
        );
    }
}

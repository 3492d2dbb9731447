use std::collections::BTreeMap;

use super::types::{MinuteKey, OrderBookSnapshot, TradeRecord, TradeSide};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

fn no_mid<S>(book: &OrderBookSnapshot<S>) -> Error {
    Error::NoMidPrice {
        market: book.market.clone(),
        ts: book.ts.to_rfc3339(),
    }
}

/// `(best_bid + best_ask) / 2`.
pub fn compute_mid<S: Scalar>(book: &OrderBookSnapshot<S>) -> Result<S> {
    match (book.best_bid(), book.best_ask()) {
        (Some(b), Some(a)) => Ok((b.price + a.price) / S::from_int(2)),
        _ => Err(no_mid(book)),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuotedSpread<S> {
    pub absolute: S,
    pub bps: S,
}

/// Best ask minus best bid, absolute and in basis points of mid.
pub fn quoted_spread<S: Scalar>(book: &OrderBookSnapshot<S>) -> Result<QuotedSpread<S>> {
    let mid = compute_mid(book)?;
    let (bid, ask) = (book.bids[0].price, book.asks[0].price);
    let absolute = ask - bid;
    Ok(QuotedSpread {
        absolute,
        bps: absolute / mid * S::bps_scale(),
    })
}

/// Quote-currency notional resting on each side within a band around mid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SideDepth<S> {
    pub bid_depth_usd: S,
    pub ask_depth_usd: S,
}

impl<S: Scalar> SideDepth<S> {
    pub fn zero() -> Self {
        Self {
            bid_depth_usd: S::zero(),
            ask_depth_usd: S::zero(),
        }
    }

    pub fn total(&self) -> S {
        self.bid_depth_usd + self.ask_depth_usd
    }
}

/// Price bounds `mid × (1 ∓ spread_bps / 10⁴)`.
pub fn spread_bounds<S: Scalar>(mid: S, spread_bps: S) -> (S, S) {
    let frac = spread_bps / S::bps_scale();
    (mid * (S::one() - frac), mid * (S::one() + frac))
}

/// Depth within `spread_bps` of mid on both sides; levels on a bound count.
pub fn depth_within_spread<S: Scalar>(
    book: &OrderBookSnapshot<S>,
    spread_bps: S,
) -> Result<SideDepth<S>> {
    if spread_bps <= S::zero() {
        return Err(Error::Validation(format!(
            "spread must be positive, got {spread_bps} bps"
        )));
    }
    let mid = compute_mid(book)?;
    let (lower, upper) = spread_bounds(mid, spread_bps);
    // sides are sorted away from the touch, so stop at the first level outside
    let bid_depth_usd = book
        .bids
        .iter()
        .take_while(|l| l.price >= lower)
        .map(|l| l.notional())
        .sum();
    let ask_depth_usd = book
        .asks
        .iter()
        .take_while(|l| l.price <= upper)
        .map(|l| l.notional())
        .sum();
    Ok(SideDepth {
        bid_depth_usd,
        ask_depth_usd,
    })
}

/// Per-minute trade aggregate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinuteBucket<S> {
    pub buy_notional: S,
    pub sell_notional: S,
    pub trade_count: usize,
    pub max_trade_notional: S,
}

impl<S: Scalar> MinuteBucket<S> {
    fn empty() -> Self {
        Self {
            buy_notional: S::zero(),
            sell_notional: S::zero(),
            trade_count: 0,
            max_trade_notional: S::zero(),
        }
    }

    /// buy + sell notional.
    pub fn volume(&self) -> S {
        self.buy_notional + self.sell_notional
    }
}

/// Groups trades by the minute containing `created_at`.
pub fn bucket_trades_per_minute<S: Scalar>(
    trades: &[TradeRecord<S>],
) -> BTreeMap<MinuteKey, MinuteBucket<S>> {
    let mut out: BTreeMap<MinuteKey, MinuteBucket<S>> = BTreeMap::new();
    for trade in trades {
        let bucket = out
            .entry(MinuteKey::new(trade.market.clone(), trade.created_at))
            .or_insert_with(MinuteBucket::empty);
        let notional = trade.notional();
        match trade.side {
            TradeSide::Buy => bucket.buy_notional = bucket.buy_notional + notional,
            TradeSide::Sell => bucket.sell_notional = bucket.sell_notional + notional,
        }
        bucket.trade_count += 1;
        bucket.max_trade_notional = bucket.max_trade_notional.max_of(notional);
    }
    out
}

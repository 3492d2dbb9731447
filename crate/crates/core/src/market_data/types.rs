use std::fmt;

use chrono::{DateTime, DurationRound, TimeDelta, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Truncate a timestamp to the start of its minute.
pub fn truncate_to_minute(ts: DateTime<Utc>) -> DateTime<Utc> {
    ts.duration_trunc(TimeDelta::minutes(1))
        .expect("minute truncation is in range")
}

/// Round a timestamp to the nearest minute, ties (exactly :30) going up.
pub fn round_to_minute(ts: DateTime<Utc>) -> DateTime<Utc> {
    ts.duration_round(TimeDelta::minutes(1))
        .expect("minute rounding is in range")
}

/// One resting price level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceLevel<S> {
    pub price: S,
    pub size: S,
}

impl<S: Scalar> PriceLevel<S> {
    pub fn new(price: S, size: S) -> Result<Self> {
        if price <= S::zero() || size <= S::zero() {
            return Err(Error::Validation(format!(
                "price level must have positive price and size, got ({price}, {size})"
            )));
        }
        Ok(Self { price, size })
    }

    pub fn notional(&self) -> S {
        self.price * self.size
    }
}

/// A timestamped two-sided book for one market.
///
/// Bids are strictly descending and asks strictly ascending; when both sides
/// are present the best bid is below the best ask.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderBookSnapshot<S> {
    pub market: String,
    pub ts: DateTime<Utc>,
    pub bids: Vec<PriceLevel<S>>,
    pub asks: Vec<PriceLevel<S>>,
}

impl<S: Scalar> OrderBookSnapshot<S> {
    /// Builds a snapshot, sorting both sides, merging repeated prices and
    /// truncating `ts` to the minute.
    pub fn new(
        market: impl Into<String>,
        ts: DateTime<Utc>,
        bids: Vec<PriceLevel<S>>,
        asks: Vec<PriceLevel<S>>,
    ) -> Result<Self> {
        let market = market.into();
        let ts = truncate_to_minute(ts);
        let bids = normalize_side(bids, true);
        let asks = normalize_side(asks, false);
        if let (Some(b), Some(a)) = (bids.first(), asks.first()) {
            if b.price >= a.price {
                return Err(Error::CrossedBook {
                    market,
                    ts: ts.to_rfc3339(),
                    best_bid: b.price.to_string(),
                    best_ask: a.price.to_string(),
                });
            }
        }
        Ok(Self {
            market,
            ts,
            bids,
            asks,
        })
    }

    pub fn best_bid(&self) -> Option<&PriceLevel<S>> {
        self.bids.first()
    }

    pub fn best_ask(&self) -> Option<&PriceLevel<S>> {
        self.asks.first()
    }

    pub fn key(&self) -> MinuteKey {
        MinuteKey::new(self.market.clone(), self.ts)
    }

    pub fn side(&self, side: BookSide) -> &[PriceLevel<S>] {
        match side {
            BookSide::Bid => &self.bids,
            BookSide::Ask => &self.asks,
        }
    }

    /// Total notional resting on one side.
    pub fn side_notional(&self, side: BookSide) -> S {
        self.side(side).iter().map(PriceLevel::notional).sum()
    }

    /// Multiply every level size by `factor`.
    pub fn scaled(&self, factor: S) -> Self {
        let scale = |levels: &[PriceLevel<S>]| {
            levels
                .iter()
                .map(|l| PriceLevel {
                    price: l.price,
                    size: l.size * factor,
                })
                .collect()
        };
        Self {
            market: self.market.clone(),
            ts: self.ts,
            bids: scale(&self.bids),
            asks: scale(&self.asks),
        }
    }
}

pub(crate) fn normalize_side<S: Scalar>(
    mut levels: Vec<PriceLevel<S>>,
    descending: bool,
) -> Vec<PriceLevel<S>> {
    levels.sort_by(|a, b| {
        let ord = a
            .price
            .partial_cmp(&b.price)
            .unwrap_or(std::cmp::Ordering::Equal);
        if descending {
            ord.reverse()
        } else {
            ord
        }
    });
    let mut out: Vec<PriceLevel<S>> = Vec::with_capacity(levels.len());
    for level in levels {
        match out.last_mut() {
            Some(last) if last.price == level.price => last.size = last.size + level.size,
            _ => out.push(level),
        }
    }
    out
}

/// Side of the book.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum BookSide {
    Bid,
    Ask,
}

impl fmt::Display for BookSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BookSide::Bid => "BID",
            BookSide::Ask => "ASK",
        })
    }
}

/// Aggressor side of a trade.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum TradeSide {
    Buy,
    Sell,
}

impl TradeSide {
    /// The book side whose liquidity this trade consumed.
    pub fn consumes(self) -> BookSide {
        match self {
            TradeSide::Buy => BookSide::Ask,
            TradeSide::Sell => BookSide::Bid,
        }
    }
}

impl fmt::Display for TradeSide {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TradeSide::Buy => "BUY",
            TradeSide::Sell => "SELL",
        })
    }
}

impl std::str::FromStr for TradeSide {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "BUY" | "B" => Ok(TradeSide::Buy),
            "SELL" | "S" => Ok(TradeSide::Sell),
            other => Err(format!("unknown trade side {other:?}")),
        }
    }
}

/// One executed trade.
#[derive(Debug, Clone, PartialEq)]
pub struct TradeRecord<S> {
    pub market: String,
    pub side: TradeSide,
    pub size: S,
    pub price: S,
    pub created_at: DateTime<Utc>,
    pub liquidation: bool,
}

impl<S: Scalar> TradeRecord<S> {
    pub fn new(
        market: impl Into<String>,
        side: TradeSide,
        size: S,
        price: S,
        created_at: DateTime<Utc>,
        liquidation: bool,
    ) -> Result<Self> {
        if size <= S::zero() || price <= S::zero() {
            return Err(Error::Validation(format!(
                "trade must have positive size and price, got size {size} price {price}"
            )));
        }
        Ok(Self {
            market: market.into(),
            side,
            size,
            price,
            created_at,
            liquidation,
        })
    }

    pub fn notional(&self) -> S {
        self.size * self.price
    }

    pub fn minute(&self) -> DateTime<Utc> {
        truncate_to_minute(self.created_at)
    }
}

/// maxSpread brackets a market may currently sit in.
pub const VALID_BRACKETS_BPS: [u32; 6] = [10, 15, 20, 30, 40, 50];

/// Static per-market data.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketSpec<S> {
    pub market: String,
    pub tick_size: S,
    pub index_price: S,
    pub bracket_bps: u32,
}

impl<S: Scalar> MarketSpec<S> {
    pub fn new(
        market: impl Into<String>,
        tick_size: S,
        index_price: S,
        bracket_bps: u32,
    ) -> Result<Self> {
        let market = market.into();
        if tick_size <= S::zero() || index_price <= S::zero() {
            return Err(Error::Validation(format!(
                "{market}: tick size and index price must be positive"
            )));
        }
        if !VALID_BRACKETS_BPS.contains(&bracket_bps) {
            return Err(Error::Validation(format!(
                "{market}: bracket {bracket_bps} bps not in {VALID_BRACKETS_BPS:?}"
            )));
        }
        Ok(Self {
            market,
            tick_size,
            index_price,
            bracket_bps,
        })
    }
}

/// Join key between books and trades.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MinuteKey {
    pub market: String,
    pub minute: DateTime<Utc>,
}

impl MinuteKey {
    /// `minute` is truncated, so the key always has a zero seconds component.
    pub fn new(market: impl Into<String>, minute: DateTime<Utc>) -> Self {
        Self {
            market: market.into(),
            minute: truncate_to_minute(minute),
        }
    }
}

impl fmt::Display for MinuteKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.market, format_minute(self.minute))
    }
}

/// RFC3339 rendering used in every emitted file.
pub fn format_minute(ts: DateTime<Utc>) -> String {
    ts.format("%Y-%m-%dT%H:%M:%SZ").to_string()
}

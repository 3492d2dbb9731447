//! Liquidity analytics for limit order books: depth and spread metrics,
//! per-minute book reconstruction from trade tapes, maxSpread calibration,
//! event-study resiliency and LP incentive arithmetic.
//!
//! Every domain type is generic over [`Scalar`]. Use the `Exact*` aliases
//! (backed by [`Decimal`]) wherever notionals must reconcile to the cent,
//! and the `Fast*` aliases for quick `f64` exploration.

pub mod calibration;
pub mod error;
pub mod event_study;
pub mod liquidity_metrics;
pub mod market_data;
pub mod reconstruction;
pub mod rewards;
pub mod scalar;
pub mod stats;
pub mod synthetic;

pub use error::{Error, Result};
pub use rust_decimal::Decimal;
pub use scalar::Scalar;

use market_data::{MarketSpec, OrderBookSnapshot, TradeRecord};

pub type ExactBook = OrderBookSnapshot<Decimal>;
pub type ExactTrade = TradeRecord<Decimal>;
pub type ExactMarketSpec = MarketSpec<Decimal>;

pub type FastBook = OrderBookSnapshot<f64>;
pub type FastTrade = TradeRecord<f64>;
pub type FastMarketSpec = MarketSpec<f64>;

//! Books, trades and market specs, plus the mid/spread/depth primitives
//! every other module builds on.

mod io;
mod primitives;
mod types;

pub(crate) use io::{csv_line, csv_reader};
pub use io::{
    load_market_specs, load_orderbooks, load_trades, market_specs_to_csv, open_reader,
    parse_timestamp, snapshots_to_jsonl, trades_to_csv, LoadedBooks,
};
pub use primitives::{
    bucket_trades_per_minute, compute_mid, depth_within_spread, quoted_spread, spread_bounds,
    MinuteBucket, QuotedSpread, SideDepth,
};
pub(crate) use types::normalize_side;
pub use types::{
    format_minute, round_to_minute, truncate_to_minute, BookSide, MarketSpec, MinuteKey,
    OrderBookSnapshot, PriceLevel, TradeRecord, TradeSide, VALID_BRACKETS_BPS,
};

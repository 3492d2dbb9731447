//! File loaders. Every loader accepts gzip input when the path ends in `.gz`.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use chrono::{DateTime, Utc};
use flate2::read::GzDecoder;
use serde::Deserialize;

use super::types::{
    format_minute, MarketSpec, OrderBookSnapshot, PriceLevel, TradeRecord, TradeSide,
};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Opens `path`, transparently decompressing `*.gz`.
pub fn open_reader(path: &Path) -> Result<Box<dyn BufRead>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let gz = path
        .extension()
        .is_some_and(|ext| ext.eq_ignore_ascii_case("gz"));
    let inner: Box<dyn Read> = if gz {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    Ok(Box::new(BufReader::new(inner)))
}

pub(crate) fn csv_reader(path: &Path) -> Result<csv::Reader<Box<dyn BufRead>>> {
    Ok(csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(open_reader(path)?))
}

pub(crate) fn csv_line(err: &csv::Error, fallback: usize) -> usize {
    err.position()
        .map(|p| p.line() as usize)
        .unwrap_or(fallback)
}

pub fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(s.trim())
        .ok()
        .map(|ts| ts.with_timezone(&Utc))
}

/// A number that may arrive as a JSON number or a decimal string.
#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawNumber {
    Text(String),
    Number(serde_json::Number),
}

impl RawNumber {
    fn parse<S: Scalar>(&self) -> Option<S> {
        match self {
            RawNumber::Text(s) => S::parse_str(s),
            // arbitrary_precision keeps the literal text of the number
            RawNumber::Number(n) => S::parse_str(&n.to_string()),
        }
    }
}

#[derive(Debug, Deserialize)]
struct RawSnapshot {
    ts: String,
    market: String,
    #[serde(default)]
    bids: Vec<(RawNumber, RawNumber)>,
    #[serde(default)]
    asks: Vec<(RawNumber, RawNumber)>,
}

/// Snapshots plus the number of `(market, ts)` duplicates that were dropped.
#[derive(Debug, Clone)]
pub struct LoadedBooks<S> {
    pub snapshots: Vec<OrderBookSnapshot<S>>,
    pub duplicates: usize,
}

/// Loads a JSON Lines snapshot file, sorted by `(market, ts)`.
///
/// A repeated `(market, ts)` keeps the later line.
pub fn load_orderbooks<S: Scalar>(path: &Path) -> Result<LoadedBooks<S>> {
    let reader = open_reader(path)?;
    let mut by_key: BTreeMap<(String, DateTime<Utc>), OrderBookSnapshot<S>> = BTreeMap::new();
    let mut duplicates = 0;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let raw: RawSnapshot =
            serde_json::from_str(&line).map_err(|e| Error::parse(path, lineno, e.to_string()))?;
        let ts = parse_timestamp(&raw.ts)
            .ok_or_else(|| Error::parse(path, lineno, format!("bad timestamp {:?}", raw.ts)))?;
        let side = |levels: &[(RawNumber, RawNumber)]| -> Result<Vec<PriceLevel<S>>> {
            levels
                .iter()
                .map(|(p, s)| {
                    let price = p
                        .parse::<S>()
                        .ok_or_else(|| Error::parse(path, lineno, format!("bad price {p:?}")))?;
                    let size = s
                        .parse::<S>()
                        .ok_or_else(|| Error::parse(path, lineno, format!("bad size {s:?}")))?;
                    PriceLevel::new(price, size)
                        .map_err(|e| Error::parse(path, lineno, e.to_string()))
                })
                .collect()
        };
        let book = OrderBookSnapshot::new(raw.market, ts, side(&raw.bids)?, side(&raw.asks)?)?;
        if by_key
            .insert((book.market.clone(), book.ts), book)
            .is_some()
        {
            duplicates += 1;
        }
    }
    if duplicates > 0 {
        log::warn!(
            "{}: dropped {duplicates} duplicate snapshot(s)",
            path.display()
        );
    }
    Ok(LoadedBooks {
        snapshots: by_key.into_values().collect(),
        duplicates,
    })
}

/// Canonical JSON Lines rendering: sorted sides, minute timestamps, decimal strings.
pub fn snapshots_to_jsonl<S: Scalar>(books: &[OrderBookSnapshot<S>]) -> String {
    let mut out = String::new();
    for book in books {
        let side = |levels: &[PriceLevel<S>]| {
            serde_json::Value::Array(
                levels
                    .iter()
                    .map(|l| serde_json::json!([l.price.to_string(), l.size.to_string()]))
                    .collect(),
            )
        };
        let value = serde_json::json!({
            "ts": format_minute(book.ts),
            "market": book.market,
            "bids": side(&book.bids),
            "asks": side(&book.asks),
        });
        out.push_str(&value.to_string());
        out.push('\n');
    }
    out
}

/// Renders trades in the tape CSV layout, with a `market` column.
pub fn trades_to_csv<S: Scalar>(trades: &[TradeRecord<S>]) -> String {
    let mut out = String::from("market,side,size,price,createdAt,liquidation\n");
    for t in trades {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            t.market,
            t.side,
            t.size,
            t.price,
            t.created_at
                .to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
            if t.liquidation { "True" } else { "False" }
        ));
    }
    out
}

pub fn market_specs_to_csv<S: Scalar>(specs: &[MarketSpec<S>]) -> String {
    let mut out = String::from("market,tickSize,indexPrice,bracketBps\n");
    for s in specs {
        out.push_str(&format!(
            "{},{},{},{}\n",
            s.market, s.tick_size, s.index_price, s.bracket_bps
        ));
    }
    out
}

#[derive(Debug, Deserialize)]
struct RawTrade {
    side: String,
    size: String,
    price: String,
    #[serde(rename = "createdAt")]
    created_at: String,
    #[serde(default)]
    liquidation: Option<String>,
    #[serde(default)]
    market: Option<String>,
}

fn parse_bool(s: &str) -> Option<bool> {
    match s.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Some(true),
        "false" | "0" | "no" | "" => Some(false),
        _ => None,
    }
}

/// Loads a trade tape CSV sorted by `created_at`.
///
/// `market` names the market for files without a `market` column; a column
/// value wins when both are present.
pub fn load_trades<S: Scalar>(path: &Path, market: Option<&str>) -> Result<Vec<TradeRecord<S>>> {
    let mut rdr = csv_reader(path)?;
    let mut trades = Vec::new();
    for (idx, row) in rdr.deserialize::<RawTrade>().enumerate() {
        let fallback = idx + 2;
        let row = row.map_err(|e| Error::parse(path, csv_line(&e, fallback), e.to_string()))?;
        let line = fallback;
        let side: TradeSide = row
            .side
            .parse()
            .map_err(|e: String| Error::parse(path, line, e))?;
        let size = S::parse_str(&row.size)
            .ok_or_else(|| Error::parse(path, line, format!("bad size {:?}", row.size)))?;
        let price = S::parse_str(&row.price)
            .ok_or_else(|| Error::parse(path, line, format!("bad price {:?}", row.price)))?;
        let created_at = parse_timestamp(&row.created_at).ok_or_else(|| {
            Error::parse(
                path,
                line,
                format!("unparseable timestamp {:?}", row.created_at),
            )
        })?;
        let liquidation = match row.liquidation.as_deref() {
            None => false,
            Some(s) => parse_bool(s)
                .ok_or_else(|| Error::parse(path, line, format!("bad liquidation flag {s:?}")))?,
        };
        let market = row
            .market
            .filter(|m| !m.is_empty())
            .or_else(|| market.map(str::to_owned))
            .ok_or_else(|| Error::parse(path, line, "no market column and no market given"))?;
        let trade = TradeRecord::new(market, side, size, price, created_at, liquidation)
            .map_err(|e| Error::Validation(format!("{}: line {line}: {e}", path.display())))?;
        trades.push(trade);
    }
    trades.sort_by_key(|t| t.created_at);
    Ok(trades)
}

#[derive(Debug, Deserialize)]
struct RawSpec {
    market: String,
    #[serde(rename = "tickSize")]
    tick_size: String,
    #[serde(rename = "indexPrice")]
    index_price: String,
    #[serde(rename = "bracketBps")]
    bracket_bps: u32,
}

/// Loads `market,tickSize,indexPrice,bracketBps`, sorted by market.
pub fn load_market_specs<S: Scalar>(path: &Path) -> Result<Vec<MarketSpec<S>>> {
    let mut rdr = csv_reader(path)?;
    let mut specs = Vec::new();
    for (idx, row) in rdr.deserialize::<RawSpec>().enumerate() {
        let line = idx + 2;
        let row = row.map_err(|e| Error::parse(path, csv_line(&e, line), e.to_string()))?;
        let tick = S::parse_str(&row.tick_size)
            .ok_or_else(|| Error::parse(path, line, format!("bad tickSize {:?}", row.tick_size)))?;
        let price = S::parse_str(&row.index_price).ok_or_else(|| {
            Error::parse(path, line, format!("bad indexPrice {:?}", row.index_price))
        })?;
        specs.push(MarketSpec::new(row.market, tick, price, row.bracket_bps)?);
    }
    specs.sort_by(|a, b| a.market.cmp(&b.market));
    Ok(specs)
}

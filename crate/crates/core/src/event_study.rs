//! Liquidity around declared high-impact events: pre/post depth, time to
//! recovery, and reconstructed demand against the book.

use std::collections::BTreeMap;
use std::path::Path;

use chrono::{DateTime, TimeDelta, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liquidity_metrics::DepthGrid;
use crate::market_data::{format_minute, open_reader, truncate_to_minute, MinuteKey};
use crate::reconstruction::ReconstructedBook;
use crate::scalar::Scalar;
use crate::stats;

const HOUR: i64 = 3600;

fn default_pad() -> i64 {
    HOUR
}

/// Event interval `[start, end)` in epoch seconds, with padding windows.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EventWindow {
    pub name: String,
    pub start: i64,
    pub end: i64,
    /// Seconds of baseline before `start`.
    #[serde(default = "default_pad")]
    pub pad_before: i64,
    /// Seconds observed after `end`.
    #[serde(default = "default_pad")]
    pub pad_after: i64,
}

impl EventWindow {
    pub fn new(name: impl Into<String>, start: i64, end: i64) -> Result<Self> {
        let w = Self {
            name: name.into(),
            start,
            end,
            pad_before: HOUR,
            pad_after: HOUR,
        };
        w.validate()?;
        Ok(w)
    }

    pub fn with_padding(mut self, pad_before: i64, pad_after: i64) -> Result<Self> {
        self.pad_before = pad_before;
        self.pad_after = pad_after;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if self.start >= self.end {
            return Err(Error::Validation(format!(
                "event {}: start {} must precede end {}",
                self.name, self.start, self.end
            )));
        }
        if self.pad_before < 0 || self.pad_after < 0 {
            return Err(Error::Validation(format!(
                "event {}: negative padding",
                self.name
            )));
        }
        Ok(())
    }

    fn at(secs: i64) -> DateTime<Utc> {
        truncate_to_minute(DateTime::from_timestamp(secs, 0).expect("epoch seconds in range"))
    }

    pub fn start_minute(&self) -> DateTime<Utc> {
        Self::at(self.start)
    }

    pub fn end_minute(&self) -> DateTime<Utc> {
        Self::at(self.end)
    }

    pub fn window_start(&self) -> DateTime<Utc> {
        Self::at(self.start - self.pad_before)
    }

    pub fn window_end(&self) -> DateTime<Utc> {
        Self::at(self.end + self.pad_after)
    }

    /// Every minute in `[window_start, window_end)`.
    pub fn padded_minutes(&self) -> Vec<DateTime<Utc>> {
        minutes_between(self.window_start(), self.window_end())
    }
}

fn minutes_between(from: DateTime<Utc>, to: DateTime<Utc>) -> Vec<DateTime<Utc>> {
    let mut out = Vec::new();
    let mut m = from;
    while m < to {
        out.push(m);
        m += TimeDelta::minutes(1);
    }
    out
}

/// The three releases studied in the original analysis (PPI, US initial
/// jobless claims, FOMC minutes), two hours each.
pub fn default_events() -> Vec<EventWindow> {
    [
        ("PPI Release", 1683804600, 1683811800),
        ("US initial Jobless Claims", 1684409400, 1684416600),
        ("FOMC Meeting Minutes Release", 1684947600, 1684954800),
    ]
    .into_iter()
    .map(|(n, s, e)| EventWindow::new(n, s, e).expect("static events are well-formed"))
    .collect()
}

#[derive(Deserialize)]
struct EventFile {
    events: Vec<EventWindow>,
}

/// Loads events from TOML (`[[events]]` tables) or JSON (an array, or an
/// object with an `events` array), chosen by extension.
pub fn load_events(path: &Path) -> Result<Vec<EventWindow>> {
    let mut text = String::new();
    std::io::Read::read_to_string(&mut open_reader(path)?, &mut text)
        .map_err(|e| Error::io(path, e))?;
    let name = path.to_string_lossy().to_ascii_lowercase();
    let events = if name.ends_with(".json") || name.ends_with(".json.gz") {
        let value: serde_json::Value =
            serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?;
        let parsed = if value.is_array() {
            serde_json::from_value::<Vec<EventWindow>>(value)
        } else {
            serde_json::from_value::<EventFile>(value).map(|f| f.events)
        };
        parsed.map_err(|e| Error::parse(path, 0, e.to_string()))?
    } else {
        toml::from_str::<EventFile>(&text)
            .map_err(|e| {
                let line = e
                    .span()
                    .map(|s| text[..s.start].lines().count().max(1))
                    .unwrap_or(0);
                Error::parse(path, line, e.message().to_string())
            })?
            .events
    };
    for e in &events {
        e.validate()?;
    }
    Ok(events)
}

/// Which side(s) of the book a depth series tracks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DepthMeasure {
    #[default]
    Total,
    Bid,
    Ask,
}

/// Per-minute depth for one market at one spread.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthSeries<S> {
    pub market: String,
    pub spread_bps: S,
    pub points: BTreeMap<DateTime<Utc>, S>,
}

impl<S: Scalar> DepthSeries<S> {
    pub fn from_grid(
        grid: &DepthGrid<S>,
        market: &str,
        spread_bps: S,
        measure: DepthMeasure,
    ) -> Result<Self> {
        let idx = grid.spread_index(spread_bps).ok_or_else(|| {
            Error::Validation(format!("spread {spread_bps} bps is not in the depth grid"))
        })?;
        let points = grid
            .rows
            .iter()
            .filter(|r| r.market == market)
            .map(|r| {
                let d = r.depths[idx];
                let v = match measure {
                    DepthMeasure::Total => d.total(),
                    DepthMeasure::Bid => d.bid_depth_usd,
                    DepthMeasure::Ask => d.ask_depth_usd,
                };
                (r.minute, v)
            })
            .collect();
        Ok(Self {
            market: market.to_owned(),
            spread_bps,
            points,
        })
    }

    fn require(&self, event: &EventWindow, minutes: &[DateTime<Utc>]) -> Result<()> {
        let missing: Vec<String> = minutes
            .iter()
            .filter(|m| !self.points.contains_key(m))
            .map(|&m| format_minute(m))
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(Error::SeriesGaps {
                event: event.name.clone(),
                missing,
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryReport<S> {
    pub market: String,
    pub event: String,
    pub spread_bps: S,
    /// Mean depth over the pre-event pad.
    pub baseline_depth: S,
    pub threshold_fraction: S,
    /// First event minute below `threshold_fraction × baseline`.
    pub trough_minute: Option<MinuteKey>,
    /// `Some(0)` when never impaired, `None` when not recovered by the end of
    /// the post-event pad.
    pub recovery_minutes: Option<i64>,
}

impl<S: Scalar> RecoveryReport<S> {
    pub fn recovery_label(&self) -> String {
        match self.recovery_minutes {
            Some(m) => m.to_string(),
            None => "not recovered".to_owned(),
        }
    }
}

/// Minutes from the first post-start impairment until depth is back at
/// `threshold_fraction` of the pre-event mean.
pub fn time_to_recovery<S: Scalar>(
    series: &DepthSeries<S>,
    event: &EventWindow,
    threshold_fraction: S,
) -> Result<RecoveryReport<S>> {
    series.require(event, &event.padded_minutes())?;
    let baseline_values: Vec<S> = minutes_between(event.window_start(), event.start_minute())
        .iter()
        .map(|m| series.points[m])
        .collect();
    let baseline_depth = stats::mean(&baseline_values).unwrap_or_else(S::zero);
    if baseline_depth <= S::zero() {
        return Err(Error::ZeroBaseline(event.name.clone()));
    }
    let threshold = threshold_fraction * baseline_depth;

    let trough = minutes_between(event.start_minute(), event.end_minute())
        .into_iter()
        .find(|m| series.points[m] < threshold);
    let recovery_minutes = match trough {
        None => Some(0),
        Some(t) => minutes_between(t + TimeDelta::minutes(1), event.window_end())
            .into_iter()
            .find(|m| series.points[m] >= threshold)
            .map(|m| (m - t).num_minutes()),
    };
    Ok(RecoveryReport {
        market: series.market.clone(),
        event: event.name.clone(),
        spread_bps: series.spread_bps,
        baseline_depth,
        threshold_fraction,
        trough_minute: trough.map(|t| MinuteKey::new(series.market.clone(), t)),
        recovery_minutes,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileRow<S> {
    pub minute: DateTime<Utc>,
    pub book_bid: S,
    pub book_ask: S,
    pub recon_bid: S,
    pub recon_ask: S,
    /// Reconstructed demand exceeded the book on either side.
    pub breach: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSummary<S> {
    /// Mean total book depth over the pre-event pad.
    pub pre_mean: Option<S>,
    /// Mean total book depth over the post-event pad.
    pub post_mean: Option<S>,
    /// Lowest total book depth inside the event interval.
    pub min_depth: S,
    pub breach_count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EventProfile<S> {
    pub market: String,
    pub event: String,
    pub spread_bps: S,
    pub rows: Vec<ProfileRow<S>>,
    pub summary: ProfileSummary<S>,
}

impl<S: Scalar> EventProfile<S> {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("minute,book_bid,book_ask,recon_bid,recon_ask,breach\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{}\n",
                format_minute(r.minute),
                r.book_bid,
                r.book_ask,
                r.recon_bid,
                r.recon_ask,
                r.breach
            ));
        }
        out
    }
}

/// Book depth against reconstructed demand over an event's padded window.
pub fn event_depth_profile<S: Scalar>(
    grid: &DepthGrid<S>,
    recon: &[ReconstructedBook<S>],
    event: &EventWindow,
    spread_bps: S,
    market: &str,
) -> Result<EventProfile<S>> {
    let idx = grid.spread_index(spread_bps).ok_or_else(|| {
        Error::Validation(format!("spread {spread_bps} bps is not in the depth grid"))
    })?;
    let book: BTreeMap<DateTime<Utc>, _> = grid
        .rows
        .iter()
        .filter(|r| r.market == market)
        .map(|r| (r.minute, r.depths[idx]))
        .collect();
    let minutes = event.padded_minutes();
    let missing: Vec<String> = minutes
        .iter()
        .filter(|m| !book.contains_key(m))
        .map(|&m| format_minute(m))
        .collect();
    if !missing.is_empty() {
        return Err(Error::SeriesGaps {
            event: event.name.clone(),
            missing,
        });
    }
    let demand: BTreeMap<DateTime<Utc>, (S, S)> = recon
        .iter()
        .filter(|r| r.key.market == market)
        .map(|r| (r.key.minute, (r.bid_notional, r.ask_notional)))
        .collect();

    let rows: Vec<ProfileRow<S>> = minutes
        .iter()
        .map(|m| {
            let d = book[m];
            let (recon_bid, recon_ask) = demand.get(m).copied().unwrap_or((S::zero(), S::zero()));
            ProfileRow {
                minute: *m,
                book_bid: d.bid_depth_usd,
                book_ask: d.ask_depth_usd,
                recon_bid,
                recon_ask,
                breach: recon_bid > d.bid_depth_usd || recon_ask > d.ask_depth_usd,
            }
        })
        .collect();

    let (start, end) = (event.start_minute(), event.end_minute());
    let total = |r: &ProfileRow<S>| r.book_bid + r.book_ask;
    let pre: Vec<S> = rows
        .iter()
        .filter(|r| r.minute < start)
        .map(total)
        .collect();
    let during: Vec<S> = rows
        .iter()
        .filter(|r| r.minute >= start && r.minute < end)
        .map(total)
        .collect();
    let post: Vec<S> = rows.iter().filter(|r| r.minute >= end).map(total).collect();
    let summary = ProfileSummary {
        pre_mean: stats::mean(&pre),
        post_mean: stats::mean(&post),
        min_depth: stats::min(&during).unwrap_or_else(S::zero),
        breach_count: rows.iter().filter(|r| r.breach).count(),
    };
    Ok(EventProfile {
        market: market.to_owned(),
        event: event.name.clone(),
        spread_bps,
        rows,
        summary,
    })
}

/// True when total breaches across all profiles stay within tolerance.
pub fn condition4_event_adequacy<S: Scalar>(
    profiles: &[EventProfile<S>],
    tolerance_breaches: usize,
) -> bool {
    profiles
        .iter()
        .map(|p| p.summary.breach_count)
        .sum::<usize>()
        <= tolerance_breaches
}

//! Flag/config-file merging and input loading.

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use chrono::{DateTime, NaiveDate, Utc};
use rust_decimal::Decimal;
use serde::Deserialize;
use spreadlab::event_study::{default_events, load_events, EventWindow};
use spreadlab::market_data::{load_market_specs, load_orderbooks, load_trades, parse_timestamp};
use spreadlab::{ExactBook, ExactMarketSpec, ExactTrade};

use crate::cli::{MarketArgs, MinuteMode, OutputFormat};
use crate::UsageError;

/// Keys accepted in `--config`; each mirrors the flag of the same name.
/// Relative paths resolve against the config file's directory.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct FileConfig {
    pub books: Option<PathBuf>,
    pub trades: Option<PathBuf>,
    pub markets: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub fees: Option<PathBuf>,
    pub epochs: Option<PathBuf>,
    pub out: Option<PathBuf>,
    #[serde(alias = "market-filter")]
    pub market: Option<Vec<String>>,
    pub from: Option<String>,
    pub to: Option<String>,
    pub spreads: Option<Vec<Decimal>>,
    pub spread: Option<Decimal>,
    pub recovery_fraction: Option<Decimal>,
    pub draft: Option<bool>,
    pub zero_fill: Option<bool>,
    pub exclude_liquidations: Option<bool>,
    pub minute_mode: Option<MinuteMode>,
    pub format: Option<OutputFormat>,
    pub jobs: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| spreadlab::Error::Io {
            path: path.to_owned(),
            source: e,
        })?;
        let mut cfg: FileConfig = toml::from_str(&text)
            .map_err(|e| anyhow!(UsageError(format!("{}: {e}", path.display()))))?;
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [
            &mut cfg.books,
            &mut cfg.trades,
            &mut cfg.markets,
            &mut cfg.events,
            &mut cfg.fees,
            &mut cfg.epochs,
            &mut cfg.out,
        ]
        .into_iter()
        .flatten()
        {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }
}

/// Market-data settings after flags override the config file.
#[derive(Debug, Clone)]
pub struct MarketSettings {
    pub books: Option<PathBuf>,
    pub trades: Option<PathBuf>,
    pub markets: Option<PathBuf>,
    pub events: Option<PathBuf>,
    pub market_filter: Vec<String>,
    pub from: Option<DateTime<Utc>>,
    pub to: Option<DateTime<Utc>>,
    pub spreads: Vec<Decimal>,
    pub spread: Option<Decimal>,
    pub recovery_fraction: Option<Decimal>,
    pub draft: bool,
    pub zero_fill: bool,
    pub exclude_liquidations: bool,
    pub minute_mode: MinuteMode,
}

fn parse_bound(s: &str) -> Result<DateTime<Utc>> {
    if let Some(ts) = parse_timestamp(s) {
        return Ok(ts);
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|d| d.and_utc())
        .ok_or_else(|| {
            anyhow!(UsageError(format!(
                "invalid date {s:?}: expected RFC 3339 or YYYY-MM-DD"
            )))
        })
}

impl MarketSettings {
    pub fn merge(args: &MarketArgs, cfg: &FileConfig) -> Result<Self> {
        let from = args
            .from
            .clone()
            .or_else(|| cfg.from.clone())
            .map(|s| parse_bound(&s))
            .transpose()?;
        let to = args
            .to
            .clone()
            .or_else(|| cfg.to.clone())
            .map(|s| parse_bound(&s))
            .transpose()?;
        if let (Some(f), Some(t)) = (from, to) {
            if f >= t {
                bail!(UsageError(format!("--from {f} must precede --to {t}")));
            }
        }
        let spreads = if args.spreads.is_empty() {
            cfg.spreads.clone().unwrap_or_default()
        } else {
            args.spreads.clone()
        };
        let market_filter = if args.market_filter.is_empty() {
            cfg.market.clone().unwrap_or_default()
        } else {
            args.market_filter.clone()
        };
        Ok(Self {
            books: args.books.clone().or_else(|| cfg.books.clone()),
            trades: args.trades.clone().or_else(|| cfg.trades.clone()),
            markets: args.markets.clone().or_else(|| cfg.markets.clone()),
            events: args.events.clone().or_else(|| cfg.events.clone()),
            market_filter,
            from,
            to,
            spreads,
            spread: args.spread.or(cfg.spread),
            recovery_fraction: args.recovery_fraction.or(cfg.recovery_fraction),
            draft: args.draft || cfg.draft.unwrap_or(false),
            zero_fill: args.zero_fill || cfg.zero_fill.unwrap_or(false),
            exclude_liquidations: args.exclude_liquidations
                || cfg.exclude_liquidations.unwrap_or(false),
            minute_mode: args
                .minute_mode
                .or(cfg.minute_mode)
                .unwrap_or(MinuteMode::Truncate),
        })
    }

    fn in_range(&self, ts: DateTime<Utc>) -> bool {
        self.from.is_none_or(|f| ts >= f) && self.to.is_none_or(|t| ts < t)
    }

    fn wanted(&self, market: &str) -> bool {
        self.market_filter.is_empty() || self.market_filter.iter().any(|m| m == market)
    }
}

pub fn require(path: &Option<PathBuf>, flag: &str) -> Result<PathBuf> {
    let p = path.clone().ok_or_else(|| {
        anyhow!(UsageError(format!(
            "--{flag} is required (flag or config key `{flag}`)"
        )))
    })?;
    if !p.exists() {
        return Err(spreadlab::Error::Io {
            path: p,
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "input file not found"),
        }
        .into());
    }
    Ok(p)
}

/// Loaded and filtered market inputs.
#[derive(Debug, Default)]
pub struct Inputs {
    pub specs: Vec<ExactMarketSpec>,
    pub books: Vec<ExactBook>,
    pub trades: Vec<ExactTrade>,
    pub events: Vec<EventWindow>,
}

impl Inputs {
    pub fn load(
        s: &MarketSettings,
        need_books: bool,
        need_trades: bool,
        need_specs: bool,
    ) -> Result<Self> {
        // Check every path up front so a missing file fails before any work.
        let books_path = if need_books {
            Some(require(&s.books, "books")?)
        } else {
            None
        };
        let trades_path = if need_trades {
            Some(require(&s.trades, "trades")?)
        } else {
            None
        };
        let specs_path = if need_specs {
            Some(require(&s.markets, "markets")?)
        } else {
            None
        };
        let events_path = match &s.events {
            Some(_) => Some(require(&s.events, "events")?),
            None => None,
        };

        let mut out = Inputs::default();
        if let Some(p) = specs_path {
            out.specs = load_market_specs(&p)?;
            out.specs.retain(|m| s.wanted(&m.market));
            if out.specs.is_empty() {
                bail!(spreadlab::Error::Validation(format!(
                    "{}: no markets selected",
                    p.display()
                )));
            }
        }
        let known = |m: &str| out.specs.is_empty() || out.specs.iter().any(|s| s.market == m);
        if let Some(p) = books_path {
            let loaded = load_orderbooks(&p).with_context(|| format!("loading {}", p.display()))?;
            if loaded.duplicates > 0 {
                log::warn!(
                    "{}: {} duplicate snapshots replaced",
                    p.display(),
                    loaded.duplicates
                );
            }
            out.books = loaded
                .snapshots
                .into_iter()
                .filter(|b| s.wanted(&b.market) && known(&b.market) && s.in_range(b.ts))
                .collect();
        }
        if let Some(p) = trades_path {
            out.trades = load_trades(&p, None)
                .with_context(|| format!("loading {}", p.display()))?
                .into_iter()
                .filter(|t| s.wanted(&t.market) && known(&t.market) && s.in_range(t.created_at))
                .collect();
        }
        out.events = match events_path {
            Some(p) => load_events(&p)?,
            None => default_events(),
        };
        Ok(out)
    }

    /// Markets to process: from the specs file, else those seen in the data.
    pub fn market_names(&self) -> Vec<String> {
        let mut names: Vec<String> = if self.specs.is_empty() {
            self.books
                .iter()
                .map(|b| b.market.clone())
                .chain(self.trades.iter().map(|t| t.market.clone()))
                .collect()
        } else {
            self.specs.iter().map(|s| s.market.clone()).collect()
        };
        names.sort();
        names.dedup();
        names
    }

    pub fn books_for(&self, market: &str) -> Vec<ExactBook> {
        self.books
            .iter()
            .filter(|b| b.market == market)
            .cloned()
            .collect()
    }

    pub fn trades_for(&self, market: &str) -> Vec<ExactTrade> {
        self.trades
            .iter()
            .filter(|t| t.market == market)
            .cloned()
            .collect()
    }

    pub fn spec_for(&self, market: &str) -> Option<&ExactMarketSpec> {
        self.specs.iter().find(|s| s.market == market)
    }
}

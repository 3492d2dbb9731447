//! Seeded synthetic markets: minute order-book snapshots and a matching
//! trade tape, with depth shocks inside event windows.
//!
//! Prices are whole ticks and sizes are multiples of 10⁻⁴, so the output is
//! exact under a decimal scalar and identical for a given seed.

use std::path::Path;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::event_study::EventWindow;
use crate::market_data::{
    market_specs_to_csv, snapshots_to_jsonl, trades_to_csv, MarketSpec, OrderBookSnapshot,
    PriceLevel, TradeRecord, TradeSide,
};
use crate::scalar::Scalar;

const SIZE_UNITS: i64 = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticMarket<S> {
    pub spec: MarketSpec<S>,
    /// Resting levels per side.
    pub levels: usize,
    /// Ticks between adjacent resting levels.
    pub level_gap_ticks: i64,
    /// Mean USD notional per resting level.
    pub level_usd: f64,
    pub trades_per_minute: f64,
    /// Mean USD notional per trade.
    pub trade_usd: f64,
}

impl<S: Scalar> SyntheticMarket<S> {
    /// Levels spaced so the book spans about 60 bps of the index price.
    pub fn new(
        spec: MarketSpec<S>,
        level_usd: f64,
        trades_per_minute: f64,
        trade_usd: f64,
    ) -> Self {
        let levels = 30;
        let price = spec.index_price.to_f64_lossy();
        let tick = spec.tick_size.to_f64_lossy();
        let gap = ((price * 0.006 / levels as f64) / tick).round().max(1.0) as i64;
        Self {
            spec,
            levels,
            level_gap_ticks: gap,
            level_usd,
            trades_per_minute,
            trade_usd,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticConfig<S> {
    pub seed: u64,
    pub start: DateTime<Utc>,
    pub minutes: usize,
    pub markets: Vec<SyntheticMarket<S>>,
    pub events: Vec<EventWindow>,
    /// Depth multiplier at the start of an event; recovers linearly.
    pub shock_depth_factor: f64,
    pub shock_recovery_minutes: i64,
    /// Probability that a minute's snapshot loses one side entirely.
    pub one_sided_probability: f64,
    pub liquidation_probability: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticDataset<S> {
    pub specs: Vec<MarketSpec<S>>,
    pub books: Vec<OrderBookSnapshot<S>>,
    pub trades: Vec<TradeRecord<S>>,
    pub events: Vec<EventWindow>,
}

fn exp_sample(rng: &mut ChaCha8Rng, mean: f64) -> f64 {
    let u: f64 = rng.random_range(f64::EPSILON..1.0);
    -u.ln() * mean
}

fn size_for<S: Scalar>(notional: f64, price: f64) -> S {
    let units = ((notional / price) * SIZE_UNITS as f64).round().max(1.0) as i64;
    S::ratio(units, SIZE_UNITS)
}

impl<S: Scalar> SyntheticConfig<S> {
    fn depth_factor(&self, minute: DateTime<Utc>) -> f64 {
        let t = minute.timestamp();
        self.events
            .iter()
            .filter(|e| t >= e.start && t < e.end)
            .map(|e| {
                let elapsed = (t - e.start) / 60;
                if elapsed >= self.shock_recovery_minutes {
                    1.0
                } else {
                    let p = elapsed as f64 / self.shock_recovery_minutes.max(1) as f64;
                    self.shock_depth_factor + (1.0 - self.shock_depth_factor) * p
                }
            })
            .fold(1.0, f64::min)
    }

    fn near_event(&self, minute: DateTime<Utc>) -> bool {
        self.events
            .iter()
            .any(|e| minute >= e.window_start() && minute < e.window_end())
    }

    fn in_event(&self, minute: DateTime<Utc>) -> bool {
        let t = minute.timestamp();
        self.events.iter().any(|e| t >= e.start && t < e.end)
    }

    pub fn generate(&self) -> Result<SyntheticDataset<S>> {
        let mut books = Vec::new();
        let mut trades = Vec::new();
        for (idx, m) in self.markets.iter().enumerate() {
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed ^ ((idx as u64 + 1) << 32));
            let tick = m.spec.tick_size;
            let tick_f = tick.to_f64_lossy();
            let mut mid_ticks = (m.spec.index_price.to_f64_lossy() / tick_f)
                .round()
                .max(4.0) as i64;
            let step_sd = (m.spec.index_price.to_f64_lossy() * 0.0004 / tick_f).max(1.0);
            for i in 0..self.minutes {
                let minute = self.start + Duration::minutes(i as i64);
                let step = (rng.random_range(-1.0..1.0) * step_sd * 1.7).round() as i64;
                mid_ticks = (mid_ticks + step).max(2 * m.levels as i64 * m.level_gap_ticks + 4);
                let half = rng.random_range(1..=2_i64);
                let factor = self.depth_factor(minute);
                let mut side = |sign: i64| -> Vec<PriceLevel<S>> {
                    (0..m.levels as i64)
                        .map(|l| {
                            let ticks = mid_ticks + sign * (half + l * m.level_gap_ticks);
                            let price = S::from_int(ticks) * tick;
                            let usd = m.level_usd * rng.random_range(0.5..1.5) * factor;
                            PriceLevel::new(price, size_for(usd, ticks as f64 * tick_f))
                        })
                        .collect::<Result<_>>()
                        .expect("positive by construction")
                };
                let mut bids = side(-1);
                let mut asks = side(1);
                let one_sided = rng.random_bool(self.one_sided_probability);
                if one_sided && !self.near_event(minute) {
                    if rng.random_bool(0.5) {
                        bids.clear();
                    } else {
                        asks.clear();
                    }
                }
                books.push(OrderBookSnapshot::new(
                    m.spec.market.clone(),
                    minute,
                    bids,
                    asks,
                )?);

                let rate = m.trades_per_minute * if self.in_event(minute) { 3.0 } else { 1.0 };
                let count = rng.random_range(0.0..=2.0 * rate).round() as usize;
                for _ in 0..count {
                    let buy = rng.random_bool(0.5);
                    let ticks = if buy {
                        mid_ticks + half
                    } else {
                        mid_ticks - half
                    };
                    let price_f = ticks as f64 * tick_f;
                    let notional = exp_sample(&mut rng, m.trade_usd).min(5.0 * m.trade_usd);
                    let created_at = minute + Duration::milliseconds(rng.random_range(0..60_000));
                    trades.push(TradeRecord::new(
                        m.spec.market.clone(),
                        if buy { TradeSide::Buy } else { TradeSide::Sell },
                        size_for(notional, price_f),
                        S::from_int(ticks) * tick,
                        created_at,
                        rng.random_bool(self.liquidation_probability),
                    )?);
                }
            }
        }
        books.sort_by(|a, b| (&a.market, a.ts).cmp(&(&b.market, b.ts)));
        trades.sort_by(|a, b| (a.created_at, &a.market).cmp(&(b.created_at, &b.market)));
        let mut specs: Vec<MarketSpec<S>> = self.markets.iter().map(|m| m.spec.clone()).collect();
        specs.sort_by(|a, b| a.market.cmp(&b.market));
        Ok(SyntheticDataset {
            specs,
            books,
            trades,
            events: self.events.clone(),
        })
    }
}

/// Four markets around the FOMC minutes release, one of them tick-constrained.
pub fn sample_config<S: Scalar>(seed: u64) -> SyntheticConfig<S> {
    let spec = |m: &str, tick: &str, price: &str, bracket: u32| {
        MarketSpec::new(
            m,
            S::parse_str(tick).expect("literal"),
            S::parse_str(price).expect("literal"),
            bracket,
        )
        .expect("valid literal spec")
    };
    SyntheticConfig {
        seed,
        start: Utc.with_ymd_and_hms(2023, 5, 24, 15, 30, 0).unwrap(),
        minutes: 300,
        markets: vec![
            SyntheticMarket::new(spec("BTC-USD", "1", "27369", 10), 400_000.0, 6.0, 60_000.0),
            SyntheticMarket::new(
                spec("ETH-USD", "0.1", "1820.5", 10),
                250_000.0,
                5.0,
                40_000.0,
            ),
            SyntheticMarket::new(
                spec("SOL-USD", "0.001", "20.054", 15),
                40_000.0,
                3.0,
                15_000.0,
            ),
            SyntheticMarket::new(spec("UMA-USD", "0.01", "2.3360", 40), 3_000.0, 0.5, 1_500.0),
        ],
        events: vec![
            EventWindow::new("FOMC Meeting Minutes Release", 1684947600, 1684954800)
                .expect("static event"),
        ],
        shock_depth_factor: 0.3,
        shock_recovery_minutes: 30,
        one_sided_probability: 0.01,
        liquidation_probability: 0.02,
    }
}

fn events_toml(events: &[EventWindow]) -> String {
    let mut out = String::new();
    for e in events {
        out.push_str(&format!(
            "[[events]]\nname = {:?}\nstart = {}\nend = {}\npad_before = {}\npad_after = {}\n\n",
            e.name, e.start, e.end, e.pad_before, e.pad_after
        ));
    }
    out
}

impl<S: Scalar> SyntheticDataset<S> {
    /// Writes `books.jsonl`, `trades.csv`, `markets.csv` and `events.toml`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let files = [
            ("books.jsonl", snapshots_to_jsonl(&self.books)),
            ("trades.csv", trades_to_csv(&self.trades)),
            ("markets.csv", market_specs_to_csv(&self.specs)),
            ("events.toml", events_toml(&self.events)),
        ];
        for (name, body) in files {
            let path = dir.join(name);
            std::fs::write(&path, body).map_err(|e| Error::io(path, e))?;
        }
        Ok(())
    }
}

//! Synthetic sweep fixtures and an exhaustive evaluate-every-spread oracle
//! written directly from the condition definitions. Shared with the CLI
//! acceptance suite.

use std::collections::BTreeMap;

use chrono::{DateTime, TimeZone, Utc};
use rust_decimal::Decimal;
use spreadlab::calibration::adf::adf_test;
use spreadlab::calibration::{CalibrationConfig, Rationale};
use spreadlab::event_study::EventWindow;
use spreadlab::market_data::{MarketSpec, OrderBookSnapshot};
use spreadlab::reconstruction::{reconstruct_minute_books, ReconstructionOptions};
use spreadlab::synthetic::{SyntheticConfig, SyntheticDataset, SyntheticMarket};

pub fn fixture(seed: u64) -> SyntheticDataset<Decimal> {
    let start = Utc.with_ymd_and_hms(2023, 5, 11, 10, 0, 0).unwrap();
    let event_start = start.timestamp() + 60 * 60;
    let (tick, price) = match seed % 5 {
        0 => ("0.01", "2.3360"),
        1 => ("1", "27369"),
        2 => ("0.001", "20.054"),
        3 => ("0.1", "1820.5"),
        _ => ("0.0001", "0.8171"),
    };
    let spec = MarketSpec::new(
        format!("M{seed:02}-USD"),
        tick.parse().unwrap(),
        price.parse().unwrap(),
        20,
    )
    .unwrap();
    let scale = 1.0 + (seed % 7) as f64;
    SyntheticConfig {
        seed,
        start,
        minutes: 180,
        markets: vec![SyntheticMarket::new(spec, 4_000.0 * scale, 2.0, 6_000.0)],
        events: vec![EventWindow::new("shock", event_start, event_start + 3600)
            .unwrap()
            .with_padding(1800, 1800)
            .unwrap()],
        shock_depth_factor: 0.2 + 0.05 * (seed % 4) as f64,
        shock_recovery_minutes: 20,
        one_sided_probability: 0.02,
        liquidation_probability: 0.02,
    }
    .generate()
    .unwrap()
}

fn side_depth(book: &OrderBookSnapshot<Decimal>, spread: Decimal) -> (Decimal, Decimal) {
    let (Some(bb), Some(ba)) = (book.bids.first(), book.asks.first()) else {
        return (Decimal::ZERO, Decimal::ZERO);
    };
    let mid = (bb.price + ba.price) / Decimal::TWO;
    let lower = mid - mid * spread / Decimal::from(10_000);
    let upper = mid + mid * spread / Decimal::from(10_000);
    let bid = book
        .bids
        .iter()
        .filter(|l| l.price >= lower)
        .map(|l| l.price * l.size)
        .sum();
    let ask = book
        .asks
        .iter()
        .filter(|l| l.price <= upper)
        .map(|l| l.price * l.size)
        .sum();
    (bid, ask)
}

fn p95(values: &[Decimal]) -> Decimal {
    let mut v = values.to_vec();
    v.sort();
    let pos = Decimal::from(v.len() as i64 - 1) * Decimal::new(95, 2);
    let lo = pos.floor();
    let i = usize::try_from(lo).unwrap();
    let frac = pos - lo;
    if i + 1 < v.len() {
        v[i] + (v[i + 1] - v[i]) * frac
    } else {
        v[i]
    }
}

fn stationary(values: &[Decimal]) -> bool {
    let f: Vec<f64> = values
        .iter()
        .map(|v| v.to_string().parse().unwrap())
        .collect();
    match adf_test(&f, None) {
        Ok(r) => r.statistic < r.critical_5pct,
        Err(_) => true,
    }
}

pub fn oracle(
    data: &SyntheticDataset<Decimal>,
    cfg: &CalibrationConfig<Decimal>,
) -> (Decimal, Rationale) {
    let spec = &data.specs[0];
    if spec.tick_size / spec.index_price * Decimal::from(10_000) >= Decimal::from(40) {
        return (Decimal::from(40), Rationale::TickConstrained);
    }
    let recon = reconstruct_minute_books(&data.trades, ReconstructionOptions::default());
    let demand: BTreeMap<DateTime<Utc>, (Decimal, Decimal)> = recon
        .iter()
        .map(|r| (r.key.minute, (r.bid_notional, r.ask_notional)))
        .collect();
    let bid_need = p95(&demand.values().map(|d| d.0).collect::<Vec<_>>());
    let ask_need = p95(&demand.values().map(|d| d.1).collect::<Vec<_>>());
    let event = &data.events[0];
    let (w0, w1) = (event.start - event.pad_before, event.end + event.pad_after);

    for &spread in &cfg.spreads_bps {
        let depths: Vec<(DateTime<Utc>, (Decimal, Decimal))> = data
            .books
            .iter()
            .map(|b| (b.ts, side_depth(b, spread)))
            .collect();
        let n = Decimal::from(depths.len() as i64);
        let mean_bid = depths.iter().map(|d| d.1 .0).sum::<Decimal>() / n;
        let mean_ask = depths.iter().map(|d| d.1 .1).sum::<Decimal>() / n;

        let c1 = spec.index_price * spread / Decimal::from(10_000) > spec.tick_size;
        let c2 = mean_bid >= bid_need && mean_ask >= ask_need;
        let bids: Vec<Decimal> = depths.iter().map(|d| d.1 .0).collect();
        let asks: Vec<Decimal> = depths.iter().map(|d| d.1 .1).collect();
        let c3 = stationary(&bids) && stationary(&asks);
        let breaches = depths
            .iter()
            .filter(|(ts, _)| ts.timestamp() >= w0 && ts.timestamp() < w1)
            .filter(|(ts, (b, a))| {
                let (rb, ra) = demand.get(ts).copied().unwrap_or_default();
                rb > *b || ra > *a
            })
            .count();
        let c4 = breaches <= cfg.event_breach_tolerance;
        if c1 && c2 && c3 && c4 {
            return (spread, Rationale::Ok);
        }
    }
    (*cfg.spreads_bps.last().unwrap(), Rationale::DepthLimited)
}

//! The sweep against the exhaustive oracle in `support/sweep.rs`.

use std::collections::BTreeMap;

use chrono::Duration;
use rust_decimal::Decimal;
use spreadlab::calibration::{sweep_max_spread, CalibrationConfig, MarketData, Rationale};
use spreadlab::market_data::TradeSide;
use spreadlab::reconstruction::{reconstruct_minute_books, ReconstructionOptions};

#[path = "support/sweep.rs"]
mod support;
use support::{fixture, oracle};

#[test]
fn sweep_agrees_with_exhaustive_oracle() {
    let cfg = CalibrationConfig::<Decimal>::default();
    let mut outcomes = BTreeMap::new();
    for seed in 0..20u64 {
        let data = fixture(seed);
        let spec = &data.specs[0];
        let recon = reconstruct_minute_books(&data.trades, ReconstructionOptions::default());
        let result = sweep_max_spread(
            MarketData {
                books: &data.books,
                recon: &recon,
                trades: &data.trades,
                spec,
            },
            &cfg,
            &data.events,
        )
        .unwrap();
        let (expected, rationale) = oracle(&data, &cfg);
        assert_eq!(result.chosen_bps, expected, "fixture {seed}");
        assert_eq!(result.rationale, rationale, "fixture {seed}");
        *outcomes
            .entry(format!("{}@{}", result.rationale, result.chosen_bps))
            .or_insert(0) += 1;
    }
    // The fixtures must exercise more than one branch.
    assert!(outcomes.len() >= 3, "{outcomes:?}");
}

#[test]
fn one_tick_wider_than_forty_bps_is_tick_constrained() {
    let data = fixture(0);
    let spec = &data.specs[0];
    assert_eq!(spec.index_price, "2.3360".parse::<Decimal>().unwrap());
    let recon = reconstruct_minute_books(&data.trades, ReconstructionOptions::default());
    let result = sweep_max_spread(
        MarketData {
            books: &data.books,
            recon: &recon,
            trades: &data.trades,
            spec,
        },
        &CalibrationConfig::default(),
        &data.events,
    )
    .unwrap();
    assert_eq!(result.rationale, Rationale::TickConstrained);
    assert_eq!(result.chosen_bps, Decimal::from(40));
    assert_eq!(
        result.min_tick_bps.round_dp(1),
        "42.8".parse::<Decimal>().unwrap()
    );
}

#[test]
fn no_overlap_is_an_error() {
    let data = fixture(1);
    let mut trades = data.trades.clone();
    for t in &mut trades {
        t.created_at += Duration::days(3);
        t.side = TradeSide::Buy;
    }
    let recon = reconstruct_minute_books(&trades, ReconstructionOptions::default());
    let err = sweep_max_spread(
        MarketData {
            books: &data.books,
            recon: &recon,
            trades: &trades,
            spec: &data.specs[0],
        },
        &CalibrationConfig::default(),
        &data.events,
    );
    assert!(matches!(err, Err(spreadlab::Error::NoOverlap)));
}

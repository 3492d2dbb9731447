use chrono::{DateTime, Duration, TimeZone, Utc};
use proptest::prelude::*;
use rust_decimal::Decimal;
use spreadlab::calibration::insufficiency_percentage;
use spreadlab::event_study::{event_depth_profile, time_to_recovery, DepthSeries, EventWindow};
use spreadlab::liquidity_metrics::{
    depth_grid, min_tick_bps, relative_liquidity, DepthGrid, GridRow,
};
use spreadlab::market_data::{
    bucket_trades_per_minute, depth_within_spread, BookSide, MarketSpec, OrderBookSnapshot,
    PriceLevel, SideDepth, TradeRecord, TradeSide,
};
use spreadlab::reconstruction::{reconstruct_minute_books, ReconstructionOptions};
use spreadlab::rewards::{
    assign_rebate_tier, dmm_score, normal_schedule, q_final, reward_shares, DmmBid, LpEpochSample,
    QWeights,
};

const SPREADS: [i64; 7] = [5, 10, 15, 20, 30, 40, 50];
const TICK: Decimal = Decimal::from_parts(1, 0, 0, false, 2);

fn t0() -> DateTime<Utc> {
    Utc.with_ymd_and_hms(2023, 5, 24, 12, 0, 0).unwrap()
}

fn spreads() -> Vec<Decimal> {
    SPREADS.iter().map(|&s| Decimal::from(s)).collect()
}

/// Books around a mid of ~100 with tick 0.01: (best offset, level gaps, sizes) per side.
fn book_strategy() -> impl Strategy<Value = OrderBookSnapshot<Decimal>> {
    let side = prop::collection::vec((1i64..40, 1i64..100_000), 0..25);
    (9_000i64..11_000, 1i64..20, side.clone(), side).prop_map(|(mid, half, bids, asks)| {
        let build = |levels: Vec<(i64, i64)>, sign: i64| {
            let mut offset = half;
            levels
                .into_iter()
                .map(|(gap, size)| {
                    let p = Decimal::from(mid + sign * offset) * TICK;
                    offset += gap;
                    PriceLevel::new(p, Decimal::new(size, 2)).unwrap()
                })
                .collect()
        };
        OrderBookSnapshot::new("TEST-USD", t0(), build(bids, -1), build(asks, 1)).unwrap()
    })
}

fn two_sided(book: &OrderBookSnapshot<Decimal>) -> bool {
    !book.bids.is_empty() && !book.asks.is_empty()
}

fn trade_strategy() -> impl Strategy<Value = TradeRecord<Decimal>> {
    (
        any::<bool>(),
        1i64..1_000_000,
        1i64..100_000,
        0i64..600_000,
        any::<bool>(),
    )
        .prop_map(|(buy, size, price, ms, liq)| {
            TradeRecord::new(
                "TEST-USD",
                if buy { TradeSide::Buy } else { TradeSide::Sell },
                Decimal::new(size, 3),
                Decimal::new(price, 2),
                t0() + Duration::milliseconds(ms),
                liq,
            )
            .unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn depth_is_monotone_in_spread(book in book_strategy()) {
        prop_assume!(two_sided(&book));
        let mut prev = SideDepth::zero();
        for s in spreads() {
            let d = depth_within_spread(&book, s).unwrap();
            prop_assert!(d.bid_depth_usd >= prev.bid_depth_usd);
            prop_assert!(d.ask_depth_usd >= prev.ask_depth_usd);
            prev = d;
        }
    }

    #[test]
    fn depth_scales_with_sizes(book in book_strategy(), k in 1i64..50) {
        prop_assume!(two_sided(&book));
        let factor = Decimal::from(k);
        let scaled = book.scaled(factor);
        for s in spreads() {
            let a = depth_within_spread(&book, s).unwrap();
            let b = depth_within_spread(&scaled, s).unwrap();
            prop_assert_eq!(b.bid_depth_usd, a.bid_depth_usd * factor);
            prop_assert_eq!(b.ask_depth_usd, a.ask_depth_usd * factor);
        }
    }

    #[test]
    fn rlq_scales_and_is_bounded(book in book_strategy(), k in 1i64..20) {
        prop_assume!(two_sided(&book));
        let factor = Decimal::from(k);
        let scaled = book.scaled(factor);
        for s in spreads() {
            let depth = depth_within_spread(&book, s).unwrap();
            for (side, side_depth) in [(BookSide::Bid, depth.bid_depth_usd), (BookSide::Ask, depth.ask_depth_usd)] {
                let r = relative_liquidity(&book, s, side, TICK).unwrap();
                let rs = relative_liquidity(&scaled, s, side, TICK).unwrap();
                prop_assert!(r.rlq <= side_depth);
                prop_assert!(r.rlq >= Decimal::ZERO);
                prop_assert!((rs.rlq - r.rlq * factor).abs() <= Decimal::new(1, 12) * (Decimal::ONE + rs.rlq));
                if !r.weights.is_empty() {
                    let total: Decimal = r.weights.iter().map(|w| w.1).sum();
                    prop_assert!((total - Decimal::ONE).abs() < Decimal::new(1, 20));
                }
            }
        }
    }

    #[test]
    fn min_tick_monotone(tick in 1i64..10_000, price in 1i64..10_000_000, extra in 1i64..10_000) {
        let spec = |t: i64, p: i64| MarketSpec::new("X", Decimal::new(t, 4), Decimal::new(p, 2), 40).unwrap();
        prop_assert!(min_tick_bps(&spec(tick + extra, price)) > min_tick_bps(&spec(tick, price)));
        prop_assert!(min_tick_bps(&spec(tick, price + extra)) < min_tick_bps(&spec(tick, price)));
    }

    #[test]
    fn reconstruction_conserves_notional(trades in prop::collection::vec(trade_strategy(), 0..200), include in any::<bool>()) {
        let opts = ReconstructionOptions { include_liquidations: include, ..Default::default() };
        let recon = reconstruct_minute_books(&trades, opts);
        let kept = trades.iter().filter(|t| include || !t.liquidation);
        let expected: Decimal = kept.clone().map(TradeRecord::notional).sum();
        let got: Decimal = recon.iter().map(|r| r.bid_notional + r.ask_notional).sum();
        prop_assert_eq!(got, expected);
        let buys: Decimal = kept.filter(|t| t.side == TradeSide::Buy).map(TradeRecord::notional).sum();
        prop_assert_eq!(recon.iter().map(|r| r.ask_notional).sum::<Decimal>(), buys);
        let buckets = bucket_trades_per_minute(&trades);
        let bucketed: Decimal = buckets.values().map(|b| b.volume()).sum();
        prop_assert_eq!(bucketed, trades.iter().map(TradeRecord::notional).sum::<Decimal>());
    }

    #[test]
    fn reconstruction_ignores_input_order(trades in prop::collection::vec(trade_strategy(), 0..100), seed in any::<u64>()) {
        let mut shuffled = trades.clone();
        let n = shuffled.len();
        if n > 1 {
            let mut s = seed;
            for i in (1..n).rev() {
                s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                shuffled.swap(i, (s >> 33) as usize % (i + 1));
            }
        }
        let a = reconstruct_minute_books(&trades, ReconstructionOptions::default());
        let b = reconstruct_minute_books(&shuffled, ReconstructionOptions::default());
        prop_assert_eq!(a, b);
    }

    #[test]
    fn buy_only_tapes_leave_bids_empty(trades in prop::collection::vec(trade_strategy(), 1..100)) {
        let buys: Vec<_> = trades.into_iter().map(|mut t| { t.side = TradeSide::Buy; t }).collect();
        for r in reconstruct_minute_books(&buys, ReconstructionOptions::default()) {
            prop_assert!(r.bid_levels.is_empty());
            prop_assert_eq!(r.bid_notional, Decimal::ZERO);
        }
    }
}

fn grid_from_books(books: &[OrderBookSnapshot<Decimal>]) -> DepthGrid<Decimal> {
    depth_grid(books, &spreads()).unwrap()
}

fn timed_books(books: Vec<OrderBookSnapshot<Decimal>>) -> Vec<OrderBookSnapshot<Decimal>> {
    books
        .into_iter()
        .enumerate()
        .map(|(i, mut b)| {
            b.ts = t0() + Duration::minutes(i as i64);
            b
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn insufficiency_non_increasing(books in prop::collection::vec(book_strategy(), 1..30),
                                    trades in prop::collection::vec(trade_strategy(), 1..200)) {
        let books = timed_books(books);
        let grid = grid_from_books(&books);
        let buckets = bucket_trades_per_minute(&trades);
        let mut prev: Option<Decimal> = None;
        for s in spreads() {
            let Ok(p) = insufficiency_percentage(&grid, &buckets, s, Decimal::new(8, 1)) else { return Ok(()); };
            if let Some(prev) = prev {
                prop_assert!(p <= prev);
            }
            prev = Some(p);
        }
    }

    #[test]
    fn breaches_non_increasing(books in prop::collection::vec(book_strategy(), 12..13),
                               trades in prop::collection::vec(trade_strategy(), 1..200)) {
        let books = timed_books(books);
        let grid = grid_from_books(&books);
        let recon = reconstruct_minute_books(&trades, ReconstructionOptions::default());
        let start = t0().timestamp() + 4 * 60;
        let event = EventWindow::new("e", start, start + 4 * 60).unwrap().with_padding(240, 240).unwrap();
        let mut prev = usize::MAX;
        for s in spreads() {
            let p = event_depth_profile(&grid, &recon, &event, s, "TEST-USD").unwrap();
            prop_assert!(p.summary.breach_count <= prev);
            prev = p.summary.breach_count;
        }
    }
}

fn series(values: &[i64]) -> DepthSeries<Decimal> {
    DepthSeries {
        market: "TEST-USD".into(),
        spread_bps: Decimal::from(20),
        points: values
            .iter()
            .enumerate()
            .map(|(i, &v)| (t0() + Duration::minutes(i as i64), Decimal::from(v)))
            .collect(),
    }
}

/// Direct scan: first in-event minute below threshold, then first later minute at or above it.
fn brute_force_recovery(
    values: &[i64],
    pre: usize,
    during: usize,
    fraction: Decimal,
) -> Option<i64> {
    let baseline = Decimal::from(values[..pre].iter().sum::<i64>()) / Decimal::from(pre as i64);
    let threshold = baseline * fraction;
    let mut trough = None;
    for (i, v) in values.iter().enumerate().take(pre + during).skip(pre) {
        if Decimal::from(*v) < threshold {
            trough = Some(i);
            break;
        }
    }
    let Some(t) = trough else { return Some(0) };
    for (i, v) in values.iter().enumerate().skip(t + 1) {
        if Decimal::from(*v) >= threshold {
            return Some((i - t) as i64);
        }
    }
    None
}

proptest! {
    #[test]
    fn recovery_matches_brute_force(values in prop::collection::vec(1i64..1000, 12..40), pre in 1usize..5, during in 1usize..5, k in 1i64..9) {
        let post = values.len() - pre - during;
        let event = EventWindow::new(
            "e",
            t0().timestamp() + pre as i64 * 60,
            t0().timestamp() + (pre + during) as i64 * 60,
        )
        .unwrap()
        .with_padding(pre as i64 * 60, post as i64 * 60)
        .unwrap();
        let fraction = Decimal::new(75, 2);
        let report = time_to_recovery(&series(&values), &event, fraction).unwrap();
        prop_assert_eq!(report.recovery_minutes, brute_force_recovery(&values, pre, during, fraction));
        let scaled: Vec<i64> = values.iter().map(|v| v * k).collect();
        let report_scaled = time_to_recovery(&series(&scaled), &event, fraction).unwrap();
        prop_assert_eq!(report_scaled.recovery_minutes, report.recovery_minutes);
    }

    #[test]
    fn q_increasing_in_volume(d in 0.01f64..1e6, u in 0.01f64..1.0, v in 1.0f64..1e9, dv in 1.0f64..1e6, z in 0.05f64..1.0) {
        let w = QWeights::new(0.35, z).unwrap();
        let a = q_final(&LpEpochSample::new("a", d, u, v).unwrap(), &w);
        let b = q_final(&LpEpochSample::new("a", d, u, v + dv).unwrap(), &w);
        prop_assert!(b > a);
    }

    #[test]
    fn shares_sum_to_one_and_ignore_depth_scaling(
        lps in prop::collection::vec((0.01f64..1e6, 0.0f64..1.0, 0.0f64..1e9), 1..12),
        c in 0.01f64..100.0,
    ) {
        let samples: Vec<_> = lps.iter().enumerate()
            .map(|(i, &(d, u, v))| LpEpochSample::new(format!("lp{i:02}"), d, u, v).unwrap())
            .collect();
        let w = QWeights::altcoins();
        let Ok(shares) = reward_shares(&samples, &w, 1000.0) else { return Ok(()); };
        let total: f64 = shares.values().map(|s| s.share).sum();
        prop_assert!((total - 1.0).abs() < 1e-9);
        let scaled: Vec<_> = samples.iter().map(|s| LpEpochSample { depth_spread_score: s.depth_spread_score * c, ..s.clone() }).collect();
        let shares_scaled = reward_shares(&scaled, &w, 1000.0).unwrap();
        for (a, sa) in &shares {
            prop_assert!((shares_scaled[a].share - sa.share).abs() < 1e-9);
        }
    }

    #[test]
    fn dmm_score_ignores_metric_order(metrics in prop::collection::vec((0i64..1000, 1i64..1000), 1..8), rot in 0usize..8) {
        let bid = |m: &[(i64, i64)]| DmmBid {
            account: "lp".into(),
            metric_values: m.iter().map(|p| Decimal::from(p.0)).collect(),
            metric_totals: m.iter().map(|p| Decimal::from(p.1)).collect(),
            committed_liquidity: Decimal::ZERO,
            penalty_fraction: Decimal::ZERO,
            reward_fraction: Decimal::ZERO,
        };
        let mut rotated = metrics.clone();
        let len = rotated.len();
        rotated.rotate_left(rot % len);
        rotated.reverse();
        let a = dmm_score(&bid(&metrics)).unwrap();
        let b = dmm_score(&bid(&rotated)).unwrap();
        prop_assert!((a - b).abs() < Decimal::new(1, 20));
    }

    #[test]
    fn rebate_tier_monotone(a in 0i64..20_000, b in 0i64..20_000) {
        let schedule = normal_schedule::<Decimal>();
        let (lo, hi) = (a.min(b), a.max(b));
        let rate = |x: i64| assign_rebate_tier(Decimal::new(x, 6), &schedule).map(|t| t.rebate_rate).unwrap_or_default();
        prop_assert!(rate(hi) >= rate(lo));
    }
}

#[test]
fn linear_volume_equivalence_is_exact() {
    let samples = vec![
        LpEpochSample::new("a", 5.0, 1.0, 3.0).unwrap(),
        LpEpochSample::new("b", 9.0, 1.0, 1.0).unwrap(),
    ];
    let shares = reward_shares(&samples, &QWeights::new(0.0, 1.0).unwrap(), 1.0).unwrap();
    assert_eq!(shares["a"].share, 0.75);
    assert_eq!(shares["b"].share, 0.25);
}

#[test]
fn one_sided_rows_are_flagged_zero() {
    let book = OrderBookSnapshot::new(
        "TEST-USD",
        t0(),
        vec![PriceLevel::new(Decimal::from(99), Decimal::ONE).unwrap()],
        vec![],
    )
    .unwrap();
    let grid = grid_from_books(&[book]);
    let GridRow {
        one_sided, depths, ..
    } = &grid.rows[0];
    assert!(*one_sided);
    assert!(depths.iter().all(|d| d.total() == Decimal::ZERO));
}

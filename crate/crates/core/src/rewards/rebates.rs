use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// USD rebate earned on `volume` at `rate`.
pub fn rebate_value<S: Scalar>(volume: S, rate: S) -> Result<S> {
    if volume < S::zero() || rate < S::zero() {
        return Err(Error::Validation(
            "volume and rate must be non-negative".into(),
        ));
    }
    Ok(volume * rate)
}

/// Fee revenue less the rebates paid to the DMM share of volume.
pub fn fee_margin<S: Scalar>(fee_revenue: S, volume: S, rebate_rate: S, dmm_share: S) -> Result<S> {
    if fee_revenue < S::zero()
        || volume < S::zero()
        || rebate_rate < S::zero()
        || dmm_share < S::zero()
    {
        return Err(Error::Validation(
            "fee margin inputs must be non-negative".into(),
        ));
    }
    if dmm_share > S::one() {
        return Err(Error::Validation("dmm share must not exceed 1".into()));
    }
    Ok(fee_revenue - volume * rebate_rate * dmm_share)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow<S> {
    pub volume: S,
    pub rebate_low: S,
    pub rebate_high: S,
    pub rewards: S,
    pub crossover_low: S,
    pub crossover_high: S,
}

/// Volume at which rebates at `rate` cost as much as `rewards`.
pub fn crossover_volume<S: Scalar>(rewards: S, rate: S) -> Result<S> {
    if !(rate > S::zero() && rate < S::one()) {
        return Err(Error::Validation("rebate rate must lie in (0, 1)".into()));
    }
    if rewards < S::zero() {
        return Err(Error::Validation("rewards must be non-negative".into()));
    }
    Ok(rewards / rate)
}

/// Rebate cost at two rates against a fixed reward budget, per volume.
pub fn rebates_vs_rewards_curve<S: Scalar>(
    volumes: &[S],
    rate_low: S,
    rate_high: S,
    rewards: S,
) -> Result<Vec<CurveRow<S>>> {
    let crossover_low = crossover_volume(rewards, rate_low)?;
    let crossover_high = crossover_volume(rewards, rate_high)?;
    volumes
        .iter()
        .map(|&v| {
            Ok(CurveRow {
                volume: v,
                rebate_low: rebate_value(v, rate_low)?,
                rebate_high: rebate_value(v, rate_high)?,
                rewards,
                crossover_low,
                crossover_high,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RebateTier<S> {
    pub label: String,
    /// Maker share of 30-day volume, as a fraction.
    pub min_volume_share: S,
    /// Rebate as a fraction of notional.
    pub rebate_rate: S,
}

impl<S: Scalar> RebateTier<S> {
    pub fn new(label: impl Into<String>, min_volume_share: S, rebate_rate: S) -> Self {
        Self {
            label: label.into(),
            min_volume_share,
            rebate_rate,
        }
    }
}

/// Checks shares strictly increase and rates never decrease.
pub fn validate_schedule<S: Scalar>(tiers: &[RebateTier<S>]) -> Result<()> {
    if tiers.is_empty() {
        return Err(Error::Validation("rebate schedule is empty".into()));
    }
    for t in tiers {
        if t.min_volume_share < S::zero() || t.rebate_rate < S::zero() {
            return Err(Error::Validation(format!(
                "tier {}: negative share or rate",
                t.label
            )));
        }
    }
    for pair in tiers.windows(2) {
        if pair[1].min_volume_share <= pair[0].min_volume_share {
            return Err(Error::Validation(format!(
                "tier {} must require a larger volume share than {}",
                pair[1].label, pair[0].label
            )));
        }
        if pair[1].rebate_rate < pair[0].rebate_rate {
            return Err(Error::Validation(format!(
                "tier {} pays less than {}",
                pair[1].label, pair[0].label
            )));
        }
    }
    Ok(())
}

fn pct<S: Scalar>(s: &str) -> S {
    S::parse_str(s).expect("literal") / S::from_int(100)
}

/// Exchange-wide maker rebates by 30-day volume share.
pub fn normal_schedule<S: Scalar>() -> Vec<RebateTier<S>> {
    [
        ("Tier 1", "0.1", "0.0025"),
        ("Tier 2", "0.25", "0.0040"),
        ("Tier 3", "0.5", "0.0050"),
        ("Tier 4", "0.75", "0.0065"),
        ("Tier 5", "1", "0.0100"),
    ]
    .into_iter()
    .map(|(l, s, r)| RebateTier::new(l, pct(s), pct(r)))
    .collect()
}

/// Long-tail market rebates by 30-day market volume share.
pub fn enhanced_schedule<S: Scalar>() -> Vec<RebateTier<S>> {
    [("Tier 1", "5", "0.0125"), ("Tier 2", "10", "0.0150")]
        .into_iter()
        .map(|(l, s, r)| RebateTier::new(l, pct(s), pct(r)))
        .collect()
}

/// Highest tier whose threshold the share meets.
pub fn assign_rebate_tier<S: Scalar>(
    volume_share: S,
    schedule: &[RebateTier<S>],
) -> Option<&RebateTier<S>> {
    schedule
        .iter()
        .rev()
        .find(|t| t.min_volume_share <= volume_share)
}

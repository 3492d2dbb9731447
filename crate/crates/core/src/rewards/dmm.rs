use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// A designated-market-maker application.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DmmBid<S> {
    pub account: String,
    pub metric_values: Vec<S>,
    pub metric_totals: Vec<S>,
    pub committed_liquidity: S,
    pub penalty_fraction: S,
    pub reward_fraction: S,
}

/// Σ xᵢ / totalᵢ.
pub fn dmm_score<S: Scalar>(bid: &DmmBid<S>) -> Result<S> {
    if bid.metric_values.len() != bid.metric_totals.len() {
        return Err(Error::Validation(format!(
            "{}: {} metric values but {} totals",
            bid.account,
            bid.metric_values.len(),
            bid.metric_totals.len()
        )));
    }
    let mut score = S::zero();
    for (idx, (&x, &total)) in bid.metric_values.iter().zip(&bid.metric_totals).enumerate() {
        if total <= S::zero() {
            return Err(Error::ZeroTotal(idx));
        }
        score = score + x / total;
    }
    Ok(score)
}

/// Daily liquidity × days × rate.
pub fn dmm_stake_requirement<S: Scalar>(daily_liquidity: S, days: u32, rate: S) -> Result<S> {
    if daily_liquidity < S::zero() || rate < S::zero() {
        return Err(Error::Validation(
            "liquidity and rate must be non-negative".into(),
        ));
    }
    Ok(daily_liquidity * S::from_int(days as i64) * rate)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PenaltyReward<S> {
    pub penalty: S,
    pub reward: S,
}

pub fn dmm_penalty_reward<S: Scalar>(
    staked: S,
    penalty_fraction: S,
    reward_fraction: S,
) -> Result<PenaltyReward<S>> {
    let unit = |f: S| f >= S::zero() && f <= S::one();
    if !unit(penalty_fraction) || !unit(reward_fraction) {
        return Err(Error::Validation(
            "penalty and reward fractions must lie in [0, 1]".into(),
        ));
    }
    Ok(PenaltyReward {
        penalty: staked * penalty_fraction,
        reward: staked * reward_fraction,
    })
}

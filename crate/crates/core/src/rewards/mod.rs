//! Incentive mechanisms: epoch Q scores and reward shares, maker rebates,
//! designated-market-maker arithmetic and tiered reward allocation.
//!
//! Q scores involve fractional powers and are generic over [`num_traits::Float`];
//! the money arithmetic is generic over [`Scalar`](crate::Scalar) so it can run
//! exactly on decimals.

mod dmm;
mod io;
mod qscore;
mod rebates;
mod tiers;

pub use dmm::{dmm_penalty_reward, dmm_score, dmm_stake_requirement, DmmBid, PenaltyReward};
pub use io::{load_epoch_stats, load_fees, load_rebate_schedule, EpochRow};
pub use qscore::{
    apply_volatility_multiplier, depth_spread_score, linear_volume_q, q_final, reward_shares,
    LpEpochSample, QWeights, RewardShare, DEFAULT_VOLATILITY_MULTIPLIER,
};
pub use rebates::{
    assign_rebate_tier, crossover_volume, enhanced_schedule, fee_margin, normal_schedule,
    rebate_value, rebates_vs_rewards_curve, validate_schedule, CurveRow, RebateTier,
};
pub use tiers::{default_allocation, default_tiers, tier_allocation, TierRow, TierTable};

/// USD per DYDX token for reward conversions.
pub const DEFAULT_TOKEN_PRICE_USD: i64 = 2;

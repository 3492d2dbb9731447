use std::collections::BTreeMap;

use num_traits::Float;
use serde::Serialize;

use crate::error::{Error, Result};

/// Exponents of the epoch Q score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QWeights<F> {
    /// Exponent on the depth/spread score.
    pub y: F,
    /// Exponent on maker volume.
    pub z: F,
    pub uptime_exponent: F,
}

impl<F: Float> QWeights<F> {
    pub fn new(y: F, z: F) -> Result<Self> {
        if !(y >= F::zero() && z >= F::zero()) {
            return Err(Error::Validation("Q weights must be non-negative".into()));
        }
        Ok(Self {
            y,
            z,
            uptime_exponent: F::from(5.0).expect("representable"),
        })
    }

    /// y = 0.15, z = 0.85.
    pub fn majors() -> Self {
        Self::new(F::from(0.15).unwrap(), F::from(0.85).unwrap()).expect("valid")
    }

    /// y = 0.35, z = 0.65.
    pub fn altcoins() -> Self {
        Self::new(F::from(0.35).unwrap(), F::from(0.65).unwrap()).expect("valid")
    }

    /// Weights for a market: BTC and ETH use the majors set.
    pub fn for_market(market: &str) -> Self {
        let base = market.split('-').next().unwrap_or(market);
        if base.eq_ignore_ascii_case("BTC") || base.eq_ignore_ascii_case("ETH") {
            Self::majors()
        } else {
            Self::altcoins()
        }
    }

    /// Pure maker-volume weighting.
    pub fn linear_volume() -> Self {
        Self {
            y: F::zero(),
            z: F::one(),
            uptime_exponent: F::zero(),
        }
    }
}

/// One LP's epoch inputs to the Q score.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpEpochSample<F> {
    pub account: String,
    /// Sum of depth/spread over the LP's quotes, pre-aggregated.
    pub depth_spread_score: F,
    /// Fraction of samples with qualifying two-sided quotes.
    pub uptime: F,
    pub maker_volume: F,
}

impl<F: Float> LpEpochSample<F> {
    pub fn new(
        account: impl Into<String>,
        depth_spread_score: F,
        uptime: F,
        maker_volume: F,
    ) -> Result<Self> {
        let account = account.into();
        if !(depth_spread_score >= F::zero() && maker_volume >= F::zero()) {
            return Err(Error::Validation(format!(
                "{account}: negative score or volume"
            )));
        }
        if !(uptime >= F::zero() && uptime <= F::one()) {
            return Err(Error::Validation(format!(
                "{account}: uptime must lie in [0, 1]"
            )));
        }
        Ok(Self {
            account,
            depth_spread_score,
            uptime,
            maker_volume,
        })
    }
}

/// Σ depth / spread over `(depth, spread)` quote samples; zero spreads are skipped.
pub fn depth_spread_score<F: Float>(samples: &[(F, F)]) -> F {
    samples
        .iter()
        .filter(|(_, s)| *s > F::zero())
        .fold(F::zero(), |acc, &(d, s)| acc + d / s)
}

fn weighted<F: Float>(base: F, exponent: F) -> F {
    if exponent == F::zero() {
        F::one()
    } else {
        base.powf(exponent)
    }
}

/// score^y × uptime^5 × volume^z.
pub fn q_final<F: Float>(sample: &LpEpochSample<F>, w: &QWeights<F>) -> F {
    weighted(sample.depth_spread_score, w.y)
        * weighted(sample.uptime, w.uptime_exponent)
        * weighted(sample.maker_volume, w.z)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RewardShare<F> {
    pub q: F,
    pub share: F,
    pub tokens: F,
}

/// Splits `pool` in proportion to each LP's Q score.
pub fn reward_shares<F: Float>(
    samples: &[LpEpochSample<F>],
    w: &QWeights<F>,
    pool: F,
) -> Result<BTreeMap<String, RewardShare<F>>> {
    let qs: Vec<(String, F)> = samples
        .iter()
        .map(|s| (s.account.clone(), q_final(s, w)))
        .collect();
    shares_from_q(qs, pool)
}

pub(crate) fn shares_from_q<F: Float>(
    qs: Vec<(String, F)>,
    pool: F,
) -> Result<BTreeMap<String, RewardShare<F>>> {
    let total = qs.iter().fold(F::zero(), |acc, (_, q)| acc + *q);
    if total.is_nan() || total <= F::zero() {
        return Err(Error::NoEligibleLps);
    }
    let mut out = BTreeMap::new();
    for (account, q) in qs {
        let entry = out.entry(account).or_insert(RewardShare {
            q: F::zero(),
            share: F::zero(),
            tokens: F::zero(),
        });
        entry.q = entry.q + q;
    }
    for v in out.values_mut() {
        v.share = v.q / total;
        v.tokens = v.share * pool;
    }
    Ok(out)
}

/// Q = maker volume.
pub fn linear_volume_q<F: Float>(samples: &[LpEpochSample<F>]) -> BTreeMap<String, F> {
    let mut out = BTreeMap::new();
    for s in samples {
        let e = out.entry(s.account.clone()).or_insert(F::zero());
        *e = *e + s.maker_volume;
    }
    out
}

/// Scales Q on a volatile day.
pub fn apply_volatility_multiplier<F: Float>(q: F, is_volatile: bool, multiplier: F) -> Result<F> {
    if multiplier.is_nan() || multiplier < F::one() {
        return Err(Error::Validation(
            "volatility multiplier must be at least 1".into(),
        ));
    }
    Ok(if is_volatile { q * multiplier } else { q })
}

pub const DEFAULT_VOLATILITY_MULTIPLIER: f64 = 2.0;

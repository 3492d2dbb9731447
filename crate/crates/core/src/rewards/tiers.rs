use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TierRow<S> {
    pub tier: String,
    pub market_count: usize,
    pub fee_revenue: S,
    /// Tier fees as a fraction of all tiered fees.
    pub fee_share: S,
    pub allocation: S,
    pub reward_usd: S,
    /// Tiered markets with no fee record.
    pub missing_markets: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TierTable<S> {
    pub pool_usd: S,
    pub rows: Vec<TierRow<S>>,
}

impl<S: Scalar> TierTable<S> {
    pub fn total_fees(&self) -> S {
        self.rows.iter().map(|r| r.fee_revenue).sum()
    }

    pub fn row(&self, tier: &str) -> Option<&TierRow<S>> {
        self.rows.iter().find(|r| r.tier == tier)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "tier,market_count,fee_revenue,fee_share,allocation,reward_usd,missing_markets\n",
        );
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.tier,
                r.market_count,
                r.fee_revenue,
                r.fee_share,
                r.allocation,
                r.reward_usd,
                r.missing_markets.join(";")
            ));
        }
        out
    }
}

fn fee_for<'a, S>(fees: &'a BTreeMap<String, S>, market: &str) -> Option<&'a S> {
    fees.get(market)
        .or_else(|| fees.get(&format!("{market}-USD")))
        .or_else(|| market.strip_suffix("-USD").and_then(|m| fees.get(m)))
}

/// Per-tier fee totals and reward budgets.
///
/// Market names match with or without the `-USD` suffix. Markets missing
/// from `fees` contribute nothing and are listed on their tier's row.
pub fn tier_allocation<S: Scalar>(
    fees: &BTreeMap<String, S>,
    tiers: &BTreeMap<String, Vec<String>>,
    allocation: &BTreeMap<String, S>,
    pool_usd: S,
) -> Result<TierTable<S>> {
    let total_alloc: S = allocation.values().copied().sum();
    if total_alloc > S::one() || allocation.values().any(|a| *a < S::zero()) {
        return Err(Error::Validation(
            "tier allocations must be non-negative and sum to at most 1".into(),
        ));
    }
    let mut rows = Vec::with_capacity(tiers.len());
    for (tier, markets) in tiers {
        let mut missing = Vec::new();
        let mut revenue = S::zero();
        for m in markets {
            match fee_for(fees, m) {
                Some(f) => revenue = revenue + *f,
                None => missing.push(m.clone()),
            }
        }
        if !missing.is_empty() {
            log::warn!("{tier}: no fee record for {}", missing.join(", "));
        }
        let alloc = allocation.get(tier).copied().unwrap_or_else(S::zero);
        rows.push(TierRow {
            tier: tier.clone(),
            market_count: markets.len(),
            fee_revenue: revenue,
            fee_share: S::zero(),
            allocation: alloc,
            reward_usd: pool_usd * alloc,
            missing_markets: missing,
        });
    }
    let total: S = rows.iter().map(|r| r.fee_revenue).sum();
    if total > S::zero() {
        for r in &mut rows {
            r.fee_share = r.fee_revenue / total;
        }
    }
    Ok(TierTable { pool_usd, rows })
}

fn owned(list: &[&str]) -> Vec<String> {
    list.iter().map(|s| s.to_string()).collect()
}

/// Suggested four-tier grouping of altcoin markets by fee revenue.
pub fn default_tiers() -> BTreeMap<String, Vec<String>> {
    BTreeMap::from([
        (
            "Tier 1".into(),
            owned(&["SOL", "MATIC", "LTC", "AVAX", "ADA", "DOGE", "ATOM"]),
        ),
        (
            "Tier 2".into(),
            owned(&[
                "CRV", "FIL", "UNI", "LINK", "SNX", "AAVE", "TRX", "NEAR", "EOS", "DOT",
            ]),
        ),
        (
            "Tier 3".into(),
            owned(&[
                "ICP", "ALGO", "1INCH", "XTZ", "BCH", "MKR", "XMR", "YFI", "SUSHI", "ETC",
            ]),
        ),
        (
            "Tier 4".into(),
            owned(&["XLM", "COMP", "CELO", "ENJ", "ZRX", "ZEC", "RUNE", "UMA"]),
        ),
    ])
}

/// Suggested allocation when altcoins receive 80% of the pool.
pub fn default_allocation<S: Scalar>() -> BTreeMap<String, S> {
    [
        ("Tier 1", 40),
        ("Tier 2", 20),
        ("Tier 3", 15),
        ("Tier 4", 5),
    ]
    .into_iter()
    .map(|(t, p)| (t.to_string(), S::ratio(p, 100)))
    .collect()
}

#[cfg(test)]
mod tests {
    use rust_decimal::Decimal;
    use rust_decimal_macros::dec;

    use super::*;

    #[test]
    fn sums_and_missing_rows() {
        let fees: BTreeMap<String, Decimal> =
            BTreeMap::from([("SOL-USD".into(), dec!(10.5)), ("ADA".into(), dec!(2))]);
        let tiers = BTreeMap::from([
            ("A".to_string(), owned(&["SOL", "ADA-USD", "XYZ"])),
            ("B".to_string(), vec![]),
        ]);
        let alloc = BTreeMap::from([("A".to_string(), dec!(0.4))]);
        let t = tier_allocation(&fees, &tiers, &alloc, dec!(1000)).unwrap();
        let a = t.row("A").unwrap();
        assert_eq!(a.fee_revenue, dec!(12.5));
        assert_eq!(a.missing_markets, vec!["XYZ".to_string()]);
        assert_eq!(a.reward_usd, dec!(400));
        assert_eq!(a.fee_share, dec!(1));
        assert_eq!(t.row("B").unwrap().fee_revenue, dec!(0));
        assert!(t.to_csv().contains("A,3,12.5,1,0.4,400.0,XYZ\n"));
    }

    #[test]
    fn rejects_over_allocation() {
        let alloc = BTreeMap::from([("A".to_string(), dec!(0.7)), ("B".to_string(), dec!(0.4))]);
        assert!(tier_allocation(&BTreeMap::new(), &BTreeMap::new(), &alloc, dec!(1)).is_err());
        let total: Decimal = default_allocation::<Decimal>().values().copied().sum();
        assert_eq!(total, dec!(0.8));
    }
}

use std::collections::BTreeMap;

use serde::Serialize;

use super::conditions::retest_key;
use super::config::CalibrationConfig;
use super::sweep::{CalibrationResult, Rationale};
use crate::scalar::Scalar;

/// Coverage backtest outcome for one market at one spread.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InsufficiencyRow<S> {
    /// Market id, suffixed `_<percent>` for widened re-tests.
    pub key: String,
    pub spread_bps: S,
    pub insufficiency_pct: Option<S>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketRow<S> {
    pub market: String,
    pub original_bps: u32,
    pub chosen_bps: S,
    /// Spread after any widening re-test.
    pub tested_bps: S,
    pub revised_bps: u32,
    pub rationale: Rationale,
    pub widened: bool,
    /// Insufficiency at `chosen_bps` is within the initial threshold.
    pub within_initial_threshold: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BracketTable<S> {
    pub rows: Vec<BracketRow<S>>,
    pub insufficiency: Vec<InsufficiencyRow<S>>,
    /// Bracket → markets, every configured bracket present.
    pub brackets: BTreeMap<u32, Vec<String>>,
}

impl<S: Scalar> BracketTable<S> {
    /// `market,original_bps,revised_bps,rationale`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("market,original_bps,revised_bps,rationale\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{},{},{},{}\n",
                r.market, r.original_bps, r.revised_bps, r.rationale
            ));
        }
        out
    }

    pub fn insufficiency_csv(&self) -> String {
        let mut out = String::from("key,spread_bps,insufficiency_pct\n");
        for r in &self.insufficiency {
            let pct = r
                .insufficiency_pct
                .map(|p| p.to_string())
                .unwrap_or_default();
            out.push_str(&format!("{},{},{}\n", r.key, r.spread_bps, pct));
        }
        out
    }
}

/// Smallest bracket at least as wide as `bps`, else the widest bracket.
pub fn bracket_for<S: Scalar>(bps: S, brackets: &[u32]) -> u32 {
    brackets
        .iter()
        .copied()
        .find(|&b| S::from_int(b as i64) >= bps)
        .or_else(|| brackets.last().copied())
        .expect("brackets are non-empty")
}

/// Assigns every market to a bracket.
///
/// A market whose coverage backtest fails in at least
/// `insufficiency_threshold_widen` of minutes at its chosen spread is
/// re-tested once at the next wider swept spread and bracketed there.
pub fn classify_markets<S: Scalar>(
    results: &[CalibrationResult<S>],
    cfg: &CalibrationConfig<S>,
) -> BracketTable<S> {
    let widen_pct = cfg.insufficiency_threshold_widen * S::from_int(100);
    let initial_pct = cfg.insufficiency_threshold_initial * S::from_int(100);
    let mut sorted: Vec<&CalibrationResult<S>> = results.iter().collect();
    sorted.sort_by(|a, b| a.market.cmp(&b.market));

    let mut rows = Vec::new();
    let mut insufficiency = Vec::new();
    let mut brackets: BTreeMap<u32, Vec<String>> =
        cfg.brackets_bps.iter().map(|&b| (b, Vec::new())).collect();

    for result in sorted {
        let chosen = result.chosen_bps;
        let at_chosen = result.summary_at(chosen).and_then(|s| s.insufficiency_pct);
        insufficiency.push(InsufficiencyRow {
            key: result.market.clone(),
            spread_bps: chosen,
            insufficiency_pct: at_chosen,
        });

        let mut tested = chosen;
        let mut widened = false;
        if result.rationale != Rationale::TickConstrained {
            if let Some(pct) = at_chosen {
                let wider = result.spreads.iter().find(|s| s.spread_bps > chosen);
                if pct >= widen_pct {
                    if let Some(next) = wider {
                        tested = next.spread_bps;
                        widened = true;
                        insufficiency.push(InsufficiencyRow {
                            key: retest_key(&result.market, next.spread_bps),
                            spread_bps: next.spread_bps,
                            insufficiency_pct: next.insufficiency_pct,
                        });
                    }
                }
            }
        }
        let revised = bracket_for(tested, &cfg.brackets_bps);
        brackets
            .entry(revised)
            .or_default()
            .push(result.market.clone());
        rows.push(BracketRow {
            market: result.market.clone(),
            original_bps: result.original_bps,
            chosen_bps: chosen,
            tested_bps: tested,
            revised_bps: revised,
            rationale: result.rationale,
            widened,
            within_initial_threshold: at_chosen.map(|p| p <= initial_pct),
        });
    }
    BracketTable {
        rows,
        insufficiency,
        brackets,
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::liquidity_metrics::validate_spreads;
use crate::scalar::Scalar;

/// What per-minute demand mean book depth must cover for condition 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DemandStatistic {
    /// Mean demand over trade-active minutes.
    Mean,
    /// 95th percentile of per-minute demand.
    #[default]
    P95,
    /// Largest single-minute demand.
    Max,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationConfig<S> {
    pub spreads_bps: Vec<S>,
    /// Share of a minute's volume each side must cover in the backtest.
    pub volume_coverage_fraction: S,
    pub insufficiency_threshold_initial: S,
    /// Insufficiency share at or above which a market is widened.
    pub insufficiency_threshold_widen: S,
    pub adf_significance: f64,
    pub adf_max_lag: Option<usize>,
    pub recovery_fraction: S,
    pub condition2_statistic: DemandStatistic,
    /// Enforce the spread-density and RLQ conditions as well.
    pub draft_mode: bool,
    /// A market whose single tick is at least this wide (bps) is tick-constrained.
    pub tick_constrained_min_bps: S,
    /// Bracket assigned to tick-constrained markets.
    pub tick_constrained_bracket: S,
    pub brackets_bps: Vec<u32>,
    pub event_breach_tolerance: usize,
}

impl<S: Scalar> Default for CalibrationConfig<S> {
    fn default() -> Self {
        Self {
            spreads_bps: [5, 10, 15, 20, 30, 40, 50]
                .into_iter()
                .map(S::from_int)
                .collect(),
            volume_coverage_fraction: S::ratio(80, 100),
            insufficiency_threshold_initial: S::ratio(1, 100),
            insufficiency_threshold_widen: S::ratio(5, 100),
            adf_significance: 0.05,
            adf_max_lag: None,
            recovery_fraction: S::ratio(75, 100),
            condition2_statistic: DemandStatistic::P95,
            draft_mode: false,
            tick_constrained_min_bps: S::from_int(40),
            tick_constrained_bracket: S::from_int(40),
            brackets_bps: vec![15, 20, 30, 40],
            event_breach_tolerance: 0,
        }
    }
}

impl<S: Scalar> CalibrationConfig<S> {
    /// Bracket set used before the final revision: 10/20/30/40.
    pub fn with_draft_brackets(mut self) -> Self {
        self.brackets_bps = vec![10, 20, 30, 40];
        self
    }

    pub fn validate(&self) -> Result<()> {
        validate_spreads(&self.spreads_bps)?;
        let fractions = [
            ("volume_coverage_fraction", self.volume_coverage_fraction),
            (
                "insufficiency_threshold_initial",
                self.insufficiency_threshold_initial,
            ),
            (
                "insufficiency_threshold_widen",
                self.insufficiency_threshold_widen,
            ),
            ("recovery_fraction", self.recovery_fraction),
        ];
        for (name, v) in fractions {
            if v <= S::zero() || v > S::one() {
                return Err(Error::Validation(format!(
                    "{name} must be in (0, 1], got {v}"
                )));
            }
        }
        if !(self.adf_significance > 0.0 && self.adf_significance < 1.0) {
            return Err(Error::Validation(
                "adf_significance must be in (0, 1)".into(),
            ));
        }
        if self.brackets_bps.is_empty() || self.brackets_bps.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Validation(
                "brackets must be non-empty and increasing".into(),
            ));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use rust_decimal::Decimal;
    use rust_decimal_macros::dec;

    use super::*;

    #[test]
    fn defaults_are_valid() {
        let cfg = CalibrationConfig::<Decimal>::default();
        cfg.validate().unwrap();
        assert_eq!(cfg.volume_coverage_fraction, dec!(0.8));
        assert_eq!(cfg.spreads_bps.len(), 7);
        assert_eq!(cfg.with_draft_brackets().brackets_bps, vec![10, 20, 30, 40]);
    }

    #[test]
    fn rejects_bad_fractions_and_spreads() {
        let cfg = CalibrationConfig::<Decimal> {
            recovery_fraction: dec!(1.5),
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        let cfg = CalibrationConfig::<Decimal> {
            spreads_bps: vec![dec!(10), dec!(10)],
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }
}

//! maxSpread calibration: the spread sweep, acceptance conditions, the
//! ADF stationarity test, insufficiency backtests and bracket classification.

pub mod adf;
mod classify;
mod conditions;
mod config;
mod sweep;

pub use adf::{adf_test, AdfResult};
pub use classify::{bracket_for, classify_markets, BracketRow, BracketTable, InsufficiencyRow};
pub use conditions::{
    condition1_tick, condition2_depth, insufficiency_percentage, retest_key, Condition2,
    DemandProfile,
};
pub use config::{CalibrationConfig, DemandStatistic};
pub use sweep::{
    sweep_max_spread, CalibrationResult, MarketData, Rationale, SpreadSummary, SpreadVerdicts,
    StationarityCheck,
};

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::qscore::LpEpochSample;
use super::rebates::{validate_schedule, RebateTier};
use crate::error::{Error, Result};
use crate::market_data::{csv_line, csv_reader, open_reader};
use crate::scalar::Scalar;

/// One row of an epoch LP table.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochRow {
    pub account: String,
    pub reward_share_pct: f64,
    pub maker_volume_pct: f64,
    pub uptime_pct: f64,
    pub depth_spread_score: Option<f64>,
}

impl EpochRow {
    /// Q-score inputs; a missing depth score is neutral (1).
    pub fn sample(&self) -> Result<LpEpochSample<f64>> {
        LpEpochSample::new(
            self.account.clone(),
            self.depth_spread_score.unwrap_or(1.0),
            self.uptime_pct / 100.0,
            self.maker_volume_pct,
        )
    }
}

#[derive(Debug, Deserialize)]
struct RawEpoch {
    account: String,
    #[serde(rename = "rewardSharePct")]
    reward_share_pct: f64,
    #[serde(rename = "makerVolumePct")]
    maker_volume_pct: f64,
    #[serde(rename = "uptimePct")]
    uptime_pct: f64,
    #[serde(rename = "depthSpreadScore", default)]
    depth_spread_score: Option<f64>,
}

/// Loads `account,rewardSharePct,makerVolumePct,uptimePct[,depthSpreadScore]`.
pub fn load_epoch_stats(path: &Path) -> Result<Vec<EpochRow>> {
    let mut rdr = csv_reader(path)?;
    let mut rows = Vec::new();
    for (idx, row) in rdr.deserialize::<RawEpoch>().enumerate() {
        let line = idx + 2;
        let r = row.map_err(|e| Error::parse(path, csv_line(&e, line), e.to_string()))?;
        let row = EpochRow {
            account: r.account,
            reward_share_pct: r.reward_share_pct,
            maker_volume_pct: r.maker_volume_pct,
            uptime_pct: r.uptime_pct,
            depth_spread_score: r.depth_spread_score,
        };
        row.sample()
            .map_err(|e| Error::Validation(format!("{}: line {line}: {e}", path.display())))?;
        rows.push(row);
    }
    Ok(rows)
}

#[derive(Debug, Deserialize)]
struct RawFee {
    market: String,
    fees: String,
}

/// Loads `market,fees` into a map; duplicate markets are rejected.
pub fn load_fees<S: Scalar>(path: &Path) -> Result<BTreeMap<String, S>> {
    let mut rdr = csv_reader(path)?;
    let mut out = BTreeMap::new();
    for (idx, row) in rdr.deserialize::<RawFee>().enumerate() {
        let line = idx + 2;
        let r = row.map_err(|e| Error::parse(path, csv_line(&e, line), e.to_string()))?;
        let fee = S::parse_str(&r.fees)
            .ok_or_else(|| Error::parse(path, line, format!("bad fees {:?}", r.fees)))?;
        if out.insert(r.market.clone(), fee).is_some() {
            return Err(Error::parse(
                path,
                line,
                format!("duplicate market {}", r.market),
            ));
        }
    }
    Ok(out)
}

fn number_text(v: &serde_json::Value) -> Option<String> {
    match v {
        serde_json::Value::Number(n) => Some(n.to_string()),
        serde_json::Value::String(s) => Some(s.clone()),
        _ => None,
    }
}

/// Loads a rebate schedule: `[[tiers]]` in TOML, or a JSON array / `{"tiers": [...]}`,
/// each entry `{label, minVolumeShare, rate}` with fractional values.
pub fn load_rebate_schedule<S: Scalar>(path: &Path) -> Result<Vec<RebateTier<S>>> {
    let mut text = String::new();
    std::io::Read::read_to_string(&mut open_reader(path)?, &mut text)
        .map_err(|e| Error::io(path, e))?;
    let is_toml = path
        .to_string_lossy()
        .trim_end_matches(".gz")
        .to_ascii_lowercase()
        .ends_with(".toml");
    let value: serde_json::Value = if is_toml {
        let t: toml::Value =
            toml::from_str(&text).map_err(|e| Error::parse(path, 0, e.to_string()))?;
        toml_to_json(t)
    } else {
        serde_json::from_str(&text).map_err(|e| Error::parse(path, e.line(), e.to_string()))?
    };
    let entries = match &value {
        serde_json::Value::Array(a) => a.clone(),
        serde_json::Value::Object(o) => match o.get("tiers") {
            Some(serde_json::Value::Array(a)) => a.clone(),
            _ => return Err(Error::parse(path, 0, "expected a `tiers` list")),
        },
        _ => return Err(Error::parse(path, 0, "expected a list of tiers")),
    };
    let mut tiers = Vec::with_capacity(entries.len());
    for (idx, e) in entries.iter().enumerate() {
        let field = |name: &str| -> Result<S> {
            e.get(name)
                .and_then(number_text)
                .and_then(|t| S::parse_str(&t))
                .ok_or_else(|| {
                    Error::parse(path, 0, format!("tier {idx}: missing or bad `{name}`"))
                })
        };
        let label = e
            .get("label")
            .and_then(|l| l.as_str())
            .map(str::to_owned)
            .unwrap_or_else(|| format!("Tier {}", idx + 1));
        tiers.push(RebateTier::new(
            label,
            field("minVolumeShare")?,
            field("rate")?,
        ));
    }
    validate_schedule(&tiers)?;
    Ok(tiers)
}

fn toml_to_json(v: toml::Value) -> serde_json::Value {
    match v {
        toml::Value::String(s) => serde_json::Value::String(s),
        // Route through text so decimal scalars see the literal digits.
        toml::Value::Integer(i) => serde_json::Value::String(i.to_string()),
        toml::Value::Float(f) => serde_json::Value::String(f.to_string()),
        toml::Value::Boolean(b) => serde_json::Value::Bool(b),
        toml::Value::Datetime(d) => serde_json::Value::String(d.to_string()),
        toml::Value::Array(a) => {
            serde_json::Value::Array(a.into_iter().map(toml_to_json).collect())
        }
        toml::Value::Table(t) => {
            serde_json::Value::Object(t.into_iter().map(|(k, v)| (k, toml_to_json(v))).collect())
        }
    }
}

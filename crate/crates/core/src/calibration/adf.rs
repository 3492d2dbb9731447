//! Augmented Dickey-Fuller unit-root test with an intercept and AIC lag
//! selection.
//!
//! The test regression is
//! `Δy_t = α + γ·y_{t−1} + Σ_{i=1..p} β_i·Δy_{t−i} + ε_t`
//! and the statistic is the t-ratio of `γ`. Candidate lags `0..=max_lag` are
//! compared on a common sample; the chosen lag is then refitted on the
//! longest sample it allows.

use num_traits::Float;

use crate::error::{Error, Result};

/// Minimum regression sample after differencing and lagging.
pub const MIN_REGRESSION_OBS: usize = 20;

/// MacKinnon (2010) response-surface coefficients, constant-only case.
const TAU_C_1PCT: [f64; 4] = [-3.43035, -6.5393, -16.786, -79.433];
const TAU_C_5PCT: [f64; 4] = [-2.86154, -2.8903, -4.234, -40.040];
const TAU_C_10PCT: [f64; 4] = [-2.56677, -1.5384, -2.809, 0.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
pub enum Significance {
    #[serde(rename = "0.01")]
    OnePercent,
    #[default]
    #[serde(rename = "0.05")]
    FivePercent,
    #[serde(rename = "0.10")]
    TenPercent,
}

impl Significance {
    /// Closest supported level to `alpha`.
    pub fn from_alpha(alpha: f64) -> Self {
        [
            (0.01, Significance::OnePercent),
            (0.05, Significance::FivePercent),
            (0.10, Significance::TenPercent),
        ]
        .into_iter()
        .min_by(|a, b| (a.0 - alpha).abs().total_cmp(&(b.0 - alpha).abs()))
        .map(|(_, s)| s)
        .unwrap_or_default()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct AdfResult<F> {
    pub statistic: F,
    pub lag: usize,
    pub n_obs: usize,
    pub critical_1pct: F,
    pub critical_5pct: F,
    pub critical_10pct: F,
    /// `statistic` below the critical value at the requested significance.
    pub stationary: bool,
}

fn surface<F: Float>(coef: &[f64; 4], nobs: usize) -> F {
    let t = nobs as f64;
    F::from(coef[0] + coef[1] / t + coef[2] / (t * t) + coef[3] / (t * t * t)).unwrap()
}

/// Default lag cap `floor(12 · (n/100)^¼)`, never above `n/2 − 2`.
pub fn default_max_lag(n: usize) -> usize {
    let schwert = (12.0 * (n as f64 / 100.0).powf(0.25)).floor() as usize;
    schwert.min((n / 2).saturating_sub(2))
}

/// ADF at 5%.
pub fn adf_test<F: Float>(series: &[F], max_lag: Option<usize>) -> Result<AdfResult<F>> {
    adf_test_at(series, max_lag, Significance::FivePercent)
}

pub fn adf_test_at<F: Float>(
    series: &[F],
    max_lag: Option<usize>,
    significance: Significance,
) -> Result<AdfResult<F>> {
    if series.iter().any(|v| !v.is_finite()) {
        return Err(Error::DegenerateSeries(
            "series contains non-finite values".into(),
        ));
    }
    let n = series.len();
    if n < MIN_REGRESSION_OBS + 2 {
        return Err(Error::SeriesTooShort {
            needed: MIN_REGRESSION_OBS + 2,
            got: n,
        });
    }
    if series.iter().all(|&v| v == series[0]) {
        return Err(Error::DegenerateSeries("series is constant".into()));
    }
    let room = n - 1 - MIN_REGRESSION_OBS;
    let max_lag = match max_lag {
        Some(l) if l > room => {
            return Err(Error::SeriesTooShort {
                needed: l + 1 + MIN_REGRESSION_OBS,
                got: n,
            })
        }
        Some(l) => l,
        None => default_max_lag(n).min(room),
    };

    let diffs: Vec<F> = series.windows(2).map(|w| w[1] - w[0]).collect();

    // lag search on the common sample that max_lag allows
    let mut best: Option<(F, usize)> = None;
    for lag in 0..=max_lag {
        let fit = fit_adf_regression(series, &diffs, lag, max_lag)?;
        let aic = fit.aic();
        if best.is_none_or(|(b, _)| aic < b) {
            best = Some((aic, lag));
        }
    }
    let lag = best.map(|(_, l)| l).unwrap_or(0);
    let fit = fit_adf_regression(series, &diffs, lag, lag)?;
    let statistic = fit.coef[0] / fit.std_err[0];
    let n_obs = fit.nobs;
    let critical_1pct = surface(&TAU_C_1PCT, n_obs);
    let critical_5pct = surface(&TAU_C_5PCT, n_obs);
    let critical_10pct = surface(&TAU_C_10PCT, n_obs);
    let critical = match significance {
        Significance::OnePercent => critical_1pct,
        Significance::FivePercent => critical_5pct,
        Significance::TenPercent => critical_10pct,
    };
    Ok(AdfResult {
        statistic,
        lag,
        n_obs,
        critical_1pct,
        critical_5pct,
        critical_10pct,
        stationary: statistic < critical,
    })
}

/// Regression rows `t = start..diffs.len()`, columns
/// `[y_t, Δy_{t−1}, …, Δy_{t−lag}, 1]`, target `Δy_t`.
fn fit_adf_regression<F: Float>(
    levels: &[F],
    diffs: &[F],
    lag: usize,
    start: usize,
) -> Result<OlsFit<F>> {
    let rows = diffs.len() - start;
    let k = lag + 2;
    let mut x = vec![vec![F::zero(); k]; rows];
    let mut y = vec![F::zero(); rows];
    for (r, t) in (start..diffs.len()).enumerate() {
        y[r] = diffs[t];
        x[r][0] = levels[t];
        for i in 1..=lag {
            x[r][i] = diffs[t - i];
        }
        x[r][k - 1] = F::one();
    }
    ols(&x, &y)
}

#[derive(Debug, Clone)]
struct OlsFit<F> {
    coef: Vec<F>,
    std_err: Vec<F>,
    ssr: F,
    nobs: usize,
}

impl<F: Float> OlsFit<F> {
    /// Gaussian AIC, `−2·llf + 2k`.
    fn aic(&self) -> F {
        let n = F::from(self.nobs).unwrap();
        let two = F::from(2.0).unwrap();
        let two_pi = F::from(2.0 * std::f64::consts::PI).unwrap();
        let llf = -n / two * (two_pi.ln() + (self.ssr / n).ln() + F::one());
        -two * llf + two * F::from(self.coef.len()).unwrap()
    }
}

/// Least squares via Householder QR. `x` is row-major.
#[allow(clippy::needless_range_loop)]
fn ols<F: Float>(x: &[Vec<F>], y: &[F]) -> Result<OlsFit<F>> {
    let n = x.len();
    let k = x.first().map_or(0, Vec::len);
    if n <= k {
        return Err(Error::SeriesTooShort {
            needed: k + 1,
            got: n,
        });
    }
    // column-major working copy
    let mut a: Vec<Vec<F>> = (0..k)
        .map(|j| x.iter().map(|row| row[j]).collect())
        .collect();
    let mut b = y.to_vec();
    for j in 0..k {
        let norm = a[j][j..]
            .iter()
            .fold(F::zero(), |acc, &v| acc + v * v)
            .sqrt();
        if norm == F::zero() {
            return Err(Error::DegenerateSeries("singular regression design".into()));
        }
        let alpha = if a[j][j] > F::zero() { -norm } else { norm };
        let mut v: Vec<F> = a[j][j..].to_vec();
        v[0] = v[0] - alpha;
        let vnorm2 = v.iter().fold(F::zero(), |acc, &e| acc + e * e);
        if vnorm2 == F::zero() {
            continue;
        }
        let two = F::from(2.0).unwrap();
        for col in a.iter_mut().skip(j) {
            let dot = v
                .iter()
                .zip(&col[j..])
                .fold(F::zero(), |acc, (&p, &q)| acc + p * q);
            let f = two * dot / vnorm2;
            for (c, &vi) in col[j..].iter_mut().zip(&v) {
                *c = *c - f * vi;
            }
        }
        let dot = v
            .iter()
            .zip(&b[j..])
            .fold(F::zero(), |acc, (&p, &q)| acc + p * q);
        let f = two * dot / vnorm2;
        for (c, &vi) in b[j..].iter_mut().zip(&v) {
            *c = *c - f * vi;
        }
    }
    let r = |i: usize, j: usize| a[j][i];
    let scale = (0..k).map(|i| r(i, i).abs()).fold(F::zero(), F::max);
    if (0..k).any(|i| r(i, i).abs() <= scale * F::epsilon() * F::from(n).unwrap()) {
        return Err(Error::DegenerateSeries("singular regression design".into()));
    }

    // back-substitute R·β = Qᵀy
    let mut coef = vec![F::zero(); k];
    for i in (0..k).rev() {
        let mut s = b[i];
        for j in i + 1..k {
            s = s - r(i, j) * coef[j];
        }
        coef[i] = s / r(i, i);
    }
    let ssr = b[k..].iter().fold(F::zero(), |acc, &e| acc + e * e);
    let sigma2 = ssr / F::from(n - k).unwrap();

    // (XᵀX)⁻¹ = R⁻¹R⁻ᵀ; diagonal = squared row norms of R⁻¹
    let mut rinv = vec![vec![F::zero(); k]; k];
    for i in 0..k {
        rinv[i][i] = F::one() / r(i, i);
        for j in (0..i).rev() {
            let mut s = F::zero();
            for m in j + 1..=i {
                s = s + r(j, m) * rinv[m][i];
            }
            rinv[j][i] = -s / r(j, j);
        }
    }
    let std_err = (0..k)
        .map(|i| {
            let d = rinv[i][i..].iter().fold(F::zero(), |acc, &e| acc + e * e);
            (sigma2 * d).sqrt()
        })
        .collect();
    Ok(OlsFit {
        coef,
        std_err,
        ssr,
        nobs: n,
    })
}

//! Descriptive statistics in the scalar's own arithmetic.

use crate::scalar::Scalar;

pub fn mean<S: Scalar>(values: &[S]) -> Option<S> {
    if values.is_empty() {
        return None;
    }
    let sum: S = values.iter().copied().sum();
    Some(sum / S::from_int(values.len() as i64))
}

/// Population standard deviation.
pub fn population_std<S: Scalar>(values: &[S]) -> Option<S> {
    let m = mean(values)?;
    let ss: S = values.iter().map(|&v| (v - m) * (v - m)).sum();
    Some((ss / S::from_int(values.len() as i64)).sqrt())
}

pub fn max<S: Scalar>(values: &[S]) -> Option<S> {
    values.iter().copied().reduce(S::max_of)
}

pub fn min<S: Scalar>(values: &[S]) -> Option<S> {
    values.iter().copied().reduce(S::min_of)
}

pub fn sorted<S: Scalar>(values: &[S]) -> Vec<S> {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    v
}

/// Quantile with linear interpolation between order statistics
/// (position `(n − 1)·q`), `q` in `[0, 1]`.
pub fn quantile<S: Scalar>(values: &[S], q: S) -> Option<S> {
    if values.is_empty() {
        return None;
    }
    let v = sorted(values);
    let pos = S::from_int(v.len() as i64 - 1) * q;
    let lo = pos.floor();
    let frac = pos - lo;
    let lo_idx = lo.to_usize().unwrap_or(0).min(v.len() - 1);
    let hi_idx = (lo_idx + 1).min(v.len() - 1);
    Some(v[lo_idx] + (v[hi_idx] - v[lo_idx]) * frac)
}

pub fn median<S: Scalar>(values: &[S]) -> Option<S> {
    quantile(values, S::ratio(1, 2))
}

pub fn p95<S: Scalar>(values: &[S]) -> Option<S> {
    quantile(values, S::ratio(95, 100))
}

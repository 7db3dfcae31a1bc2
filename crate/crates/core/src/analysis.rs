//! Measurements on sampled curves: decoherence time, tail fluctuations,
//! the `|r₁|²` envelope and windowed recurrence search.
//!
//! Analysis functions read the real part of each curve value. Feed them a
//! real metric, e.g. `|r₁(t)|²` or [`Curve::normalized_abs2`]. Every time they
//! report is a grid time, so it carries an uncertainty of one grid spacing.

use alloc::vec::Vec;

use crate::closed_form::{sample_real_curve, Curve};
use crate::error::{Error, Result};
use crate::math::pairwise_sum;
use crate::model::{ModelConfig, TimeGrid};

/// `1/e`.
pub const DEFAULT_THRESHOLD: f64 = 0.367_879_441_171_442_33;
/// Samples that must stay below the threshold after the crossing sample.
pub const DEFAULT_PERSISTENCE: usize = 5;
/// Level a decohered metric has to climb back to for the report's recurrence.
pub const DEFAULT_RECURRENCE_THRESHOLD: f64 = 0.5;

/// First time `t_k` with `v_k < threshold` and `v_{k+1..=k+persistence} < threshold`
/// (the window is cut at the end of the curve). `None` if it never happens.
///
/// Requires `0 < threshold < v(t_start)`.
pub fn decoherence_time_with(
    curve: &Curve,
    threshold: f64,
    persistence: usize,
) -> Result<Option<f64>> {
    let values = curve.re();
    Ok(first_sustained_drop(&values, threshold, persistence)?.map(|k| curve.grid().time(k)))
}

/// [`decoherence_time_with`] using [`DEFAULT_PERSISTENCE`].
pub fn decoherence_time(curve: &Curve, threshold: f64) -> Result<Option<f64>> {
    decoherence_time_with(curve, threshold, DEFAULT_PERSISTENCE)
}

fn first_sustained_drop(
    values: &[f64],
    threshold: f64,
    persistence: usize,
) -> Result<Option<usize>> {
    let v0 = values[0];
    if !(threshold > 0.0 && threshold < v0) {
        return Err(Error::ThresholdOutOfRange {
            threshold,
            upper: v0,
        });
    }
    // run[k]: number of consecutive sub-threshold samples starting at k.
    let mut run = alloc::vec![0usize; values.len() + 1];
    for k in (0..values.len()).rev() {
        run[k] = if values[k] < threshold {
            run[k + 1] + 1
        } else {
            0
        };
    }
    Ok((0..values.len()).find(|&k| {
        let needed = (persistence + 1).min(values.len() - k);
        run[k] >= needed
    }))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluctuationStats {
    pub rms: f64,
    pub max_abs: f64,
}

/// RMS and maximum modulus of the samples with `t ≥ t_from`.
pub fn fluctuation_stats(curve: &Curve, t_from: f64) -> Result<FluctuationStats> {
    let grid = curve.grid();
    if !(t_from >= grid.t_start() && t_from <= grid.t_end()) {
        return Err(Error::EmptyWindow(t_from));
    }
    let tail: Vec<f64> = curve
        .points()
        .filter(|(t, _)| *t >= t_from)
        .map(|(_, v)| v.re)
        .collect();
    if tail.is_empty() {
        return Err(Error::EmptyWindow(t_from));
    }
    let squares: Vec<f64> = tail.iter().map(|v| v * v).collect();
    let rms = libm::sqrt(pairwise_sum(&squares) / tail.len() as f64);
    let max_abs = tail.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    Ok(FluctuationStats { rms, max_abs })
}

/// Bounds on the factors of `|r₁(t)|²`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeBounds {
    /// `∏ᵢ (2|αᵢ|² − 1)²`.
    pub min_product: f64,
    /// Always 1, attained at `t = 0`.
    pub max_product: f64,
    /// `(2|αᵢ|² − 1)²` per particle; factor `i` stays in `[factor_min[i], 1]`.
    pub factor_min: Vec<f64>,
    /// Whether all factor minima can occur at the same time. Only asserted
    /// for a single particle or a common coupling; otherwise `min_product`
    /// is a factor-wise bound, not an attained value.
    pub simultaneous: bool,
}

pub fn envelope_bounds(config: &ModelConfig) -> EnvelopeBounds {
    let factor_min: Vec<f64> = config
        .env()
        .iter()
        .map(|q| {
            let d = 2.0 * q.weight_up() - 1.0;
            d * d
        })
        .collect();
    let min_product = factor_min.iter().product();
    let g0 = config.env()[0].g();
    EnvelopeBounds {
        min_product,
        max_product: 1.0,
        factor_min,
        simultaneous: config.env().iter().all(|q| q.g() == g0),
    }
}

fn first_return(values: &[f64], from: usize, threshold: f64) -> Option<usize> {
    (from + 1..values.len()).find(|&k| values[k] >= threshold)
}

/// A return of a decohered metric to its initial level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Recurrence {
    /// Earliest grid time after the first sustained drop with metric ≥ threshold.
    pub onset: f64,
    /// Grid time of the largest metric value within the excursion that starts
    /// at `onset`. Sits within one grid spacing of the true return for a
    /// smooth, exactly recurring metric, whereas `onset` leads it by roughly
    /// the initial decay time.
    pub peak: f64,
    pub peak_value: f64,
}

/// Searches `window` for the first return of `metric` to `threshold` after
/// its first sustained drop below it.
pub fn recurrence_search<F>(
    config: &ModelConfig,
    metric: F,
    threshold: f64,
    window: &TimeGrid,
) -> Result<Option<Recurrence>>
where
    F: Fn(&ModelConfig, f64) -> f64,
{
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::ThresholdOutOfRange {
            threshold,
            upper: 1.0,
        });
    }
    let curve = sample_real_curve(window, |t| metric(config, t));
    let values = curve.re();
    let Some(drop) = first_sustained_drop(&values, threshold, DEFAULT_PERSISTENCE)? else {
        return Ok(None);
    };
    let Some(onset) = first_return(&values, drop, threshold) else {
        return Ok(None);
    };
    let mut peak = onset;
    for k in onset..values.len() {
        if values[k] < threshold {
            break;
        }
        if values[k] > values[peak] {
            peak = k;
        }
    }
    Ok(Some(Recurrence {
        onset: window.time(onset),
        peak: window.time(peak),
        peak_value: values[peak],
    }))
}

/// Summary of one metric curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecoherenceReport {
    pub decoherence_time: Option<f64>,
    pub threshold: f64,
    /// Over `t ≥ decoherence_time`, or the whole curve if it never decoheres.
    pub fluctuation_rms: f64,
    pub fluctuation_max: f64,
    /// First return to `recurrence_threshold` after the decoherence time.
    pub recurrence_time: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportOptions {
    pub threshold: f64,
    pub persistence: usize,
    pub recurrence_threshold: f64,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_THRESHOLD,
            persistence: DEFAULT_PERSISTENCE,
            recurrence_threshold: DEFAULT_RECURRENCE_THRESHOLD,
        }
    }
}

/// Builds a [`DecoherenceReport`] for a metric curve normalized to start at 1.
pub fn report(metric: &Curve, opts: &ReportOptions) -> Result<DecoherenceReport> {
    let values = metric.re();
    let drop = first_sustained_drop(&values, opts.threshold, opts.persistence)?;
    let grid = metric.grid();
    let t_from = drop.map_or(grid.t_start(), |k| grid.time(k));
    let fl = fluctuation_stats(metric, t_from)?;
    let recurrence = drop
        .and_then(|k| first_return(&values, k, opts.recurrence_threshold))
        .map(|k| grid.time(k));
    Ok(DecoherenceReport {
        decoherence_time: drop.map(|k| grid.time(k)),
        threshold: opts.threshold,
        fluctuation_rms: fl.rms,
        fluctuation_max: fl.max_abs,
        recurrence_time: recurrence,
    })
}

//! Backflow intervals and amounts from the current through the origin and
//! the probability of staying on the left.

use std::fmt;

use crate::quadrature::integrate;
use crate::{Dynamics, Error, Result};

/// Samples of a scalar on a strictly increasing time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    values: Vec<f64>,
}

impl TimeSeries {
    pub fn new(times: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if times.len() != values.len() {
            return Err(Error::InvalidSeries(format!(
                "{} times but {} values",
                times.len(),
                values.len()
            )));
        }
        if let Some(k) = times.windows(2).position(|w| w[0] >= w[1] || w[0].is_nan() || w[1].is_nan()) {
            return Err(Error::InvalidSeries(format!("times not strictly increasing at index {}", k + 1)));
        }
        if let Some(k) = times.iter().chain(&values).position(|v| !v.is_finite()) {
            return Err(Error::InvalidSeries(format!("non-finite entry at position {k}")));
        }
        Ok(Self { times, values })
    }

    /// Evaluates `f` on `times`.
    pub fn sample<F>(times: Vec<f64>, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<f64>,
    {
        let values = times.iter().map(|&t| f(t)).collect::<Result<Vec<_>>>()?;
        Self::new(times, values)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }
}

/// Closed time window `[t_lo, t_hi]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub t_lo: f64,
    pub t_hi: f64,
}

impl Window {
    /// Negative start times need `allow_negative_time`.
    pub fn new(t_lo: f64, t_hi: f64, allow_negative_time: bool) -> Result<Self> {
        if !(t_lo.is_finite() && t_hi.is_finite() && t_hi > t_lo) {
            return Err(Error::InvalidParameter { name: "t_hi", value: t_hi, reason: "need finite t_lo < t_hi" });
        }
        if t_lo < 0.0 && !allow_negative_time {
            return Err(Error::NegativeTime { t: t_lo, reason: "negative times need the explicit opt-in" });
        }
        Ok(Self { t_lo, t_hi })
    }

    /// `t_lo + k·step` up to `t_hi`, with `t_hi` itself always included.
    pub fn grid(&self, step: f64) -> Result<Vec<f64>> {
        if !(step.is_finite() && step > 0.0) {
            return Err(Error::InvalidParameter { name: "step", value: step, reason: "must be finite and > 0" });
        }
        let span = self.t_hi - self.t_lo;
        let ratio = span / step;
        let k_max = if (ratio - ratio.round()).abs() < 1e-9 * ratio.max(1.0) { ratio.round() } else { ratio.floor() };
        if k_max > 1e8 {
            return Err(Error::InvalidParameter { name: "step", value: step, reason: "grid would exceed 1e8 points" });
        }
        let k_max = k_max as usize;
        let mut grid: Vec<f64> = (0..=k_max).map(|k| self.t_lo + k as f64 * step).collect();
        let last = grid.last_mut().expect("grid has at least one point");
        if (self.t_hi - *last).abs() <= 1e-9 * step {
            *last = self.t_hi;
        } else {
            grid.push(self.t_hi);
        }
        Ok(grid)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    /// Spacing of the sign-change scan.
    pub step: f64,
    /// Bisection stops when the bracket is this short.
    pub root_tolerance: f64,
    /// Absolute tolerance of the gain integral.
    pub gain_tolerance: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        Self { step: 1e-2, root_tolerance: 1e-10, gain_tolerance: 1e-10 }
    }
}

/// Maximal time interval with negative current and the probability it
/// returns to the left half-line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BackflowInterval {
    pub t_start: f64,
    pub t_end: f64,
    pub gain: f64,
    /// The current was already negative at the window start.
    pub clipped_start: bool,
    /// The current was still negative at the window end.
    pub clipped_end: bool,
}

impl BackflowInterval {
    pub fn duration(&self) -> f64 {
        self.t_end - self.t_start
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Warning {
    ClippedStart { t: f64 },
    ClippedEnd { t: f64 },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::ClippedStart { t } => {
                write!(f, "backflow interval starts at the window start t = {t}; it may extend earlier")
            }
            Warning::ClippedEnd { t } => {
                write!(f, "backflow interval reaches the window end t = {t}; it may extend later")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct IntervalReport {
    pub intervals: Vec<BackflowInterval>,
    pub warnings: Vec<Warning>,
}

impl IntervalReport {
    /// Gain of the interval with the largest gain, `0` without backflow.
    pub fn beta(&self) -> f64 {
        self.intervals.iter().map(|i| i.gain).fold(0.0, f64::max)
    }
}

/// Pointwise `(|j| − j)/2`.
pub fn negative_part(j: &TimeSeries) -> TimeSeries {
    TimeSeries {
        times: j.times.clone(),
        values: j.values.iter().map(|&v| 0.5 * (v.abs() - v)).collect(),
    }
}

/// Largest rise `P(t₂) − P(t₁)` with `t₁ < t₂`; `0` if `P` never increases.
pub fn beta_prime(p: &TimeSeries) -> f64 {
    let mut best = 0.0f64;
    let mut low = f64::INFINITY;
    for &v in &p.values {
        low = low.min(v);
        best = best.max(v - low);
    }
    best
}

/// Refines a sign change of `j` inside `[a, b]`, where `j(a)` and `j(b)`
/// differ in sign (`negative_at_a` says which way).
fn bisect<F>(j: &F, mut a: f64, mut b: f64, negative_at_a: bool, tol: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            break;
        }
        if (j(mid)? < 0.0) == negative_at_a {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

fn intervals_from_samples<F>(j: &F, times: &[f64], values: &[f64], opts: &ScanOptions) -> Result<IntervalReport>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut report = IntervalReport::default();
    let (Some(&t_lo), Some(&t_hi)) = (times.first(), times.last()) else {
        return Ok(report);
    };
    let mut open: Option<(f64, bool)> = None;
    if values[0] < 0.0 {
        open = Some((t_lo, true));
        report.warnings.push(Warning::ClippedStart { t: t_lo });
    }
    for k in 1..times.len() {
        let (was_neg, is_neg) = (values[k - 1] < 0.0, values[k] < 0.0);
        if was_neg == is_neg {
            continue;
        }
        let root = bisect(j, times[k - 1], times[k], was_neg, opts.root_tolerance)?;
        if is_neg {
            open = Some((root, false));
        } else if let Some((start, clipped_start)) = open.take() {
            report.intervals.push(finish(j, start, root, clipped_start, false, opts)?);
        }
    }
    if let Some((start, clipped_start)) = open {
        report.warnings.push(Warning::ClippedEnd { t: t_hi });
        report.intervals.push(finish(j, start, t_hi, clipped_start, true, opts)?);
    }
    Ok(report)
}

fn finish<F>(j: &F, t_start: f64, t_end: f64, clipped_start: bool, clipped_end: bool, opts: &ScanOptions) -> Result<BackflowInterval>
where
    F: Fn(f64) -> Result<f64>,
{
    let gain = integrate(|t| j(t).map(|v| -v), t_start, t_end, opts.gain_tolerance, 10_000)?.value;
    Ok(BackflowInterval { t_start, t_end, gain: gain.max(0.0), clipped_start, clipped_end })
}

/// Intervals of negative `j` inside `window`, found by a sign scan with
/// spacing `opts.step` and refined by bisection. Dips narrower than the scan
/// step can be missed.
pub fn backflow_intervals<F>(j: F, window: Window, opts: &ScanOptions) -> Result<IntervalReport>
where
    F: Fn(f64) -> Result<f64>,
{
    let series = TimeSeries::sample(window.grid(opts.step)?, &j)?;
    intervals_from_samples(&j, &series.times, &series.values, opts)
}

/// Gain of the highest negative peak of `j` in `window`.
pub fn beta<F>(j: F, window: Window, opts: &ScanOptions) -> Result<(f64, Vec<Warning>)>
where
    F: Fn(f64) -> Result<f64>,
{
    let report = backflow_intervals(j, window, opts)?;
    Ok((report.beta(), report.warnings))
}

/// Everything reported for one model over one window.
#[derive(Debug, Clone, PartialEq)]
pub struct Analysis {
    pub prob_left: TimeSeries,
    pub current: TimeSeries,
    pub intervals: Vec<BackflowInterval>,
    pub warnings: Vec<Warning>,
    pub beta: f64,
    /// Evaluated on the scan grid plus the interval end points.
    pub beta_prime: f64,
}

impl Analysis {
    pub fn first_interval(&self) -> Option<&BackflowInterval> {
        self.intervals.first()
    }
}

pub fn analyze<D: Dynamics + ?Sized>(model: &D, window: Window, opts: &ScanOptions) -> Result<Analysis> {
    if window.t_lo < model.earliest_time() {
        return Err(Error::NegativeTime { t: window.t_lo, reason: "the model is not defined before t = 0" });
    }
    let times = window.grid(opts.step)?;
    let j = |t: f64| model.current_origin(t);
    let current = TimeSeries::sample(times.clone(), j)?;
    let prob_left = TimeSeries::sample(times, |t| model.prob_left(t))?;
    let report = intervals_from_samples(&j, current.times(), current.values(), opts)?;

    let mut extra: Vec<f64> = report.intervals.iter().flat_map(|i| [i.t_start, i.t_end]).collect();
    extra.retain(|t| prob_left.times.binary_search_by(|x| x.total_cmp(t)).is_err());
    let beta_prime = if extra.is_empty() {
        beta_prime(&prob_left)
    } else {
        let mut pts: Vec<(f64, f64)> = prob_left.times.iter().copied().zip(prob_left.values.iter().copied()).collect();
        for t in extra {
            pts.push((t, model.prob_left(t)?));
        }
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        pts.dedup_by(|a, b| a.0 == b.0);
        let (t, v): (Vec<f64>, Vec<f64>) = pts.into_iter().unzip();
        beta_prime(&TimeSeries::new(t, v)?)
    };
    Ok(Analysis {
        beta: report.beta(),
        prob_left,
        current,
        intervals: report.intervals,
        warnings: report.warnings,
        beta_prime,
    })
}

//! Confusion matrices, MCC/F1, threshold sweeps and false alarm rates.
//!
//! Two scoring conventions are supported everywhere:
//!
//! * [`ScoringMode::Sample`] counts every step.
//! * [`ScoringMode::Event`] scores encounters. Each maximal block of positive
//!   labels is one positive event, detected if any prediction inside it is 1.
//!   Each maximal block of positive predictions lying entirely on background
//!   is one false alarm. A background block without false alarms is one true
//!   negative.
//!
//! False alarm rates are per hour of background-labeled time.

use alloc::vec::Vec;

use crate::inference::rolling_sums;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ConfusionMatrix {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl ConfusionMatrix {
    pub fn new(tp: u64, tn: u64, fp: u64, fn_: u64) -> Self {
        ConfusionMatrix { tp, tn, fp, fn_ }
    }

    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }

    pub fn positives(&self) -> u64 {
        self.tp + self.fn_
    }
}

impl core::ops::Add for ConfusionMatrix {
    type Output = Self;

    fn add(self, o: Self) -> Self {
        ConfusionMatrix {
            tp: self.tp + o.tp,
            tn: self.tn + o.tn,
            fp: self.fp + o.fp,
            fn_: self.fn_ + o.fn_,
        }
    }
}

impl core::ops::AddAssign for ConfusionMatrix {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoringMode {
    #[default]
    Sample,
    Event,
}

impl ScoringMode {
    pub fn as_str(self) -> &'static str {
        match self {
            ScoringMode::Sample => "sample",
            ScoringMode::Event => "event",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "sample" => Some(ScoringMode::Sample),
            "event" => Some(ScoringMode::Event),
            _ => None,
        }
    }
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

pub fn precision(cm: &ConfusionMatrix) -> f64 {
    ratio(cm.tp, cm.tp + cm.fp)
}

/// Recall, also the true positive rate.
pub fn recall(cm: &ConfusionMatrix) -> f64 {
    ratio(cm.tp, cm.tp + cm.fn_)
}

pub fn tpr(cm: &ConfusionMatrix) -> f64 {
    recall(cm)
}

pub fn fpr(cm: &ConfusionMatrix) -> f64 {
    ratio(cm.fp, cm.fp + cm.tn)
}

pub fn f1(cm: &ConfusionMatrix) -> f64 {
    let den = 2 * cm.tp + cm.fp + cm.fn_;
    ratio(2 * cm.tp, den)
}

/// Matthews correlation coefficient; 0 when any marginal is empty.
pub fn mcc(cm: &ConfusionMatrix) -> f64 {
    let (tp, tn, fp, fn_) = (cm.tp as f64, cm.tn as f64, cm.fp as f64, cm.fn_ as f64);
    let factors = [tp + fp, tp + fn_, tn + fp, tn + fn_];
    if factors.contains(&0.0) {
        return 0.0;
    }
    let den = libm::sqrt(factors[0] * factors[1] * factors[2] * factors[3]);
    (tp * tn - fp * fn_) / den
}

fn check_len(y: &[bool], labels: &[bool]) -> Result<()> {
    if y.len() != labels.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: labels.len(),
        });
    }
    Ok(())
}

fn sample_confusion(y: &[bool], labels: &[bool]) -> ConfusionMatrix {
    let mut cm = ConfusionMatrix::default();
    for (&p, &l) in y.iter().zip(labels) {
        match (p, l) {
            (true, true) => cm.tp += 1,
            (false, false) => cm.tn += 1,
            (true, false) => cm.fp += 1,
            (false, true) => cm.fn_ += 1,
        }
    }
    cm
}

/// Maximal runs of equal values as `(value, start, end)`.
fn blocks(v: &[bool]) -> impl Iterator<Item = (bool, usize, usize)> + '_ {
    let mut start = 0;
    core::iter::from_fn(move || {
        if start >= v.len() {
            return None;
        }
        let value = v[start];
        let end = v[start..]
            .iter()
            .position(|&x| x != value)
            .map_or(v.len(), |k| start + k);
        let block = (value, start, end);
        start = end;
        Some(block)
    })
}

fn event_confusion(y: &[bool], labels: &[bool]) -> ConfusionMatrix {
    let mut cm = ConfusionMatrix::default();
    // Background blocks that contain at least one false alarm.
    let mut alarmed = Vec::new();
    for (label, start, end) in blocks(labels) {
        if label {
            if y[start..end].iter().any(|&p| p) {
                cm.tp += 1;
            } else {
                cm.fn_ += 1;
            }
        } else {
            alarmed.push((start, end, false));
        }
    }
    let mut bg = 0;
    for (pred, start, end) in blocks(y) {
        if !pred || labels[start..end].iter().any(|&l| l) {
            continue;
        }
        cm.fp += 1;
        while alarmed[bg].1 <= start {
            bg += 1;
        }
        alarmed[bg].2 = true;
    }
    cm.tn = alarmed.iter().filter(|b| !b.2).count() as u64;
    cm
}

/// Confusion matrix of one prediction/label sequence.
pub fn confusion_one(y: &[bool], labels: &[bool], mode: ScoringMode) -> Result<ConfusionMatrix> {
    check_len(y, labels)?;
    Ok(match mode {
        ScoringMode::Sample => sample_confusion(y, labels),
        ScoringMode::Event => event_confusion(y, labels),
    })
}

/// Confusion matrix summed over independent sequences.
pub fn confusion<'a, I>(pairs: I, mode: ScoringMode) -> Result<ConfusionMatrix>
where
    I: IntoIterator<Item = (&'a [bool], &'a [bool])>,
{
    let mut cm = ConfusionMatrix::default();
    for (y, labels) in pairs {
        cm += confusion_one(y, labels, mode)?;
    }
    Ok(cm)
}

/// Output counts of one run alongside its labels.
#[derive(Debug, Clone, Copy)]
pub struct LabeledCounts<'a> {
    pub z: &'a [u32],
    pub labels: &'a [bool],
}

impl<'a> LabeledCounts<'a> {
    pub fn new(z: &'a [u32], labels: &'a [bool]) -> Self {
        LabeledCounts { z, labels }
    }
}

fn windowed(series: &[LabeledCounts<'_>], window: usize) -> Result<Vec<Vec<u32>>> {
    series
        .iter()
        .map(|s| {
            check_len_counts(s)?;
            Ok(rolling_sums(s.z, window))
        })
        .collect()
}

fn check_len_counts(s: &LabeledCounts<'_>) -> Result<()> {
    if s.z.len() != s.labels.len() {
        return Err(Error::LengthMismatch {
            left: s.z.len(),
            right: s.labels.len(),
        });
    }
    Ok(())
}

/// Confusion matrix at one threshold over windowed counts.
pub fn confusion_at(
    series: &[LabeledCounts<'_>],
    theta: u32,
    window: usize,
    mode: ScoringMode,
) -> Result<ConfusionMatrix> {
    let sums = windowed(series, window)?;
    confusion_at_sums(&sums, series, theta, mode)
}

fn confusion_at_sums(
    sums: &[Vec<u32>],
    series: &[LabeledCounts<'_>],
    theta: u32,
    mode: ScoringMode,
) -> Result<ConfusionMatrix> {
    let mut cm = ConfusionMatrix::default();
    let mut y = Vec::new();
    for (s, labels) in sums.iter().zip(series.iter().map(|s| s.labels)) {
        y.clear();
        y.extend(s.iter().map(|&c| c > theta));
        cm += confusion_one(&y, labels, mode)?;
    }
    Ok(cm)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RocPoint {
    pub theta: u32,
    pub far_per_hour: f64,
    pub tpr: f64,
}

/// Operating points for every threshold from 0 to the largest observed count.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
}

impl RocCurve {
    pub fn max_tpr(&self) -> f64 {
        self.points.iter().map(|p| p.tpr).fold(0.0, f64::max)
    }
}

/// Per-threshold confusion matrices for `theta = 0..=max count`.
pub fn sweep(
    series: &[LabeledCounts<'_>],
    window: usize,
    mode: ScoringMode,
) -> Result<Vec<(u32, ConfusionMatrix)>> {
    let sums = windowed(series, window)?;
    let max = sums.iter().flatten().copied().max().unwrap_or(0);
    match mode {
        ScoringMode::Sample => Ok(sample_sweep(&sums, series, max)),
        ScoringMode::Event => (0..=max)
            .map(|theta| Ok((theta, confusion_at_sums(&sums, series, theta, mode)?)))
            .collect(),
    }
}

// Histogram form of the sample-mode sweep: one pass over the data instead of
// one per threshold.
fn sample_sweep(
    sums: &[Vec<u32>],
    series: &[LabeledCounts<'_>],
    max: u32,
) -> Vec<(u32, ConfusionMatrix)> {
    let bins = max as usize + 1;
    let mut pos = alloc::vec![0u64; bins];
    let mut neg = alloc::vec![0u64; bins];
    for (s, labels) in sums.iter().zip(series.iter().map(|s| s.labels)) {
        for (&c, &l) in s.iter().zip(labels) {
            if l {
                pos[c as usize] += 1;
            } else {
                neg[c as usize] += 1;
            }
        }
    }
    let total_pos: u64 = pos.iter().sum();
    let total_neg: u64 = neg.iter().sum();
    let mut out = Vec::with_capacity(bins);
    let (mut pos_le, mut neg_le) = (0u64, 0u64);
    for theta in 0..bins {
        pos_le += pos[theta];
        neg_le += neg[theta];
        let cm = ConfusionMatrix {
            tp: total_pos - pos_le,
            fn_: pos_le,
            fp: total_neg - neg_le,
            tn: neg_le,
        };
        out.push((theta as u32, cm));
    }
    out
}

/// Sweeps thresholds and reports `(theta, FAR, TPR)` for each.
pub fn roc_sweep(
    series: &[LabeledCounts<'_>],
    mode: ScoringMode,
    background_hours: f64,
    window: usize,
) -> Result<RocCurve> {
    if !(background_hours > 0.0) || !background_hours.is_finite() {
        return Err(Error::ZeroBackgroundTime);
    }
    let points = sweep(series, window, mode)?
        .into_iter()
        .map(|(theta, cm)| RocPoint {
            theta,
            far_per_hour: cm.fp as f64 / background_hours,
            tpr: tpr(&cm),
        })
        .collect();
    Ok(RocCurve { points })
}

/// TPR at the smallest threshold whose FAR is within `far_limit`; 0 if none.
pub fn tpr_at_far(roc: &RocCurve, far_limit: f64) -> f64 {
    roc.points
        .iter()
        .filter(|p| p.far_per_hour <= far_limit)
        .min_by_key(|p| p.theta)
        .map_or(0.0, |p| p.tpr)
}

/// The threshold with the highest MCC; ties go to the larger threshold.
pub fn best_mcc_threshold(
    series: &[LabeledCounts<'_>],
    mode: ScoringMode,
    window: usize,
) -> Result<(u32, f64)> {
    let mut best = (0u32, f64::NEG_INFINITY);
    for (theta, cm) in sweep(series, window, mode)? {
        let m = mcc(&cm);
        if m >= best.1 {
            best = (theta, m);
        }
    }
    Ok(best)
}

pub fn fitness_mcc(cm: &ConfusionMatrix) -> f64 {
    mcc(cm)
}

/// `F1 + TPR0^2`, with F1 at the training threshold of 0 and TPR0 the true
/// positive rate at zero false alarms.
pub fn fitness_rad(
    series: &[LabeledCounts<'_>],
    mode: ScoringMode,
    background_hours: f64,
) -> Result<f64> {
    let roc = roc_sweep(series, mode, background_hours, 0)?;
    let cm = confusion_at(series, 0, 0, mode)?;
    let tpr0 = tpr_at_far(&roc, 0.0);
    Ok(f1(&cm) + tpr0 * tpr0)
}

/// A scored operating point.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub mode: ScoringMode,
    pub theta: u32,
    pub window: usize,
    pub confusion: ConfusionMatrix,
    pub precision: f64,
    pub tpr: f64,
    pub fpr: f64,
    pub f1: f64,
    pub mcc: f64,
    pub background_hours: f64,
    /// False alarms per background hour; 0 when there is no background.
    pub far_per_hour: f64,
}

impl EvalReport {
    pub fn new(
        confusion: ConfusionMatrix,
        mode: ScoringMode,
        theta: u32,
        window: usize,
        background_hours: f64,
    ) -> Self {
        let far_per_hour = if background_hours > 0.0 {
            confusion.fp as f64 / background_hours
        } else {
            0.0
        };
        EvalReport {
            mode,
            theta,
            window,
            precision: precision(&confusion),
            tpr: tpr(&confusion),
            fpr: fpr(&confusion),
            f1: f1(&confusion),
            mcc: mcc(&confusion),
            confusion,
            background_hours,
            far_per_hour,
        }
    }
}

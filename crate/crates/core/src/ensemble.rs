//! Voting ensembles of two or three trained networks.
//!
//! Members see the same encoded input, each with its own simulator state and
//! threshold; their per-step predictions are combined by a vote.

use alloc::vec::Vec;

use crate::encode::EncoderSpec;
use crate::evolution::ScoredNetwork;
use crate::inference::{background_hours, encode_runs, rolling_sums, step_counts, Run};
use crate::metrics::{self, ConfusionMatrix, EvalReport, LabeledCounts, ScoringMode};
use crate::network::Network;
use crate::sim::Executable;
use crate::{par, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vote {
    Any,
    Majority,
    Unanimous,
}

impl Vote {
    pub fn as_str(self) -> &'static str {
        match self {
            Vote::Any => "any",
            Vote::Majority => "majority",
            Vote::Unanimous => "unanimous",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "any" => Some(Vote::Any),
            "majority" => Some(Vote::Majority),
            "unanimous" => Some(Vote::Unanimous),
            _ => None,
        }
    }

    /// Vote modes that apply to `members` networks.
    pub fn applicable(members: usize) -> &'static [Vote] {
        match members {
            2 => &[Vote::Any, Vote::Unanimous],
            3 => &[Vote::Any, Vote::Majority, Vote::Unanimous],
            _ => &[],
        }
    }

    fn check_arity(self, members: usize) -> Result<()> {
        let ok = match self {
            Vote::Majority => members == 3,
            Vote::Any | Vote::Unanimous => members == 2 || members == 3,
        };
        if ok {
            Ok(())
        } else {
            let expected = if self == Vote::Majority {
                "3"
            } else {
                "2 or 3"
            };
            Err(Error::VoteArity {
                expected,
                found: members,
            })
        }
    }
}

/// Combines one step's member predictions.
pub fn vote_combine(predictions: &[bool], vote: Vote) -> Result<bool> {
    vote.check_arity(predictions.len())?;
    Ok(combine(
        predictions.iter().copied(),
        predictions.len(),
        vote,
    ))
}

fn combine(predictions: impl Iterator<Item = bool>, members: usize, vote: Vote) -> bool {
    let yes = predictions.filter(|&p| p).count();
    match vote {
        Vote::Any => yes > 0,
        Vote::Majority => 2 * yes > members,
        Vote::Unanimous => yes == members,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub network: Network,
    pub theta: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub members: Vec<Member>,
    pub vote: Vote,
    /// Rolling-sum length applied to every member's counts.
    pub window: usize,
}

impl Ensemble {
    pub fn new(members: Vec<Member>, vote: Vote, window: usize) -> Result<Self> {
        vote.check_arity(members.len())?;
        Ok(Ensemble {
            members,
            vote,
            window,
        })
    }

    pub fn thetas(&self) -> Vec<u32> {
        self.members.iter().map(|m| m.theta).collect()
    }
}

/// Member indices and a vote mode; see [`enumerate_ensembles`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub members: Vec<usize>,
    pub vote: Vote,
}

/// Every pair and trio of `top` with each applicable vote: pairs in
/// lexicographic order first, then trios.
pub fn enumerate_ensembles(top: &[ScoredNetwork]) -> Result<Vec<Candidate>> {
    let n = top.len();
    if n < 2 {
        return Err(Error::TooFewNetworks {
            needed: 2,
            found: n,
        });
    }
    let mut out = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            for &vote in Vote::applicable(2) {
                out.push(Candidate {
                    members: alloc::vec![a, b],
                    vote,
                });
            }
        }
    }
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                for &vote in Vote::applicable(3) {
                    out.push(Candidate {
                        members: alloc::vec![a, b, c],
                        vote,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// One network's windowed output counts on a fixed set of runs.
#[derive(Debug, Clone, PartialEq)]
pub struct MemberCounts {
    pub sums: Vec<Vec<u32>>,
}

impl MemberCounts {
    fn max(&self) -> u32 {
        self.sums.iter().flatten().copied().max().unwrap_or(0)
    }
}

/// Labels and background time of a calibration or evaluation set.
#[derive(Debug, Clone, PartialEq)]
pub struct Labels {
    pub runs: Vec<Vec<bool>>,
    pub background_hours: f64,
}

impl Labels {
    pub fn of(runs: &[Run]) -> Self {
        Labels {
            runs: runs.iter().map(|r| r.labels.clone()).collect(),
            background_hours: runs
                .iter()
                .map(|r| background_hours(&r.labels, r.stride_seconds))
                .sum(),
        }
    }
}

/// Windowed output counts of each network on `runs`. Runs are encoded once.
pub fn member_counts(
    networks: &[&Network],
    spec: &EncoderSpec,
    runs: &[Run],
    window: usize,
) -> Result<Vec<MemberCounts>> {
    let encoded = encode_runs(runs, spec)?;
    par::map(networks, |_, net| {
        let exe = Executable::counting(net)?;
        if exe.input_count() != spec.input_neurons() {
            return Err(Error::InputCountMismatch {
                expected: spec.input_neurons(),
                found: exe.input_count(),
            });
        }
        let sums = encoded
            .iter()
            .map(|r| Ok(rolling_sums(&step_counts(&exe, r, spec.tau)?, window)))
            .collect::<Result<Vec<_>>>()?;
        Ok(MemberCounts { sums })
    })
    .into_iter()
    .collect()
}

/// Per-step ensemble predictions for each run.
pub fn ensemble_predictions(
    members: &[&MemberCounts],
    thetas: &[u32],
    vote: Vote,
) -> Result<Vec<Vec<bool>>> {
    vote.check_arity(members.len())?;
    if thetas.len() != members.len() {
        return Err(Error::DimensionMismatch {
            expected: members.len(),
            found: thetas.len(),
        });
    }
    let runs = members[0].sums.len();
    (0..runs)
        .map(|r| {
            let len = members[0].sums[r].len();
            if let Some(m) = members
                .iter()
                .find(|m| m.sums.len() != runs || m.sums[r].len() != len)
            {
                return Err(Error::LengthMismatch {
                    left: len,
                    right: m.sums.get(r).map_or(0, Vec::len),
                });
            }
            Ok((0..len)
                .map(|t| {
                    let votes = members.iter().zip(thetas).map(|(m, &th)| m.sums[r][t] > th);
                    combine(votes, members.len(), vote)
                })
                .collect())
        })
        .collect()
}

fn ensemble_confusion(
    members: &[&MemberCounts],
    thetas: &[u32],
    vote: Vote,
    labels: &Labels,
    mode: ScoringMode,
) -> Result<ConfusionMatrix> {
    let y = ensemble_predictions(members, thetas, vote)?;
    if y.len() != labels.runs.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: labels.runs.len(),
        });
    }
    metrics::confusion(
        y.iter()
            .map(Vec::as_slice)
            .zip(labels.runs.iter().map(Vec::as_slice)),
        mode,
    )
}

/// Outcome of [`calibrate_far`].
#[derive(Debug, Clone, PartialEq)]
pub struct Calibration {
    pub thetas: Vec<u32>,
    pub far_per_hour: f64,
    pub tpr: f64,
    /// Whether the target was met. When false the thresholds are all at the
    /// members' maxima.
    pub reached: bool,
}

/// Raises member thresholds until the ensemble's FAR on the calibration set
/// is at most `far_target`.
///
/// Each round considers, for every member, the smallest threshold increase
/// that strictly lowers the ensemble FAR, and takes the one that costs the
/// least TPR (ties: larger FAR drop, then lower member index). When no
/// single move lowers the FAR, every member jumps to its maximum count,
/// which silences the ensemble.
pub fn calibrate_counts(
    members: &[&MemberCounts],
    start: &[u32],
    vote: Vote,
    labels: &Labels,
    mode: ScoringMode,
    far_target: f64,
) -> Result<Calibration> {
    if far_target.is_nan() || far_target < 0.0 {
        return Err(Error::InvalidParameter("FAR target must be non-negative"));
    }
    let hours = labels.background_hours;
    if !(hours > 0.0 && hours.is_finite()) {
        return Err(Error::ZeroBackgroundTime);
    }
    let maxima: Vec<u32> = members.iter().map(|m| m.max()).collect();
    let mut thetas = start.to_vec();
    let mut cm = ensemble_confusion(members, &thetas, vote, labels, mode)?;
    let far = |cm: &ConfusionMatrix| cm.fp as f64 / hours;

    while far(&cm) > far_target {
        // (tpr cost, fp drop, member, theta, confusion)
        let mut best: Option<(f64, u64, usize, u32, ConfusionMatrix)> = None;
        for i in 0..members.len() {
            let mut values: Vec<u32> = members[i]
                .sums
                .iter()
                .flatten()
                .copied()
                .filter(|&c| c > thetas[i])
                .collect();
            values.sort_unstable();
            values.dedup();
            for v in values {
                let mut trial = thetas.clone();
                trial[i] = v;
                let next = ensemble_confusion(members, &trial, vote, labels, mode)?;
                if next.fp < cm.fp {
                    let cost = metrics::tpr(&cm) - metrics::tpr(&next);
                    let drop = cm.fp - next.fp;
                    let better = match &best {
                        None => true,
                        Some((c, d, ..)) => cost < *c || (cost == *c && drop > *d),
                    };
                    if better {
                        best = Some((cost, drop, i, v, next));
                    }
                    break;
                }
            }
        }
        match best {
            Some((_, _, i, v, next)) => {
                thetas[i] = v;
                cm = next;
            }
            None => {
                thetas.clone_from(&maxima);
                cm = ensemble_confusion(members, &thetas, vote, labels, mode)?;
                break;
            }
        }
    }
    let far_per_hour = far(&cm);
    Ok(Calibration {
        thetas,
        far_per_hour,
        tpr: metrics::tpr(&cm),
        reached: far_per_hour <= far_target,
    })
}

/// Calibrates `ensemble` on `runs` starting from its current thresholds.
pub fn calibrate_far(
    ensemble: &Ensemble,
    spec: &EncoderSpec,
    runs: &[Run],
    mode: ScoringMode,
    far_target: f64,
) -> Result<(Ensemble, Calibration)> {
    let nets: Vec<&Network> = ensemble.members.iter().map(|m| &m.network).collect();
    let counts = member_counts(&nets, spec, runs, ensemble.window)?;
    let refs: Vec<&MemberCounts> = counts.iter().collect();
    let cal = calibrate_counts(
        &refs,
        &ensemble.thetas(),
        ensemble.vote,
        &Labels::of(runs),
        mode,
        far_target,
    )?;
    let mut out = ensemble.clone();
    for (m, &theta) in out.members.iter_mut().zip(&cal.thetas) {
        m.theta = theta;
    }
    Ok((out, cal))
}

/// Each member's best-MCC threshold on its own counts.
pub fn best_mcc_thetas(
    counts: &[&MemberCounts],
    labels: &Labels,
    mode: ScoringMode,
) -> Result<Vec<u32>> {
    counts
        .iter()
        .map(|m| {
            let series: Vec<LabeledCounts<'_>> = m
                .sums
                .iter()
                .zip(&labels.runs)
                .map(|(z, l)| LabeledCounts::new(z, l))
                .collect();
            Ok(metrics::best_mcc_threshold(&series, mode, 0)?.0)
        })
        .collect()
}

/// Scores an ensemble. The report's `theta` is 0; member thresholds live in
/// the ensemble.
pub fn evaluate_ensemble(
    ensemble: &Ensemble,
    spec: &EncoderSpec,
    runs: &[Run],
    mode: ScoringMode,
) -> Result<EvalReport> {
    let nets: Vec<&Network> = ensemble.members.iter().map(|m| &m.network).collect();
    let counts = member_counts(&nets, spec, runs, ensemble.window)?;
    let refs: Vec<&MemberCounts> = counts.iter().collect();
    let labels = Labels::of(runs);
    let cm = ensemble_confusion(&refs, &ensemble.thetas(), ensemble.vote, &labels, mode)?;
    Ok(EvalReport::new(
        cm,
        mode,
        0,
        ensemble.window,
        labels.background_hours,
    ))
}

/// A calibrated candidate from [`search_ensembles`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchResult {
    pub candidate: Candidate,
    pub calibration: Calibration,
}

/// Calibrates every pair and trio of `top` to `far_target` on `runs` and
/// returns them by descending calibrated TPR (ties keep enumeration order).
pub fn search_ensembles(
    top: &[ScoredNetwork],
    spec: &EncoderSpec,
    runs: &[Run],
    mode: ScoringMode,
    window: usize,
    far_target: f64,
) -> Result<Vec<SearchResult>> {
    let candidates = enumerate_ensembles(top)?;
    let nets: Vec<&Network> = top.iter().map(|s| &s.network).collect();
    let counts = member_counts(&nets, spec, runs, window)?;
    let labels = Labels::of(runs);
    let all: Vec<&MemberCounts> = counts.iter().collect();
    let start = best_mcc_thetas(&all, &labels, mode)?;

    let mut results = par::map(&candidates, |_, cand| {
        let members: Vec<&MemberCounts> = cand.members.iter().map(|&i| &counts[i]).collect();
        let thetas: Vec<u32> = cand.members.iter().map(|&i| start[i]).collect();
        let calibration =
            calibrate_counts(&members, &thetas, cand.vote, &labels, mode, far_target)?;
        Ok(SearchResult {
            candidate: cand.clone(),
            calibration,
        })
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    results.sort_by(|a, b| b.calibration.tpr.total_cmp(&a.calibration.tpr));
    Ok(results)
}

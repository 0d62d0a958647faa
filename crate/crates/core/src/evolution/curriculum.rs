use alloc::vec::Vec;

use rand::Rng as _;

use super::TrainConfig;
use crate::inference::Run;
use crate::rng::Rng;

/// Exponent of the SNR bias at `epoch` of `total`: starts at `gamma0` and
/// falls linearly to zero after `ramp_fraction * total` epochs.
pub fn snr_gamma(epoch: usize, total: usize, gamma0: f64, ramp_fraction: f64) -> f64 {
    let ramp = ramp_fraction * total as f64;
    if !(ramp > 0.0) {
        return 0.0;
    }
    gamma0 * (1.0 - epoch as f64 / ramp).max(0.0)
}

/// Sampling weight of every run. Source runs weigh `(snr / max_snr)^gamma`;
/// runs without an SNR weigh the mean source weight (or 1 when there are no
/// source runs).
fn weights(runs: &[Run], gamma: f64) -> Vec<f64> {
    let max_snr = runs.iter().filter_map(|r| r.snr).fold(0.0, f64::max);
    let source: Vec<Option<f64>> = runs
        .iter()
        .map(|r| {
            r.snr.map(|s| {
                if max_snr > 0.0 {
                    libm::pow((s / max_snr).max(0.0), gamma)
                } else {
                    1.0
                }
            })
        })
        .collect();
    let known: Vec<f64> = source.iter().flatten().copied().collect();
    let mean = if known.is_empty() {
        1.0
    } else {
        known.iter().sum::<f64>() / known.len() as f64
    };
    source.into_iter().map(|w| w.unwrap_or(mean)).collect()
}

/// Indices of `ceil(batch_fraction * runs.len())` distinct runs drawn with
/// the curriculum weights for this epoch, in ascending order.
pub fn sample_batch(
    runs: &[Run],
    epoch: usize,
    total: usize,
    cfg: &TrainConfig,
    rng: &mut Rng,
) -> Vec<usize> {
    let n = runs.len();
    let size = (libm::ceil(cfg.batch_fraction * n as f64) as usize).clamp(usize::from(n > 0), n);
    let gamma = snr_gamma(epoch, total, cfg.snr_gamma0, cfg.snr_ramp_fraction);
    let w = weights(runs, gamma);

    // Weighted sampling without replacement: keep the largest ln(u) / w.
    // Zero-weight runs sort last and are only taken when needed.
    let mut keyed: Vec<(f64, usize)> = w
        .iter()
        .enumerate()
        .map(|(i, &wi)| {
            let u: f64 = rng.random_range(f64::MIN_POSITIVE..1.0);
            let key = if wi > 0.0 {
                libm::log(u) / wi
            } else {
                f64::NEG_INFINITY
            };
            (key, i)
        })
        .collect();
    keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    let mut picks: Vec<usize> = keyed.into_iter().take(size).map(|(_, i)| i).collect();
    picks.sort_unstable();
    picks
}

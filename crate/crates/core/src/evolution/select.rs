use rand::seq::index;
use rand::Rng as _;

use super::{EonsParams, ScoredNetwork};
use crate::rng::Rng;

/// Entrants per tournament: `max(2, round(factor * population_size))`,
/// bounded by the number of candidates.
pub fn tournament_size(params: &EonsParams, candidates: usize) -> usize {
    let k = libm::round(params.tournament_size_factor * params.population_size as f64) as usize;
    k.max(2).min(candidates)
}

/// Index of the selected parent. Draws distinct entrants; with probability
/// `tournament_best_net_factor` the fittest wins (earliest drawn on ties),
/// otherwise a uniformly random entrant does.
///
/// Panics if `scored` is empty.
pub fn tournament_select(scored: &[ScoredNetwork], params: &EonsParams, rng: &mut Rng) -> usize {
    assert!(!scored.is_empty(), "tournament over an empty population");
    let k = tournament_size(params, scored.len());
    let entrants = index::sample(rng, scored.len(), k).into_vec();
    if rng.random::<f64>() < params.tournament_best_net_factor {
        let mut best = entrants[0];
        for &i in &entrants[1..] {
            if scored[i].fitness > scored[best].fitness {
                best = i;
            }
        }
        best
    } else {
        entrants[rng.random_range(0..entrants.len())]
    }
}

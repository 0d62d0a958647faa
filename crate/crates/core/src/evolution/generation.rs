use alloc::vec::Vec;

use rand::Rng as _;

use super::{crossover, mutate, random_network, tournament_select, EonsParams, ScoredNetwork};
use crate::network::Network;
use crate::rng;
use crate::{Error, Result};

/// Indices of `scored` by descending fitness; ties keep population order.
pub fn rank(scored: &[ScoredNetwork]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..scored.len()).collect();
    order.sort_by(|&a, &b| scored[b].fitness.total_cmp(&scored[a].fitness));
    order
}

/// Builds the next population: `num_best` elites cloned unchanged,
/// `floor(random_factor * population_size)` fresh random networks, and the
/// rest bred from tournament winners.
///
/// Slot `i` draws from its own stream derived from `(seed, i)`.
pub fn next_generation(
    scored: &[ScoredNetwork],
    params: &EonsParams,
    n_inputs: usize,
    seed: u64,
) -> Result<Vec<Network>> {
    if scored.is_empty() {
        return Err(Error::TooFewNetworks {
            needed: 1,
            found: 0,
        });
    }
    let size = params.population_size;
    let order = rank(scored);
    let elites = params.num_best.min(size).min(scored.len());
    let randoms = ((params.random_factor * size as f64) as usize).min(size - elites);

    let mut next = Vec::with_capacity(size);
    next.extend(order[..elites].iter().map(|&i| scored[i].network.clone()));
    for slot in elites..size {
        let mut r = rng::stream(&[seed, slot as u64]);
        let child = if slot < elites + randoms {
            random_network(params, n_inputs, &mut r)?
        } else {
            let a = tournament_select(scored, params, &mut r);
            let mut child = if r.random::<f64>() < params.crossover_rate {
                let b = tournament_select(scored, params, &mut r);
                crossover(&scored[a].network, &scored[b].network, &mut r)?
            } else {
                scored[a].network.clone()
            };
            if r.random::<f64>() < params.mutation_rate {
                child = mutate(child, params, &mut r);
            }
            child
        };
        next.push(child);
    }
    Ok(next)
}

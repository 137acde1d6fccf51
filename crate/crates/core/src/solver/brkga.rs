use rand::Rng;
use rayon::prelude::*;

use super::decode::{evaluate_fitness, Chromosome};
use super::local::two_opt_improve;
use super::{RoutingGraph, Solution, SolverError, SolverParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenerationStats {
    pub generation: usize,
    pub best_fitness: f64,
    pub mean_fitness: f64,
    pub feasible_count: usize,
}

#[derive(Debug, Clone)]
pub struct BrkgaRun {
    pub best: Solution,
    pub best_keys: Chromosome,
    /// Entry 0 describes the initial population, entry `g` the population after generation `g`.
    pub history: Vec<GenerationStats>,
}

struct Individual {
    keys: Chromosome,
    sol: Solution,
}

/// Biased random-key genetic algorithm over the walk decoder.
///
/// Random draws happen sequentially on `rng` in a fixed order, and decoding runs in
/// parallel afterwards, so results depend only on the seed and not on the worker count.
pub fn run_brkga<R: Rng + ?Sized>(
    graph: &RoutingGraph,
    params: &SolverParams,
    local_improvement: bool,
    rng: &mut R,
) -> Result<BrkgaRun, SolverError> {
    graph.check_solvable(params)?;
    let pop = params.population_size;
    let len = params.chromosome_length(graph.node_count());
    let n_elite = ((params.elite_fraction * pop as f64).round() as usize).clamp(1, pop - 1);
    let n_mutant = ((params.mutant_fraction * pop as f64).round() as usize).min(pop - n_elite);
    let n_offspring = pop - n_elite - n_mutant;
    let improve_p = if local_improvement {
        params.local_improve_prob
    } else {
        0.0
    };

    let draw_flag = |rng: &mut R| improve_p > 0.0 && rng.gen::<f64>() < improve_p;

    let mut batch: Vec<(Chromosome, bool)> = (0..pop)
        .map(|_| {
            let c = Chromosome::random(len, params.agents, rng);
            let f = draw_flag(rng);
            (c, f)
        })
        .collect();

    let mut best: Option<(Chromosome, Solution)> = None;
    let mut history = Vec::with_capacity(params.generations + 1);
    let mut attempt: Option<Solution> = None;

    let mut population = evaluate_batch(batch, graph, params);
    rank(&mut population);
    record(&population, &mut best, &mut attempt);
    history.push(stats(0, &population));

    for gen in 1..=params.generations {
        batch = Vec::with_capacity(n_mutant + n_offspring);
        for _ in 0..n_mutant {
            let c = Chromosome::random(len, params.agents, rng);
            let f = draw_flag(rng);
            batch.push((c, f));
        }
        for _ in 0..n_offspring {
            let e = rng.gen_range(0..n_elite);
            let o = rng.gen_range(n_elite..pop);
            let elite = population[e].keys.keys();
            let other = population[o].keys.keys();
            let keys = elite
                .iter()
                .zip(other)
                .map(|(&x, &y)| {
                    if rng.gen::<f64>() < params.elite_inherit_prob {
                        x
                    } else {
                        y
                    }
                })
                .collect();
            let f = draw_flag(rng);
            batch.push((Chromosome(keys), f));
        }
        let fresh = evaluate_batch(batch, graph, params);
        population.truncate(n_elite);
        population.extend(fresh);
        rank(&mut population);
        record(&population, &mut best, &mut attempt);
        history.push(stats(gen, &population));
    }

    match best {
        Some((best_keys, best)) => Ok(BrkgaRun {
            best,
            best_keys,
            history,
        }),
        None => Err(SolverError::NoFeasible {
            best: Box::new(attempt.expect("population is never empty")),
            history,
        }),
    }
}

fn evaluate_batch(
    batch: Vec<(Chromosome, bool)>,
    graph: &RoutingGraph,
    params: &SolverParams,
) -> Vec<Individual> {
    batch
        .into_par_iter()
        .map(|(keys, improve)| {
            let sol = evaluate_fitness(&keys, graph, params);
            if improve {
                let (keys, sol) = two_opt_improve(&keys, &sol, graph, params);
                Individual { keys, sol }
            } else {
                Individual { keys, sol }
            }
        })
        .collect()
}

fn rank(pop: &mut [Individual]) {
    // stable, so ties keep their previous order
    pop.sort_by(|a, b| a.sol.fitness.total_cmp(&b.sol.fitness));
}

fn record(
    pop: &[Individual],
    best: &mut Option<(Chromosome, Solution)>,
    attempt: &mut Option<Solution>,
) {
    if let Some(ind) = pop.iter().find(|i| i.sol.feasible) {
        let better = match best {
            Some((_, b)) => ind.sol.fitness < b.fitness,
            None => true,
        };
        if better {
            *best = Some((ind.keys.clone(), ind.sol.clone()));
        }
    }
    let top = &pop[0].sol;
    let better = match attempt {
        Some(a) => top.coverage.count_ones() > a.coverage.count_ones(),
        None => true,
    };
    if better {
        *attempt = Some(top.clone());
    }
}

fn stats(generation: usize, pop: &[Individual]) -> GenerationStats {
    let sum: f64 = pop.iter().map(|i| i.sol.fitness).sum();
    GenerationStats {
        generation,
        best_fitness: pop[0].sol.fitness,
        mean_fitness: sum / pop.len() as f64,
        feasible_count: pop.iter().filter(|i| i.sol.feasible).count(),
    }
}

use std::fmt::Write as _;
use std::time::Instant;

use anyhow::{bail, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::solver::{
    greedy_baseline, run_brkga, GenerationStats, RoutingGraph, Solution, SolverError,
    SolverParams,
};

/// `brkga+` is BRKGA with the 2-opt operator enabled.
pub const METHODS: [&str; 3] = ["greedy", "brkga", "brkga+"];

pub const BENCH_CSV_HEADER: &str = "method,agents,seed,fitness,coverage,wall_time_s";

#[derive(Debug, Clone)]
pub struct BenchRow {
    pub method: String,
    pub agents: usize,
    pub seed: u64,
    pub fitness: f64,
    pub coverage: f64,
    pub feasible: bool,
    pub wall_time_s: f64,
    /// Empty for the greedy baseline.
    pub history: Vec<GenerationStats>,
    pub solution: Solution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchSummary {
    pub method: String,
    pub agents: usize,
    pub runs: usize,
    pub mean_fitness: f64,
    pub std_fitness: f64,
    pub mean_coverage: f64,
    pub std_coverage: f64,
    pub mean_time: f64,
    pub std_time: f64,
}

/// Runs every method for every agent count with seeds `base.rng_seed + r`, `r < repeats`.
/// A BRKGA run that never becomes feasible is recorded with its best attempt.
pub fn run_bench(
    graph: &RoutingGraph,
    base: &SolverParams,
    methods: &[String],
    agents: &[usize],
    repeats: usize,
) -> Result<Vec<BenchRow>> {
    let mut rows = Vec::new();
    for &k in agents {
        for method in methods {
            for r in 0..repeats as u64 {
                let seed = base.rng_seed + r;
                let params = SolverParams {
                    agents: k,
                    rng_seed: seed,
                    ..base.clone()
                };
                let start = Instant::now();
                let (solution, history) = match method.as_str() {
                    "greedy" => (greedy_baseline(graph, &params)?, Vec::new()),
                    "brkga" | "brkga+" => {
                        let mut rng = ChaCha8Rng::seed_from_u64(seed);
                        match run_brkga(graph, &params, method == "brkga+", &mut rng) {
                            Ok(run) => (run.best, run.history),
                            Err(SolverError::NoFeasible { best, history }) => (*best, history),
                            Err(e) => return Err(e.into()),
                        }
                    }
                    other => bail!("unknown method `{other}`"),
                };
                rows.push(BenchRow {
                    method: method.clone(),
                    agents: k,
                    seed,
                    fitness: solution.fitness,
                    coverage: solution.coverage_ratio(),
                    feasible: solution.feasible,
                    wall_time_s: start.elapsed().as_secs_f64(),
                    history,
                    solution,
                });
            }
        }
    }
    Ok(rows)
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Mean and population standard deviation per `(method, agents)`, in first-seen order.
pub fn summarize(rows: &[BenchRow]) -> Vec<BenchSummary> {
    let mut keys: Vec<(String, usize)> = Vec::new();
    for r in rows {
        if !keys.iter().any(|(m, k)| *m == r.method && *k == r.agents) {
            keys.push((r.method.clone(), r.agents));
        }
    }
    keys.into_iter()
        .map(|(method, agents)| {
            let group: Vec<&BenchRow> = rows
                .iter()
                .filter(|r| r.method == method && r.agents == agents)
                .collect();
            let col = |f: fn(&BenchRow) -> f64| mean_std(&group.iter().map(|r| f(r)).collect::<Vec<_>>());
            let (mean_fitness, std_fitness) = col(|r| r.fitness);
            let (mean_coverage, std_coverage) = col(|r| r.coverage);
            let (mean_time, std_time) = col(|r| r.wall_time_s);
            BenchSummary {
                method,
                agents,
                runs: group.len(),
                mean_fitness,
                std_fitness,
                mean_coverage,
                std_coverage,
                mean_time,
                std_time,
            }
        })
        .collect()
}

/// Per-run rows followed by `mean` and `std` rows per group (the seed column holds the label).
pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = format!("{BENCH_CSV_HEADER}\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.method, r.agents, r.seed, r.fitness, r.coverage, r.wall_time_s
        );
    }
    for s in summarize(rows) {
        let _ = writeln!(
            out,
            "{},{},mean,{},{},{}",
            s.method, s.agents, s.mean_fitness, s.mean_coverage, s.mean_time
        );
        let _ = writeln!(
            out,
            "{},{},std,{},{},{}",
            s.method, s.agents, s.std_fitness, s.std_coverage, s.std_time
        );
    }
    out
}

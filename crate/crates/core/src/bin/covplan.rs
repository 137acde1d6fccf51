use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use coverage_planner::app::{
    bench_csv, plan, run_bench, verify_solution, write_scene_files, RunConfig, WORKERS_ENV,
};
use coverage_planner::cprm::{build_cprm, read_cprm, write_cprm, PlanningSpace};
use coverage_planner::scenes;
use coverage_planner::solver::{read_solution, RoutingGraph};

/// Multi-agent coverage path planning for structure inspection.
#[derive(Parser)]
#[command(name = "covplan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the roadmap and solve; writes roadmap, solution, convergence and scene files.
    Plan {
        #[arg(long)]
        config: PathBuf,
        /// Solver seed (overrides `solver.rng_seed`).
        #[arg(long)]
        seed: Option<u64>,
        /// Number of agents (overrides `solver.agents`).
        #[arg(long)]
        uavs: Option<usize>,
        /// Output directory (overrides `output_dir`).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Plain BRKGA without the 2-opt operator.
        #[arg(long)]
        no_local_improvement: bool,
    },
    /// Replay a solution against the structure and report coverage and collisions.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        cprm: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        /// Where to write the report (printed either way).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare greedy, BRKGA and BRKGA+ over agent counts and seeds.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated agent counts (overrides `bench.agents`).
        #[arg(long, value_delimiter = ',')]
        uavs: Option<Vec<usize>>,
        #[arg(long)]
        repeats: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write the structure and the walks of a solution as OBJ + MTL.
    ExportScene {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        cprm: PathBuf,
        #[arg(long)]
        solution: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a built-in test structure (box, courtyard, twin-towers) as OBJ.
    GenScene {
        name: String,
        #[arg(long)]
        out: PathBuf,
    },
}

fn init_workers() -> Result<()> {
    if let Ok(v) = std::env::var(WORKERS_ENV) {
        let n: usize = v
            .parse()
            .with_context(|| format!("{WORKERS_ENV} must be a positive integer, got `{v}`"))?;
        if n == 0 {
            bail!("{WORKERS_ENV} must be at least 1");
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<bool> {
    init_workers()?;
    match cli.command {
        Command::Plan {
            config,
            seed,
            uavs,
            out,
            no_local_improvement,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.solver.rng_seed = s;
            }
            if let Some(k) = uavs {
                cfg.solver.agents = k;
            }
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            let outcome = plan(&cfg, !no_local_improvement)?;
            if let Some(b) = &outcome.build {
                println!(
                    "roadmap: {} nodes, {} edges, {} patches, ceiling {:.4}",
                    b.nodes, b.edges, b.patch_count, b.ceiling
                );
            }
            if let Some(s) = &outcome.solution {
                println!(
                    "solution: fitness {}, coverage {:.4}, feasible {}",
                    s.fitness,
                    s.coverage_ratio(),
                    s.feasible
                );
            }
            if let Some(v) = &outcome.verification {
                print!("{}", v.to_text());
            }
            if let Some(d) = &outcome.diagnostic {
                eprintln!("infeasible: {d}");
            }
            println!("outputs in {}", cfg.output_dir.display());
            let verified = outcome.verification.as_ref().map_or(true, |v| v.pass);
            Ok(outcome.feasible && verified)
        }
        Command::Verify {
            config,
            cprm,
            solution,
            out,
        } => {
            let cfg = RunConfig::load(&config)?;
            cfg.validate()?;
            let report = verify_solution(&cfg, &read_cprm(&cprm)?, &read_solution(&solution)?)?;
            print!("{}", report.to_text());
            if let Some(o) = out {
                fs::write(&o, report.to_text())
                    .with_context(|| format!("cannot write {}", o.display()))?;
            }
            Ok(report.pass)
        }
        Command::Bench {
            config,
            uavs,
            repeats,
            seed,
            out,
        } => {
            let mut cfg = RunConfig::load(&config)?;
            if let Some(k) = uavs {
                cfg.bench.agents = k;
            }
            if let Some(r) = repeats {
                cfg.bench.repeats = r;
            }
            if let Some(s) = seed {
                cfg.solver.rng_seed = s;
            }
            if let Some(o) = out {
                cfg.output_dir = o;
            }
            cfg.validate()?;
            fs::create_dir_all(&cfg.output_dir)?;
            let space = PlanningSpace::new(cfg.load_mesh()?, &cfg.sampling, cfg.camera.clone())?;
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.sampling.rng_seed);
            let (cprm, _) = build_cprm(&space, &cfg.sampling, cfg.solver.delta_d, &mut rng)?;
            write_cprm(&cprm, cfg.output_dir.join("cprm.txt"))?;
            let graph = RoutingGraph::from_cprm(&cprm);
            let rows = run_bench(
                &graph,
                &cfg.solver,
                &cfg.bench.methods,
                &cfg.bench.agents,
                cfg.bench.repeats,
            )?;
            let csv = bench_csv(&rows);
            let path = cfg.output_dir.join("bench.csv");
            fs::write(&path, &csv).with_context(|| format!("cannot write {}", path.display()))?;
            print!("{csv}");
            Ok(rows.iter().all(|r| r.feasible))
        }
        Command::ExportScene {
            config,
            cprm,
            solution,
            out,
        } => {
            let cfg = RunConfig::load(&config)?;
            let mesh = cfg.load_mesh()?;
            let sol = read_solution(&solution)?;
            write_scene_files(&out, &mesh, &read_cprm(&cprm)?, &sol.routes)?;
            println!("wrote {}", out.display());
            Ok(true)
        }
        Command::GenScene { name, out } => {
            let scene = scenes::by_name(&name)
                .with_context(|| format!("unknown scene `{name}` (box, courtyard, twin-towers)"))?;
            scene.mesh.write_obj(&out)?;
            println!("wrote {} ({} triangles)", out.display(), scene.mesh.triangle_count());
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

use std::fs;
use std::path::PathBuf;

use anyhow::{Context, Result};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::export::write_scene_files;
use super::verify::{verify_solution, VerificationReport};
use super::{write_file, RunConfig};
use crate::cprm::{build_cprm, read_cprm, write_cprm, BuildReport, CprmError, PlanningSpace};
use crate::solver::{
    convergence_csv, read_solution, run_brkga, write_solution, GenerationStats, RoutingGraph,
    Solution, SolutionMeta, SolverError,
};

#[derive(Debug, Clone, Default)]
pub struct PlanArtifacts {
    pub config: Option<PathBuf>,
    pub cprm: Option<PathBuf>,
    pub solution: Option<PathBuf>,
    pub convergence: Option<PathBuf>,
    pub scene: Option<PathBuf>,
    pub verification: Option<PathBuf>,
}

#[derive(Debug, Clone)]
pub struct PlanOutcome {
    pub feasible: bool,
    /// Why the run is infeasible, when it is.
    pub diagnostic: Option<String>,
    pub build: Option<BuildReport>,
    pub solution: Option<Solution>,
    pub history: Vec<GenerationStats>,
    pub verification: Option<VerificationReport>,
    pub artifacts: PlanArtifacts,
}

impl PlanOutcome {
    fn infeasible(msg: String, artifacts: PlanArtifacts) -> Self {
        Self {
            feasible: false,
            diagnostic: Some(msg),
            build: None,
            solution: None,
            history: Vec::new(),
            verification: None,
            artifacts,
        }
    }
}

/// Builds the roadmap, solves, and writes `config.toml`, `cprm.txt`, `solution.txt`,
/// `convergence.csv` and `scene.obj`/`scene.mtl` into the output directory (plus
/// `verification.txt` when verification is on). An infeasible outcome is not an error.
pub fn plan(cfg: &RunConfig, local_improvement: bool) -> Result<PlanOutcome> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let mut artifacts = PlanArtifacts::default();
    let config_path = dir.join("config.toml");
    write_file(&config_path, cfg.to_toml())?;
    artifacts.config = Some(config_path);

    let mesh = cfg.load_mesh()?;
    let space = PlanningSpace::new(mesh.clone(), &cfg.sampling, cfg.camera.clone())
        .context("cannot set up the planning space")?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.sampling.rng_seed);
    let (cprm, build) = match build_cprm(&space, &cfg.sampling, cfg.solver.delta_d, &mut rng) {
        Ok(r) => r,
        Err(e @ CprmError::InsufficientCoverage { .. }) => {
            return Ok(PlanOutcome::infeasible(e.to_string(), artifacts));
        }
        Err(e) => return Err(e).context("roadmap construction failed"),
    };
    let cprm_path = dir.join("cprm.txt");
    write_cprm(&cprm, &cprm_path)?;
    artifacts.cprm = Some(cprm_path.clone());

    let graph = RoutingGraph::from_cprm(&cprm);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.solver.rng_seed);
    let (solution, history, diagnostic) =
        match run_brkga(&graph, &cfg.solver, local_improvement, &mut rng) {
            Ok(run) => (run.best, run.history, None),
            Err(SolverError::NoFeasible { best, history }) => {
                let msg = format!(
                    "no feasible plan found; best attempt covers {:.4} of the required {}",
                    best.coverage_ratio(),
                    cfg.solver.delta_d
                );
                (*best, history, Some(msg))
            }
            Err(e @ SolverError::CeilingTooLow { .. }) => {
                return Ok(PlanOutcome::infeasible(e.to_string(), artifacts));
            }
            Err(e) => return Err(e).context("solver failed"),
        };

    let meta = SolutionMeta {
        method: if local_improvement { "brkga+" } else { "brkga" }.into(),
        seed: cfg.solver.rng_seed,
        params: cfg.solver.clone(),
    };
    let solution_path = dir.join("solution.txt");
    write_solution(&solution, &meta, &solution_path)?;
    artifacts.solution = Some(solution_path.clone());
    let conv_path = dir.join("convergence.csv");
    write_file(&conv_path, convergence_csv(&history))?;
    artifacts.convergence = Some(conv_path);
    let scene_path = dir.join("scene.obj");
    write_scene_files(&scene_path, &mesh, &cprm, &solution.routes)?;
    artifacts.scene = Some(scene_path);

    let verification = if cfg.verify {
        // replay from the files on disk, not from memory
        let report = verify_solution(cfg, &read_cprm(&cprm_path)?, &read_solution(&solution_path)?)?;
        let path = dir.join("verification.txt");
        write_file(&path, report.to_text())?;
        artifacts.verification = Some(path);
        Some(report)
    } else {
        None
    };

    Ok(PlanOutcome {
        feasible: solution.feasible,
        diagnostic,
        build: Some(build),
        solution: Some(solution),
        history,
        verification,
        artifacts,
    })
}

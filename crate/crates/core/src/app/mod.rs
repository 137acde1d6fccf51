//! Command implementations behind the `covplan` binary.

mod bench;
mod export;
mod plan;
mod verify;

pub use bench::{bench_csv, run_bench, summarize, BenchRow, BenchSummary, BENCH_CSV_HEADER, METHODS};
pub use export::{export_scene, route_polyline, write_scene_files, SceneExport, PALETTE};
pub use plan::{plan, PlanArtifacts, PlanOutcome};
pub use verify::{replay_on_graph, verify_in_space, verify_solution, VerificationReport};

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::cprm::SamplingParams;
use crate::geometry::TriangleMesh;
use crate::scenes;
use crate::solver::SolverParams;
use crate::visibility::CameraModel;

/// Environment variable holding the worker thread count.
pub const WORKERS_ENV: &str = "COVPLAN_WORKERS";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BenchConfig {
    pub methods: Vec<String>,
    pub agents: Vec<usize>,
    pub repeats: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            methods: METHODS.iter().map(|m| m.to_string()).collect(),
            agents: vec![1, 2, 3],
            repeats: 10,
        }
    }
}

/// Everything one run needs. `mesh` (a file) and `scene` (a built-in generator name)
/// are alternatives; exactly one must be set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mesh: Option<PathBuf>,
    pub scene: Option<String>,
    pub output_dir: PathBuf,
    /// Replay the plan through the verifier after solving.
    pub verify: bool,
    pub camera: CameraModel,
    pub sampling: SamplingParams,
    pub solver: SolverParams,
    pub bench: BenchConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mesh: None,
            scene: None,
            output_dir: PathBuf::from("out"),
            verify: true,
            camera: CameraModel::default(),
            sampling: SamplingParams::default(),
            solver: SolverParams::default(),
            bench: BenchConfig::default(),
        }
    }
}

impl RunConfig {
    /// Parses a TOML config. The viewing and safety distances live under `[camera]`;
    /// `[sampling]` may repeat them only with the same values. Relative paths resolve
    /// against the directory holding the config file.
    pub fn from_toml(text: &str, base: &Path) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).context("config is not valid TOML")?;
        let mut cfg: RunConfig = table.clone().try_into().context("invalid config")?;
        if let Some(s) = table.get("sampling").and_then(|v| v.as_table()) {
            for (key, cam) in [("d_vis", cfg.camera.d_vis), ("d_safe", cfg.camera.d_safe)] {
                if let Some(v) = s.get(key) {
                    let v = v
                        .as_float()
                        .or_else(|| v.as_integer().map(|i| i as f64))
                        .with_context(|| format!("sampling.{key} is not a number"))?;
                    if v != cam {
                        bail!("sampling.{key} = {v} disagrees with camera.{key} = {cam}");
                    }
                }
            }
        }
        cfg.sampling.d_vis = cfg.camera.d_vis;
        cfg.sampling.d_safe = cfg.camera.d_safe;
        if let Some(m) = &cfg.mesh {
            if m.is_relative() {
                cfg.mesh = Some(base.join(m));
            }
        }
        if cfg.output_dir.is_relative() {
            cfg.output_dir = base.join(&cfg.output_dir);
        }
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_toml(&text, base).with_context(|| format!("in {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        match (&self.mesh, &self.scene) {
            (Some(_), Some(_)) => bail!("set either `mesh` or `scene`, not both"),
            (None, None) => bail!("no input: set `mesh` to a file or `scene` to a generator name"),
            (Some(m), None) if !m.is_file() => bail!("mesh file {} does not exist", m.display()),
            (None, Some(s)) if scenes::by_name(s).is_none() => {
                bail!("unknown scene `{s}` (expected box, courtyard or twin-towers)")
            }
            _ => {}
        }
        self.camera.validate()?;
        self.sampling.validate()?;
        self.solver.validate()?;
        for m in &self.bench.methods {
            if !METHODS.contains(&m.as_str()) {
                bail!("unknown bench method `{m}` (expected one of {})", METHODS.join(", "));
            }
        }
        if self.bench.repeats == 0 {
            bail!("bench.repeats must be at least 1");
        }
        if self.bench.agents.iter().any(|&k| k == 0) {
            bail!("bench.agents entries must be at least 1");
        }
        Ok(())
    }

    pub fn load_mesh(&self) -> Result<TriangleMesh> {
        if let Some(path) = &self.mesh {
            return TriangleMesh::load(path)
                .with_context(|| format!("cannot load mesh {}", path.display()));
        }
        let name = self.scene.as_deref().context("no mesh or scene configured")?;
        Ok(scenes::by_name(name)
            .with_context(|| format!("unknown scene `{name}`"))?
            .mesh)
    }
}

pub(crate) fn write_file(path: &Path, contents: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("cannot write {}", path.display()))
}

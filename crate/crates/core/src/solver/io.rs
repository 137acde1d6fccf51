//! Solution and convergence files.
//!
//! ```text
//! solution 1
//! method <name>
//! seed <u64>
//! patches <m>
//! fitness <f64>
//! max_length <f64>
//! coverage <ratio> <covered>
//! coverage_bits <rle>
//! feasible <true|false>
//! param <key> = <toml value>        (one per solver parameter)
//! routes <K>
//! route <k> <length> <edge count>
//! nodes <id> ...
//! edges <id> ...
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{GenerationStats, Route, Solution, SolverError, SolverParams};
use crate::visibility::CoverageBits;

pub const SOLUTION_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionMeta {
    pub method: String,
    pub seed: u64,
    pub params: SolverParams,
}

/// Everything a solution file holds.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionFile {
    pub meta: SolutionMeta,
    pub fitness: f64,
    pub max_length: f64,
    pub coverage: CoverageBits,
    pub feasible: bool,
    pub routes: Vec<Route>,
}

pub fn solution_to_string(sol: &Solution, meta: &SolutionMeta) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "solution {SOLUTION_FORMAT_VERSION}");
    let _ = writeln!(out, "method {}", meta.method);
    let _ = writeln!(out, "seed {}", meta.seed);
    let _ = writeln!(out, "patches {}", sol.coverage.len());
    let _ = writeln!(out, "fitness {}", sol.fitness);
    let _ = writeln!(out, "max_length {}", sol.max_length());
    let _ = writeln!(out, "coverage {} {}", sol.coverage_ratio(), sol.coverage.count_ones());
    let _ = writeln!(out, "coverage_bits {}", sol.coverage.to_rle());
    let _ = writeln!(out, "feasible {}", sol.feasible);
    let params = toml::to_string(&meta.params).expect("solver params serialize");
    for line in params.lines().filter(|l| !l.trim().is_empty()) {
        let _ = writeln!(out, "param {line}");
    }
    let _ = writeln!(out, "routes {}", sol.routes.len());
    for (k, r) in sol.routes.iter().enumerate() {
        let _ = writeln!(out, "route {k} {} {}", r.length, r.edges.len());
        let _ = writeln!(out, "nodes{}", join(&r.nodes));
        let _ = writeln!(out, "edges{}", join(&r.edges));
    }
    out
}

fn join(ids: &[usize]) -> String {
    ids.iter().map(|i| format!(" {i}")).collect()
}

pub fn write_solution(
    sol: &Solution,
    meta: &SolutionMeta,
    path: impl AsRef<Path>,
) -> Result<(), SolverError> {
    let path = path.as_ref();
    fs::write(path, solution_to_string(sol, meta)).map_err(|source| SolverError::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_solution(path: impl AsRef<Path>) -> Result<SolutionFile, SolverError> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| SolverError::Io {
        path: path.display().to_string(),
        source,
    })?;
    SolutionFile::parse(&text)
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
    line: usize,
}

impl<'a> Lines<'a> {
    fn err(&self, msg: impl Into<String>) -> SolverError {
        SolverError::Parse {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn peek_tag(&self) -> Option<&'a str> {
        self.inner.clone().next().and_then(|(_, l)| l.split_whitespace().next())
    }

    /// Next line, which must start with `tag`; returns the rest of it.
    fn expect(&mut self, tag: &str) -> Result<&'a str, SolverError> {
        let (i, l) = self
            .inner
            .next()
            .ok_or_else(|| self.err(format!("missing `{tag}` line")))?;
        self.line = i + 1;
        let rest = l
            .strip_prefix(tag)
            .filter(|r| r.is_empty() || r.starts_with(' '))
            .ok_or_else(|| self.err(format!("expected `{tag}`")))?;
        Ok(rest.trim())
    }

    fn value<T: std::str::FromStr>(&mut self, tag: &str) -> Result<T, SolverError> {
        let rest = self.expect(tag)?;
        rest.parse().map_err(|_| self.err(format!("bad {tag} value `{rest}`")))
    }

    fn ids(&self, rest: &str) -> Result<Vec<usize>, SolverError> {
        rest.split_whitespace()
            .map(|t| t.parse().map_err(|_| self.err(format!("bad id `{t}`"))))
            .collect()
    }
}

impl SolutionFile {
    pub fn parse(text: &str) -> Result<Self, SolverError> {
        let mut l = Lines {
            inner: text.lines().enumerate(),
            line: 0,
        };
        let version: u32 = l.value("solution")?;
        if version != SOLUTION_FORMAT_VERSION {
            return Err(l.err(format!("unsupported version {version}")));
        }
        let method = l.expect("method")?.to_string();
        let seed: u64 = l.value("seed")?;
        let patches: usize = l.value("patches")?;
        let fitness: f64 = l.value("fitness")?;
        let max_length: f64 = l.value("max_length")?;
        let cov_line = l.expect("coverage")?;
        let covered: usize = cov_line
            .split_whitespace()
            .nth(1)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| l.err("bad coverage line"))?;
        let rle = l.expect("coverage_bits")?;
        let coverage =
            CoverageBits::from_rle(rle, patches).ok_or_else(|| l.err("bad coverage bits"))?;
        if coverage.count_ones() != covered {
            return Err(l.err("covered count disagrees with coverage bits"));
        }
        let feasible: bool = l.value("feasible")?;
        let mut toml_text = String::new();
        while l.peek_tag() == Some("param") {
            toml_text.push_str(l.expect("param")?);
            toml_text.push('\n');
        }
        let params: SolverParams =
            toml::from_str(&toml_text).map_err(|e| l.err(format!("bad params: {e}")))?;
        let count: usize = l.value("routes")?;
        let mut routes = Vec::with_capacity(count);
        for k in 0..count {
            let head = l.expect("route")?;
            let f: Vec<&str> = head.split_whitespace().collect();
            if f.len() != 3 || f[0].parse::<usize>().ok() != Some(k) {
                return Err(l.err("bad route header"));
            }
            let length: f64 = f[1].parse().map_err(|_| l.err("bad route length"))?;
            let n_edges: usize = f[2].parse().map_err(|_| l.err("bad edge count"))?;
            let rest = l.expect("nodes")?;
            let nodes = l.ids(rest)?;
            let rest = l.expect("edges")?;
            let edges = l.ids(rest)?;
            if edges.len() != n_edges || nodes.len() != n_edges + 1 {
                return Err(l.err("route node and edge counts disagree"));
            }
            routes.push(Route {
                nodes,
                edges,
                length,
                key_slots: Vec::new(),
            });
        }
        Ok(Self {
            meta: SolutionMeta {
                method,
                seed,
                params,
            },
            fitness,
            max_length,
            coverage,
            feasible,
            routes,
        })
    }
}

pub fn convergence_csv(history: &[GenerationStats]) -> String {
    let mut out = String::from("generation,best_fitness,mean_fitness,feasible_count\n");
    for h in history {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            h.generation, h.best_fitness, h.mean_fitness, h.feasible_count
        );
    }
    out
}

mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use coverage_planner::app::{verify_solution, RunConfig};
use coverage_planner::cprm::{read_cprm, Cprm, PathPrimitive};
use coverage_planner::solver::read_solution;

fn covplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_covplan")).args(args).output().unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn plan_box(out: &Path, extra: &[&str]) -> Output {
    let cfg = common::config_path("box-quick.toml");
    let mut args = vec!["plan", "--config", s(&cfg), "--out", s(out)];
    args.extend_from_slice(extra);
    covplan(&args)
}

#[test]
fn plan_writes_artifacts_and_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = plan_box(&out, &["--uavs", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    for f in ["config.toml", "cprm.txt", "solution.txt", "convergence.csv", "scene.obj", "scene.mtl", "verification.txt"] {
        assert!(out.join(f).is_file(), "{f} missing");
    }
    let sol = read_solution(out.join("solution.txt")).unwrap();
    assert_eq!(sol.routes.len(), 3);
    assert_eq!(sol.meta.params.agents, 3);
    assert!(sol.feasible);

    let cfg = common::config_path("box-quick.toml");
    let v = covplan(&[
        "verify", "--config", s(&cfg),
        "--cprm", s(&out.join("cprm.txt")),
        "--solution", s(&out.join("solution.txt")),
    ]);
    assert_eq!(v.status.code(), Some(0));
    let text = String::from_utf8_lossy(&v.stdout);
    assert!(text.starts_with("verification PASS"), "{text}");

    let csv = fs::read_to_string(out.join("convergence.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("generation,best_fitness,mean_fitness,feasible_count"));
    assert_eq!(csv.lines().count(), 1 + 31);
}

#[test]
fn replayed_ratio_equals_reported() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert_eq!(plan_box(&out, &[]).status.code(), Some(0));
    let cfg = common::load_config("box-quick.toml");
    let sol = read_solution(out.join("solution.txt")).unwrap();
    let r = verify_solution(&cfg, &read_cprm(out.join("cprm.txt")).unwrap(), &sol).unwrap();
    assert!(r.pass);
    assert!((r.replayed_ratio - r.reported_ratio).abs() <= 1e-12);
    assert!((r.max_length - sol.fitness).abs() <= 1e-9);
}

/// Drops trailing edges of the longest route until the recorded coverage can no longer hold.
fn tamper(text: &str) -> String {
    let lines: Vec<&str> = text.lines().collect();
    let mut out: Vec<String> = lines.iter().map(|l| l.to_string()).collect();
    for i in 0..lines.len() {
        if lines[i].starts_with("route ") {
            let head: Vec<&str> = lines[i].split_whitespace().collect();
            let nodes: Vec<&str> = lines[i + 1].split_whitespace().skip(1).collect();
            let edges: Vec<&str> = lines[i + 2].split_whitespace().skip(1).collect();
            if edges.is_empty() {
                continue;
            }
            let keep = edges.len() / 2;
            out[i] = format!("route {} {} {}", head[1], head[2], keep);
            out[i + 1] = format!("nodes {}", nodes[..=keep].join(" "));
            out[i + 2] = if keep == 0 { "edges".into() } else { format!("edges {}", edges[..keep].join(" ")) };
        }
    }
    out.join("\n") + "\n"
}

#[test]
fn verify_catches_removed_edges() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert_eq!(plan_box(&out, &[]).status.code(), Some(0));
    let text = fs::read_to_string(out.join("solution.txt")).unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, tamper(&text)).unwrap();
    let cfg = common::config_path("box-quick.toml");
    let v = covplan(&["verify", "--config", s(&cfg), "--cprm", s(&out.join("cprm.txt")), "--solution", s(&bad)]);
    assert_eq!(v.status.code(), Some(2), "{}", String::from_utf8_lossy(&v.stdout));
}

#[test]
fn verify_counts_collisions() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert_eq!(plan_box(&out, &[]).status.code(), Some(0));
    let cprm = read_cprm(out.join("cprm.txt")).unwrap();
    let sol = read_solution(out.join("solution.txt")).unwrap();
    // reroute the first flown primitive through the middle of the box
    let target = sol.routes.iter().find_map(|r| r.edges.first().copied()).unwrap();
    let edges: Vec<PathPrimitive> = cprm
        .edges()
        .iter()
        .map(|e| {
            let mut e = e.clone();
            if e.id == target {
                let mid = coverage_planner::geometry::Vec3::new(5.0, 5.0, 5.0);
                e.polyline = vec![e.polyline[0], mid, *e.polyline.last().unwrap()];
            }
            e
        })
        .collect();
    let tampered = Cprm::new(cprm.nodes().to_vec(), edges, cprm.patches().clone()).unwrap();
    let cfg: RunConfig = common::load_config("box-quick.toml");
    let r = verify_solution(&cfg, &tampered, &sol).unwrap();
    assert!(r.collision_violations >= 1);
    assert!(!r.pass);
}

#[test]
fn zero_coverage_target_gives_empty_routes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_text = fs::read_to_string(common::config_path("box-quick.toml"))
        .unwrap()
        .replace("delta_d = 0.95", "delta_d = 0.0");
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, cfg_text).unwrap();
    let out = dir.path().join("run");
    let o = covplan(&["plan", "--config", s(&cfg), "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let sol = read_solution(out.join("solution.txt")).unwrap();
    assert_eq!(sol.fitness, 0.0);
    assert!(sol.routes.iter().all(|r| r.edges.is_empty()));
    // mesh-only export
    let obj = fs::read_to_string(out.join("scene.obj")).unwrap();
    assert!(!obj.lines().any(|l| l.starts_with("l ")));
}

#[test]
fn configuration_errors_exit_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, "mesh = \"missing.obj\"\n").unwrap();
    let o = covplan(&["plan", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("does not exist"));

    fs::write(&cfg, "scene = \"box\"\n[bench]\nmethods = [\"tabu\"]\n").unwrap();
    let o = covplan(&["bench", "--config", s(&cfg)]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn infeasible_ceiling_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_text = fs::read_to_string(common::config_path("box-quick.toml"))
        .unwrap()
        .replace("max_iterations = 20", "max_iterations = 1")
        .replace("initial_sample_count = 20", "initial_sample_count = 2")
        .replace("delta_d = 0.95", "delta_d = 1.0");
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, cfg_text).unwrap();
    let o = covplan(&["plan", "--config", s(&cfg), "--out", s(&dir.path().join("run"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible"));
}

#[test]
fn bench_table_shape_and_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = common::config_path("box-quick.toml");
    let out = dir.path().join("bench");
    let o = covplan(&["bench", "--config", s(&cfg), "--uavs", "1", "--repeats", "1", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("bench.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "method,agents,seed,fitness,coverage,wall_time_s");
    let runs: Vec<&str> = lines[1..].iter().copied().filter(|l| !l.contains(",mean,") && !l.contains(",std,")).collect();
    assert_eq!(runs.len(), 3);
    assert_eq!(lines.len(), 1 + 3 + 6);

    // with two repeats the mean rows are the mean of their own run rows
    let o = covplan(&["bench", "--config", s(&cfg), "--uavs", "1,2", "--repeats", "2", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let csv = fs::read_to_string(out.join("bench.csv")).unwrap();
    let rows: Vec<Vec<&str>> = csv.lines().skip(1).map(|l| l.split(',').collect()).collect();
    for m in rows.iter().filter(|r| r[2] == "mean") {
        let group: Vec<f64> = rows
            .iter()
            .filter(|r| r[0] == m[0] && r[1] == m[1] && r[2] != "mean" && r[2] != "std")
            .map(|r| r[3].parse().unwrap())
            .collect();
        assert_eq!(group.len(), 2);
        let mean = group.iter().sum::<f64>() / 2.0;
        assert!((mean - m[3].parse::<f64>().unwrap()).abs() <= 1e-12);
    }
}

fn parse_obj_groups(text: &str) -> Vec<(String, usize)> {
    let mut groups = Vec::new();
    let mut current = String::new();
    for l in text.lines() {
        if let Some(g) = l.strip_prefix("g ") {
            current = g.to_string();
        } else if let Some(idx) = l.strip_prefix("l ") {
            groups.push((current.clone(), idx.split_whitespace().count()));
        }
    }
    groups
}

#[test]
fn export_scene_has_one_group_per_agent() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    assert_eq!(plan_box(&out, &["--uavs", "3"]).status.code(), Some(0));
    let cfg = common::config_path("box-quick.toml");
    let obj: PathBuf = dir.path().join("export.obj");
    let o = covplan(&[
        "export-scene", "--config", s(&cfg),
        "--cprm", s(&out.join("cprm.txt")),
        "--solution", s(&out.join("solution.txt")),
        "--out", s(&obj),
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&obj).unwrap();
    let mtl = fs::read_to_string(obj.with_extension("mtl")).unwrap();
    let groups = parse_obj_groups(&text);
    let sol = read_solution(out.join("solution.txt")).unwrap();
    let cprm = read_cprm(out.join("cprm.txt")).unwrap();
    let flown: Vec<usize> = (0..3).filter(|&k| !sol.routes[k].edges.is_empty()).collect();
    assert_eq!(groups.len(), flown.len());
    let mut colours: Vec<&str> = mtl.lines().filter(|l| l.starts_with("Kd ")).collect();
    colours.dedup();
    assert_eq!(colours.len(), flown.len() + 1);
    for ((name, count), &k) in groups.iter().zip(&flown) {
        assert_eq!(name, &format!("agent_{k}"));
        // each primitive contributes its interior points; joints are shared
        let r = &sol.routes[k];
        let expected = 1 + r.edges.iter().map(|&e| cprm.edges()[e].polyline.len() - 1).sum::<usize>();
        assert_eq!(*count, expected);
        let straight = r.edges.iter().all(|&e| cprm.edges()[e].polyline.len() == 2);
        if straight {
            assert_eq!(*count, r.nodes.len());
        }
    }
}

#[test]
fn gen_scene_writes_loadable_obj() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("towers.obj");
    let o = covplan(&["gen-scene", "twin-towers", "--out", s(&path)]);
    assert_eq!(o.status.code(), Some(0));
    let mesh = coverage_planner::geometry::TriangleMesh::load(&path).unwrap();
    assert_eq!(mesh.triangle_count(), 32);
    assert_eq!(covplan(&["gen-scene", "pyramid", "--out", s(&path)]).status.code(), Some(1));
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(plan_box(&a, &["--seed", "11"]).status.code(), Some(0));
    assert_eq!(plan_box(&b, &["--seed", "11"]).status.code(), Some(0));
    for f in ["solution.txt", "convergence.csv", "cprm.txt"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let c = dir.path().join("c");
    assert_eq!(plan_box(&c, &["--seed", "12"]).status.code(), Some(0));
    assert_ne!(fs::read(a.join("convergence.csv")).unwrap(), fs::read(c.join("convergence.csv")).unwrap());
}

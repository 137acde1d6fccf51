use super::decode::{evaluate_fitness, fitness_only, Chromosome, Scratch};
use super::{RoutingGraph, Solution, SolverParams};

/// Segment-reversal local search on each decoded walk.
///
/// For a walk `p` and a position `a`, any later position `b > a + 1` holding a neighbour
/// of `p[a]` gives a candidate `p[..=a] + reverse(p[a+1..=b]) + p[b+1..]`, valid when the
/// graph also joins `p[a+1]` and `p[b+1]`. Candidates that shorten the walk locally are
/// written back into the keys that produced the walk and fully re-decoded; the move is
/// kept only if the re-decoded chromosome is feasible with a strictly smaller fitness.
pub fn two_opt_improve(
    chrom: &Chromosome,
    sol: &Solution,
    graph: &RoutingGraph,
    params: &SolverParams,
) -> (Chromosome, Solution) {
    let mut keys = chrom.0.clone();
    let mut best = sol.clone();
    let mut scratch = Scratch::new(graph, params);
    for k in 0..best.routes.len() {
        let mut a = 0;
        while a < best.routes[k].nodes.len() {
            if try_position(&mut keys, &best, k, a, graph, params, &mut scratch) {
                best = evaluate_fitness(&Chromosome(keys.clone()), graph, params);
            } else {
                a += 1;
            }
        }
    }
    (Chromosome(keys), best)
}

/// Tries the reversals anchored at position `a` of walk `k`; on the first accepted one
/// leaves the re-encoded keys in place and returns true.
fn try_position(
    keys: &mut [f64],
    sol: &Solution,
    k: usize,
    a: usize,
    graph: &RoutingGraph,
    params: &SolverParams,
    scratch: &mut Scratch,
) -> bool {
    let route = &sol.routes[k];
    let p = &route.nodes;
    let last = p.len() - 1;
    if route.key_slots.len() != route.edges.len() {
        return false;
    }
    let mut nodes = Vec::new();
    let mut saved = Vec::new();
    for &(vj, e_new) in graph.neighbors(p[a]) {
        for b in (a + 2)..=last {
            if p[b] != vj {
                continue;
            }
            let mut delta = graph.edge(e_new).length - graph.edge(route.edges[a]).length;
            if b < last {
                let Some(e_join) = graph.edge_between(p[a + 1], p[b + 1]) else {
                    continue;
                };
                delta += graph.edge(e_join).length - graph.edge(route.edges[b]).length;
            }
            if delta >= 0.0 {
                continue;
            }
            nodes.clear();
            nodes.extend_from_slice(p);
            nodes[a + 1..=b].reverse();
            saved.clear();
            for t in a..=b.min(last - 1) {
                let nbrs = graph.neighbors(nodes[t]);
                let rank = nbrs
                    .binary_search_by(|probe| probe.0.cmp(&nodes[t + 1]))
                    .expect("reversed walk follows graph edges");
                let slot = route.key_slots[t];
                saved.push((slot, keys[slot]));
                keys[slot] = k as f64 + (rank as f64 + 0.5) / nbrs.len() as f64;
            }
            let (fitness, feasible) = fitness_only(keys, graph, params, scratch);
            if feasible && fitness < sol.fitness {
                return true;
            }
            for &(slot, old) in &saved {
                keys[slot] = old;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::super::fixtures;
    use super::*;

    fn params(agents: usize) -> SolverParams {
        SolverParams {
            agents,
            delta_d: 1.0,
            ..SolverParams::default()
        }
    }

    #[test]
    fn removes_crossing_detour() {
        let g = fixtures::crossing();
        let p = params(1);
        // 0 -> 1 -> 2 -> 3 -> 4, length 5 + 1 + 5 + 1
        let c = Chromosome(vec![0.25, 0.5, 0.9, 0.9]);
        let s = evaluate_fitness(&c, &g, &p);
        assert_eq!(s.routes[0].nodes, vec![0, 1, 2, 3, 4]);
        assert_eq!(s.fitness, 12.0);
        let (c2, s2) = two_opt_improve(&c, &s, &g, &p);
        assert_eq!(s2.routes[0].nodes, vec![0, 2, 1, 3, 4]);
        assert_eq!(s2.fitness, 4.0);
        assert!(s2.feasible);
        assert_eq!(c2.0[0], 0.75);
        assert_eq!(c2.0[1], 0.5);
        assert!((c2.0[2] - 2.5 / 3.0).abs() < 1e-15);
        assert_eq!(c2.0[3], 0.9);
        assert_eq!(evaluate_fitness(&c2, &g, &p), s2);
    }

    #[test]
    fn optimal_routes_unchanged() {
        let g = fixtures::six_node();
        let p = params(2);
        let c = Chromosome(vec![0.2, 1.7, 0.9, 1.95, 0.8, 1.7]);
        let s = evaluate_fitness(&c, &g, &p);
        let (c2, s2) = two_opt_improve(&c, &s, &g, &p);
        assert_eq!(c2, c);
        assert_eq!(s2, s);
    }
}

//! Exhaustive reference for indirect-edge pruning and random scored graphs.

use longcause::graph::CausalGraph;
use rand::Rng;

/// Every simple path from `from` to `to` over the current edges, as node lists.
fn all_paths(g: &CausalGraph, from: usize, to: usize) -> Vec<Vec<usize>> {
    fn walk(g: &CausalGraph, path: &mut Vec<usize>, to: usize, out: &mut Vec<Vec<usize>>) {
        let last = *path.last().unwrap();
        if last == to {
            out.push(path.clone());
            return;
        }
        for next in 0..g.n_nodes() {
            if g.has_edge(last, next) && !path.contains(&next) {
                path.push(next);
                walk(g, path, to, out);
                path.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(g, &mut vec![from], to, &mut out);
    out
}

/// Visits edges by ascending score (ties by index) and removes `u -> v` when
/// a path of two or more edges between its endpoints, in either direction,
/// carries an edge with a strictly larger score. No path limit.
pub fn brute_force_prune(g: &CausalGraph) -> CausalGraph {
    let mut out = g.clone();
    let mut order: Vec<((usize, usize), f64)> = g.edges().map(|(k, e)| (k, e.score)).collect();
    order.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
    for ((u, v), s) in order {
        let mut paths = all_paths(&out, u, v);
        paths.extend(all_paths(&out, v, u));
        let stronger = paths
            .iter()
            .filter(|p| p.len() >= 3)
            .any(|p| p.windows(2).any(|w| out.score(w[0], w[1]).unwrap() > s));
        if stronger {
            out.remove_edge(u, v);
        }
    }
    out
}

/// Random DAG on 2..=8 nodes (edges only from lower to higher index after a
/// random relabeling), scores drawn from a small set so ties occur.
pub fn random_scored_dag(rng: &mut impl Rng) -> CausalGraph {
    let n = rng.random_range(2..=8);
    let mut perm: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        perm.swap(i, rng.random_range(0..=i));
    }
    let density: f64 = rng.random_range(0.2..0.8);
    let mut g = CausalGraph::new((0..n).map(|i| format!("n{i}")).collect());
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(density) {
                let score = rng.random_range(1..=12) as f64 * 0.5;
                g.add_edge(perm[i], perm[j], score).unwrap();
            }
        }
    }
    g
}

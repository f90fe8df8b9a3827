use log::warn;

use super::CausalGraph;

/// Simple paths examined per edge before giving up.
pub const DEFAULT_PATH_CAP: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct PruneReport {
    pub graph: CausalGraph,
    pub removed: Vec<(usize, usize)>,
    /// Edges whose search hit the path cap; their decision rests on the paths seen.
    pub capped: Vec<(usize, usize)>,
}

/// Removes edges that look like indirect causes.
///
/// Edges are visited in ascending score order (ties by index). Edge `u -> v`
/// with score `s` is removed when some simple path of length >= 2 from `u`
/// to `v`, or from `v` to `u`, contains an edge with score strictly greater
/// than `s`. Removals apply immediately to later searches.
pub fn prune_indirect(g: &CausalGraph, path_cap: usize) -> PruneReport {
    let mut graph = g.clone();
    let mut order: Vec<((usize, usize), f64)> = g.edges().map(|(k, e)| (k, e.score)).collect();
    order.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    let mut removed = Vec::new();
    let mut capped = Vec::new();

    for ((u, v), s) in order {
        let mut search = PathSearch::new(&graph, s, path_cap);
        let stronger = search.run(u, v) || search.run(v, u);
        if search.paths >= path_cap {
            warn!(
                "path cap {path_cap} reached while checking {} -> {}",
                g.nodes()[u],
                g.nodes()[v]
            );
            capped.push((u, v));
        }
        if stronger {
            graph.remove_edge(u, v);
            removed.push((u, v));
        }
    }
    PruneReport { graph, removed, capped }
}

struct PathSearch<'a> {
    graph: &'a CausalGraph,
    adj: Vec<Vec<usize>>,
    threshold: f64,
    cap: usize,
    paths: usize,
    visited: Vec<bool>,
}

impl<'a> PathSearch<'a> {
    fn new(graph: &'a CausalGraph, threshold: f64, cap: usize) -> Self {
        Self {
            graph,
            adj: graph.adjacency(),
            threshold,
            cap,
            paths: 0,
            visited: vec![false; graph.n_nodes()],
        }
    }

    /// Whether a qualifying path from `from` to `to` exists.
    fn run(&mut self, from: usize, to: usize) -> bool {
        let reach = self.can_reach(to);
        if !reach[from] {
            return false;
        }
        self.visited.iter_mut().for_each(|x| *x = false);
        self.visited[from] = true;
        self.dfs(from, to, 0, false, &reach)
    }

    /// Nodes from which `target` is reachable.
    fn can_reach(&self, target: usize) -> Vec<bool> {
        let n = self.graph.n_nodes();
        let mut radj = vec![Vec::new(); n];
        for (u, outs) in self.adj.iter().enumerate() {
            for &v in outs {
                radj[v].push(u);
            }
        }
        let mut seen = vec![false; n];
        seen[target] = true;
        let mut stack = vec![target];
        while let Some(x) = stack.pop() {
            for &p in &radj[x] {
                if !seen[p] {
                    seen[p] = true;
                    stack.push(p);
                }
            }
        }
        seen
    }

    fn dfs(&mut self, at: usize, to: usize, depth: usize, stronger: bool, reach: &[bool]) -> bool {
        for i in 0..self.adj[at].len() {
            if self.paths >= self.cap {
                return false;
            }
            let next = self.adj[at][i];
            let s = self.graph.score(at, next).expect("edge in adjacency");
            let stronger_here = stronger || self.threshold < s;
            if next == to {
                if depth >= 1 {
                    self.paths += 1;
                    if stronger_here {
                        return true;
                    }
                }
                continue;
            }
            if self.visited[next] || !reach[next] {
                continue;
            }
            self.visited[next] = true;
            let found = self.dfs(next, to, depth + 1, stronger_here, reach);
            self.visited[next] = false;
            if found {
                return true;
            }
        }
        false
    }
}

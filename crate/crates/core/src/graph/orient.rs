use log::warn;

use super::CausalGraph;

/// For every pair present in both directions, keeps the direction with the
/// larger score. Exact ties keep the edge whose source name sorts first.
pub fn orient_bidirectional(g: &CausalGraph) -> CausalGraph {
    let mut out = g.clone();
    for ((u, v), info) in g.edges() {
        if u > v {
            continue;
        }
        let Some(back) = g.edge(v, u) else { continue };
        let (a, b) = (info.score, back.score);
        if a < b {
            out.remove_edge(u, v);
        } else if b < a {
            out.remove_edge(v, u);
        } else {
            let (nu, nv) = (&g.nodes()[u], &g.nodes()[v]);
            warn!("tied scores {a} on {nu} <-> {nv}; keeping the lexicographically first source");
            if nu <= nv {
                out.remove_edge(v, u);
            } else {
                out.remove_edge(u, v);
            }
        }
    }
    out
}

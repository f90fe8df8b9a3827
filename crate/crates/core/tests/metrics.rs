use longcause::graph::CausalGraph;
use longcause::metrics::score;
use longcause::simgen::GroundTruthGraph;

type Edges = &'static [(&'static str, &'static str)];

/// (truth, predicted, precision, recall, f1), counted by hand.
const TABLE: [(Edges, Edges, f64, f64, f64); 10] = [
    (&[("a", "b"), ("b", "c")], &[("a", "b"), ("b", "c")], 1.0, 1.0, 1.0),
    (&[("a", "b")], &[("b", "a")], 0.0, 0.0, 0.0),
    (&[("a", "b")], &[("a", "b"), ("b", "a")], 0.5, 1.0, 2.0 / 3.0),
    (&[("a", "b")], &[], 0.0, 0.0, 0.0),
    (&[], &[], 1.0, 1.0, 1.0),
    (
        &[("a", "b"), ("b", "c"), ("c", "d")],
        &[("a", "b"), ("a", "c")],
        0.5,
        1.0 / 3.0,
        0.4,
    ),
    (
        &[("a", "b"), ("b", "c")],
        &[("a", "b"), ("b", "c"), ("a", "c")],
        2.0 / 3.0,
        1.0,
        0.8,
    ),
    (
        &[("a", "b"), ("c", "d")],
        &[("a", "b"), ("b", "a"), ("c", "d"), ("d", "c")],
        0.5,
        1.0,
        2.0 / 3.0,
    ),
    (
        &[("a", "b"), ("b", "c"), ("c", "d")],
        &[("b", "a"), ("c", "b"), ("d", "c")],
        0.0,
        0.0,
        0.0,
    ),
    (
        &[("a", "b"), ("a", "c"), ("a", "d")],
        &[("a", "b")],
        1.0,
        1.0 / 3.0,
        0.5,
    ),
];

const NODES: [&str; 4] = ["a", "b", "c", "d"];

fn predicted(edges: Edges, nodes: &[&str]) -> CausalGraph {
    let mut g = CausalGraph::new(nodes.iter().map(|s| s.to_string()).collect());
    for (u, v) in edges {
        g.add_named_edge(u, v, 1.0).unwrap();
    }
    g
}

#[test]
fn hand_counted_table() {
    for (i, (truth, pred, p, r, f1)) in TABLE.iter().enumerate() {
        let t = GroundTruthGraph::from_names(&NODES, truth).unwrap();
        let s = score(&predicted(pred, &NODES), &t).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() < 1e-12;
        assert!(
            close(s.precision, *p) && close(s.recall, *r) && close(s.f1, *f1),
            "case {i}: got ({}, {}, {})",
            s.precision,
            s.recall,
            s.f1
        );
    }
}

#[test]
fn relabeling_both_graphs_preserves_scores() {
    let renamed = ["w", "x", "y", "z"];
    let map = |n: &str| renamed[NODES.iter().position(|m| *m == n).unwrap()];
    for (truth, pred, ..) in TABLE {
        let t = GroundTruthGraph::from_names(&NODES, truth).unwrap();
        let s = score(&predicted(pred, &NODES), &t).unwrap();
        let t2: Vec<(&str, &str)> = truth.iter().map(|(u, v)| (map(u), map(v))).collect();
        let p2: Vec<(&str, &str)> = pred.iter().map(|(u, v)| (map(u), map(v))).collect();
        let t2 = GroundTruthGraph::from_names(&renamed, &t2).unwrap();
        let mut g2 = CausalGraph::new(renamed.iter().map(|s| s.to_string()).collect());
        for (u, v) in p2 {
            g2.add_named_edge(u, v, 1.0).unwrap();
        }
        let s2 = score(&g2, &t2).unwrap();
        assert_eq!((s.precision, s.recall, s.f1), (s2.precision, s2.recall, s2.f1));
    }
}

#[test]
fn f1_is_one_exactly_for_identical_edge_sets() {
    for (truth, pred, _, _, f1) in TABLE {
        let same = {
            let mut a: Vec<_> = truth.to_vec();
            let mut b: Vec<_> = pred.to_vec();
            a.sort();
            b.sort();
            a == b
        };
        assert!((0.0..=1.0).contains(&f1));
        assert_eq!(same, f1 == 1.0);
    }
}

#[test]
fn mismatched_nodes_are_rejected() {
    let t = GroundTruthGraph::from_names(&NODES, &[]).unwrap();
    assert!(score(&predicted(&[], &["a", "b", "c", "e"]), &t).is_err());
}

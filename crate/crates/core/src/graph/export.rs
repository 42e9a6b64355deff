use std::collections::BTreeSet;
use std::fmt::Write;

use serde::{Deserialize, Serialize};

use super::{DependencyGraph, Edge, EdgeStatus};
use crate::error::GraphError;

pub const GRAPH_FORMAT_VERSION: u32 = 1;

fn dot_escape(s: &str) -> String {
    s.replace('\\', "\\\\")
        .replace('"', "\\\"")
        .replace('\n', "\\n")
}

/// Graphviz rendering of the non-removed edges: manifest edges solid,
/// candidates dashed, labels comma-joined.
pub fn to_dot(graph: &DependencyGraph) -> String {
    let mut out = String::from("digraph tdg {\n");
    for node in graph.nodes() {
        let _ = writeln!(out, "  \"{}\";", dot_escape(node));
    }
    for (_, edge) in graph.edges() {
        let style = match edge.status {
            EdgeStatus::Manifest => "solid",
            EdgeStatus::Candidate => "dashed",
            EdgeStatus::Removed => continue,
        };
        let _ = write!(
            out,
            "  \"{}\" -> \"{}\" [style={style}",
            dot_escape(&edge.dependent),
            dot_escape(&edge.prerequisite)
        );
        if !edge.labels.is_empty() {
            let joined: Vec<&str> = edge.labels.iter().map(String::as_str).collect();
            let _ = write!(out, ", label=\"{}\"", dot_escape(&joined.join(",")));
        }
        out.push_str("];\n");
    }
    out.push_str("}\n");
    out
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphDocument {
    format_version: u32,
    nodes: Vec<String>,
    edges: Vec<Edge>,
}

pub fn to_json(graph: &DependencyGraph) -> String {
    let doc = GraphDocument {
        format_version: GRAPH_FORMAT_VERSION,
        nodes: graph.nodes().to_vec(),
        edges: graph.edges().map(|(_, e)| e.clone()).collect(),
    };
    serde_json::to_string_pretty(&doc).expect("graph serializes")
}

pub fn from_json(source: &str) -> Result<DependencyGraph, GraphError> {
    let doc: GraphDocument =
        serde_json::from_str(source).map_err(|e| GraphError::Format(e.to_string()))?;
    if doc.format_version != GRAPH_FORMAT_VERSION {
        return Err(GraphError::Format(format!(
            "unsupported format_version {} (expected {GRAPH_FORMAT_VERSION})",
            doc.format_version
        )));
    }
    let unique: BTreeSet<&String> = doc.nodes.iter().collect();
    if unique.len() != doc.nodes.len() {
        return Err(GraphError::Format("duplicate node names".into()));
    }
    let mut graph = DependencyGraph::from_nodes(doc.nodes);
    for edge in doc.edges {
        let key = graph.key(&edge.dependent, &edge.prerequisite)?;
        if !graph.add_candidate(key, edge.labels.clone(), edge.origin)? {
            return Err(GraphError::Format(format!(
                "duplicate edge {} -> {}",
                edge.dependent, edge.prerequisite
            )));
        }
        if edge.status != EdgeStatus::Candidate {
            graph.set_status(key, edge.status)?;
        }
        if edge.implied {
            graph.edges.get_mut(&key).expect("just inserted").implied = true;
        }
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeOrigin;
    use proptest::prelude::*;

    fn labels(values: &[&str]) -> BTreeSet<String> {
        values.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn empty_graph_documents() {
        let g = DependencyGraph::default();
        assert_eq!(to_dot(&g), "digraph tdg {\n}\n");
        assert_eq!(from_json(&to_json(&g)).unwrap(), g);
    }

    #[test]
    fn candidate_is_dashed_and_removed_is_hidden() {
        let mut g = DependencyGraph::from_nodes(vec!["a".into(), "b".into(), "c".into()]);
        g.add_candidate((1, 0), labels(&["x", "y"]), EdgeOrigin::Extracted)
            .unwrap();
        g.add_candidate((2, 0), labels(&[]), EdgeOrigin::Extracted)
            .unwrap();
        g.set_status((2, 0), EdgeStatus::Removed).unwrap();
        let dot = to_dot(&g);
        assert!(
            dot.contains("  \"b\" -> \"a\" [style=dashed, label=\"x,y\"];\n"),
            "{dot}"
        );
        assert!(!dot.contains("\"c\" -> \"a\""));
    }

    #[test]
    fn rejects_bad_documents() {
        assert!(from_json("{}").is_err());
        let wrong_version = r#"{"format_version":9,"nodes":[],"edges":[]}"#;
        assert!(matches!(
            from_json(wrong_version),
            Err(GraphError::Format(_))
        ));
        let forward = r#"{"format_version":1,"nodes":["a","b"],"edges":[
            {"dependent":"a","prerequisite":"b","labels":[],"status":"CANDIDATE","origin":"EXTRACTED"}]}"#;
        assert!(matches!(
            from_json(forward),
            Err(GraphError::NotBackward { .. })
        ));
    }

    fn arb_graph() -> impl Strategy<Value = DependencyGraph> {
        (1usize..8).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> =
                (0..n).flat_map(|d| (0..d).map(move |p| (d, p))).collect();
            let len = pairs.len();
            (
                Just(n),
                Just(pairs),
                prop::collection::vec(
                    (
                        0u8..4,
                        0u8..3,
                        any::<bool>(),
                        prop::collection::btree_set("[a-z\"]{1,3}", 0..3),
                    ),
                    len,
                ),
            )
                .prop_map(|(n, pairs, attrs)| {
                    let mut g =
                        DependencyGraph::from_nodes((0..n).map(|i| format!("t{i}")).collect());
                    for (key, (status, origin, implied, labels)) in pairs.into_iter().zip(attrs) {
                        if status == 0 {
                            continue;
                        }
                        let origin = [
                            EdgeOrigin::Extracted,
                            EdgeOrigin::Recovered,
                            EdgeOrigin::RecoveredDisconnected,
                        ][origin as usize];
                        g.add_candidate(key, labels, origin).unwrap();
                        match status {
                            2 if implied => g.mark_implied(key).unwrap(),
                            2 => g.set_status(key, EdgeStatus::Manifest).unwrap(),
                            3 => g.set_status(key, EdgeStatus::Removed).unwrap(),
                            _ => {}
                        }
                    }
                    g
                })
        })
    }

    proptest! {
        #[test]
        fn json_round_trips(g in arb_graph()) {
            prop_assert_eq!(from_json(&to_json(&g)).unwrap(), g);
        }

        #[test]
        fn dot_edge_count_matches_live_edges(g in arb_graph()) {
            let arrows = to_dot(&g).matches(" -> ").count();
            prop_assert_eq!(arrows, g.edge_count() - g.count_status(EdgeStatus::Removed));
        }
    }
}

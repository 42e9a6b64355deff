//! Test dependency graph (TDG).
//!
//! Nodes are the suite's tests in original order. An edge points from a
//! dependent to a strictly earlier prerequisite, so the graph is acyclic by
//! construction.

mod export;
mod extract;

pub use export::{from_json, to_dot, to_json, GRAPH_FORMAT_VERSION};
pub use extract::{
    extract_original_order, extract_sub_use, submitted_values, used_values, SubUseOptions,
};

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::GraphError;
use crate::suite::TestSuite;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EdgeStatus {
    Candidate,
    Manifest,
    Removed,
}

impl fmt::Display for EdgeStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EdgeStatus::Candidate => "CANDIDATE",
            EdgeStatus::Manifest => "MANIFEST",
            EdgeStatus::Removed => "REMOVED",
        })
    }
}

/// How an edge entered the graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EdgeOrigin {
    Extracted,
    /// Added while validating a target whose non-inverted schedule failed.
    Recovered,
    /// Added by the post-validation sweep over disconnected tests.
    RecoveredDisconnected,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub dependent: String,
    pub prerequisite: String,
    pub labels: BTreeSet<String>,
    pub status: EdgeStatus,
    pub origin: EdgeOrigin,
    /// Marked manifest because the prerequisite is implied by a path of
    /// manifest edges, without an inversion run.
    #[serde(default)]
    pub implied: bool,
}

/// `(dependent position, prerequisite position)`, 0-based.
pub type EdgeKey = (usize, usize);

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DependencyGraph {
    nodes: Vec<String>,
    index: HashMap<String, usize>,
    edges: BTreeMap<EdgeKey, Edge>,
}

impl DependencyGraph {
    pub fn new(suite: &TestSuite) -> Self {
        Self::from_nodes(suite.names().map(str::to_string).collect())
    }

    /// Caller guarantees names are unique.
    pub fn from_nodes(nodes: Vec<String>) -> Self {
        let index = nodes
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        Self {
            nodes,
            index,
            edges: BTreeMap::new(),
        }
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn name(&self, position: usize) -> &str {
        &self.nodes[position]
    }

    fn require(&self, name: &str) -> Result<usize, GraphError> {
        self.position(name)
            .ok_or_else(|| GraphError::UnknownNode(name.to_string()))
    }

    pub fn key(&self, dependent: &str, prerequisite: &str) -> Result<EdgeKey, GraphError> {
        Ok((self.require(dependent)?, self.require(prerequisite)?))
    }

    /// All edges, sorted by dependent then prerequisite position.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeKey, &Edge)> {
        self.edges.iter().map(|(k, e)| (*k, e))
    }

    pub fn edge(&self, key: EdgeKey) -> Option<&Edge> {
        self.edges.get(&key)
    }

    pub fn edge_by_name(&self, dependent: &str, prerequisite: &str) -> Option<&Edge> {
        self.key(dependent, prerequisite)
            .ok()
            .and_then(|k| self.edges.get(&k))
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn count_status(&self, status: EdgeStatus) -> usize {
        self.edges.values().filter(|e| e.status == status).count()
    }

    pub fn keys_with_status(&self, status: EdgeStatus) -> Vec<EdgeKey> {
        self.edges
            .iter()
            .filter(|(_, e)| e.status == status)
            .map(|(k, _)| *k)
            .collect()
    }

    /// `(dependent, prerequisite)` name pairs with the given status.
    pub fn pairs_with_status(&self, status: EdgeStatus) -> BTreeSet<(String, String)> {
        self.edges
            .values()
            .filter(|e| e.status == status)
            .map(|e| (e.dependent.clone(), e.prerequisite.clone()))
            .collect()
    }

    /// Inserts a new candidate edge. Returns `Ok(false)` when the pair is
    /// already present, in any status.
    /// Copy without removed edges. Validation starts from this so recovery
    /// can bring back edges a static filter dropped.
    pub fn without_removed(&self) -> DependencyGraph {
        let mut out = self.clone();
        out.edges.retain(|_, e| e.status != EdgeStatus::Removed);
        out
    }

    pub fn add_candidate(
        &mut self,
        key: EdgeKey,
        labels: BTreeSet<String>,
        origin: EdgeOrigin,
    ) -> Result<bool, GraphError> {
        let (dependent, prerequisite) = key;
        if dependent >= self.nodes.len() || prerequisite >= self.nodes.len() {
            return Err(GraphError::UnknownNode(format!(
                "#{}",
                dependent.max(prerequisite)
            )));
        }
        if dependent <= prerequisite {
            return Err(GraphError::NotBackward {
                dependent: self.nodes[dependent].clone(),
                prerequisite: self.nodes[prerequisite].clone(),
            });
        }
        if self.edges.contains_key(&key) {
            return Ok(false);
        }
        self.edges.insert(
            key,
            Edge {
                dependent: self.nodes[dependent].clone(),
                prerequisite: self.nodes[prerequisite].clone(),
                labels,
                status: EdgeStatus::Candidate,
                origin,
                implied: false,
            },
        );
        Ok(true)
    }

    fn missing(&self, key: EdgeKey) -> GraphError {
        GraphError::MissingEdge {
            dependent: self.nodes.get(key.0).cloned().unwrap_or_default(),
            prerequisite: self.nodes.get(key.1).cloned().unwrap_or_default(),
        }
    }

    /// Moves a candidate edge to `MANIFEST` or `REMOVED`.
    pub fn set_status(&mut self, key: EdgeKey, status: EdgeStatus) -> Result<(), GraphError> {
        let missing = self.missing(key);
        let edge = self.edges.get_mut(&key).ok_or(missing)?;
        if edge.status != EdgeStatus::Candidate || status == EdgeStatus::Candidate {
            return Err(GraphError::IllegalTransition {
                dependent: edge.dependent.clone(),
                prerequisite: edge.prerequisite.clone(),
                status: edge.status.to_string(),
            });
        }
        edge.status = status;
        Ok(())
    }

    pub fn mark_implied(&mut self, key: EdgeKey) -> Result<(), GraphError> {
        self.set_status(key, EdgeStatus::Manifest)?;
        self.edges.get_mut(&key).expect("checked above").implied = true;
        Ok(())
    }

    /// Drops a label from an edge, returning whether it was present.
    pub fn remove_label(&mut self, key: EdgeKey, label: &str) -> bool {
        self.edges
            .get_mut(&key)
            .is_some_and(|e| e.labels.remove(label))
    }

    /// Non-removed prerequisites of a test.
    pub fn prerequisites(&self, dependent: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges
            .range((dependent, 0)..(dependent + 1, 0))
            .filter(|(_, e)| e.status != EdgeStatus::Removed)
            .map(|(k, _)| k.1)
    }

    /// Number of non-removed edges leaving `position` (its prerequisites).
    pub fn out_degree(&self, position: usize) -> usize {
        self.prerequisites(position).count()
    }

    /// Number of non-removed edges entering `position` (its dependents).
    pub fn in_degree(&self, position: usize) -> usize {
        self.edges
            .iter()
            .filter(|(k, e)| k.1 == position && e.status != EdgeStatus::Removed)
            .count()
    }

    /// Transitive non-removed prerequisites of `dependent`, ignoring the
    /// `skip` edge and any edge rejected by `keep`. Sorted by position.
    pub fn closure_where(
        &self,
        dependent: usize,
        skip: Option<EdgeKey>,
        keep: impl Fn(&Edge) -> bool,
    ) -> BTreeSet<usize> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![dependent];
        while let Some(node) = stack.pop() {
            for (key, edge) in self.edges.range((node, 0)..(node + 1, 0)) {
                if Some(*key) == skip || edge.status == EdgeStatus::Removed || !keep(edge) {
                    continue;
                }
                if seen.insert(key.1) {
                    stack.push(key.1);
                }
            }
        }
        seen
    }

    pub fn closure(&self, dependent: usize) -> BTreeSet<usize> {
        self.closure_where(dependent, None, |_| true)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize) -> DependencyGraph {
        DependencyGraph::from_nodes((1..=n).map(|i| format!("t{i}")).collect())
    }

    #[test]
    fn rejects_forward_and_self_edges() {
        let mut g = graph(3);
        assert!(matches!(
            g.add_candidate((0, 1), BTreeSet::new(), EdgeOrigin::Extracted),
            Err(GraphError::NotBackward { .. })
        ));
        assert!(g
            .add_candidate((1, 1), BTreeSet::new(), EdgeOrigin::Extracted)
            .is_err());
        assert!(g
            .add_candidate((2, 0), BTreeSet::new(), EdgeOrigin::Extracted)
            .unwrap());
        assert!(!g
            .add_candidate((2, 0), BTreeSet::new(), EdgeOrigin::Recovered)
            .unwrap());
        assert_eq!(g.edge_count(), 1);
    }

    #[test]
    fn status_transitions_are_one_way() {
        let mut g = graph(2);
        g.add_candidate((1, 0), BTreeSet::new(), EdgeOrigin::Extracted)
            .unwrap();
        g.set_status((1, 0), EdgeStatus::Removed).unwrap();
        assert!(matches!(
            g.set_status((1, 0), EdgeStatus::Manifest),
            Err(GraphError::IllegalTransition { .. })
        ));
        assert!(matches!(
            g.set_status((0, 1), EdgeStatus::Manifest),
            Err(GraphError::MissingEdge { .. })
        ));
    }

    #[test]
    fn closure_skips_removed_and_target() {
        let mut g = graph(4);
        for key in [(3, 2), (2, 1), (1, 0), (3, 0)] {
            g.add_candidate(key, BTreeSet::new(), EdgeOrigin::Extracted)
                .unwrap();
        }
        assert_eq!(g.closure(3), BTreeSet::from([0, 1, 2]));
        g.set_status((2, 1), EdgeStatus::Removed).unwrap();
        assert_eq!(g.closure(3), BTreeSet::from([0, 2]));
        assert_eq!(
            g.closure_where(3, Some((3, 2)), |_| true),
            BTreeSet::from([0])
        );
        assert_eq!(g.in_degree(0), 2);
        assert_eq!(g.out_degree(2), 0);
    }
}

//! Dependency-free string values: strings shared by so many tests (a default
//! login, say) that the edges they induce are likely false.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use super::{Removal, RemovalReason};
use crate::error::FilterError;
use crate::graph::{DependencyGraph, EdgeStatus};
use crate::suite::TestSuite;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StringFrequency {
    pub value: String,
    pub test_count: usize,
    /// `(dependent, prerequisite)` of every edge labeled with the value.
    pub edge_refs: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct StringFrequencyReport {
    pub test_total: usize,
    pub entries: Vec<StringFrequency>,
}

impl StringFrequencyReport {
    pub fn get(&self, value: &str) -> Option<&StringFrequency> {
        self.entries.iter().find(|e| e.value == value)
    }

    /// Values shown for confirmation: those used by at least half the tests.
    pub fn frequent(&self) -> impl Iterator<Item = &StringFrequency> {
        let threshold = self.test_total.div_ceil(2).max(1);
        self.entries
            .iter()
            .filter(move |e| e.test_count >= threshold)
    }

    /// Values used by every test.
    pub fn universal(&self) -> impl Iterator<Item = &StringFrequency> {
        self.entries
            .iter()
            .filter(move |e| self.test_total > 0 && e.test_count == self.test_total)
    }
}

/// Ranks every edge label by the number of tests whose arguments contain it,
/// descending, ties broken by value.
pub fn rank_string_values(graph: &DependencyGraph, suite: &TestSuite) -> StringFrequencyReport {
    let mut refs: BTreeMap<&str, Vec<(String, String)>> = BTreeMap::new();
    for (_, edge) in graph.edges() {
        for label in &edge.labels {
            refs.entry(label)
                .or_default()
                .push((edge.dependent.clone(), edge.prerequisite.clone()));
        }
    }
    let literal_sets: Vec<BTreeSet<&str>> = suite.tests().iter().map(|t| t.literals()).collect();
    let mut entries: Vec<StringFrequency> = refs
        .into_iter()
        .map(|(value, edge_refs)| StringFrequency {
            value: value.to_string(),
            test_count: literal_sets.iter().filter(|s| s.contains(value)).count(),
            edge_refs,
        })
        .collect();
    entries.sort_by(|a, b| {
        b.test_count
            .cmp(&a.test_count)
            .then_with(|| a.value.cmp(&b.value))
    });
    StringFrequencyReport {
        test_total: suite.len(),
        entries,
    }
}

/// Strips confirmed values (plus, with `auto`, values present in every test)
/// from candidate edge labels. Edges left without labels are removed.
pub fn filter_dependency_free(
    graph: &DependencyGraph,
    report: &StringFrequencyReport,
    confirmed: &BTreeSet<String>,
    auto: bool,
) -> Result<(DependencyGraph, Vec<Removal>), FilterError> {
    if let Some(unknown) = confirmed.iter().find(|v| report.get(v).is_none()) {
        return Err(FilterError::UnknownValue(unknown.clone()));
    }
    let mut values = confirmed.clone();
    if auto {
        values.extend(report.universal().map(|e| e.value.clone()));
    }

    let mut out = graph.clone();
    let mut removed = Vec::new();
    for key in graph.keys_with_status(EdgeStatus::Candidate) {
        let labels = &graph.edge(key).expect("listed key").labels;
        if labels.is_empty() {
            continue;
        }
        let mut last = None;
        for value in values.iter().filter(|v| labels.contains(*v)) {
            out.remove_label(key, value);
            last = Some(value);
        }
        if let Some(value) = last {
            if out.edge(key).expect("listed key").labels.is_empty() {
                out.set_status(key, EdgeStatus::Removed)
                    .expect("candidate edge");
                removed.push(Removal::new(
                    &out,
                    key,
                    RemovalReason::DepFree(value.clone()),
                ));
            }
        }
    }
    Ok((out, removed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{extract_original_order, extract_sub_use, SubUseOptions};
    use crate::manifest::ActionCatalog;
    use crate::suite::parse_suite;

    const SUITE: &str = r#"
TEST a
  sendKeys id=login "admin"
  sendKeys id=name "x"
TEST b
  sendKeys id=login "admin"
  assertText id=out "x"
  sendKeys id=other "y"
TEST c
  sendKeys id=login "admin"
  assertText id=out "y"
"#;

    fn setup() -> (TestSuite, DependencyGraph) {
        let suite = parse_suite(SUITE, None).unwrap();
        let catalog = ActionCatalog::new(["sendKeys", "assertText"], ["sendKeys"]).unwrap();
        let graph = extract_sub_use(&suite, &catalog, SubUseOptions::default());
        (suite, graph)
    }

    #[test]
    fn ranking() {
        let (suite, graph) = setup();
        let report = rank_string_values(&graph, &suite);
        let ranked: Vec<(&str, usize)> = report
            .entries
            .iter()
            .map(|e| (e.value.as_str(), e.test_count))
            .collect();
        assert_eq!(ranked, [("admin", 3), ("x", 2), ("y", 2)]);
        assert_eq!(report.get("admin").unwrap().edge_refs.len(), 3);
        assert_eq!(report.universal().count(), 1);
        assert_eq!(report.frequent().count(), 3);
    }

    #[test]
    fn unlabeled_graph_gives_empty_report() {
        let (suite, _) = setup();
        assert!(rank_string_values(&extract_original_order(&suite), &suite)
            .entries
            .is_empty());
    }

    #[test]
    fn identity_when_nothing_confirmed() {
        let (suite, graph) = setup();
        let report = rank_string_values(&graph, &suite);
        let (out, removed) =
            filter_dependency_free(&graph, &report, &BTreeSet::new(), false).unwrap();
        assert_eq!(out, graph);
        assert!(removed.is_empty());
    }

    #[test]
    fn confirmed_value_strips_labels() {
        let (suite, graph) = setup();
        let report = rank_string_values(&graph, &suite);
        let (out, removed) = filter_dependency_free(
            &graph,
            &report,
            &BTreeSet::from(["admin".to_string()]),
            false,
        )
        .unwrap();
        // b -> a keeps `x`, c -> b keeps `y`, c -> a had only `admin`.
        assert_eq!(out.edge((1, 0)).unwrap().status, EdgeStatus::Candidate);
        assert_eq!(
            out.edge((1, 0)).unwrap().labels,
            BTreeSet::from(["x".to_string()])
        );
        assert_eq!(out.edge((2, 1)).unwrap().status, EdgeStatus::Candidate);
        assert_eq!(out.edge((2, 0)).unwrap().status, EdgeStatus::Removed);
        assert_eq!(removed.len(), 1);
        assert_eq!(removed[0].reason.to_string(), "DEP_FREE:admin");
    }

    #[test]
    fn auto_mode_and_unknown_values() {
        let (suite, graph) = setup();
        let report = rank_string_values(&graph, &suite);
        let (out, _) = filter_dependency_free(&graph, &report, &BTreeSet::new(), true).unwrap();
        assert_eq!(out.edge((2, 0)).unwrap().status, EdgeStatus::Removed);
        let err = filter_dependency_free(
            &graph,
            &report,
            &BTreeSet::from(["nope".to_string()]),
            false,
        )
        .unwrap_err();
        assert_eq!(err, FilterError::UnknownValue("nope".into()));
    }
}

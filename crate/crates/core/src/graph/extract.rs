use std::collections::BTreeSet;

use super::{DependencyGraph, EdgeOrigin};
use crate::manifest::ActionCatalog;
use crate::suite::{TestCase, TestSuite};

/// Connects every test to every earlier test: `n(n-1)/2` unlabeled edges.
pub fn extract_original_order(suite: &TestSuite) -> DependencyGraph {
    let mut graph = DependencyGraph::new(suite);
    for dependent in 1..suite.len() {
        for prerequisite in 0..dependent {
            graph
                .add_candidate(
                    (dependent, prerequisite),
                    BTreeSet::new(),
                    EdgeOrigin::Extracted,
                )
                .expect("backward edge between known nodes");
        }
    }
    graph
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SubUseOptions {
    /// Also treat locator strings as used values.
    pub include_locators: bool,
}

/// Values submitted by `test` through input-submitting actions.
pub fn submitted_values<'a>(test: &'a TestCase, catalog: &ActionCatalog) -> BTreeSet<&'a str> {
    test.statements
        .iter()
        .filter(|s| catalog.is_input_submitting(&s.action))
        .flat_map(|s| s.args.iter().map(String::as_str))
        .collect()
}

/// Every string the test uses: all statement arguments, plus locators when
/// requested.
pub fn used_values(test: &TestCase, options: SubUseOptions) -> BTreeSet<&str> {
    let mut used = test.literals();
    if options.include_locators {
        used.extend(test.statements.iter().map(|s| s.locator.as_str()));
    }
    used
}

/// Sub-use string analysis: for each test `t`, every later test that uses a
/// value `t` submitted gets a candidate edge to `t`, labeled with the shared
/// values. Matching is exact and case-sensitive.
pub fn extract_sub_use(
    suite: &TestSuite,
    catalog: &ActionCatalog,
    options: SubUseOptions,
) -> DependencyGraph {
    let mut graph = DependencyGraph::new(suite);
    let used: Vec<BTreeSet<&str>> = suite
        .tests()
        .iter()
        .map(|t| used_values(t, options))
        .collect();

    for (prerequisite, test) in suite.tests().iter().enumerate() {
        let submitted = submitted_values(test, catalog);
        if submitted.is_empty() {
            continue;
        }
        for (dependent, used) in used.iter().enumerate().skip(prerequisite + 1) {
            let shared: BTreeSet<String> = used
                .intersection(&submitted)
                .map(|s| s.to_string())
                .collect();
            if !shared.is_empty() {
                graph
                    .add_candidate((dependent, prerequisite), shared, EdgeOrigin::Extracted)
                    .expect("backward edge between known nodes");
            }
        }
    }
    graph
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::suite::{parse_suite, Statement};

    fn catalog() -> ActionCatalog {
        ActionCatalog::new(["sendKeys", "click", "assertText"], ["sendKeys"]).unwrap()
    }

    fn suite_of(n: usize) -> TestSuite {
        TestSuite::new(
            (0..n)
                .map(|i| TestCase::new(format!("t{}", i + 1), vec![]))
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn original_order_counts() {
        assert_eq!(extract_original_order(&suite_of(6)).edge_count(), 15);
        assert_eq!(extract_original_order(&suite_of(1)).edge_count(), 0);
        let g = extract_original_order(&suite_of(4));
        assert!(g.edges().all(|(k, e)| k.0 > k.1 && e.labels.is_empty()));
    }

    #[test]
    fn no_submissions_no_prerequisite_role() {
        let suite = parse_suite(
            "TEST a\n  click id=x \"v\"\nTEST b\n  assertText id=y \"v\"\n",
            None,
        )
        .unwrap();
        assert!(submitted_values(&suite.tests()[0], &catalog()).is_empty());
        assert_eq!(
            extract_sub_use(&suite, &catalog(), SubUseOptions::default()).edge_count(),
            0
        );
    }

    #[test]
    fn disjoint_literals_no_edge() {
        let suite = parse_suite(
            "TEST a\n  sendKeys id=x \"one\"\nTEST b\n  sendKeys id=x \"two\"\n",
            None,
        )
        .unwrap();
        assert_eq!(
            extract_sub_use(&suite, &catalog(), SubUseOptions::default()).edge_count(),
            0
        );
    }

    #[test]
    fn locators_only_with_flag() {
        let tests = vec![
            TestCase::new(
                "a",
                vec![Statement::new("sendKeys", "id=x", vec!["id=y".into()])],
            ),
            TestCase::new("b", vec![Statement::new("click", "id=y", vec![])]),
        ];
        let suite = TestSuite::new(tests).unwrap();
        assert_eq!(
            extract_sub_use(&suite, &catalog(), SubUseOptions::default()).edge_count(),
            0
        );
        let g = extract_sub_use(
            &suite,
            &catalog(),
            SubUseOptions {
                include_locators: true,
            },
        );
        assert_eq!(
            g.edge((1, 0)).unwrap().labels,
            BTreeSet::from(["id=y".to_string()])
        );
    }

    #[test]
    fn matching_is_case_sensitive() {
        let suite = parse_suite(
            "TEST a\n  sendKeys id=x \"User\"\nTEST b\n  assertText id=x \"user\"\n",
            None,
        )
        .unwrap();
        assert_eq!(
            extract_sub_use(&suite, &catalog(), SubUseOptions::default()).edge_count(),
            0
        );
    }
}

use std::collections::BTreeSet;

use testdeps::graph::DependencyGraph;
use testdeps::manifest::parse_manifest;
use testdeps::schedule::{derive_schedules, run_parallel, ScheduleSet};
use testdeps::suite::parse_suite;
use testdeps::{AppManifest, EdgeOrigin, EdgeStatus, ScheduleError, Simulator, TestSuite};

const FIXTURES: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/fixtures");

fn claroline() -> (TestSuite, AppManifest) {
    let read = |f: &str| std::fs::read_to_string(format!("{FIXTURES}/{f}")).unwrap();
    let manifest = parse_manifest(&read("claroline.json")).unwrap();
    let suite = parse_suite(&read("claroline.tests"), Some(&manifest.catalog)).unwrap();
    (suite, manifest)
}

fn validated(suite: &TestSuite, edges: &[(&str, &str)]) -> DependencyGraph {
    let mut g = DependencyGraph::new(suite);
    for (d, p) in edges {
        let key = g.key(d, p).unwrap();
        g.add_candidate(key, BTreeSet::new(), EdgeOrigin::Extracted)
            .unwrap();
        g.set_status(key, EdgeStatus::Manifest).unwrap();
    }
    g
}

const FIG2: [(&str, &str); 5] = [
    ("searchUserTest", "addUserTest"),
    ("loginUserTest", "addUserTest"),
    ("searchCourseTest", "addCourseTest"),
    ("enrolUserTest", "addUserTest"),
    ("enrolUserTest", "addCourseTest"),
];

#[test]
fn fixture_schedules_pass() {
    let (suite, manifest) = claroline();
    let set = derive_schedules(&validated(&suite, &FIG2), &manifest).unwrap();
    let outcomes = run_parallel(&set, &Simulator::new(&suite, &manifest)).unwrap();
    assert_eq!(outcomes.len(), 4);
    assert!((set.original_runtime - 75.1).abs() < 1e-9);
}

#[test]
fn dropping_a_manifest_edge_is_caught() {
    let (suite, manifest) = claroline();
    let set = derive_schedules(&validated(&suite, &FIG2[..4]), &manifest).unwrap();
    match run_parallel(&set, &Simulator::new(&suite, &manifest)) {
        Err(ScheduleError::SoundnessViolation { test, schedule, .. }) => {
            assert_eq!(test, "enrolUserTest");
            assert_eq!(schedule, ["addUserTest", "enrolUserTest"]);
        }
        other => panic!("expected a soundness violation, got {other:?}"),
    }
}

#[test]
fn empty_schedule_set_runs_nothing() {
    let (suite, manifest) = claroline();
    let set = ScheduleSet {
        schedules: vec![],
        runtimes: vec![],
        original_runtime: 1.0,
    };
    assert!(run_parallel(&set, &Simulator::new(&suite, &manifest))
        .unwrap()
        .is_empty());
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(name)
}

fn testdeps(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_testdeps"))
        .args(args)
        .env_remove("TESTDEPS_TAXONOMY")
        .env_remove("TESTDEPS_LEXICON")
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn extract_as_dot() {
    let suite = fixture("claroline.tests");
    let manifest = fixture("claroline.json");
    let out = testdeps(&[
        "extract",
        "--suite",
        path(&suite),
        "--manifest",
        path(&manifest),
        "--format",
        "dot",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let dot = stdout(&out);
    assert!(dot.starts_with("digraph tdg {"));
    assert_eq!(dot.matches(" -> ").count(), 13);
}

#[test]
fn stepwise_commands_match_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let suite = fixture("claroline.tests");
    let manifest = fixture("claroline.json");
    let candidate = dir.path().join("candidate.json");
    let filtered = dir.path().join("filtered.json");
    let validated = dir.path().join("validated.json");
    let report = dir.path().join("report.json");
    let events = dir.path().join("events.jsonl");
    let schedules = dir.path().join("schedules.json");
    let metrics = dir.path().join("metrics.json");

    let steps: Vec<Vec<&str>> = vec![
        vec![
            "extract",
            "--suite",
            path(&suite),
            "--manifest",
            path(&manifest),
            "-o",
            path(&candidate),
        ],
        vec![
            "filter",
            "--suite",
            path(&suite),
            "--graph",
            path(&candidate),
            "--filter",
            "dep-free",
            "--assume-yes",
            "admin",
            "--report",
            path(&report),
            "-o",
            path(&filtered),
        ],
        vec![
            "validate",
            "--suite",
            path(&suite),
            "--manifest",
            path(&manifest),
            "--graph",
            path(&filtered),
            "--events",
            path(&events),
            "-o",
            path(&validated),
        ],
        vec![
            "schedule",
            "--suite",
            path(&suite),
            "--manifest",
            path(&manifest),
            "--graph",
            path(&validated),
            "--metrics",
            path(&metrics),
            "-o",
            path(&schedules),
        ],
    ];
    for step in steps {
        let out = testdeps(&step);
        assert!(out.status.success(), "{step:?}: {}", stderr(&out));
    }
    let schedules: Vec<Vec<String>> =
        serde_json::from_str(&fs::read_to_string(&schedules).unwrap()).unwrap();
    assert_eq!(schedules.len(), 4);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(report["confirmed_values"], serde_json::json!(["admin"]));
    assert_eq!(report["removed"].as_array().unwrap().len(), 4);
    let metrics: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&metrics).unwrap()).unwrap();
    assert_eq!(metrics["schedules"], 4);
    assert!(fs::read_to_string(&events).unwrap().lines().count() > 0);
}

#[test]
fn missing_manifest_exits_1_naming_the_path() {
    let missing = fixture("no-such-manifest.json");
    let out = testdeps(&[
        "pipeline",
        "--suite",
        path(&fixture("claroline.tests")),
        "--manifest",
        path(&missing),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("no-such-manifest.json"));
}

#[test]
fn dep_free_without_answers_or_terminal_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = testdeps(&[
        "pipeline",
        "--suite",
        path(&fixture("claroline.tests")),
        "--manifest",
        path(&fixture("claroline.json")),
        "--filter",
        "dep-free",
        "--out",
        path(dir.path()),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("need confirmation"));
}

#[test]
fn assume_no_star_filters_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let out = testdeps(&[
        "pipeline",
        "--suite",
        path(&fixture("claroline.tests")),
        "--manifest",
        path(&fixture("claroline.json")),
        "--filter",
        "dep-free",
        "--assume-no",
        "*",
        "--out",
        path(dir.path()),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("filter_report.json")).unwrap())
            .unwrap();
    assert_eq!(report["confirmed_values"], serde_json::json!([]));
    assert_eq!(report["removed"], serde_json::json!([]));
}

#[test]
fn unsound_graph_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("graph.json");
    let mut doc: serde_json::Value = serde_json::json!({
        "format_version": 1,
        "nodes": ["addUserTest", "searchUserTest", "loginUserTest", "addCourseTest", "searchCourseTest", "enrolUserTest"],
        "edges": []
    });
    for (d, p) in [
        ("searchUserTest", "addUserTest"),
        ("loginUserTest", "addUserTest"),
        ("searchCourseTest", "addCourseTest"),
        ("enrolUserTest", "addUserTest"),
    ] {
        doc["edges"].as_array_mut().unwrap().push(serde_json::json!({
            "dependent": d, "prerequisite": p, "labels": [], "status": "MANIFEST", "origin": "EXTRACTED"
        }));
    }
    fs::write(&graph, doc.to_string()).unwrap();
    let out = testdeps(&[
        "schedule",
        "--suite",
        path(&fixture("claroline.tests")),
        "--manifest",
        path(&fixture("claroline.json")),
        "--graph",
        path(&graph),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
    assert!(stderr(&out).contains("enrolUserTest"));
}

#[test]
fn taxonomy_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_testdeps"))
        .args([
            "pipeline",
            "--suite",
            path(&fixture("claroline.tests")),
            "--manifest",
            path(&fixture("claroline.json")),
            "--filter",
            "nlp-verb",
            "--out",
            path(dir.path()),
        ])
        .env("TESTDEPS_TAXONOMY", dir.path().join("absent.txt"))
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("absent.txt"));
}

#[test]
fn two_nlp_filters_are_rejected() {
    let out = testdeps(&[
        "pipeline",
        "--suite",
        path(&fixture("claroline.tests")),
        "--manifest",
        path(&fixture("claroline.json")),
        "--filter",
        "nlp-verb",
        "--filter",
        "nlp-noun",
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn report_combines_runs() {
    let dir = tempfile::tempdir().unwrap();
    let (suite, manifest) = (fixture("claroline.tests"), fixture("claroline.json"));
    for (name, extra) in [
        ("oo", vec!["--extract", "original-order"]),
        ("noun", vec!["--filter", "nlp-noun"]),
    ] {
        let out_dir = dir.path().join(name);
        let mut args = vec![
            "pipeline",
            "--suite",
            path(&suite),
            "--manifest",
            path(&manifest),
            "--out",
            path(&out_dir),
        ];
        args.extend(extra);
        assert!(testdeps(&args).status.success());
    }
    let out = testdeps(&[
        "report",
        path(&dir.path().join("oo")),
        path(&dir.path().join("noun")),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let table = stdout(&out);
    assert_eq!(table.lines().count(), 3);
    assert!(
        table.contains("Baseline (Original Order)") && table.contains("NLP-Noun (String Analysis)")
    );
}

#[test]
fn generate_is_seeded() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for d in [&a, &b] {
        assert!(testdeps(&["generate", "--seed", "11", "--out", path(d)])
            .status
            .success());
    }
    assert_eq!(
        fs::read(a.join("suite.tests")).unwrap(),
        fs::read(b.join("suite.tests")).unwrap()
    );
    let out = testdeps(&[
        "pipeline",
        "--suite",
        path(&a.join("suite.tests")),
        "--manifest",
        path(&a.join("manifest.json")),
        "--out",
        path(&dir.path().join("run")),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn java_suite_is_imported() {
    let dir = tempfile::tempdir().unwrap();
    let java = dir.path().join("UserTests.java");
    fs::write(
        &java,
        r#"
public class UserTests {
    @Test
    public void addUserTest() {
        driver.findElement(By.id("username")).sendKeys("user001");
    }
    @Test
    public void searchUserTest() {
        driver.findElement(By.id("search_user")).sendKeys("user001");
    }
}
"#,
    )
    .unwrap();
    let out = testdeps(&[
        "extract",
        "--suite",
        path(&java),
        "--manifest",
        path(&fixture("claroline.json")),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let graph: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(graph["edges"][0]["dependent"], "searchUserTest");
}

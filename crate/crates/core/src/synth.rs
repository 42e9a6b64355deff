//! Seeded random suites for property tests and benchmarks.
//!
//! Every generated suite passes in its original order: reads, updates and
//! deletes only touch keys that exist at that point of the run. Some tests
//! share strings without sharing state, and some share state through keys
//! that no string reveals, so extraction yields both false and missing
//! edges.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::manifest::{parse_manifest, AppManifest};
use crate::suite::{parse_suite, TestSuite};

const KINDS: [&str; 5] = ["user", "course", "forum", "event", "group"];

pub const SYNTH_MANIFEST: &str = r#"{
  "actions": ["sendKeys", "click", "assertText"],
  "input_submitting": ["sendKeys"],
  "effects": [
    {"action": "sendKeys", "locator": "id=login", "arity": 1, "effects": [{"kind": "READ", "key": "user:{arg0}"}]},
    {"action": "sendKeys", "locator": "id=new_*", "arity": 2, "effects": [{"kind": "WRITE", "key": "{arg0}:{arg1}"}]},
    {"action": "sendKeys", "locator": "id=edit_*", "arity": 2, "effects": [{"kind": "READ", "key": "{arg0}:{arg1}"}, {"kind": "WRITE", "key": "{arg0}:{arg1}"}]},
    {"action": "sendKeys", "locator": "id=search_*", "arity": 2, "effects": [{"kind": "READ", "key": "{arg0}:{arg1}"}]},
    {"action": "click", "locator": "id=delete_*", "arity": 2, "effects": [{"kind": "DELETE", "key": "{arg0}:{arg1}"}]},
    {"action": "click", "locator": "id=publish", "arity": 1, "effects": [{"kind": "WRITE", "key": "flag:{arg0}"}]},
    {"action": "click", "locator": "id=published", "arity": 1, "effects": [{"kind": "READ", "key": "flag:{arg0}"}]}
  ],
  "initial_state": ["user:admin"]
}"#;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthOptions {
    pub min_tests: usize,
    pub max_tests: usize,
    /// Chance a test logs in as the built-in admin.
    pub admin_login: f64,
    /// Chance a test asserts on a string submitted earlier without using it.
    pub noise: f64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            min_tests: 2,
            max_tests: 10,
            admin_login: 0.7,
            noise: 0.3,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthCase {
    pub seed: u64,
    pub source: String,
    pub suite: TestSuite,
    pub manifest: AppManifest,
}

#[derive(Clone, Copy)]
enum Op {
    Create,
    Read,
    Update,
    Delete,
    Publish,
    CheckPublished,
}

impl Op {
    fn verbs(self) -> &'static [&'static str] {
        match self {
            Op::Create => &["add", "create", "register"],
            Op::Read => &["search", "view", "find"],
            Op::Update => &["edit", "update"],
            Op::Delete => &["delete", "remove"],
            Op::Publish => &["publish"],
            Op::CheckPublished => &["check", "browse"],
        }
    }
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    chars
        .next()
        .map(|c| c.to_uppercase().chain(chars).collect())
        .unwrap_or_default()
}

pub fn synth_manifest() -> AppManifest {
    parse_manifest(SYNTH_MANIFEST).expect("bundled manifest parses")
}

/// Generates one suite from `seed`.
pub fn generate(seed: u64, options: &SynthOptions) -> SynthCase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n =
        rng.gen_range(options.min_tests.max(1)..=options.max_tests.max(options.min_tests.max(1)));
    let mut live: BTreeSet<(&'static str, String)> = BTreeSet::new();
    let mut flags: BTreeSet<&'static str> = BTreeSet::new();
    let mut submitted: Vec<String> = Vec::new();
    let mut names: BTreeSet<String> = BTreeSet::new();
    let mut counter = 0usize;
    let mut source = String::new();

    for _ in 0..n {
        let mut body = String::new();
        if rng.gen_bool(options.admin_login) {
            body.push_str("  sendKeys id=login \"admin\"\n");
        }
        let ops = rng.gen_range(1..=3);
        let mut title: Option<(Op, &str)> = None;
        let mut second_kind: Option<&str> = None;
        for _ in 0..ops {
            let op = pick_op(&mut rng, !live.is_empty(), !flags.is_empty());
            let kind = match op {
                Op::Create | Op::Publish => *KINDS.choose(&mut rng).expect("non-empty"),
                Op::CheckPublished => *flags
                    .iter()
                    .nth(rng.gen_range(0..flags.len()))
                    .expect("non-empty"),
                _ => {
                    live.iter()
                        .nth(rng.gen_range(0..live.len()))
                        .expect("non-empty")
                        .0
                }
            };
            match op {
                Op::Create => {
                    counter += 1;
                    let value = format!("{kind}{counter:03}");
                    let _ = writeln!(body, "  sendKeys id=new_{kind} \"{kind}\" \"{value}\"");
                    submitted.push(value.clone());
                    live.insert((kind, value));
                }
                Op::Read | Op::Update | Op::Delete => {
                    let candidates: Vec<_> =
                        live.iter().filter(|(k, _)| *k == kind).cloned().collect();
                    let (_, value) = candidates.choose(&mut rng).expect("non-empty").clone();
                    let line = match op {
                        Op::Read => format!("  sendKeys id=search_{kind} \"{kind}\" \"{value}\""),
                        Op::Update => format!("  sendKeys id=edit_{kind} \"{kind}\" \"{value}\""),
                        _ => format!("  click id=delete_{kind} \"{kind}\" \"{value}\""),
                    };
                    body.push_str(&line);
                    body.push('\n');
                    if matches!(op, Op::Delete) {
                        live.remove(&(kind, value));
                    }
                }
                Op::Publish => {
                    let _ = writeln!(body, "  click id=publish \"{kind}\"");
                    flags.insert(kind);
                }
                Op::CheckPublished => {
                    let _ = writeln!(body, "  click id=published \"{kind}\"");
                }
            }
            if title.is_some() && second_kind.is_none() {
                second_kind = Some(kind);
            }
            title.get_or_insert((op, kind));
        }
        if !submitted.is_empty() && rng.gen_bool(options.noise) {
            let value = submitted.choose(&mut rng).expect("non-empty");
            let _ = writeln!(body, "  assertText id=flash \"{value}\"");
        }
        let (op, kind) = title.expect("at least one op");
        let verb = op.verbs().choose(&mut rng).expect("non-empty");
        let mut noun = capitalize(kind);
        if let Some(other) = second_kind.filter(|k| *k != kind && rng.gen_bool(0.4)) {
            noun = format!("{noun}{}", capitalize(other));
        }
        let mut name = format!("{verb}{noun}Test");
        let mut suffix = 2;
        while names.contains(&name) {
            name = format!("{verb}{noun}{suffix}Test");
            suffix += 1;
        }
        names.insert(name.clone());
        let _ = writeln!(source, "TEST {name}\n{body}");
    }

    let manifest = synth_manifest();
    let suite = parse_suite(&source, Some(&manifest.catalog)).expect("generated suite parses");
    SynthCase {
        seed,
        source,
        suite,
        manifest,
    }
}

fn pick_op(rng: &mut ChaCha8Rng, has_live: bool, has_flags: bool) -> Op {
    let roll: f64 = rng.gen();
    match roll {
        r if r < 0.08 => Op::Publish,
        r if r < 0.16 && has_flags => Op::CheckPublished,
        _ if !has_live => Op::Create,
        r if r < 0.45 => Op::Create,
        r if r < 0.75 => Op::Read,
        r if r < 0.88 => Op::Update,
        _ => Op::Delete,
    }
}

/// `count` suites from consecutive seeds starting at `first_seed`.
pub fn corpus(first_seed: u64, count: usize, options: &SynthOptions) -> Vec<SynthCase> {
    (0..count as u64)
        .map(|i| generate(first_seed + i, options))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::Simulator;

    #[test]
    fn generated_suites_pass_in_original_order() {
        for case in corpus(0, 200, &SynthOptions::default()) {
            let sim = Simulator::new(&case.suite, &case.manifest);
            assert!(
                sim.baseline_outcomes().is_ok(),
                "seed {}\n{}",
                case.seed,
                case.source
            );
            assert!((2..=10).contains(&case.suite.len()));
        }
    }

    #[test]
    fn same_seed_same_suite() {
        let opts = SynthOptions::default();
        assert_eq!(generate(42, &opts).source, generate(42, &opts).source);
        assert_ne!(generate(42, &opts).source, generate(43, &opts).source);
    }
}
